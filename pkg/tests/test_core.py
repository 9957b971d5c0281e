from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tqreg.core import (
    DimensionError,
    Form,
    Generalized,
    HardThreshold,
    InvalidRegularizerError,
    L0Indicator,
    ProblemInstance,
    RegularizationParams,
    SolveResult,
    TruncatedQuadratic,
    classify_breaks,
    eval_regularizer,
    evaluate_objective,
    fixed_break_objective,
)
from tqreg.reduction import SubsetSumInstance, build_reduction

finite = st.floats(-1e3, 1e3, allow_nan=False)


def test_regularizer_values():
    assert eval_regularizer(TruncatedQuadratic(1, 1), 0.0) == 0.0
    assert eval_regularizer(TruncatedQuadratic(2, 4), 3.0) == 8.0
    assert eval_regularizer(HardThreshold(Fraction(1, 12)), 1.0) == 1.0
    assert eval_regularizer(L0Indicator(), 0.0) == 0.0
    assert eval_regularizer(L0Indicator(), 1e-300) == 1.0


def test_hard_threshold_matches_truncated_quadratic():
    ht = HardThreshold(Fraction(1, 4))
    tq = TruncatedQuadratic(ht.alpha, ht.beta)
    u = np.linspace(-1, 1, 101)
    np.testing.assert_allclose(ht.value(u), tq.value(u), rtol=1e-15)
    assert ht.exact_value(Fraction(1, 8)) == Fraction(1, 4)


@given(alpha=st.floats(0.01, 100), beta=st.floats(0.01, 100), u=finite)
def test_truncated_quadratic_bounded_by_cap(alpha, beta, u):
    r = TruncatedQuadratic(alpha, beta)
    v = eval_regularizer(r, u)
    assert 0.0 <= v <= r.cap * (1 + 1e-15)
    assert v == pytest.approx(alpha * min(u * u, beta))


@pytest.mark.parametrize("alpha,beta", [(0, 1), (-1, 1), (1, 0), (1, float("nan")), (float("inf"), 1)])
def test_invalid_params(alpha, beta):
    with pytest.raises(InvalidRegularizerError):
        RegularizationParams(alpha, beta)


def test_params_threshold_and_regularizer():
    p = RegularizationParams(2.0, 9.0)
    assert p.threshold == 3.0
    assert p.regularizer() == TruncatedQuadratic(2.0, 9.0)


def test_generalized_validation_and_value():
    g = Generalized((0, 0.5, 1.0), (0, 0.25, 1.0))
    assert eval_regularizer(g, -0.25) == pytest.approx(0.125)
    assert eval_regularizer(g, 7.0) == 1.0
    assert g.is_broken(1.0) and not g.is_broken(0.99)
    assert g.weight is None
    with pytest.raises(InvalidRegularizerError):
        Generalized((0.1, 1.0), (0, 1))
    with pytest.raises(InvalidRegularizerError):
        Generalized((0, 1.0), (0, 2))


def test_objective_examples():
    inst = ProblemInstance.difference(np.eye(2), [0.0, 0.0], TruncatedQuadratic(1, 1))
    assert evaluate_objective(inst, [0, 0]) == 0
    assert evaluate_objective(inst, [1, 1]) == 2
    with pytest.raises(DimensionError):
        evaluate_objective(inst, [1, 1, 1])


def test_objective_on_gadget_indicator_point():
    art = build_reduction(SubsetSumInstance((1, 2), 3))
    assert evaluate_objective(art.instance, [1, 1, 0, 0]) == 2.0


def test_classify_breaks_examples():
    inst = ProblemInstance.direct(np.eye(2), [0.0, 0.0], TruncatedQuadratic(1, 1))
    assert classify_breaks(inst, [0.5, 3.0]) == (2,)
    assert classify_breaks(inst, [0.0, 0.0]) == ()
    one = ProblemInstance.direct(np.eye(1), [0.0], TruncatedQuadratic(1, 1))
    assert classify_breaks(one, [1.0]) == (1,)


def test_instance_validation():
    with pytest.raises(DimensionError):
        ProblemInstance.difference(np.eye(2), [0.0], TruncatedQuadratic(1, 1))
    with pytest.raises(DimensionError):
        ProblemInstance(Form.DIRECT, np.eye(2), [0.0, 0.0], TruncatedQuadratic(1, 1), 2)
    inst = ProblemInstance.difference(np.eye(3), np.zeros(3), TruncatedQuadratic(1, 1))
    assert inst.n_penalties == 2 and inst.n_vars == 3
    with pytest.raises(ValueError):
        inst.matrix[0, 0] = 5.0


def test_penalized_per_form():
    d = ProblemInstance.difference(np.eye(3), np.zeros(3), TruncatedQuadratic(1, 1))
    np.testing.assert_array_equal(d.penalized([0, 1, 3]), [1, 2])
    t = ProblemInstance.direct(np.eye(2), np.zeros(2), TruncatedQuadratic(1, 1))
    np.testing.assert_array_equal(t.penalized([4, 5]), [4, 5])


@given(st.lists(finite, min_size=3, max_size=3), st.lists(finite, min_size=3, max_size=3))
def test_true_objective_is_min_over_break_sets(x, y):
    inst = ProblemInstance.difference(np.eye(3), y, TruncatedQuadratic(1.5, 2.0))
    values = [fixed_break_objective(inst, x, B) for B in [(), (1,), (2,), (1, 2)]]
    assert evaluate_objective(inst, x) == pytest.approx(min(values), rel=1e-12, abs=1e-9)
    assert fixed_break_objective(inst, x, classify_breaks(inst, x)) == pytest.approx(evaluate_objective(inst, x), rel=1e-12)


def test_fixed_break_objective_l0_is_infinite_off_support():
    inst = ProblemInstance.direct(np.eye(2), [1.0, 0.0], L0Indicator())
    assert fixed_break_objective(inst, [1.0, 0.5], (1,)) == float("inf")
    assert fixed_break_objective(inst, [1.0, 0.0], (1,)) == 1.0


def test_solve_result_same_as():
    a = SolveResult(np.array([1.0, 2.0]), 3.0, (2, 1), "X")
    b = SolveResult(np.array([1.0, 2.0]), 3.0, (1, 2), "X")
    assert a.break_set == (1, 2)
    assert a.same_as(b)
    assert not a.same_as(SolveResult(np.array([1.0, 2.0 + 1e-16 * 4]), 3.0, (1, 2), "X"))
