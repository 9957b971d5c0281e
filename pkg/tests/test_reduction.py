from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tqreg.core import evaluate_objective
from tqreg.reduction import (
    Answer,
    InvalidInstanceError,
    SubsetSumInstance,
    brute_force_subset_sum,
    build_reduction,
    decide_subset_sum,
    extract_certificate,
    gadget_value_exact,
    indicator_point,
    round_to_indicator,
)
from tqreg.solvers import GuardError, SolverConfig, solve_exact_oracle

nonzero = st.integers(-12, 12).filter(lambda v: v != 0)


def test_build_reduction_constants():
    art = build_reduction(SubsetSumInstance((1, 2), 3))
    assert art.epsilon == Fraction(1, 12)
    assert art.P == 576
    assert art.instance.matrix.shape == (3, 4)
    assert art.instance.dimension == 5
    assert art.threshold == Fraction(17, 8)
    assert art.satisfies_bounds()


def test_gadget_values():
    art = build_reduction(SubsetSumInstance((1, 2), 3))
    assert gadget_value_exact(art, [1, 1, 0, 0]) == 2
    single = build_reduction(SubsetSumInstance((-1,), 5))
    assert gadget_value_exact(single, [0, 1]) == 26
    assert evaluate_objective(single.instance, [0, 1]) == pytest.approx(26, rel=1e-12)


@pytest.mark.parametrize("a,C", [((1, 0), 2), ((), 1), ((1, 2), 0), ((1.5,), 1)])
def test_invalid_instances(a, C):
    with pytest.raises(InvalidInstanceError):
        SubsetSumInstance(a, C)


def test_epsilon_override():
    ss = SubsetSumInstance((1,), 1)
    with pytest.raises(InvalidInstanceError, match="1/4"):
        build_reduction(ss, epsilon=Fraction(1, 2))
    art = build_reduction(ss, epsilon=Fraction(1, 8))
    assert art.P == 2 * 64 and art.satisfies_bounds()


def test_indicator_point_examples():
    ss2 = SubsetSumInstance((1, 2), 3)
    np.testing.assert_array_equal(indicator_point(ss2, {1, 2}), [1, 1, 0, 0])
    np.testing.assert_array_equal(indicator_point(ss2, set()), [0, 0, 1, 1])
    ss3 = SubsetSumInstance((1, 2, 3), 3)
    np.testing.assert_array_equal(indicator_point(ss3, {2}), [0, 1, 0, 1, 0, 1])
    with pytest.raises(IndexError):
        indicator_point(ss2, {3})


def test_round_to_indicator():
    np.testing.assert_array_equal(round_to_indicator([0.01, 0.98, -0.02, 1.1]), [0, 1, 0, 1])
    np.testing.assert_array_equal(round_to_indicator([1, 0, 0, 1]), [1, 0, 0, 1])
    np.testing.assert_array_equal(round_to_indicator([0.5]), [0])


def test_extract_certificate():
    cert = extract_certificate(SubsetSumInstance((1, 2), 3), [0.99, 1.02, 0.01, -0.01])
    assert cert.subset == (1, 2) and cert.sum == 3 and cert.valid
    rng = np.random.default_rng(0)
    ss = SubsetSumInstance((2, 4), 3)
    for _ in range(20):
        assert not extract_certificate(ss, rng.uniform(-1, 2, size=4)).valid


@given(st.lists(nonzero, min_size=1, max_size=8), st.data())
def test_indicator_point_value_is_k(a, data):
    mask = data.draw(st.lists(st.booleans(), min_size=len(a), max_size=len(a)))
    S = [i + 1 for i, m in enumerate(mask) if m]
    C = sum(a[i - 1] for i in S)
    if C == 0:
        return
    ss = SubsetSumInstance(tuple(a), C)
    art = build_reduction(ss)
    x = indicator_point(ss, S)
    assert gadget_value_exact(art, x) == ss.k
    assert abs(evaluate_objective(art.instance, x) - ss.k) <= 1e-9
    assert extract_certificate(ss, x).subset == tuple(S)


def test_brute_force_examples():
    d = brute_force_subset_sum(SubsetSumInstance((3, 5, 7), 12))
    assert d.answer is Answer.YES and d.certificate.subset == (2, 3)
    assert brute_force_subset_sum(SubsetSumInstance((2, 4, 6), 5)).answer is Answer.NO
    d = brute_force_subset_sum(SubsetSumInstance((-2, 5), 3))
    assert d.certificate.subset == (1, 2)
    with pytest.raises(GuardError):
        brute_force_subset_sum(SubsetSumInstance(tuple(range(1, 26)), 1))


def test_brute_force_large_integers():
    big = 2**70
    d = brute_force_subset_sum(SubsetSumInstance((big, 1, big), big + 1))
    assert d.certificate.subset == (1, 2)


@pytest.mark.parametrize(
    "a,C,answer,subset",
    [((1, 2), 3, Answer.YES, (1, 2)), ((2, 4), 3, Answer.NO, None), ((1,), 1, Answer.YES, (1,)), ((3, 5, 7), 12, Answer.YES, (2, 3))],
)
def test_decide_examples(a, C, answer, subset):
    d = decide_subset_sum(SubsetSumInstance(a, C))
    assert d.answer is answer
    if subset is not None:
        assert d.certificate.subset == subset and d.certificate.valid
    else:
        assert d.oracle_ran


def test_decide_without_oracle_is_inconclusive_on_no():
    d = decide_subset_sum(SubsetSumInstance((2, 4), 3), SolverConfig(starts=3), use_oracle=False)
    assert d.answer is Answer.INCONCLUSIVE


@given(st.lists(nonzero, min_size=1, max_size=4), st.integers(-30, 30).filter(lambda v: v != 0))
def test_oracle_respects_gap(a, C):
    ss = SubsetSumInstance(tuple(a), C)
    m = solve_exact_oracle(build_reduction(ss).instance).objective
    if brute_force_subset_sum(ss).answer is Answer.YES:
        assert m <= ss.k + 1e-6
    else:
        assert m >= ss.k + 0.25 - 1e-6


@given(st.lists(nonzero, min_size=1, max_size=5), st.integers(-30, 30).filter(lambda v: v != 0), st.integers(0, 1000))
def test_decide_agrees_with_brute_force(a, C, seed):
    ss = SubsetSumInstance(tuple(a), C)
    d = decide_subset_sum(ss, SolverConfig(starts=3, seed=seed))
    assert d.answer is brute_force_subset_sum(ss).answer
    if d.answer is Answer.YES:
        assert sum(ss.a[i - 1] for i in d.certificate.subset) == C
