import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tqreg.core import (
    Generalized,
    HardThreshold,
    L0Indicator,
    ProblemInstance,
    RegularizationParams,
    TruncatedQuadratic,
    UnsupportedRegularizerError,
    evaluate_objective,
)
from tqreg.reduction import SubsetSumInstance, build_reduction
from tqreg.solvers import (
    GuardError,
    SolverConfig,
    icm_descent,
    solve_dp,
    solve_dp_identity,
    solve_exact_oracle,
    solve_fixed_breaks,
    solve_local_icm,
)

TQ14 = TruncatedQuadratic(1, 4)


def identity(y, reg=TQ14):
    y = np.asarray(y, dtype=float)
    return ProblemInstance.difference(np.eye(y.size), y, reg)


def random_instance(seed, form="difference", reg=None):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 8))
    m = int(rng.integers(1, 6))
    A = rng.uniform(-3, 3, size=(m, n))
    y = rng.uniform(-3, 3, size=m)
    reg = reg or TruncatedQuadratic(float(rng.uniform(0.1, 5)), float(rng.uniform(0.1, 5)))
    return ProblemInstance.difference(A, y, reg) if form == "difference" else ProblemInstance.direct(A, y, reg)


def test_fixed_breaks_examples():
    zero = solve_fixed_breaks(ProblemInstance.difference(np.eye(2), [0.0, 0.0], TruncatedQuadratic(1, 1)), ())
    np.testing.assert_array_equal(zero.minimizer, [0, 0])
    assert zero.objective == 0
    inst = identity([0, 10])
    broken = solve_fixed_breaks(inst, (1,))
    np.testing.assert_allclose(broken.minimizer, [0, 10], atol=1e-12)
    assert broken.objective == pytest.approx(4)


def test_fixed_breaks_smooth_two_samples():
    # x1^2 + (x2-10)^2 + (x2-x1)^2 is minimized at (10/3, 20/3)
    res = solve_fixed_breaks(identity([0, 10]), ())
    np.testing.assert_allclose(res.minimizer, [10 / 3, 20 / 3], rtol=1e-12)
    assert res.objective == pytest.approx(100 / 3, rel=1e-12)


def test_fixed_breaks_rejects_bad_index():
    with pytest.raises(ValueError):
        solve_fixed_breaks(identity([0, 10]), (2,))


def test_oracle_zero_data():
    inst = random_instance(1)
    inst = ProblemInstance.difference(inst.matrix, np.zeros_like(inst.observation), inst.regularizer)
    res = solve_exact_oracle(inst)
    assert res.objective == 0 and res.break_set == ()
    np.testing.assert_array_equal(res.minimizer, 0)


def test_oracle_single_step():
    res = solve_exact_oracle(identity([0, 0, 10]))
    assert res.objective == pytest.approx(4)
    assert res.break_set == (2,)
    np.testing.assert_allclose(res.minimizer, [0, 0, 10], atol=1e-9)


def test_oracle_no_subset_gadget_is_above_gap():
    art = build_reduction(SubsetSumInstance((2, 4), 3))
    assert solve_exact_oracle(art.instance).objective >= 2.25


def test_oracle_guard():
    inst = ProblemInstance.difference(np.eye(26), np.zeros(26), TQ14)
    with pytest.raises(GuardError, match="guard"):
        solve_exact_oracle(inst)


def test_oracle_rejects_generalized():
    inst = identity([0, 1], Generalized((0, 1), (0, 1)))
    with pytest.raises(UnsupportedRegularizerError):
        solve_exact_oracle(inst)
    with pytest.raises(UnsupportedRegularizerError):
        solve_local_icm(inst)


def test_oracle_single_variable():
    inst = ProblemInstance.difference(np.array([[2.0]]), [4.0], TQ14)
    res = solve_exact_oracle(inst)
    assert res.objective == pytest.approx(0) and res.break_set == ()


@pytest.mark.parametrize("seed", range(25))
@pytest.mark.parametrize("form", ["difference", "direct"])
def test_pruned_search_matches_exhaustive(seed, form):
    inst = random_instance(seed, form)
    a = solve_exact_oracle(inst)
    b = solve_exact_oracle(inst, prune=False)
    assert a.objective == pytest.approx(b.objective, rel=1e-9, abs=1e-12)
    assert a.break_set == b.break_set


@pytest.mark.parametrize("seed", range(10))
def test_pruned_search_matches_exhaustive_l0(seed):
    inst = random_instance(seed, "direct", L0Indicator())
    a = solve_exact_oracle(inst)
    b = solve_exact_oracle(inst, prune=False)
    assert a.objective == pytest.approx(b.objective, rel=1e-9, abs=1e-12)
    assert a.break_set == b.break_set


@pytest.mark.parametrize("a,C", [((1, 2), 3), ((2, 4), 3), ((3, 5, 7), 12), ((1, 1, 1), 5)])
def test_pruned_search_matches_exhaustive_on_gadgets(a, C):
    inst = build_reduction(SubsetSumInstance(a, C)).instance
    p = solve_exact_oracle(inst)
    e = solve_exact_oracle(inst, prune=False)
    assert p.objective == pytest.approx(e.objective, rel=1e-9)
    assert p.break_set == e.break_set


def test_cutoff_mode():
    yes = build_reduction(SubsetSumInstance((1, 2), 3))
    no = build_reduction(SubsetSumInstance((2, 4), 3))
    assert solve_exact_oracle(yes.instance, cutoff=float(yes.threshold)).objective == pytest.approx(2)
    assert solve_exact_oracle(no.instance, cutoff=float(no.threshold)) is None


@pytest.mark.parametrize("seed", range(10))
def test_oracle_objective_is_self_consistent(seed):
    inst = random_instance(seed)
    res = solve_exact_oracle(inst)
    assert evaluate_objective(inst, res.minimizer) == res.objective


def test_dp_examples():
    const = solve_dp_identity([3.0, 3.0, 3.0], RegularizationParams(1, 4))
    np.testing.assert_allclose(const.minimizer, 3.0)
    assert const.objective == pytest.approx(0, abs=1e-20) and const.break_set == ()
    step = solve_dp_identity([0, 0, 10], RegularizationParams(1, 4))
    assert step.objective == pytest.approx(4) and step.break_set == (2,)
    small = solve_dp_identity([0, 0.1], RegularizationParams(1, 100))
    assert small.break_set == ()
    ref = solve_fixed_breaks(identity([0, 0.1], TruncatedQuadratic(1, 100)), ())
    assert small.objective == pytest.approx(ref.objective, rel=1e-12)


def test_dp_rejects_non_identity():
    inst = ProblemInstance.difference(2 * np.eye(3), np.zeros(3), TQ14)
    with pytest.raises(ValueError):
        solve_dp(inst)
    assert solve_dp(identity([0, 0, 10])).break_set == (2,)


@given(
    st.lists(st.floats(-10, 10, allow_nan=False), min_size=1, max_size=9),
    st.floats(0.1, 5),
    st.floats(0.1, 5),
)
def test_dp_matches_oracle(y, alpha, beta):
    reg = TruncatedQuadratic(alpha, beta)
    dp = solve_dp_identity(y, reg)
    ex = solve_exact_oracle(identity(y, reg))
    assert dp.objective == pytest.approx(ex.objective, rel=1e-9, abs=1e-12)
    assert dp.break_set == ex.break_set


def test_dp_with_hard_threshold():
    y = [0.0, 0.05, 3.0, 3.02]
    dp = solve_dp_identity(y, HardThreshold(0.25))
    ex = solve_exact_oracle(identity(y, HardThreshold(0.25)))
    assert dp.objective == pytest.approx(ex.objective, rel=1e-9)
    assert dp.break_set == ex.break_set == (2,)


def test_icm_zero_data():
    inst = identity([0, 0, 0, 0])
    res = solve_local_icm(inst, SolverConfig(starts=3))
    assert res.objective == 0 and res.break_set == ()


def test_icm_finds_gadget_minimum():
    art = build_reduction(SubsetSumInstance((1, 2), 3))
    res = solve_local_icm(art.instance, SolverConfig(starts=50, seed=0))
    assert res.objective <= art.k + 1e-6


@pytest.mark.parametrize("seed", range(15))
def test_icm_never_beats_oracle(seed):
    inst = random_instance(seed)
    local = solve_local_icm(inst, SolverConfig(starts=5, seed=seed))
    assert local.objective >= solve_exact_oracle(inst).objective - 1e-9


@pytest.mark.parametrize("seed", range(10))
def test_icm_history_is_nonincreasing(seed):
    inst = random_instance(seed)
    rng = np.random.default_rng(seed)
    B0 = tuple(int(j) + 1 for j in np.flatnonzero(rng.random(inst.n_penalties) < 0.5))
    h = icm_descent(inst, B0).history
    assert all(b <= a + 1e-9 * max(1, abs(a)) for a, b in zip(h, h[1:]))


def test_icm_is_deterministic():
    inst = random_instance(3)
    cfg = SolverConfig(starts=7, seed=99)
    assert solve_local_icm(inst, cfg).same_as(solve_local_icm(inst, cfg))


@pytest.mark.parametrize("kwargs", [{"starts": 0}, {"tol": 0}, {"max_iters": 0}, {"seed": -1}])
def test_solver_config_validation(kwargs):
    with pytest.raises(ValueError):
        SolverConfig(**kwargs)


@pytest.mark.parametrize("seed", range(20))
@pytest.mark.parametrize("reg", [TruncatedQuadratic(1.4, 1.8), L0Indicator(), HardThreshold(0.7)])
def test_oracle_on_matrices_that_annihilate_constants(seed, reg):
    # A = T D maps constants to zero up to rounding; that column must not be inverted
    from tqreg.diffop import lift_direct_to_difference

    base = random_instance(seed, "direct", reg)
    lifted = lift_direct_to_difference(base)
    p, e = solve_exact_oracle(lifted), solve_exact_oracle(lifted, prune=False)
    assert p.objective == pytest.approx(e.objective, rel=1e-9, abs=1e-12)
    assert p.break_set == e.break_set
    assert e.objective == pytest.approx(solve_exact_oracle(base).objective, rel=1e-9, abs=1e-12)
    assert np.abs(e.minimizer).max() < 1e6
