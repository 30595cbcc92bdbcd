"""Tests for dictionary learning: objective/gradient, PSD projection, the
backtracking step, the closed-form warm start, the fit loop, and factoring."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from gnystrom import (
    DictionaryState,
    InputError,
    KernelParams,
    LabelVector,
    LearnConfig,
    NystromCore,
    SideInformation,
    SolverReport,
    StepFailureError,
    armijo_step,
    build_core,
    factorize,
    fit,
    gradient,
    init_closed_form,
    objective,
    psd_project,
    select_random,
)


def _identity_problem():
    """Two samples sitting on two landmarks with an identity prior whose
    reconstruction already equals the two-class target: the objective is
    exactly zero at the prior."""
    core = NystromCore(E=np.eye(2), W=np.eye(2), S0=np.eye(2),
                       pinv_rank=2, pinv_tol=0.0)
    side = SideInformation(kind="labels", indices=np.array([0, 1]),
                           target=np.eye(2))
    return core, side


def _random_labeled_problem(rng, n=12, m=4, l=5, d=2, bandwidth=3.0):
    X = rng.normal(size=(n, d))
    Z = select_random(X, m, seed=int(rng.integers(1 << 31)))
    core = build_core(X, Z, KernelParams(bandwidth=bandwidth))
    idx = np.sort(rng.choice(n, size=l, replace=False))
    labels = rng.integers(0, 2, size=l)
    side = SideInformation.from_labels(LabelVector(indices=idx, labels=labels))
    return core, side


def _random_grouping_problem(rng, n=12, m=4, d=2, bandwidth=3.0):
    X = rng.normal(size=(n, d))
    Z = select_random(X, m, seed=int(rng.integers(1 << 31)))
    core = build_core(X, Z, KernelParams(bandwidth=bandwidth))
    side = SideInformation.from_constraints(
        must_link=[(0, 1), (2, 3)], cannot_link=[(0, 4), (1, 5)])
    return core, side


def _fd_gradient(S, core, side, lam, h=1e-5):
    G = np.zeros_like(S)
    for i in range(S.shape[0]):
        for j in range(S.shape[1]):
            Sp = S.copy()
            Sm = S.copy()
            Sp[i, j] += h
            Sm[i, j] -= h
            G[i, j] = (objective(Sp, core, side, lam)
                       - objective(Sm, core, side, lam)) / (2.0 * h)
    return G


def _random_symmetric(rng, m):
    A = rng.normal(size=(m, m))
    return 0.5 * (A + A.T)


# ---------------------------------------------------------------------------
# SideInformation


def test_side_information_label_kind_validation():
    with pytest.raises(InputError):
        SideInformation(kind="labels", indices=np.array([0, 1]),
                        target=np.array([[1.0, 0.0], [1.0, 1.0]]))  # asymmetric
    with pytest.raises(InputError):
        SideInformation(kind="labels", indices=np.array([0, 1]),
                        target=np.array([[1.0, 0.5], [0.5, 1.0]]))  # not 0/1
    with pytest.raises(InputError):
        SideInformation(kind="labels", indices=np.array([0, 1]),
                        target=np.eye(2), mask=np.eye(2))  # labels take no mask
    with pytest.raises(InputError):
        SideInformation(kind="other", indices=np.array([0]), target=np.eye(1))


def test_side_information_grouping_kind_validation():
    idx = np.array([0, 1])
    with pytest.raises(InputError):
        SideInformation(kind="grouping", indices=idx, target=np.eye(2))  # no mask
    with pytest.raises(InputError):
        SideInformation(kind="grouping", indices=idx, target=np.eye(2),
                        mask=np.zeros((2, 2)))  # target outside mask
    ok = SideInformation(kind="grouping", indices=idx,
                         target=np.array([[0.0, 1.0], [1.0, 0.0]]),
                         mask=np.ones((2, 2)))
    assert ok.kind == "grouping"


def test_side_information_from_labels():
    lv = LabelVector(indices=[2, 5, 7], labels=["a", "b", "a"])
    side = SideInformation.from_labels(lv)
    assert side.kind == "labels"
    assert np.array_equal(side.indices, [2, 5, 7])
    assert_allclose(side.target, [[1, 0, 1], [0, 1, 0], [1, 0, 1]])


def test_side_information_from_labels_empty():
    side = SideInformation.from_labels(LabelVector(indices=[], labels=[]))
    assert side.indices.size == 0
    assert side.target.shape == (0, 0)


def test_side_information_from_constraints():
    side = SideInformation.from_constraints(must_link=[(3, 1)],
                                            cannot_link=[(1, 5)])
    assert side.kind == "grouping"
    assert np.array_equal(side.indices, [1, 3, 5])
    # rows/cols follow sorted involved indices: 1, 3, 5
    assert_allclose(side.mask, [[0, 1, 1], [1, 0, 0], [1, 0, 0]])
    assert_allclose(side.target, [[0, 1, 0], [1, 0, 0], [0, 0, 0]])


def test_side_information_from_constraints_conflicts():
    with pytest.raises(InputError):
        SideInformation.from_constraints(must_link=[(0, 1)], cannot_link=[(1, 0)])
    with pytest.raises(InputError):
        SideInformation.from_constraints(must_link=[(2, 2)], cannot_link=[])
    with pytest.raises(InputError):
        SideInformation.from_constraints(must_link=[(-1, 2)], cannot_link=[])


# ---------------------------------------------------------------------------
# objective


def test_objective_zero_at_consistent_prior():
    core, side = _identity_problem()
    assert objective(np.eye(2), core, side, lam=1.0) == 0.0


def test_objective_lambda_zero_isolates_residual():
    rng = np.random.default_rng(0)
    core, side = _random_labeled_problem(rng)
    S = psd_project(_random_symmetric(rng, core.m))
    El = core.E[side.indices]
    res = El @ S @ El.T - side.target
    assert_allclose(objective(S, core, side, lam=0.0), np.sum(res * res), rtol=1e-12)


def test_objective_matches_scalar_loops():
    """Independent oracle: evaluate the penalized fit entry by entry."""
    rng = np.random.default_rng(1)
    core, side = _random_labeled_problem(rng, n=6, m=2, l=2)
    S = _random_symmetric(rng, 2)
    lam = 0.7
    El = core.E[side.indices]
    total = 0.0
    for i in range(2):
        for j in range(2):
            total += lam * (S[i, j] - core.S0[i, j]) ** 2
    for a in range(2):
        for b in range(2):
            recon = 0.0
            for i in range(2):
                for j in range(2):
                    recon += El[a, i] * S[i, j] * El[b, j]
            total += (recon - side.target[a, b]) ** 2
    assert_allclose(objective(S, core, side, lam), total, rtol=1e-12)


def test_objective_nonnegative():
    rng = np.random.default_rng(2)
    for _ in range(20):
        core, side = _random_labeled_problem(rng)
        S = _random_symmetric(rng, core.m)
        assert objective(S, core, side, lam=float(rng.uniform(0, 5))) >= 0.0


def test_objective_grouping_applies_mask():
    rng = np.random.default_rng(3)
    core, side = _random_grouping_problem(rng)
    S = _random_symmetric(rng, core.m)
    El = core.E[side.indices]
    res = side.mask * (El @ S @ El.T) - side.target
    expected = 2.0 * np.sum((S - core.S0) ** 2) + np.sum(res * res)
    assert_allclose(objective(S, core, side, lam=2.0), expected, rtol=1e-12)


def test_objective_convexity():
    rng = np.random.default_rng(4)
    core, side = _random_labeled_problem(rng)
    for _ in range(10):
        Sa = _random_symmetric(rng, core.m)
        Sb = _random_symmetric(rng, core.m)
        theta = float(rng.uniform(0.05, 0.95))
        mix = objective(theta * Sa + (1 - theta) * Sb, core, side, 1.3)
        hull = (theta * objective(Sa, core, side, 1.3)
                + (1 - theta) * objective(Sb, core, side, 1.3))
        assert mix <= hull + 1e-10


def test_objective_input_validation():
    core, side = _identity_problem()
    with pytest.raises(InputError):
        objective(np.eye(3), core, side, 1.0)  # wrong shape
    with pytest.raises(InputError):
        objective(np.eye(2), core, side, -1.0)  # negative weight


# ---------------------------------------------------------------------------
# gradient


def test_gradient_zero_at_consistent_prior():
    core, side = _identity_problem()
    assert_allclose(gradient(np.eye(2), core, side, 1.0), np.zeros((2, 2)), atol=1e-15)


def test_gradient_no_supervision_is_prior_pull():
    rng = np.random.default_rng(5)
    core, _ = _random_labeled_problem(rng)
    side = SideInformation.from_labels(LabelVector(indices=[], labels=[]))
    S = _random_symmetric(rng, core.m)
    assert_allclose(gradient(S, core, side, 1.7), 2.0 * 1.7 * (S - core.S0), atol=1e-12)


def test_gradient_matches_finite_differences_labels():
    rng = np.random.default_rng(6)
    for _ in range(10):
        core, side = _random_labeled_problem(rng, n=8, m=3, l=4)
        S = psd_project(_random_symmetric(rng, 3))
        lam = float(rng.uniform(0.1, 3.0))
        analytic = gradient(S, core, side, lam)
        fd = _fd_gradient(S, core, side, lam)
        assert np.all(np.abs(analytic - fd) <= 1e-5 * np.maximum(1.0, np.abs(fd)))


def test_gradient_matches_finite_differences_grouping():
    rng = np.random.default_rng(7)
    for _ in range(10):
        core, side = _random_grouping_problem(rng, n=8, m=3)
        S = psd_project(_random_symmetric(rng, 3))
        lam = float(rng.uniform(0.1, 3.0))
        analytic = gradient(S, core, side, lam)
        fd = _fd_gradient(S, core, side, lam)
        assert np.all(np.abs(analytic - fd) <= 1e-5 * np.maximum(1.0, np.abs(fd)))


def test_gradient_is_symmetric():
    rng = np.random.default_rng(8)
    core, side = _random_labeled_problem(rng)
    S = _random_symmetric(rng, core.m)
    G = gradient(S, core, side, 0.9)
    assert np.array_equal(G, G.T)


# ---------------------------------------------------------------------------
# psd_project


def test_psd_project_fixed_point():
    rng = np.random.default_rng(9)
    A = rng.normal(size=(4, 4))
    P = A @ A.T  # PSD by construction
    assert_allclose(psd_project(P), P, atol=1e-10)


def test_psd_project_clamps_negative_eigenvalue():
    assert_allclose(psd_project(np.diag([1.0, -1.0])), np.diag([1.0, 0.0]), atol=1e-12)


def test_psd_project_matches_eigenvalue_clamp():
    """Independent oracle: clamp the spectrum by hand."""
    rng = np.random.default_rng(10)
    for _ in range(10):
        M = _random_symmetric(rng, 5)
        vals, vecs = np.linalg.eigh(M)
        expected = (vecs * np.maximum(vals, 0.0)) @ vecs.T
        assert_allclose(psd_project(M), expected, atol=1e-10)


def test_psd_project_is_frobenius_nearest():
    rng = np.random.default_rng(11)
    M = _random_symmetric(rng, 4)
    P = psd_project(M)
    base = np.linalg.norm(M - P)
    for _ in range(25):
        A = rng.normal(size=(4, 4))
        candidate = A @ A.T
        assert base <= np.linalg.norm(M - candidate) + 1e-12


def test_psd_project_output_is_psd():
    rng = np.random.default_rng(12)
    for _ in range(10):
        P = psd_project(_random_symmetric(rng, 6))
        vals = np.linalg.eigvalsh(P)
        assert vals.min() >= -1e-12 * max(1.0, vals.max())


def test_psd_project_rejects_nonfinite():
    with pytest.raises(InputError):
        psd_project(np.array([[np.nan, 0.0], [0.0, 1.0]]))


# ---------------------------------------------------------------------------
# armijo_step


def test_armijo_zero_gradient_is_stationary():
    S = np.diag([2.0, 1.0])
    cfg = LearnConfig()
    result = armijo_step(S, np.zeros((2, 2)), cfg, lambda M: float(np.sum(M * M)))
    assert_allclose(result.s_next, S, atol=1e-12)
    assert result.backtracks == 0


def test_armijo_scalar_quadratic_descends():
    # J(s) = 2 (s - 3)^2 on 1x1 matrices, gradient at s=0 is -12.
    def obj(M):
        return float(2.0 * (M[0, 0] - 3.0) ** 2)

    s0 = np.array([[0.0]])
    grad = np.array([[-12.0]])
    result = armijo_step(s0, grad, LearnConfig(), obj)
    assert result.objective < obj(s0)
    assert 0.0 < result.s_next[0, 0] <= 3.0 + 1e-12


def test_armijo_accepted_step_never_increases_objective():
    rng = np.random.default_rng(13)
    core, side = _random_labeled_problem(rng)
    cfg = LearnConfig()
    for _ in range(10):
        S = psd_project(_random_symmetric(rng, core.m))
        lam = float(rng.uniform(0.1, 2.0))
        obj = lambda M: objective(M, core, side, lam)
        result = armijo_step(S, gradient(S, core, side, lam), cfg, obj)
        assert result.objective <= obj(S) + 1e-12 * (1.0 + abs(obj(S)))


def test_armijo_step_failure_on_wrong_direction():
    # A linear objective with the gradient deliberately negated can never
    # satisfy the acceptance inequality, so the curvature search must give up.
    obj = lambda M: float(np.sum(M))
    s0 = np.eye(2)
    wrong_grad = -np.ones((2, 2))
    cfg = LearnConfig(armijo_a0=1.0, armijo_max_backtracks=20)
    with pytest.raises(StepFailureError):
        armijo_step(s0, wrong_grad, cfg, obj)


def test_armijo_shape_mismatch():
    with pytest.raises(InputError):
        armijo_step(np.eye(2), np.eye(3), LearnConfig(), lambda M: 0.0)


# ---------------------------------------------------------------------------
# init_closed_form


def test_init_no_supervision_returns_prior():
    rng = np.random.default_rng(14)
    core, _ = _random_labeled_problem(rng)
    side = SideInformation.from_labels(LabelVector(indices=[], labels=[]))
    assert_allclose(init_closed_form(core, side, lam=1.0), core.S0, atol=1e-10)


def test_init_large_lambda_approaches_prior():
    rng = np.random.default_rng(15)
    core, side = _random_labeled_problem(rng)
    S = init_closed_form(core, side, lam=1e12)
    assert np.abs(S - core.S0).max() < 1e-4


def test_init_solves_stationarity_equation():
    """Pre-projection solution must satisfy S + P @ S @ P = Q."""
    rng = np.random.default_rng(16)
    for lam in (0.01, 1.0, 100.0):
        for _ in range(10):
            core, side = _random_labeled_problem(rng, n=9, m=3, l=2)
            S = init_closed_form(core, side, lam, project=False)
            El = core.E[side.indices]
            P = (El.T @ El) / np.sqrt(lam)
            Q = core.S0 + (El.T @ side.target @ El) / lam
            resid = np.linalg.norm(S + P @ S @ P - Q) / np.linalg.norm(Q)
            assert resid < 1e-8


def test_init_rejects_bad_inputs():
    rng = np.random.default_rng(17)
    core, side = _random_labeled_problem(rng)
    with pytest.raises(InputError):
        init_closed_form(core, side, lam=0.0)
    with pytest.raises(InputError):
        init_closed_form(core, side, lam=-1.0)
    _, grouping = _random_grouping_problem(rng)
    with pytest.raises(InputError):
        init_closed_form(core, grouping, lam=1.0)


# ---------------------------------------------------------------------------
# fit


def test_fit_no_supervision_returns_prior():
    rng = np.random.default_rng(18)
    core, _ = _random_labeled_problem(rng)
    side = SideInformation.from_labels(LabelVector(indices=[], labels=[]))
    result = fit(core, side, LearnConfig(lam=1.0))
    assert_allclose(result.state.S, psd_project(core.S0), atol=1e-10)
    assert result.report.iterations <= 1


def test_fit_consistent_prior_converges_immediately():
    core, side = _identity_problem()
    result = fit(core, side, LearnConfig(lam=1.0))
    assert result.report.iterations == 0
    assert result.report.converged_by == "grad_norm"
    assert result.report.objective_trace[-1] <= 1e-12
    assert_allclose(result.state.S, np.eye(2), atol=1e-10)


def test_fit_never_worse_than_prior_or_warm_start():
    rng = np.random.default_rng(19)
    for _ in range(10):
        core, side = _random_labeled_problem(rng)
        lam = float(rng.uniform(0.1, 2.0))
        result = fit(core, side, LearnConfig(lam=lam))
        final = result.report.objective_trace[-1]
        at_prior = objective(psd_project(core.S0), core, side, lam)
        at_init = result.report.objective_trace[0]
        slack = 1e-9 * (1.0 + abs(at_prior))
        assert final <= at_prior + slack
        assert final <= at_init + slack


def test_fit_trace_nonincreasing_and_iterates_psd():
    rng = np.random.default_rng(20)
    for _ in range(5):
        core, side = _random_labeled_problem(rng)
        result = fit(core, side, LearnConfig(lam=0.5), record_iterates=True)
        trace = result.report.objective_trace
        assert np.all(np.diff(trace) <= 1e-12 * (1.0 + np.abs(trace[:-1])))
        for S in result.report.iterates:
            vals = np.linalg.eigvalsh(S)
            assert vals.min() >= -1e-8 * max(vals.max(), 0.0)


def test_fit_large_lambda_recovers_prior():
    rng = np.random.default_rng(21)
    core, side = _random_labeled_problem(rng)
    result = fit(core, side, LearnConfig(lam=1e12))
    assert np.abs(result.state.S - psd_project(core.S0)).max() < 1e-4


def test_fit_lambda_zero_pure_data_fit():
    rng = np.random.default_rng(22)
    core, side = _random_labeled_problem(rng)
    result = fit(core, side, LearnConfig(lam=0.0))
    start = objective(psd_project(core.S0), core, side, 0.0)
    assert result.report.objective_trace[-1] <= start + 1e-12 * (1.0 + start)


def test_fit_grouping_kind_runs():
    rng = np.random.default_rng(23)
    core, side = _random_grouping_problem(rng)
    result = fit(core, side, LearnConfig(lam=1.0))
    assert result.report.converged_by in ("grad_norm", "obj_rel", "max_iters")
    vals = np.linalg.eigvalsh(result.state.S)
    assert vals.min() >= -1e-8 * max(vals.max(), 0.0)


def test_fit_final_state_symmetric_psd():
    rng = np.random.default_rng(24)
    core, side = _random_labeled_problem(rng)
    result = fit(core, side, LearnConfig(lam=1.0))
    S = result.state.S
    assert np.abs(S - S.T).max() <= 1e-10
    vals = np.linalg.eigvalsh(S)
    assert vals.min() >= -1e-8 * max(vals.max(), 0.0)


def test_fit_reconstruction_stays_psd():
    rng = np.random.default_rng(25)
    core, side = _random_labeled_problem(rng)
    S = fit(core, side, LearnConfig(lam=1.0)).state.S
    recon = core.E @ S @ core.E.T
    vals = np.linalg.eigvalsh(recon)
    assert vals.min() >= -1e-8 * max(vals.max(), 1.0)


def test_fit_rejects_unknown_init():
    core, side = _identity_problem()
    with pytest.raises(InputError):
        fit(core, side, LearnConfig(), init="warm")


def test_fit_deterministic():
    rng = np.random.default_rng(26)
    core, side = _random_labeled_problem(rng)
    a = fit(core, side, LearnConfig(lam=0.7))
    b = fit(core, side, LearnConfig(lam=0.7))
    assert np.array_equal(a.state.S, b.state.S)
    assert np.array_equal(a.report.objective_trace, b.report.objective_trace)


# ---------------------------------------------------------------------------
# reports and states


def test_learn_config_validation():
    with pytest.raises(InputError):
        LearnConfig(lam=-0.5)
    with pytest.raises(InputError):
        LearnConfig(max_iters=0)
    with pytest.raises(InputError):
        LearnConfig(armijo_growth=1.0)
    with pytest.raises(InputError):
        LearnConfig(obj_rel_tol=-1e-9)
    with pytest.raises(InputError):
        LearnConfig(armijo_a0=0.0)


def test_dictionary_state_validation():
    with pytest.raises(InputError):
        DictionaryState(S=np.array([[0.0, 1.0], [0.0, 0.0]]), S0=np.eye(2))
    with pytest.raises(InputError):
        DictionaryState(S=np.diag([1.0, -1.0]), S0=np.eye(2))
    state = DictionaryState(S=np.eye(2), S0=np.eye(2))
    assert state.S.shape == (2, 2)


def test_solver_report_rejects_rising_trace():
    with pytest.raises(InputError):
        SolverReport(iterations=1, objective_trace=np.array([1.0, 2.0]),
                     final_grad_norm=0.0, armijo_backtracks_total=0,
                     converged_by="grad_norm")
    with pytest.raises(InputError):
        SolverReport(iterations=0, objective_trace=np.array([1.0]),
                     final_grad_norm=0.0, armijo_backtracks_total=0,
                     converged_by="other")


# ---------------------------------------------------------------------------
# factorize


def test_factorize_identity():
    L = factorize(np.eye(3))
    assert L.shape == (3, 3)
    assert_allclose(L @ L.T, np.eye(3), atol=1e-10)


def test_factorize_drops_null_directions():
    L = factorize(np.diag([4.0, 0.0]))
    assert L.shape == (2, 1)
    assert_allclose(np.abs(L), [[2.0], [0.0]], atol=1e-12)


def test_factorize_reconstructs_random_psd():
    rng = np.random.default_rng(27)
    for _ in range(10):
        A = rng.normal(size=(5, 3))
        S = A @ A.T  # rank 3 PSD
        L = factorize(S)
        assert L.shape[1] <= 5
        assert np.linalg.norm(L @ L.T - S) <= 1e-8 * np.linalg.norm(S)


def test_factorize_columns_ordered_by_energy():
    rng = np.random.default_rng(28)
    A = rng.normal(size=(6, 6))
    S = A @ A.T
    L = factorize(S)
    energy = np.sum(L * L, axis=0)
    assert np.all(np.diff(energy) <= 1e-12)


def test_factorize_accepts_dictionary_state():
    state = DictionaryState(S=np.diag([2.0, 1.0]), S0=np.eye(2))
    L = factorize(state)
    assert_allclose(L @ L.T, np.diag([2.0, 1.0]), atol=1e-12)


def test_factorize_zero_matrix():
    L = factorize(np.zeros((3, 3)))
    assert L.shape == (3, 0)
