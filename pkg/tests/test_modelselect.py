"""Tests for weight selection by the two-factor alignment criterion."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from gnystrom import (
    DEFAULT_LAMBDA_GRID,
    InputError,
    KernelParams,
    LabelVector,
    LearnConfig,
    NystromCore,
    SideInformation,
    alignment_scores,
    build_core,
    double_center,
    fit,
    make_blobs,
    nka_score,
    sample_labeled,
    select_lambda,
    select_random,
    validate_grid,
)


def _blob_problem(seed=0, n=60, m=8, l=10):
    ds = make_blobs(n, d=3, n_classes=2, separation=3.0, seed=seed)
    Z = select_random(ds.X, m, seed=seed)
    core = build_core(ds.X, Z, KernelParams(bandwidth=6.0))
    labeled = sample_labeled(ds, l, seed=seed)
    side = SideInformation.from_labels(labeled)
    return core, side


# ---------------------------------------------------------------------------
# validate_grid


def test_validate_grid_accepts_increasing_positive():
    assert validate_grid((0.1, 1.0, 10.0)) == [0.1, 1.0, 10.0]


def test_validate_grid_rejections():
    with pytest.raises(InputError):
        validate_grid(())
    with pytest.raises(InputError):
        validate_grid((0.0, 1.0))
    with pytest.raises(InputError):
        validate_grid((-1.0, 1.0))
    with pytest.raises(InputError):
        validate_grid((1.0, 1.0))
    with pytest.raises(InputError):
        validate_grid((2.0, 1.0))


def test_default_grid_is_valid():
    assert validate_grid(DEFAULT_LAMBDA_GRID) == list(DEFAULT_LAMBDA_GRID)


# ---------------------------------------------------------------------------
# select_lambda


def test_single_candidate_is_chosen():
    core, side = _blob_problem()
    report = select_lambda(core, side, grid=(0.5,))
    assert report.chosen_lambda == 0.5
    assert len(report.records) == 1


def test_tie_breaks_toward_smallest():
    # The prior already reproduces the target exactly, so every candidate
    # fit stays at the prior and all criteria coincide.
    core = NystromCore(E=np.eye(2), W=np.eye(2), S0=np.eye(2),
                       pinv_rank=2, pinv_tol=0.0)
    side = SideInformation(kind="labels", indices=np.array([0, 1]),
                           target=np.eye(2))
    report = select_lambda(core, side, grid=(0.01, 1.0, 100.0))
    crits = [r.criterion for r in report.records]
    assert_allclose(crits, [crits[0]] * 3, atol=1e-12)
    assert report.chosen_lambda == 0.01


def test_report_is_complete_and_consistent():
    core, side = _blob_problem(seed=1)
    grid = (1e-3, 1e-1, 10.0)
    report = select_lambda(core, side, grid=grid)
    assert tuple(r.lam for r in report.records) == grid
    assert report.chosen_lambda in grid
    for r in report.records:
        if np.isfinite(r.criterion):
            assert abs(r.rho_prior) <= 1.0
            assert abs(r.rho_align) <= 1.0
            assert_allclose(r.criterion, r.rho_prior * r.rho_align, rtol=1e-12)
    best = max(report.records, key=lambda r: r.criterion)
    assert report.chosen.criterion == best.criterion


def test_chosen_matches_exhaustive_recomputation():
    """Independent oracle: refit per candidate and recompute both centered
    cosines from scratch."""
    core, side = _blob_problem(seed=2)
    grid = (1e-3, 1e-1, 10.0)
    report = select_lambda(core, side, grid=grid)

    def centered_cosine(A, B):
        Ac = double_center(A)
        Bc = double_center(B)
        return float(np.sum(Ac * Bc) / (np.linalg.norm(Ac) * np.linalg.norm(Bc)))

    El = core.E[side.indices]
    best_lam, best_crit = None, -np.inf
    for lam in grid:
        S = fit(core, side, LearnConfig(lam=lam)).state.S
        crit = (centered_cosine(S, core.S0)
                * centered_cosine(El @ S @ El.T, side.target))
        if crit > best_crit:
            best_lam, best_crit = lam, crit
    assert report.chosen_lambda == best_lam
    assert_allclose(report.chosen.criterion, best_crit, atol=1e-9)


def test_criterion_scale_invariant():
    core, side = _blob_problem(seed=3)
    S = fit(core, side, LearnConfig(lam=1.0)).state.S
    base = alignment_scores(S, core, side)
    for a in (1e-3, 1e3):
        scaled = alignment_scores(a * S, core, side)
        assert abs(scaled[0] - base[0]) < 1e-10
        assert abs(scaled[1] - base[1]) < 1e-10


def test_undefined_alignment_scores_minus_infinity():
    # A single-class target is constant, so its centered norm vanishes and
    # the candidate must be reported with criterion -inf instead of raising.
    core, _ = _blob_problem(seed=4)
    lv = LabelVector(indices=np.arange(6), labels=np.zeros(6, dtype=np.int64))
    side = SideInformation.from_labels(lv)
    report = select_lambda(core, side, grid=(0.1, 1.0))
    assert all(r.criterion == -np.inf for r in report.records)
    assert all(np.isnan(r.rho_prior) for r in report.records)
    assert report.chosen_lambda == 0.1  # tie-break on the smallest


def test_select_lambda_requires_supervision():
    core, _ = _blob_problem(seed=5)
    side = SideInformation.from_labels(LabelVector(indices=[], labels=[]))
    with pytest.raises(InputError):
        select_lambda(core, side, grid=(1.0,))


def test_select_lambda_deterministic():
    core, side = _blob_problem(seed=6)
    a = select_lambda(core, side, grid=(0.1, 1.0, 10.0))
    b = select_lambda(core, side, grid=(0.1, 1.0, 10.0))
    assert a.chosen_lambda == b.chosen_lambda
    assert [r.criterion for r in a.records] == [r.criterion for r in b.records]


def test_alignment_scores_match_nka_directly():
    core, side = _blob_problem(seed=7)
    S = fit(core, side, LearnConfig(lam=0.5)).state.S
    rho_prior, rho_align = alignment_scores(S, core, side)
    El = core.E[side.indices]
    assert_allclose(rho_prior, nka_score(S, core.S0), rtol=1e-12)
    assert_allclose(rho_align, nka_score(El @ S @ El.T, side.target), rtol=1e-12)
