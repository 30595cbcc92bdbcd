"""Regularization-weight selection via the two-factor alignment criterion.

Each candidate weight is scored by the product of two normalized alignments:
how much the learned dictionary kernel still agrees with its pseudo-inverse
prior, and how well the reconstructed similarities of the supervised rows
agree with their target. The candidate maximizing the product wins; ties
resolve toward the smallest weight, and a candidate whose alignment is
undefined scores -inf rather than failing the whole search.
"""

from dataclasses import dataclass, replace

import numpy as np

from .dictlearn import LearnConfig, SolverReport, _supervised_rows, fit
from .errors import InputError, UndefinedAlignmentError
from .kernels import nka_score

DEFAULT_LAMBDA_GRID = (1e-4, 1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3)


@dataclass(frozen=True)
class LambdaRecord:
    """Outcome for one candidate weight; S is kept so the chosen fit can be
    reused without re-running the solver."""

    lam: float
    rho_prior: float
    rho_align: float
    criterion: float
    solver: SolverReport
    S: np.ndarray


@dataclass(frozen=True)
class SelectionReport:
    records: tuple
    chosen_lambda: float

    @property
    def chosen(self):
        for record in self.records:
            if record.lam == self.chosen_lambda:
                return record
        raise InputError("chosen_lambda missing from records")


def validate_grid(grid):
    """Candidate weights must be nonempty, positive, strictly increasing."""
    vals = [float(g) for g in grid]
    if not vals:
        raise InputError("candidate grid must be nonempty")
    if any(not (np.isfinite(v) and v > 0) for v in vals):
        raise InputError("grid candidates must be positive finite reals")
    if any(b <= a for a, b in zip(vals, vals[1:])):
        raise InputError("grid candidates must be strictly increasing")
    return vals


def alignment_scores(S, core, side):
    """(rho_prior, rho_align): alignment of S with the prior, and of the
    reconstructed supervised block with its target."""
    rho_prior = nka_score(S, core.S0)
    El = _supervised_rows(core, side)
    recon = El @ S @ El.T
    if side.kind == "grouping":
        recon = side.mask * recon
    rho_align = nka_score(recon, side.target)
    return rho_prior, rho_align


def select_lambda(core, side, grid=DEFAULT_LAMBDA_GRID, cfg=None):
    """Fit one dictionary per candidate and keep the best-scoring one."""
    vals = validate_grid(grid)
    if side.indices.size == 0:
        raise InputError("selection needs at least one supervised sample")
    if cfg is None:
        cfg = LearnConfig()
    records = []
    for lam in vals:
        result = fit(core, side, replace(cfg, lam=lam))
        S = result.state.S
        try:
            rho_prior, rho_align = alignment_scores(S, core, side)
            criterion = rho_prior * rho_align
        except UndefinedAlignmentError:
            rho_prior = float("nan")
            rho_align = float("nan")
            criterion = float("-inf")
        records.append(LambdaRecord(lam=lam, rho_prior=rho_prior, rho_align=rho_align,
                                    criterion=criterion, solver=result.report, S=S))
    best = 0
    for idx, record in enumerate(records):
        if record.criterion > records[best].criterion:
            best = idx
    return SelectionReport(records=tuple(records), chosen_lambda=records[best].lam)
