"""Learning the inverse dictionary kernel over the PSD cone.

The extrapolated Gram matrix E @ S @ E.T is bent toward side information by
minimizing

    J(S) = lam * ||S - S0||_F^2 + ||residual(S)||_F^2

over positive semidefinite S, where S0 is the pseudo-inverse prior from the
landmark block and the residual compares the reconstructed similarities of
the supervised rows against a 0/1 target (optionally through a mask that
limits which pairs are constrained). J is convex, so projected gradient
descent with a backtracking curvature estimate converges; a closed-form
solution of the unconstrained problem provides the warm start.
"""

from dataclasses import dataclass

import numpy as np

from ._arrays import as_index_array, as_square_matrix
from .errors import InputError, StepFailureError
from .kernels import LabelVector, ideal_kernel

SIDE_KINDS = ("labels", "grouping")
CONVERGENCE_REASONS = ("grad_norm", "obj_rel", "max_iters")

# Relative slack for "the accepted step may not increase the objective".
_ACCEPT_SLACK = 1e-12


@dataclass(frozen=True)
class SideInformation:
    """Supervision for dictionary learning.

    kind "labels": ``indices`` selects the supervised rows of E and
    ``target`` is the 0/1 same-class kernel on those rows (``mask`` unused).

    kind "grouping": ``indices`` selects the constrained rows, ``mask``
    flags which pairs carry a constraint, and ``target`` is 1 on must-link
    pairs and 0 elsewhere, with support inside the mask.
    """

    kind: str
    indices: np.ndarray
    target: np.ndarray
    mask: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in SIDE_KINDS:
            raise InputError(f"unknown side-information kind {self.kind!r}")
        indices = as_index_array(self.indices)
        target = np.asarray(self.target, dtype=np.float64)
        l = indices.shape[0]
        if target.shape != (l, l):
            raise InputError(f"target must be {l}x{l}, got {target.shape}")
        if target.size:
            if not np.array_equal(target, target.T):
                raise InputError("target must be symmetric")
            if not np.all((target == 0.0) | (target == 1.0)):
                raise InputError("target entries must be 0 or 1")
        if self.kind == "labels":
            if self.mask is not None:
                raise InputError("label-kind side information takes no mask")
        else:
            if self.mask is None:
                raise InputError("grouping-kind side information requires a mask")
            mask = np.asarray(self.mask, dtype=np.float64)
            if mask.shape != (l, l):
                raise InputError(f"mask must be {l}x{l}, got {mask.shape}")
            if mask.size:
                if not np.array_equal(mask, mask.T):
                    raise InputError("mask must be symmetric")
                if not np.all((mask == 0.0) | (mask == 1.0)):
                    raise InputError("mask entries must be 0 or 1")
                if np.any(target > mask):
                    raise InputError("target support must lie inside the mask")
            object.__setattr__(self, "mask", mask)
        object.__setattr__(self, "indices", indices)
        object.__setattr__(self, "target", target)

    @classmethod
    def from_labels(cls, labels):
        """Build label-kind side information from a LabelVector."""
        if not isinstance(labels, LabelVector):
            raise InputError("from_labels expects a LabelVector")
        if len(labels) == 0:
            return cls(kind="labels", indices=np.empty(0, dtype=np.intp),
                       target=np.zeros((0, 0)))
        return cls(kind="labels", indices=labels.indices, target=ideal_kernel(labels))

    @classmethod
    def from_constraints(cls, must_link, cannot_link):
        """Build grouping-kind side information from pairs of sample indices.

        Both arguments are iterables of (i, j) pairs; i and j must differ and
        no pair may appear in both lists.
        """
        must = {tuple(sorted((int(a), int(b)))) for a, b in must_link}
        cannot = {tuple(sorted((int(a), int(b)))) for a, b in cannot_link}
        for a, b in must | cannot:
            if a == b:
                raise InputError(f"constraint pairs must involve distinct samples, got ({a}, {b})")
            if a < 0:
                raise InputError("constraint indices must be nonnegative")
        conflict = must & cannot
        if conflict:
            raise InputError(f"pairs marked both must-link and cannot-link: {sorted(conflict)}")
        involved = sorted({i for pair in must | cannot for i in pair})
        pos = {idx: row for row, idx in enumerate(involved)}
        c = len(involved)
        mask = np.zeros((c, c))
        target = np.zeros((c, c))
        for a, b in must:
            mask[pos[a], pos[b]] = mask[pos[b], pos[a]] = 1.0
            target[pos[a], pos[b]] = target[pos[b], pos[a]] = 1.0
        for a, b in cannot:
            mask[pos[a], pos[b]] = mask[pos[b], pos[a]] = 1.0
        return cls(kind="grouping", indices=np.asarray(involved, dtype=np.intp),
                   target=target, mask=mask)


@dataclass(frozen=True)
class LearnConfig:
    """Solver settings.

    ``grad_norm_tol`` and ``armijo_a0`` default to None, meaning the
    scale-aware values 1e-6 * (1 + ||S0||_F) and 1e-3 * (1 + ||grad||_F)
    resolved at run time. ``lam = 0`` is legal (pure data fitting); the
    closed-form initializer then does not apply and fitting starts from the
    projected prior.
    """

    lam: float = 1.0
    max_iters: int = 200
    grad_norm_tol: float | None = None
    obj_rel_tol: float = 1e-9
    armijo_a0: float | None = None
    armijo_growth: float = 2.0
    armijo_max_backtracks: int = 60
    symmetrize_each_iter: bool = True

    def __post_init__(self):
        if not (np.isfinite(self.lam) and self.lam >= 0):
            raise InputError(f"lam must be a nonnegative real, got {self.lam}")
        if self.max_iters < 1:
            raise InputError(f"max_iters must be >= 1, got {self.max_iters}")
        if self.grad_norm_tol is not None and not self.grad_norm_tol >= 0:
            raise InputError("grad_norm_tol must be >= 0")
        if not self.obj_rel_tol >= 0:
            raise InputError("obj_rel_tol must be >= 0")
        if self.armijo_a0 is not None and not self.armijo_a0 > 0:
            raise InputError("armijo_a0 must be positive")
        if not self.armijo_growth > 1:
            raise InputError(f"armijo_growth must exceed 1, got {self.armijo_growth}")
        if self.armijo_max_backtracks < 1:
            raise InputError("armijo_max_backtracks must be >= 1")


@dataclass(frozen=True)
class DictionaryState:
    """Learned inverse dictionary kernel alongside its prior.

    S must be symmetric to 1e-10 absolute and PSD up to a -1e-8 relative
    eigenvalue tolerance; violations raise at construction.
    """

    S: np.ndarray
    S0: np.ndarray

    def __post_init__(self):
        S = as_square_matrix(self.S, "S")
        S0 = as_square_matrix(self.S0, "S0")
        if S.shape != S0.shape:
            raise InputError("S and S0 must have equal shape")
        if S.size:
            if float(np.abs(S - S.T).max()) > 1e-10:
                raise InputError("S must be symmetric to 1e-10")
            vals = np.linalg.eigvalsh(0.5 * (S + S.T))
            lo, hi = float(vals[0]), float(vals[-1])
            if lo < -1e-8 * max(hi, 0.0):
                raise InputError(
                    f"S must be PSD: smallest eigenvalue {lo} below tolerance")
        object.__setattr__(self, "S", S)
        object.__setattr__(self, "S0", S0)


@dataclass(frozen=True)
class SolverReport:
    """What happened during fitting.

    ``objective_trace[0]`` is the objective at the initializer and one entry
    follows per accepted step; the sequence never increases.
    ``converged_by`` is one of "grad_norm", "obj_rel", "max_iters" --
    stopping at the iteration cap is reported, not raised.
    """

    iterations: int
    objective_trace: np.ndarray
    final_grad_norm: float
    armijo_backtracks_total: int
    converged_by: str
    iterates: tuple | None = None

    def __post_init__(self):
        if self.converged_by not in CONVERGENCE_REASONS:
            raise InputError(f"unknown convergence reason {self.converged_by!r}")
        trace = np.asarray(self.objective_trace, dtype=np.float64)
        if trace.ndim != 1 or trace.size == 0:
            raise InputError("objective_trace must be a nonempty 1-D sequence")
        rises = np.diff(trace) > _ACCEPT_SLACK * (1.0 + np.abs(trace[:-1]))
        if np.any(rises):
            raise InputError("objective_trace must be non-increasing")
        object.__setattr__(self, "objective_trace", trace)


@dataclass(frozen=True)
class FitResult:
    state: DictionaryState
    report: SolverReport


@dataclass(frozen=True)
class ArmijoResult:
    s_next: np.ndarray
    a_used: float
    backtracks: int
    objective: float


def _supervised_rows(core, side):
    if side.indices.size and int(side.indices.max()) >= core.E.shape[0]:
        raise InputError("side-information indices exceed the number of samples")
    return core.E[side.indices]


def _residual(S, core, side):
    El = _supervised_rows(core, side)
    recon = El @ S @ El.T
    if side.kind == "grouping":
        recon = side.mask * recon
    return recon - side.target


def objective(S, core, side, lam):
    """Penalized fit J(S) = lam * ||S - S0||_F^2 + ||residual(S)||_F^2."""
    S = as_square_matrix(S, "S")
    if S.shape != core.S0.shape:
        raise InputError(f"S must be {core.S0.shape}, got {S.shape}")
    if not (np.isfinite(lam) and lam >= 0):
        raise InputError(f"lam must be a nonnegative real, got {lam}")
    res = _residual(S, core, side)
    prior = S - core.S0
    return float(lam * np.sum(prior * prior) + np.sum(res * res))


def gradient(S, core, side, lam):
    """Analytic gradient of :func:`objective` at S.

    2*lam*(S - S0) + 2 * El.T @ residual @ El. For grouping-kind side
    information the target lives inside the mask, so mask*(recon) - target
    already equals the masked residual the chain rule requires. The result
    is symmetrized to remove floating-point asymmetry.
    """
    S = as_square_matrix(S, "S")
    if S.shape != core.S0.shape:
        raise InputError(f"S must be {core.S0.shape}, got {S.shape}")
    if not (np.isfinite(lam) and lam >= 0):
        raise InputError(f"lam must be a nonnegative real, got {lam}")
    El = _supervised_rows(core, side)
    res = _residual(S, core, side)
    grad = 2.0 * lam * (S - core.S0) + 2.0 * (El.T @ res @ El)
    return 0.5 * (grad + grad.T)


def psd_project(M):
    """Frobenius-nearest PSD matrix: symmetrize, then clamp negative
    eigenvalues to exactly zero."""
    M = as_square_matrix(M, "M")
    if not np.all(np.isfinite(M)):
        raise InputError("matrix contains non-finite entries")
    sym = 0.5 * (M + M.T)
    vals, vecs = np.linalg.eigh(sym)
    out = (vecs * np.maximum(vals, 0.0)) @ vecs.T
    return 0.5 * (out + out.T)


def armijo_step(s_t, grad, cfg, obj_at):
    """One projected-gradient step with a backtracking curvature search.

    Starting from A = cfg.armijo_a0 (or its scale-aware default), the
    candidate psd_project(s_t - grad / A) is accepted once

        J(B) <= J(s_t) + <grad, B - s_t> + (A/2) * ||B - s_t||_F^2,

    with A multiplied by cfg.armijo_growth after every rejection and a hard
    cap of cfg.armijo_max_backtracks rejections. Because the candidate
    minimizes the right-hand side over the PSD cone, an accepted step can
    never increase the objective; that is asserted at run time.
    """
    s_t = as_square_matrix(s_t, "s_t")
    grad = as_square_matrix(grad, "grad")
    if s_t.shape != grad.shape:
        raise InputError("iterate and gradient must have equal shape")
    j_t = float(obj_at(s_t))
    a = cfg.armijo_a0
    if a is None:
        a = 1e-3 * (1.0 + float(np.linalg.norm(grad)))
    backtracks = 0
    while True:
        candidate = psd_project(s_t - grad / a)
        delta = candidate - s_t
        j_cand = float(obj_at(candidate))
        bound = j_t + float(np.sum(grad * delta)) + 0.5 * a * float(np.sum(delta * delta))
        if j_cand <= bound + _ACCEPT_SLACK * (1.0 + abs(j_t)):
            break
        if backtracks >= cfg.armijo_max_backtracks:
            raise StepFailureError(
                f"no acceptable step after {backtracks} curvature doublings")
        a *= cfg.armijo_growth
        backtracks += 1
    if j_cand > j_t + _ACCEPT_SLACK * (1.0 + abs(j_t)):
        raise StepFailureError("accepted step increased the objective")
    return ArmijoResult(s_next=candidate, a_used=float(a), backtracks=backtracks,
                        objective=j_cand)


def init_closed_form(core, side, lam, project=True):
    """Closed-form start: the unconstrained stationary point, PSD-projected.

    Setting the gradient to zero gives the linear system S + P @ S @ P = Q
    with P = (El.T @ El) / sqrt(lam) and Q = S0 + (El.T @ target @ El) / lam.
    Diagonalizing P = U diag(v) U.T turns that into independent scalar
    equations: in the eigenbasis, S_ij = Q_ij / (1 + v_i * v_j). With no
    supervised rows this degenerates to S = S0.

    Defined for label-kind side information with lam > 0; grouping-kind
    callers fall back to the projected prior (see :func:`fit`). Pass
    ``project=False`` to get the raw solution of the linear system.
    """
    if not (np.isfinite(lam) and lam > 0):
        raise InputError(f"closed-form initialization requires lam > 0, got {lam}")
    if side.kind != "labels":
        raise InputError("closed-form initialization applies to label-kind side information")
    El = _supervised_rows(core, side)
    return _closed_form(El, side.target, core.S0, lam, project)


def _closed_form(El, target, S0, lam, project):
    P = (El.T @ El) / np.sqrt(lam)
    Q = S0 + (El.T @ target @ El) / lam
    vals, U = np.linalg.eigh(0.5 * (P + P.T))
    q_tilde = U.T @ Q @ U
    s_tilde = q_tilde / (1.0 + np.outer(vals, vals))
    S = U @ s_tilde @ U.T
    S = 0.5 * (S + S.T)
    return psd_project(S) if project else S


def fit(core, side, cfg, init="auto", record_iterates=False):
    """Minimize the penalized objective over the PSD cone.

    init:
      * "auto": closed form for label-kind side information with lam > 0,
        projected prior otherwise;
      * "prior": always psd_project(S0);
      * "closed_form": force the closed form; for grouping-kind side
        information this solves the unmasked system, a heuristic warm start.

    Iteration stops when the gradient norm falls below grad_norm_tol, when
    the relative objective change falls below obj_rel_tol, or at max_iters;
    the stopping reason lands in the report's ``converged_by``.
    """
    if init not in ("auto", "prior", "closed_form"):
        raise InputError(f"unknown init scheme {init!r}")
    S0 = core.S0
    use_closed = (init == "closed_form") or (
        init == "auto" and side.kind == "labels" and cfg.lam > 0
        and side.indices.size > 0)
    if use_closed:
        if cfg.lam <= 0:
            raise InputError("closed-form initialization requires lam > 0")
        El = _supervised_rows(core, side)
        S = _closed_form(El, side.target, S0, cfg.lam, True)
    else:
        S = psd_project(S0)

    grad_tol = cfg.grad_norm_tol
    if grad_tol is None:
        grad_tol = 1e-6 * (1.0 + float(np.linalg.norm(S0)))

    def obj_at(M):
        return objective(M, core, side, cfg.lam)

    trace = [float(obj_at(S))]
    iterates = [S.copy()] if record_iterates else None
    backtracks_total = 0
    iterations = 0
    converged_by = "max_iters"
    grad = gradient(S, core, side, cfg.lam)
    gnorm = float(np.linalg.norm(grad))
    for _ in range(cfg.max_iters):
        if gnorm <= grad_tol:
            converged_by = "grad_norm"
            break
        step = armijo_step(S, grad, cfg, obj_at)
        S = step.s_next
        if cfg.symmetrize_each_iter:
            S = 0.5 * (S + S.T)
        iterations += 1
        backtracks_total += step.backtracks
        prev = trace[-1]
        current = float(obj_at(S))
        trace.append(current)
        if record_iterates:
            iterates.append(S.copy())
        grad = gradient(S, core, side, cfg.lam)
        gnorm = float(np.linalg.norm(grad))
        if abs(prev - current) <= cfg.obj_rel_tol * max(1.0, abs(prev)):
            converged_by = "obj_rel"
            break
    else:
        converged_by = "max_iters"
    if converged_by == "max_iters" and gnorm <= grad_tol:
        converged_by = "grad_norm"
    report = SolverReport(
        iterations=iterations,
        objective_trace=np.asarray(trace),
        final_grad_norm=gnorm,
        armijo_backtracks_total=backtracks_total,
        converged_by=converged_by,
        iterates=tuple(iterates) if record_iterates else None,
    )
    return FitResult(state=DictionaryState(S=S, S0=S0), report=report)


def factorize(state, rel_tol=1e-12):
    """Factor S = L @ L.T over eigenvalues above rel_tol * largest.

    Accepts a DictionaryState or a bare PSD matrix; columns of L are ordered
    by decreasing eigenvalue. A zero matrix yields an (m, 0) factor.
    """
    S = state.S if isinstance(state, DictionaryState) else as_square_matrix(state, "S")
    if not 0 <= rel_tol < 1:
        raise InputError(f"rel_tol must lie in [0, 1), got {rel_tol}")
    vals, vecs = np.linalg.eigh(0.5 * (S + S.T))
    order = np.argsort(vals)[::-1]
    vals = vals[order]
    vecs = vecs[:, order]
    top = float(vals[0]) if vals.size else 0.0
    keep = vals > max(rel_tol * top, 0.0)
    return vecs[:, keep] * np.sqrt(vals[keep])
