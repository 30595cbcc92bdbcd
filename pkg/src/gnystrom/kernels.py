"""Gaussian kernels, Gram-matrix assembly, target kernels, and alignment.

Everything downstream works with an explicit kernel ``k(x, y) =
exp(-||x - y||^2 / b)``; the bandwidth ``b`` is normally picked with
:func:`bandwidth_heuristic`. :func:`nka_score` is the normalized alignment
between two kernel matrices after double-centering, used both as a fit
diagnostic and as the model-selection criterion.
"""

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from ._arrays import as_data_matrix, as_index_array, as_square_matrix, as_vector
from .errors import DegenerateBandwidthError, InputError, UndefinedAlignmentError

KERNEL_FAMILIES = ("rbf",)

# Centered operands with Frobenius norm below this (relative to the raw
# operand) are treated as zero, i.e. alignment is undefined for them.
_ZERO_ALIGNMENT_RTOL = 1e-13


@dataclass(frozen=True)
class KernelParams:
    """Kernel family plus its bandwidth.

    Only the Gaussian family is implemented: ``k(x, y) =
    exp(-||x - y||^2 / bandwidth)``, so the bandwidth is in squared-distance
    units.
    """

    bandwidth: float
    family: str = "rbf"

    def __post_init__(self):
        if self.family not in KERNEL_FAMILIES:
            raise InputError(f"unknown kernel family {self.family!r}")
        bw = float(self.bandwidth)
        if not (np.isfinite(bw) and bw > 0.0):
            raise InputError(f"bandwidth must be positive and finite, got {self.bandwidth}")
        object.__setattr__(self, "bandwidth", bw)


@dataclass(frozen=True)
class LabelVector:
    """Class labels attached to a subset of sample rows.

    ``indices`` are row positions into a data matrix and must be distinct;
    ``labels[i]`` is the class of row ``indices[i]``.
    """

    indices: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        indices = as_index_array(self.indices)
        labels = np.asarray(self.labels)
        if labels.ndim != 1:
            raise InputError("labels must be 1-D")
        if indices.shape[0] != labels.shape[0]:
            raise InputError("indices and labels must have equal length")
        object.__setattr__(self, "indices", indices)
        object.__setattr__(self, "labels", labels)

    def __len__(self):
        return int(self.indices.shape[0])


def rbf_kernel(x, y, params):
    """Evaluate the Gaussian kernel for one pair of points."""
    xv = as_vector(x, "x")
    yv = as_vector(y, "y")
    if xv.shape != yv.shape:
        raise InputError(f"points must share a dimension, got {xv.shape} and {yv.shape}")
    diff = xv - yv
    return float(np.exp(-(diff @ diff) / params.bandwidth))


def kernel_matrix(A, B, params):
    """Pairwise kernel matrix between the rows of A and the rows of B.

    Squared distances are computed pairwise (no expansion tricks), so calling
    this with the same array on both sides gives an exactly symmetric result
    with a unit diagonal.
    """
    A = as_data_matrix(A, "A")
    B = as_data_matrix(B, "B")
    if A.shape[1] != B.shape[1]:
        raise InputError(
            f"operands must share a feature dimension, got {A.shape[1]} and {B.shape[1]}"
        )
    sq = cdist(A, B, "sqeuclidean")
    return np.exp(-sq / params.bandwidth)


def bandwidth_heuristic(X, *, exact=None, subsample_threshold=2000,
                        subsample_pairs=1_000_000, seed=0):
    """Mean squared Euclidean distance over unordered sample pairs.

    Up to ``subsample_threshold`` samples (or with ``exact=True`` at any
    size) the mean is computed in closed form from centered squared norms,
    which equals the average over all n*(n-1)/2 pairs exactly. Beyond the
    threshold it is estimated from ``subsample_pairs`` pairs drawn with a
    fixed seed, so repeated calls agree bit for bit.
    """
    X = as_data_matrix(X)
    n = X.shape[0]
    if n < 2:
        raise InputError("bandwidth heuristic needs at least two samples")
    if exact is None:
        exact = n <= subsample_threshold
    if exact:
        centered = X - X.mean(axis=0)
        # sum_{i<j} ||x_i - x_j||^2 == n * sum_i ||x_i - mean||^2
        total = float(np.sum(centered * centered))
        mean_sq = 2.0 * total / (n - 1)
    else:
        rng = np.random.default_rng(seed)
        i = rng.integers(0, n, size=int(subsample_pairs))
        j = rng.integers(0, n, size=int(subsample_pairs))
        keep = i != j
        diffs = X[i[keep]] - X[j[keep]]
        mean_sq = float(np.mean(np.sum(diffs * diffs, axis=1)))
    if mean_sq <= 0.0:
        raise DegenerateBandwidthError("all samples coincide; mean pairwise distance is zero")
    return mean_sq


def ideal_kernel(labels):
    """0/1 target kernel: entry (i, j) is 1 exactly when the labels agree."""
    if isinstance(labels, LabelVector):
        values = labels.labels
    else:
        values = np.asarray(labels)
    if values.ndim != 1 or values.shape[0] < 1:
        raise InputError("ideal_kernel needs a nonempty 1-D label sequence")
    return (values[:, None] == values[None, :]).astype(np.float64)


def double_center(K):
    """Conjugate K by the centering projector H = I - (1/q) * ones.

    Subtracts row means, column means, and adds back the grand mean, which
    equals H @ K @ H without forming H.
    """
    K = as_square_matrix(K)
    row = K.mean(axis=1, keepdims=True)
    col = K.mean(axis=0, keepdims=True)
    grand = K.mean()
    return K - row - col + grand


def nka_score(K, Kp):
    """Normalized alignment of two kernel matrices after double-centering.

    Returns the cosine of the two centered matrices under the Frobenius
    inner product, clipped to [-1, 1]. A constant matrix centers to zero and
    has no defined direction; that raises :class:`UndefinedAlignmentError`
    instead of silently returning a number, so model selection has to handle
    it explicitly.
    """
    K = as_square_matrix(K, "K")
    Kp = as_square_matrix(Kp, "Kp")
    if K.shape != Kp.shape:
        raise InputError(f"alignment operands must match in shape, got {K.shape} and {Kp.shape}")
    Kc = double_center(K)
    Kpc = double_center(Kp)
    norm_a = float(np.linalg.norm(Kc))
    norm_b = float(np.linalg.norm(Kpc))
    floor_a = _ZERO_ALIGNMENT_RTOL * max(1.0, float(np.linalg.norm(K)))
    floor_b = _ZERO_ALIGNMENT_RTOL * max(1.0, float(np.linalg.norm(Kp)))
    if norm_a <= floor_a or norm_b <= floor_b:
        raise UndefinedAlignmentError("an operand centers to the zero matrix")
    score = float(np.sum(Kc * Kpc)) / (norm_a * norm_b)
    return float(np.clip(score, -1.0, 1.0))
