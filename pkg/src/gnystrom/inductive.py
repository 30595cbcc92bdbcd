"""Deployable model: landmarks plus a learned dictionary embed new samples.

A fitted model keeps the landmark coordinates Z, the kernel parameters, the
learned PSD matrix S, and its factor L with S = L @ L.T. New samples embed
as k(X, Z) @ L, so inner products of embeddings reproduce the learned
similarity k(x, Z) @ S @ k(y, Z).T without refactorizing.

Serialization uses a self-describing little-endian binary container:

    offset  size          field
    0       4             magic "GNYM"
    4       4             format version, uint32 (currently 1)
    8       4             m, landmark count, uint32
    12      4             d, feature dimension, uint32
    16      4             r, factor rank, uint32
    20      8             kernel bandwidth, float64
    28      8             kernel family, ASCII padded with NUL
    36      4             metadata byte length, uint32
    40      meta          metadata, UTF-8 JSON object
    ...     m*d*8         Z, row-major float64
    ...     m*m*8         S, row-major float64
    ...     m*r*8         L, row-major float64

Every load re-validates the model invariants, so a corrupt or truncated
file raises :class:`ModelFormatError` rather than producing a bad model.
"""

import json
import struct
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from ._arrays import as_data_matrix, as_vector
from .dictlearn import DictionaryState, factorize
from .errors import InputError, ModelFormatError
from .kernels import KernelParams, kernel_matrix
from .landmarks import LandmarkSet

_MAGIC = b"GNYM"
_VERSION = 1
_HEADER_FMT = "<4sIIIId8sI"
_PSD_RTOL = 1e-8
_FACTOR_RTOL = 1e-8


@dataclass(frozen=True)
class InductiveModel:
    """Everything needed to score samples never seen during fitting."""

    landmarks: np.ndarray
    kernel: KernelParams
    S: np.ndarray
    L: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        # Arrays are normalized to C order so scoring a model gives bit-equal
        # results whether it came from fitting or from a file: BLAS products
        # round differently per memory layout.
        Z = np.ascontiguousarray(as_data_matrix(self.landmarks, "landmarks"))
        S = np.ascontiguousarray(self.S, dtype=np.float64)
        L = np.ascontiguousarray(self.L, dtype=np.float64)
        m = Z.shape[0]
        if S.shape != (m, m):
            raise InputError(f"S must be {m}x{m}, got {S.shape}")
        if L.ndim != 2 or L.shape[0] != m:
            raise InputError(f"L must have {m} rows, got {L.shape}")
        if L.shape[1] > m:
            raise InputError("factor rank cannot exceed the landmark count")
        if not (np.all(np.isfinite(S)) and np.all(np.isfinite(L))):
            raise InputError("S and L must be finite")
        if not np.allclose(S, S.T, rtol=0.0, atol=1e-10 * (1.0 + float(np.abs(S).max()))):
            raise InputError("S must be symmetric")
        vals = np.linalg.eigvalsh(0.5 * (S + S.T))
        top = max(float(vals.max()), 0.0)
        if float(vals.min()) < -_PSD_RTOL * max(top, 1e-300):
            raise InputError("S must be positive semidefinite")
        norm_s = float(np.linalg.norm(S))
        if float(np.linalg.norm(L @ L.T - S)) > _FACTOR_RTOL * max(norm_s, 1e-300):
            raise InputError("L @ L.T must reproduce S")
        if not isinstance(self.metadata, dict):
            raise InputError("metadata must be a dict")
        object.__setattr__(self, "landmarks", Z)
        object.__setattr__(self, "S", S)
        object.__setattr__(self, "L", L)

    @classmethod
    def from_state(cls, landmarks, kernel, state, lam=None, report=None):
        """Package a fit: factorizes S and records fitting context."""
        Z = landmarks.points if isinstance(landmarks, LandmarkSet) else landmarks
        S = state.S if isinstance(state, DictionaryState) else np.asarray(state, dtype=np.float64)
        L = factorize(S)
        metadata = {
            "lambda": None if lam is None else float(lam),
            "created": datetime.now(timezone.utc).isoformat(),
        }
        if report is not None:
            metadata["solver"] = {
                "iterations": int(report.iterations),
                "converged_by": report.converged_by,
                "final_grad_norm": float(report.final_grad_norm),
                "final_objective": float(report.objective_trace[-1]),
            }
        return cls(landmarks=Z, kernel=kernel, S=S, L=L, metadata=metadata)

    @property
    def m(self):
        return int(self.landmarks.shape[0])

    @property
    def rank(self):
        return int(self.L.shape[1])


def embed(model, Xnew):
    """Low-rank features for new samples: k(Xnew, Z) @ L.

    Inner products of the returned rows reproduce the learned similarity.
    """
    Xnew = as_data_matrix(Xnew, "Xnew")
    if Xnew.shape[1] != model.landmarks.shape[1]:
        raise InputError(
            f"expected {model.landmarks.shape[1]} features, got {Xnew.shape[1]}")
    return kernel_matrix(Xnew, model.landmarks, model.kernel) @ model.L


def similarity(model, x, y):
    """Learned similarity k(x, Z) @ S @ k(y, Z).T for a single pair.

    Evaluated in symmetrized form so swapping the arguments returns the
    identical float; the self-similarity of a point is nonnegative.
    """
    x = as_vector(x, "x")
    y = as_vector(y, "y")
    d = model.landmarks.shape[1]
    if x.shape[0] != d or y.shape[0] != d:
        raise InputError(f"points must have {d} features")
    ex = kernel_matrix(x[None, :], model.landmarks, model.kernel)[0]
    ey = kernel_matrix(y[None, :], model.landmarks, model.kernel)[0]
    value = 0.5 * (ex @ (model.S @ ey) + ey @ (model.S @ ex))
    if np.array_equal(x, y):
        value = max(value, 0.0)
    return float(value)


def save(model, path):
    """Write the model in the binary container format documented above."""
    meta_bytes = json.dumps(model.metadata, sort_keys=True).encode("utf-8")
    family = model.kernel.family.encode("ascii")
    if len(family) > 8:
        raise InputError("kernel family name exceeds the 8-byte header field")
    m, d = model.landmarks.shape
    r = model.L.shape[1]
    header = struct.pack(_HEADER_FMT, _MAGIC, _VERSION, m, d, r,
                         float(model.kernel.bandwidth), family.ljust(8, b"\0"),
                         len(meta_bytes))
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(meta_bytes)
        fh.write(np.ascontiguousarray(model.landmarks, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(model.S, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(model.L, dtype="<f8").tobytes())


def load(path):
    """Read a model written by :func:`save`, re-validating its invariants."""
    data = Path(path).read_bytes()
    header_size = struct.calcsize(_HEADER_FMT)
    if len(data) < header_size:
        raise ModelFormatError(f"{path}: file too short for a model header")
    magic, version, m, d, r, bandwidth, family_raw, meta_len = struct.unpack_from(
        _HEADER_FMT, data)
    if magic != _MAGIC:
        raise ModelFormatError(f"{path}: not a model file (bad magic)")
    if version != _VERSION:
        raise ModelFormatError(f"{path}: unsupported format version {version}")
    offset = header_size
    if len(data) < offset + meta_len:
        raise ModelFormatError(f"{path}: truncated metadata block")
    try:
        metadata = json.loads(data[offset:offset + meta_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ModelFormatError(f"{path}: unreadable metadata block") from exc
    if not isinstance(metadata, dict):
        raise ModelFormatError(f"{path}: metadata must be a JSON object")
    offset += meta_len
    expected = (m * d + m * m + m * r) * 8
    if len(data) != offset + expected:
        raise ModelFormatError(
            f"{path}: expected {offset + expected} bytes, found {len(data)}")

    def take(rows, cols):
        nonlocal offset
        count = rows * cols
        block = np.frombuffer(data, dtype="<f8", count=count, offset=offset)
        offset += count * 8
        return block.reshape(rows, cols).copy()

    Z = take(m, d)
    S = take(m, m)
    L = take(m, r)
    try:
        params = KernelParams(bandwidth=bandwidth,
                              family=family_raw.rstrip(b"\0").decode("ascii"))
        return InductiveModel(landmarks=Z, kernel=params, S=S, L=L, metadata=metadata)
    except InputError as exc:
        raise ModelFormatError(f"{path}: model invariants violated: {exc}") from exc
