"""Rademacher Johnson-Lindenstrauss projection.

Dimension selection, seeded sign sampling, projecting-and-clipping datasets,
and lifting low-dimensional weights back to the ambient space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._seeding import JL_SIGNS, stream
from .data import Dataset
from .errors import DimensionError

#: Multiplier in front of (b/gamma)^2 log(...); the source bound hides the
#: constant, 8 keeps the distortion checks comfortably green.  Override per call.
DEFAULT_C_JL = 8.0

#: Above this many entries a matrix is regenerated on demand instead of cached.
CACHE_LIMIT = 10**8


def projection_dim(
    gamma: float,
    n: int,
    grid_size: int,
    beta: float,
    b: float = 1.0,
    c_jl: float = DEFAULT_C_JL,
) -> int:
    """Dimension that preserves a gamma-margin with failure probability beta.

    k = ceil(c_jl * (b/gamma)^2 * ln(grid_size (n+2)(n+1) / beta)).
    """
    if not gamma > 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    if gamma > b:
        raise ValueError(f"gamma={gamma} exceeds the norm bound b={b}")
    if not (n >= 1 and grid_size >= 1 and 0 < beta < 1 and b > 0 and c_jl > 0):
        raise ValueError("n, grid_size, beta, b, c_jl out of range")
    arg = grid_size * (n + 2) * (n + 1) / beta
    return max(1, math.ceil(c_jl * (b / gamma) ** 2 * math.log(arg)))


@dataclass(frozen=True)
class JlMatrix:
    """Seeded k x d matrix with entries +/- 1/sqrt(k), regenerable on demand."""

    k: int
    d: int
    seed: int
    _cached: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.k < 1 or self.d < 1:
            raise DimensionError("k and d must be >= 1")
        if self.k * self.d <= CACHE_LIMIT:
            object.__setattr__(self, "_cached", self._generate())

    def _generate(self) -> np.ndarray:
        rng = stream(self.seed, JL_SIGNS)
        signs = rng.integers(0, 2, size=(self.k, self.d), dtype=np.int8)  # row-major
        entries = signs.astype(np.float64)
        entries *= 2.0
        entries -= 1.0
        entries /= math.sqrt(self.k)
        entries.setflags(write=False)
        return entries

    @property
    def entries(self) -> np.ndarray:
        return self._cached if self._cached is not None else self._generate()

    def project_points(self, features: np.ndarray) -> np.ndarray:
        if features.shape[-1] != self.d:
            raise DimensionError(f"points have dim {features.shape[-1]}, matrix d={self.d}")
        return features @ self.entries.T

    def lift_weights(self, w_k: np.ndarray) -> np.ndarray:
        if w_k.shape[-1] != self.k:
            raise DimensionError(f"weights have dim {w_k.shape[-1]}, matrix k={self.k}")
        return self.entries.T @ w_k


@dataclass(frozen=True)
class IdentityMap:
    """Passthrough used when the formula dimension already exceeds d.

    Projecting up cannot help: the identity preserves margins exactly, which
    dominates the probabilistic guarantee the Rademacher map would give.
    """

    d: int
    seed: None = None

    @property
    def k(self) -> int:
        return self.d

    def project_points(self, features: np.ndarray) -> np.ndarray:
        if features.shape[-1] != self.d:
            raise DimensionError(f"points have dim {features.shape[-1]}, expected {self.d}")
        return features

    def lift_weights(self, w_k: np.ndarray) -> np.ndarray:
        if w_k.shape[-1] != self.d:
            raise DimensionError(f"weights have dim {w_k.shape[-1]}, expected {self.d}")
        return w_k


def sample_jl(k: int, d: int, seed: int) -> JlMatrix:
    """Draw the seeded Rademacher matrix; identical for identical seeds."""
    return JlMatrix(k=int(k), d=int(d), seed=int(seed))


def project_and_clip(phi, dataset: Dataset, v: float) -> Dataset:
    """Project every point and radially clip at radius 2v; labels unchanged."""
    if phi.d != dataset.dim:
        raise DimensionError(f"matrix expects d={phi.d}, dataset has d={dataset.dim}")
    if not v > 0:
        raise ValueError("clip radius parameter v must be positive")
    projected = phi.project_points(dataset.features)
    radius = 2.0 * v
    norms = np.linalg.norm(projected, axis=1)
    scale = np.minimum(1.0, np.divide(radius, norms, out=np.ones_like(norms), where=norms > 0))
    return Dataset(projected * scale[:, None], dataset.labels.astype(int), radius)


def lift(phi, w_k: np.ndarray) -> np.ndarray:
    """Ambient-space weights Phi^T w_k; classification commutes with projection."""
    return phi.lift_weights(np.asarray(w_k, dtype=np.float64))
