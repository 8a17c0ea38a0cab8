"""Objective functions and nonascending-direction generators."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import DimensionError, ObjectiveError
from .geometry import as_vector

NONASCENT_SLACK = 1e-12
GRID_POINTS = 17


class Objective:
    """Base class. Subclasses define ``value`` and, if they can, ``subgradient``."""

    has_subgradient = True
    dim: Optional[int] = None

    def value(self, x: np.ndarray) -> float:
        raise NotImplementedError

    def subgradient(self, x: np.ndarray) -> np.ndarray:
        raise ObjectiveError(
            f"{type(self).__name__} is value-only; use derivative_free_direction instead"
        )

    def __call__(self, x) -> float:
        return evaluate(self, x)


class SquaredNorm(Objective):
    """``||x||^2``."""

    def value(self, x):
        return float(x @ x)

    def subgradient(self, x):
        return 2.0 * x


class L1Norm(Objective):
    """``||x||_1``; at zero coordinates the subgradient component is 0."""

    def value(self, x):
        return float(np.sum(np.abs(x)))

    def subgradient(self, x):
        return np.sign(x)


@dataclass(frozen=True, eq=False)
class Quadratic(Objective):
    """``0.5 * x^T Q x + c^T x`` with ``Q`` symmetric positive semidefinite."""

    Q: np.ndarray
    c: np.ndarray

    def __post_init__(self):
        Q = np.asarray(self.Q, dtype=np.float64)
        c = as_vector(self.c, what="quadratic linear term")
        if Q.shape != (c.size, c.size):
            raise ObjectiveError(f"Q has shape {Q.shape}, expected {(c.size, c.size)}")
        if not np.allclose(Q, Q.T, rtol=0, atol=1e-12 * max(1.0, np.abs(Q).max())):
            raise ObjectiveError("Q must be symmetric")
        if np.linalg.eigvalsh(Q).min() < -1e-10 * max(1.0, np.abs(Q).max()):
            raise ObjectiveError("Q must be positive semidefinite")
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "c", c)

    @property
    def dim(self):
        return self.c.size

    def value(self, x):
        return float(0.5 * (x @ (self.Q @ x)) + self.c @ x)

    def subgradient(self, x):
        return self.Q @ x + self.c


@dataclass(frozen=True, eq=False)
class BlackBox(Objective):
    """A value-only objective. ``fn`` must be pure; that is not checked."""

    fn: Callable
    dim: Optional[int] = None
    has_subgradient = False

    def value(self, x):
        return float(self.fn(x))


def evaluate(obj: Objective, x) -> float:
    x = as_vector(x, obj.dim)
    v = obj.value(x)
    if not np.isfinite(v):
        raise ObjectiveError(f"objective returned non-finite value {v}")
    return v


def subgradient_direction(obj: Objective, y) -> np.ndarray:
    """``-s/||s||`` for the oracle's subgradient ``s``, or zero when ``s = 0``."""
    if not obj.has_subgradient:
        raise ObjectiveError(
            f"{type(obj).__name__} has no subgradient oracle; use derivative_free_direction"
        )
    y = as_vector(y, obj.dim)
    s = np.asarray(obj.subgradient(y), dtype=np.float64)
    ns = float(np.linalg.norm(s))
    if ns == 0.0:
        return np.zeros_like(y)
    return -s / ns


def _generator(seed) -> np.random.Generator:
    key = list(seed) if isinstance(seed, (tuple, list)) else [seed]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(key)))


def sample_directions(n: int, trials: int, seed) -> np.ndarray:
    """``trials`` unit vectors uniform on the sphere, deterministic in ``seed``.

    ``seed`` may be an int or a tuple of ints.
    """
    g = _generator(seed).standard_normal((trials, n))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def derivative_free_direction(obj: Objective, y, probe_radius: float, trials: int, seed) -> np.ndarray:
    """First sampled unit direction ``d`` with ``phi(y + r d) <= phi(y)``.

    Falls back to the zero vector, which is always nonascending.
    """
    if not probe_radius > 0:
        raise ValueError(f"probe_radius must be positive, got {probe_radius}")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    y = as_vector(y, obj.dim)
    f0 = evaluate(obj, y)
    for d in sample_directions(y.size, trials, seed):
        if evaluate(obj, y + probe_radius * d) <= f0:
            return d
    return np.zeros_like(y)


def verify_nonascending(obj: Objective, y, d, delta: float) -> bool:
    """Grid check of nonascent on ``[0, delta]`` (17 equispaced steps).

    Also requires ``||d|| <= 1``. A finite grid can miss ascent between nodes.
    """
    if not delta > 0:
        raise ValueError(f"delta must be positive, got {delta}")
    y = as_vector(y, obj.dim)
    d = np.asarray(d, dtype=np.float64)
    if d.shape != y.shape:
        raise DimensionError(y.size, d.size, "direction")
    if np.linalg.norm(d) > 1.0 + NONASCENT_SLACK:
        return False
    f0 = evaluate(obj, y)
    for j in range(GRID_POINTS):
        lam = delta * j / (GRID_POINTS - 1)
        if evaluate(obj, y + lam * d) > f0 + NONASCENT_SLACK:
            return False
    return True


def objective_from_dict(doc: dict) -> Objective:
    kind = doc.get("kind")
    if kind == "squared_norm":
        return SquaredNorm()
    if kind == "l1":
        return L1Norm()
    if kind == "quadratic":
        return Quadratic(doc["Q"], doc["c"])
    raise ObjectiveError(f"unknown objective kind {kind!r}")
