"""Closed convex sets in level-set form, their orthogonal projections, and
the proximity function of a family of such sets.

Vectors are one-dimensional ``float64`` numpy arrays and are treated as
immutable: no function in this module writes into its arguments.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .errors import DimensionError, InvalidSetError

# Projections are nudged by a few ulps until the exact membership test holds,
# so that a projected point is a fixed point of the same projection.
_MAX_NUDGES = 64


def as_vector(x, n: Optional[int] = None, what: str = "vector") -> np.ndarray:
    """Convert ``x`` to a finite 1-D float64 array, checking its length."""
    v = np.asarray(x, dtype=np.float64)
    if v.ndim != 1 or v.size == 0:
        raise InvalidSetError(f"{what} must be a non-empty 1-D array, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise InvalidSetError(f"{what} has non-finite components")
    if n is not None and v.size != n:
        raise DimensionError(n, v.size, what)
    return v


def _readonly(v: np.ndarray) -> np.ndarray:
    v = np.array(v, dtype=np.float64)
    v.flags.writeable = False
    return v


@dataclass(frozen=True, eq=False)
class Halfspace:
    """``{x : <a, x> <= b}``."""

    a: np.ndarray
    b: float

    def __post_init__(self):
        a = as_vector(self.a, what="halfspace normal")
        if not np.linalg.norm(a) > 0:
            raise InvalidSetError("halfspace normal must be nonzero")
        object.__setattr__(self, "a", _readonly(a))
        object.__setattr__(self, "b", float(self.b))
        object.__setattr__(self, "_aa", float(a @ a))

    @property
    def dim(self) -> int:
        return self.a.size

    def contains(self, x: np.ndarray) -> bool:
        return float(self.a @ x) <= self.b

    def project(self, x: np.ndarray) -> np.ndarray:
        r = float(self.a @ x) - self.b
        if r <= 0.0:
            return x
        t = r / self._aa
        p = x - t * self.a
        for j in range(_MAX_NUDGES):
            if float(self.a @ p) <= self.b:
                break
            t += np.spacing(t) * 2.0**j
            p = x - t * self.a
        return p


@dataclass(frozen=True, eq=False)
class Hyperplane:
    """``{x : <a, x> = b}``, i.e. two opposite halfspaces."""

    a: np.ndarray
    b: float

    def __post_init__(self):
        a = as_vector(self.a, what="hyperplane normal")
        if not np.linalg.norm(a) > 0:
            raise InvalidSetError("hyperplane normal must be nonzero")
        object.__setattr__(self, "a", _readonly(a))
        object.__setattr__(self, "b", float(self.b))
        object.__setattr__(self, "_aa", float(a @ a))

    @property
    def dim(self) -> int:
        return self.a.size

    def contains(self, x: np.ndarray) -> bool:
        return float(self.a @ x) == self.b

    def project(self, x: np.ndarray) -> np.ndarray:
        ax = float(self.a @ x)
        if ax == self.b:
            return x
        # drop the normal component, then add the fixed offset: rounding stays
        # near the set instead of growing with the distance from it
        return (x - (ax / self._aa) * self.a) + (self.b / self._aa) * self.a


@dataclass(frozen=True, eq=False)
class Ball:
    """Closed Euclidean ball ``{x : ||x - center|| <= radius}``."""

    center: np.ndarray
    radius: float

    def __post_init__(self):
        c = as_vector(self.center, what="ball center")
        radius = float(self.radius)
        if not (np.isfinite(radius) and radius > 0):
            raise InvalidSetError(f"ball radius must be positive, got {self.radius}")
        object.__setattr__(self, "center", _readonly(c))
        object.__setattr__(self, "radius", radius)

    @property
    def dim(self) -> int:
        return self.center.size

    def contains(self, x: np.ndarray) -> bool:
        return float(np.linalg.norm(x - self.center)) <= self.radius

    def project(self, x: np.ndarray) -> np.ndarray:
        d = x - self.center
        nd = float(np.linalg.norm(d))
        if nd <= self.radius:
            return x
        s = self.radius / nd
        p = self.center + s * d
        for j in range(_MAX_NUDGES):
            if float(np.linalg.norm(p - self.center)) <= self.radius:
                break
            s -= np.spacing(s) * 2.0**j
            p = self.center + s * d
        return p


@dataclass(frozen=True, eq=False)
class Box:
    """Axis-aligned box ``{x : lower <= x <= upper}``."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = as_vector(self.lower, what="box lower")
        hi = as_vector(self.upper, n=lo.size, what="box upper")
        if np.any(lo > hi):
            raise InvalidSetError("box requires lower <= upper componentwise")
        object.__setattr__(self, "lower", _readonly(lo))
        object.__setattr__(self, "upper", _readonly(hi))

    @property
    def dim(self) -> int:
        return self.lower.size

    def contains(self, x: np.ndarray) -> bool:
        return bool(np.all(self.lower <= x) and np.all(x <= self.upper))

    def project(self, x: np.ndarray) -> np.ndarray:
        if self.contains(x):
            return x
        return np.clip(x, self.lower, self.upper)


ConstraintSet = Union[Halfspace, Hyperplane, Ball, Box]


def _check(s: ConstraintSet, x) -> np.ndarray:
    return as_vector(x, s.dim)


def project(s: ConstraintSet, x) -> np.ndarray:
    """Orthogonal projection of ``x`` onto ``s``.

    Points already in ``s`` are returned unchanged (the same array object).
    """
    return s.project(_check(s, x))


def contains(s: ConstraintSet, x) -> bool:
    return s.contains(_check(s, x))


def distance(s: ConstraintSet, x) -> float:
    """Euclidean distance from ``x`` to ``s``; exactly 0.0 on members."""
    return _distance(s, _check(s, x))


def _distance(s: ConstraintSet, x: np.ndarray) -> float:
    if s.contains(x):
        return 0.0
    return float(np.linalg.norm(x - s.project(x)))


@dataclass(frozen=True, eq=False)
class ConstraintFamily:
    """An ordered family of constraint sets sharing one ambient dimension.

    ``ambient`` is an optional box standing for the region the iterates live
    in; ``None`` means all of R^n.
    """

    sets: tuple
    ambient: Optional[Box] = None

    def __post_init__(self):
        sets = tuple(self.sets)
        if not sets:
            raise InvalidSetError("a constraint family needs at least one set")
        n = sets[0].dim
        for i, s in enumerate(sets):
            if s.dim != n:
                raise DimensionError(n, s.dim, f"constraint set {i}")
        if self.ambient is not None:
            if not isinstance(self.ambient, Box):
                raise InvalidSetError("ambient region must be a Box")
            if self.ambient.dim != n:
                raise DimensionError(n, self.ambient.dim, "ambient box")
        object.__setattr__(self, "sets", sets)

    @property
    def dim(self) -> int:
        return self.sets[0].dim

    @property
    def m(self) -> int:
        return len(self.sets)

    def __len__(self) -> int:
        return len(self.sets)

    def __getitem__(self, i: int) -> ConstraintSet:
        return self.sets[i]

    def distances(self, x) -> np.ndarray:
        x = as_vector(x, self.dim)
        return np.array([_distance(s, x) for s in self.sets])

    def to_dict(self) -> dict:
        amb = None
        if self.ambient is not None:
            amb = {"lower": self.ambient.lower.tolist(), "upper": self.ambient.upper.tolist()}
        return {"dim": self.dim, "sets": [set_to_dict(s) for s in self.sets], "ambient": amb}

    @classmethod
    def from_dict(cls, doc: dict) -> "ConstraintFamily":
        try:
            sets = [set_from_dict(d) for d in doc["sets"]]
        except KeyError as exc:
            raise InvalidSetError(f"constraint family document is missing key {exc}") from None
        amb = doc.get("ambient")
        ambient = Box(amb["lower"], amb["upper"]) if amb is not None else None
        fam = cls(tuple(sets), ambient)
        if "dim" in doc and int(doc["dim"]) != fam.dim:
            raise DimensionError(int(doc["dim"]), fam.dim, "constraint family")
        return fam

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_json(cls, text: str) -> "ConstraintFamily":
        return cls.from_dict(json.loads(text))


def set_to_dict(s: ConstraintSet) -> dict:
    if isinstance(s, Halfspace):
        return {"kind": "halfspace", "a": s.a.tolist(), "b": s.b}
    if isinstance(s, Hyperplane):
        return {"kind": "hyperplane", "a": s.a.tolist(), "b": s.b}
    if isinstance(s, Ball):
        return {"kind": "ball", "center": s.center.tolist(), "radius": s.radius}
    if isinstance(s, Box):
        return {"kind": "box", "lower": s.lower.tolist(), "upper": s.upper.tolist()}
    raise InvalidSetError(f"unknown constraint set type {type(s).__name__}")


def set_from_dict(d: dict) -> ConstraintSet:
    kind = d.get("kind")
    try:
        if kind == "halfspace":
            return Halfspace(d["a"], d["b"])
        if kind == "hyperplane":
            return Hyperplane(d["a"], d["b"])
        if kind == "ball":
            return Ball(d["center"], d["radius"])
        if kind == "box":
            return Box(d["lower"], d["upper"])
    except KeyError as exc:
        raise InvalidSetError(f"{kind} set is missing key {exc}") from None
    raise InvalidSetError(f"unknown constraint kind {kind!r}")


def proximity(family: ConstraintFamily, x) -> float:
    """Mean squared distance from ``x`` to the sets of ``family``.

    Zero exactly when ``x`` lies in every set.
    """
    d = family.distances(x)
    return float(d @ d) / family.m


def is_epsilon_compatible(family: ConstraintFamily, x, eps: float) -> bool:
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps}")
    return proximity(family, x) <= eps

