"""Seeded generators of desk-scale feasibility problems.

Every generator is deterministic in its seed and returns a :class:`Problem`
holding the family, a starting point ``x0`` outside the feasible set, and,
for consistent families, a witness point lying in every set.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .geometry import ConstraintFamily, Halfspace, Hyperplane, as_vector


@dataclass(frozen=True, eq=False)
class Problem:
    family: ConstraintFamily
    x0: np.ndarray
    witness: Optional[np.ndarray] = None
    meta: Optional[dict] = None

    @property
    def consistent(self) -> bool:
        return self.witness is not None

    def to_dict(self) -> dict:
        doc = self.family.to_dict()
        doc["x0"] = self.x0.tolist()
        doc["witness"] = None if self.witness is None else self.witness.tolist()
        if self.meta:
            doc["generator"] = self.meta
        return doc

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, doc: dict) -> "Problem":
        fam = ConstraintFamily.from_dict(doc)
        x0 = as_vector(doc["x0"], fam.dim, "x0") if doc.get("x0") is not None else np.zeros(fam.dim)
        w = doc.get("witness")
        return cls(fam, x0, None if w is None else as_vector(w, fam.dim, "witness"), doc.get("generator"))


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed))))


def _unit_rows(rng, m, n):
    a = rng.standard_normal((m, n))
    return a / np.linalg.norm(a, axis=1, keepdims=True)


def _check_sizes(n, m):
    if int(n) < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if int(m) < 1:
        raise ValueError(f"m must be >= 1, got {m}")


def random_halfspaces(n: int, m: int, feasible_ball_radius: float = 1.0, seed: int = 0, start_distance: float = 10.0) -> Problem:
    """``m`` halfspaces with unit normals, all containing one ball.

    The ball of radius ``feasible_ball_radius`` is centred at the witness.
    Each halfspace boundary sits at distance ``radius * (1 + U[0, 1))`` from
    the centre. ``x0`` is the witness shifted by ``start_distance * radius``
    along a random direction chosen so that ``x0`` violates some constraint.
    """
    _check_sizes(n, m)
    r = float(feasible_ball_radius)
    if not r > 0:
        raise ValueError(f"feasible_ball_radius must be positive, got {feasible_ball_radius}")
    rng = _rng(seed)
    a = _unit_rows(rng, m, n)
    c = rng.standard_normal(n) * (r / np.sqrt(n))
    b = a @ c + r * (1.0 + rng.random(m))
    sets = tuple(Halfspace(a[i], b[i]) for i in range(m))
    for _ in range(1000):
        u = rng.standard_normal(n)
        x0 = c + start_distance * r * u / np.linalg.norm(u)
        if np.any(a @ x0 > b):
            break
    else:
        raise ValueError("could not place an infeasible starting point; increase start_distance")
    meta = {"generator": "random_halfspaces", "n": n, "m": m, "radius": r, "seed": int(seed)}
    return Problem(ConstraintFamily(sets), x0, c, meta)


def random_hyperplanes(n: int, m: int, seed: int = 0, consistent: bool = True) -> Problem:
    """``m`` hyperplanes with unit normals.

    Consistent families all pass through a random witness. Inconsistent ones
    replace the last hyperplane by a copy of the first shifted by 1, so two
    members are parallel and disjoint.
    """
    _check_sizes(n, m)
    rng = _rng(seed)
    a = _unit_rows(rng, m, n)
    w = rng.standard_normal(n)
    b = np.array([float(a[i] @ w) for i in range(m)])
    witness = w
    if not consistent:
        if m < 2:
            raise ValueError("an inconsistent hyperplane family needs m >= 2")
        a[-1] = a[0]
        b[-1] = b[0] + 1.0
        witness = None
    sets = tuple(Hyperplane(a[i], b[i]) for i in range(m))
    x0 = w + 5.0 * rng.standard_normal(n)
    meta = {"generator": "random_hyperplanes", "n": n, "m": m, "seed": int(seed), "consistent": consistent}
    return Problem(ConstraintFamily(sets), x0, witness, meta)


def sparse_system(n: int, m: int, density: float = 0.1, seed: int = 0) -> Problem:
    """Consistent hyperplanes ``<a_i, x> = b_i`` with sparse rows ``a_i``.

    A small stand-in for a discretized reconstruction system: the witness is
    a nonnegative "image" and every row keeps at least one nonzero entry.
    """
    _check_sizes(n, m)
    if not 0 < density <= 1:
        raise ValueError(f"density must lie in (0, 1], got {density}")
    rng = _rng(seed)
    mask = rng.random((m, n)) < density
    for i in np.flatnonzero(~mask.any(axis=1)):
        mask[i, rng.integers(n)] = True
    A = np.where(mask, rng.random((m, n)), 0.0)
    w = rng.random(n)
    sets = tuple(Hyperplane(A[i], float(A[i] @ w)) for i in range(m))
    x0 = np.zeros(n)
    meta = {"generator": "sparse_system", "n": n, "m": m, "density": density, "seed": int(seed)}
    return Problem(ConstraintFamily(sets), x0, w, meta)


GENERATORS = {
    "random_halfspaces": random_halfspaces,
    "random_hyperplanes": random_hyperplanes,
    "sparse_system": sparse_system,
}


def generate(spec: dict) -> Problem:
    """Build a problem from a generator spec or an explicit family document.

    A spec with a ``"generator"`` key names one of :data:`GENERATORS`; its
    other keys are passed as keyword arguments. Anything else is parsed as a
    serialized :class:`Problem`.
    """
    if "generator" in spec and isinstance(spec["generator"], str):
        kwargs = {k: v for k, v in spec.items() if k != "generator"}
        if "radius" in kwargs:
            kwargs["feasible_ball_radius"] = kwargs.pop("radius")
        try:
            gen = GENERATORS[spec["generator"]]
        except KeyError:
            raise ValueError(f"unknown generator {spec['generator']!r}") from None
        return gen(**kwargs)
    return Problem.from_dict(spec)
