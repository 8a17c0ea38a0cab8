"""Evaluation of recorded runs.

ε-outputs, monotone-proximity subsequences, proximity-target curves and
their comparison, and an empirical Fejér-monotonicity monitor.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from .geometry import as_vector
from .trace import IterateTrace

TIE_SLACK = 1e-12


def epsilon_output(trace: IterateTrace, eps: float) -> Optional[tuple[int, np.ndarray]]:
    """First record with ``prox <= eps`` as ``(K, point)``, or ``None``."""
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps}")
    for i, r in enumerate(trace.records):
        if r.prox <= eps:
            return i, r.point
    return None


def monotone_subsequence(trace: IterateTrace) -> list[int]:
    """Indices of the running strict minima of the proximity values."""
    if len(trace) == 0:
        raise ValueError("empty trace")
    keep = [0]
    best = trace.records[0].prox
    for i, r in enumerate(trace.records[1:], start=1):
        if r.prox < best:
            keep.append(i)
            best = r.prox
    return keep


def is_monotone_proximity(prox) -> bool:
    prox = np.asarray(prox, dtype=np.float64)
    return bool(np.all(prox[:-1] > prox[1:]))


@dataclass(frozen=True, eq=False)
class ProximityTargetCurve:
    """Piecewise-linear curve through ``(prox[i], phi[i])``, prox strictly decreasing."""

    prox: np.ndarray
    phi: np.ndarray

    def __post_init__(self):
        prox = np.asarray(self.prox, dtype=np.float64).copy()
        phi = np.asarray(self.phi, dtype=np.float64).copy()
        if prox.ndim != 1 or prox.size == 0 or prox.shape != phi.shape:
            raise ValueError("curve needs matching non-empty prox and phi sequences")
        if not is_monotone_proximity(prox):
            raise ValueError("curve abscissae must be strictly decreasing")
        prox.flags.writeable = False
        phi.flags.writeable = False
        object.__setattr__(self, "prox", prox)
        object.__setattr__(self, "phi", phi)

    @property
    def vertices(self) -> list[tuple[float, float]]:
        return list(zip(self.prox.tolist(), self.phi.tolist()))

    @property
    def hi(self) -> float:
        return float(self.prox[0])

    @property
    def lo(self) -> float:
        return float(self.prox[-1])

    def __call__(self, h):
        """Objective value on the curve at proximity ``h`` (inside ``[lo, hi]``)."""
        h = np.asarray(h, dtype=np.float64)
        if np.any(h < self.lo) or np.any(h > self.hi):
            raise ValueError(f"h outside curve range [{self.lo}, {self.hi}]")
        xs, ys = self.prox[::-1], self.phi[::-1]
        if xs.size == 1:
            return np.full(h.shape, ys[0])[()]
        # weight form instead of np.interp: a slope over a subnormal gap overflows
        i = np.clip(np.searchsorted(xs, h, side="right") - 1, 0, xs.size - 2)
        w = (h - xs[i]) / (xs[i + 1] - xs[i])
        return np.where(w == 1.0, ys[i + 1], ys[i] + w * (ys[i + 1] - ys[i]))[()]

    def to_csv(self) -> str:
        rows = ["prox,phi"] + [f"{p:.17g},{f:.17g}" for p, f in self.vertices]
        return "\n".join(rows) + "\n"

    @classmethod
    def from_trace(cls, trace: IterateTrace, limit: Optional[int] = None) -> "ProximityTargetCurve":
        """Curve of the running-minimum subsequence of the first ``limit`` records."""
        recs = trace.records if limit is None else trace.records[:limit]
        sub = IterateTrace(list(recs))
        idx = monotone_subsequence(sub)
        return cls([recs[i].prox for i in idx], [recs[i].phi for i in idx])


def build_curve(trace: IterateTrace, lo: int = 0, hi: Optional[int] = None) -> ProximityTargetCurve:
    """Curve through records ``lo..hi`` (inclusive), which must have monotone proximity."""
    hi = len(trace) - 1 if hi is None else hi
    if not 0 <= lo <= hi < len(trace):
        raise IndexError(f"invalid record range [{lo}, {hi}] for trace of length {len(trace)}")
    recs = trace.records[lo : hi + 1]
    prox = [r.prox for r in recs]
    if not is_monotone_proximity(prox):
        raise ValueError(f"records {lo}..{hi} do not have monotone proximity")
    return ProximityTargetCurve(prox, [r.phi for r in recs])


class Verdict(str, Enum):
    R_BETTER = "R_better"
    S_BETTER = "S_better"
    CROSSING = "crossing"
    INCOMPARABLE = "incomparable"


@dataclass(frozen=True)
class Comparison:
    verdict: Verdict
    t: float
    u: float
    witness: Optional[float] = None

    def to_dict(self) -> dict:
        return {"verdict": self.verdict.value, "t": self.t, "u": self.u, "witness": self.witness}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def better_targeted(R: ProximityTargetCurve, S: ProximityTargetCurve, samples: int = 101) -> Comparison:
    """Compare two curves over their shared proximity range ``[t, u]``.

    Both curves are evaluated at every vertex abscissa inside the range plus
    ``samples`` evenly spaced points; for piecewise-linear curves this decides
    the pointwise comparison exactly. Ties within ``TIE_SLACK`` count in
    favour of ``R``, so a curve is better targeted than itself.
    """
    if samples < 2:
        raise ValueError("samples must be >= 2")
    t = max(R.lo, S.lo)
    u = min(R.hi, S.hi)
    if t > u:
        return Comparison(Verdict.INCOMPARABLE, t, u)
    verts = np.concatenate([R.prox, S.prox])
    h = np.unique(np.concatenate([np.linspace(t, u, samples), verts[(verts >= t) & (verts <= u)]]))
    h = np.clip(h, t, u)
    diff = R(h) - S(h)
    r_ok = bool(np.all(diff <= TIE_SLACK))
    if r_ok:
        return Comparison(Verdict.R_BETTER, t, u)
    if bool(np.all(-diff <= TIE_SLACK)):
        return Comparison(Verdict.S_BETTER, t, u)
    return Comparison(Verdict.CROSSING, t, u, _first_sign_change(h, diff))


def _first_sign_change(h: np.ndarray, diff: np.ndarray) -> float:
    sign = np.where(diff > TIE_SLACK, 1, np.where(diff < -TIE_SLACK, -1, 0))
    last = None
    for i in range(len(h)):
        if sign[i] == 0:
            continue
        if last is not None and sign[i] != sign[last]:
            if i - last > 1:
                return float(h[last + 1])
            # diff is linear between consecutive evaluation points
            return float(h[last] - diff[last] * (h[i] - h[last]) / (diff[i] - diff[last]))
        last = i
    raise AssertionError("no sign change although neither curve dominates")


@dataclass(frozen=True, eq=False)
class FejerReport:
    reference: np.ndarray
    first_monotone_index: Optional[int]
    violations: list
    distances: np.ndarray

    def to_dict(self) -> dict:
        return {
            "reference": self.reference.tolist(),
            "first_monotone_index": self.first_monotone_index,
            "violations": [[k, amt] for k, amt in self.violations],
            "length": int(self.distances.size),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def fejer_monitor(trace: IterateTrace, reference, tolerance: float = 1e-10) -> FejerReport:
    """Check ``||y^{k+1} - ref|| <= ||y^k - ref|| + tolerance`` along the trace.

    ``first_monotone_index`` is the smallest index after which no violation
    occurs; it is ``None`` when the last step of the trace still violates.
    """
    pts = trace.points
    ref = as_vector(reference, pts.shape[1], "reference")
    return fejer_from_distances(np.linalg.norm(pts - ref, axis=1), tolerance, ref)


def fejer_from_distances(dist, tolerance: float = 1e-10, reference=None) -> FejerReport:
    dist = np.asarray(dist, dtype=np.float64)
    inc = dist[1:] - dist[:-1]
    violations = [(int(k), float(inc[k])) for k in np.flatnonzero(inc > tolerance)]
    if not violations:
        first = 0
    elif violations[-1][0] == dist.size - 2:
        first = None
    else:
        first = violations[-1][0] + 1
    ref = np.zeros(0) if reference is None else np.asarray(reference)
    return FejerReport(ref, first, violations, dist)
