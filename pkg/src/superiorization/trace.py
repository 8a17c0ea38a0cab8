"""Iterate traces, stop rules and their CSV/JSON serialization."""

from __future__ import annotations

import io
import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

CSV_HEADER = "k,prox,phi,beta_consumed"


class StopReason(str, Enum):
    EPSILON = "epsilon reached"
    MAX_ITERS = "max iterations"


@dataclass(frozen=True)
class StopRule:
    """Harness-level termination: an iteration cap, a proximity target, or both.

    ``max_iters`` counts iterations performed, so a trace stopped by it holds
    ``max_iters + 1`` records.
    """

    max_iters: Optional[int] = None
    epsilon: Optional[float] = None

    def __post_init__(self):
        if self.max_iters is None and self.epsilon is None:
            raise ValueError("a stop rule needs max_iters, epsilon, or both")
        if self.max_iters is not None and self.max_iters < 0:
            raise ValueError("max_iters must be >= 0")
        if self.epsilon is not None and not self.epsilon > 0:
            raise ValueError("epsilon must be positive")

    def check(self, k: int, prox: float) -> Optional[StopReason]:
        if self.epsilon is not None and prox <= self.epsilon:
            return StopReason.EPSILON
        if self.max_iters is not None and k >= self.max_iters:
            return StopReason.MAX_ITERS
        return None

    def to_dict(self) -> dict:
        return {"max_iters": self.max_iters, "epsilon": self.epsilon}


@dataclass(frozen=True)
class InnerEvent:
    """One trial of the perturbation loop inside outer iteration ``k``.

    ``ell`` is the step-size index the trial consumed (``None`` for a null
    schedule), ``accepted`` whether the candidate became the next inner point.
    """

    n: int
    ell: Optional[int]
    beta: float
    accepted: bool
    phi: float


@dataclass(frozen=True, eq=False)
class TraceRecord:
    k: int
    point: np.ndarray
    prox: float
    phi: float
    beta_consumed: float = 0.0
    descents: int = 0
    events: tuple = ()


@dataclass(eq=False)
class IterateTrace:
    """The recorded iterates of one run, with proximity and objective values.

    ``beta_consumed`` is cumulative: the total perturbation step size used to
    produce the iterate. ``events`` of record ``k`` describe the inner loop
    that produced record ``k`` from record ``k - 1``.
    """

    records: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)
    stop_reason: Optional[StopReason] = None

    def __len__(self) -> int:
        return len(self.records)

    def __getitem__(self, i):
        return self.records[i]

    def append(self, rec: TraceRecord) -> None:
        if self.records and rec.k <= self.records[-1].k:
            raise ValueError("trace indices must be strictly increasing")
        if rec.prox < 0:
            raise ValueError("proximity must be nonnegative")
        self.records.append(rec)

    @property
    def prox(self) -> np.ndarray:
        return np.array([r.prox for r in self.records])

    @property
    def phi(self) -> np.ndarray:
        return np.array([r.phi for r in self.records])

    @property
    def points(self) -> np.ndarray:
        return np.array([r.point for r in self.records])

    @property
    def final(self) -> TraceRecord:
        return self.records[-1]

    @classmethod
    def from_values(cls, prox, phi=None) -> "IterateTrace":
        """Build a point-less trace from raw proximity/objective sequences."""
        prox = list(prox)
        phi = [float("nan")] * len(prox) if phi is None else list(phi)
        tr = cls()
        for k, (p, f) in enumerate(zip(prox, phi)):
            tr.append(TraceRecord(k, np.zeros(1), float(p), float(f)))
        return tr

    def to_csv(self) -> str:
        out = io.StringIO()
        out.write(CSV_HEADER + "\n")
        for r in self.records:
            out.write(f"{r.k},{_fmt(r.prox)},{_fmt(r.phi)},{_fmt(r.beta_consumed)}\n")
        return out.getvalue()

    def points_json(self) -> str:
        return json.dumps({"k": [r.k for r in self.records], "points": [r.point.tolist() for r in self.records]})


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def read_trace_csv(text: str) -> IterateTrace:
    lines = text.strip().splitlines()
    if not lines or lines[0].strip() != CSV_HEADER:
        raise ValueError(f"trace CSV must start with header {CSV_HEADER!r}")
    tr = IterateTrace()
    for line in lines[1:]:
        k, prox, phi, beta = line.split(",")
        tr.append(TraceRecord(int(k), np.zeros(1), float(prox), float(phi), float(beta)))
    return tr


def read_points_json(text: str) -> tuple[list, np.ndarray]:
    doc = json.loads(text)
    return doc["k"], np.asarray(doc["points"], dtype=np.float64)
