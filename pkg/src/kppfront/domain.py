"""Shared parameter and profile types.

All types are immutable value objects after construction, safe to share across
parallel workers.  Profiles live on a uniform grid; the scaled lag h = c*tau is
always an integer multiple of the grid spacing so the delayed sample
phi(t - h) is a plain index lookup with no interpolation error.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DomainError, GridError, TailError

__all__ = [
    "Params",
    "TailModel",
    "RightTail",
    "GridProfile",
    "LogProfile",
    "to_log_profile",
    "fmt17",
]


def fmt17(x: float) -> str:
    """Format a float with 17 significant digits (lossless round trip)."""
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.17g}"


@dataclass(frozen=True)
class Params:
    """Wave speed / delay pair.  The scaled lag h = c*tau is derived, never stored."""

    c: float
    tau: float

    def __post_init__(self):
        if not (self.c >= 0.0) or not (self.tau >= 0.0):
            raise DomainError(f"need c >= 0 and tau >= 0, got c={self.c}, tau={self.tau}")

    @property
    def h(self) -> float:
        return self.c * self.tau

    @property
    def admissible_for_fronts(self) -> bool:
        """Semi-wavefronts exist exactly for speeds c >= 2."""
        return self.c >= 2.0


@dataclass(frozen=True)
class TailModel:
    """Left-tail model  phi(t) ~ coefficient * (-t)^poly_degree * exp(rate * t).

    rate == 0 with poly_degree == 0 describes a constant extension (used by
    constant test profiles); computed fronts carry rate = lambda, the positive
    root of z^2 - c z + 1, with poly_degree 1 exactly at c = 2.
    """

    coefficient: float
    rate: float
    poly_degree: int = 0

    def eval(self, t):
        t = np.asarray(t, dtype=float)
        out = self.coefficient * np.exp(self.rate * t)
        if self.poly_degree:
            out = out * np.maximum(-t, 0.0) ** self.poly_degree
        return out


@dataclass(frozen=True)
class RightTail:
    """Right-tail declaration: either a constant limit or exponential growth."""

    kind: str  # "const" | "exp-growth"
    limit: float = 1.0
    rate: float = 0.0

    def __post_init__(self):
        if self.kind not in ("const", "exp-growth"):
            raise TailError(f"unknown right tail kind {self.kind!r}")


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class GridProfile:
    """Uniformly sampled wave profile with tail metadata.

    values[i] = phi(t0 + i*dt).  All samples must be non-negative: profiles
    represent semi-wavefront candidates, which are non-negative by definition.
    """

    t0: float
    dt: float
    values: np.ndarray
    left_tail: TailModel
    right_tail: RightTail
    params: Params | None = None

    def __post_init__(self):
        object.__setattr__(self, "values", _freeze(self.values))
        if self.dt <= 0:
            raise GridError(f"grid spacing must be positive, got {self.dt}")
        if self.values.ndim != 1 or len(self.values) < 2:
            raise GridError("profile needs a 1-d array of at least two samples")
        if np.any(self.values < 0):
            raise DomainError("profile samples must be non-negative")
        if not np.all(np.isfinite(self.values)):
            raise DomainError("profile samples must be finite")

    def __len__(self):
        return len(self.values)

    @property
    def t(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(len(self.values))

    @property
    def t_end(self) -> float:
        return self.t0 + self.dt * (len(self.values) - 1)

    def lag_cells(self, h: float) -> int:
        """Number of grid cells in one lag; h must be an integer multiple of dt."""
        k = h / self.dt
        ki = int(round(k))
        if abs(k - ki) > 1e-9 * max(1.0, abs(k)):
            raise GridError(f"lag h={h} is not an integer multiple of dt={self.dt}")
        return ki

    def with_values(self, values, **changes) -> "GridProfile":
        return replace(self, values=np.asarray(values, dtype=float), **changes)

    def shifted(self, delta_t: float) -> "GridProfile":
        """Relabel the time axis (the profile equation is autonomous)."""
        return replace(self, t0=self.t0 + delta_t)

    def interp(self, tq):
        """Cubic interpolation of the profile at query times inside the window."""
        from scipy.interpolate import CubicSpline

        return CubicSpline(self.t, self.values)(tq)

    # -- serialization ------------------------------------------------------

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "phi"])
        tt = self.t
        for i in range(len(self.values)):
            w.writerow([fmt17(tt[i]), fmt17(self.values[i])])
        return buf.getvalue()

    def to_json_dict(self) -> dict:
        d = {
            "t0": self.t0,
            "dt": self.dt,
            "values": [float(v) for v in self.values],
            "left_tail": {
                "coefficient": self.left_tail.coefficient,
                "rate": self.left_tail.rate,
                "poly_degree": self.left_tail.poly_degree,
            },
            "right_tail": {
                "kind": self.right_tail.kind,
                "limit": self.right_tail.limit,
                "rate": self.right_tail.rate,
            },
        }
        if self.params is not None:
            d["params"] = {"c": self.params.c, "tau": self.params.tau}
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict())

    @classmethod
    def from_json_dict(cls, d: dict) -> "GridProfile":
        params = None
        if "params" in d and d["params"] is not None:
            params = Params(d["params"]["c"], d["params"]["tau"])
        return cls(
            t0=d["t0"],
            dt=d["dt"],
            values=np.asarray(d["values"], dtype=float),
            left_tail=TailModel(**d["left_tail"]),
            right_tail=RightTail(**d["right_tail"]),
            params=params,
        )

    @classmethod
    def from_json(cls, s: str) -> "GridProfile":
        return cls.from_json_dict(json.loads(s))

    @classmethod
    def from_csv(cls, s: str, left_tail=None, right_tail=None, params=None) -> "GridProfile":
        rows = list(csv.reader(io.StringIO(s)))
        if not rows or rows[0][:2] != ["t", "phi"]:
            raise GridError("profile CSV must start with header 't,phi'")
        t = np.array([float(r[0]) for r in rows[1:]])
        v = np.array([float(r[1]) for r in rows[1:]])
        dts = np.diff(t)
        dt = float(np.median(dts))
        if np.max(np.abs(dts - dt)) > 1e-9 * max(1.0, dt):
            raise GridError("profile CSV is not uniformly spaced")
        if left_tail is None:
            left_tail = TailModel(coefficient=float(v[0]), rate=0.0)
        if right_tail is None:
            right_tail = RightTail("const", limit=float(v[-1]))
        return cls(t0=float(t[0]), dt=dt, values=v, left_tail=left_tail,
                   right_tail=right_tail, params=params)


@dataclass(frozen=True)
class LogProfile:
    """Log coordinates x(t) = -ln phi(t) on the same grid as the source profile."""

    t0: float
    dt: float
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _freeze(self.values))

    @property
    def t(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(len(self.values))


def to_log_profile(p: GridProfile) -> LogProfile:
    """Change of variables x = -ln phi; requires a strictly positive profile."""
    if np.any(p.values <= 0.0):
        bad = int(np.argmin(p.values))
        raise DomainError(
            f"log change of variables needs phi > 0 everywhere; "
            f"phi({p.t0 + bad * p.dt:g}) = {p.values[bad]:g}"
        )
    return LogProfile(t0=p.t0, dt=p.dt, values=-np.log(p.values))


def is_wavefront_candidate(p: GridProfile, tol: float = 1e-6) -> bool:
    """Constant-limit 1 right tail with the last 10% of samples within tol of it."""
    if p.right_tail.kind != "const":
        return False
    if abs(p.right_tail.limit - 1.0) > tol:
        return False
    k = max(1, len(p.values) // 10)
    return bool(np.all(np.abs(p.values[-k:] - p.right_tail.limit) <= tol))
