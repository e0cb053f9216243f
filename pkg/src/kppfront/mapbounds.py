"""One-dimensional map machinery behind the a priori bounds.

Successive extrema of the log-profile x = -ln phi of an oscillating wave obey
the interval map x -> h * f(w(x)) where f(A) is the near-zero root of
y^2 + c y - A = 0 and w(x) = e^{-x} - 1.  The composition has Schwarzian
derivative <= -1/8 for every c >= 2, which pins global stability of the fixed
point 0 whenever the multiplier h/c = tau is at most 1, and yields the
explicit box (L_e, U_e) confining every oscillating profile.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .domain import Params
from .errors import AdmissibilityError, BracketError, DomainError

__all__ = [
    "MapBounds",
    "f_bound",
    "w_map",
    "schwarzian_fg",
    "apriori_bounds",
    "map_iterate",
    "find_two_cycle",
    "stability_threshold_probe",
]


@dataclass(frozen=True)
class MapBounds:
    """A priori box for oscillating profiles: L <= x <= U in log coordinates,
    equivalently L_e < phi < U_e, with B_star the infimum of the map itself."""

    L: float
    U: float
    L_e: float
    U_e: float
    B_star: float


def f_bound(A, c: float):
    """Root of y^2 + c y - A = 0 closer to zero: f(A) = (-c + sqrt(c^2+4A))/2.

    Strictly increasing in A; defined down to A = -1 for every c >= 2.
    """
    A = np.asarray(A, dtype=float)
    disc = c * c + 4.0 * A
    if np.any(disc < 0.0):
        raise DomainError(f"c^2 + 4A < 0 (c={c}, min A={A.min()})")
    out = (-c + np.sqrt(disc)) / 2.0
    return out if out.ndim else float(out)


def w_map(x):
    """w(x) = e^{-x} - 1: strictly decreasing, w(0) = 0, limit -1 at +inf."""
    x = np.asarray(x, dtype=float)
    out = np.expm1(-x)
    return out if out.ndim else float(out)


def schwarzian_fg(x, c: float):
    """Schwarzian derivative of f o w in closed form: 6/(e^x (c^2-4) + 4)^2 - 1/2.

    Bounded above by -1/8 for all x once c >= 2 (equality everywhere at c = 2).
    """
    if c < 2.0:
        raise DomainError(f"Schwarzian bound needs c >= 2, got {c}")
    x = np.asarray(x, dtype=float)
    out = 6.0 / (np.exp(x) * (c * c - 4.0) + 4.0) ** 2 - 0.5
    return out if out.ndim else float(out)


def b_star(c: float, h: float) -> float:
    return -2.0 * h / (c + math.sqrt(c * c - 4.0))


def apriori_bounds(p: Params) -> MapBounds:
    """Explicit box confining the extrema of every slowly oscillating profile."""
    c, h = p.c, p.h
    if c < 2.0:
        raise AdmissibilityError(f"bounds need c >= 2, got c={c}")
    if h <= 0.0:
        raise DomainError(f"bounds need h > 0, got h={h}")
    bs = b_star(c, h)
    L = min(-c * h, bs)
    U = h * f_bound(math.expm1(-L), c)
    return MapBounds(L=L, U=U, L_e=math.exp(-U), U_e=math.exp(-L), B_star=bs)


def composed_map(x, p: Params):
    """One application of x -> h * f(w(x))."""
    return p.h * f_bound(w_map(x), p.c)


def map_iterate(M0: float, p: Params, k: int):
    """Orbit of h*f(w(.)) from M0 over 2k steps plus its even-step subsequence.

    Returns (orbit, even_steps) with orbit[0] = M0, len(orbit) = 2k + 1 and
    even_steps = orbit[::2].
    """
    if p.c < 2.0:
        raise AdmissibilityError(f"map needs c >= 2, got c={p.c}")
    orbit = np.empty(2 * k + 1)
    orbit[0] = M0
    x = M0
    for i in range(2 * k):
        x = composed_map(x, p)
        orbit[i + 1] = x
    return orbit, orbit[::2].copy()


def find_two_cycle(p: Params, xtol: float = 1e-14):
    """Nontrivial fixed point of the second iterate on (0, inf), or None.

    Searches x in [1e-8, X] for a sign change of (h f o w)^2(x) - x, extending
    X beyond the a priori upper bound until the map's boundedness forces a
    negative value.
    """
    G2 = lambda x: composed_map(composed_map(x, p), p) - x
    lo = 1e-8
    if G2(lo) <= 0.0:
        return None
    hi = max(apriori_bounds(p).U, 1.0)
    for _ in range(60):
        if G2(hi) < 0.0:
            break
        hi *= 2.0
    else:
        return None
    x = brentq(G2, lo, hi, xtol=xtol, rtol=8.9e-16)
    return float(x)


def stability_threshold_probe(c: float, tau_lo: float, tau_hi: float,
                              tol: float = 1e-6) -> float:
    """Bisect in tau for the onset of a nontrivial 2-cycle of h f o w.

    The local multiplier of the fixed point 0 is -h f'(0) w'(0) = -tau, so the
    onset sits at tau = 1 up to the bisection tolerance; the probe measures it
    instead of assuming it.  Exploratory: the stability loss of the map is not
    claimed to coincide with any wavefront-existence boundary.
    """
    if c < 2.0:
        raise AdmissibilityError(f"probe needs c >= 2, got c={c}")
    if not tau_lo < tau_hi:
        raise DomainError("need tau_lo < tau_hi")
    has_lo = find_two_cycle(Params(c, tau_lo)) is not None
    has_hi = find_two_cycle(Params(c, tau_hi)) is not None
    if has_lo == has_hi:
        raise BracketError(
            f"2-cycle present at both ends of [{tau_lo}, {tau_hi}]" if has_lo
            else f"no 2-cycle in [{tau_lo}, {tau_hi}]")
    lo, hi = tau_lo, tau_hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if (find_two_cycle(Params(c, mid)) is not None) == has_hi:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)
