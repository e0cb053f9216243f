"""Characteristic functions, their roots, and the two critical-speed curves.

The linearization of the profile equation at the positive steady state is
governed by psi(z) = z^2 - c z - e^{-z h} with h = c*tau; at the trivial
steady state by chi(z) = z^2 - c z + 1.  Two curves organize the parameter
plane:

* c_star(tau): the largest speed at which psi keeps two negative real zeros
  (boundary of the monotone-front region).  Infinite for tau <= 1/e, equal to
  the minimal speed 2 at tau_1 = 0.5607711602...
* c_starstar(tau): the speed at which the leading complex root crosses the
  imaginary axis (no wavefronts beyond it).  Infinite for tau <= pi/2, equal
  to 2 at tau_2 = arccos(2 - sqrt(5)) / (2 sqrt(sqrt(5) - 2)) = 1.8617327...
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .domain import Params
from .errors import DomainError, RootSearchError
from typing import Optional

__all__ = [
    "CharRoot",
    "CurveSample",
    "eval_psi",
    "eval_psi_dz",
    "chi",
    "chi_roots",
    "quadratic_roots_b",
    "real_roots_psi",
    "c_star",
    "c_starstar",
    "tau_of_c_starstar",
    "omega_crossing",
    "complex_roots_in_strips",
    "transversality",
    "trace_curves",
    "TAU1",
    "TAU2",
]

# Anchor delays at which the two critical-speed curves reach the minimal speed 2.
TAU1 = 0.5607711602124871          # double negative root of psi at c = 2
TAU2 = math.acos(2.0 - math.sqrt(5.0)) / (2.0 * math.sqrt(math.sqrt(5.0) - 2.0))

# |psi(x1)| below this at the negative local max means the two negative zeros
# are numerically indistinguishable and a multiplicity-2 root is reported.
_DEGENERATE_PSI = 1e-12
_MERGE_RADIUS = 1e-8


@dataclass(frozen=True)
class CharRoot:
    """A zero of psi.  Conjugates are implied: im >= 0 always.

    strip_index -1 marks the positive real root; j >= 0 marks the root whose
    scaled imaginary part h*im lies in (2j*pi, (2j+1)*pi) (negative real roots
    inherit index 0/1 by their ordering).
    """

    re: float
    im: float
    strip_index: int
    multiplicity: int = 1
    residual: float = 0.0

    @property
    def z(self) -> complex:
        return complex(self.re, self.im)


@dataclass(frozen=True)
class CurveSample:
    tau: float
    c_star: float       # +inf when tau <= 1/e
    c_starstar: float   # +inf when tau <= pi/2


def eval_psi(z: complex, p: Params) -> complex:
    """psi(z) = z^2 - c z - e^{-z h}."""
    return z * z - p.c * z - cmath.exp(-z * p.h)


def eval_psi_dz(z: complex, p: Params) -> complex:
    return 2 * z - p.c + p.h * cmath.exp(-z * p.h)


def chi(z, c):
    return z * z - c * z + 1.0


def chi_roots(c: float) -> tuple[float, float]:
    """Roots 0 < lambda <= mu of z^2 - c z + 1 = 0; lambda*mu = 1, lambda+mu = c."""
    if c < 2.0:
        raise DomainError(f"chi has complex roots for c={c} < 2; fronts need c >= 2")
    d = math.sqrt(c * c - 4.0)
    return (c - d) / 2.0, (c + d) / 2.0


def quadratic_roots_b(c: float, b: float) -> tuple[float, float]:
    """Roots z1 < 0 < z2 of z^2 - c z - b = 0 for a shift b > 0."""
    if b <= 0.0:
        raise DomainError(f"shift must be positive, got b={b}")
    d = math.sqrt(c * c + 4.0 * b)
    z1 = (c - d) / 2.0
    z2 = (c + d) / 2.0
    return z1, z2


# -- real roots of psi ------------------------------------------------------

def _psi_real(x: float, c: float, h: float) -> float:
    return x * x - c * x - math.exp(min(-x * h, 700.0))


def _dpsi_real(x: float, c: float, h: float) -> float:
    return 2.0 * x - c + h * math.exp(min(-x * h, 700.0))


def _newton_polish(x: float, c: float, h: float) -> float:
    for _ in range(60):
        f = _psi_real(x, c, h)
        df = _dpsi_real(x, c, h)
        if df == 0.0:
            break
        step = f / df
        x -= step
        if abs(step) <= 1e-15 * max(1.0, abs(x)):
            break
    return x


def _critical_points(c: float, h: float):
    """Zeros x1 <= x2 of psi' (psi''' > 0 makes psi' strictly convex)."""
    # psi'' = 2 - h^2 e^{-xh} vanishes at the unique minimum of psi'
    xstar = (2.0 * math.log(h) - math.log(2.0)) / h
    if _dpsi_real(xstar, c, h) > 0.0:
        return None
    step = max(1.0, 1.0 / h)
    a = xstar - step
    while _dpsi_real(a, c, h) <= 0.0:
        step *= 2.0
        a = xstar - step
        if a < -1e12:
            raise RootSearchError("no left bracket for psi' zero")
    x1 = brentq(_dpsi_real, a, xstar, args=(c, h), xtol=1e-14, rtol=8.9e-16)
    step = max(1.0, 1.0 / h)
    bnd = xstar + step
    while _dpsi_real(bnd, c, h) <= 0.0:
        step *= 2.0
        bnd = xstar + step
        if bnd > 1e12:
            raise RootSearchError("no right bracket for psi' zero")
    x2 = brentq(_dpsi_real, xstar, bnd, args=(c, h), xtol=1e-14, rtol=8.9e-16)
    return x1, x2


def real_roots_psi(p: Params) -> list[CharRoot]:
    """All real zeros of psi: the unique positive one, plus the (at most two)
    negative ones present exactly when c <= C*(tau).

    tau = 0 degenerates psi to the quadratic z^2 - c z - 1 with a single
    negative zero; it is reported with strip indexing carried over (index 0)
    since the strip structure needs h > 0.
    """
    c, h = p.c, p.h
    if c <= 0.0:
        raise DomainError("real_roots_psi needs c > 0")
    if p.tau == 0.0:
        d = math.sqrt(c * c + 4.0)
        neg, pos = (c - d) / 2.0, (c + d) / 2.0
        return [
            CharRoot(neg, 0.0, strip_index=0, residual=abs(_psi_real(neg, c, 0.0))),
            CharRoot(pos, 0.0, strip_index=-1, residual=abs(_psi_real(pos, c, 0.0))),
        ]

    roots: list[CharRoot] = []
    crit = _critical_points(c, h)

    def _bracket_root(lo, hi):
        x = brentq(_psi_real, lo, hi, args=(c, h), xtol=1e-14, rtol=8.9e-16)
        x = _newton_polish(x, c, h)
        return x

    if crit is not None:
        x1, x2 = crit
        v1 = _psi_real(x1, c, h)
        if x1 < 0.0:
            if v1 > _DEGENERATE_PSI:
                # local max is positive: one zero on each side of x1
                step = max(1.0, 1.0 / h)
                a = x1 - step
                while _psi_real(a, c, h) >= 0.0:
                    step *= 2.0
                    a = x1 - step
                lam1 = _bracket_root(a, x1)
                hi = min(x2, 0.0)
                lam0 = _bracket_root(x1, hi)
                if abs(lam0 - lam1) <= _MERGE_RADIUS:
                    xm = 0.5 * (lam0 + lam1)
                    roots.append(CharRoot(xm, 0.0, strip_index=0, multiplicity=2,
                                          residual=abs(_psi_real(xm, c, h))))
                else:
                    roots.append(CharRoot(lam1, 0.0, strip_index=1,
                                          residual=abs(_psi_real(lam1, c, h))))
                    roots.append(CharRoot(lam0, 0.0, strip_index=0,
                                          residual=abs(_psi_real(lam0, c, h))))
            elif abs(v1) <= _DEGENERATE_PSI:
                roots.append(CharRoot(x1, 0.0, strip_index=0, multiplicity=2,
                                      residual=abs(v1)))
            # v1 < -_DEGENERATE_PSI: no negative zeros

    # positive root: to the right of the last critical point (or of 0)
    lo = 0.0 if crit is None else max(crit[1], 0.0)
    if _psi_real(lo, c, h) >= 0.0:
        lo = 0.0  # cannot happen for the positive branch; fall back
    step = max(1.0, c)
    hi = lo + step
    while _psi_real(hi, c, h) <= 0.0:
        step *= 2.0
        hi = lo + step
    lam_m1 = _bracket_root(lo, hi)
    roots.append(CharRoot(lam_m1, 0.0, strip_index=-1,
                          residual=abs(_psi_real(lam_m1, c, h))))
    return roots


def dominant_negative_root(p: Params) -> Optional[float]:
    """lambda_0, the negative real zero of psi closest to 0, when it exists."""
    cands = [r.re for r in real_roots_psi(p) if r.re < 0.0]
    return max(cands) if cands else None


# -- critical-speed curves --------------------------------------------------

TAU_STAR_THRESHOLD = 1.0 / math.e
TAU_STARSTAR_THRESHOLD = math.pi / 2.0


def _neg_max_value(c: float, tau: float) -> float:
    """Value of psi at its negative local max; > 0 iff two negative zeros exist."""
    h = c * tau
    crit = _critical_points(c, h)
    if crit is None or crit[0] >= 0.0:
        return -1.0
    return _psi_real(crit[0], c, h)


def c_star(tau: float, *, polish: bool = True) -> float:
    """Largest speed with two negative real characteristic zeros.

    Returns +inf for tau <= 1/e (closed-form threshold, not numerical blow-up).
    For tau > tau_1 the returned value drops below the minimal speed 2: no
    monotone-front region exists there, but the curve itself continues.
    """
    if tau < 0.0:
        raise DomainError("tau must be non-negative")
    if tau <= TAU_STAR_THRESHOLD:
        return math.inf
    c_lo = 1e-4
    if _neg_max_value(c_lo, tau) <= 0.0:
        raise RootSearchError(f"no double-root bracket at tau={tau}")
    c_hi = 2.0
    while _neg_max_value(c_hi, tau) > 0.0:
        c_hi *= 2.0
        if c_hi > 1e9:
            raise RootSearchError(f"double-root speed exceeds 1e9 at tau={tau}")
    c_br = brentq(_neg_max_value, c_lo, c_hi, args=(tau,), xtol=1e-12, rtol=8.9e-16)
    if not polish:
        return c_br
    # Newton on (psi, psi_z) = 0 in (x, c) from the bracketed approximation
    h = c_br * tau
    crit = _critical_points(c_br, h)
    x = crit[0] if crit is not None else -1.0
    c = c_br
    for _ in range(50):
        h = c * tau
        e = math.exp(-x * h)
        f1 = x * x - c * x - e
        f2 = 2.0 * x - c + h * e
        j11 = f2
        j12 = -x + x * tau * e
        j21 = 2.0 - h * h * e
        j22 = -1.0 + tau * e * (1.0 - x * c * tau)
        det = j11 * j22 - j12 * j21
        if det == 0.0:
            break
        dx = (f1 * j22 - f2 * j12) / det
        dc = (j11 * f2 - j21 * f1) / det
        x -= dx
        c -= dc
        if abs(dx) + abs(dc) < 1e-14 * max(1.0, abs(c)):
            break
    return c


def double_root_location(tau: float) -> float:
    """Location x < 0 of the double negative zero on the c_star curve."""
    c = c_star(tau)
    if math.isinf(c):
        raise DomainError(f"no double root for tau={tau} <= 1/e")
    crit = _critical_points(c, c * tau)
    return crit[0]


def omega_squared(c: float) -> float:
    """Crossing frequency squared: w^2(c) = (sqrt(c^4 + 4) - c^2) / 2."""
    c2 = c * c
    # rationalized to avoid cancellation for large c
    return 2.0 / (math.sqrt(c2 * c2 + 4.0) + c2)


def omega_crossing(c: float) -> float:
    return math.sqrt(omega_squared(c))


def tau_of_c_starstar(c: float) -> float:
    """Delay at which speed c sits exactly on the crossing curve:
    tau = arccos(-w^2(c)) / (c w(c)), strictly decreasing in c with limit pi/2."""
    if c <= 0.0:
        raise DomainError("crossing curve needs c > 0")
    w2 = omega_squared(c)
    w = math.sqrt(w2)
    return math.acos(-w2) / (c * w)


def c_starstar(tau: float) -> float:
    """Speed at which the leading complex root reaches the imaginary axis.

    +inf for tau <= pi/2; below 2 for tau > tau_2 (the curve continues but
    every speed c >= 2 then has at least three zeros with Re z >= 0).
    """
    if tau < 0.0:
        raise DomainError("tau must be non-negative")
    if tau <= TAU_STARSTAR_THRESHOLD:
        return math.inf
    c_lo = 1e-8
    c_hi = 4.0
    while tau_of_c_starstar(c_hi) > tau:
        c_hi *= 2.0
        if c_hi > 1e12:
            raise RootSearchError("crossing-speed bracket failure")
    return brentq(lambda c: tau_of_c_starstar(c) - tau, c_lo, c_hi,
                  xtol=1e-13, rtol=8.9e-16)


def trace_curves(taus) -> list[CurveSample]:
    return [CurveSample(float(tt), c_star(float(tt)), c_starstar(float(tt)))
            for tt in np.asarray(taus, dtype=float)]


# -- complex roots ----------------------------------------------------------

def _winding_number(p: Params, re_lo, re_hi, im_lo, im_hi, samples=4096) -> int:
    """Zeros of psi inside the rectangle by the argument principle."""
    s = samples // 4
    corners = [complex(re_lo, im_lo), complex(re_hi, im_lo),
               complex(re_hi, im_hi), complex(re_lo, im_hi)]
    zs = []
    for k in range(4):
        a, bnd = corners[k], corners[(k + 1) % 4]
        tt = np.arange(s) / s
        zs.append(a + (bnd - a) * tt)
    z = np.concatenate(zs)
    vals = z * z - p.c * z - np.exp(-z * p.h)
    args = np.angle(vals)
    d = np.diff(np.concatenate([args, args[:1]]))
    d = (d + np.pi) % (2 * np.pi) - np.pi
    return int(round(d.sum() / (2 * np.pi)))


def _newton_complex(z: complex, p: Params, tol: float = 1e-12) -> Optional[complex]:
    for _ in range(100):
        f = eval_psi(z, p)
        if abs(f) <= tol:
            return z
        df = eval_psi_dz(z, p)
        if df == 0:
            return None
        step = f / df
        # damped: halve until |psi| does not increase
        lam = 1.0
        for _ in range(40):
            znew = z - lam * step
            if abs(eval_psi(znew, p)) < abs(f):
                break
            lam /= 2.0
        else:
            return None
        z = znew
    return z if abs(eval_psi(z, p)) <= tol else None


def complex_roots_in_strips(p: Params, j_max: int, residual_tol: float = 1e-12) -> list[CharRoot]:
    """One root per horizontal strip h*Im z in (2j pi, (2j+1) pi), j = 0..j_max.

    Valid in the simple-root regime c > C*(tau): each strip then carries
    exactly one root with Im > 0 and the real parts decrease strictly in j.
    """
    if j_max < 0:
        raise DomainError("j_max must be >= 0")
    if p.h <= 0.0:
        raise DomainError("strips need h = c*tau > 0")
    h = p.h
    lam_m1 = next(r.re for r in real_roots_psi(p) if r.strip_index == -1)
    roots: list[CharRoot] = []
    for j in range(j_max + 1):
        im_lo = 2 * j * math.pi / h
        im_hi = (2 * j + 1) * math.pi / h
        if j == 0:
            im_lo += 1e-9 * math.pi / h  # keep the real axis (and lam_-1) outside
        b_mid = 0.5 * (im_lo + im_hi)
        re_hi = lam_m1 + 1.0
        re_lo = min(-1.0, -(2.0 / h) * math.log((2 * j + 1) * math.pi / h + p.c + 2.0) - 2.0)
        found = None
        for _ in range(6):
            count = _winding_number(p, re_lo, re_hi, im_lo, im_hi)
            if count >= 1:
                break
            re_lo *= 2.0
        else:
            raise RootSearchError(
                f"argument principle finds no root in strip j={j} "
                f"(Im in ({im_lo:g},{im_hi:g}))")
        # Newton from a coarse grid of seeds until the in-strip root is caught
        for m in (4, 8, 16, 32):
            res = np.linspace(re_lo, re_hi, m + 2)[1:-1]
            ims = np.linspace(im_lo, im_hi, m + 2)[1:-1]
            for a in res:
                for bb in ims:
                    z = _newton_complex(complex(a, bb), p, residual_tol)
                    if z is None:
                        continue
                    if im_lo - 1e-12 <= z.imag <= im_hi + 1e-12 and re_lo <= z.real <= re_hi:
                        found = z
                        break
                if found is not None:
                    break
            if found is not None:
                break
        if found is None:
            raise RootSearchError(f"Newton refinement failed in strip j={j}")
        roots.append(CharRoot(found.real, abs(found.imag), strip_index=j,
                              residual=abs(eval_psi(found, p))))
    for k in range(len(roots) - 1):
        if not roots[k + 1].re < roots[k].re:
            raise RootSearchError("strip roots violate strict real-part ordering")
    return roots


def transversality(c0: float, tau: float, w: float, tol: float = 1e-8) -> float:
    """d(Re lambda)/dc at a purely imaginary crossing root i*w.

    Requires (c0, tau, w) on the crossing manifold: cos(c0 tau w) = -w^2 and
    sin(c0 tau w) = c0 w, enforced to ``tol``.  The closed form is strictly
    positive: roots cross the imaginary axis only from left to right.
    """
    if w <= 0.0:
        raise DomainError("crossing frequency must be positive")
    th = c0 * tau * w
    if abs(math.cos(th) + w * w) > tol or abs(math.sin(th) - c0 * w) > tol:
        raise DomainError(
            f"(c0,tau,w)=({c0},{tau},{w}) is not on the crossing manifold "
            f"(residuals {abs(math.cos(th) + w*w):.2e}, {abs(math.sin(th) - c0*w):.2e})")
    w2 = w * w
    num = 2.0 * w2 * (1.0 + tau * w2)
    den = c0 * c0 * (1.0 + tau * w2) ** 2 + w2 * (c0 * c0 * tau - 2.0) ** 2
    return num / den
