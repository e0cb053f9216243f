"""Exponential-kernel quadrature on uniform grids.

The integral operators of the front construction all reduce to convolutions of
a sampled integrand against one-sided exponential kernels.  Each grid cell is
integrated exactly against e^{z(t-s)} with the integrand replaced by its local
cubic interpolant (linear on the two boundary cells, where the integrand is
tail-model small).  Exact kernel treatment removes the stiffness of large
rates; constants reproduce exactly, so the operator fixed-point identities
hold to round-off, and the O(dt^4) interpolation error keeps the quadrature
bias along a front's neutral translation direction far below the iteration
tolerances.  Each pass is a first-order linear recurrence, evaluated in C via
scipy.signal.lfilter.
"""

from __future__ import annotations

import numpy as np
from scipy.signal import lfilter

__all__ = ["decay_integral", "grow_integral", "decay_moment_integral", "u_moments"]

# series cutoff: below this the closed forms for the u^k moments lose digits
_ZETA_SMALL = 0.05


def u_moments(zeta: float, kmax: int = 3) -> list[float]:
    """m_k = int_0^1 u^k e^{-zeta u} du for k = 0..kmax (zeta >= 0)."""
    if zeta < _ZETA_SMALL:
        # m_k = sum_i (-zeta)^i / (i! (k + i + 1)), truncated far below 1e-16
        out = []
        for k in range(kmax + 1):
            term = 1.0
            acc = 1.0 / (k + 1)
            for i in range(1, 12):
                term *= -zeta / i
                acc += term / (k + i + 1)
            out.append(acc)
        return out
    e = float(np.exp(-zeta))
    m = [0.0] * (kmax + 1)
    m[0] = (1.0 - e) / zeta
    # m_k = (k m_{k-1} - e) / zeta by integration by parts
    for k in range(1, kmax + 1):
        m[k] = (k * m[k - 1] - e) / zeta
    return m


def _cubic_cell_weights(zeta: float):
    """Weights (w_m1, w_0, w_1, w_2) with

        int_0^1 e^{-zeta u} P(u) du = sum w_k P_k

    for the cubic through samples P at u = -1, 0, 1, 2."""
    m0, m1, m2, m3 = u_moments(zeta, 3)
    w_m1 = (-m3 + 3.0 * m2 - 2.0 * m1) / 6.0
    w_0 = (m3 - 2.0 * m2 - m1 + 2.0 * m0) / 2.0
    w_1 = (-m3 + m2 + 2.0 * m1) / 2.0
    w_2 = (m3 - m1) / 6.0
    return w_m1, w_0, w_1, w_2


def _linear_cell_weights(zeta: float):
    m0, m1 = u_moments(zeta, 1)
    return m0 - m1, m1


def _cell_integrals(P: np.ndarray, zeta: float, dt: float) -> np.ndarray:
    """w[j] = int_{t_j}^{t_{j+1}} e^{-zeta (s - t_j)/dt ... } P(s) ds / orientation,
    i.e. the forward-oriented cell integrals with the kernel anchored at the
    left cell edge.  Cubic stencils on interior cells, linear at the ends."""
    n = len(P)
    w = np.empty(n - 1)
    a_lin, b_lin = _linear_cell_weights(zeta)
    w[0] = dt * (a_lin * P[0] + b_lin * P[1])
    w[-1] = dt * (a_lin * P[-2] + b_lin * P[-1])
    if n > 3:
        c_m1, c_0, c_1, c_2 = _cubic_cell_weights(zeta)
        w[1:-1] = dt * (c_m1 * P[:-3] + c_0 * P[1:-2] + c_1 * P[2:-1] + c_2 * P[3:])
    return w


def _backward_recurrence(w: np.ndarray, q: float, last: float) -> np.ndarray:
    """S[i] = w[i] + q S[i+1] for i = n-2..0 with S[n-1] = last."""
    n = len(w) + 1
    S = np.empty(n)
    S[-1] = last
    if n > 1:
        yrev, _ = lfilter([1.0], [1.0, -q], w[::-1], zi=np.asarray([q * last]))
        S[:-1] = yrev[::-1]
    return S


def _forward_recurrence(w: np.ndarray, q: float, first: float) -> np.ndarray:
    """J[i] = w[i-1] + q J[i-1] for i = 1..n-1 with J[0] = first."""
    n = len(w) + 1
    J = np.empty(n)
    J[0] = first
    if n > 1:
        y, _ = lfilter([1.0], [1.0, -q], w, zi=np.asarray([q * first]))
        J[1:] = y
    return J


def decay_integral(P: np.ndarray, z: float, dt: float, tail_value: float) -> np.ndarray:
    """I[i] = int_{t_i}^{+inf} e^{z (t_i - s)} P(s) ds with z > 0.

    Beyond the last node P is the constant ``tail_value``, contributing
    tail_value / z in closed form.
    """
    zeta = z * dt
    q = float(np.exp(-zeta))
    w = _cell_integrals(P, zeta, dt)
    return _backward_recurrence(w, q, tail_value / z)


def grow_integral(R: np.ndarray, z1: float, dt: float, left_value: float) -> np.ndarray:
    """J[i] = int_{-inf}^{t_i} e^{z1 (t_i - s)} R(s) ds with z1 < 0.

    ``left_value`` is the closed-form value at the first node, computed by the
    caller from the declared left-tail model of R.
    """
    zeta = -z1 * dt
    q = float(np.exp(-zeta))
    # integrate each cell against the kernel anchored at the right cell edge:
    # mirror the samples so the same weights apply
    w = _cell_integrals(R[::-1], zeta, dt)[::-1]
    return _forward_recurrence(w, q, left_value)


def decay_moment_integral(P: np.ndarray, dt: float, tail_value: float,
                          E: np.ndarray | None = None) -> np.ndarray:
    """F[i] = int_{t_i}^{+inf} (s - t_i) e^{t_i - s} P(s) ds (unit-rate kernel).

    Used by the critical-speed operator at c = 2 where the kernel rates
    coalesce.  Beyond the grid P = tail_value, contributing exactly
    tail_value * int_0^inf u e^{-u} du = tail_value.  Couples to
    E[i] = int_{t_i}^{inf} e^{t_i - s} P ds through
    F[i] = local + q (F[i+1] + dt E[i+1]).
    """
    if E is None:
        E = decay_integral(P, 1.0, dt, tail_value)
    zeta = dt
    q = float(np.exp(-zeta))
    n = len(P)
    m = u_moments(zeta, 4)
    # local[j] = dt^2 int_0^1 u e^{-zeta u} P(u) du with the same stencils,
    # which shifts every weight's moment index up by one
    w_loc = np.empty(n - 1)
    a_lin = m[1] - m[2]
    b_lin = m[2]
    w_loc[0] = dt * dt * (a_lin * P[0] + b_lin * P[1])
    w_loc[-1] = dt * dt * (a_lin * P[-2] + b_lin * P[-1])
    if n > 3:
        c_m1 = (-m[4] + 3.0 * m[3] - 2.0 * m[2]) / 6.0
        c_0 = (m[4] - 2.0 * m[3] - m[2] + 2.0 * m[1]) / 2.0
        c_1 = (-m[4] + m[3] + 2.0 * m[2]) / 2.0
        c_2 = (m[4] - m[2]) / 6.0
        w_loc[1:-1] = dt * dt * (c_m1 * P[:-3] + c_0 * P[1:-2]
                                 + c_1 * P[2:-1] + c_2 * P[3:])
    w = w_loc + q * dt * E[1:]
    return _backward_recurrence(w, q, tail_value * 1.0)
