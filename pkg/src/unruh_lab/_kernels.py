"""Closed-form kernels for piecewise-quadratic phases.

Every piece is handled in local coordinates ``v in [0, L]`` with phase
``a v**2 + b v + c``. Both backends implement identical arithmetic:
``*_nb`` are numba scalar/loop kernels, ``*_np`` are numpy-vectorised.
"""
import cmath
import math

import numpy as np

from ._backend import njit, prange
from .faddeeva import w_numpy, w_scalar

SQRT_PI_HALF = 0.5 * math.sqrt(math.pi)
EIGHTH_TURN = cmath.exp(0.25j * math.pi)
A_LIN_REL = 1e-12
SINC_SMALL = 1e-8


@njit
def _linear_piece(b, c, L):
    # e^{ic} (e^{ibL} - 1)/(ib) == e^{ic} L e^{ibL/2} sinc(bL/2)
    x = 0.5 * b * L
    if abs(x) < SINC_SMALL:
        sinc = 1.0 - x * x / 6.0
    else:
        sinc = math.sin(x) / x
    return cmath.exp(1j * (c + x)) * (L * sinc)


@njit
def _quadratic_piece_pos(a, b, c, L):
    # a > 0; complete the square around v0 = -b/(2a) and write every
    # endpoint term as e^{i phase(v)} w(e^{i pi/4} sqrt(a) |v - v0|)
    sa = math.sqrt(a)
    c0 = SQRT_PI_HALF * EIGHTH_TURN / sa
    u1 = 0.5 * b / a
    u2 = L + u1
    e1 = cmath.exp(1j * c) * w_scalar(EIGHTH_TURN * (sa * abs(u1)))
    e2 = cmath.exp(1j * ((a * L + b) * L + c)) * w_scalar(EIGHTH_TURN * (sa * abs(u2)))
    if u1 >= 0.0:
        return c0 * (e1 - e2)
    if u2 <= 0.0:
        return c0 * (e2 - e1)
    vertex = c - 0.25 * b * b / a
    return c0 * (2.0 * cmath.exp(1j * vertex) - e1 - e2)


@njit
def fresnel_local(a, b, c, L):
    """``int_0^L exp(i (a v^2 + b v + c)) dv`` for ``L >= 0``."""
    if abs(a) <= A_LIN_REL * (b * b + 1.0):
        return _linear_piece(b, c, L)
    if a > 0.0:
        return _quadratic_piece_pos(a, b, c, L)
    return _quadratic_piece_pos(-a, -b, -c, L).conjugate()


@njit
def eval_I_nb(t0, L, sa, sb, alpha0, k0, omega, sign, has_tails, tl, al, sl, tr, ar, sr, eps):
    """Sum of piece integrals of ``exp(i (omega tau + sign alpha(tau)))``.

    With ``has_tails`` the two adiabatically damped inertial tails
    ``exp(-eps * distance)`` beyond ``tl`` and ``tr`` are added in closed form.
    """
    total = 0.0 + 0.0j
    for j in range(t0.size):
        a = sign * k0 * (sb[j] - sa[j]) / (2.0 * L[j])
        b = omega + sign * k0 * sa[j]
        c = omega * t0[j] + sign * alpha0[j]
        total += fresnel_local(a, b, c, L[j])
    if has_tails:
        fl = omega + sign * k0 * sl
        fr = omega + sign * k0 * sr
        total += cmath.exp(1j * (omega * tl + sign * al)) / (eps + 1j * fl)
        total += cmath.exp(1j * (omega * tr + sign * ar)) / (eps - 1j * fr)
    return total


@njit(parallel=True)
def eval_I_grid_nb(t0, L, sa, sb, alpha0, k0, omegas, sign, has_tails, tl, al, sl, tr, ar, sr, eps):
    out = np.empty(omegas.size, dtype=np.complex128)
    for i in prange(omegas.size):
        out[i] = eval_I_nb(t0, L, sa, sb, alpha0, k0, omegas[i], sign, has_tails, tl, al, sl, tr, ar, sr, eps)
    return out


def _linear_piece_np(b, c, L):
    x = 0.5 * b * L
    small = np.abs(x) < SINC_SMALL
    with np.errstate(invalid="ignore", divide="ignore"):
        sinc = np.where(small, 1.0 - x * x / 6.0, np.sin(x) / np.where(small, 1.0, x))
    return np.exp(1j * (c + x)) * (L * sinc)


def fresnel_local_np(a, b, c, L):
    a, b, c, L = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (a, b, c, L)))
    out = np.empty(a.shape, dtype=np.complex128)
    lin = np.abs(a) <= A_LIN_REL * (b * b + 1.0)
    if lin.any():
        out[lin] = _linear_piece_np(b[lin], c[lin], L[lin])
    quad = ~lin
    if quad.any():
        aq, bq, cq, Lq = a[quad], b[quad], c[quad], L[quad]
        neg = aq < 0.0
        flip = np.where(neg, -1.0, 1.0)
        aq, bq, cq = aq * flip, bq * flip, cq * flip
        sa = np.sqrt(aq)
        c0 = SQRT_PI_HALF * EIGHTH_TURN / sa
        u1 = 0.5 * bq / aq
        u2 = Lq + u1
        e1 = np.exp(1j * cq) * w_numpy(EIGHTH_TURN * (sa * np.abs(u1)))
        e2 = np.exp(1j * ((aq * Lq + bq) * Lq + cq)) * w_numpy(EIGHTH_TURN * (sa * np.abs(u2)))
        vertex = cq - 0.25 * bq * bq / aq
        res = np.where(
            u1 >= 0.0,
            c0 * (e1 - e2),
            np.where(u2 <= 0.0, c0 * (e2 - e1), c0 * (2.0 * np.exp(1j * vertex) - e1 - e2)),
        )
        out[quad] = np.where(neg, np.conj(res), res)
    return out


def eval_I_grid_np(t0, L, sa, sb, alpha0, k0, omegas, sign, has_tails, tl, al, sl, tr, ar, sr, eps):
    omegas = np.asarray(omegas, dtype=float)[:, None]
    a = sign * k0 * (sb - sa) / (2.0 * L)
    b = omegas + sign * k0 * sa
    c = omegas * t0 + sign * alpha0
    total = np.zeros(omegas.shape[0], dtype=np.complex128)
    if t0.size:
        pieces = fresnel_local_np(np.broadcast_to(a, b.shape), b, c, np.broadcast_to(L, b.shape))
        # sequential accumulation keeps the summation order of the numba path
        for j in range(t0.size):
            total = total + pieces[:, j]
    if has_tails:
        om = omegas[:, 0]
        fl = om + sign * k0 * sl
        fr = om + sign * k0 * sr
        total = total + np.exp(1j * (om * tl + sign * al)) / (eps + 1j * fl)
        total = total + np.exp(1j * (om * tr + sign * ar)) / (eps - 1j * fr)
    return total


@njit
def family_I_nb(s0, s1, s2, T1, T2, k0, omega, sign, eps):
    """``eval_I_nb`` for the three-knot family with adiabatic tails.

    Reproduces :meth:`PhaseFunction.pieces`: flat ramps that continue a tail
    are folded into it, and a fully inertial member keeps one knot at 0.
    """
    a1 = 0.5 * k0 * T1 * (s0 + s1)
    a2 = a1 + 0.5 * k0 * (T2 - T1) * (s1 + s2)
    keep1 = True
    keep2 = True
    if s0 == s1 and s1 == s2:
        keep1 = False
        keep2 = False
    elif s0 == s1:
        keep1 = False
    elif s1 == s2:
        keep2 = False
    n = int(keep1) + int(keep2)
    t0 = np.empty(n)
    L = np.empty(n)
    sa = np.empty(n)
    sb = np.empty(n)
    al0 = np.empty(n)
    j = 0
    if keep1:
        t0[j] = 0.0
        L[j] = T1
        sa[j] = s0
        sb[j] = s1
        al0[j] = 0.0
        j += 1
    if keep2:
        t0[j] = T1
        L[j] = T2 - T1
        sa[j] = s1
        sb[j] = s2
        al0[j] = a1
    if keep1:
        tl, al = 0.0, 0.0
    elif keep2:
        tl, al = T1, a1
    else:
        tl, al = 0.0, 0.0
    if keep2:
        tr, ar = T2, a2
    elif keep1:
        tr, ar = T1, a1
    else:
        tr, ar = 0.0, 0.0
    return eval_I_nb(t0, L, sa, sb, al0, k0, omega, sign, True, tl, al, s0, tr, ar, s2, eps)


@njit(parallel=True)
def family_grid_nb(s0, s2, T1, k0, omega, sign, eps, s1s, T2s):
    """``I_sign`` on the (s1, T2) grid; NaN where the member is infeasible."""
    n1 = s1s.size
    n2 = T2s.size
    out = np.empty((n1, n2), dtype=np.complex128)
    for k in prange(n1 * n2):
        i = k // n2
        j = k % n2
        s1 = s1s[i]
        T2 = T2s[j]
        if s1 > 0.0 and T2 > T1:
            out[i, j] = family_I_nb(s0, s1, s2, T1, T2, k0, omega, sign, eps)
        else:
            out[i, j] = complex(np.nan, np.nan)
    return out


def family_grid_np(s0, s2, T1, k0, omega, sign, eps, s1s, T2s):
    """Numpy twin of :func:`family_grid_nb`.

    Generic nodes are vectorised; nodes where a ramp is flat (``s1`` equal to
    ``s0`` or ``s2``) change the tail knots and go through the scalar path.
    """
    S1, T2 = np.meshgrid(np.asarray(s1s, dtype=float), np.asarray(T2s, dtype=float), indexing="ij")
    out = np.full(S1.shape, complex(np.nan, np.nan))
    ok = (S1 > 0.0) & (T2 > T1)
    special = ok & ((S1 == s0) | (S1 == s2))
    gen = ok & ~special
    if gen.any():
        s1 = S1[gen]
        t2 = T2[gen]
        a1 = 0.5 * k0 * T1 * (s0 + s1)
        a2 = a1 + 0.5 * k0 * (t2 - T1) * (s1 + s2)
        L2 = t2 - T1
        aa = sign * k0 * (s1 - s0) / (2.0 * T1)
        ab = sign * k0 * (s2 - s1) / (2.0 * L2)
        p1 = fresnel_local_np(aa, np.full_like(s1, omega + sign * k0 * s0), np.zeros_like(s1), np.full_like(s1, T1))
        p2 = fresnel_local_np(ab, omega + sign * k0 * s1, omega * T1 + sign * a1, L2)
        total = p1 + p2
        fl = omega + sign * k0 * s0
        fr = omega + sign * k0 * s2
        total = total + 1.0 / (eps + 1j * fl)
        total = total + np.exp(1j * (omega * t2 + sign * a2)) / (eps - 1j * fr)
        out[gen] = total
    for i, j in zip(*np.nonzero(special)):
        out[i, j] = _family_scalar_np(s0, S1[i, j], s2, T1, T2[i, j], k0, omega, sign, eps)
    return out


def _family_scalar_np(s0, s1, s2, T1, T2, k0, omega, sign, eps):
    t0, L, sa, sb, al0 = [], [], [], [], []
    a1 = 0.5 * k0 * T1 * (s0 + s1)
    a2 = a1 + 0.5 * k0 * (T2 - T1) * (s1 + s2)
    keep1 = not (s0 == s1)
    keep2 = not (s1 == s2)
    if keep1:
        t0.append(0.0), L.append(T1), sa.append(s0), sb.append(s1), al0.append(0.0)
    if keep2:
        t0.append(T1), L.append(T2 - T1), sa.append(s1), sb.append(s2), al0.append(a1)
    tl, al = (0.0, 0.0) if keep1 or not keep2 else (T1, a1)
    tr, ar = (T2, a2) if keep2 else ((T1, a1) if keep1 else (0.0, 0.0))
    arr = [np.array(v, dtype=float) for v in (t0, L, sa, sb, al0)]
    return eval_I_grid_np(*arr, k0, [omega], sign, True, tl, al, s0, tr, ar, s2, eps)[0]
