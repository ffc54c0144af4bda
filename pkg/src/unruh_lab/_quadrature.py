"""Adaptive panel-subdivision Gauss-Legendre quadrature of oscillatory phases.

Independent of the closed-form kernels: the integrand is sampled directly and
panels are bisected until ``|Q(left) + Q(right) - Q(panel)|`` falls below
the local share of the tolerance. Two phase families are supported:

``KIND_QUADRATIC``  params ``(alpha0, k0, s_a, s_b, L, t0)``:
    ``alpha = alpha0 + k0 (s_a v + (s_b - s_a) v^2 / (2 L))``, ``v = tau - t0``
``KIND_EXPONENTIAL`` params ``(k0, a, offset)``:
    ``alpha = offset - (k0 / a) exp(-a tau)``

Optional damping ``exp(-eps * max(0, (tau - d0) * ddir))``.
"""
import math

import numpy as np

from ._backend import njit

KIND_QUADRATIC = 0
KIND_EXPONENTIAL = 1
GL_ORDER = 16
NODES, WEIGHTS = np.polynomial.legendre.leggauss(GL_ORDER)
ROUNDOFF = 50.0 * np.finfo(float).eps
STACK = 256


def phase_noise(rate, t_start, t_end):
    """Roundoff multiplier for a piece sampled at ``|tau| <= max(|t_start|, |t_end|)``."""
    return 1.0 + abs(rate) * max(abs(t_start), abs(t_end))


@njit
def _phase(kind, p, omega, sign, tau):
    if kind == KIND_QUADRATIC:
        v = tau - p[5]
        alpha_rel = p[1] * (p[2] * v + (p[3] - p[2]) * v * v / (2.0 * p[4]))
        return omega * p[5] + sign * p[0] + omega * v + sign * alpha_rel
    return omega * tau + sign * (p[2] - (p[0] / p[1]) * math.exp(-p[1] * tau))


@njit
def _panel(kind, p, omega, sign, eps, d0, ddir, x0, x1, nodes, weights):
    half = 0.5 * (x1 - x0)
    mid = 0.5 * (x1 + x0)
    re = 0.0
    im = 0.0
    absint = 0.0
    for k in range(nodes.size):
        tau = mid + half * nodes[k]
        ph = _phase(kind, p, omega, sign, tau)
        amp = weights[k]
        if ddir != 0.0:
            dist = (tau - d0) * ddir
            if dist > 0.0:
                amp *= math.exp(-eps * dist)
        re += amp * math.cos(ph)
        im += amp * math.sin(ph)
        absint += amp
    return complex(re * half, im * half), absint * half


@njit
def adaptive_nb(kind, p, omega, sign, eps, d0, ddir, t_start, t_end, h0, tol_density, noise, nodes, weights, budget):
    """Returns ``(value, error_estimate, panels_used, converged)``.

    ``noise`` scales the roundoff floor: rounding of ``tau`` makes the phase
    jitter by about ``eps * |tau| * rate``, which no refinement can remove.
    """
    floor = ROUNDOFF * noise
    length = t_end - t_start
    n_init = max(1, int(math.ceil(length / h0)))
    step = length / n_init
    sa = np.empty(STACK)
    sb = np.empty(STACK)
    sq = np.empty(STACK, dtype=np.complex128)
    total = 0.0 + 0.0j
    err = 0.0
    used = 0
    for i in range(n_init):
        x0 = t_start + i * step
        x1 = t_end if i == n_init - 1 else t_start + (i + 1) * step
        q, _ = _panel(kind, p, omega, sign, eps, d0, ddir, x0, x1, nodes, weights)
        used += 1
        sa[0] = x0
        sb[0] = x1
        sq[0] = q
        top = 1
        while top > 0:
            top -= 1
            a = sa[top]
            b = sb[top]
            q = sq[top]
            m = 0.5 * (a + b)
            ql, al = _panel(kind, p, omega, sign, eps, d0, ddir, a, m, nodes, weights)
            qr, ar = _panel(kind, p, omega, sign, eps, d0, ddir, m, b, nodes, weights)
            used += 2
            if used > budget:
                return total, err, used, False
            diff = abs(ql + qr - q)
            h = b - a
            tiny = h <= 1e-13 * max(1.0, abs(a))
            if diff <= tol_density * h or diff <= floor * (al + ar) or tiny or top >= STACK - 2:
                total += ql + qr
                err += diff
            else:
                # right child below left so the left half is finished first
                sa[top] = m
                sb[top] = b
                sq[top] = qr
                sa[top + 1] = a
                sb[top + 1] = m
                sq[top + 1] = ql
                top += 2
    return total, err, used, True


def _phase_np(kind, p, omega, sign, tau):
    if kind == KIND_QUADRATIC:
        v = tau - p[5]
        alpha_rel = p[1] * (p[2] * v + (p[3] - p[2]) * v * v / (2.0 * p[4]))
        return omega * p[5] + sign * p[0] + omega * v + sign * alpha_rel
    return omega * tau + sign * (p[2] - (p[0] / p[1]) * np.exp(-p[1] * tau))


def _panels_np(kind, p, omega, sign, eps, d0, ddir, x0, x1):
    half = 0.5 * (x1 - x0)[:, None]
    mid = 0.5 * (x1 + x0)[:, None]
    tau = mid + half * NODES[None, :]
    ph = _phase_np(kind, p, omega, sign, tau)
    amp = np.broadcast_to(WEIGHTS, tau.shape)
    if ddir != 0.0:
        dist = (tau - d0) * ddir
        amp = amp * np.where(dist > 0.0, np.exp(-eps * np.maximum(dist, 0.0)), 1.0)
    q = (amp * np.cos(ph)).sum(axis=1) + 1j * (amp * np.sin(ph)).sum(axis=1)
    return q * half[:, 0], amp.sum(axis=1) * half[:, 0]


def adaptive_np(kind, p, omega, sign, eps, d0, ddir, t_start, t_end, h0, tol_density, noise, budget):
    """Breadth-first numpy twin of :func:`adaptive_nb`."""
    p = np.asarray(p, dtype=float)
    length = t_end - t_start
    n_init = max(1, int(math.ceil(length / h0)))
    edges = t_start + np.arange(n_init + 1) * (length / n_init)
    edges[-1] = t_end
    x0, x1 = edges[:-1], edges[1:]
    q, _ = _panels_np(kind, p, omega, sign, eps, d0, ddir, x0, x1)
    used = n_init
    total = 0.0 + 0.0j
    err = 0.0
    depth = 0
    while x0.size:
        m = 0.5 * (x0 + x1)
        ql, al = _panels_np(kind, p, omega, sign, eps, d0, ddir, x0, m)
        qr, ar = _panels_np(kind, p, omega, sign, eps, d0, ddir, m, x1)
        used += 2 * x0.size
        if used > budget:
            return total, err, used, False
        diff = np.abs(ql + qr - q)
        h = x1 - x0
        tiny = h <= 1e-13 * np.maximum(1.0, np.abs(x0))
        ok = (diff <= tol_density * h) | (diff <= ROUNDOFF * noise * (al + ar)) | tiny | (depth >= STACK // 2)
        total += np.sum((ql + qr)[ok])
        err += float(np.sum(diff[ok]))
        bad = ~ok
        x0 = np.concatenate([x0[bad], m[bad]])
        x1 = np.concatenate([m[bad], x1[bad]])
        q = np.concatenate([ql[bad], qr[bad]])
        depth += 1
    return total, err, used, True
