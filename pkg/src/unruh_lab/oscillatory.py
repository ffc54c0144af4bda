r"""Transition integrals :math:`I_\pm(\Omega) = \int d\tau\, e^{i\Omega\tau \pm i\alpha(\tau)}`.

``eval_I`` is exact for piecewise-quadratic phases: every accelerated piece is
a Fresnel-type integral done with the Faddeeva function, and the inertial
tails are either damped adiabatically (closed form) or cut by a hard window.
``oracle_quadrature`` computes the same regularised integral by brute force.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from ._backend import USE_NUMBA
from ._kernels import eval_I_grid_nb, eval_I_grid_np, eval_I_nb, fresnel_local, fresnel_local_np
from ._quadrature import KIND_QUADRATIC, NODES, WEIGHTS, adaptive_nb, adaptive_np, phase_noise
from .errors import NoConvergence, NonPositiveEpsilon, ValidationError

ADIABATIC = "adiabatic"
WINDOW = "window"
DEFAULT_EPS_REL = 1e-3
SPECTRUM_HEADER = ["omega", "abs_I_plus", "abs_I_minus", "re_I_minus", "im_I_minus"]


@dataclass(frozen=True)
class Regularization:
    """Convergence prescription for the eternal inertial tails.

    ``adiabatic``: multiply the integrand by ``exp(-epsilon * distance)`` beyond
    the outermost knots. ``window``: integrate over ``window`` only.
    """

    mode: str = ADIABATIC
    epsilon: float | None = None
    window: tuple | None = None

    def __post_init__(self):
        if self.mode == ADIABATIC:
            if self.epsilon is None or not self.epsilon > 0 or not math.isfinite(self.epsilon):
                raise NonPositiveEpsilon(f"epsilon must be positive, got {self.epsilon}", field="epsilon")
        elif self.mode == WINDOW:
            if self.window is None or len(self.window) != 2:
                raise ValidationError("window regularisation needs (tau_min, tau_max)", field="window")
            lo, hi = map(float, self.window)
            if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
                raise ValidationError(f"need tau_min < tau_max, got {self.window}", field="window")
            object.__setattr__(self, "window", (lo, hi))
        else:
            raise ValidationError(f"unknown regularisation mode {self.mode!r}", field="mode")

    @classmethod
    def adiabatic(cls, epsilon):
        return cls(ADIABATIC, epsilon=float(epsilon))

    @classmethod
    def hard_window(cls, tau_min, tau_max):
        return cls(WINDOW, window=(tau_min, tau_max))

    def to_dict(self):
        if self.mode == ADIABATIC:
            return {"mode": ADIABATIC, "epsilon": self.epsilon}
        return {"mode": WINDOW, "window": list(self.window)}

    @classmethod
    def from_dict(cls, d):
        mode = d.get("mode", ADIABATIC)
        if mode == ADIABATIC:
            return cls.adiabatic(d["epsilon"])
        return cls.hard_window(*d["window"])


def default_regularization(pf):
    return Regularization.adiabatic(DEFAULT_EPS_REL * pf.k0)


@dataclass(frozen=True)
class AmplitudePair:
    i_plus: complex
    i_minus: complex
    omega: float = float("nan")
    regularization: Regularization | None = None

    @property
    def ratio(self):
        """``|I- / I+|``; infinite when ``I+`` vanishes."""
        if self.i_plus == 0:
            return math.inf
        return abs(self.i_minus) / abs(self.i_plus)

    def time_reversed(self):
        return AmplitudePair(self.i_minus.conjugate(), self.i_plus.conjugate(), self.omega, self.regularization)

    def to_dict(self):
        return {
            "i_plus": [self.i_plus.real, self.i_plus.imag],
            "i_minus": [self.i_minus.real, self.i_minus.imag],
            "omega": self.omega if math.isfinite(self.omega) else None,
        }

    @classmethod
    def from_dict(cls, d):
        ip = d["i_plus"]
        im = d["i_minus"]
        return cls(complex(*ip) if isinstance(ip, (list, tuple)) else complex(ip),
                   complex(*im) if isinstance(im, (list, tuple)) else complex(im),
                   float(d.get("omega") if d.get("omega") is not None else float("nan")))


def _sign(sign):
    if sign in (1, "plus", "+"):
        return 1.0
    if sign in (-1, "minus", "-"):
        return -1.0
    raise ValidationError(f"sign must be +1/-1 or 'plus'/'minus', got {sign!r}", field="sign")


def segment_fresnel(a, b, c, tau1, tau2):
    """``int_{tau1}^{tau2} exp(i (a tau^2 + b tau + c)) d tau``, closed form."""
    if not tau1 <= tau2:
        raise ValidationError(f"need tau1 <= tau2, got {tau1}, {tau2}")
    c_local = (a * tau1 + b) * tau1 + c
    b_local = 2.0 * a * tau1 + b
    L = tau2 - tau1
    if USE_NUMBA:
        return complex(fresnel_local(float(a), float(b_local), float(c_local), float(L)))
    return complex(fresnel_local_np(a, b_local, c_local, L)[()])


def tail_contribution(f, eps, phase=1.0, side="right"):
    """Damped inertial tail ``int exp(i f v - eps |v|)`` on one side of a knot.

    ``phase`` is ``exp(i * total phase)`` at the knot. Left tails give
    ``phase / (eps + i f)``, right tails ``phase / (eps - i f)``.
    """
    if not eps > 0:
        raise NonPositiveEpsilon(f"epsilon must be positive, got {eps}", field="epsilon")
    if side == "left":
        return phase / (eps + 1j * f)
    if side == "right":
        return phase / (eps - 1j * f)
    raise ValidationError(f"side must be 'left' or 'right', got {side!r}", field="side")


# -- piece tables -----------------------------------------------------------------


@dataclass(frozen=True)
class _Table:
    t0: np.ndarray
    L: np.ndarray
    sa: np.ndarray
    sb: np.ndarray
    alpha0: np.ndarray
    has_tails: bool
    tail: tuple = (0.0, 0.0, 1.0, 0.0, 0.0, 1.0)  # tl, al, sl, tr, ar, sr
    eps: float = 1.0


def _window_pieces(pf, lo, hi):
    cuts = [lo] + [float(k) for k in pf.knots if lo < k < hi] + [hi]
    t0 = np.array(cuts[:-1])
    t1 = np.array(cuts[1:])
    sa = pf.slope(t0)
    mid = pf.slope(0.5 * (t0 + t1))
    sb = 2.0 * mid - sa
    return t0, t1 - t0, sa, sb, pf.alpha(t0)


def piece_table(pf, reg):
    if reg.mode == WINDOW:
        t0, L, sa, sb, alpha0 = _window_pieces(pf, *reg.window)
        return _Table(t0, L, sa, sb, alpha0, False)
    t0, t1, sa, sb, alpha0, _ = pf.pieces()
    tl, al, tr, ar = pf.tail_knots()
    return _Table(t0, t1 - t0, sa, sb, alpha0, True, (tl, al, pf.left_slope, tr, ar, pf.right_slope), reg.epsilon)


def _eval_many(pf, omegas, sign, reg):
    tab = piece_table(pf, reg)
    args = (tab.t0, tab.L, tab.sa, tab.sb, tab.alpha0, float(pf.k0))
    rest = (sign, tab.has_tails, *map(float, tab.tail), float(tab.eps))
    omegas = np.ascontiguousarray(omegas, dtype=float)
    if USE_NUMBA:
        return eval_I_grid_nb(*args, omegas, *rest)
    return eval_I_grid_np(*args, omegas, *rest)


def eval_I(pf, omega, sign, reg=None):
    """Closed-form ``I_sign(omega)`` for a piecewise phase function."""
    reg = reg or default_regularization(pf)
    s = _sign(sign)
    if not math.isfinite(omega):
        raise ValidationError(f"omega must be finite, got {omega}", field="omega")
    if USE_NUMBA:
        tab = piece_table(pf, reg)
        return complex(
            eval_I_nb(tab.t0, tab.L, tab.sa, tab.sb, tab.alpha0, float(pf.k0), float(omega), s,
                      tab.has_tails, *map(float, tab.tail), float(tab.eps))
        )
    return complex(_eval_many(pf, [omega], s, reg)[0])


def eval_pair(pf, omega, reg=None):
    reg = reg or default_regularization(pf)
    return AmplitudePair(eval_I(pf, omega, +1, reg), eval_I(pf, omega, -1, reg), float(omega), reg)


# -- brute-force oracle ----------------------------------------------------------------


def _initial_width(rate):
    return min(10.0, 6.0 / max(abs(rate), 1e-12))


def oracle_quadrature(pf, omega, sign, reg=None, tol=1e-12, budget=1_000_000, full_output=False):
    """Adaptive quadrature of the same regularised integral as :func:`eval_I`.

    Damped tails are truncated where ``exp(-eps D) / eps < tol / 10``.
    ``budget`` caps the number of panel evaluations per piece.
    """
    if not tol > 0:
        raise ValidationError(f"tol must be positive, got {tol}", field="tol")
    reg = reg or default_regularization(pf)
    s = _sign(sign)
    k0 = float(pf.k0)
    tab = piece_table(pf, reg)
    # (params, t_start, t_end, d0, ddir, rate)
    jobs = []
    for j in range(tab.t0.size):
        p = np.array([tab.alpha0[j], k0, tab.sa[j], tab.sb[j], tab.L[j], tab.t0[j]])
        rate = max(abs(omega + s * k0 * tab.sa[j]), abs(omega + s * k0 * tab.sb[j]))
        jobs.append((p, tab.t0[j], tab.t0[j] + tab.L[j], 0.0, 0.0, rate))
    if tab.has_tails:
        eps = tab.eps
        tl, al, sl, tr, ar, sr = tab.tail
        D = math.log(10.0 / (tol * eps)) / eps if tol * eps < 10.0 else 0.0
        if D > 0:
            jobs.append((np.array([al, k0, sl, sl, 1.0, tl]), tl - D, tl, tl, -1.0, omega + s * k0 * sl))
            jobs.append((np.array([ar, k0, sr, sr, 1.0, tr]), tr, tr + D, tr, 1.0, omega + s * k0 * sr))
    else:
        eps = 0.0
    total_len = sum(j[2] - j[1] for j in jobs) or 1.0
    tol_density = 0.5 * tol / total_len
    value = 0.0 + 0.0j
    err = 0.0
    panels = 0
    for p, a, b, d0, ddir, rate in jobs:
        h0 = _initial_width(rate)
        noise = phase_noise(rate, a, b)
        common = (KIND_QUADRATIC, p, float(omega), s, float(eps), float(d0), float(ddir), float(a), float(b),
                  h0, tol_density, noise)
        if USE_NUMBA:
            v, e, used, ok = adaptive_nb(*common, NODES, WEIGHTS, int(budget))
        else:
            v, e, used, ok = adaptive_np(*common, int(budget))
        if not ok:
            raise NoConvergence(f"panel budget {budget} exhausted on [{a}, {b}]")
        value += v
        err += e
        panels += used
    if full_output:
        return complex(value), {"error_estimate": err, "panels": panels}
    return complex(value)


# -- spectra -------------------------------------------------------------------------------


@dataclass
class Spectrum:
    omega: np.ndarray
    i_plus: np.ndarray
    i_minus: np.ndarray
    regularization: Regularization
    phase_function: object = None
    metadata: dict = field(default_factory=dict)

    @property
    def abs_plus(self):
        return np.abs(self.i_plus)

    @property
    def abs_minus(self):
        return np.abs(self.i_minus)

    def rows(self):
        for om, ip, im in zip(self.omega, self.i_plus, self.i_minus):
            yield float(om), abs(ip), abs(im), im.real, im.imag

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(SPECTRUM_HEADER)
            for row in self.rows():
                w.writerow([repr(float(v)) for v in row])

    def metadata_dict(self):
        meta = {
            "tool": "unruh_lab",
            "version": __version__,
            "regularization": self.regularization.to_dict(),
            "grid": {
                "n": int(self.omega.size),
                "min": float(self.omega[0]),
                "max": float(self.omega[-1]),
            },
        }
        if self.phase_function is not None:
            meta["phase_function"] = self.phase_function.to_dict()
        meta.update(self.metadata)
        return meta

    def write(self, csv_path, meta_path=None):
        self.to_csv(csv_path)
        meta_path = meta_path or str(csv_path) + ".json"
        with open(meta_path, "w") as fh:
            json.dump(self.metadata_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")
        return meta_path

    def peaks(self, which="minus"):
        """Indices of strict local maxima of ``|I_which|`` on the grid."""
        y = self.abs_minus if which == "minus" else self.abs_plus
        inner = np.nonzero((y[1:-1] > y[:-2]) & (y[1:-1] > y[2:]))[0] + 1
        return inner


def spectrum_scan(pf, omegas, reg=None):
    omegas = np.asarray(omegas, dtype=float)
    if omegas.ndim != 1 or omegas.size == 0:
        raise ValidationError("omega grid must be a non-empty 1-D sequence", field="omega_grid")
    if np.any(np.diff(omegas) <= 0):
        raise ValidationError("omega grid must be strictly ascending", field="omega_grid")
    reg = reg or default_regularization(pf)
    ip = _eval_many(pf, omegas, 1.0, reg)
    im = _eval_many(pf, omegas, -1.0, reg)
    return Spectrum(omegas, ip, im, reg, pf)
