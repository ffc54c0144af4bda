"""Uniform-acceleration benchmark: detailed balance of the detector response.

With ``alpha(tau) = -(k0/a) exp(-a tau)`` the amplitudes are computed by
adaptive quadrature over a finite window ``[tau_min, tau_max]`` plus two
endpoint pieces:

* left, ``tau < tau_min``: the substitution ``y = (k0/a) exp(-a tau)`` turns
  the piece into ``int_Y^inf y^(-i nu - 1) exp(-/+ i y) dy`` which is summed by
  its integration-by-parts series (``Y`` is large, so a few terms suffice);
* right, ``tau > tau_max``: ``exp(+/- i alpha)`` is expanded in powers of
  ``exp(-a tau)`` and each term of the damped inertial tail is integrated
  exactly.

The thermal check is the ratio ``|I+|^2 / |I-|^2`` against ``exp(-2 pi Omega / a)``.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from ._backend import USE_NUMBA
from ._quadrature import KIND_EXPONENTIAL, NODES, WEIGHTS, adaptive_nb, adaptive_np, phase_noise
from .errors import NoConvergence, NonPositiveAcceleration, NonPositiveEpsilon, ValidationError, WindowTooShort
from .oscillatory import _sign
from .trajectory import uniform_acceleration_phase

DEFAULT_OMEGAS = (0.5, 1.0, 1.5, 2.0, 2.5, 3.0)
LEFT_RATE = 3000.0  # alpha_dot / a at the default left window edge
RIGHT_EXTENT = 30.0  # default tau_max in units of 1/a
EPS_REL = 1e-12
WINDOW_TOL = 0.10
EPS_TOL = 0.10


def unruh_temperature(a):
    """``a / (2 pi)`` in natural units."""
    if not (math.isfinite(a) and a > 0):
        raise NonPositiveAcceleration(f"acceleration must be positive, got {a}", field="a")
    return a / (2.0 * math.pi)


def default_window(a, k0=1.0):
    kappa = k0 / a
    return (-math.log(LEFT_RATE / kappa) / a, RIGHT_EXTENT / a)


@dataclass(frozen=True)
class UnruhSpec:
    a: float = 1.0
    k0: float = 1.0
    omegas: tuple = DEFAULT_OMEGAS
    window: tuple | None = None
    epsilon: float | None = None
    tol: float = 1e-11
    endpoint_corrections: bool = True
    budget: int = 1_000_000

    def __post_init__(self):
        if not (math.isfinite(self.a) and self.a > 0):
            raise NonPositiveAcceleration(f"acceleration must be positive, got {self.a}", field="a")
        if not (math.isfinite(self.k0) and self.k0 > 0):
            raise ValidationError(f"k0 must be positive, got {self.k0}", field="k0")
        window = tuple(map(float, self.window)) if self.window is not None else default_window(self.a, self.k0)
        if len(window) != 2 or not all(map(math.isfinite, window)) or not window[0] < window[1]:
            raise ValidationError(f"window must be a finite ascending pair, got {self.window}", field="window")
        object.__setattr__(self, "window", window)
        eps = self.epsilon if self.epsilon is not None else EPS_REL * self.a
        if not (math.isfinite(eps) and eps > 0):
            raise NonPositiveEpsilon(f"epsilon must be positive, got {eps}", field="epsilon")
        object.__setattr__(self, "epsilon", float(eps))
        omegas = tuple(float(w) for w in self.omegas)
        if not omegas or any(not (math.isfinite(w) and w > 0) for w in omegas):
            raise ValidationError("omegas must be positive and finite", field="omegas")
        if any(b <= a for a, b in zip(omegas, omegas[1:])):
            raise ValidationError("omegas must be strictly ascending", field="omegas")
        object.__setattr__(self, "omegas", omegas)
        if not self.tol > 0:
            raise ValidationError(f"tol must be positive, got {self.tol}", field="tol")

    @property
    def temperature(self):
        return unruh_temperature(self.a)

    def widened(self):
        """Left edge moved out by ``ln 2 / a`` (twice the local rate), right edge doubled."""
        lo, hi = self.window
        return _replace(self, window=(lo - math.log(2.0) / self.a, hi + max(hi, 1.0 / self.a)))

    def to_dict(self):
        return {
            "a": self.a,
            "k0": self.k0,
            "omegas": list(self.omegas),
            "window": list(self.window),
            "epsilon": self.epsilon,
            "tol": self.tol,
            "endpoint_corrections": self.endpoint_corrections,
            "budget": self.budget,
        }

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValidationError(f"unknown unruh field(s): {', '.join(sorted(unknown))}", field=sorted(unknown)[0])
        if "omegas" in d:
            d["omegas"] = tuple(d["omegas"])
        if d.get("window") is not None:
            d["window"] = tuple(d["window"])
        return cls(**d)


def _replace(spec, **kw):
    d = spec.to_dict()
    d.update(kw)
    return UnruhSpec.from_dict(d)


def _left_tail(omega, sign, a, k0, tau_min, max_terms=60):
    # (kappa^{i nu} / a) int_Y^inf y^{s-1} e^{-c y} dy,  s = -i nu,  c = +/- i
    nu = omega / a
    kappa = k0 / a
    Y = kappa * math.exp(-a * tau_min)
    c = 1j * sign
    s = -1j * nu
    # e^{-cY} Y^{s-1} kappa^{i nu} == e^{i phase(tau_min)} / Y
    lead = cmath.exp(1j * (omega * tau_min - sign * Y)) / (Y * c)
    total = 0.0j
    term = 1.0 + 0.0j
    prev = math.inf
    for k in range(max_terms):
        if abs(term) > prev:  # asymptotic series started to diverge
            break
        total += term
        if abs(term) < 1e-17 * abs(total):
            break
        prev = abs(term)
        term = term * (s - 1 - k) / (c * Y)
    return lead * total / a


def _right_tail(omega, sign, a, k0, eps, tau_max, max_terms=60):
    # exp(+/- i alpha) = sum_n (-/+ i kappa)^n e^{-n a tau} / n!
    kappa = k0 / a
    x = -1j * sign * kappa * math.exp(-a * tau_max)
    total = 0.0j
    coef = 1.0 + 0.0j
    for n in range(max_terms):
        term = coef / (n * a + eps - 1j * omega)
        total += term
        if abs(term) < 1e-17 * abs(total):
            break
        coef = coef * x / (n + 1)
    return cmath.exp(1j * omega * tau_max) * total


def _window_quadrature(omega, sign, a, k0, lo, hi, tol, budget):
    # unit-length chunks keep the roundoff floor local to the phase rate
    edges = np.append(np.arange(lo, hi, 1.0 / a), hi)
    if edges.size > 2 and edges[-1] - edges[-2] < 1e-9 / a:
        edges = np.delete(edges, -2)
    p = np.array([k0, a, 0.0])
    tol_density = 0.5 * tol / (hi - lo)
    value = 0.0j
    for t0, t1 in zip(edges[:-1], edges[1:]):
        rate = abs(omega) + k0 * math.exp(-a * t0)
        h0 = min(1.0 / a, 6.0 / rate)
        noise = phase_noise(rate, t0, t1)
        common = (KIND_EXPONENTIAL, p, float(omega), float(sign), 0.0, 0.0, 0.0, float(t0), float(t1), h0,
                  tol_density, noise)
        if USE_NUMBA:
            v, _, _, ok = adaptive_nb(*common, NODES, WEIGHTS, int(budget))
        else:
            v, _, _, ok = adaptive_np(*common, int(budget))
        if not ok:
            raise NoConvergence(f"panel budget {budget} exhausted on [{t0}, {t1}]")
        value += v
    return complex(value)


def accelerated_amplitude(spec, omega, sign):
    """``I_sign(omega)`` along the uniformly accelerated worldline."""
    uniform_acceleration_phase(spec.a, spec.k0)  # validates
    s = _sign(sign)
    lo, hi = spec.window
    val = _window_quadrature(omega, s, spec.a, spec.k0, lo, hi, spec.tol, spec.budget)
    if spec.endpoint_corrections:
        val += _left_tail(omega, s, spec.a, spec.k0, lo)
        val += _right_tail(omega, s, spec.a, spec.k0, spec.epsilon, hi)
    return val


def _measured(spec, omega):
    ip = accelerated_amplitude(spec, omega, +1)
    im = accelerated_amplitude(spec, omega, -1)
    if im == 0:
        raise NoConvergence(f"I- vanished at omega={omega}")
    return abs(ip) ** 2 / abs(im) ** 2, ip, im


def kms_ratio(spec, omega, check=True):
    """Measured ``|I+|^2/|I-|^2`` against ``exp(-2 pi omega / a)``.

    With ``check`` the window is widened (see :meth:`UnruhSpec.widened`) and
    epsilon halved; a relative change above 10% raises.
    """
    if not (math.isfinite(omega) and omega > 0):
        raise ValidationError(f"omega must be positive, got {omega}", field="omega")
    measured, ip, im = _measured(spec, omega)
    expected = math.exp(-omega / spec.temperature)
    out = {
        "omega": float(omega),
        "measured": measured,
        "expected": expected,
        "deviation": abs(measured - expected) / expected,
        "i_plus": ip,
        "i_minus": im,
    }
    if check:
        wide, _, _ = _measured(spec.widened(), omega)
        change = abs(wide - measured) / abs(wide)
        if change > WINDOW_TOL:
            raise WindowTooShort(
                f"window {spec.window} not converged at omega={omega}: widening changes the ratio by {change:.1%}"
            )
        half, _, _ = _measured(_replace(spec, epsilon=0.5 * spec.epsilon), omega)
        eps_change = abs(half - measured) / abs(half)
        if eps_change > EPS_TOL:
            raise NoConvergence(f"halving epsilon changes the ratio by {eps_change:.1%} at omega={omega}")
        out["window_change"] = change
        out["epsilon_change"] = eps_change
    return out


@dataclass
class ThermalReport:
    spec: UnruhSpec
    rows: list
    slope: float
    expected_slope: float
    monotone: bool
    summary: dict = field(default_factory=dict)

    @property
    def max_deviation(self):
        return max(r["deviation"] for r in self.rows)

    @property
    def slope_deviation(self):
        return abs(self.slope - self.expected_slope) / abs(self.expected_slope)

    def to_dict(self):
        return {
            "spec": self.spec.to_dict(),
            "temperature": self.spec.temperature,
            "max_rel_dev": self.max_deviation,
            "fitted_slope": self.slope,
            "expected_slope": self.expected_slope,
            "slope_rel_dev": self.slope_deviation,
            "monotone": self.monotone,
        }

    def csv_rows(self):
        return [(r["omega"], r["measured"], r["expected"], r["deviation"]) for r in self.rows]


def thermal_spectrum_check(spec, check=True):
    """:func:`kms_ratio` over ``spec.omegas`` and a least-squares fit of the log-ratio slope."""
    rows = [kms_ratio(spec, w, check) for w in spec.omegas]
    om = np.array([r["omega"] for r in rows])
    meas = np.array([r["measured"] for r in rows])
    if len(rows) >= 2 and np.all(meas > 0):
        slope = float(np.polyfit(om, np.log(meas), 1)[0])
    else:
        slope = math.nan
    monotone = bool(np.all(np.diff(meas) < 0))
    return ThermalReport(spec, rows, slope, -2.0 * math.pi / spec.a, monotone)
