"""Transition probabilities for a two-level detector coupled to one field mode.

All results are first order in the coupling. The mode-density prefactor is
``G**2 / ((2 pi)**p * omega_k)`` with ``p`` set by the context's convention;
``"Bare"`` drops the mode density and leaves plain ``G**2``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import DegenerateAmplitudes, SuperluminalVelocity, ValidationError
from .oscillatory import AmplitudePair

TWO_PI_SQUARED = "TwoPiSquared"
TWO_PI_CUBED = "TwoPiCubed"
BARE = "Bare"
CONVENTIONS = {TWO_PI_SQUARED: 2, TWO_PI_CUBED: 3, BARE: None}


@dataclass(frozen=True)
class Fock:
    n: int

    def __post_init__(self):
        if isinstance(self.n, bool) or int(self.n) != self.n or self.n < 0:
            raise ValidationError(f"photon count must be an integer >= 0, got {self.n!r}", field="n")
        object.__setattr__(self, "n", int(self.n))

    @property
    def mean_photons(self):
        return float(self.n)

    def to_dict(self):
        return {"type": "fock", "value": self.n}


@dataclass(frozen=True)
class Coherent:
    alpha: complex

    def __post_init__(self):
        a = complex(self.alpha)
        if not (math.isfinite(a.real) and math.isfinite(a.imag)):
            raise ValidationError(f"coherent amplitude must be finite, got {self.alpha!r}", field="alpha")
        object.__setattr__(self, "alpha", a)

    @property
    def mean_photons(self):
        return abs(self.alpha) ** 2

    def to_dict(self):
        return {"type": "coherent", "value": [self.alpha.real, self.alpha.imag]}


@dataclass(frozen=True)
class MeanPhoton:
    nbar: float

    def __post_init__(self):
        if not (math.isfinite(self.nbar) and self.nbar >= 0):
            raise ValidationError(f"mean photon number must be >= 0, got {self.nbar!r}", field="nbar")
        object.__setattr__(self, "nbar", float(self.nbar))

    @property
    def mean_photons(self):
        return self.nbar

    def to_dict(self):
        return {"type": "mean_photon", "value": self.nbar}


FieldState = Union[Fock, Coherent, MeanPhoton]


def field_state_from_dict(d):
    """``{"type": "fock"|"coherent"|"mean_photon", "value": ...}``.

    Coherent values may be a number or a ``[re, im]`` pair.
    """
    if not isinstance(d, dict) or "type" not in d or "value" not in d:
        raise ValidationError("state needs 'type' and 'value'", field="state")
    kind = str(d["type"]).lower()
    value = d["value"]
    if kind == "fock":
        return Fock(value)
    if kind == "coherent":
        if isinstance(value, (list, tuple)):
            if len(value) != 2:
                raise ValidationError("coherent value must be [re, im]", field="alpha")
            value = complex(value[0], value[1])
        return Coherent(value)
    if kind in ("mean_photon", "meanphoton", "thermal"):
        return MeanPhoton(value)
    raise ValidationError(f"unknown state type {d['type']!r}", field="state.type")


@dataclass(frozen=True)
class ProbabilityContext:
    G: float = 1.0
    omega_k: float = 1.0
    convention: str = TWO_PI_CUBED

    def __post_init__(self):
        for name in ("G", "omega_k"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValidationError(f"{name} must be positive, got {v}", field=name)
        if self.convention not in CONVENTIONS:
            raise ValidationError(
                f"convention must be one of {sorted(CONVENTIONS)}, got {self.convention!r}", field="convention"
            )

    @property
    def prefactor(self):
        p = CONVENTIONS[self.convention]
        if p is None:
            return self.G**2
        return self.G**2 / ((2.0 * math.pi) ** p * self.omega_k)

    def with_convention(self, convention):
        return ProbabilityContext(self.G, self.omega_k, convention)

    def to_dict(self):
        return {"G": self.G, "omega_k": self.omega_k, "convention": self.convention}

    @classmethod
    def from_dict(cls, d):
        d = dict(d or {})
        unknown = set(d) - {"G", "omega_k", "convention"}
        if unknown:
            raise ValidationError(f"unknown ctx field(s): {', '.join(sorted(unknown))}", field=sorted(unknown)[0])
        return cls(**d)


def _photon_count(n):
    return Fock(n).n


def fock_probabilities(pair, n, ctx=None):
    """Ground-state detector, ``n`` photons in the mode.

    ``stimulated_unruh`` is ``(n+1) |I+|^2`` and ``absorption`` is ``n |I-|^2``,
    both times the context prefactor.
    """
    ctx = ctx or ProbabilityContext()
    n = _photon_count(n)
    pre = ctx.prefactor
    return {
        "stimulated_unruh": pre * (n + 1) * abs(pair.i_plus) ** 2,
        "absorption": pre * n * abs(pair.i_minus) ** 2,
    }


def time_reversed_pair(pair):
    """``(I+, I-) -> (conj I-, conj I+)``."""
    return pair.time_reversed()


def emission_probabilities(pair, n, ctx=None):
    """Excited detector, ``n`` photons in the mode, via the time-reversed pair.

    ``stimulated_emission`` is ``(n+1) |I-|^2``; ``counter_rotating_absorption``
    (de-excitation while removing a photon) is ``n |I+|^2``.
    """
    p = fock_probabilities(time_reversed_pair(pair), n, ctx)
    return {"stimulated_emission": p["stimulated_unruh"], "counter_rotating_absorption": p["absorption"]}


def coherent_excitation_probability(pair, alpha, ctx=None):
    """Excitation probability from a coherent mode state, final field state summed over."""
    ctx = ctx or ProbabilityContext()
    alpha = Coherent(alpha).alpha
    return ctx.prefactor * (abs(alpha) ** 2 * abs(pair.i_plus + pair.i_minus) ** 2 + abs(pair.i_plus) ** 2)


def general_state_probability(pair, nbar, ctx=None):
    """Excitation probability for a state with mean photon number ``nbar``."""
    ctx = ctx or ProbabilityContext()
    nbar = MeanPhoton(nbar).nbar
    return ctx.prefactor * (nbar * abs(pair.i_plus + pair.i_minus) ** 2 + abs(pair.i_plus) ** 2)


def catalysis_fraction(pair, alpha):
    """Share of the coherent excitation probability that leaves the field state unchanged."""
    alpha = Coherent(alpha).alpha
    den = abs(alpha) ** 2 * abs(pair.i_plus + pair.i_minus) ** 2 + abs(pair.i_plus) ** 2
    if den == 0:
        raise DegenerateAmplitudes("catalysis fraction undefined: I+ = 0 and |alpha| (I+ + I-) = 0")
    num = abs(alpha.conjugate() * pair.i_plus + alpha * pair.i_minus) ** 2
    # Cauchy-Schwarz bounds num <= den; clip the last-ulp excess
    return min(num / den, 1.0)


def state_probabilities(pair, state, ctx=None):
    """Every channel that applies to ``state``, as a flat dict."""
    ctx = ctx or ProbabilityContext()
    out = {"state": state.to_dict(), "ctx": ctx.to_dict(), "prefactor": ctx.prefactor}
    if isinstance(state, Fock):
        out.update(fock_probabilities(pair, state.n, ctx))
        out.update(emission_probabilities(pair, state.n, ctx))
        out["spontaneous_unruh"] = fock_probabilities(pair, 0, ctx)["stimulated_unruh"]
        out["spontaneous_emission"] = emission_probabilities(pair, 0, ctx)["stimulated_emission"]
    elif isinstance(state, Coherent):
        out["excitation"] = coherent_excitation_probability(pair, state.alpha, ctx)
        out["spontaneous"] = coherent_excitation_probability(pair, 0, ctx)
        try:
            out["catalysis_fraction"] = catalysis_fraction(pair, state.alpha)
        except DegenerateAmplitudes:
            out["catalysis_fraction"] = None
    else:
        out["excitation"] = general_state_probability(pair, state.nbar, ctx)
        out["spontaneous"] = general_state_probability(pair, 0.0, ctx)
    return out


def inertial_resonance(omega, k, v, n=0):
    """Resonance condition and Einstein weights for an inertial detector.

    The inertial amplitudes are delta distributions in the mode frequency, so
    only the resonant frequency ``omega / (gamma (1 - khat.v))`` and the weights
    ``n+1`` (emission) and ``n`` (absorption), in units of the spontaneous
    rate, are returned. No finite probability density exists.
    """
    if not (math.isfinite(omega) and omega > 0):
        raise ValidationError(f"gap must be positive, got {omega}", field="omega")
    n = _photon_count(n)
    k = np.atleast_1d(np.asarray(k, dtype=float))
    v = np.atleast_1d(np.asarray(v, dtype=float))
    if k.shape != v.shape or k.ndim != 1:
        raise ValidationError(f"k and v must be vectors of equal length, got {k.shape} and {v.shape}", field="v")
    if not (np.all(np.isfinite(k)) and np.all(np.isfinite(v))):
        raise ValidationError("k and v must be finite", field="v")
    knorm = float(np.linalg.norm(k))
    if knorm == 0:
        raise ValidationError("wave vector must be non-zero", field="k")
    speed = float(np.linalg.norm(v))
    if speed >= 1.0:
        raise SuperluminalVelocity(f"|v| must be < 1, got {speed}", field="v")
    gamma = 1.0 / math.sqrt(1.0 - speed * speed)
    doppler = gamma * (1.0 - float(k @ v) / knorm)
    return {
        "resonant_frequency": omega / doppler,
        "doppler_factor": doppler,
        "emission_weight": float(n + 1),
        "absorption_weight": float(n),
        "distributional": True,
    }
