"""Phase functions and the timelike worldlines they generate.

The phase seen by the detector is ``alpha(tau) = k.x(tau)`` for a null mode
``k = (k0, k0, 0, 0)``. A piecewise-linear ``alpha_dot`` (in units of k0)
makes ``alpha`` piecewise quadratic, which is what the integral engine in
:mod:`unruh_lab.oscillatory` exploits. Any ``alpha_dot > 0`` maps back to a
unique worldline moving along x with four-velocity

    u = (1/2 (1/s + s), 1/2 (1/s - s), 0, 0),    s = alpha_dot / k0,

and metric signature (+, -, -, -).
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Iterator, NamedTuple

import numpy as np

from .errors import BadKnots, NonPositiveParameter, NonPositiveSlope, ValidationError


class Segment(NamedTuple):
    """``alpha_dot = k0 * lerp(s_start, s_end)`` on ``[t_start, t_end]``."""

    t_start: float
    t_end: float
    s_start: float
    s_end: float


@dataclass(frozen=True)
class PhaseFunction:
    """Piecewise-linear ``alpha_dot`` with inertial tails on both sides.

    ``segments`` must be contiguous and strictly increasing in proper time.
    Outside them ``alpha_dot`` is ``k0 * left_slope`` (before the first knot)
    or ``k0 * right_slope`` (after the last). ``alpha(0) = alpha_at_origin``.
    """

    k0: float
    segments: tuple = ()
    left_slope: float = 1.0
    right_slope: float = 1.0
    alpha_at_origin: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(Segment(*map(float, s)) for s in self.segments))
        vals = [self.k0, self.left_slope, self.right_slope, self.alpha_at_origin]
        for seg in self.segments:
            vals.extend(seg)
        if not all(math.isfinite(v) for v in vals):
            raise ValidationError("phase function parameters must be finite")
        if self.k0 <= 0:
            raise NonPositiveParameter(f"k0 must be positive, got {self.k0}", field="k0")
        slopes = [self.left_slope, self.right_slope]
        for seg in self.segments:
            slopes.extend((seg.s_start, seg.s_end))
        if min(slopes) <= 0:
            raise NonPositiveSlope(f"alpha_dot must stay positive, got slope {min(slopes)}", field="s")
        for i, seg in enumerate(self.segments):
            if not seg.t_start < seg.t_end:
                raise BadKnots(f"segment {i} is empty or reversed: {seg.t_start} >= {seg.t_end}", field="T")
            if i and seg.t_start != self.segments[i - 1].t_end:
                raise BadKnots(f"segment {i} does not start where segment {i - 1} ends", field="T")

    @classmethod
    def inertial(cls, k0, s=1.0, alpha_at_origin=0.0):
        """Constant ``alpha_dot = k0 * s``; ``s = 1`` is a detector at rest."""
        return cls(k0=k0, segments=(), left_slope=s, right_slope=s, alpha_at_origin=alpha_at_origin)

    @property
    def knots(self):
        if not self.segments:
            return np.array([0.0])
        return np.array([self.segments[0].t_start] + [s.t_end for s in self.segments])

    @property
    def is_inertial(self):
        return self.left_slope == self.right_slope and all(
            s.s_start == s.s_end == self.left_slope for s in self.segments
        )

    def with_alpha_offset(self, alpha_at_origin):
        return PhaseFunction(self.k0, self.segments, self.left_slope, self.right_slope, alpha_at_origin)

    # -- canonical piece table used by the integral kernels -------------------

    def pieces(self):
        """Arrays ``(t0, t1, s_a, s_b, alpha0)`` of the accelerated region.

        Flat segments that merely continue a tail at the tail's slope are
        absorbed into that tail, so the adiabatic damping always starts where
        the motion stops being inertial. A fully inertial phase function
        collapses to a single knot at ``tau = 0``.
        """
        segs = list(self.segments)
        while segs and segs[0].s_start == segs[0].s_end == self.left_slope:
            segs.pop(0)
        while segs and segs[-1].s_start == segs[-1].s_end == self.right_slope:
            segs.pop()
        if segs:
            knot = segs[0].t_start
        elif self.left_slope != self.right_slope:
            # flat segments only, but alpha_dot jumps: keep the first knot
            knot = self.segments[0].t_start
        else:
            knot = 0.0
        t0 = np.array([s.t_start for s in segs], dtype=float)
        t1 = np.array([s.t_end for s in segs], dtype=float)
        sa = np.array([s.s_start for s in segs], dtype=float)
        sb = np.array([s.s_end for s in segs], dtype=float)
        alpha0 = self.alpha(t0) if segs else np.zeros(0)
        return t0, t1, sa, sb, alpha0, knot

    def tail_knots(self):
        """``(tau_left, alpha_left, tau_right, alpha_right)`` of the canonical tails."""
        t0, t1, _, _, _, knot = self.pieces()
        tl = t0[0] if t0.size else knot
        tr = t1[-1] if t1.size else knot
        return tl, float(self.alpha(tl)), tr, float(self.alpha(tr))

    # -- evaluation ------------------------------------------------------------

    def slope(self, tau):
        """``alpha_dot / k0`` at ``tau`` (vectorised)."""
        tau = np.asarray(tau, dtype=float)
        out = np.where(tau < self.knots[0], self.left_slope, self.right_slope).astype(float)
        for seg in self.segments:
            inside = (tau >= seg.t_start) & (tau < seg.t_end)
            frac = (tau - seg.t_start) / (seg.t_end - seg.t_start)
            out = np.where(inside, seg.s_start + (seg.s_end - seg.s_start) * frac, out)
        return out

    def alpha_dot(self, tau):
        return self.k0 * self.slope(tau)

    def alpha_ddot(self, tau):
        tau = np.asarray(tau, dtype=float)
        out = np.zeros_like(tau)
        for seg in self.segments:
            inside = (tau >= seg.t_start) & (tau < seg.t_end)
            out = np.where(inside, self.k0 * (seg.s_end - seg.s_start) / (seg.t_end - seg.t_start), out)
        return out

    def _primitive(self, tau):
        """``int_{first knot}^{tau} alpha_dot``, exact."""
        tau = np.asarray(tau, dtype=float)
        k0 = self.k0
        first = self.knots[0]
        out = k0 * self.left_slope * np.minimum(tau - first, 0.0)
        for seg in self.segments:
            L = seg.t_end - seg.t_start
            v = np.clip(tau - seg.t_start, 0.0, L)
            m = (seg.s_end - seg.s_start) / L
            out = out + k0 * (seg.s_start * v + 0.5 * m * v * v)
        last = self.knots[-1]
        out = out + k0 * self.right_slope * np.maximum(tau - last, 0.0)
        return out

    def alpha(self, tau):
        """Phase ``alpha(tau)``; continuous, piecewise quadratic."""
        return self.alpha_at_origin + self._primitive(tau) - self._primitive(0.0)

    # -- serialisation -----------------------------------------------------------

    def to_dict(self):
        fam = self.family_params()
        if fam is not None:
            return fam
        return {
            "k0": self.k0,
            "segments": [list(s) for s in self.segments],
            "left_slope": self.left_slope,
            "right_slope": self.right_slope,
            "alpha_at_origin": self.alpha_at_origin,
        }

    def family_params(self):
        """``{k0, s0, s1, s2, T1, T2}`` if this is a three-knot family member."""
        segs = self.segments
        if len(segs) != 2 or self.alpha_at_origin != 0.0:
            return None
        a, b = segs
        if a.t_start != 0.0 or a.s_start != self.left_slope or b.s_end != self.right_slope:
            return None
        if a.s_end != b.s_start:
            return None
        return {"k0": self.k0, "s0": a.s_start, "s1": a.s_end, "s2": b.s_end, "T1": a.t_end, "T2": b.t_end}

    @classmethod
    def from_dict(cls, d):
        if "segments" in d:
            return cls(
                k0=d["k0"],
                segments=tuple(tuple(s) for s in d["segments"]),
                left_slope=d["left_slope"],
                right_slope=d["right_slope"],
                alpha_at_origin=d.get("alpha_at_origin", 0.0),
            )
        missing = [key for key in ("k0", "s0", "s1", "s2", "T1", "T2") if key not in d]
        if missing:
            raise ValidationError(f"phase function missing field(s): {', '.join(missing)}", field=missing[0])
        return make_piecewise_alpha(d["s0"], d["s1"], d["s2"], d["T1"], d["T2"], d["k0"])


def make_piecewise_alpha(s0, s1, s2, T1, T2, k0=1.0):
    """Inertial, two linear ramps of ``alpha_dot`` on [0, T1] and [T1, T2], inertial."""
    vals = dict(s0=s0, s1=s1, s2=s2, T1=T1, T2=T2, k0=k0)
    for name, v in vals.items():
        if not math.isfinite(v):
            raise ValidationError(f"{name} must be finite, got {v}", field=name)
    for name in ("s0", "s1", "s2"):
        if vals[name] <= 0:
            raise NonPositiveSlope(f"{name} must be positive, got {vals[name]}", field=name)
    if not T1 > 0:
        raise BadKnots(f"need 0 < T1, got T1={T1}", field="T1")
    if not T2 > T1:
        raise BadKnots(f"need T1 < T2, got T1={T1}, T2={T2}", field="T2")
    return PhaseFunction(
        k0=float(k0),
        segments=((0.0, T1, s0, s1), (T1, T2, s1, s2)),
        left_slope=float(s0),
        right_slope=float(s2),
    )


@dataclass(frozen=True)
class ExponentialPhase:
    """Phase of uniform proper acceleration ``a`` against the mode ``k0``.

    ``x(tau) = (sinh(a tau)/a, cosh(a tau)/a, 0, 0)`` gives
    ``alpha(tau) = -(k0/a) exp(-a tau)``.
    """

    a: float
    k0: float
    alpha_offset: float = 0.0

    def alpha(self, tau):
        return self.alpha_offset - (self.k0 / self.a) * np.exp(-self.a * np.asarray(tau, dtype=float))

    def alpha_dot(self, tau):
        return self.k0 * np.exp(-self.a * np.asarray(tau, dtype=float))

    def alpha_ddot(self, tau):
        return -self.a * self.alpha_dot(tau)

    def position(self, tau):
        tau = np.asarray(tau, dtype=float)
        return np.sinh(self.a * tau) / self.a, np.cosh(self.a * tau) / self.a


def uniform_acceleration_phase(a, k0=1.0):
    if not a > 0:
        raise NonPositiveParameter(f"acceleration must be positive, got {a}", field="a")
    if not k0 > 0:
        raise NonPositiveParameter(f"k0 must be positive, got {k0}", field="k0")
    return ExponentialPhase(float(a), float(k0))


def doppler_frequencies(pf):
    """Gaps at which the two inertial tails are resonant: ``(k0 s_left, k0 s_right)``."""
    return pf.k0 * pf.left_slope, pf.k0 * pf.right_slope


# -- four-vectors and worldlines --------------------------------------------------


class FourVector(NamedTuple):
    t: float
    x: float
    y: float = 0.0
    z: float = 0.0

    def dot(self, other):
        """Minkowski product with signature (+, -, -, -)."""
        return self.t * other.t - self.x * other.x - self.y * other.y - self.z * other.z


def four_velocity(slope):
    """Four-velocity components ``(u0, u1)`` for ``s = alpha_dot/k0``."""
    inv = 1.0 / slope
    return 0.5 * (inv + slope), 0.5 * (inv - slope)


@dataclass(frozen=True)
class Trajectory:
    phase_function: PhaseFunction
    tau: np.ndarray
    position: np.ndarray  # (n, 4)
    velocity: np.ndarray  # (n, 4)
    construction_tolerance: float = 1e-10
    diagnostics: dict = field(default_factory=dict)

    def samples(self) -> Iterator[tuple]:
        for i, t in enumerate(self.tau):
            yield float(t), FourVector(*self.position[i]), FourVector(*self.velocity[i])

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["tau", "t", "x", "u0", "u1"])
            for t, pos, vel in zip(self.tau, self.position, self.velocity):
                w.writerow([repr(float(v)) for v in (t, pos[0], pos[1], vel[0], vel[1])])


def _velocity_primitive(pf, tau):
    """Exact ``int_{first knot}^{tau} (u0, u1)`` for a piecewise-linear slope."""
    tau = np.asarray(tau, dtype=float)
    knots = pf.knots
    sl, sr = pf.left_slope, pf.right_slope
    dt = np.minimum(tau - knots[0], 0.0)
    inv_int = dt / sl
    s_int = dt * sl
    for seg in pf.segments:
        L = seg.t_end - seg.t_start
        v = np.clip(tau - seg.t_start, 0.0, L)
        ds = seg.s_end - seg.s_start
        s_int = s_int + seg.s_start * v + 0.5 * (ds / L) * v * v
        if ds == 0.0:
            inv_int = inv_int + v / seg.s_start
        else:
            # int dv / (s_a + m v) = log1p(m v / s_a) / m
            m = ds / L
            inv_int = inv_int + np.log1p(m * v / seg.s_start) / m
    dt = np.maximum(tau - knots[-1], 0.0)
    inv_int = inv_int + dt / sr
    s_int = s_int + dt * sr
    return 0.5 * (inv_int + s_int), 0.5 * (inv_int - s_int)


def reconstruct_trajectory(pf, tau_min, tau_max, n_samples, tolerance=1e-10):
    """Sample the worldline of ``pf`` with ``x(tau_min) = 0``.

    Positions use the exact antiderivative of the four-velocity on every
    segment, so the only error is rounding.
    """
    if not isinstance(n_samples, (int, np.integer)) or n_samples < 2:
        raise ValidationError(f"n_samples must be an integer >= 2, got {n_samples}", field="n_samples")
    if not (math.isfinite(tau_min) and math.isfinite(tau_max)) or not tau_min < tau_max:
        raise ValidationError(f"need tau_min < tau_max, got {tau_min}, {tau_max}", field="tau_max")
    tau = np.linspace(tau_min, tau_max, int(n_samples))
    s = pf.slope(tau)
    u0, u1 = four_velocity(s)
    p0, p1 = _velocity_primitive(pf, tau)
    r0, r1 = _velocity_primitive(pf, np.array([tau_min]))
    zeros = np.zeros_like(tau)
    position = np.column_stack([p0 - r0[0], p1 - r1[0], zeros, zeros])
    velocity = np.column_stack([u0, u1, zeros, zeros])
    traj = Trajectory(pf, tau, position, velocity, tolerance)
    norm_dev = check_timelike(traj)
    phase_dev = check_phase_consistency(traj)
    traj.diagnostics.update(max_norm_deviation=norm_dev, max_phase_deviation=phase_dev)
    if norm_dev > tolerance or phase_dev > tolerance:
        raise ValidationError(
            f"reconstructed worldline violates construction tolerance {tolerance}: "
            f"|u.u-1|={norm_dev:.3e}, |k.u-alpha_dot|={phase_dev:.3e}"
        )
    return traj


def check_timelike(traj):
    """``max |u.u - 1|`` over the samples."""
    u = np.asarray(traj.velocity, dtype=float)
    norm = u[:, 0] ** 2 - u[:, 1] ** 2 - u[:, 2] ** 2 - u[:, 3] ** 2
    return float(np.max(np.abs(norm - 1.0)))


def check_phase_consistency(traj):
    """``max |k.u - alpha_dot|`` with ``k = (k0, k0, 0, 0)``."""
    pf = traj.phase_function
    u = np.asarray(traj.velocity, dtype=float)
    k_dot_u = pf.k0 * (u[:, 0] - u[:, 1])
    return float(np.max(np.abs(k_dot_u - pf.alpha_dot(traj.tau))))
