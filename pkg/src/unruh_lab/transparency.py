"""Search for acceleration-induced transparency.

For the three-knot family with ``s0, s2, T1`` held fixed, ``I_-`` at a fixed
gap is a complex function on the ``(s1, T2)`` plane. Its zeros sit where the
zero-level curves of ``Re I_-`` and ``Im I_-`` cross. The pipeline scans a
grid, traces both zero sets with marching squares, intersects them and
polishes each crossing with a damped Newton iteration.
"""
from __future__ import annotations

import json
import math
from collections import defaultdict
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from ._backend import USE_NUMBA
from ._kernels import family_grid_nb, family_grid_np
from .errors import (
    EmptyFeasibleRegion,
    LeftFeasibleRegion,
    NoContour,
    NoConvergence,
    NoTransparencyFound,
    ValidationError,
)
from .oscillatory import ADIABATIC, Regularization, eval_I, eval_pair, spectrum_scan
from .trajectory import make_piecewise_alpha

MIN_GRID = 8
RATIO_ACCEPT = 1e-3


@dataclass(frozen=True)
class SearchSpec:
    """Fixed ``(s0, s2, T1, k0, omega, regularization)``; ``(s1, T2)`` scanned.

    ``omega=None`` asks :func:`transparency_report` to pick the gap with
    :func:`choose_gap`.
    """

    s0: float
    s2: float
    T1: float
    k0: float = 1.0
    omega: float | None = None
    regularization: Regularization | None = None
    s1_range: tuple = (0.1, 5.0)
    T2_range: tuple = (6.0, 30.0)
    grid: tuple = (64, 64)

    def __post_init__(self):
        reg = self.regularization or Regularization.adiabatic(1e-3 * self.k0)
        object.__setattr__(self, "regularization", reg)
        for name in ("s0", "s2", "k0"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValidationError(f"{name} must be positive, got {v}", field=name)
        if not (math.isfinite(self.T1) and self.T1 > 0):
            raise ValidationError(f"T1 must be positive, got {self.T1}", field="T1")
        if self.omega is not None and not math.isfinite(self.omega):
            raise ValidationError(f"omega must be finite, got {self.omega}", field="omega")
        lo, hi = self.s1_range
        if not lo <= hi:
            raise ValidationError(f"s1_range must be ascending, got {self.s1_range}", field="s1_range")
        lo, hi = self.T2_range
        if not lo <= hi:
            raise ValidationError(f"T2_range must be ascending, got {self.T2_range}", field="T2_range")
        if not lo > self.T1:
            raise ValidationError(f"T2_range must lie above T1={self.T1}, got {self.T2_range}", field="T2_range")
        n1, n2 = self.grid
        if int(n1) != n1 or int(n2) != n2 or n1 < MIN_GRID or n2 < MIN_GRID:
            raise ValidationError(f"grid must be at least {MIN_GRID}x{MIN_GRID}, got {self.grid}", field="grid")
        object.__setattr__(self, "grid", (int(n1), int(n2)))

    @property
    def s1_values(self):
        return np.linspace(*self.s1_range, self.grid[0])

    @property
    def T2_values(self):
        return np.linspace(*self.T2_range, self.grid[1])

    @property
    def cell(self):
        n1, n2 = self.grid
        return ((self.s1_range[1] - self.s1_range[0]) / (n1 - 1), (self.T2_range[1] - self.T2_range[0]) / (n2 - 1))

    def phase_function(self, s1, T2):
        return make_piecewise_alpha(self.s0, s1, self.s2, self.T1, T2, self.k0)

    def feasible(self, s1, T2):
        return s1 > 0 and T2 > self.T1

    def with_omega(self, omega):
        return replace(self, omega=float(omega))

    def to_dict(self):
        return {
            "s0": self.s0,
            "s2": self.s2,
            "T1": self.T1,
            "k0": self.k0,
            "omega": self.omega,
            "regularization": self.regularization.to_dict(),
            "s1_range": list(self.s1_range),
            "T2_range": list(self.T2_range),
            "grid": list(self.grid),
        }

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        if "regularization" in d and d["regularization"] is not None:
            d["regularization"] = Regularization.from_dict(d["regularization"])
        for key in ("s1_range", "T2_range", "grid"):
            if key in d:
                d[key] = tuple(d[key])
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(d) - known
        if unknown:
            raise ValidationError(f"unknown search field(s): {', '.join(sorted(unknown))}", field=sorted(unknown)[0])
        return cls(**d)


def demo_spec(**overrides):
    """Order-unity demonstration: Doppler peaks at 1 and 2, gap picked by pre-scan."""
    base = dict(s0=1.0, s2=2.0, T1=5.0, k0=1.0, s1_range=(0.1, 5.0), T2_range=(6.0, 30.0), grid=(64, 64))
    base.update(overrides)
    return SearchSpec(**base)


@dataclass(frozen=True)
class TransparencyPoint:
    s1: float
    T2: float
    residual: float
    ratio: float
    iterations: int
    omega: float
    i_plus: complex = 0j
    i_minus: complex = 0j

    def to_dict(self):
        d = asdict(self)
        d["i_plus"] = [self.i_plus.real, self.i_plus.imag]
        d["i_minus"] = [self.i_minus.real, self.i_minus.imag]
        return d


# -- grid scan --------------------------------------------------------------------


@dataclass
class ScanGrid:
    s1: np.ndarray
    T2: np.ndarray
    values: np.ndarray  # complex, NaN where infeasible
    valid: np.ndarray

    @property
    def cell(self):
        return (self.s1[1] - self.s1[0], self.T2[1] - self.T2[0])


def _eval_family(spec, s1, T2, sign):
    return eval_I(spec.phase_function(s1, T2), spec.omega, sign, spec.regularization)


def scan_grid(spec, sign=-1):
    """``I_sign`` at every grid node; infeasible nodes are NaN and masked."""
    if spec.omega is None:
        raise ValidationError("scan_grid needs a concrete omega", field="omega")
    s1s = spec.s1_values
    T2s = spec.T2_values
    valid = (s1s[:, None] > 0) & (T2s[None, :] > spec.T1)
    if not valid.any():
        raise EmptyFeasibleRegion("no grid node satisfies alpha_dot > 0 and T2 > T1")
    reg = spec.regularization
    if reg.mode == ADIABATIC:
        kernel = family_grid_nb if USE_NUMBA else family_grid_np
        values = kernel(spec.s0, spec.s2, spec.T1, spec.k0, float(spec.omega), float(sign), reg.epsilon, s1s, T2s)
    else:
        values = np.full(valid.shape, complex(np.nan, np.nan))
        for i, j in zip(*np.nonzero(valid)):
            values[i, j] = _eval_family(spec, s1s[i], T2s[j], sign)
    return ScanGrid(s1s, T2s, values, valid)


# -- marching squares ----------------------------------------------------------------


@dataclass
class ContourSet:
    re: list
    im: list
    re_degenerate: bool = False
    im_degenerate: bool = False


def _crossing(f, x, y, key):
    kind, i, j = key
    if kind == "x":  # edge (i, j) -> (i+1, j)
        fa, fb = f[i, j], f[i + 1, j]
        t = fa / (fa - fb)
        return (x[i] + t * (x[i + 1] - x[i]), y[j])
    fa, fb = f[i, j], f[i, j + 1]
    t = fa / (fa - fb)
    return (x[i], y[j] + t * (y[j + 1] - y[j]))


def _march(f, valid, x, y):
    """Zero-level polylines of ``f`` by marching squares, linear edge interpolation."""
    above = f >= 0
    segments = []
    nx, ny = f.shape
    for i in range(nx - 1):
        for j in range(ny - 1):
            if not (valid[i, j] and valid[i + 1, j] and valid[i + 1, j + 1] and valid[i, j + 1]):
                continue
            c = (above[i, j], above[i + 1, j], above[i + 1, j + 1], above[i, j + 1])
            edges = (("x", i, j), ("y", i + 1, j), ("x", i, j + 1), ("y", i, j))
            # edge k joins corners k and k+1
            cut = [edges[k] for k in range(4) if c[k] != c[(k + 1) % 4]]
            if len(cut) == 2:
                segments.append((cut[0], cut[1]))
            elif len(cut) == 4:
                centre = 0.25 * (f[i, j] + f[i + 1, j] + f[i + 1, j + 1] + f[i, j + 1]) >= 0
                if centre == c[0]:
                    segments += [(edges[0], edges[1]), (edges[2], edges[3])]
                else:
                    segments += [(edges[3], edges[0]), (edges[1], edges[2])]
    return _chain(segments, lambda key: _crossing(f, x, y, key))


def _chain(segments, locate):
    adj = defaultdict(list)
    for n, (a, b) in enumerate(segments):
        adj[a].append(n)
        adj[b].append(n)
    used = [False] * len(segments)

    def walk(start_key, n):
        keys = [start_key]
        key = start_key
        while n is not None:
            used[n] = True
            a, b = segments[n]
            key = b if a == key else a
            keys.append(key)
            n = next((m for m in adj[key] if not used[m]), None)
        return keys

    lines = []
    ends = sorted(k for k, v in adj.items() if len(v) == 1)
    for key in ends:
        n = adj[key][0]
        if not used[n]:
            lines.append(walk(key, n))
    for n, (a, _) in enumerate(segments):
        if not used[n]:
            lines.append(walk(a, n))
    return [np.array([locate(k) for k in keys]) for keys in lines]


def zero_contours(grid):
    """Polylines where ``Re`` and ``Im`` of the grid values vanish.

    A component that is identically zero is flagged degenerate and yields no
    polylines. A component without any sign change raises ``NoContour``.
    """
    valid = grid.valid & np.isfinite(grid.values)
    out = {}
    for name, comp in (("re", grid.values.real), ("im", grid.values.imag)):
        vals = comp[valid]
        if vals.size and np.all(vals == 0):
            out[name] = ([], True)
            continue
        if not (np.any(vals >= 0) and np.any(vals < 0)):
            raise NoContour(f"{name} part of I_- never changes sign on the grid")
        f = np.where(valid, comp, 0.0)
        out[name] = (_march(f, valid, grid.s1, grid.T2), False)
    return ContourSet(out["re"][0], out["im"][0], out["re"][1], out["im"][1])


# -- intersections ---------------------------------------------------------------------


def _segments(lines):
    segs = [np.stack([ln[:-1], ln[1:]], axis=1) for ln in lines if len(ln) >= 2]
    return np.concatenate(segs) if segs else np.zeros((0, 2, 2))


def _dedupe(points, radius):
    kept = []
    for p in points:
        if not any(abs(p[0] - q[0]) <= radius[0] and abs(p[1] - q[1]) <= radius[1] for q in kept):
            kept.append(p)
    return kept


def find_intersections(contours_re, contours_im, cell=None):
    """All crossings of the two polyline families, deduplicated within half a cell."""
    A = _segments(contours_re)
    B = _segments(contours_im)
    if not len(A) or not len(B):
        return []
    p = A[:, None, 0, :]
    r = (A[:, 1, :] - A[:, 0, :])[:, None, :]
    q = B[None, :, 0, :]
    s = (B[:, 1, :] - B[:, 0, :])[None, :, :]
    denom = r[..., 0] * s[..., 1] - r[..., 1] * s[..., 0]
    qp = q - p
    with np.errstate(divide="ignore", invalid="ignore"):
        t = (qp[..., 0] * s[..., 1] - qp[..., 1] * s[..., 0]) / denom
        u = (qp[..., 0] * r[..., 1] - qp[..., 1] * r[..., 0]) / denom
    scale = np.maximum(np.abs(r).sum(-1) * np.abs(s).sum(-1), 1e-300)
    hit = (np.abs(denom) > 1e-14 * scale) & (t >= 0) & (t <= 1) & (u >= 0) & (u <= 1)
    ia, ib = np.nonzero(hit)
    pts = (p[ia, 0] + t[ia, ib, None] * r[ia, 0]).tolist()
    pts.sort()
    if cell is None:
        allpts = np.concatenate([np.concatenate(contours_re), np.concatenate(contours_im)])
        span = allpts.max(0) - allpts.min(0)
        cell = tuple(np.maximum(span, 1e-12) * 1e-6)
    radius = (0.5 * cell[0], 0.5 * cell[1])
    return [tuple(pt) for pt in _dedupe(pts, radius)]


# -- Newton polish ----------------------------------------------------------------------


def newton2d(F, x0, tol, max_iter=50, feasible=None, rel_step=1e-6, min_damping=2.0**-30):
    """Damped Newton iteration on ``F: R^2 -> R^2`` with a forward-difference Jacobian.

    Steps are halved until the iterate is feasible and ``|F|`` decreases.
    Returns ``(x, |F(x)|, iterations)``.
    """
    feasible = feasible or (lambda x: True)
    x = np.asarray(x0, dtype=float)
    fx = np.asarray(F(x), dtype=float)
    res = float(np.hypot(*fx))
    for it in range(max_iter + 1):
        if res < tol:
            return x, res, it
        if it == max_iter:
            break
        h = rel_step * np.maximum(np.abs(x), 1.0)
        J = np.empty((2, 2))
        for k in range(2):
            xp = x.copy()
            xp[k] += h[k]
            if not feasible(xp):
                xp[k] = x[k] - h[k]
                J[:, k] = (fx - np.asarray(F(xp), dtype=float)) / h[k]
            else:
                J[:, k] = (np.asarray(F(xp), dtype=float) - fx) / h[k]
        try:
            step = np.linalg.solve(J, -fx)
        except np.linalg.LinAlgError:
            raise NoConvergence(f"singular Jacobian at {x.tolist()}") from None
        lam = 1.0
        blocked = False
        while True:
            xn = x + lam * step
            if feasible(xn):
                fn = np.asarray(F(xn), dtype=float)
                rn = float(np.hypot(*fn))
                if rn < res:
                    break
            else:
                blocked = True
            lam *= 0.5
            if lam < min_damping:
                if blocked:
                    raise LeftFeasibleRegion(f"Newton iterate pinned at the feasibility boundary near {x.tolist()}")
                raise NoConvergence(f"no descent direction at {x.tolist()} (|F|={res:.3e})")
        if blocked and lam < 2.0**-20:
            # creeping along the boundary: the root lies outside
            raise LeftFeasibleRegion(f"Newton iterate pinned at the feasibility boundary near {xn.tolist()}")
        x, fx, res = xn, fn, rn
    raise NoConvergence(f"|F|={res:.3e} after {max_iter} iterations (tol {tol:.3e})")


def refine_root(candidate, spec, tol=None, max_iter=50):
    """Polish a contour crossing into a zero of ``I_-``.

    ``tol`` defaults to ``1e-10 * |I_+|`` at the candidate.
    """
    if spec.omega is None:
        raise ValidationError("refine_root needs a concrete omega", field="omega")
    s1, T2 = candidate
    if not spec.feasible(s1, T2):
        raise LeftFeasibleRegion(f"candidate {candidate} is infeasible")
    if tol is None:
        tol = 1e-10 * abs(_eval_family(spec, s1, T2, +1))

    def F(x):
        v = _eval_family(spec, x[0], x[1], -1)
        return v.real, v.imag

    x, res, iters = newton2d(F, (s1, T2), tol, max_iter, feasible=lambda x: spec.feasible(x[0], x[1]))
    pair = eval_pair(spec.phase_function(x[0], x[1]), spec.omega, spec.regularization)
    return TransparencyPoint(float(x[0]), float(x[1]), float(res), pair.ratio, iters, float(spec.omega),
                             pair.i_plus, pair.i_minus)


# -- gap selection and report ----------------------------------------------------------------


def _crossing_cells(grid):
    v = grid.values
    ok = grid.valid[:-1, :-1] & grid.valid[1:, :-1] & grid.valid[:-1, 1:] & grid.valid[1:, 1:]

    def changes(c):
        s = c >= 0
        return (s[:-1, :-1] != s[1:, :-1]) | (s[:-1, :-1] != s[:-1, 1:]) | (s[1:, 1:] != s[1:, :-1]) | (
            s[1:, 1:] != s[:-1, 1:])

    return int(np.sum(ok & changes(v.real) & changes(v.imag)))


def gap_candidates(spec, n_gaps=21):
    """Interior gaps between the Doppler peaks, nearest the midpoint first."""
    lo, hi = sorted((spec.k0 * spec.s0, spec.k0 * spec.s2))
    if hi - lo < 1e-12:
        lo, hi = 0.5 * lo, 1.5 * hi
    gaps = np.linspace(lo, hi, n_gaps + 2)[1:-1]
    mid = 0.5 * (lo + hi)
    return [float(g) for g in sorted(gaps, key=lambda g: (abs(g - mid), g))]


def choose_gap(spec, n_gaps=21):
    """First gap from :func:`gap_candidates` whose grid has a double sign-change cell
    and crossing zero contours."""
    for om in gap_candidates(spec, n_gaps):
        probe = spec.with_omega(om)
        grid = scan_grid(probe)
        if _crossing_cells(grid) == 0:
            continue
        try:
            contours = zero_contours(grid)
        except NoContour:
            continue
        if find_intersections(contours.re, contours.im, grid.cell):
            return om
    raise NoTransparencyFound("no gap between the Doppler peaks shows crossing zero contours")


@dataclass
class TransparencyReport:
    spec: SearchSpec
    points: list
    spectrum: object = None
    candidates: int = 0
    failures: list = field(default_factory=list)

    @property
    def best(self):
        return min(self.points, key=lambda p: p.ratio)

    def to_dict(self, spectrum_path=None):
        return {
            "spec": self.spec.to_dict(),
            "points": [p.to_dict() for p in self.points],
            "best": self.best.to_dict(),
            "candidates": self.candidates,
            "spectrum_path": spectrum_path,
        }

    def write(self, path, spectrum_path=None):
        with open(path, "w") as fh:
            json.dump(self.to_dict(spectrum_path), fh, indent=2, sort_keys=True)
            fh.write("\n")


def spectrum_grid(spec, n=401):
    """Uniform gap grid spanning both Doppler peaks, with the tuned gap inserted."""
    lo = 0.5 * spec.k0 * min(spec.s0, spec.s2, spec.omega / spec.k0)
    hi = 1.5 * spec.k0 * max(spec.s0, spec.s2, spec.omega / spec.k0)
    grid = np.linspace(lo, hi, n)
    return np.unique(np.append(grid, spec.omega))


def transparency_report(spec, tol=None, max_iter=50, spectrum_points=401):
    """scan -> contours -> intersections -> Newton; spectrum at the best point."""
    if spec.omega is None:
        last = None
        for om in gap_candidates(spec):
            try:
                return transparency_report(spec.with_omega(om), tol, max_iter, spectrum_points)
            except NoTransparencyFound as exc:
                last = exc
        raise NoTransparencyFound(f"no gap between the Doppler peaks admits transparency ({last})")
    lo, hi = spec.s1_range
    if spec.s0 == spec.s2 and lo == hi == spec.s0:
        raise NoTransparencyFound("inertial trajectories cannot switch off resonant absorption")
    grid = scan_grid(spec)
    try:
        contours = zero_contours(grid)
    except NoContour as exc:
        raise NoTransparencyFound(str(exc)) from None
    if contours.re_degenerate or contours.im_degenerate:
        raise NoTransparencyFound("degenerate zero set of I_- on the grid")
    candidates = find_intersections(contours.re, contours.im, grid.cell)
    points = []
    failures = []
    for cand in candidates:
        try:
            pt = refine_root(cand, spec, tol, max_iter)
        except (NoConvergence, LeftFeasibleRegion) as exc:
            failures.append((cand, str(exc)))
            continue
        if pt.ratio < RATIO_ACCEPT and abs(pt.i_plus) > 0:
            points.append(pt)
    points = _unique_points(points, spec)
    if not points:
        raise NoTransparencyFound(f"none of {len(candidates)} candidate(s) refined to a transparency point")
    points.sort(key=lambda p: (p.s1, p.T2))
    report = TransparencyReport(spec, points, candidates=len(candidates), failures=failures)
    best = report.best
    pf = spec.phase_function(best.s1, best.T2)
    report.spectrum = spectrum_scan(pf, spectrum_grid(spec, spectrum_points), spec.regularization)
    return report


def _unique_points(points, spec):
    hx, hy = spec.cell
    kept = []
    for p in sorted(points, key=lambda p: p.residual):
        if not any(abs(p.s1 - q.s1) <= 1e-6 * max(1.0, hx) and abs(p.T2 - q.T2) <= 1e-6 * max(1.0, hy) for q in kept):
            kept.append(p)
    return kept
