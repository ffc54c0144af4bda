import json
import math

import numpy as np
import pytest

from unruh_lab.errors import (
    EmptyFeasibleRegion,
    LeftFeasibleRegion,
    NoContour,
    NoConvergence,
    NoTransparencyFound,
    ValidationError,
)
from unruh_lab.oscillatory import Regularization, eval_I, eval_pair
from unruh_lab.trajectory import PhaseFunction
from unruh_lab.transparency import (
    ScanGrid,
    SearchSpec,
    demo_spec,
    find_intersections,
    newton2d,
    refine_root,
    scan_grid,
    transparency_report,
    zero_contours,
)

DEMO_OMEGA = 19 / 11  # gap picked by the pre-scan of the demo spec


def synthetic(f, n=21, lo=-1.0, hi=1.0):
    x = np.linspace(lo, hi, n)
    y = np.linspace(lo, hi, n)
    X, Y = np.meshgrid(x, y, indexing="ij")
    return ScanGrid(x, y, f(X, Y).astype(complex), np.ones(X.shape, bool))


@pytest.fixture(scope="module")
def demo_report():
    return transparency_report(demo_spec())


# -- spec -------------------------------------------------------------------------------


def test_grid_minimum():
    with pytest.raises(ValidationError) as exc:
        demo_spec(grid=(4, 4))
    assert exc.value.field == "grid"


def test_T2_range_above_T1():
    with pytest.raises(ValidationError) as exc:
        demo_spec(T2_range=(4.0, 10.0))
    assert exc.value.field == "T2_range"


def test_spec_round_trip():
    spec = demo_spec(omega=1.5, regularization=Regularization.adiabatic(0.01))
    assert SearchSpec.from_dict(json.loads(json.dumps(spec.to_dict()))) == spec


def test_spec_unknown_field():
    with pytest.raises(ValidationError) as exc:
        SearchSpec.from_dict({"s0": 1, "s2": 2, "T1": 5, "bogus": 1})
    assert exc.value.field == "bogus"


# -- scan -------------------------------------------------------------------------------


def test_scan_empty_region():
    with pytest.raises(EmptyFeasibleRegion):
        scan_grid(demo_spec(omega=1.5, s1_range=(-2.0, -1.0)))


def test_scan_marks_infeasible_nodes():
    g = scan_grid(demo_spec(omega=1.5, s1_range=(-1.0, 2.0), grid=(16, 8)))
    assert not g.valid[g.s1 <= 0].any()
    assert np.all(np.isnan(g.values[~g.valid]))
    assert np.all(np.isfinite(g.values[g.valid]))


def test_scan_constant_slope_row_is_inertial():
    reg = Regularization.adiabatic(0.01)
    spec = SearchSpec(1.0, 1.0, 5.0, omega=1.2, regularization=reg, s1_range=(0.5, 1.5), grid=(9, 12))
    g = scan_grid(spec)
    row = g.values[4]
    assert g.s1[4] == 1.0
    expected = eval_I(PhaseFunction.inertial(1.0), 1.2, -1, reg)
    np.testing.assert_allclose(row, expected, rtol=1e-13)


def test_scan_matches_pointwise(rng):
    spec = demo_spec(omega=1.4, grid=(12, 10))
    g = scan_grid(spec)
    for _ in range(3):
        i, j = rng.integers(0, 12), rng.integers(0, 10)
        ref = eval_I(spec.phase_function(g.s1[i], g.T2[j]), 1.4, -1, spec.regularization)
        assert abs(g.values[i, j] - ref) <= 1e-12 * abs(ref)


def test_scan_window_mode_matches_pointwise():
    spec = demo_spec(omega=1.4, grid=(8, 8), regularization=Regularization.hard_window(-20.0, 60.0))
    g = scan_grid(spec)
    ref = eval_I(spec.phase_function(g.s1[3], g.T2[5]), 1.4, -1, spec.regularization)
    assert g.values[3, 5] == pytest.approx(ref, rel=1e-12)


# -- contours and intersections ----------------------------------------------------------------


def test_axes_contours():
    g = synthetic(lambda x, y: x + 1j * y, n=20)
    c = zero_contours(g)
    re_pts = np.concatenate(c.re)
    im_pts = np.concatenate(c.im)
    assert np.max(np.abs(re_pts[:, 0])) < 1e-12
    assert np.max(np.abs(im_pts[:, 1])) < 1e-12
    pts = find_intersections(c.re, c.im, g.cell)
    assert len(pts) == 1
    assert np.allclose(pts[0], (0.0, 0.0), atol=1e-12)


def test_circle_and_degenerate_imaginary_part():
    g = synthetic(lambda x, y: x * x + y * y - 0.5, n=41)
    c = zero_contours(g)
    assert c.im_degenerate and not c.re_degenerate
    pts = np.concatenate(c.re)
    r = np.hypot(pts[:, 0], pts[:, 1])
    assert np.max(np.abs(r - math.sqrt(0.5))) < 2e-3
    assert len(c.re) == 1 and np.allclose(c.re[0][0], c.re[0][-1])


def test_no_sign_change():
    g = synthetic(lambda x, y: 1.0 + x * x + 1j * x)
    with pytest.raises(NoContour):
        zero_contours(g)


def test_parallel_lines_do_not_cross():
    a = [np.array([[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]])]
    b = [np.array([[0.0, 1.0], [1.0, 1.0], [2.0, 1.0]])]
    assert find_intersections(a, b, (0.1, 0.1)) == []


def test_duplicate_crossings_merged():
    # crossing exactly at a shared vertex is reported by two segment pairs
    a = [np.array([[-1.0, 0.0], [0.0, 0.0], [1.0, 0.0]])]
    b = [np.array([[0.0, -1.0], [0.0, 0.0], [0.0, 1.0]])]
    assert len(find_intersections(a, b, (0.5, 0.5))) == 1


def test_saddle_cell():
    g = synthetic(lambda x, y: x * y + 0.01 + 1j * (x + y), n=10)
    c = zero_contours(g)
    assert len(c.re) == 2
    assert len(find_intersections(c.re, c.im, g.cell)) == 2


def test_invalid_nodes_excluded():
    g = synthetic(lambda x, y: x + 1j * (y - 0.5), n=20)
    g.valid[:, :10] = False
    g.values[~g.valid] = np.nan
    c = zero_contours(g)
    assert np.all(np.concatenate(c.re)[:, 1] >= g.T2[10])


# -- Newton -------------------------------------------------------------------------------------


def test_newton_quadratic_convergence():
    root = np.array([math.sqrt(2.0), math.sqrt(3.0)])

    def F(x):
        return x[0] ** 2 - 2.0 + 0.1 * (x[1] - root[1]), x[1] ** 2 - 3.0 + 0.1 * (x[0] - root[0])

    x, res, it = newton2d(F, root + 0.05, 1e-13)
    assert it <= 6
    assert np.allclose(x, root, atol=1e-12)


def test_newton_zero_iterations_at_root():
    x, res, it = newton2d(lambda x: (x[0] - 1.0, x[1] - 2.0), (1.0, 2.0), 1e-12)
    assert it == 0 and res == 0.0


def test_newton_no_convergence():
    with pytest.raises(NoConvergence):
        newton2d(lambda x: (x[0] ** 2 + 1.0, x[1]), (0.3, 0.0), 1e-12)


def test_newton_halts_at_feasibility_wall():
    with pytest.raises(LeftFeasibleRegion):
        newton2d(lambda x: (x[0] + 1.0, x[1]), (0.5, 0.0), 1e-12, feasible=lambda x: x[0] > 0)


def test_refine_rejects_infeasible_candidate():
    with pytest.raises(LeftFeasibleRegion):
        refine_root((-0.5, 10.0), demo_spec(omega=DEMO_OMEGA))


def test_refine_stops_immediately_at_root(demo_report):
    p = demo_report.best
    spec = demo_report.spec
    again = refine_root((p.s1, p.T2), spec, tol=2 * p.residual + 1e-300)
    assert again.iterations == 0
    assert again.residual == p.residual


# -- end to end ---------------------------------------------------------------------------------


def test_demo_finds_transparency(demo_report):
    spec = demo_report.spec
    assert spec.omega == pytest.approx(DEMO_OMEGA)
    assert len(demo_report.points) >= 1
    for p in demo_report.points:
        pair = eval_pair(spec.phase_function(p.s1, p.T2), spec.omega, spec.regularization)
        assert abs(pair.i_minus) < 1e-10 * abs(pair.i_plus)
        assert pair.ratio < 1e-6 and abs(pair.i_plus) > 0
        assert spec.feasible(p.s1, p.T2)
    keys = [(p.s1, p.T2) for p in demo_report.points]
    assert keys == sorted(keys)


def test_demo_spectrum_structure(demo_report):
    sp = demo_report.spectrum
    step = sp.omega[1] - sp.omega[0]
    peaks = sp.omega[sp.peaks()]
    assert any(abs(w - 1.0) <= step for w in peaks)
    assert any(abs(w - 2.0) <= step for w in peaks)
    k = int(np.argmin(np.abs(sp.omega - demo_report.spec.omega)))
    assert sp.abs_minus[k] < sp.abs_plus[k]


def test_refined_points_are_grid_stable(demo_report):
    coarse = demo_report.spec
    fine = transparency_report(SearchSpec.from_dict(dict(coarse.to_dict(), grid=[128, 128])))
    for p in demo_report.points:
        q = min(fine.points, key=lambda q: abs(q.s1 - p.s1) + abs(q.T2 - p.T2))
        assert abs(q.s1 - p.s1) < 1e-6 and abs(q.T2 - p.T2) < 1e-6


def test_inertial_spec_has_no_transparency():
    spec = SearchSpec(1.0, 1.0, 5.0, s1_range=(1.0, 1.0))
    with pytest.raises(NoTransparencyFound):
        transparency_report(spec)
    with pytest.raises(NoTransparencyFound):
        transparency_report(spec.with_omega(1.0))


def test_report_json(tmp_path, demo_report):
    path = tmp_path / "r.json"
    demo_report.write(path, "spec.csv")
    d = json.loads(path.read_text())
    assert d["spectrum_path"] == "spec.csv"
    assert d["spec"]["omega"] == demo_report.spec.omega
    assert len(d["points"]) == len(demo_report.points)
    assert d["best"]["ratio"] <= 1e-6
