import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from unruh_lab.errors import BadKnots, NonPositiveParameter, NonPositiveSlope, ValidationError
from unruh_lab.trajectory import (
    FourVector,
    PhaseFunction,
    Trajectory,
    check_phase_consistency,
    check_timelike,
    doppler_frequencies,
    four_velocity,
    make_piecewise_alpha,
    reconstruct_trajectory,
    uniform_acceleration_phase,
)

slopes = st.floats(0.2, 4.0)


@st.composite
def families(draw):
    T1 = draw(st.floats(0.5, 5.0))
    T2 = T1 + draw(st.floats(0.1, 15.0))
    return make_piecewise_alpha(draw(slopes), draw(slopes), draw(slopes), T1, T2, draw(st.floats(0.5, 3.0)))


def test_equal_slopes_is_rest():
    pf = make_piecewise_alpha(1, 1, 1, 1, 2, 1)
    tau = np.linspace(-3, 5, 17)
    assert np.all(pf.alpha_dot(tau) == 1.0)
    assert pf.is_inertial


def test_negative_slope_rejected():
    with pytest.raises(NonPositiveSlope) as exc:
        make_piecewise_alpha(1, -0.5, 1, 1, 2, 1)
    assert exc.value.field == "s1"


@pytest.mark.parametrize("T1,T2,field", [(0.0, 1.0, "T1"), (2.0, 1.0, "T2"), (1.0, 1.0, "T2")])
def test_bad_knots(T1, T2, field):
    with pytest.raises(BadKnots) as exc:
        make_piecewise_alpha(1, 1, 1, T1, T2, 1)
    assert exc.value.field == field


def test_non_finite_rejected():
    with pytest.raises(ValidationError):
        make_piecewise_alpha(1, math.nan, 1, 1, 2)


def test_first_segment_interpolation():
    pf = make_piecewise_alpha(1, 3, 2, 1, 2, k0=2)
    assert pf.alpha_dot(0.5) == pytest.approx(4.0, abs=1e-15)


def test_alpha_is_continuous_primitive(family):
    tau = np.linspace(-2, 6, 4001)
    a = family.alpha(tau)
    # trapezoid on a fine grid against the exact primitive
    trap = np.concatenate([[0.0], np.cumsum(0.5 * (family.alpha_dot(tau[1:]) + family.alpha_dot(tau[:-1])) * np.diff(tau))])
    assert np.max(np.abs(a - a[0] - trap)) < 1e-5
    assert family.alpha(0.0) == 0.0
    for k in family.knots:
        assert abs(family.alpha(k - 1e-12) - family.alpha(k + 1e-12)) < 1e-10


def test_alpha_offset():
    pf = make_piecewise_alpha(1, 2, 1.5, 1, 3).with_alpha_offset(0.7)
    assert pf.alpha(0.0) == pytest.approx(0.7)


def test_uniform_acceleration():
    ph = uniform_acceleration_phase(1.0, 1.0)
    assert ph.alpha_dot(0.0) == 1.0
    assert ph.alpha_dot(math.log(2)) == pytest.approx(0.5, rel=1e-15)
    tau = np.linspace(-3, 3, 13)
    np.testing.assert_allclose(ph.alpha_ddot(tau) / ph.alpha_dot(tau), -1.0)
    # k.x for the hyperbola x = (sinh a tau / a, cosh a tau / a)
    t, x = ph.position(tau)
    np.testing.assert_allclose(t - x, ph.alpha(tau), rtol=1e-13)


@pytest.mark.parametrize("a,k0", [(0.0, 1.0), (-1.0, 1.0), (1.0, 0.0)])
def test_uniform_acceleration_rejects(a, k0):
    with pytest.raises(NonPositiveParameter):
        uniform_acceleration_phase(a, k0)


def test_doppler():
    assert doppler_frequencies(make_piecewise_alpha(1, 1.3, 1, 1, 2, 1)) == (1, 1)
    assert doppler_frequencies(make_piecewise_alpha(1, 1.3, 2, 1, 2, 3)) == (3, 6)
    rest = PhaseFunction.inertial(2.5)
    assert doppler_frequencies(rest) == (2.5, 2.5)


def test_four_velocity_closed_form():
    assert four_velocity(1.0) == (1.0, 0.0)
    u0, u1 = four_velocity(2.0)
    assert (u0, u1) == (1.25, -0.75)
    assert u0 * u0 - u1 * u1 == 1.0


def test_minkowski_dot():
    u = FourVector(1.25, -0.75)
    assert u.dot(u) == pytest.approx(1.0)


def test_reconstruct_family():
    pf = make_piecewise_alpha(1, 2, 1.5, 1, 3, 1)
    traj = reconstruct_trajectory(pf, -2.0, 6.0, 2001)
    assert check_timelike(traj) < 1e-12
    assert check_phase_consistency(traj) < 1e-12
    assert np.all(traj.velocity[:, 0] > 0)
    assert np.all(traj.position[0] == 0.0)
    # positions are the exact integral of the velocity
    dt = np.diff(traj.tau)
    trap = np.cumsum(0.5 * (traj.velocity[1:, :2] + traj.velocity[:-1, :2]) * dt[:, None], axis=0)
    np.testing.assert_allclose(traj.position[1:, :2], trap, atol=1e-5)
    # k.x reproduces alpha up to the integration constant
    kx = pf.k0 * (traj.position[:, 0] - traj.position[:, 1])
    np.testing.assert_allclose(kx - kx[0], pf.alpha(traj.tau) - pf.alpha(traj.tau[0]), atol=1e-12)


def test_reconstruct_rest_and_constant():
    traj = reconstruct_trajectory(PhaseFunction.inertial(1.0), 0.0, 3.0, 7)
    np.testing.assert_array_equal(traj.velocity[:, :2], np.tile([1.0, 0.0], (7, 1)))
    assert check_timelike(traj) == 0.0
    traj = reconstruct_trajectory(make_piecewise_alpha(2, 2, 2, 1, 2), -1.0, 4.0, 50)
    assert np.ptp(traj.velocity, axis=0).max() == 0.0


def test_null_velocity_flagged(rest):
    traj = Trajectory(rest, np.array([0.0]), np.zeros((1, 4)), np.array([[1.0, 1.0, 0.0, 0.0]]))
    assert check_timelike(traj) == 1.0


@pytest.mark.parametrize("n", [0, 1, 2.5])
def test_reconstruct_rejects_samples(n, family):
    with pytest.raises(ValidationError) as exc:
        reconstruct_trajectory(family, 0.0, 1.0, n)
    assert exc.value.field == "n_samples"


def test_reconstruct_rejects_window(family):
    with pytest.raises(ValidationError):
        reconstruct_trajectory(family, 1.0, 1.0, 10)


@settings(max_examples=60, deadline=None)
@given(pf=families())
def test_reconstruction_is_physical(pf):
    traj = reconstruct_trajectory(pf, -3.0, pf.knots[-1] + 3.0, 257)
    assert check_timelike(traj) < 1e-10
    assert check_phase_consistency(traj) < 1e-10
    assert np.all(pf.alpha_dot(traj.tau) > 0)


@settings(max_examples=60, deadline=None)
@given(pf=families())
def test_json_round_trip(pf):
    d = json.loads(json.dumps(pf.to_dict()))
    assert set(d) == {"k0", "s0", "s1", "s2", "T1", "T2"}
    assert PhaseFunction.from_dict(d) == pf


def test_generic_round_trip():
    pf = PhaseFunction(1.0, ((0, 1, 1, 2), (1, 2, 2, 3), (2, 4, 3, 1)), 1.0, 1.0, 0.25)
    assert PhaseFunction.from_dict(pf.to_dict()) == pf


def test_from_dict_missing_field():
    with pytest.raises(ValidationError) as exc:
        PhaseFunction.from_dict({"k0": 1, "s0": 1, "s1": 1, "s2": 1, "T1": 1})
    assert exc.value.field == "T2"


def test_csv_export(tmp_path, family):
    traj = reconstruct_trajectory(family, 0.0, 4.0, 5)
    path = tmp_path / "t.csv"
    traj.to_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "tau,t,x,u0,u1"
    assert len(lines) == 6
    assert [float(v) for v in lines[-1].split(",")][0] == 4.0
