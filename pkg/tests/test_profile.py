import numpy as np
import pytest

from pucci_radial import InvalidArgumentError, RadialProfile, SolverControls, integrate, rescale


def sine_profile(lo=0.0, hi=np.pi):
    return RadialProfile.from_functions(np.sin, np.cos, lo, hi)


def test_function_profile_evaluation():
    prof = sine_profile()
    u, du = prof(np.array([0.0, np.pi / 2]))
    assert np.allclose(u, [0.0, 1.0]) and np.allclose(du, [1.0, 0.0])
    assert prof.domain == (0.0, np.pi)
    r, u, du = prof.sample(11)
    assert r[0] == 0.0 and r[-1] == np.pi and len(r) == 11


def test_out_of_range_rejected():
    prof = sine_profile()
    with pytest.raises(InvalidArgumentError):
        prof.u(4.0)


def test_negated_and_restricted():
    prof = sine_profile().negated().restricted(1.0, 2.0)
    assert prof.domain == (1.0, 2.0)
    assert prof.u(1.5) == pytest.approx(-np.sin(1.5))
    assert prof.du(1.5) == pytest.approx(-np.cos(1.5))


def test_scaling_law_values():
    p, q = 3.0, 2.0
    prof = sine_profile().scaled(q, p)
    assert prof.domain == pytest.approx((0.0, np.pi / q))
    r = 0.4
    assert prof.u(r) == pytest.approx(q ** (2 / (p - 1)) * np.sin(q * r), rel=1e-15)
    assert prof.du(r) == pytest.approx(q ** ((p + 1) / (p - 1)) * np.cos(q * r), rel=1e-15)


def test_rescale_identity_and_roundtrip():
    p = 3.0
    prof = sine_profile()
    same = rescale(prof, np.pi, p)
    r = np.linspace(0.0, np.pi, 50)
    assert np.array_equal(same.u(r), prof.u(r))
    there = rescale(prof, 1.0, p)
    back = rescale(there, np.pi, p)
    assert np.allclose(back.u(r), prof.u(r), rtol=1e-12, atol=1e-15)
    assert there.domain[1] == 1.0
    with pytest.raises(InvalidArgumentError):
        rescale(prof, 0.0, p)


def test_rescale_moves_zeros_affinely():
    prof = RadialProfile.from_functions(lambda r: np.sin(3 * r), lambda r: 3 * np.cos(3 * r), 0.0, np.pi)
    out = rescale(prof, 2.0, 3.0)
    ratio = 2.0 / np.pi
    for z in (np.pi / 3, 2 * np.pi / 3):
        assert abs(out.u(z * ratio)) <= 1e-14


def test_trajectory_profile_matches_dense_output():
    tr = integrate(lambda r, y: (y[1], -y[0]), 0.0, [0.0, 1.0], SolverControls(r_max=3.0))
    prof = RadialProfile.from_trajectory(tr)
    r = np.linspace(0.0, 3.0, 31)
    assert np.array_equal(np.column_stack(prof(r)), tr.dense(r))
    assert np.allclose(prof.u(r), np.sin(r), atol=1e-9)
