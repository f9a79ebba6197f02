import numpy as np
import pytest

from hjplatoon import ActuationBounds, IdmParams, desired_gap, follower_speed, idm_accel


def params(**kw):
    defaults = dict(a=1.5, b=1.5, delta=4.0, v0=30.0, s0=0.0,
                    t_min=0.0, t_max=2.0, v_ego_nominal=20.0)
    defaults.update(kw)
    return IdmParams(**defaults)


BOUNDS = ActuationBounds()


def z4(x_g2, v_g2):
    return np.array([20.0, 0.0, x_g2, v_g2])


def test_follower_speed_equal_speeds():
    assert follower_speed(z4(10.0, 0.0), params()) == 20.0


def test_follower_speed_closing():
    assert follower_speed(z4(10.0, -3.0), params()) == 23.0


def test_follower_speed_clamped_at_standstill():
    assert follower_speed(z4(10.0, 10.0), params(v_ego_nominal=5.0)) == 0.0


def test_desired_gap_pure_headway():
    # v3 = 20, no closing term: s* = 20 * T
    assert desired_gap(z4(10.0, 0.0), 1.0, params()) == 20.0


def test_desired_gap_stationary_follower():
    p = params()
    z = z4(10.0, 25.0)  # v3 = max(0, 20 - 25) = 0
    for t in (0.0, 1.0, 2.0):
        assert desired_gap(z, t, p) == 0.0


def test_desired_gap_negative_branch_clamped():
    # v3 = 20, v_g2 = +6, 2*sqrt(ab) = 3: 20*1 + 20*(-6)/3 = -20 -> 0
    p = params(v_ego_nominal=26.0)
    assert desired_gap(z4(10.0, 6.0), 1.0, p) == 0.0


def test_desired_gap_at_least_s0():
    p = params(s0=2.0)
    rng = np.random.default_rng(5)
    for _ in range(200):
        z = z4(rng.uniform(-5, 40), rng.uniform(-12, 12))
        t = rng.uniform(0.0, 2.0)
        assert desired_gap(z, t, p) >= 2.0
    assert desired_gap(z4(10.0, 25.0), 1.0, p) == 2.0


def test_accel_free_road_is_max_accel():
    # stationary follower: both bracket terms vanish, raw g = a -> dist_hi clamp
    assert idm_accel(z4(10.0, 25.0), 1.0, params(), BOUNDS) == 1.5


def test_accel_hand_value():
    # v3=20, v0=30, delta=4, T=1, x_g2=20: g = 1.5*(1 - (2/3)^4 - 1)
    got = idm_accel(z4(20.0, 0.0), 1.0, params(), BOUNDS)
    expected = 1.5 * (1.0 - (2.0 / 3.0) ** 4 - 1.0)
    assert got == pytest.approx(expected, abs=1e-12)
    assert got == pytest.approx(-0.2963, abs=1e-4)


def test_accel_tiny_gap_clamps_to_full_braking():
    assert idm_accel(z4(1.0, 0.0), 1.0, params(), BOUNDS) == -1.5


def test_accel_nonpositive_gap_brakes():
    p = params()
    assert idm_accel(z4(0.0, 0.0), 1.0, p, BOUNDS) == -1.5
    assert idm_accel(z4(-3.0, 5.0), 0.5, p, BOUNDS) == -1.5


def test_accel_always_within_disturbance_bounds():
    p = params(s0=2.0)
    rng = np.random.default_rng(17)
    zs = np.stack([
        rng.uniform(-20, 60, size=20000),
        rng.uniform(-15, 15, size=20000),
        rng.uniform(-20, 60, size=20000),
        rng.uniform(-15, 15, size=20000),
    ], axis=-1)
    ts = rng.uniform(0.0, 2.0, size=20000)
    out = idm_accel(zs, ts, p, BOUNDS)
    assert np.isfinite(out).all()
    assert (out >= BOUNDS.dist_lo).all()
    assert (out <= BOUNDS.dist_hi).all()


def test_accel_nonincreasing_in_reaction_time():
    p = params()
    rng = np.random.default_rng(23)
    ts = np.linspace(0.0, 2.0, 21)
    for _ in range(100):
        z = z4(rng.uniform(1.0, 40.0), rng.uniform(-10, 10))
        vals = idm_accel(z, ts, p, BOUNDS)
        assert (np.diff(vals) <= 1e-12).all()


def test_accel_nondecreasing_in_rear_gap():
    p = params()
    rng = np.random.default_rng(29)
    xs = np.linspace(0.5, 40.0, 40)
    for _ in range(100):
        v_g2 = rng.uniform(-10, 10)
        t = rng.uniform(0.0, 2.0)
        zs = np.stack([np.full(40, 20.0), np.zeros(40), xs, np.full(40, v_g2)],
                      axis=-1)
        vals = idm_accel(zs, t, p, BOUNDS)
        assert (np.diff(vals) >= -1e-12).all()


def test_params_validation():
    with pytest.raises(ValueError):
        IdmParams(a=0.0)
    with pytest.raises(ValueError):
        IdmParams(delta=0.5)
    with pytest.raises(ValueError):
        IdmParams(t_min=2.0, t_max=1.0)
    with pytest.raises(ValueError):
        IdmParams(s0=-1.0)
