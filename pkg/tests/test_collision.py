"""Exchange rules: direct/inverse maps, Jacobian, energy bookkeeping."""

import numpy as np
import pytest

from opiniongas.collision import (
    CollisionParams,
    collide_direct,
    collide_inverse,
    energy_change,
    jacobian,
    sample_delta,
)


def test_sample_delta_examples():
    assert sample_delta(5.0, 0.5) == 0.0
    assert sample_delta(5.0, 1.0) == 5.0
    assert sample_delta(1.0, 0.25) == -0.5
    with pytest.raises(ValueError):
        sample_delta(1.0, 1.5)


def test_params_validation():
    with pytest.raises(ValueError):
        CollisionParams(lambda_=1.5)
    with pytest.raises(ValueError):
        CollisionParams(lambda_=0.5, delta_amp=-1.0)


def test_direct_examples():
    out = collide_direct(1.0, -1.0, CollisionParams(0.0), 0.0)
    assert out.p_out == 0.0 and out.pstar_out == 0.0

    out = collide_direct(1.0, -1.0, CollisionParams(1.0), 0.0)
    assert out.p_out == -1.0 and out.pstar_out == 1.0
    assert out.energy_change == 0.0

    # full compromise with a kick: both at midpoint +- delta/2
    out = collide_direct(1.0, -1.0, CollisionParams(0.0), 0.5)
    assert out.p_out == pytest.approx(0.25, abs=1e-15)
    assert out.pstar_out == pytest.approx(-0.25, abs=1e-15)
    assert out.p_out + out.pstar_out == pytest.approx(0.0, abs=1e-15)


def test_momentum_conservation_property():
    rng = np.random.default_rng(10)
    p = rng.standard_normal(100_000) * 5.0
    q = rng.standard_normal(100_000) * 5.0
    lam = rng.random(100_000)
    delta = rng.uniform(-3, 3, 100_000)
    h = 0.5 * (1.0 + lam) * (q - p + delta)
    p_out, q_out = p + h, q - h
    scale = np.maximum(1.0, np.abs(p) + np.abs(q))
    assert np.max(np.abs((p_out + q_out) - (p + q)) / scale) < 1e-12


def test_direct_is_affine():
    # superposition in (p, pstar, delta) at fixed lambda
    params = CollisionParams(0.37)
    rng = np.random.default_rng(11)
    for _ in range(200):
        x1 = rng.standard_normal(3) * 2
        x2 = rng.standard_normal(3) * 2
        a = rng.random()
        mix = a * x1 + (1 - a) * x2
        out_mix = collide_direct(mix[0], mix[1], params, mix[2])
        o1 = collide_direct(*x1[:2], params, x1[2])
        o2 = collide_direct(*x2[:2], params, x2[2])
        assert out_mix.p_out == pytest.approx(a * o1.p_out + (1 - a) * o2.p_out, abs=1e-12)
        assert out_mix.pstar_out == pytest.approx(
            a * o1.pstar_out + (1 - a) * o2.pstar_out, abs=1e-12
        )


def test_inverse_examples():
    pin = collide_inverse(1.0, -1.0, CollisionParams(1.0), 0.0)
    assert pin == (-1.0, 1.0)
    pin = collide_inverse(1.0, 0.0, CollisionParams(0.5), 0.0)
    assert pin[0] == pytest.approx(-0.5, abs=1e-15)
    assert pin[1] == pytest.approx(1.5, abs=1e-15)
    with pytest.raises(ZeroDivisionError):
        collide_inverse(1.0, -1.0, CollisionParams(0.0), 0.0)


def test_inverse_round_trip_property():
    rng = np.random.default_rng(12)
    for _ in range(10_000):
        p, q = rng.standard_normal(2) * 4.0
        lam = rng.uniform(1e-3, 1.0)
        params = CollisionParams(lam)
        pin, qin = collide_inverse(p, q, params, 0.0)
        out = collide_direct(pin, qin, params, 0.0)
        scale = max(1.0, abs(p), abs(q))
        assert abs(out.p_out - p) / scale < 1e-12
        assert abs(out.pstar_out - q) / scale < 1e-12


def test_jacobian_examples():
    assert jacobian(CollisionParams(0.5)) == pytest.approx(0.5, rel=1e-15)
    assert jacobian(CollisionParams(1.0)) == pytest.approx(1.0, rel=1e-15)
    # lambda=1 with d(delta)/dpstar - d(delta)/dp = 1: |1 + 1|^{-1}
    assert jacobian(CollisionParams(1.0), 0.0, 1.0) == pytest.approx(0.5, rel=1e-15)
    with pytest.raises(ZeroDivisionError):
        jacobian(CollisionParams(0.0))
    with pytest.raises(ZeroDivisionError):
        # bracket 1/L + (1/2)(1+1/L)(x) = 0  ->  x = -2/(1+L)
        jacobian(CollisionParams(0.5), 2.0 / 1.5, 0.0)


def test_energy_change_elastic_swap_zero():
    out = collide_direct(2.0, -3.0, CollisionParams(1.0), 0.0)
    assert out.energy_change == 0.0
    assert energy_change((2.0, -3.0), (out.p_out, out.pstar_out)) == 0.0


def test_energy_change_nonrelativistic_small_kick():
    # elastic + small kick: pointwise dE = delta*(pstar - p) + delta^2 to
    # leading order; the kick-symmetrized average is delta^2 >= 0
    params = CollisionParams(1.0)
    rng = np.random.default_rng(13)
    for _ in range(500):
        p, q = rng.uniform(-1e-3, 1e-3, 2)
        d = rng.uniform(-1e-3, 1e-3)
        de_plus = collide_direct(p, q, params, d).energy_change
        de_minus = collide_direct(p, q, params, -d).energy_change
        assert de_plus == pytest.approx(d * (q - p) + d * d, abs=5e-12)
        sym = 0.5 * (de_plus + de_minus)
        assert -1e-9 <= sym <= d * d * (1.0 + 1e-3) + 1e-15  # float noise on O(1) energies
    d = 1e-3
    sym = 0.5 * (
        collide_direct(1e-3, -1e-3, params, d).energy_change
        + collide_direct(1e-3, -1e-3, params, -d).energy_change
    )
    assert sym == pytest.approx(d * d, rel=5e-3)
    assert sym > 0.0


def test_energy_change_relativistic_sign_indefinite():
    # at relativistic momenta an elastic exchange with a kick can go either way
    assert collide_direct(2.0, -2.0, CollisionParams(1.0), 0.5).energy_change < 0.0
    assert collide_direct(2.0, -2.0, CollisionParams(1.0), -0.5).energy_change > 0.0
