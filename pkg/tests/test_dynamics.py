"""Impulse equations: field algebra, conserved quantities, equilibria."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from uvstab import dynamics as dy
from uvstab.integrate import IntegratorConfig, integrate

WORKED = dy.VehicleParams(I=(1.0, 2.0, 3.0), M=(1.0, 2.0, 3.0))


def test_params_require_positive_entries():
    with pytest.raises(ValueError, match="positive"):
        dy.VehicleParams(I=(0.0, 1.0, 2.0), M=(1.0, 1.0, 1.0))
    with pytest.raises(ValueError, match="positive"):
        dy.VehicleParams(I=(1.0, 1.0, 2.0), M=(1.0, -1.0, 1.0))
    with pytest.raises(ValueError, match="3-vector"):
        dy.VehicleParams(I=(1.0, 1.0), M=(1.0, 1.0, 1.0))


def test_hamiltonian_value():
    params = dy.VehicleParams(I=(1.0, 2.0, 3.0), M=(4.0, 5.0, 6.0))
    s = dy.PoissonState(pi=(1.0, 2.0, 3.0), p=(1.0, 1.0, 1.0))
    # 0.5*(1 + 4/2 + 9/3) + 0.5*(1/4 + 1/5 + 1/6)
    assert_allclose(dy.hamiltonian(s, params), 3.0 + 37.0 / 120.0, rtol=1e-15)


def test_field_annihilates_energy_and_casimirs_pointwise():
    rng = np.random.default_rng(3)
    for _ in range(100):
        params = dy.VehicleParams(I=rng.uniform(0.3, 3, 3), M=rng.uniform(0.3, 3, 3))
        s = dy.PoissonState(rng.normal(size=3), rng.normal(size=3))
        dpi, dp = dy.vector_field(s, params)
        omega, v = s.pi / params.I, s.p / params.M
        scale = max(1.0, np.abs(dpi).max(), np.abs(dp).max())
        assert abs(np.dot(omega, dpi) + np.dot(v, dp)) < 1e-13 * scale
        assert abs(np.dot(s.p, dp)) < 1e-13 * scale
        assert abs(np.dot(dpi, s.p) + np.dot(s.pi, dp)) < 1e-13 * scale


def test_field_fn_matches_vector_field():
    rng = np.random.default_rng(5)
    f = dy.field_fn(WORKED)
    for _ in range(50):
        y = rng.normal(size=6)
        dpi, dp = dy.vector_field(dy.PoissonState(y[:3], y[3:]), WORKED)
        # Same values up to summation order inside the cross products.
        assert_allclose(f(0.0, y), np.concatenate([dpi, dp]), rtol=0, atol=1e-15)


def test_equilibrium_family_is_fixed():
    eq = dy.equilibrium(3.0, WORKED)
    assert_allclose(eq.state.pi, [0.0, 0.0, 3.0])
    assert_allclose(eq.state.p, 0.0)
    assert_allclose(eq.generator_omega, [0.0, 0.0, 1.0])
    dpi, dp = dy.vector_field(eq.state, WORKED)
    assert np.all(dpi == 0.0) and np.all(dp == 0.0)


def test_casimirs_reporting():
    c = dy.casimirs(dy.PoissonState((1.0, 2.0, 3.0), (0.0, 0.0, 0.0)))
    assert c.p_norm == 0.0 and c.pi_dot_p == 0.0 and c.pi_norm_conserved
    assert_allclose(c.pi_norm, np.sqrt(14.0))
    assert not dy.casimirs(dy.PoissonState((1.0, 2.0, 3.0), (1e-6, 0.0, 0.0))).pi_norm_conserved


def test_trajectory_conserves_casimirs_and_energy():
    rng = np.random.default_rng(7)
    y0 = rng.normal(size=6)
    traj = integrate(dy.field_fn(WORKED), y0, (0.0, 10.0), IntegratorConfig())
    values = np.array(
        [
            [
                np.linalg.norm(y[3:]),
                np.dot(y[:3], y[3:]),
                dy.hamiltonian(dy.PoissonState(y[:3], y[3:]), WORKED),
            ]
            for y in traj.states
        ]
    )
    drift = np.abs(values - values[0]).max(axis=0) / np.abs(values[0])
    assert drift.max() < 1e-8


def test_spin_axis_norm_conserved_only_on_zero_leaf():
    on = integrate(
        dy.field_fn(WORKED),
        np.array([1.0, 0.5, 2.0, 0.0, 0.0, 0.0]),
        (0.0, 30.0),
        IntegratorConfig(),
    )
    norms = np.linalg.norm(on.states[:, :3], axis=1)
    assert np.abs(norms - norms[0]).max() / norms[0] < 1e-8
    off = integrate(
        dy.field_fn(dy.VehicleParams(I=(1, 2, 3), M=(0.9, 1.7, 2.8))),
        np.array([1.0, 0.5, 2.0, 0.5, 0.2, 0.1]),
        (0.0, 30.0),
        IntegratorConfig(),
    )
    norms = np.linalg.norm(off.states[:, :3], axis=1)
    assert np.abs(norms - norms[0]).max() / norms[0] > 1e-6
