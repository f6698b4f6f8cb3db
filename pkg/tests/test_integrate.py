"""Adaptive integration, dense output, and section-crossing location."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from uvstab import blowup as bu
from uvstab import dynamics as dy
from uvstab.integrate import (
    IntegrationError,
    IntegratorConfig,
    find_crossings,
    integrate,
)


def oscillator(t, y):
    return np.array([y[1], -y[0]])


def test_config_validation():
    with pytest.raises(ValueError, match="tolerances"):
        IntegratorConfig(rel_tol=0.0)
    with pytest.raises(ValueError, match="max_step"):
        IntegratorConfig(max_step=-1.0)
    assert IntegratorConfig().max_step == np.inf


def test_oscillator_accuracy():
    traj = integrate(oscillator, np.array([1.0, 0.0]), (0.0, 10.0), IntegratorConfig())
    ts = np.linspace(0.0, 10.0, 200)
    states = traj.eval(ts)
    assert_allclose(states[:, 0], np.cos(ts), atol=1e-7)
    assert_allclose(states[:, 1], -np.sin(ts), atol=1e-7)
    assert traj.t_final == 10.0


def test_t_span_must_increase():
    with pytest.raises(ValueError, match="increasing"):
        integrate(oscillator, np.array([1.0, 0.0]), (1.0, 0.0), IntegratorConfig())


def test_dense_eval_shapes_and_node_snapping():
    traj = integrate(oscillator, np.array([1.0, 0.0]), (0.0, 5.0), IntegratorConfig())
    single = traj.eval(traj.times[3])
    assert single.shape == (2,)
    assert np.array_equal(single, traj.states[3])
    many = traj.eval(traj.times)
    assert many.shape == traj.states.shape
    assert np.array_equal(many, traj.states)


def test_divergent_field_raises():
    with pytest.raises(IntegrationError):
        integrate(
            lambda t, y: y**2, np.array([1.0]), (0.0, 2.0), IntegratorConfig()
        )


def test_constraint_projection_keeps_unit_sphere():
    params = dy.VehicleParams(I=(1.0, 2.0, 3.0), M=(1.0, 2.0, 3.0))
    y0 = np.array([1.0, 0.0, 0.0, 0.0, 0.5, 0.2])
    traj = integrate(
        bu.blown_field_fn(params, 0.4, 0.8),
        y0,
        (0.0, 20.0),
        IntegratorConfig(constraint_projection=True),
    )
    w = traj.states[:, :3]
    assert np.abs(np.linalg.norm(w, axis=1) - 1.0).max() < 1e-12
    assert np.abs(np.einsum("ij,ij->i", w, traj.states[:, 3:])).max() < 1e-12


def test_crossings_direction_filtering():
    traj = integrate(oscillator, np.array([1.0, 0.0]), (0.0, 25.0), IntegratorConfig())
    # y[0] = cos t: descending zeros at pi/2 + 2k pi, ascending at 3pi/2 + 2k pi.
    down = find_crossings(traj, lambda y: y[0], direction=-1)
    up = find_crossings(traj, lambda y: y[0], direction=1)
    both = find_crossings(traj, lambda y: y[0], direction=0)
    assert_allclose(
        [c.t for c in down], np.pi / 2 + 2 * np.pi * np.arange(4), atol=1e-10
    )
    assert_allclose(
        [c.t for c in up], 3 * np.pi / 2 + 2 * np.pi * np.arange(4), atol=1e-10
    )
    assert len(both) == len(down) + len(up)
    for c in down:
        assert abs(c.state[0]) < 1e-10
        assert c.state[1] < 0.0


def test_start_on_section_not_counted():
    traj = integrate(oscillator, np.array([0.0, 1.0]), (0.0, 7.0), IntegratorConfig())
    # y[0] = sin t ascends through zero at t = 0 and t = 2 pi; only the
    # second is a return.
    up = find_crossings(traj, lambda y: y[0], direction=1)
    assert len(up) == 1
    assert_allclose(up[0].t, 2 * np.pi, atol=1e-10)


def test_crossing_times_strictly_increase():
    traj = integrate(oscillator, np.array([1.0, 0.0]), (0.0, 60.0), IntegratorConfig())
    ts = np.array([c.t for c in find_crossings(traj, lambda y: y[0], direction=0)])
    assert ts.size == 19
    assert np.all(np.diff(ts) > 1.0)
