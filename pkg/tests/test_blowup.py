"""Sphere inflation of the zero-impulse leaf: charts, form, symmetry."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from uvstab import blowup as bu
from uvstab import dynamics as dy

PARAMS = dy.VehicleParams(I=(1.0, 2.0, 3.0), M=(0.8, 1.6, 2.9))


def random_blown(rng, a=None):
    w = rng.normal(size=3)
    w /= np.linalg.norm(w)
    wdot = rng.normal(size=3)
    wdot -= np.dot(w, wdot) * w
    if a is None:
        a = float(abs(rng.normal()))
    return bu.BlownUpState(w, wdot, a, float(rng.normal()))


def random_tangent(s, rng):
    dw = rng.normal(size=3)
    dw -= np.dot(s.w, dw) * s.w
    dwdot = rng.normal(size=3)
    dwdot -= (np.dot(s.w, dwdot) + np.dot(dw, s.wdot)) * s.w
    return bu.TangentPair(dw, dwdot)


def test_state_validation():
    with pytest.raises(ValueError, match="unit"):
        bu.BlownUpState((1.1, 0.0, 0.0), (0.0, 1.0, 0.0), 1.0, 0.0)
    with pytest.raises(ValueError, match="tangent"):
        bu.BlownUpState((1.0, 0.0, 0.0), (1.0, 0.0, 0.0), 1.0, 0.0)
    with pytest.raises(ValueError, match="nonnegative"):
        bu.BlownUpState((1.0, 0.0, 0.0), (0.0, 1.0, 0.0), -0.5, 0.0)


def test_blow_down_formula():
    s = bu.BlownUpState((0.0, 0.0, 1.0), (1.0, 0.0, 0.0), 2.0, 5.0)
    x = bu.blow_down(s)
    assert_allclose(x.pi, [1.0, 0.0, 5.0])
    assert_allclose(x.p, [0.0, 0.0, 2.0])


def test_blow_up_undefined_near_zero_impulse():
    with pytest.raises(bu.BlowUpUndefinedError):
        bu.blow_up(dy.PoissonState((1.0, 2.0, 3.0), (0.0, 0.0, 0.0)))
    with pytest.raises(bu.BlowUpUndefinedError):
        bu.blow_up(dy.PoissonState((1.0, 2.0, 3.0), (1e-11, 0.0, 0.0)))


def test_round_trips():
    rng = np.random.default_rng(11)
    for _ in range(200):
        s = random_blown(rng, a=float(rng.uniform(1e-6, 3.0)))
        t = bu.blow_up(bu.blow_down(s), tol=0.0)
        assert_allclose(t.w, s.w, atol=1e-13)
        assert_allclose(t.wdot, s.wdot, atol=1e-13 * max(1, np.abs(s.wdot).max()))
        assert_allclose([t.a, t.gamma], [s.a, s.gamma], rtol=1e-13, atol=1e-13)
        x = dy.PoissonState(rng.normal(size=3), rng.normal(size=3))
        y = bu.blow_down(bu.blow_up(x))
        assert_allclose(y.pi, x.pi, rtol=0, atol=1e-13 * max(1, np.abs(x.pi).max()))
        assert_allclose(y.p, x.p, rtol=0, atol=1e-13 * max(1, np.abs(x.p).max()))


def test_field_pushes_forward_to_impulse_field():
    rng = np.random.default_rng(13)
    for _ in range(100):
        s = random_blown(rng, a=float(rng.uniform(1e-3, 1.0)))
        dw, dwdot = bu.blown_vector_field(s, PARAMS)
        dpi, dp = dy.vector_field(bu.blow_down(s), PARAMS)
        scale = max(1.0, np.abs(dpi).max(), np.abs(dp).max())
        assert_allclose(dwdot + s.gamma * dw, dpi, rtol=0, atol=1e-12 * scale)
        assert_allclose(s.a * dw, dp, rtol=0, atol=1e-12 * scale)


def test_hamiltonian_split():
    rng = np.random.default_rng(17)
    for _ in range(100):
        s = random_blown(rng)
        h = bu.blown_hamiltonian(s, PARAMS)
        assert_allclose(h.total, h.H0 + s.a**2 * h.H1, rtol=1e-15)
        assert_allclose(
            h.total, dy.hamiltonian(bu.blow_down(s), PARAMS), rtol=1e-13, atol=1e-13
        )
    # H1 depends on w only.
    s1 = bu.BlownUpState((0.0, 0.0, 1.0), (1.0, 0.0, 0.0), 0.5, 2.0)
    s2 = bu.BlownUpState((0.0, 0.0, 1.0), (0.0, -2.0, 0.0), 0.5, -1.0)
    assert bu.blown_hamiltonian(s1, PARAMS).H1 == bu.blown_hamiltonian(s2, PARAMS).H1


def test_form_closed_expression_and_antisymmetry():
    gamma = 1.7
    s = bu.BlownUpState((0.0, 0.0, 1.0), (0.3, -0.2, 0.0), 0.4, gamma)
    e1, e2 = np.array([1.0, 0.0, 0.0]), np.array([0.0, 1.0, 0.0])
    frame = [
        bu.TangentPair(e1, -np.dot(e1, s.wdot) * s.w),
        bu.TangentPair(e2, -np.dot(e2, s.wdot) * s.w),
        bu.TangentPair(np.zeros(3), e1),
        bu.TangentPair(np.zeros(3), e2),
    ]
    mat = np.array([[bu.symplectic_form(s, a, b) for b in frame] for a in frame])
    expected = np.array(
        [
            [0.0, -gamma, 0.0, -1.0],
            [gamma, 0.0, 1.0, 0.0],
            [0.0, -1.0, 0.0, 0.0],
            [1.0, 0.0, 0.0, 0.0],
        ]
    )
    assert_allclose(mat, expected, atol=1e-15)
    rng = np.random.default_rng(19)
    for _ in range(50):
        t = random_blown(rng)
        d1, d2 = random_tangent(t, rng), random_tangent(t, rng)
        assert abs(bu.symplectic_form(t, d1, d2) + bu.symplectic_form(t, d2, d1)) < 1e-12


def test_form_rejects_nontangent_arguments():
    s = bu.BlownUpState((0.0, 0.0, 1.0), (1.0, 0.0, 0.0), 0.0, 0.0)
    bad = bu.TangentPair((0.0, 0.0, 1.0), (0.0, 0.0, 0.0))  # dw not tangent
    good = bu.TangentPair((0.0, 1.0, 0.0), (0.0, 0.0, 0.0))
    with pytest.raises(ValueError, match="tangent"):
        bu.symplectic_form(s, bad, good)


def test_momentum_value_and_degeneracy():
    s = bu.BlownUpState((0.0, 0.0, 1.0), (3.0, 4.0, 0.0), 0.7, 2.0)
    j = bu.so2_momentum(s)
    assert_allclose(j.value, -np.sqrt(29.0), rtol=1e-15)
    assert not j.degenerate
    assert bu.so2_momentum(bu.BlownUpState((0, 0, 1.0), (0, 0, 0), 0.0, 0.0)).degenerate


def test_circle_action_preserves_energy_and_momentum():
    rng = np.random.default_rng(23)
    for _ in range(50):
        s = random_blown(rng)
        if bu.so2_momentum(s).degenerate:
            continue
        phi = float(rng.uniform(-6, 6))
        r = bu.so2_act(phi, s)
        assert_allclose(np.linalg.norm(r.w), 1.0, rtol=1e-12)
        assert abs(np.dot(r.w, r.wdot)) < 1e-12
        assert_allclose(bu.so2_momentum(r).value, bu.so2_momentum(s).value, rtol=1e-12)
        # The rotation axis is along wdot + gamma w, which the rotation
        # fixes, so the leading energy H0 is exactly invariant.
        assert_allclose(
            bu.blown_hamiltonian(r, PARAMS).H0,
            bu.blown_hamiltonian(s, PARAMS).H0,
            rtol=1e-12,
        )
        full = bu.so2_act(2.0 * np.pi, s)
        assert_allclose(full.w, s.w, atol=1e-12)
        assert_allclose(full.wdot, s.wdot, atol=1e-12 * max(1, np.abs(s.wdot).max()))


def test_generator_is_derivative_of_action():
    rng = np.random.default_rng(29)
    h = 1e-6
    for _ in range(50):
        s = random_blown(rng)
        if bu.so2_momentum(s).degenerate:
            continue
        gen = bu.so2_generator(s)
        fp, fm = bu.so2_act(h, s), bu.so2_act(-h, s)
        assert_allclose(gen.dw, (fp.w - fm.w) / (2 * h), atol=1e-8)
        assert_allclose(gen.dwdot, (fp.wdot - fm.wdot) / (2 * h), atol=1e-8)


def test_relative_equilibrium_field_is_multiple_of_generator():
    alpha = 2.0
    c_xi = -alpha / PARAMS.I[2]
    for theta in (0.3, np.pi / 2, 2.4):
        s = bu.blown_relative_equilibrium(alpha, theta)
        assert_allclose(s.wdot + s.gamma * s.w, [0.0, 0.0, alpha], atol=1e-14)
        assert_allclose(s.gamma**2 + np.dot(s.wdot, s.wdot), alpha**2, rtol=1e-13)
        dw, dwdot = bu.blown_vector_field(s, PARAMS)
        gen = bu.so2_generator(s)
        assert_allclose(dw, c_xi * gen.dw, atol=1e-14)
        assert_allclose(dwdot, c_xi * gen.dwdot, atol=1e-14)
    with pytest.raises(ValueError, match="nonzero"):
        bu.blown_relative_equilibrium(0.0, 0.5)
    with pytest.raises(ValueError, match="theta"):
        bu.blown_relative_equilibrium(1.0, -0.1)


def test_reduced_form_closed_expression():
    pi = np.array([0.0, 0.0, 2.0])
    assert_allclose(
        bu.reduced_leaf_form(pi, (1.0, 0.0, 0.0), (0.0, 1.0, 0.0)), -0.5, rtol=1e-15
    )
    with pytest.raises(ValueError, match="pi = 0"):
        bu.reduced_leaf_form((0.0, 0.0, 0.0), (1, 0, 0), (0, 1, 0))


def test_leaf_lifts_invert_projection():
    rng = np.random.default_rng(31)
    for _ in range(100):
        pi = rng.normal(size=3) * rng.uniform(0.5, 3.0)
        n = np.linalg.norm(pi)
        gamma = float(rng.uniform(-0.9, 0.9)) * n
        s = bu.leaf_point_lift(pi, gamma)
        assert_allclose(s.wdot + s.gamma * s.w, pi, atol=1e-12 * max(1, n))
        assert s.a == 0.0 and s.gamma == gamma
        dpi = rng.normal(size=3)
        dpi -= np.dot(dpi, pi) / n**2 * pi  # tangent to the sphere |pi| = n
        d = bu.leaf_tangent_lift(s, pi, dpi)
        assert_allclose(d.dwdot + gamma * d.dw, dpi, atol=1e-11 * max(1, n))
    with pytest.raises(ValueError, match="gamma"):
        bu.leaf_point_lift((0.0, 0.0, 1.0), 2.0)


def test_lifted_form_matches_reduced_form():
    rng = np.random.default_rng(37)
    for _ in range(100):
        pi = rng.normal(size=3) * rng.uniform(0.5, 3.0)
        n = np.linalg.norm(pi)
        gamma = float(rng.uniform(-0.9, 0.9)) * n
        s = bu.leaf_point_lift(pi, gamma)
        ds = []
        for _ in range(2):
            dpi = rng.normal(size=3)
            dpi -= np.dot(dpi, pi) / n**2 * pi
            ds.append((dpi, bu.leaf_tangent_lift(s, pi, dpi)))
        lhs = bu.symplectic_form(s, ds[0][1], ds[1][1])
        rhs = bu.reduced_leaf_form(pi, ds[0][0], ds[1][0])
        assert abs(lhs - rhs) <= 1e-10 * max(1.0, abs(rhs))


def test_projection_restores_constraints():
    y = np.array([1.02, 0.01, -0.03, 0.4, 0.5, 0.6])
    z = bu.project_state_vector(y)
    assert abs(np.linalg.norm(z[:3]) - 1.0) < 1e-15
    assert abs(np.dot(z[:3], z[3:])) < 1e-15
    assert_allclose(bu.project_state_vector(z), z, rtol=0, atol=1e-15)
