"""Numerical verification suite: every module's invariants, as runnable checks.

Each check is a no-argument callable returning a :class:`CheckResult`
with the worst measured deviation and the tolerance it was held to.
The `verify` CLI subcommand runs them all and reports pass/fail; tests
reuse individual checks.  Checks are deterministic (fixed seeds).

Dual-route checks deliberately compute the same quantity two ways
(closed form vs finite differences, blown-up vs original, measured vs
predicted) so that a sign or factor slip in either route is caught.
"""

from __future__ import annotations

from typing import Callable, NamedTuple

import numpy as np

from . import blowup as bu
from . import dynamics as dy
from . import normalform as nf
from . import poincare as pc
from .integrate import IntegratorConfig, find_crossings, integrate

__all__ = ["CheckResult", "CHECKS", "run"]


class CheckResult(NamedTuple):
    name: str
    passed: bool
    measured: float
    tolerance: float
    detail: str = ""


def _result(name: str, measured: float, tol: float, detail: str = "") -> CheckResult:
    return CheckResult(name, bool(measured <= tol), float(measured), float(tol), detail)


def _random_tangent(s: bu.BlownUpState, rng: np.random.Generator) -> bu.TangentPair:
    dw = rng.normal(size=3)
    dwd = rng.normal(size=3)
    dw = dw - np.dot(s.w, dw) * s.w
    dwd = dwd - (np.dot(s.w, dwd) + np.dot(dw, s.wdot)) * s.w
    return bu.TangentPair(dw, dwd)


def _random_blown(rng: np.random.Generator, a: float | None = None) -> bu.BlownUpState:
    w = rng.normal(size=3)
    w /= np.linalg.norm(w)
    wd = rng.normal(size=3)
    wd -= np.dot(w, wd) * w
    if a is None:
        a = float(abs(rng.normal()))
    return bu.BlownUpState(w, wd, a, float(rng.normal()))


def _admissible_params(rng: np.random.Generator) -> dy.VehicleParams:
    """Random moments with I3 not between I1 and I2 (both orders occur)."""
    i1, i2 = sorted(rng.uniform(0.2, 3.0, size=2))
    if rng.random() < 0.5:
        i3 = max(i1, i2) * rng.uniform(1.05, 2.0)
    else:
        i3 = min(i1, i2) * rng.uniform(0.3, 0.95)
    M = rng.uniform(0.3, 3.0, size=3)
    return dy.VehicleParams(I=(i1, i2, i3), M=M)


def _char_poly(A: np.ndarray) -> np.ndarray:
    """Characteristic polynomial coefficients (monic, degree 4) by the
    Faddeev-LeVerrier recursion -- polynomial in the entries, so stable
    even when the spectrum has a nilpotent block."""
    n = A.shape[0]
    coeffs = np.zeros(n + 1)
    coeffs[0] = 1.0
    Mk = np.zeros_like(A)
    for k in range(1, n + 1):
        Mk = A @ Mk + coeffs[k - 1] * np.eye(n)
        coeffs[k] = -np.trace(A @ Mk) / k
    return coeffs


# ---------------------------------------------------------------------------
# impulse dynamics
# ---------------------------------------------------------------------------


def check_casimir_energy_drift() -> CheckResult:
    """|p|, pi.p, and H stay within relative drift 1e-8 over 100 time units."""
    rng = np.random.default_rng(11)
    params = dy.VehicleParams(I=(1, 2, 3), M=(1, 2, 3))
    y0 = rng.normal(size=6)
    y0 *= 5.0 / np.linalg.norm(y0) * rng.uniform(0.5, 1.0)
    traj = integrate(dy.field_fn(params), y0, (0.0, 100.0), IntegratorConfig())
    worst = 0.0
    # pi.p can start near zero, so normalize each quantity by its natural
    # magnitude instead of its raw initial value.
    scales = [
        np.linalg.norm(y0[3:]),
        np.linalg.norm(y0[:3]) * np.linalg.norm(y0[3:]),
        dy.hamiltonian(dy.PoissonState(y0[:3], y0[3:]), params),
    ]
    fns = (
        lambda y: np.linalg.norm(y[3:]),
        lambda y: float(np.dot(y[:3], y[3:])),
        lambda y: dy.hamiltonian(dy.PoissonState(y[:3], y[3:]), params),
    )
    for fn, scale in zip(fns, scales):
        vals = np.array([fn(y) for y in traj.states])
        worst = max(worst, np.abs(vals - vals[0]).max() / abs(scale))
    return _result("casimir-energy-drift", worst, 1e-8)


def check_subcasimir_leafwise() -> CheckResult:
    """|pi| conserved on the p=0 stratum, and genuinely not conserved off it."""
    params = dy.VehicleParams(I=(1, 2, 3), M=(0.9, 1.7, 2.8))
    on = integrate(
        dy.field_fn(params),
        np.array([1.0, 0.5, 2.0, 0.0, 0.0, 0.0]),
        (0.0, 100.0),
        IntegratorConfig(),
    )
    norms = np.linalg.norm(on.states[:, :3], axis=1)
    drift_on = np.abs(norms - norms[0]).max() / norms[0]
    off = integrate(
        dy.field_fn(params),
        np.array([1.0, 0.5, 2.0, 0.5, 0.2, 0.1]),
        (0.0, 100.0),
        IntegratorConfig(),
    )
    norms_off = np.linalg.norm(off.states[:, :3], axis=1)
    vary = np.abs(norms_off - norms_off[0]).max() / norms_off[0]
    ok = drift_on <= 1e-8 and vary > 1e-6
    return CheckResult(
        "subcasimir-leafwise",
        ok,
        drift_on,
        1e-8,
        f"off-leaf variation {vary:.3e} (must exceed 1e-06)",
    )


def check_equilibrium_fixed() -> CheckResult:
    """The spin equilibrium family consists of exact fixed points."""
    params = dy.VehicleParams(I=(1.3, 2.4, 3.1), M=(0.7, 1.9, 2.2))
    worst = 0.0
    for alpha in (-2.0, 0.5, 1.0, 3.0):
        eq = dy.equilibrium(alpha, params)
        dpi, dp = dy.vector_field(eq.state, params)
        worst = max(worst, np.abs(dpi).max(), np.abs(dp).max())
    return _result("equilibrium-fixed", worst, 0.0)


# ---------------------------------------------------------------------------
# blow-up
# ---------------------------------------------------------------------------


def check_blowup_roundtrip() -> CheckResult:
    """blow_up and blow_down invert each other to 1e-13 (1000 draws)."""
    rng = np.random.default_rng(23)
    worst = 0.0
    for _ in range(1000):
        s = _random_blown(rng, a=float(rng.uniform(1e-6, 3.0)))
        t = bu.blow_up(bu.blow_down(s), tol=0.0)
        scale = max(1.0, abs(s.a), abs(s.gamma), np.abs(s.wdot).max())
        worst = max(
            worst,
            np.abs(t.w - s.w).max() / scale,
            np.abs(t.wdot - s.wdot).max() / scale,
            abs(t.a - s.a) / scale,
            abs(t.gamma - s.gamma) / scale,
        )
        x = dy.PoissonState(rng.normal(size=3), rng.normal(size=3))
        y = bu.blow_down(bu.blow_up(x))
        xscale = max(1.0, np.abs(x.pi).max(), np.abs(x.p).max())
        worst = max(
            worst, np.abs(y.pi - x.pi).max() / xscale, np.abs(y.p - x.p).max() / xscale
        )
    return _result("blowup-roundtrip", worst, 1e-13)


def check_blowdown_pushforward() -> CheckResult:
    """The blown field pushes forward through blow_down to the impulse field.

    The differential of blow down is (dw, dwdot) -> (dwdot + gamma dw,
    a dw) since a and gamma ride along unchanged.
    """
    rng = np.random.default_rng(31)
    params = dy.VehicleParams(I=(1.1, 2.3, 3.4), M=(0.8, 1.6, 2.9))
    worst = 0.0
    for _ in range(100):
        s = _random_blown(rng, a=float(rng.uniform(1e-3, 1.0)))
        dw, dwd = bu.blown_vector_field(s, params)
        dpi_hat = dwd + s.gamma * dw
        dp_hat = s.a * dw
        dpi, dp = dy.vector_field(bu.blow_down(s), params)
        scale = max(1.0, np.abs(dpi).max(), np.abs(dp).max())
        worst = max(
            worst, np.abs(dpi_hat - dpi).max() / scale, np.abs(dp_hat - dp).max() / scale
        )
    return _result("blowdown-pushforward", worst, 1e-12)


def check_momentum_split() -> CheckResult:
    """Circle momentum: conserved on the inflated stratum, broken off it."""
    params = dy.VehicleParams(I=(1, 2, 3), M=(1, 2, 3))
    base = bu.blown_relative_equilibrium(2.0, 1.1)

    def j_series(a: float) -> np.ndarray:
        s0 = bu.BlownUpState(base.w, base.wdot, a, base.gamma)
        traj = integrate(
            bu.blown_field_fn(params, a, base.gamma),
            s0.to_array(),
            (0.0, 100.0),
            IntegratorConfig(constraint_projection=True),
        )
        return np.array(
            [
                bu.so2_momentum(bu.BlownUpState(y[:3], y[3:], a, base.gamma)).value
                for y in traj.states
            ]
        )

    j0 = j_series(0.0)
    drift0 = np.abs(j0 - j0[0]).max() / abs(j0[0])
    j1 = j_series(0.5)
    drift1 = np.abs(j1 - j1[0]).max() / abs(j1[0])
    ok = drift0 <= 1e-8 and drift1 > 1e-6
    return CheckResult(
        "momentum-split",
        ok,
        drift0,
        1e-8,
        f"a=0.5 drift {drift1:.3e} (must exceed 1e-06, symmetry broken)",
    )


def check_energy_consistency() -> CheckResult:
    """Blown-up total energy equals the impulse energy at the blown-down state."""
    rng = np.random.default_rng(41)
    params = dy.VehicleParams(I=(1.2, 2.1, 3.3), M=(0.9, 1.4, 2.6))
    worst = 0.0
    for _ in range(200):
        s = _random_blown(rng)
        h_hat = bu.blown_hamiltonian(s, params).total
        h = dy.hamiltonian(bu.blow_down(s), params)
        worst = max(worst, abs(h_hat - h) / max(1.0, abs(h)))
    return _result("energy-consistency", worst, 1e-13)


def check_form_nondegenerate() -> CheckResult:
    """The leaf form is antisymmetric and of full rank on the tangent space."""
    rng = np.random.default_rng(43)
    worst_sym = 0.0
    min_sv = np.inf
    for _ in range(100):
        base = _random_blown(rng)
        s = bu.BlownUpState(base.w, base.wdot, base.a, float(rng.uniform(-10.0, 10.0)))
        d1 = _random_tangent(s, rng)
        d2 = _random_tangent(s, rng)
        worst_sym = max(
            worst_sym,
            abs(bu.symplectic_form(s, d1, d2) + bu.symplectic_form(s, d2, d1)),
        )
        # Orthonormal tangent frame: e1, e2 normal to w with e1 x e2 = w.
        e1 = _random_tangent(s, rng).dw
        e1 /= np.linalg.norm(e1)
        e2 = np.cross(s.w, e1)
        frame = [
            bu.TangentPair(e1, -np.dot(e1, s.wdot) * s.w),
            bu.TangentPair(e2, -np.dot(e2, s.wdot) * s.w),
            bu.TangentPair(np.zeros(3), e1),
            bu.TangentPair(np.zeros(3), e2),
        ]
        mat = np.array(
            [[bu.symplectic_form(s, a, b) for b in frame] for a in frame]
        )
        min_sv = min(min_sv, np.linalg.svd(mat, compute_uv=False)[-1])
    ok = worst_sym <= 1e-12 and min_sv > 1e-6
    return CheckResult(
        "form-nondegenerate",
        ok,
        worst_sym,
        1e-12,
        f"smallest singular value {min_sv:.3e} (must exceed 1e-06)",
    )


def check_hamilton_relation() -> CheckResult:
    """form(field, d) equals the energy differential along d, including at a=0."""
    rng = np.random.default_rng(47)
    params = dy.VehicleParams(I=(1.3, 2.1, 3.2), M=(0.8, 1.7, 2.4))
    worst = 0.0
    h = 1e-6
    for k in range(200):
        s = _random_blown(rng, a=0.0 if k % 4 == 0 else None)
        dw, dwd = bu.blown_vector_field(s, params)
        X = bu.TangentPair(dw, dwd)
        d = _random_tangent(s, rng)
        lhs = bu.symplectic_form(s, X, d)
        y0 = s.to_array()
        dv = np.concatenate([d.dw, d.dwdot])

        def energy(y: np.ndarray) -> float:
            yy = bu.project_state_vector(y)
            return bu.blown_hamiltonian(
                bu.BlownUpState(yy[:3], yy[3:], s.a, s.gamma), params
            ).total

        rhs = (energy(y0 + h * dv) - energy(y0 - h * dv)) / (2.0 * h)
        worst = max(worst, abs(lhs - rhs))
    return _result("hamilton-relation", worst, 1e-8)


def check_re_momentum_sphere() -> CheckResult:
    """Blown relative equilibria satisfy gamma^2 + |wdot|^2 = alpha_e^2."""
    rng = np.random.default_rng(53)
    worst = 0.0
    for _ in range(100):
        alpha = float(rng.uniform(-3.0, 3.0))
        if alpha == 0.0:
            continue
        s = bu.blown_relative_equilibrium(alpha, float(rng.uniform(0.0, np.pi)))
        val = s.gamma**2 + float(np.dot(s.wdot, s.wdot))
        worst = max(worst, abs(val - alpha**2) / alpha**2)
    return _result("re-momentum-sphere", worst, 1e-12)


# ---------------------------------------------------------------------------
# normal-form constants
# ---------------------------------------------------------------------------


def check_upsilon_forms() -> CheckResult:
    """Both closed forms of upsilon_e agree (1000 admissible draws)."""
    rng = np.random.default_rng(59)
    worst = 0.0
    for _ in range(1000):
        params = _admissible_params(rng)
        alpha = float(rng.uniform(0.1, 4.0)) * (1 if rng.random() < 0.8 else -1)
        c = nf.coefficients(params, alpha)
        other = -c.omega_e / (2.0 * c.alpha_e) * (np.sqrt(c.D) + 1.0 / np.sqrt(c.D))
        worst = max(worst, abs(other - c.upsilon_e) / abs(c.upsilon_e))
    return _result("upsilon-forms", worst, 1e-12)


def check_twist_identity() -> CheckResult:
    """Twist value equals its fully factored form (1000 admissible draws)."""
    rng = np.random.default_rng(61)
    worst = 0.0
    for _ in range(1000):
        params = _admissible_params(rng)
        alpha = float(rng.uniform(0.1, 4.0))
        i1, i2, i3 = (float(v) for v in params.I)
        value = nf.twist_condition(params, alpha).value
        factored = -(alpha**2 / i3**2) / (i1 * i2) * (i3 - 0.5 * (i1 + i2))
        worst = max(worst, abs(value - factored) / max(abs(value), abs(factored), 1e-30))
    return _result("twist-identity", worst, 1e-12)


def check_frequency_linearity() -> CheckResult:
    """omega_e is linear in the spin: omega(alpha+z) = omega(alpha)(alpha+z)/alpha."""
    rng = np.random.default_rng(67)
    worst = 0.0
    for _ in range(200):
        params = _admissible_params(rng)
        alpha = float(rng.uniform(0.2, 3.0))
        z = float(rng.uniform(-0.15, 3.0))
        w1 = nf.coefficients(params, alpha).omega_e
        w2 = nf.coefficients(params, alpha + z).omega_e
        worst = max(worst, abs(w2 - w1 * (alpha + z) / alpha) / max(abs(w2), 1e-30))
    return _result("frequency-linearity", worst, 1e-12)


_BASIS_PARAM_SETS = (
    ((1.0, 2.0, 3.0), (1.0, 2.0, 3.0), 3.0),
    ((0.3, 0.7, 1.0), (0.9, 1.7, 2.8), 1.0),
    ((2.2, 3.1, 1.4), (1.2, 0.7, 2.0), 0.8),  # short-axis spin, omega_e < 0
)
_BASIS_THETAS = (0.1, 0.5, np.pi / 2.0, 2.5)


def check_canonical_basis() -> CheckResult:
    """Tilted-basis properties: canonicity, momentum row, generator, linearization."""
    expect_form = np.array(
        [[0, 1, 0, 0], [-1, 0, 0, 0], [0, 0, 0, 1], [0, 0, -1, 0]], dtype=float
    )
    worst_canon = worst_dj = worst_gen = worst_lin = 0.0
    for I, M, alpha in _BASIS_PARAM_SETS:
        params = dy.VehicleParams(I=I, M=M)
        c = nf.coefficients(params, alpha)
        for theta in _BASIS_THETAS:
            basis = nf.canonical_basis(alpha, theta, params)
            form = np.array(
                [
                    [bu.symplectic_form(basis.base, basis.pair(i), basis.pair(j)) for j in range(4)]
                    for i in range(4)
                ]
            )
            worst_canon = max(worst_canon, np.abs(form - expect_form).max())
            worst_dj = max(
                worst_dj,
                np.abs(
                    nf.momentum_differential(alpha, theta, params)
                    - np.array([0.0, 0.0, 0.0, 1.0])
                ).max(),
            )
            gen = bu.so2_generator(basis.base)
            worst_gen = max(
                worst_gen,
                np.abs(np.concatenate([gen.dw, gen.dwdot]) - basis.vectors[2]).max(),
            )
            expect_lin = np.array(
                [
                    [0, c.omega_e, 0, 0],
                    [-c.omega_e, 0, 0, 0],
                    [0, 0, 0, c.kappa_e],
                    [0, 0, 0, 0],
                ]
            )
            worst_lin = max(
                worst_lin, np.abs(nf.linearization(alpha, theta, params) - expect_lin).max()
            )
    ok = worst_canon <= 1e-12 and worst_dj <= 1e-10 and worst_gen <= 1e-12 and worst_lin <= 1e-6
    return CheckResult(
        "canonical-basis",
        ok,
        worst_lin,
        1e-6,
        f"canonicity {worst_canon:.2e} (tol 1e-12), momentum row {worst_dj:.2e} "
        f"(tol 1e-10), generator {worst_gen:.2e} (tol 1e-12)",
    )


def check_equilibrium_basis() -> CheckResult:
    """Untilted basis: canonicity, nilpotent linearization, quartic, spectrum."""
    expect_form = np.array(
        [[0, 1, 0, 0], [-1, 0, 0, 0], [0, 0, 0, 1], [0, 0, -1, 0]], dtype=float
    )
    worst_canon = worst_lin = worst_quartic = worst_poly = 0.0
    for I, M, alpha in _BASIS_PARAM_SETS:
        params = dy.VehicleParams(I=I, M=M)
        c = nf.coefficients(params, alpha)
        basis = nf.equilibrium_basis(alpha, params)
        form = np.array(
            [
                [bu.symplectic_form(basis.base, basis.pair(i), basis.pair(j)) for j in range(4)]
                for i in range(4)
            ]
        )
        worst_canon = max(worst_canon, np.abs(form - expect_form).max())
        L = nf.linearization(alpha, 0.0, params)
        expect_lin = np.array(
            [[0, c.omega_e, 0, 0], [-c.omega_e, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0]]
        )
        worst_lin = max(worst_lin, np.abs(L - expect_lin).max())
        # Spectrum {+-i omega, 0, 0} via characteristic coefficients.
        poly = _char_poly(L)
        expect_poly = np.array([1.0, 0.0, c.omega_e**2, 0.0, 0.0])
        scale = max(1.0, c.omega_e**2)
        worst_poly = max(worst_poly, np.abs(poly - expect_poly).max() / scale)
        worst_quartic = max(
            worst_quartic, abs(_nullspace_quartic(alpha, params) - c.kappa_e / 8.0)
        )
    ok = (
        worst_canon <= 1e-12
        and worst_lin <= 1e-6
        and worst_poly <= 1e-6
        and worst_quartic <= 1e-6
    )
    return CheckResult(
        "equilibrium-basis",
        ok,
        worst_quartic,
        1e-6,
        f"canonicity {worst_canon:.2e} (tol 1e-12), linearization {worst_lin:.2e} "
        f"(tol 1e-6), char-poly {worst_poly:.2e} (tol 1e-6)",
    )


def _nullspace_quartic(alpha: float, params: dy.VehicleParams, r: float = 0.02) -> float:
    """Measured quartic coefficient of H0 - xi_e J on the null-space plane.

    The quadratic part cancels exactly at the multiplier xi_e, so the
    angle-averaged (F - F0)/r^4 at radii r and r/2, Richardson-combined,
    isolates the quartic coefficient of (x^2+y^2)^2.
    """
    c = nf.coefficients(params, alpha)
    basis = nf.equilibrium_basis(alpha, params)
    y0 = basis.base.to_array()
    gamma = basis.base.gamma

    def F(y: np.ndarray) -> float:
        yy = bu.project_state_vector(y)
        s = bu.BlownUpState(yy[:3], yy[3:], 0.0, gamma)
        return bu.blown_hamiltonian(s, params).H0 - c.xi_e * bu.so2_momentum(s).value

    F0 = F(y0)

    def g(radius: float, n: int = 16) -> float:
        total = 0.0
        for k in range(n):
            t = 2.0 * np.pi * k / n
            v = np.cos(t) * basis.vectors[2] + np.sin(t) * basis.vectors[3]
            total += (F(y0 + radius * v) - F0) / radius**4
        return total / n

    return (4.0 * g(r / 2.0) - g(r)) / 3.0


def check_upsilon_average() -> CheckResult:
    """Angle-averaging the chart energy at small action recovers upsilon_e."""
    worst = 0.0
    for I, M, alpha in _BASIS_PARAM_SETS:
        params = dy.VehicleParams(I=I, M=M)
        c = nf.coefficients(params, alpha)
        action = 1e-3
        n = 64
        vals = []
        for k in range(n):
            psi = 2.0 * np.pi * k / n
            Q, P = nf.chart_from_action_angle(action, psi, c)
            pi = nf.rigid_chart(Q, P, alpha)
            vals.append(0.5 * float(np.dot(pi, pi / params.I)))
        const = alpha**2 / (2.0 * float(params.I[2]))
        measured = 2.0 * (np.mean(vals) - const - c.omega_e * action) / action**2
        worst = max(worst, abs(measured - c.upsilon_e) / abs(c.upsilon_e))
    return _result("upsilon-average", worst, 1e-6)


def check_reduced_form_lift() -> CheckResult:
    """Leaf form in impulse coordinates matches the blown form on lifts."""
    rng = np.random.default_rng(71)
    worst = 0.0
    for _ in range(200):
        pi = rng.normal(size=3) * rng.uniform(0.5, 3.0)
        n = np.linalg.norm(pi)
        gamma = float(rng.uniform(-0.95, 0.95)) * n
        s = bu.leaf_point_lift(pi, gamma)
        d1_pi = rng.normal(size=3)
        d1_pi -= np.dot(d1_pi, pi) / n**2 * pi
        d2_pi = rng.normal(size=3)
        d2_pi -= np.dot(d2_pi, pi) / n**2 * pi
        lhs = bu.symplectic_form(
            s, bu.leaf_tangent_lift(s, pi, d1_pi), bu.leaf_tangent_lift(s, pi, d2_pi)
        )
        rhs = bu.reduced_leaf_form(pi, d1_pi, d2_pi)
        worst = max(worst, abs(lhs - rhs) / max(1.0, abs(rhs)))
    return _result("reduced-form-lift", worst, 1e-10)


def check_chart_identities() -> CheckResult:
    """|pi| = alpha_e identically on the chart; the chart is symplectic."""
    rng = np.random.default_rng(73)
    worst_norm = 0.0
    worst_symp = 0.0
    h = 1e-6
    for _ in range(50):
        alpha = float(rng.uniform(0.3, 4.0))
        while True:
            Q, P = rng.normal(size=2) * np.sqrt(alpha)
            if Q * Q + P * P < 3.9 * alpha:
                break
        pi = nf.rigid_chart(Q, P, alpha)
        worst_norm = max(worst_norm, abs(np.linalg.norm(pi) - alpha) / alpha)
        dQ = (nf.rigid_chart(Q + h, P, alpha) - nf.rigid_chart(Q - h, P, alpha)) / (2 * h)
        dP = (nf.rigid_chart(Q, P + h, alpha) - nf.rigid_chart(Q, P - h, alpha)) / (2 * h)
        worst_symp = max(worst_symp, abs(bu.reduced_leaf_form(pi, dQ, dP) - 1.0))
    ok = worst_norm <= 1e-13 and worst_symp <= 1e-8
    return CheckResult(
        "chart-identities",
        ok,
        worst_norm,
        1e-13,
        f"coordinate-tangent pairing off by {worst_symp:.2e} (tol 1e-8)",
    )


# ---------------------------------------------------------------------------
# integration
# ---------------------------------------------------------------------------


def check_integrator_order() -> CheckResult:
    """Halving rel_tol at least halves the final-state error (rigid body)."""
    params = dy.VehicleParams(I=(1, 2, 3), M=(1, 2, 3))
    rhs = dy.field_fn(params)
    y0 = np.array([1.0, 0.6, 2.0, 0.0, 0.0, 0.0])
    span = (0.0, 20.0)

    def final(rel: float) -> np.ndarray:
        return integrate(rhs, y0, span, IntegratorConfig(rel_tol=rel, abs_tol=1e-14)).states[-1]

    ref = final(1e-12)
    err1 = np.linalg.norm(final(4e-7) - ref)
    err2 = np.linalg.norm(final(2e-7) - ref)
    ratio = err1 / err2
    return CheckResult(
        "integrator-order",
        ratio >= 2.0,
        ratio,
        2.0,
        f"errors {err1:.2e} -> {err2:.2e} when rel_tol halves (ratio must be >= 2)",
    )


def check_dense_endpoints() -> CheckResult:
    """Dense output evaluated at stored times reproduces stored states exactly."""
    params = dy.VehicleParams(I=(1, 2, 3), M=(1, 2, 3))
    traj = integrate(
        dy.field_fn(params),
        np.array([1.0, 0.5, 2.0, 0.1, 0.0, 0.05]),
        (0.0, 10.0),
        IntegratorConfig(),
    )
    worst = np.abs(traj.eval(traj.times) - traj.states).max()
    return _result("dense-endpoints", worst, 0.0)


def check_crossing_separation() -> CheckResult:
    """Crossing times are strictly increasing and well separated."""
    traj = integrate(
        lambda t, y: np.array([y[1], -y[0]]),
        np.array([1.0, 0.0]),
        (0.0, 50.0),
        IntegratorConfig(rel_tol=1e-10, abs_tol=1e-12),
    )
    crossings = find_crossings(traj, lambda y: y[0], direction=1)
    ts = np.array([c.t for c in crossings])
    expected = 1.5 * np.pi + 2.0 * np.pi * np.arange(ts.size)
    worst = np.abs(ts - expected).max()
    eps = np.finfo(float).eps
    gaps_ok = bool(np.all(np.diff(ts) > 10.0 * eps * ts[1:]))
    return CheckResult(
        "crossing-separation",
        gaps_ok and worst <= 1e-9,
        worst,
        1e-9,
        f"{ts.size} crossings, monotone separation {'ok' if gaps_ok else 'VIOLATED'}",
    )


# ---------------------------------------------------------------------------
# return-map measurements (slow checks)
# ---------------------------------------------------------------------------


def check_action_drift() -> CheckResult:
    """Per-return action drift shrinks superlinearly as the leaf offset shrinks."""
    params = dy.VehicleParams(I=(1, 2, 3), M=(1, 2, 3))
    alpha = 3.0

    def drift(a: float) -> float:
        spec = pc.SectionSpec(
            alpha_e=alpha, a=a, n_returns=8, I_grid=np.array([0.5 * a * alpha])
        )
        coeffs = nf.coefficients(params, alpha)
        traj = integrate(
            dy.field_fn(params),
            pc._initial_state(float(spec.I_grid[0]), spec, coeffs),
            (0.0, (spec.n_returns + 1.5) * abs(2 * np.pi / coeffs.xi_e)),
            IntegratorConfig(),
        )
        series = pc._crossing_series(traj, coeffs)
        assert series is not None
        _, I_cross, _ = series
        return float(np.abs(np.diff(I_cross)).mean())

    d1 = drift(1e-2)
    d2 = drift(5e-3)
    ratio = d1 / d2
    exponent = np.log2(ratio)
    return CheckResult(
        "action-drift",
        ratio >= 4.0,
        ratio,
        4.0,
        f"per-return drift {d1:.3e} -> {d2:.3e}, measured exponent {exponent:.2f} "
        "(ratio must be >= 4; superlinear in the offset)",
    )


def check_twist_affine() -> CheckResult:
    """Angle advance is affine in action: fit residual under 5% of slope*span."""
    params = dy.VehicleParams(I=(1, 2, 3), M=(1, 2, 3))
    spec = pc.SectionSpec(alpha_e=3.0, a=1e-2, n_returns=8)
    fit = pc.fit_twist(pc.poincare_map(spec, params))
    samples_span = spec.I_grid.max() - spec.I_grid.min()
    rel = fit.residual / (abs(fit.slope) * samples_span)
    return _result("twist-affine", rel, 0.05, f"slope {fit.slope:.4f}")


def check_figure_parabola() -> CheckResult:
    """Measured reciprocal twist tracks the predicted parabola; error shrinks with a."""
    grid = np.linspace(0.15, 0.85, 15)
    rows = pc.figure_experiment(grid, a=1e-2, n_returns=8)
    errs = np.array([r.rel_err for r in rows])
    rows_half = pc.figure_experiment(grid, a=5e-3, n_returns=8)
    errs_half = np.array([r.rel_err for r in rows_half])
    finite = np.isfinite(errs).all() and np.isfinite(errs_half).all()
    decreased = finite and errs_half.max() < errs.max()
    ok = finite and errs.max() <= 0.10 and decreased
    return CheckResult(
        "figure-parabola",
        bool(ok),
        float(errs.max() if finite else np.nan),
        0.10,
        f"worst error {errs.max():.3f} -> {errs_half.max():.3f} at half offset "
        "(must decrease)",
    )


CHECKS: dict[str, Callable[[], CheckResult]] = {
    fn.__name__.removeprefix("check_").replace("_", "-"): fn
    for fn in (
        check_casimir_energy_drift,
        check_subcasimir_leafwise,
        check_equilibrium_fixed,
        check_blowup_roundtrip,
        check_blowdown_pushforward,
        check_momentum_split,
        check_energy_consistency,
        check_form_nondegenerate,
        check_hamilton_relation,
        check_re_momentum_sphere,
        check_upsilon_forms,
        check_twist_identity,
        check_frequency_linearity,
        check_canonical_basis,
        check_equilibrium_basis,
        check_upsilon_average,
        check_reduced_form_lift,
        check_chart_identities,
        check_integrator_order,
        check_dense_endpoints,
        check_crossing_separation,
        check_action_drift,
        check_twist_affine,
        check_figure_parabola,
    )
}


def run(names: list[str] | None = None) -> list[CheckResult]:
    """Run the named checks (default: all) and return their results."""
    if names is None:
        names = list(CHECKS)
    unknown = [n for n in names if n not in CHECKS]
    if unknown:
        raise ValueError(f"unknown check(s): {', '.join(unknown)}")
    return [CHECKS[n]() for n in names]
