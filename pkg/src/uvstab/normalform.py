"""Normal-form data at the vertical spin: coefficients, bases, twist map.

Everything here is organized around the spinning equilibrium ``pi =
alpha_e k, p = 0`` and its blown-up representatives.  The closed-form
constants (``D``, ``omega_e``, ``kappa_e``, ``upsilon_e``, ``c4``,
``xi_e``, ``mu_e``) determine a predicted Poincare return map whose
angle advance is affine in the action with slope ``dh/dI``; the
numerical measurement of that slope lives in :mod:`uvstab.poincare`.
The module also provides the canonical bases along the equilibrium
family, the finite-difference linearization used to validate them, and
the rigid-rotation symplectic chart with its action-angle variables.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .blowup import (
    BlownUpState,
    TangentPair,
    blown_relative_equilibrium,
    blown_vector_field,
    project_state_vector,
    so2_generator,
    so2_momentum,
)
from .dynamics import VehicleParams

__all__ = [
    "IntermediateAxisError",
    "ZeroSpinError",
    "ChartDomainError",
    "NormalFormCoeffs",
    "TwistCondition",
    "PoincarePrediction",
    "ActionAngle",
    "CanonicalBasis",
    "coefficients",
    "twist_condition",
    "twist_slope",
    "predicted_poincare",
    "canonical_basis",
    "equilibrium_basis",
    "linearization",
    "momentum_differential",
    "rigid_chart",
    "chart_from_action_angle",
    "action_angle_from_chart",
    "symmetry_break_H10",
    "symmetry_break_eq_H11",
]


class IntermediateAxisError(ValueError):
    """Raised when the spin axis is an intermediate (or degenerate) axis.

    The linear frequency is real only when ``I3`` is not strictly
    between ``I1`` and ``I2``; equality makes the constant ``D``
    degenerate.  Both cases are rejected.
    """


class ZeroSpinError(ValueError):
    """Raised when the spin parameter ``alpha_e`` vanishes."""


class ChartDomainError(ValueError):
    """Raised for chart arguments outside ``Q^2 + P^2 < 4 alpha_e``."""


class NormalFormCoeffs(NamedTuple):
    """Closed-form constants attached to the spin ``alpha_e``.

    ``omega_e`` is the signed linear frequency (positive when ``I3`` is
    the largest moment, negative when smallest), ``kappa_e = 1/I3``,
    ``upsilon_e`` the angle-averaged quadratic correction, ``c4`` the
    fourth-order matching constant, ``xi_e`` the generator speed and
    ``mu_e`` the momentum of the blown-up relative equilibrium.
    """

    D: float
    omega_e: float
    kappa_e: float
    upsilon_e: float
    c4: float
    xi_e: float
    mu_e: float
    alpha_e: float


class TwistCondition(NamedTuple):
    value: float
    satisfied: bool


class PoincarePrediction(NamedTuple):
    I: float
    psi: float
    T: float


class ActionAngle(NamedTuple):
    I: float
    psi: float


def coefficients(params: VehicleParams, alpha_e: float) -> NormalFormCoeffs:
    """Evaluate all normal-form constants for the spin ``alpha_e``.

    Raises
    ------
    ZeroSpinError
        If ``alpha_e = 0`` (no spin, no relative equilibrium family).
    IntermediateAxisError
        If ``I3`` lies strictly between ``I1`` and ``I2`` (the squared
        frequency would be negative) or coincides with one of them
        (``D`` degenerates to ``0`` or ``inf``).
    """
    alpha_e = float(alpha_e)
    if alpha_e == 0.0:
        raise ZeroSpinError("alpha_e must be nonzero")
    i1, i2, i3 = (float(x) for x in params.I)
    prod = (1.0 / i3 - 1.0 / i1) * (1.0 / i3 - 1.0 / i2)
    if prod < 0.0:
        raise IntermediateAxisError(
            f"I3={i3} is an intermediate axis (I1={i1}, I2={i2}): "
            "the linear frequency is not real"
        )
    if prod == 0.0:
        raise IntermediateAxisError(
            f"I3={i3} coincides with another moment (I1={i1}, I2={i2}): "
            "the constant D degenerates"
        )
    sign = 1.0 if i3 > max(i1, i2) else -1.0
    omega_e = sign * alpha_e * np.sqrt(prod)
    D = i2 * (i3 - i1) / (i1 * (i3 - i2))
    kappa_e = 1.0 / i3
    upsilon_e = 0.5 * (2.0 / i3 - 1.0 / i1 - 1.0 / i2)
    c4 = -omega_e / (2.0 * alpha_e)
    return NormalFormCoeffs(
        D=D,
        omega_e=float(omega_e),
        kappa_e=kappa_e,
        upsilon_e=upsilon_e,
        c4=float(c4),
        xi_e=-alpha_e / i3,
        mu_e=-alpha_e,
        alpha_e=alpha_e,
    )


def twist_condition(params: VehicleParams, alpha_e: float) -> TwistCondition:
    """Twist quantity ``upsilon_e xi_e^2 - kappa_e omega_e^2`` and its test.

    ``satisfied`` uses a relative threshold: the value must exceed
    ``1e-10`` times the larger of its two constituent terms, so that
    near-cancellation is reported as a failed twist at any scale.
    """
    c = coefficients(params, alpha_e)
    t1 = c.upsilon_e * c.xi_e**2
    t2 = c.kappa_e * c.omega_e**2
    value = t1 - t2
    return TwistCondition(value, abs(value) > 1e-10 * max(abs(t1), abs(t2)))


def twist_slope(params: VehicleParams, alpha_e: float) -> float:
    """Slope ``dh/dI = -(2 pi / xi_e^3) (upsilon_e xi_e^2 - kappa_e omega_e^2)``.

    The angle advance of the return map is ``psi' - psi = -2 pi
    omega_e/xi_e + eps^2 h(I)`` with ``h`` linear; this is its slope.
    """
    c = coefficients(params, alpha_e)
    value = c.upsilon_e * c.xi_e**2 - c.kappa_e * c.omega_e**2
    return -2.0 * np.pi / c.xi_e**3 * value


def predicted_poincare(
    I: float, psi: float, eps: float, params: VehicleParams, alpha_e: float
) -> PoincarePrediction:
    """Predicted return map and return time, truncated after order ``eps^2``.

    ``I`` is unchanged, the angle advances by the fixed rotation ``-2 pi
    omega_e/xi_e`` plus the twist ``eps^2 (dh/dI) I``, and the return
    time is ``-2 pi/xi_e`` with its displayed first correction (whose
    coefficient ``alpha_e kappa_e + xi_e`` vanishes identically here, so
    the return time is flat in ``I`` at this order).
    """
    c = coefficients(params, alpha_e)
    psi_next = psi - 2.0 * np.pi * c.omega_e / c.xi_e + eps**2 * twist_slope(params, alpha_e) * I
    T = (
        -2.0
        * np.pi
        / c.xi_e
        * (1.0 + (c.alpha_e * c.kappa_e + c.xi_e) * c.omega_e * I / (c.alpha_e * c.xi_e**2) * eps**2)
    )
    return PoincarePrediction(I, float(psi_next), float(T))


# ---------------------------------------------------------------------------
# canonical bases and linearization
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class CanonicalBasis:
    """Four tangent 6-vectors (ordered ``[dw, dwdot]``) at a base point.

    The rows of ``vectors`` are symplectically canonical: the form in
    this basis is ``[[0,1,0,0],[-1,0,0,0],[0,0,0,1],[0,0,-1,0]]``, the
    momentum differential is ``[0,0,0,1]``, and the third vector
    generates the circle action.
    """

    base: BlownUpState
    vectors: np.ndarray

    def __post_init__(self) -> None:
        v = np.asarray(self.vectors, dtype=float)
        if v.shape != (4, 6):
            raise ValueError(f"vectors must be 4x6, got {v.shape}")
        object.__setattr__(self, "vectors", v)

    def pair(self, i: int) -> TangentPair:
        """The i-th basis vector (0-based) as a tangent pair."""
        return TangentPair(self.vectors[i, :3], self.vectors[i, 3:])


def _require_positive_spin(alpha_e: float) -> float:
    alpha_e = float(alpha_e)
    if alpha_e == 0.0:
        raise ZeroSpinError("alpha_e must be nonzero")
    if alpha_e < 0.0:
        raise ValueError("alpha_e must be positive (sqrt(alpha_e) normalizations)")
    return alpha_e


def canonical_basis(
    alpha_e: float, theta: float, params: VehicleParams
) -> CanonicalBasis:
    """Canonical tangent basis at the tilted relative equilibrium.

    Valid for tilts strictly between the poles, ``theta in (0, pi)``;
    at ``theta = 0`` the fourth vector degenerates and
    :func:`equilibrium_basis` applies instead.
    """
    alpha_e = _require_positive_spin(alpha_e)
    if not 0.0 < theta < np.pi:
        raise ValueError("theta must lie strictly in (0, pi); see equilibrium_basis")
    i1, i2, i3 = (float(x) for x in params.I)
    denom = i1 * (i3 - i2)
    if denom == 0.0 or i2 * (i3 - i1) / denom <= 0.0:
        raise IntermediateAxisError("D is not positive for these moments of inertia")
    D = i2 * (i3 - i1) / denom
    st, ct = np.sin(theta), np.cos(theta)
    ra = np.sqrt(alpha_e)
    v1 = D**0.25 / ra * np.array([0.0, ct, 0.0, 0.0, alpha_e * st**2, 0.0])
    v2 = D**-0.25 / ra * np.array(
        [ct, 0.0, -st, alpha_e * st**2, 0.0, alpha_e * st * ct]
    )
    v3 = st * np.array([0.0, 1.0, 0.0, 0.0, -alpha_e * ct, 0.0])
    v4 = (
        1.0
        / (alpha_e * st)
        * np.array(
            [-(ct**2), 0.0, ct * st, alpha_e * ct**3, 0.0, -alpha_e * st * (1.0 + ct**2)]
        )
    )
    base = blown_relative_equilibrium(alpha_e, theta)
    return CanonicalBasis(base, np.vstack([v1, v2, v3, v4]))


def equilibrium_basis(alpha_e: float, params: VehicleParams) -> CanonicalBasis:
    """Canonical tangent basis at the untilted point (``theta = 0``).

    The first two vectors span the tangent of the rigid-rotation reduced
    space; the last two span the null space of the linearization at the
    multiplier ``-alpha_e/I3``.
    """
    alpha_e = _require_positive_spin(alpha_e)
    i1, i2, i3 = (float(x) for x in params.I)
    denom = i1 * (i3 - i2)
    if denom == 0.0 or i2 * (i3 - i1) / denom <= 0.0:
        raise IntermediateAxisError("D is not positive for these moments of inertia")
    D = i2 * (i3 - i1) / denom
    ra = np.sqrt(alpha_e)
    v1 = D**0.25 / ra * np.array([0.0, 1.0, 0.0, 0.0, 0.0, 0.0])
    v2 = D**-0.25 / ra * np.array([1.0, 0.0, 0.0, 0.0, 0.0, 0.0])
    v3 = 1.0 / ra * np.array([0.0, 1.0, 0.0, 0.0, -alpha_e, 0.0])
    v4 = 1.0 / ra * np.array([-1.0, 0.0, 0.0, alpha_e, 0.0, 0.0])
    base = blown_relative_equilibrium(alpha_e, 0.0)
    return CanonicalBasis(base, np.vstack([v1, v2, v3, v4]))


def _reduced_field(y: np.ndarray, gamma: float, xi: float, params: VehicleParams) -> np.ndarray:
    """Field of ``H0 - xi J`` over the flat ``[w, wdot]`` at fixed ``gamma``, ``a = 0``."""
    s = BlownUpState(y[:3], y[3:6], 0.0, gamma)
    dw, dwdot = blown_vector_field(s, params)
    gen = so2_generator(s)
    return np.concatenate([dw - xi * gen.dw, dwdot - xi * gen.dwdot])


def linearization(
    alpha_e: float, theta: float, params: VehicleParams, step: float = 1e-5
) -> np.ndarray:
    """4x4 matrix of the linearized relative-equilibrium field, measured numerically.

    Linearizes the field of ``H0 - xi_e J`` at the (possibly untilted)
    base point by centered differences of step ``step`` along the
    canonical basis, projecting each perturbed point back onto the
    constraint set, and expands the result in the same basis.  Agrees
    with the closed form

        [[0, omega_e, 0, 0], [-omega_e, 0, 0, 0],
         [0, 0, 0, kappa_e], [0, 0, 0, 0]]

    (``kappa_e`` replaced by ``0`` at ``theta = 0``) to about ``step``.
    """
    basis = equilibrium_basis(alpha_e, params) if theta == 0.0 else canonical_basis(
        alpha_e, theta, params
    )
    c = coefficients(params, alpha_e)
    y0 = basis.base.to_array()
    gamma = basis.base.gamma
    cols = np.empty((6, 4))
    for j in range(4):
        v = basis.vectors[j]
        fp = _reduced_field(project_state_vector(y0 + step * v), gamma, c.xi_e, params)
        fm = _reduced_field(project_state_vector(y0 - step * v), gamma, c.xi_e, params)
        cols[:, j] = (fp - fm) / (2.0 * step)
    # Expand the difference columns in the (non-orthogonal) basis.
    coords, *_ = np.linalg.lstsq(basis.vectors.T, cols, rcond=None)
    return coords


def momentum_differential(
    alpha_e: float, theta: float, params: VehicleParams, step: float = 1e-4
) -> np.ndarray:
    """Row vector of circle-momentum derivatives along the canonical basis.

    Five-point centered differences of the momentum under constrained
    perturbations.  For tilted base points (``theta`` in ``(0, pi)``)
    this equals ``[0, 0, 0, 1]`` to about ``step^4``; at ``theta = 0``
    the momentum is critical (the fixed point of the circle action) and
    the row vanishes.
    """
    basis = equilibrium_basis(alpha_e, params) if theta == 0.0 else canonical_basis(
        alpha_e, theta, params
    )
    y0 = basis.base.to_array()
    gamma = basis.base.gamma

    def j_at(y: np.ndarray) -> float:
        yp = project_state_vector(y)
        return so2_momentum(BlownUpState(yp[:3], yp[3:6], 0.0, gamma)).value

    row = np.empty(4)
    for j in range(4):
        v = basis.vectors[j]
        d1 = j_at(y0 + step * v) - j_at(y0 - step * v)
        d2 = j_at(y0 + 2.0 * step * v) - j_at(y0 - 2.0 * step * v)
        row[j] = (8.0 * d1 - d2) / (12.0 * step)
    return row


# ---------------------------------------------------------------------------
# rigid-rotation chart and action-angle variables
# ---------------------------------------------------------------------------


def rigid_chart(Q: float, P: float, alpha_e: float) -> np.ndarray:
    """Symplectic chart on the sphere ``|pi| = alpha_e`` centered at the spin.

        pi = ( (alpha_e - (Q^2+P^2)/4)^(1/2) P,
               (alpha_e - (Q^2+P^2)/4)^(1/2) Q,
               alpha_e - (Q^2+P^2)/2 )

    ``|pi| = alpha_e`` holds identically on the domain ``Q^2 + P^2 <
    4 alpha_e``.
    """
    alpha_e = float(alpha_e)
    if alpha_e <= 0.0:
        raise ChartDomainError("chart requires alpha_e > 0")
    rho = Q * Q + P * P
    if rho >= 4.0 * alpha_e:
        raise ChartDomainError(
            f"(Q, P) outside chart domain: Q^2 + P^2 = {rho:.6g} >= 4 alpha_e = {4 * alpha_e:.6g}"
        )
    r = np.sqrt(alpha_e - 0.25 * rho)
    return np.array([r * P, r * Q, alpha_e - 0.5 * rho])


def chart_from_action_angle(
    I: float, psi: float, coeffs: NormalFormCoeffs
) -> tuple[float, float]:
    """Chart coordinates of the action-angle point:

        Q = sqrt(2 I) D^(1/4) sin(psi),   P = sqrt(2 I) D^(-1/4) cos(psi).
    """
    if I < 0.0:
        raise ValueError("action I must be nonnegative")
    r = np.sqrt(2.0 * I)
    return (
        float(r * coeffs.D**0.25 * np.sin(psi)),
        float(r * coeffs.D**-0.25 * np.cos(psi)),
    )


def action_angle_from_chart(
    Q: float, P: float, coeffs: NormalFormCoeffs
) -> ActionAngle:
    """Invert :func:`chart_from_action_angle`; ``psi`` is in ``(-pi, pi]``.

    The angle is measured so that a pure-``P`` point has ``psi = 0`` and
    the linearized flow advances ``psi`` at rate ``+omega_e``.
    """
    u = Q * coeffs.D**-0.25
    v = P * coeffs.D**0.25
    return ActionAngle(0.5 * (u * u + v * v), float(np.arctan2(u, v)))


# ---------------------------------------------------------------------------
# symmetry-breaking terms of the fluid coupling
# ---------------------------------------------------------------------------


def symmetry_break_H10(theta: float, phi: float, params: VehicleParams) -> float:
    """Leading symmetry-breaking energy along the tilted equilibrium circle:

        (M2 - M1) / (2 M1 M2) * sin(theta)^2 cos(phi)^2.

    Vanishes identically when ``M1 = M2`` (extra material symmetry).
    """
    m1, m2 = float(params.M[0]), float(params.M[1])
    return (m2 - m1) / (2.0 * m1 * m2) * np.sin(theta) ** 2 * np.cos(phi) ** 2


def symmetry_break_eq_H11(
    q: float, p: float, x: float, y: float, params: VehicleParams, alpha_e: float
) -> float:
    """Quadratic symmetry-breaking energy at the untilted point:

        (M3 - M1)(D^(-1/4) p - y)^2 / (alpha_e M1 M3)
          + (M3 - M2)(D^(1/4) q + x)^2 / (alpha_e M2 M3).

    Identically zero for a spherically symmetric mass matrix.
    """
    c = coefficients(params, alpha_e)
    m1, m2, m3 = (float(v) for v in params.M)
    return (m3 - m1) * (c.D**-0.25 * p - y) ** 2 / (c.alpha_e * m1 * m3) + (
        m3 - m2
    ) * (c.D**0.25 * q + x) ** 2 / (c.alpha_e * m2 * m3)
