"""Blow-up coordinates for the degenerate stratum ``p = 0``.

The reduced phase space is foliated by invariant leaves; the leaves with
``p != 0`` look like the tangent bundle of a sphere, while at ``p = 0``
they degenerate to spheres.  Replacing ``(pi, p)`` by ``(w, wdot, a, gamma)``
with

    p = a w,    pi = wdot + gamma w,    |w| = 1,   w . wdot = 0,   a >= 0,

inflates the degenerate stratum so the whole family varies smoothly with
the leaf parameter ``a = |p|``.  This module provides the coordinate change
in both directions, the transported vector field and Hamiltonian, the
circle action that survives on the inflated stratum together with its
momentum, and the closed form of the leaf symplectic structure.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .dynamics import PoissonState, VehicleParams, _cross, _vec3

__all__ = [
    "BlownUpState",
    "TangentPair",
    "BlowUpUndefinedError",
    "DegeneratePointError",
    "blow_down",
    "blow_up",
    "blown_vector_field",
    "blown_hamiltonian",
    "BlownHamiltonian",
    "symplectic_form",
    "so2_momentum",
    "So2Momentum",
    "so2_act",
    "so2_generator",
    "blown_relative_equilibrium",
    "reduced_leaf_form",
    "leaf_point_lift",
    "leaf_tangent_lift",
    "project_state",
    "project_state_vector",
    "blown_field_fn",
]

#: |p| below which the blow-up map is considered undefined.
BLOWUP_P_TOL = 1e-10

#: gamma^2 + |wdot|^2 below which the circle action degenerates.
DEGENERACY_TOL = 1e-24

_CONSTRAINT_TOL = 1e-12


class BlowUpUndefinedError(ValueError):
    """Raised when blowing up a state with ``|p|`` at or below tolerance."""


class DegeneratePointError(ValueError):
    """Raised at points where the circle action has no defined rotation axis."""


@dataclass(frozen=True, eq=False)
class BlownUpState:
    """Point ``(w, wdot, a, gamma)`` of the blown-up phase space.

    ``w`` is a unit vector, ``wdot`` a tangent vector at ``w`` (so
    ``w . wdot = 0``), ``a >= 0`` the leaf radius and ``gamma`` the leaf
    skew parameter.  Both constraints are enforced to ``1e-12`` at
    construction; use :func:`project_state` to repair states coming out
    of unconstrained integration steps.
    """

    w: np.ndarray
    wdot: np.ndarray
    a: float
    gamma: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "w", _vec3(self.w, "w"))
        object.__setattr__(self, "wdot", _vec3(self.wdot, "wdot"))
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "gamma", float(self.gamma))
        if abs(np.linalg.norm(self.w) - 1.0) > _CONSTRAINT_TOL:
            raise ValueError("w must be a unit vector (|w| - 1 exceeds 1e-12)")
        if abs(float(np.dot(self.w, self.wdot))) > _CONSTRAINT_TOL:
            raise ValueError("wdot must be tangent at w (w.wdot exceeds 1e-12)")
        if self.a < 0.0:
            raise ValueError("a must be nonnegative")

    def to_array(self) -> np.ndarray:
        """Flatten the varying part to the 6-vector ``[w, wdot]``."""
        return np.concatenate([self.w, self.wdot])

    def with_array(self, y: np.ndarray) -> "BlownUpState":
        """Rebuild a state from a flat ``[w, wdot]`` at this state's ``(a, gamma)``."""
        y = np.asarray(y, dtype=float)
        return BlownUpState(y[:3], y[3:6], self.a, self.gamma)


@dataclass(frozen=True, eq=False)
class TangentPair:
    """Tangent vector ``(dw, dwdot)`` at a blown-up state.

    Tangency itself depends on the base point; it is checked where the
    pair is consumed (see :func:`symplectic_form`).
    """

    dw: np.ndarray
    dwdot: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "dw", _vec3(self.dw, "dw"))
        object.__setattr__(self, "dwdot", _vec3(self.dwdot, "dwdot"))


def _check_tangency(s: BlownUpState, d: TangentPair, label: str) -> None:
    if abs(float(np.dot(s.w, d.dw))) > _CONSTRAINT_TOL:
        raise ValueError(f"{label}: dw is not tangent to the sphere at w")
    if abs(float(np.dot(d.dw, s.wdot) + np.dot(s.w, d.dwdot))) > _CONSTRAINT_TOL:
        raise ValueError(f"{label}: (dw, dwdot) violates the tangency relation")


def blow_down(s: BlownUpState) -> PoissonState:
    """Map ``(w, wdot, a, gamma)`` to the impulses ``p = a w``, ``pi = wdot + gamma w``."""
    return PoissonState(s.wdot + s.gamma * s.w, s.a * s.w)


def blow_up(s: PoissonState, tol: float = BLOWUP_P_TOL) -> BlownUpState:
    """Inverse of :func:`blow_down` away from the degenerate stratum.

    Parameters
    ----------
    s : PoissonState
        State with ``|p| > tol``.
    tol : float
        Rejection threshold on ``|p|``; below it the direction ``w`` and
        the parameter ``gamma`` are ill-conditioned.

    Raises
    ------
    BlowUpUndefinedError
        If ``|p| <= tol``.  On the stratum ``p = 0`` the blown-up
        representative is not unique; the caller must pick ``(w, gamma)``
        explicitly there.
    """
    a = float(np.linalg.norm(s.p))
    if a <= tol:
        raise BlowUpUndefinedError(f"blow-up undefined for |p| = {a:.3e} <= {tol:.1e}")
    w = s.p / a
    gamma = float(np.dot(s.pi, w))
    wdot = s.pi - gamma * w
    # Exactify tangency: the subtraction above leaves O(eps*|pi|) residue.
    wdot = wdot - float(np.dot(w, wdot)) * w
    return BlownUpState(w, wdot, a, gamma)


def blown_vector_field(
    s: BlownUpState, params: VehicleParams
) -> tuple[np.ndarray, np.ndarray]:
    """Time derivative ``(dw/dt, dwdot/dt)``; ``a`` and ``gamma`` are constant.

    The field is polynomial in ``a`` and therefore smooth through the
    inflated stratum ``a = 0``:

        dw/dt    = w x I^-1 (wdot + gamma w)
        dwdot/dt = wdot x I^-1 (wdot + gamma w) + a^2 w x M^-1 w
    """
    omega = (s.wdot + s.gamma * s.w) / params.I
    dw = _cross(s.w, omega)
    dwdot = _cross(s.wdot, omega) + (s.a * s.a) * _cross(s.w, s.w / params.M)
    return dw, dwdot


class BlownHamiltonian(NamedTuple):
    """Energy split ``total = H0 + a^2 H1`` on the blown-up space."""

    H0: float
    H1: float
    total: float


def blown_hamiltonian(s: BlownUpState, params: VehicleParams) -> BlownHamiltonian:
    """Energy at a blown-up state.

    ``H0`` is the leafwise (rigid-rotation) part, ``H1`` the coefficient
    of ``a^2`` coming from the linear impulse; ``total`` agrees with
    :func:`uvstab.dynamics.hamiltonian` at the blown-down image.
    """
    pi = s.wdot + s.gamma * s.w
    h0 = 0.5 * float(np.dot(pi, pi / params.I))
    h1 = 0.5 * float(np.dot(s.w, s.w / params.M))
    return BlownHamiltonian(h0, h1, h0 + s.a * s.a * h1)


def symplectic_form(s: BlownUpState, d1: TangentPair, d2: TangentPair) -> float:
    """Leaf symplectic form evaluated on two tangent pairs at ``s``.

        omega(d1, d2) = -w . (dw1 x dwdot2 - dw2 x dwdot1) - gamma w . (dw1 x dw2)
    """
    _check_tangency(s, d1, "d1")
    _check_tangency(s, d2, "d2")
    term = _cross(d1.dw, d2.dwdot) - _cross(d2.dw, d1.dwdot)
    return float(-np.dot(s.w, term) - s.gamma * np.dot(s.w, _cross(d1.dw, d2.dw)))


class So2Momentum(NamedTuple):
    """Momentum value of the circle action with a degeneracy flag."""

    value: float
    degenerate: bool


def so2_momentum(s: BlownUpState) -> So2Momentum:
    """Conserved momentum ``-sqrt(gamma^2 + |wdot|^2)`` of the circle action.

    The value is always returned; ``degenerate`` marks the fixed points
    ``gamma = 0, wdot = 0`` where the action has no rotation axis.
    """
    sq = s.gamma * s.gamma + float(np.dot(s.wdot, s.wdot))
    return So2Momentum(-np.sqrt(sq), sq < DEGENERACY_TOL)


def _rotation_axis(s: BlownUpState) -> np.ndarray:
    m = s.wdot + s.gamma * s.w
    n = np.linalg.norm(m)
    if n * n < DEGENERACY_TOL:
        raise DegeneratePointError("circle action undefined: gamma = 0 and wdot = 0")
    return m / n


def so2_act(theta: float, s: BlownUpState) -> BlownUpState:
    """Rotate ``(w, wdot)`` by angle ``theta`` about the axis ``(wdot + gamma w)/|.|``.

    Right-hand sense about the axis; ``a`` and ``gamma`` are untouched.
    """
    m = _rotation_axis(s)
    c, sn = np.cos(theta), np.sin(theta)

    def rot(v: np.ndarray) -> np.ndarray:
        return c * v + sn * _cross(m, v) + (1.0 - c) * float(np.dot(m, v)) * m

    return BlownUpState(rot(s.w), rot(s.wdot), s.a, s.gamma)


def so2_generator(s: BlownUpState) -> TangentPair:
    """Infinitesimal generator of :func:`so2_act` at ``s``.

    ``d/dtheta so2_act(theta, s)`` at ``theta = 0``: both components
    rotate about the axis, giving ``(m x w, m x wdot)``.  This is also
    the Hamiltonian vector field of the momentum :func:`so2_momentum`.
    """
    m = _rotation_axis(s)
    return TangentPair(_cross(m, s.w), _cross(m, s.wdot))


def blown_relative_equilibrium(alpha_e: float, theta: float) -> BlownUpState:
    """Blown-up representative of the vertical spin, tilted by ``theta``.

    The whole circle of states ``w = sin(theta) i + cos(theta) k`` (rotated
    about k) is a single group orbit; this returns the representative in
    the x-z plane.  All of them satisfy ``gamma^2 + |wdot|^2 = alpha_e^2``
    and blow down to ``pi = alpha_e k, p = 0``.

    Parameters
    ----------
    alpha_e : float
        Spin impulse, nonzero.
    theta : float
        Tilt of ``w`` from the vertical, in ``[0, pi]``.  ``theta = 0``
        gives the fixed point of the circle action.
    """
    alpha_e = float(alpha_e)
    if alpha_e == 0.0:
        raise ValueError("alpha_e must be nonzero")
    if not 0.0 <= theta <= np.pi:
        raise ValueError("theta must lie in [0, pi]")
    w = np.array([np.sin(theta), 0.0, np.cos(theta)])
    gamma = alpha_e * np.cos(theta)
    wdot = alpha_e * np.array([0.0, 0.0, 1.0]) - gamma * w
    wdot = wdot - float(np.dot(w, wdot)) * w  # exactify w.wdot = 0
    return BlownUpState(w, wdot, 0.0, gamma)


def reduced_leaf_form(
    pi: np.ndarray, dpi1: np.ndarray, dpi2: np.ndarray, tol: float = 1e-12
) -> float:
    """Symplectic form of the degenerate (sphere) leaves in impulse coordinates.

        omega_red(dpi1, dpi2) = -pi . (dpi1 x dpi2) / |pi|^2

    for tangents ``dpi_i`` with ``pi . dpi_i = 0``.  Equals
    :func:`symplectic_form` on the lifts produced by
    :func:`leaf_point_lift` / :func:`leaf_tangent_lift`.
    """
    pi = _vec3(pi, "pi")
    n2 = float(np.dot(pi, pi))
    if n2 <= tol * tol:
        raise ValueError("reduced leaf form undefined at pi = 0")
    return float(-np.dot(pi, _cross(np.asarray(dpi1, float), np.asarray(dpi2, float)))) / n2


def leaf_point_lift(pi: np.ndarray, gamma: float) -> BlownUpState:
    """One blown-up representative of a degenerate-leaf point ``(pi, p=0)``.

    Any unit ``w`` with ``w . pi = gamma`` works; this picks ``w`` in the
    plane spanned by ``pi`` and a fixed reference axis (x, falling back
    to y when ``pi`` is nearly parallel to x), with the positive root for
    the off-axis component.  Requires ``|gamma| < |pi|``.
    """
    pi = _vec3(pi, "pi")
    gamma = float(gamma)
    n = float(np.linalg.norm(pi))
    if n == 0.0:
        raise ValueError("lift undefined at pi = 0")
    if abs(gamma) >= n:
        raise ValueError("lift requires |gamma| < |pi|")
    pihat = pi / n
    ref = np.array([1.0, 0.0, 0.0])
    if abs(float(np.dot(pihat, ref))) > 0.9:
        ref = np.array([0.0, 1.0, 0.0])
    e = ref - float(np.dot(ref, pihat)) * pihat
    e /= np.linalg.norm(e)
    w = (gamma / n) * pihat + np.sqrt(1.0 - (gamma / n) ** 2) * e
    wdot = pi - gamma * w
    wdot = wdot - float(np.dot(w, wdot)) * w
    return BlownUpState(w, wdot, 0.0, gamma)


def leaf_tangent_lift(s: BlownUpState, pi: np.ndarray, dpi: np.ndarray) -> TangentPair:
    """Lift a sphere tangent ``dpi`` (with ``pi . dpi = 0``) through the blow-down.

    At a lifted point from :func:`leaf_point_lift` the blow-down relation
    ``pi = wdot + gamma w`` determines lifts only up to gauge; this uses
    the gauge ``wdot . dwdot = 0``:

        dw    = -(w . dpi) (pi - gamma w) / (|pi|^2 - gamma^2)
        dwdot = (w . dpi) w + ((w x pi) . dpi) (w x pi) / (|pi|^2 - gamma^2)
    """
    pi = _vec3(pi, "pi")
    dpi = _vec3(dpi, "dpi")
    denom = float(np.dot(pi, pi)) - s.gamma * s.gamma
    w_dpi = float(np.dot(s.w, dpi))
    wxpi = _cross(s.w, pi)
    dw = -(w_dpi / denom) * (pi - s.gamma * s.w)
    dwdot = w_dpi * s.w + (float(np.dot(wxpi, dpi)) / denom) * wxpi
    return TangentPair(dw, dwdot)


def project_state(w: np.ndarray, wdot: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Project raw ``(w, wdot)`` back onto the constraint set ``|w|=1, w.wdot=0``."""
    w = np.asarray(w, dtype=float)
    wdot = np.asarray(wdot, dtype=float)
    w = w / np.linalg.norm(w)
    wdot = wdot - float(np.dot(w, wdot)) * w
    return w, wdot


def project_state_vector(y: np.ndarray) -> np.ndarray:
    """Constraint projection over the flat ``[w, wdot]`` 6-vector."""
    w, wdot = project_state(y[:3], y[3:6])
    return np.concatenate([w, wdot])


def blown_field_fn(params: VehicleParams, a: float, gamma: float):
    """Right-hand side ``f(t, y)`` over the flat ``[w, wdot]`` at fixed ``(a, gamma)``."""
    i1, i2, i3 = (float(x) for x in params.I)
    m1, m2, m3 = (float(x) for x in params.M)
    a2 = float(a) ** 2
    g = float(gamma)

    def f(t: float, y: np.ndarray) -> np.ndarray:
        w1, w2, w3, u1, u2, u3 = y
        o1 = (u1 + g * w1) / i1
        o2 = (u2 + g * w2) / i2
        o3 = (u3 + g * w3) / i3
        b1 = a2 * w1 / m1
        b2 = a2 * w2 / m2
        b3 = a2 * w3 / m3
        return np.array(
            [
                w2 * o3 - w3 * o2,
                w3 * o1 - w1 * o3,
                w1 * o2 - w2 * o1,
                u2 * o3 - u3 * o2 + w2 * b3 - w3 * b2,
                u3 * o1 - u1 * o3 + w3 * b1 - w1 * b3,
                u1 * o2 - u2 * o1 + w1 * b2 - w2 * b1,
            ]
        )

    return f
