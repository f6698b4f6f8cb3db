"""Reduced rigid-body/fluid dynamics of an ellipsoidal underwater vehicle.

The model is a neutrally buoyant ellipsoid with coincident centers of mass
and buoyancy, moving through an ideal fluid.  After reduction, the state is
the pair of body-frame impulses ``(pi, p)``: angular impulse ``pi`` and
linear impulse ``p``.  They evolve by

    dpi/dt = pi x Omega + p x v,        dp/dt = p x Omega,

where ``Omega = pi / I`` and ``v = p / M`` componentwise, ``I`` being the
principal moments of inertia and ``M`` the added-mass entries.  The motion
conserves the energy ``H = pi.Omega/2 + p.v/2``, the two invariants ``|p|``
and ``pi.p`` (constant on every trajectory), and, on the invariant set
``p = 0`` only, the additional invariant ``|pi|``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

__all__ = [
    "VehicleParams",
    "PoissonState",
    "EquilibriumFamily",
    "Casimirs",
    "vector_field",
    "hamiltonian",
    "casimirs",
    "equilibrium",
    "field_fn",
]

_K = np.array([0.0, 0.0, 1.0])


def _vec3(value, name: str) -> np.ndarray:
    arr = np.asarray(value, dtype=float)
    if arr.shape != (3,):
        raise ValueError(f"{name} must be a 3-vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must have finite entries")
    return arr


def _cross(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # Hand-rolled 3-vector cross product; np.cross has noticeable overhead
    # in the integration hot loop.
    return np.array(
        [
            a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0],
        ]
    )


@dataclass(frozen=True, eq=False)
class VehicleParams:
    """Principal moments of inertia and added masses of the vehicle.

    Parameters
    ----------
    I : array_like, shape (3,)
        Principal moments of inertia ``(I1, I2, I3)``, strictly positive.
    M : array_like, shape (3,)
        Added-mass entries ``(M1, M2, M3)``, strictly positive.

    Notes
    -----
    Vertical spin about the middle principal axis is linearly unstable;
    that restriction is enforced by the stability-level routines in
    :mod:`uvstab.normalform`, not here.  The dynamics itself is defined
    for any positive entries.
    """

    I: np.ndarray
    M: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "I", _vec3(self.I, "I"))
        object.__setattr__(self, "M", _vec3(self.M, "M"))
        if np.any(self.I <= 0.0) or np.any(self.M <= 0.0):
            raise ValueError("all inertia and added-mass entries must be positive")


@dataclass(frozen=True, eq=False)
class PoissonState:
    """Point of the reduced phase space: angular impulse ``pi``, linear impulse ``p``."""

    pi: np.ndarray
    p: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "pi", _vec3(self.pi, "pi"))
        object.__setattr__(self, "p", _vec3(self.p, "p"))

    def to_array(self) -> np.ndarray:
        """Flatten to the 6-vector ``[pi, p]`` used by the integrator."""
        return np.concatenate([self.pi, self.p])

    @classmethod
    def from_array(cls, y: np.ndarray) -> "PoissonState":
        y = np.asarray(y, dtype=float)
        return cls(y[:3], y[3:6])


@dataclass(frozen=True, eq=False)
class EquilibriumFamily:
    """Steady vertical spin: ``pi = alpha_e k``, ``p = 0``, rotating at ``alpha_e/I3`` about k."""

    alpha_e: float
    state: PoissonState
    generator_omega: np.ndarray
    generator_v: np.ndarray


class Casimirs(NamedTuple):
    """Invariant values at a state.

    ``p_norm`` and ``pi_dot_p`` are constant along every trajectory;
    ``pi_norm`` is constant only on the invariant set ``p = 0``, which
    ``pi_norm_conserved`` reports.
    """

    p_norm: float
    pi_dot_p: float
    pi_norm: float
    pi_norm_conserved: bool


def vector_field(s: PoissonState, params: VehicleParams) -> tuple[np.ndarray, np.ndarray]:
    """Time derivative ``(dpi/dt, dp/dt)`` at a state.

    Parameters
    ----------
    s : PoissonState
        Evaluation point.
    params : VehicleParams
        Vehicle inertia and added mass.

    Returns
    -------
    (ndarray, ndarray)
        ``dpi/dt = pi x Omega + p x v`` and ``dp/dt = p x Omega``.
    """
    omega = s.pi / params.I
    v = s.p / params.M
    dpi = _cross(s.pi, omega) + _cross(s.p, v)
    dp = _cross(s.p, omega)
    return dpi, dp


def hamiltonian(s: PoissonState, params: VehicleParams) -> float:
    """Kinetic energy ``(pi.Omega + p.v) / 2`` of the body-fluid system."""
    return 0.5 * float(np.dot(s.pi, s.pi / params.I) + np.dot(s.p, s.p / params.M))


def casimirs(s: PoissonState, tol: float = 1e-12) -> Casimirs:
    """Invariants ``(|p|, pi.p, |pi|)`` at a state.

    The third value is flagged conserved only when ``|p| < tol``; off the
    set ``p = 0`` it varies along trajectories.
    """
    p_norm = float(np.linalg.norm(s.p))
    return Casimirs(
        p_norm=p_norm,
        pi_dot_p=float(np.dot(s.pi, s.p)),
        pi_norm=float(np.linalg.norm(s.pi)),
        pi_norm_conserved=p_norm < tol,
    )


def equilibrium(alpha_e: float, params: VehicleParams) -> EquilibriumFamily:
    """Vertical-spin equilibrium with angular impulse ``alpha_e`` about the symmetry axis."""
    alpha_e = float(alpha_e)
    state = PoissonState(alpha_e * _K, np.zeros(3))
    return EquilibriumFamily(
        alpha_e=alpha_e,
        state=state,
        generator_omega=(alpha_e / params.I[2]) * _K,
        generator_v=np.zeros(3),
    )


def field_fn(params: VehicleParams) -> Callable[[float, np.ndarray], np.ndarray]:
    """Right-hand side ``f(t, y)`` over the flat 6-vector ``y = [pi, p]``.

    Closes over plain floats so the integrator's inner loop avoids
    per-call attribute lookups and array temporaries.
    """
    i1, i2, i3 = (float(x) for x in params.I)
    m1, m2, m3 = (float(x) for x in params.M)

    def f(t: float, y: np.ndarray) -> np.ndarray:
        pi1, pi2, pi3, p1, p2, p3 = y
        o1 = pi1 / i1
        o2 = pi2 / i2
        o3 = pi3 / i3
        v1 = p1 / m1
        v2 = p2 / m2
        v3 = p3 / m3
        return np.array(
            [
                pi2 * o3 - pi3 * o2 + p2 * v3 - p3 * v2,
                pi3 * o1 - pi1 * o3 + p3 * v1 - p1 * v3,
                pi1 * o2 - pi2 * o1 + p1 * v2 - p2 * v1,
                p2 * o3 - p3 * o2,
                p3 * o1 - p1 * o3,
                p1 * o2 - p2 * o1,
            ]
        )

    return f
