"""Measured Poincare return map of the impulse dynamics near the vertical spin.

The predicted return map (:func:`uvstab.normalform.predicted_poincare`)
says the angle advance per return is affine in the action.  This module
measures that claim on the original ``(pi, p)`` system: launch initial
conditions just off the degenerate leaf (``|p| = a`` small), section the
flow by the azimuth of ``p``, track the continuously-unwrapped chart
angle, and fit angle advance against measured action.  The figure
experiment sweeps the inertia family ``I3 = 1, I2 = 1 - I1``, for which
the fixed part of the rotation is exactly one turn, so the fitted slope
is pure twist.
"""

from __future__ import annotations

import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .blowup import blown_relative_equilibrium
from .dynamics import VehicleParams, PoissonState, field_fn
from .integrate import IntegratorConfig, Trajectory, find_crossings, integrate
from .normalform import (
    ActionAngle,
    NormalFormCoeffs,
    action_angle_from_chart,
    coefficients,
    twist_slope,
)

__all__ = [
    "SectionSpec",
    "PoincareSample",
    "TwistFit",
    "FigureRow",
    "measure_action_angle",
    "poincare_map",
    "fit_twist",
    "figure_experiment",
]

logger = logging.getLogger(__name__)

#: Fraction of alpha_e by which pi may deviate from the vertical before a
#: sample is flagged invalid (the chart stops being trustworthy).
VALIDITY_RADIUS = 0.5

#: Dense angle-tracking resolution, samples per fast period.
_PSI_SAMPLES_PER_PERIOD = 64


def _default_grid(a: float, alpha_e: float) -> np.ndarray:
    # Physical actions of order a*alpha_e sit in the comparable-order
    # regime the prediction assumes; spread them over a factor 12 so the
    # twist fit sees a full decade.
    i_max = a * alpha_e
    return np.linspace(i_max / 12.0, i_max, 8)


@dataclass(frozen=True, eq=False)
class SectionSpec:
    """One return-map experiment: spin, leaf offset, section, and actions.

    ``a`` is the (small) linear-impulse magnitude, ``theta`` the launch
    tilt of ``p`` from the vertical, ``I_grid`` the target actions for
    the initial angular-impulse perturbation (defaults to eight values
    spanning ``[a alpha_e / 12, a alpha_e]``), and ``n_returns`` how
    many consecutive returns are averaged per sample.
    """

    alpha_e: float
    a: float
    theta: float = np.pi / 2.0
    n_returns: int = 32
    I_grid: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        if self.alpha_e <= 0.0:
            raise ValueError("alpha_e must be positive")
        if self.a <= 0.0:
            raise ValueError("a must be positive")
        if not 0.0 < self.theta < np.pi:
            raise ValueError("theta must lie strictly in (0, pi)")
        if self.n_returns < 1:
            raise ValueError("n_returns must be at least 1")
        grid = self.I_grid
        if grid is None:
            grid = _default_grid(self.a, self.alpha_e)
        grid = np.atleast_1d(np.asarray(grid, dtype=float))
        if np.any(grid < 0.0):
            raise ValueError("I_grid actions must be nonnegative")
        if np.any(grid >= 0.1 * self.alpha_e):
            raise ValueError("I_grid actions must be small (below 0.1*alpha_e)")
        object.__setattr__(self, "I_grid", grid)


class PoincareSample(NamedTuple):
    """Averaged measurement at one target action (NaN fields when invalid)."""

    I_measured: float
    dpsi: float
    T_measured: float
    valid: bool


class TwistFit(NamedTuple):
    slope: float
    intercept: float
    residual: float


class FigureRow(NamedTuple):
    I1: float
    measured: float
    predicted: float
    rel_err: float


def measure_action_angle(s: PoissonState, coeffs: NormalFormCoeffs) -> ActionAngle:
    """Action and angle of ``pi`` read through the leading-order chart.

    The chart coordinates are ``P = pi_x / sqrt(alpha_e)``, ``Q = pi_y /
    sqrt(alpha_e)``; the action is their canonical quadratic form and
    the angle is measured so a pure-``P`` state has ``psi = 0`` and the
    linearized spin advances ``psi`` at rate ``+omega_e``.  At the chart
    center the angle is reported as ``0``.
    """
    ra = np.sqrt(coeffs.alpha_e)
    return action_angle_from_chart(s.pi[1] / ra, s.pi[0] / ra, coeffs)


def _measure_raw(y: np.ndarray, coeffs: NormalFormCoeffs) -> ActionAngle:
    ra = np.sqrt(coeffs.alpha_e)
    u = y[1] / ra * coeffs.D**-0.25
    v = y[0] / ra * coeffs.D**0.25
    return ActionAngle(0.5 * (u * u + v * v), float(np.arctan2(u, v)))


def _crossing_series(
    traj: Trajectory, coeffs: NormalFormCoeffs
) -> tuple[np.ndarray, np.ndarray, np.ndarray] | None:
    """Times, actions, and continuously-unwrapped angles at section crossings.

    Returns ``None`` when the trajectory crosses the section fewer than
    twice.  The angle branch at each crossing is fixed by a dense
    unwrapped angle track along the whole run, so multi-turn advances
    between returns are resolved without ambiguity.
    """
    direction = -1 if coeffs.xi_e < 0 else 1
    crossings = find_crossings(traj, lambda y: y[4], direction)
    if len(crossings) < 2:
        return None

    period = abs(2.0 * np.pi / coeffs.xi_e)
    n_dense = int(np.ceil(_PSI_SAMPLES_PER_PERIOD * traj.t_final / period)) + 1
    t_dense = np.linspace(traj.times[0], traj.t_final, n_dense)
    psi_dense = np.unwrap(
        [_measure_raw(y, coeffs).psi for y in traj.eval(t_dense)]
    )

    t_cross = np.array([c.t for c in crossings])
    I_cross = np.empty(t_cross.size)
    psi_cross = np.empty(t_cross.size)
    for j, c in enumerate(crossings):
        aa = _measure_raw(c.state, coeffs)
        guide = np.interp(c.t, t_dense, psi_dense)
        turns = np.round((guide - aa.psi) / (2.0 * np.pi))
        I_cross[j] = aa.I
        psi_cross[j] = aa.psi + 2.0 * np.pi * turns
    return t_cross, I_cross, psi_cross


def _sample_from_trajectory(
    traj: Trajectory, spec: SectionSpec, coeffs: NormalFormCoeffs
) -> PoincareSample:
    """Per-return averages for one run, or an invalid sample."""
    invalid = PoincareSample(np.nan, np.nan, np.nan, False)

    # Validity: the chart (and the prediction) live near the vertical spin.
    dev = np.linalg.norm(
        traj.states[:, :3] - np.array([0.0, 0.0, coeffs.alpha_e]), axis=1
    )
    if dev.max() > VALIDITY_RADIUS * coeffs.alpha_e:
        logger.warning(
            "trajectory left the chart neighborhood (max |pi - alpha k| = %.3g)",
            dev.max(),
        )
        return invalid

    series = _crossing_series(traj, coeffs)
    if series is None:
        logger.warning("fewer than two section crossings; no return measured")
        return invalid
    t_cross, I_cross, psi_cross = series

    n_pairs = min(spec.n_returns, t_cross.size - 1)
    dpsi = np.diff(psi_cross)[:n_pairs]
    T = np.diff(t_cross)[:n_pairs]
    I_mid = 0.5 * (I_cross[:-1] + I_cross[1:])[:n_pairs]
    return PoincareSample(
        float(I_mid.mean()), float(dpsi.mean()), float(T.mean()), True
    )


def poincare_map(
    spec: SectionSpec,
    params: VehicleParams,
    cfg: IntegratorConfig | None = None,
) -> list[PoincareSample]:
    """Measure the return map of the original system, one sample per target action.

    For each action in ``spec.I_grid``, the initial condition is the
    blow-down of the tilted blown-up equilibrium with ``|p| = spec.a``,
    perturbed in the ``(pi_x, pi_y)`` plane to the target action at
    angle zero.  The section is "azimuth of ``p`` returns to its launch
    value", crossed in the drift direction ``sign(xi_e)``; with the
    launch in the x-z plane that is the zero set of ``p_y``.  Samples
    whose trajectory leaves the chart neighborhood, or which cross the
    section fewer than twice, come back flagged invalid with NaN fields.
    """
    cfg = cfg or IntegratorConfig()
    coeffs = coefficients(params, spec.alpha_e)
    rhs = field_fn(params)
    t_final = (spec.n_returns + 1.5) * abs(2.0 * np.pi / coeffs.xi_e)

    samples = []
    for I0 in spec.I_grid:
        traj = integrate(
            rhs, _initial_state(float(I0), spec, coeffs), (0.0, t_final), cfg
        )
        samples.append(_sample_from_trajectory(traj, spec, coeffs))
    return samples


def _initial_state(I0: float, spec: SectionSpec, coeffs: NormalFormCoeffs) -> np.ndarray:
    """Launch state: tilted-leaf offset ``p = a w`` plus a pure-``P`` (angle
    zero) angular perturbation realizing action ``I0`` at leading order."""
    w0 = blown_relative_equilibrium(spec.alpha_e, spec.theta).w
    pi0 = np.array(
        [
            np.sqrt(2.0 * I0 * spec.alpha_e) * coeffs.D**-0.25,
            0.0,
            spec.alpha_e,
        ]
    )
    return np.concatenate([pi0, spec.a * w0])


def fit_twist(samples: Sequence[PoincareSample]) -> TwistFit:
    """Least-squares line ``dpsi = intercept + slope * I`` over valid samples.

    The slope is the measured twist; the intercept absorbs the fixed
    rotation together with its higher-order-in-``a`` shift.  Requires at
    least four valid samples whose actions span a factor of ten.
    """
    valid = [s for s in samples if s.valid]
    if len(valid) < 4:
        raise ValueError(f"need at least 4 valid samples, got {len(valid)}")
    I = np.array([s.I_measured for s in valid])
    dpsi = np.array([s.dpsi for s in valid])
    if I.min() > 0.1 * I.max():
        raise ValueError(
            f"action values must span a decade (got [{I.min():.3g}, {I.max():.3g}])"
        )
    A = np.column_stack([I, np.ones_like(I)])
    coef, *_ = np.linalg.lstsq(A, dpsi, rcond=None)
    resid = dpsi - A @ coef
    return TwistFit(float(coef[0]), float(coef[1]), float(np.sqrt(np.mean(resid**2))))


def _figure_point(args: tuple) -> FigureRow:
    """One inertia-family point; module-level so process pools can pickle it."""
    I1, a, alpha_e, M, n_returns = args
    params = VehicleParams(I=(I1, 1.0 - I1, 1.0), M=M)
    predicted = 1.0 / twist_slope(params, alpha_e)
    try:
        spec = SectionSpec(alpha_e=alpha_e, a=a, n_returns=n_returns)
        fit = fit_twist(poincare_map(spec, params))
        measured = 1.0 / fit.slope
    except Exception:
        logger.warning("figure point I1=%.4g failed", I1, exc_info=True)
        return FigureRow(I1, np.nan, predicted, np.nan)
    return FigureRow(
        I1, measured, predicted, abs(measured - predicted) / abs(predicted)
    )


def _worker_count() -> int:
    env = os.environ.get("UVSTAB_THREADS", "")
    try:
        return max(1, int(env))
    except ValueError:
        return 1


def figure_experiment(
    I1_grid: Sequence[float],
    a: float,
    alpha_e: float = 1.0,
    M: Sequence[float] = (1.0, 2.0, 3.0),
    n_returns: int = 32,
    workers: int | None = None,
) -> list[FigureRow]:
    """Measured vs predicted reciprocal twist over the family ``I = (I1, 1-I1, 1)``.

    For this family the moments satisfy ``I1 + I2 = I3``, which makes
    the fixed rotation of the return map exactly one turn, so the twist
    is directly visible.  Each row reports the measured ``I/h(I) =
    1/slope``, the closed-form prediction (``-I1 (1-I1)/pi`` at
    ``alpha_e = 1``), and their relative difference.  Failed points get
    NaN measurements and do not abort the sweep; rows come back in grid
    order.  ``workers=None`` reads the ``UVSTAB_THREADS`` environment
    variable (default 1).
    """
    grid = [float(v) for v in I1_grid]
    for I1 in grid:
        if not 0.0 < I1 < 1.0:
            raise ValueError(f"I1 must lie in (0, 1), got {I1}")
    args = [(I1, float(a), float(alpha_e), tuple(M), int(n_returns)) for I1 in grid]
    n_workers = _worker_count() if workers is None else max(1, int(workers))
    if n_workers > 1 and len(args) > 1:
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            return list(pool.map(_figure_point, args))
    return [_figure_point(arg) for arg in args]
