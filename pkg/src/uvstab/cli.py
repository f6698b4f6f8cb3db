"""Command-line drivers for simulation runs, coefficient tables, the
measured-vs-predicted twist experiment, return-map scans, and the
verification suite.

Exit codes: 0 success, 1 verification failure, 2 configuration or usage
error, 3 integration failure, 4 inadmissible spin axis (intermediate
axis or zero spin).

Result tables are comma-separated with full-precision floats; the
experiment drivers also emit a gnuplot script and a rendered PNG next
to each table, so figures can be regenerated offline from the data.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from . import blowup as bu
from . import dynamics as dy
from . import normalform as nf
from . import poincare as pc
from . import verify as verify_mod
from .config import ConfigError, RunConfig, load_config, write_csv
from .integrate import IntegrationError, integrate

logger = logging.getLogger(__name__)

_DEFAULT_T_FINAL = 100.0


def _ensure_out(cfg: RunConfig | None, override: str | None) -> Path:
    out = Path(override if override is not None else cfg.output_dir if cfg else "out")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _pyplot():
    """Import pyplot lazily with a file-only backend."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------


def _drift(values: np.ndarray) -> float:
    return float(np.abs(values - values[0]).max())


def cmd_simulate(args: argparse.Namespace) -> int:
    cfg = load_config(args.config)
    out = _ensure_out(cfg, args.out)
    if args.t_final <= 0.0:
        raise ConfigError("--t-final must be positive")
    a = cfg.section.a if args.a is None else float(args.a)
    if a < 0.0:
        raise ConfigError("--a must be nonnegative")
    re = bu.blown_relative_equilibrium(cfg.alpha_e, cfg.section.theta)

    if args.system == "original":
        if args.equilibrium:
            y0 = dy.equilibrium(cfg.alpha_e, cfg.params).state.to_array()
        else:
            y0 = bu.blow_down(bu.BlownUpState(re.w, re.wdot, a, re.gamma)).to_array()
        traj = integrate(dy.field_fn(cfg.params), y0, (0.0, args.t_final), cfg.integrator)
        pi, p = traj.states[:, :3], traj.states[:, 3:]
        energy = 0.5 * np.einsum("ij,ij->i", pi, pi / cfg.params.I) + 0.5 * np.einsum(
            "ij,ij->i", p, p / cfg.params.M
        )
        p_norm = np.linalg.norm(p, axis=1)
        pi_dot_p = np.einsum("ij,ij->i", pi, p)
        pi_norm = np.linalg.norm(pi, axis=1)
        header = [
            "t", "pi_x", "pi_y", "pi_z", "p_x", "p_y", "p_z",
            "energy", "p_norm", "pi_dot_p", "pi_norm",
        ]
        table = np.column_stack([traj.times, traj.states, energy, p_norm, pi_dot_p, pi_norm])
        path = write_csv(out / "trajectory.csv", header, table)
        print(f"simulate original: {table.shape[0]} samples over t=[0,{args.t_final:g}] -> {path}")
        print(
            "max drift: "
            f"energy={_drift(energy):.3e} p_norm={_drift(p_norm):.3e} "
            f"pi_dot_p={_drift(pi_dot_p):.3e} pi_norm={_drift(pi_norm):.3e}"
        )
        return 0

    # Blown-up run: the unit-norm/tangency constraint is re-enforced after
    # every accepted step regardless of the configured projection flag.
    icfg = dataclasses.replace(cfg.integrator, constraint_projection=True)
    field = bu.blown_field_fn(cfg.params, a, re.gamma)
    traj = integrate(field, re.to_array(), (0.0, args.t_final), icfg)
    w, wdot = traj.states[:, :3], traj.states[:, 3:]
    pi = wdot + re.gamma * w
    energy = 0.5 * np.einsum("ij,ij->i", pi, pi / cfg.params.I) + 0.5 * a**2 * np.einsum(
        "ij,ij->i", w, w / cfg.params.M
    )
    J = -np.sqrt(re.gamma**2 + np.einsum("ij,ij->i", wdot, wdot))
    header = ["t", "w_x", "w_y", "w_z", "wdot_x", "wdot_y", "wdot_z", "energy", "J"]
    table = np.column_stack([traj.times, traj.states, energy, J])
    path = write_csv(out / "trajectory.csv", header, table)
    constraint = max(
        float(np.abs(np.linalg.norm(w, axis=1) - 1.0).max()),
        float(np.abs(np.einsum("ij,ij->i", w, wdot)).max()),
    )
    print(
        f"simulate blownup (a={a:g}): {table.shape[0]} samples over "
        f"t=[0,{args.t_final:g}] -> {path}"
    )
    print(
        f"max drift: energy={_drift(energy):.3e} J={_drift(J):.3e} "
        f"constraint={constraint:.3e}"
    )
    return 0


# ---------------------------------------------------------------------------
# coeffs
# ---------------------------------------------------------------------------


def cmd_coeffs(args: argparse.Namespace) -> int:
    cfg = load_config(args.config)
    out = _ensure_out(cfg, args.out)
    coeffs = nf.coefficients(cfg.params, cfg.alpha_e)
    twist = nf.twist_condition(cfg.params, cfg.alpha_e)
    doc = {**coeffs._asdict(), "twist": twist.value, "satisfied": twist.satisfied}
    text = json.dumps(doc, indent=2)
    print(text)
    (out / "coeffs.json").write_text(text + "\n")
    return 0


# ---------------------------------------------------------------------------
# figure
# ---------------------------------------------------------------------------

_FIGURE_GP = """\
# Render with: gnuplot figure.gp
# Measured reciprocal twist over the inertia family, against prediction.
set terminal pngcairo size 900,600 enhanced
set output 'figure-gnuplot.png'
set datafile separator comma
set xlabel 'I_1'
set ylabel 'I / h(I)'
set key top center
plot 'figure.csv' skip 1 using 1:3 with lines lw 2 title 'predicted', \\
     'figure.csv' skip 1 using 1:2 with points pt 7 ps 1.2 title 'measured'
"""


def _render_figure_png(path: Path, rows: Sequence[pc.FigureRow]) -> None:
    plt = _pyplot()
    I1 = np.array([r.I1 for r in rows])
    fig, ax = plt.subplots(figsize=(7.0, 4.5), dpi=130)
    ax.plot(I1, [r.predicted for r in rows], lw=1.5, label="predicted")
    ax.plot(I1, [r.measured for r in rows], "o", ms=4.5, label="measured")
    ax.set_xlabel(r"$I_1$")
    ax.set_ylabel(r"$I/h(I)$")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def cmd_figure(args: argparse.Namespace) -> int:
    cfg = load_config(args.config)
    out = _ensure_out(cfg, args.out)
    if args.i1_count < 0:
        raise ConfigError("--i1-count must be nonnegative")
    grid = np.linspace(args.i1_min, args.i1_max, args.i1_count)
    rows = pc.figure_experiment(
        grid,
        a=cfg.section.a,
        alpha_e=cfg.alpha_e,
        M=tuple(cfg.params.M),
        n_returns=cfg.section.n_returns,
        workers=args.workers,
    )
    path = write_csv(out / "figure.csv", ["I1", "measured", "predicted", "rel_err"], rows)
    (out / "figure.gp").write_text(_FIGURE_GP)
    _render_figure_png(out / "figure.png", rows)
    if rows:
        errs = np.array([r.rel_err for r in rows])
        worst = float(np.nanmax(errs)) if np.isfinite(errs).any() else np.nan
        failed = int(np.sum(~np.isfinite(errs)))
        print(f"figure: {len(rows)} rows -> {path}; worst rel_err={worst:.3e}" + (
            f" ({failed} rows failed)" if failed else ""
        ))
    else:
        print(f"figure: 0 rows -> {path}")
    return 0


# ---------------------------------------------------------------------------
# poincare
# ---------------------------------------------------------------------------


def _render_poincare_png(path: Path, samples: Sequence[pc.PoincareSample],
                         fit: pc.TwistFit | None) -> None:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(7.0, 4.5), dpi=130)
    valid = [s for s in samples if s.valid]
    I = np.array([s.I_measured for s in valid])
    dpsi = np.array([s.dpsi for s in valid])
    ax.plot(I, dpsi, "o", ms=4.5, label="measured")
    if fit is not None and I.size:
        xs = np.linspace(I.min(), I.max(), 64)
        ax.plot(xs, fit.intercept + fit.slope * xs, lw=1.5,
                label=f"fit: slope {fit.slope:.4g}")
    ax.set_xlabel(r"$I$")
    ax.set_ylabel(r"$\Delta\psi$")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def cmd_poincare(args: argparse.Namespace) -> int:
    cfg = load_config(args.config)
    out = _ensure_out(cfg, args.out)
    samples = pc.poincare_map(cfg.section, cfg.params, cfg.integrator)
    path = write_csv(
        out / "poincare.csv",
        ["I", "dpsi", "T", "valid"],
        [(s.I_measured, s.dpsi, s.T_measured, s.valid) for s in samples],
    )
    fit = None
    try:
        fit = pc.fit_twist(samples)
    except ValueError as exc:
        logger.warning("twist fit skipped: %s", exc)
    _render_poincare_png(out / "poincare.png", samples, fit)
    n_valid = sum(s.valid for s in samples)
    print(f"poincare: {len(samples)} samples ({n_valid} valid) -> {path}")
    if fit is not None:
        predicted = nf.twist_slope(cfg.params, cfg.alpha_e)
        print(
            f"twist fit: slope={fit.slope:.6g} (predicted {predicted:.6g}) "
            f"intercept={fit.intercept:.6g} residual={fit.residual:.3e}"
        )
    return 0


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------


def cmd_verify(args: argparse.Namespace) -> int:
    names = args.checks.split(",") if args.checks else None
    results = verify_mod.run(names)
    out = _ensure_out(None, args.out)
    width = max(len(r.name) for r in results)
    for r in results:
        line = (
            f"{'PASS' if r.passed else 'FAIL'} {r.name:<{width}} "
            f"measured={r.measured:.3e} tolerance={r.tolerance:.3e}"
        )
        if r.detail:
            line += f"  [{r.detail}]"
        print(line)
    report = [r._asdict() for r in results]
    (out / "verify.json").write_text(json.dumps(report, indent=2) + "\n")
    n_fail = sum(not r.passed for r in results)
    print(f"verify: {len(results) - n_fail}/{len(results)} checks passed")
    return 1 if n_fail else 0


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="uvstab",
        description=__doc__.split("\n\n")[0],
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", metavar="DIR", help="output directory (default: from config)")
    common.add_argument(
        "--seed", type=int, metavar="N",
        help="reserved; all computations are deterministic",
    )
    withcfg = argparse.ArgumentParser(add_help=False)
    withcfg.add_argument("--config", required=True, metavar="PATH", help="JSON run configuration")

    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser(
        "simulate", parents=[common, withcfg], help="integrate one trajectory to CSV"
    )
    sim.add_argument("--system", choices=("original", "blownup"), default="original")
    sim.add_argument("--t-final", type=float, default=_DEFAULT_T_FINAL, metavar="T")
    sim.add_argument(
        "--a", type=float, default=None, metavar="A",
        help="leaf offset |p| override (default: section.a; 0 allowed)",
    )
    sim.add_argument(
        "--equilibrium", action="store_true",
        help="start exactly at the spin equilibrium (original system only)",
    )
    sim.set_defaults(func=cmd_simulate)

    coeffs = sub.add_parser(
        "coeffs", parents=[common, withcfg], help="normal-form constants as JSON"
    )
    coeffs.set_defaults(func=cmd_coeffs)

    fig = sub.add_parser(
        "figure", parents=[common, withcfg],
        help="measured-vs-predicted twist table, gnuplot script, and PNG",
    )
    fig.add_argument("--i1-min", type=float, default=0.15, metavar="X")
    fig.add_argument("--i1-max", type=float, default=0.85, metavar="X")
    fig.add_argument("--i1-count", type=int, default=15, metavar="N")
    fig.add_argument(
        "--workers", type=int, default=None, metavar="N",
        help="parallel grid points (default: UVSTAB_THREADS or 1)",
    )
    fig.set_defaults(func=cmd_figure)

    poin = sub.add_parser(
        "poincare", parents=[common, withcfg], help="return-map samples over the action grid"
    )
    poin.set_defaults(func=cmd_poincare)

    ver = sub.add_parser("verify", parents=[common], help="run the invariant suite")
    ver.add_argument(
        "--checks", metavar="NAMES",
        help="comma-separated subset of checks (default: all)",
    )
    ver.set_defaults(func=cmd_verify)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (nf.IntermediateAxisError, nf.ZeroSpinError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except IntegrationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
