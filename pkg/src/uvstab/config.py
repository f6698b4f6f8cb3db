"""Run-configuration files: JSON schema, validation, and serialization.

A run configuration bundles the vehicle parameters, the spin, the
integrator tolerances, and the section experiment into one versioned
JSON document.  Validation is strict: unknown keys are rejected with
their dotted path, so typos fail loudly instead of silently falling
back to defaults.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from .dynamics import VehicleParams
from .integrate import IntegratorConfig
from .poincare import SectionSpec

__all__ = [
    "CONFIG_VERSION",
    "ConfigError",
    "RunConfig",
    "load_config",
    "parse_config",
    "config_to_dict",
    "save_config",
    "write_csv",
    "read_csv",
]

CONFIG_VERSION = 1

#: Default |p| offset as a fraction of the spin, used when ``section.a``
#: is not given.
DEFAULT_A_FRACTION = 1e-2


class ConfigError(ValueError):
    """Invalid configuration; the message carries the dotted key path."""


@dataclass(frozen=True, eq=False)
class RunConfig:
    params: VehicleParams
    alpha_e: float
    integrator: IntegratorConfig
    section: SectionSpec
    output_dir: str


def _require_mapping(node: Any, path: str) -> dict:
    if not isinstance(node, dict):
        raise ConfigError(f"{path}: expected an object, got {type(node).__name__}")
    return node


def _reject_unknown(node: dict, allowed: Iterable[str], path: str) -> None:
    unknown = sorted(set(node) - set(allowed))
    if unknown:
        where = f"{path}." if path else ""
        raise ConfigError(f"unknown key: {where}{unknown[0]}")


def _get_number(node: dict, key: str, path: str, default=None):
    if key not in node:
        if default is None:
            raise ConfigError(f"{path}.{key}: required")
        return default
    value = node[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{path}.{key}: expected a number, got {type(value).__name__}")
    return float(value)


def _get_vec3(node: dict, key: str, path: str) -> list[float]:
    if key not in node:
        raise ConfigError(f"{path}.{key}: required")
    value = node[key]
    if not isinstance(value, list) or len(value) != 3:
        raise ConfigError(f"{path}.{key}: expected a list of 3 numbers")
    for i, entry in enumerate(value):
        if isinstance(entry, bool) or not isinstance(entry, (int, float)):
            raise ConfigError(f"{path}.{key}[{i}]: expected a number")
    return [float(v) for v in value]


def parse_config(data: Any, source: str = "config") -> RunConfig:
    """Validate a decoded JSON document and build the run configuration.

    Raises :class:`ConfigError` with a dotted key path on any problem.
    """
    root = _require_mapping(data, source)
    _reject_unknown(
        root, ("version", "params", "alpha_e", "integrator", "section", "output_dir"), ""
    )
    if "version" not in root:
        raise ConfigError("version: required")
    if root["version"] != CONFIG_VERSION:
        raise ConfigError(
            f"version: expected {CONFIG_VERSION}, got {root['version']!r}"
        )

    params_node = _require_mapping(root.get("params"), "params")
    _reject_unknown(params_node, ("I", "M"), "params")
    try:
        params = VehicleParams(
            I=_get_vec3(params_node, "I", "params"),
            M=_get_vec3(params_node, "M", "params"),
        )
    except ValueError as exc:
        raise ConfigError(f"params: {exc}") from exc

    alpha_e = _get_number(root, "alpha_e", "")
    if alpha_e <= 0.0:
        # The section experiment and the chart normalizations assume a
        # positive spin; negative spins remain available through the API.
        raise ConfigError("alpha_e: must be positive")

    integ_node = _require_mapping(root.get("integrator", {}), "integrator")
    _reject_unknown(
        integ_node,
        ("rel_tol", "abs_tol", "max_step", "constraint_projection"),
        "integrator",
    )
    max_step = integ_node.get("max_step", None)
    if max_step is None:
        max_step = np.inf
    elif isinstance(max_step, bool) or not isinstance(max_step, (int, float)):
        raise ConfigError("integrator.max_step: expected a number or null")
    projection = integ_node.get("constraint_projection", False)
    if not isinstance(projection, bool):
        raise ConfigError("integrator.constraint_projection: expected a boolean")
    try:
        integrator = IntegratorConfig(
            rel_tol=_get_number(integ_node, "rel_tol", "integrator", 1e-10),
            abs_tol=_get_number(integ_node, "abs_tol", "integrator", 1e-12),
            max_step=float(max_step),
            constraint_projection=projection,
        )
    except ValueError as exc:
        raise ConfigError(f"integrator: {exc}") from exc

    section_node = _require_mapping(root.get("section", {}), "section")
    _reject_unknown(section_node, ("a", "theta", "n_returns", "I_grid"), "section")
    n_returns = section_node.get("n_returns", 32)
    if isinstance(n_returns, bool) or not isinstance(n_returns, int):
        raise ConfigError("section.n_returns: expected an integer")
    grid = section_node.get("I_grid", None)
    if grid is not None:
        if not isinstance(grid, list) or not grid:
            raise ConfigError("section.I_grid: expected a nonempty list or null")
        for i, entry in enumerate(grid):
            if isinstance(entry, bool) or not isinstance(entry, (int, float)):
                raise ConfigError(f"section.I_grid[{i}]: expected a number")
        grid = [float(v) for v in grid]
    try:
        section = SectionSpec(
            alpha_e=alpha_e,
            a=_get_number(
                section_node, "a", "section", DEFAULT_A_FRACTION * alpha_e
            ),
            theta=_get_number(section_node, "theta", "section", np.pi / 2.0),
            n_returns=n_returns,
            I_grid=grid,
        )
    except ValueError as exc:
        raise ConfigError(f"section: {exc}") from exc

    output_dir = root.get("output_dir", "out")
    if not isinstance(output_dir, str):
        raise ConfigError("output_dir: expected a string")

    return RunConfig(
        params=params,
        alpha_e=alpha_e,
        integrator=integrator,
        section=section,
        output_dir=output_dir,
    )


def load_config(path: str | Path) -> RunConfig:
    """Read and validate a JSON run configuration."""
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not valid JSON: {exc}") from exc
    return parse_config(data, source=str(path))


def config_to_dict(cfg: RunConfig) -> dict:
    """Serialize to the JSON document shape; inverse of :func:`parse_config`.

    All defaulted values are materialized, so a serialize/parse round
    trip reproduces the same document.
    """
    max_step = cfg.integrator.max_step
    return {
        "version": CONFIG_VERSION,
        "params": {
            "I": [float(v) for v in cfg.params.I],
            "M": [float(v) for v in cfg.params.M],
        },
        "alpha_e": cfg.alpha_e,
        "integrator": {
            "rel_tol": cfg.integrator.rel_tol,
            "abs_tol": cfg.integrator.abs_tol,
            "max_step": None if np.isinf(max_step) else max_step,
            "constraint_projection": cfg.integrator.constraint_projection,
        },
        "section": {
            "a": cfg.section.a,
            "theta": cfg.section.theta,
            "n_returns": cfg.section.n_returns,
            "I_grid": [float(v) for v in cfg.section.I_grid],
        },
        "output_dir": cfg.output_dir,
    }


def save_config(cfg: RunConfig, path: str | Path) -> None:
    Path(path).write_text(json.dumps(config_to_dict(cfg), indent=2) + "\n")


# ---------------------------------------------------------------------------
# delimited output
# ---------------------------------------------------------------------------


def _format_cell(value: Any) -> str:
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    # 17 significant digits: enough for bit-identical float round trips.
    return "%.17g" % float(value)


def write_csv(path: str | Path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    """Write comma-separated data with a header row and full-precision floats."""
    path = Path(path)
    lines = [",".join(header)]
    lines.extend(",".join(_format_cell(v) for v in row) for row in rows)
    path.write_text("\n".join(lines) + "\n")
    return path


def read_csv(path: str | Path) -> tuple[list[str], np.ndarray]:
    """Read back a :func:`write_csv` file: header names and a float matrix."""
    lines = Path(path).read_text().strip().splitlines()
    header = lines[0].split(",")
    data = (
        np.array([[float(v) for v in line.split(",")] for line in lines[1:]])
        if len(lines) > 1
        else np.empty((0, len(header)))
    )
    return header, data
