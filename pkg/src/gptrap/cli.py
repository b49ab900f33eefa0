"""Config-driven batch front-end with machine-readable reports.

The executable reads a YAML config, dispatches to the library, and
writes a JSON or CSV report whose bytes are a pure function of the
config and the package version.  Floats are printed with 17
significant digits so every value round-trips exactly; wall-clock
time goes to stderr, never into the payload.

Config keys:

    trap:         kind (harmonic | power | zero-in-box), coefficient,
                  exponent
    interaction:  kind (hard-sphere | square-barrier | hard-core-well |
                  power-tail) plus its parameters (d, V0, R0, well,
                  A, p, r_on, core_radius)
    N:            particle number, or a strictly increasing list
    a:            scattering length (exclusive with a1)
    a1:           scattering length of the unit problem; each run then
                  uses a = a1 / N
    grid:         kind (radial | cartesian), h, R, boundary
                  (decay | dirichlet | neumann)
    solver:       tolerance, max_iter
    bounds:       C, L, cube_R
    outputs:      json, csv (paths written in addition to --out)

Any key can be overridden from the environment with the prefix
GPTRAP_ and a double underscore as the nesting separator, for example
GPTRAP_SOLVER__TOLERANCE=1e-10.  Override values are parsed as YAML.
Unknown keys are hard errors: a typo in a tolerance must not silently
weaken a certificate.

Exit status: 0 when the run completed and every validity flag is
true, 1 when the run completed with some flag false (including solver
non-convergence, which still emits a partial report), 2 for config or
usage errors.
"""
from __future__ import annotations

import argparse
import concurrent.futures
import csv
import difflib
import hashlib
import io
import json
import math
import os
import sys
import time

import numpy as np
import yaml

from . import __version__
from .bounds import dyson_ingredients, build_dyson_f, dyson_upper_bound, \
    estar_minimize, sandwich_report
from .errors import ConfigError, ConvergenceError, GptrapError
from .gp import minimize, structural_assertions, virial_residual
from .grids import Grid
from .potentials import InteractionPotential, TrapPotential, scale_interaction
from .scattering import scattering_length
from .tf import gp_tf_convergence, tf_minimize, tf_scaling_checks

# ---------------------------------------------------------------------------
# config loading


_SCHEMA = {
    "trap": {"kind": None, "coefficient": None, "exponent": None},
    "interaction": {"kind": None, "d": None, "V0": None, "R0": None,
                    "well": None, "A": None, "p": None, "r_on": None,
                    "core_radius": None},
    "N": None,
    "a": None,
    "a1": None,
    "grid": {"kind": None, "h": None, "R": None, "boundary": None},
    "solver": {"tolerance": None, "max_iter": None},
    "bounds": {"C": None, "L": None, "cube_R": None},
    "outputs": {"json": None, "csv": None},
}

_ENV_PREFIX = "GPTRAP_"


def _reject_unknown_keys(cfg: dict, schema: dict, path: str = "") -> None:
    for key, value in cfg.items():
        full = f"{path}{key}"
        if key not in schema:
            hint = difflib.get_close_matches(str(key), list(schema), n=1)
            extra = f" (did you mean {path + hint[0]!r}?)" if hint else ""
            raise ConfigError(f"unknown config key {full!r}{extra}")
        sub = schema[key]
        if isinstance(sub, dict):
            if value is None:
                continue
            if not isinstance(value, dict):
                raise ConfigError(f"config key {full!r} must be a mapping")
            _reject_unknown_keys(value, sub, full + ".")


def _parse_yaml(text: str, source: str) -> dict:
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        where = f" at line {mark.line + 1}, column {mark.column + 1}" \
            if mark is not None else ""
        raise ConfigError(f"cannot parse {source}{where}: {e}") from e
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(f"{source} must contain a mapping at top level")
    return data


def _schema_key(schema: dict, part: str) -> str:
    """Resolve an env path component against schema keys, ignoring case
    (environment names are conventionally upper case while config keys
    such as N or V0 carry meaningful case)."""
    for key in schema:
        if key.lower() == part:
            return key
    return part


def _apply_env_overrides(cfg: dict, environ) -> None:
    """Fold GPTRAP_SECTION__KEY=value into cfg, parsing values as YAML."""
    for name in sorted(environ):
        if not name.startswith(_ENV_PREFIX):
            continue
        parts = name[len(_ENV_PREFIX):].lower().split("__")
        try:
            value = yaml.safe_load(environ[name])
        except yaml.YAMLError as e:
            raise ConfigError(f"cannot parse env override {name}: {e}") from e
        node, schema = cfg, _SCHEMA
        for part in parts[:-1]:
            key = _schema_key(schema, part)
            nxt = node.get(key)
            if not isinstance(nxt, dict):
                nxt = {}
                node[key] = nxt
            node = nxt
            schema = schema.get(key) if isinstance(schema.get(key), dict) \
                else {}
        node[_schema_key(schema, parts[-1])] = value


def _want_number(cfg: dict, path: str, default=None, positive: bool = False):
    node = cfg
    for part in path.split("."):
        if not isinstance(node, dict) or part not in node or node[part] is None:
            return default
        node = node[part]
    if isinstance(node, bool) or not isinstance(node, (int, float)):
        raise ConfigError(f"config key {path!r} must be a number, "
                          f"got {node!r}")
    value = float(node)
    if positive and value <= 0:
        raise ConfigError(f"config key {path!r} must be positive, "
                          f"got {value!r}")
    return value


def _want_str(cfg: dict, path: str, default=None, choices=None):
    node = cfg
    for part in path.split("."):
        if not isinstance(node, dict) or part not in node or node[part] is None:
            return default
        node = node[part]
    if not isinstance(node, str):
        raise ConfigError(f"config key {path!r} must be a string, "
                          f"got {node!r}")
    if choices is not None and node not in choices:
        raise ConfigError(f"config key {path!r} must be one of "
                          f"{sorted(choices)}, got {node!r}")
    return node


def _build_trap(cfg: dict) -> TrapPotential:
    kind = _want_str(cfg, "trap.kind", default="harmonic",
                     choices={"harmonic", "power", "zero-in-box"})
    coef = _want_number(cfg, "trap.coefficient", default=1.0, positive=True)
    if kind == "harmonic":
        return TrapPotential.harmonic(coefficient=coef)
    if kind == "power":
        s = _want_number(cfg, "trap.exponent", positive=True)
        if s is None:
            raise ConfigError("trap.exponent is required for a power trap")
        return TrapPotential.power(s, coefficient=coef)
    return TrapPotential.zero_in_box()


def _build_interaction(cfg: dict) -> InteractionPotential | None:
    if not isinstance(cfg.get("interaction"), dict):
        return None
    kind = _want_str(cfg, "interaction.kind",
                     choices={"hard-sphere", "square-barrier",
                              "hard-core-well", "power-tail"})
    if kind is None:
        raise ConfigError("interaction.kind is required")

    def need(path):
        value = _want_number(cfg, path, positive=True)
        if value is None:
            raise ConfigError(f"{path} is required for kind {kind!r}")
        return value

    if kind == "hard-sphere":
        return InteractionPotential.hard_sphere(need("interaction.d"))
    if kind == "square-barrier":
        return InteractionPotential.square_barrier(need("interaction.V0"),
                                                   need("interaction.R0"))
    if kind == "hard-core-well":
        return InteractionPotential.hard_core_well(need("interaction.d"),
                                                   need("interaction.R0"),
                                                   need("interaction.well"))
    return InteractionPotential.power_tail(
        need("interaction.A"), need("interaction.p"),
        r_on=_want_number(cfg, "interaction.r_on", default=1.0,
                          positive=True),
        core_radius=_want_number(cfg, "interaction.core_radius",
                                 default=0.0))


def _build_grid(cfg: dict) -> Grid:
    kind = _want_str(cfg, "grid.kind", default="radial",
                     choices={"radial", "cartesian"})
    boundary = _want_str(cfg, "grid.boundary",
                         choices={"decay", "dirichlet", "neumann"})
    if boundary is None:
        boundary = "decay" if kind == "radial" else "neumann"
    if boundary == "dirichlet":
        boundary = "decay"
    h = _want_number(cfg, "grid.h", default=0.02, positive=True)
    R = _want_number(cfg, "grid.R", default=8.0, positive=True)
    return Grid(kind=kind, h=h, R=R, boundary=boundary)


def _n_list(cfg: dict) -> list[float]:
    raw = cfg.get("N", 1)
    values = raw if isinstance(raw, list) else [raw]
    if not values:
        raise ConfigError("config key 'N' must not be an empty list")
    out = []
    for v in values:
        if isinstance(v, bool) or not isinstance(v, (int, float)) or v <= 0:
            raise ConfigError(f"config key 'N' entries must be positive "
                              f"numbers, got {v!r}")
        out.append(float(v))
    if isinstance(raw, list) and any(b <= a for a, b in zip(out, out[1:])):
        raise ConfigError("config key 'N' sweep list must be strictly "
                          "increasing")
    return out


class RunConfig:
    """Validated run parameters built from the raw config mapping."""

    def __init__(self, raw: dict):
        _reject_unknown_keys(raw, _SCHEMA)
        self.raw = raw
        self.trap = _build_trap(raw)
        self.interaction = _build_interaction(raw)
        self.N_values = _n_list(raw)
        self.sweep = isinstance(raw.get("N"), list)
        self.a = _want_number(raw, "a")
        self.a1 = _want_number(raw, "a1")
        if self.a is not None and self.a1 is not None:
            raise ConfigError("give either 'a' or 'a1', not both")
        self.grid = _build_grid(raw)
        self.tolerance = _want_number(raw, "solver.tolerance", default=1e-8)
        if not 0.0 < self.tolerance <= 1e-2:
            raise ConfigError(f"solver.tolerance must lie in (0, 1e-2], "
                              f"got {self.tolerance!r}")
        max_iter = _want_number(raw, "solver.max_iter", default=100_000,
                                positive=True)
        self.max_iter = int(max_iter)
        self.bounds_C = _want_number(raw, "bounds.C", default=8.9,
                                     positive=True)
        self.cube_R = _want_number(raw, "bounds.cube_R", default=4.0,
                                   positive=True)
        self.bounds_L = _want_number(raw, "bounds.L",
                                     default=self.cube_R / 2.0,
                                     positive=True)
        cells = 2.0 * self.cube_R / self.bounds_L
        if abs(cells - round(cells)) > 1e-9 or round(cells) < 1:
            raise ConfigError(
                f"bounds.L = {self.bounds_L} must divide the cube side "
                f"{2.0 * self.cube_R} into a whole number of cells")
        self.cube_cells = round(cells)
        self.out_json = _want_str(raw, "outputs.json")
        self.out_csv = _want_str(raw, "outputs.csv")

    def coupling(self, N: float) -> float:
        """Scattering length for a run at particle number N."""
        if self.a is not None:
            return self.a
        if self.a1 is not None:
            return self.a1 / N
        raise ConfigError("this command needs 'a' or 'a1' in the config")

    def single_N(self, command: str) -> float:
        if self.sweep:
            raise ConfigError(f"command {command!r} takes a single N; "
                              f"use sweep for lists")
        return self.N_values[0]

    def hash(self) -> str:
        canon = json.dumps(self.raw, sort_keys=True, default=repr)
        return hashlib.sha256(canon.encode()).hexdigest()


def load_config(path: str, environ=None) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise ConfigError(f"cannot read config {path!r}: {e}") from e
    raw = _parse_yaml(text, path)
    _apply_env_overrides(raw, os.environ if environ is None else environ)
    return RunConfig(raw)


# ---------------------------------------------------------------------------
# report assembly


class RunReport:
    """Structured result of one command, ready for deterministic emission."""

    def __init__(self, command: str, cfg: RunConfig, scalars: dict,
                 rows: list[dict] | None, valid: bool,
                 columns: dict[str, str] | None = None):
        self.command = command
        self.provenance = {
            "version": __version__,
            "config_sha256": cfg.hash(),
            "grid": {"kind": cfg.grid.kind, "h": cfg.grid.h,
                     "R": cfg.grid.R, "boundary": cfg.grid.boundary},
        }
        self.scalars = scalars
        self.rows = rows
        self.valid = valid
        self.columns = columns or {}

    def payload(self) -> dict:
        out = {"command": self.command, "provenance": self.provenance,
               "scalars": self.scalars}
        if self.rows is not None:
            out["rows"] = self.rows
        out["valid"] = self.valid
        return out


def _json_scalar(x) -> str:
    if x is None:
        return "null"
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return "NaN"
        if math.isinf(x):
            return "Infinity" if x > 0 else "-Infinity"
        return format(x, ".17g")
    if isinstance(x, str):
        return json.dumps(x)
    raise TypeError(f"cannot serialize {type(x).__name__}")


def _to_json(obj, indent: int = 0) -> str:
    pad = "  " * (indent + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = (f"{pad}{json.dumps(str(k))}: {_to_json(v, indent + 1)}"
                 for k, v in obj.items())
        return "{\n" + ",\n".join(items) + "\n" + "  " * indent + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = (f"{pad}{_to_json(v, indent + 1)}" for v in obj)
        return "[\n" + ",\n".join(items) + "\n" + "  " * indent + "]"
    return _json_scalar(obj)


def _csv_cell(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    if x is None:
        return ""
    return str(x)


def emit(report: RunReport, fmt: str) -> bytes:
    """Serialize a report.  Identical report objects give identical bytes."""
    if fmt == "json":
        return (_to_json(report.payload()) + "\n").encode()
    if fmt != "csv":
        raise ConfigError(f"unknown output format {fmt!r}")
    rows = report.rows
    if rows is None:
        rows = [_flatten(report.scalars)]
    buf = io.StringIO()
    buf.write(f"# command: {report.command}\n")
    buf.write(f"# version: {report.provenance['version']}\n")
    buf.write(f"# config_sha256: {report.provenance['config_sha256']}\n")
    buf.write(f"# valid: {'true' if report.valid else 'false'}\n")
    columns: list[str] = []
    for row in rows:
        for key in row:
            if key not in columns:
                columns.append(key)
    for name in columns:
        doc = report.columns.get(name)
        buf.write(f"# column {name}: {doc}\n" if doc else f"# column {name}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_csv_cell(row.get(c)) for c in columns])
    return buf.getvalue().encode()


def _flatten(tree: dict, prefix: str = "") -> dict:
    flat = {}
    for key, value in tree.items():
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            flat.update(_flatten(value, name + "."))
        elif isinstance(value, (list, tuple)):
            flat[name] = json.dumps([_csv_cell(v) for v in value])
        else:
            flat[name] = value
    return flat


# ---------------------------------------------------------------------------
# commands


def _cmd_scatter(cfg: RunConfig) -> RunReport:
    if cfg.interaction is None:
        raise ConfigError("scatter needs an interaction section")
    res = scattering_length(cfg.interaction)
    slack = 1e-12 * max(1.0, abs(res.a))
    bracket_ok = res.a_lower - slack <= res.a <= res.a_upper + slack
    sr_applicable = math.isfinite(res.sr_bound)
    sr_ok = (res.a <= res.sr_bound + slack) if sr_applicable else True
    scalars = {
        "a": res.a, "a_lower": res.a_lower, "a_upper": res.a_upper,
        "tail_bound": res.tail_bound, "sr_bound": res.sr_bound,
        "r_max": res.r_max, "steps": res.steps,
        "error_estimate": res.error_estimate,
        "bracket_ok": bracket_ok, "sr_ok": sr_ok,
    }
    return RunReport("scatter", cfg, scalars, None,
                     bool(bracket_ok and sr_ok))


def _solve_scalars(cfg: RunConfig, N: float) -> tuple[dict, bool]:
    a = cfg.coupling(N)
    try:
        sol = minimize(cfg.trap, a, N, cfg.grid, tol=cfg.tolerance,
                       max_iter=cfg.max_iter)
    except ConvergenceError as e:
        return {"N": N, "a": a, "status": f"not converged: {e}"}, False
    checks = structural_assertions(sol)
    struct_ok = all(c["ok"] for c in checks.values() if c["applicable"])
    scalars = {
        "N": N, "a": a,
        "energy": sol.energy, "kinetic": sol.kinetic,
        "potential": sol.potential, "interaction": sol.interaction,
        "mu": sol.mu, "rho_bar": sol.rho_bar,
        "residual": sol.residual, "iterations": sol.iterations,
        "converged": sol.converged,
        "energy_error_estimate": sol.energy_error_estimate,
        "structural": {name: {"applicable": c["applicable"], "ok": c["ok"]}
                       for name, c in checks.items()},
    }
    if cfg.trap.homogeneous_order is not None:
        scalars["virial_residual"] = virial_residual(sol)
    return scalars, bool(sol.converged and struct_ok)


def _cmd_solve(cfg: RunConfig) -> RunReport:
    N = cfg.single_N("solve")
    scalars, valid = _solve_scalars(cfg, N)
    return RunReport("solve", cfg, scalars, None, valid)


def _cmd_tf(cfg: RunConfig) -> RunReport:
    N = cfg.N_values[-1]
    a = cfg.coupling(N)
    tf = tf_minimize(cfg.trap, a, N)
    checks = tf_scaling_checks(cfg.trap, a, N)
    scaling_ok = all(v <= 1e-9 for v in checks.values())
    na_values = sorted({n * cfg.coupling(n) for n in cfg.N_values})
    table = gp_tf_convergence(cfg.trap, na_values, tol=cfg.tolerance)
    rows = [{"Na": r["Na"], "gp_energy": r["gp_energy"],
             "tf_energy": r["tf_energy"], "ratio": r["ratio"],
             "density_l2_rel": r["density_l2_rel"]} for r in table]
    finite = [r for r in rows if math.isfinite(r["Na"])]
    ratios = [r["ratio"] for r in finite]
    ratio_ok = all(b < a for a, b in zip(ratios, ratios[1:]))
    lower_ok = all(r >= 1.0 - 10.0 * cfg.tolerance for r in ratios)
    scalars = {
        "N": N, "a": a, "mu": tf.mu, "energy": tf.energy,
        "support_radius": tf.support_radius,
        "interaction": tf.interaction, "method": tf.method,
        "scaling_checks": checks,
        "ratio_monotone": ratio_ok, "tf_below_gp": lower_ok,
    }
    columns = {
        "Na": "coupling N*a of the scaled unit problem",
        "gp_energy": "E^GP(1, Na)",
        "tf_energy": "Thomas-Fermi energy at the same coupling",
        "ratio": "gp_energy / tf_energy, decreasing toward 1",
        "density_l2_rel": "L2 distance of scaled densities, relative",
    }
    return RunReport("tf", cfg, scalars, rows,
                     bool(scaling_ok and ratio_ok and lower_ok), columns)


_SWEEP_COLUMNS = {
    "N": "particle number",
    "a": "scattering length a1 / N",
    "scattering_rel_diff": "relative mismatch of the rescaled potential's "
                           "scattering length against a1 / N",
    "gp_energy": "GP ground energy E^GP(N, a)",
    "upper": "correlated-trial upper bound",
    "upper_rel_gap": "(upper - gp_energy) / gp_energy",
    "lower": "assembled cell lower bound",
    "lower_rel_gap": "(gp_energy - lower) / gp_energy",
    "lower_valid": "true when the lower bound's dilute-regime conditions "
                   "hold and the bound is positive",
    "worst_Y": "largest per-cell diluteness parameter a^3 n / L^3",
    "box_energy": "Neumann-box GP energy used by the lower bound",
    "ordering_ok": "lower <= gp_energy <= upper",
    "note": "failure notes for skipped components",
}


def _sandwich_rows(cfg: RunConfig, N_values, threads: int) -> dict:
    if cfg.interaction is None:
        raise ConfigError("this command needs an interaction section")
    if cfg.a1 is None:
        raise ConfigError("this command fixes N * a; give 'a1' instead "
                          "of 'a'")

    def run(chunk):
        return sandwich_report(
            cfg.interaction, cfg.a1, chunk, cfg.trap, C=cfg.bounds_C,
            h_radial=cfg.grid.h, R_radial=cfg.grid.R, cube_R=cfg.cube_R,
            cube_cells=cfg.cube_cells, tol=cfg.tolerance)

    if threads > 1 and len(N_values) > 1:
        with concurrent.futures.ThreadPoolExecutor(threads) as pool:
            parts = list(pool.map(run, [[n] for n in N_values]))
        rows = [row for part in parts for row in part["rows"]]
        report = dict(parts[0])
        report["rows"] = rows
    else:
        report = run(N_values)
    return report


def _flat_sandwich_row(row: dict) -> dict:
    notes = []
    for section in ("scattering", "gp", "upper", "lower"):
        status = row.get(section, {}).get("status")
        if status:
            notes.append(f"{section}: {status}")
    gp = row.get("gp", {})
    up = row.get("upper", {})
    lo = row.get("lower", {})
    return {
        "N": row["N"], "a": row["a"],
        "scattering_rel_diff": row.get("scattering", {}).get("rel_diff"),
        "gp_energy": gp.get("energy"),
        "upper": up.get("value"), "upper_rel_gap": up.get("rel_gap"),
        "lower": lo.get("value"), "lower_rel_gap": lo.get("rel_gap"),
        "lower_valid": lo.get("valid"), "worst_Y": lo.get("worst_Y"),
        "box_energy": lo.get("box_energy"),
        "ordering_ok": row.get("ordering_ok", False),
        "note": "; ".join(notes),
    }


def _rows_valid(rows: list[dict]) -> bool:
    ok = True
    for row in rows:
        ok = ok and not row["note"] and bool(row["ordering_ok"])
        ok = ok and bool(row["lower_valid"])
    return ok


def _cmd_sweep(cfg: RunConfig, threads: int) -> RunReport:
    if not cfg.sweep:
        raise ConfigError("sweep needs a list under 'N'")
    report = _sandwich_rows(cfg, cfg.N_values, threads)
    rows = [_flat_sandwich_row(r) for r in report["rows"]]
    scalars = {"a1": cfg.a1, "C": cfg.bounds_C,
               "exponent": report["exponent"]}
    return RunReport("sweep", cfg, scalars, rows, _rows_valid(rows),
                     _SWEEP_COLUMNS)


def _cmd_sandwich(cfg: RunConfig, threads: int) -> RunReport:
    report = _sandwich_rows(cfg, cfg.N_values, threads)
    rows = [_flat_sandwich_row(r) for r in report["rows"]]
    scalars = {"a1": cfg.a1, "C": cfg.bounds_C,
               "exponent": report["exponent"],
               "detail": report["rows"]}
    return RunReport("sandwich", cfg, scalars, rows, _rows_valid(rows),
                     _SWEEP_COLUMNS)


def _cmd_bounds(cfg: RunConfig, threads: int) -> RunReport:
    """Single-N bound report with the trial-function ingredients spelled
    out, where sweep and sandwich only keep the headline numbers."""
    N = cfg.single_N("bounds")
    report = _sandwich_rows(cfg, [N], threads=1)
    row = report["rows"][0]
    flat = _flat_sandwich_row(row)
    scalars = dict(flat)
    scalars["C"] = cfg.bounds_C
    a = row["a"]
    v = scale_interaction(cfg.interaction, cfg.a1, a)
    if "status" not in row.get("gp", {}):
        sol = minimize(cfg.trap, a, N, cfg.grid, tol=cfg.tolerance,
                       max_iter=cfg.max_iter, richardson=False)
        ub = dyson_upper_bound(sol, v)
        df = build_dyson_f(v, ub.b)
        scalars["dyson"] = {
            "b": ub.b, "x": ub.x, "c": ub.c, "epsilon": ub.epsilon,
            "rho_max": ub.rho_max, "rho_bar": ub.rho_bar,
            "precondition_ok": ub.precondition_ok,
            "soft_core": ub.soft_core,
            "ingredients": dyson_ingredients(df),
        }
        est = estar_minimize(cfg.trap, a, N, cfg.grid, tol=cfg.tolerance,
                             max_iter=cfg.max_iter)
        scalars["estar"] = {
            "value": est.estar, "smoothed": est.smoothed, "p": est.p,
            "posthoc_rel": est.posthoc_rel, "x_star": est.x_star,
            "mu_increment": est.mu_increment,
            "precondition_ok": est.precondition_ok,
        }
    return RunReport("bounds", cfg, scalars, None, _rows_valid([flat]))


# ---------------------------------------------------------------------------
# entry point


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gptrap",
        description="Gross-Pitaevskii ground states with certified "
                    "scattering lengths and energy bounds")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in [
        ("scatter", "scattering length of the configured interaction"),
        ("solve", "GP ground state on the configured grid"),
        ("tf", "Thomas-Fermi limit and the GP/TF convergence table"),
        ("bounds", "detailed two-sided bounds for a single N"),
        ("sweep", "sandwich bounds across the N list, one CSV row per N"),
        ("sandwich", "sandwich bounds with full per-N detail"),
    ]:
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", required=True, help="YAML config path")
        p.add_argument("--out", help="write the report here instead of "
                                     "stdout")
        p.add_argument("--format", choices=("json", "csv"),
                       default="csv" if name == "sweep" else "json")
        p.add_argument("--threads", type=int, default=1,
                       help="worker threads for per-N fan-out")
    return parser


def run(command: str, cfg: RunConfig, threads: int = 1) -> RunReport:
    if command == "scatter":
        return _cmd_scatter(cfg)
    if command == "solve":
        return _cmd_solve(cfg)
    if command == "tf":
        return _cmd_tf(cfg)
    if command == "bounds":
        return _cmd_bounds(cfg, threads)
    if command == "sweep":
        return _cmd_sweep(cfg, threads)
    if command == "sandwich":
        return _cmd_sandwich(cfg, threads)
    raise ConfigError(f"unknown command {command!r}")


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    t0 = time.perf_counter()
    try:
        cfg = load_config(args.config)
        if args.threads < 1:
            raise ConfigError("--threads must be at least 1")
        report = run(args.command, cfg, threads=args.threads)
    except ConfigError as e:
        print(f"gptrap: config error: {e}", file=sys.stderr)
        return 2
    except GptrapError as e:
        print(f"gptrap: {e}", file=sys.stderr)
        return 1
    data = emit(report, args.format)
    if args.out:
        with open(args.out, "wb") as fh:
            fh.write(data)
    else:
        sys.stdout.buffer.write(data)
    if cfg.out_json:
        with open(cfg.out_json, "wb") as fh:
            fh.write(emit(report, "json"))
    if cfg.out_csv:
        with open(cfg.out_csv, "wb") as fh:
            fh.write(emit(report, "csv"))
    print(f"# wall {time.perf_counter() - t0:.3f} s", file=sys.stderr)
    return 0 if report.valid else 1


if __name__ == "__main__":
    sys.exit(main())
