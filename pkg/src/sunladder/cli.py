"""Command-line front end binding all modules into reproducible experiments.

Subcommands: spectrum, quench, xi, defect-sweep, coupling.  Each run takes a
single structured config file (YAML or JSON) with flag overrides (flags
win), validates it against a strict schema (unknown keys rejected) before
any compute, and writes its fully resolved config next to the outputs.

Exit codes: 0 success, 1 validation, 2 numerical failure, 3 I/O.
"""

from __future__ import annotations

import argparse
import copy
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np
import yaml

from . import __version__, analysis, dataio
from .algebra import CouplingParams, CouplingPoleError, same_rep_coupling, superexchange_coupling
from .ed import (
    LanczosError,
    PropagationError,
    adiabatic_gap_scan,
    default_ramp,
    quench_false_vacuum,
)
from .lattice import build_lattice, sample_defects, save_realization
from .qmc import RunSpec, disorder_ensemble, run_chain

OUTPUT_ROOT_ENV = "SUNLADDER_OUTPUT_ROOT"

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_NUMERICAL = 2
EXIT_IO = 3


class ConfigError(Exception):
    pass


# -- schema ------------------------------------------------------------------


def _is_bool(v):
    return isinstance(v, bool)


def _is_int(lo=None, hi=None):
    def check(v):
        if isinstance(v, bool) or not isinstance(v, int):
            return False
        return (lo is None or v >= lo) and (hi is None or v <= hi)

    return check


def _is_number(lo=None, lo_open=False):
    def check(v):
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            return False
        if lo is not None:
            return v > lo if lo_open else v >= lo
        return True

    return check


def _is_choice(*options):
    return lambda v: v in options


def _is_list_of(elem_check, min_len=1):
    def check(v):
        return isinstance(v, list) and len(v) >= min_len and all(elem_check(x) for x in v)

    return check


def _int_or_intlist(v):
    return _is_int(1)(v) or _is_list_of(_is_int(1))(v)


_GEOMETRY_SCHEMA = {
    "length": ("integer >= 2", _is_int(2)),
    "legs": ("positive integer or list of them", _int_or_intlist),
    "boundary_x": ("'periodic' or 'open'", _is_choice("periodic", "open")),
}
_PHYSICS_SCHEMA = {
    "n_colors": ("integer >= 2", _is_int(2)),
    "J": ("positive number", _is_number(0, lo_open=True)),
    "beta": ("positive number", _is_number(0, lo_open=True)),
    "mu3": ("number", _is_number()),
    "mu8": ("number", _is_number()),
}
_QMC_SCHEMA = {
    "sweeps": ("positive integer", _is_int(1)),
    "thermalization": ("non-negative integer or null", lambda v: v is None or _is_int(0)(v)),
    "bins": ("integer >= 2", _is_int(2)),
    "slices": ("positive integer", _is_int(1)),
}

SCHEMAS = {
    "spectrum": {
        "experiment": ("'spectrum'", _is_choice("spectrum")),
        "geometry": _GEOMETRY_SCHEMA,
        "physics": _PHYSICS_SCHEMA,
        "spectrum": {"tau_points": ("integer >= 2", _is_int(2))},
        "seed": ("integer", _is_int()),
        "output": ("path or null", lambda v: v is None or isinstance(v, str)),
        "workers": ("positive integer", _is_int(1)),
    },
    "quench": {
        "experiment": ("'quench'", _is_choice("quench")),
        "geometry": _GEOMETRY_SCHEMA,
        "physics": _PHYSICS_SCHEMA,
        "quench": {
            "dt": ("positive number", _is_number(0, lo_open=True)),
            "t_max": ("non-negative number", _is_number(0)),
            "krylov_dim": ("integer >= 4", _is_int(4)),
        },
        "seed": ("integer", _is_int()),
        "output": ("path or null", lambda v: v is None or isinstance(v, str)),
        "workers": ("positive integer", _is_int(1)),
    },
    "xi": {
        "experiment": ("'xi'", _is_choice("xi")),
        "geometry": _GEOMETRY_SCHEMA,
        "physics": _PHYSICS_SCHEMA,
        "qmc": _QMC_SCHEMA,
        "fit": {
            "drop_saturated": ("boolean", _is_bool),
            "max_chi2": ("positive number", _is_number(0, lo_open=True)),
        },
        "seed": ("integer", _is_int()),
        "output": ("path or null", lambda v: v is None or isinstance(v, str)),
        "workers": ("positive integer", _is_int(1)),
    },
    "defect-sweep": {
        "experiment": ("'defect-sweep'", _is_choice("defect-sweep")),
        "geometry": _GEOMETRY_SCHEMA,
        "physics": _PHYSICS_SCHEMA,
        "qmc": _QMC_SCHEMA,
        "defects": {
            "concentrations": ("list of numbers in [0, 0.5)", _is_list_of(
                lambda v: _is_number(0)(v) and v < 0.5
            )),
            "realizations": ("positive integer", _is_int(1)),
        },
        "seed": ("integer", _is_int()),
        "output": ("path or null", lambda v: v is None or isinstance(v, str)),
        "workers": ("positive integer", _is_int(1)),
    },
    "coupling": {
        "experiment": ("'coupling'", _is_choice("coupling")),
        "coupling": {
            "t": ("list of non-negative numbers", _is_list_of(_is_number(0))),
            "U": ("list of positive numbers", _is_list_of(_is_number(0, lo_open=True))),
            "V": ("list of numbers", _is_list_of(_is_number())),
            "n_colors": ("list of integers >= 2", _is_list_of(_is_int(2))),
        },
        "output": ("path or null", lambda v: v is None or isinstance(v, str)),
    },
}

DEFAULTS = {
    "spectrum": {
        "experiment": "spectrum",
        "geometry": {"length": 14, "legs": 1, "boundary_x": "open"},
        "physics": {"n_colors": 3, "J": 1.0, "beta": 1.0, "mu3": 0.0, "mu8": 0.0},
        "spectrum": {"tau_points": 21},
        "seed": 1,
        "output": None,
        "workers": 1,
    },
    "quench": {
        "experiment": "quench",
        "geometry": {"length": 14, "legs": 1, "boundary_x": "open"},
        "physics": {"n_colors": 3, "J": 1.0, "beta": 1.0, "mu3": 0.0, "mu8": 0.0},
        "quench": {"dt": 0.05, "t_max": 20.0, "krylov_dim": 12},
        "seed": 1,
        "output": None,
        "workers": 1,
    },
    "xi": {
        "experiment": "xi",
        "geometry": {"length": 192, "legs": [2, 4, 6], "boundary_x": "periodic"},
        "physics": {"n_colors": 3, "J": 1.0, "beta": 10.0, "mu3": 0.0, "mu8": 0.0},
        "qmc": {"sweeps": 40000, "thermalization": None, "bins": 32, "slices": 4},
        "fit": {"drop_saturated": False, "max_chi2": 4.0},
        "seed": 1,
        "output": None,
        "workers": 1,
    },
    "defect-sweep": {
        "experiment": "defect-sweep",
        "geometry": {"length": 192, "legs": 4, "boundary_x": "periodic"},
        "physics": {"n_colors": 3, "J": 1.0, "beta": 10.0, "mu3": 0.0, "mu8": 0.0},
        "qmc": {"sweeps": 30000, "thermalization": None, "bins": 30, "slices": 4},
        "defects": {"concentrations": [0.0, 0.01], "realizations": 10},
        "seed": 1,
        "output": None,
        "workers": 1,
    },
    "coupling": {
        "experiment": "coupling",
        "coupling": {"t": [1.0], "U": [10.0], "V": [10.0], "n_colors": [3]},
        "output": None,
    },
}


def _validate(config, schema, path=""):
    if not isinstance(config, dict):
        raise ConfigError(f"config error at {path or '<root>'}: expected a mapping")
    for key, value in config.items():
        where = f"{path}.{key}" if path else key
        if key not in schema:
            raise ConfigError(f"config error at {where}: unknown key")
        spec = schema[key]
        if isinstance(spec, dict):
            _validate(value, spec, where)
        else:
            desc, check = spec
            if not check(value):
                raise ConfigError(f"config error at {where}: expected {desc}, got {value!r}")


def _deep_merge(base: dict, override: dict) -> dict:
    out = dict(base)
    for k, v in override.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _deep_merge(out[k], v)
        else:
            out[k] = v
    return out


def _apply_set(config: dict, assignment: str) -> None:
    key, sep, raw = assignment.partition("=")
    if not sep:
        raise ConfigError(f"--set needs key.path=value, got {assignment!r}")
    value = yaml.safe_load(raw)
    node = config
    parts = key.strip().split(".")
    for part in parts[:-1]:
        node = node.setdefault(part, {})
        if not isinstance(node, dict):
            raise ConfigError(f"--set {key}: {part} is not a mapping")
    node[parts[-1]] = value


def load_config(experiment: str, config_path, sets, args) -> dict:
    config = copy.deepcopy(DEFAULTS[experiment])
    if config_path:
        try:
            text = Path(config_path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {config_path}: {exc}") from exc
        try:
            user = yaml.safe_load(text) or {}
        except yaml.YAMLError as exc:
            mark = getattr(exc, "problem_mark", None)
            line = f" (line {mark.line + 1})" if mark else ""
            raise ConfigError(f"config parse error in {config_path}{line}: {exc}") from exc
        if "experiment" in user and user["experiment"] != experiment:
            raise ConfigError(
                f"config error at experiment: file says {user['experiment']!r}, "
                f"command is {experiment!r}"
            )
        config = _deep_merge(config, user)
    for assignment in sets or ():
        _apply_set(config, assignment)
    if getattr(args, "output", None):
        config["output"] = args.output
    if getattr(args, "seed", None) is not None and "seed" in SCHEMAS[experiment]:
        config["seed"] = args.seed
    if getattr(args, "workers", None) is not None and "workers" in SCHEMAS[experiment]:
        config["workers"] = args.workers
    _validate(config, SCHEMAS[experiment])
    return config


def resolve_output_dir(config: dict, experiment: str) -> Path:
    out = config.get("output")
    if out is None:
        out = f"runs/{experiment}"
    path = Path(out)
    if not path.is_absolute():
        root = os.environ.get(OUTPUT_ROOT_ENV)
        if root:
            path = Path(root) / path
    path.mkdir(parents=True, exist_ok=True)
    return path


def _build_geometry(config, legs=None):
    geo = config["geometry"]
    return build_lattice(
        geo["length"], legs if legs is not None else geo["legs"], geo["boundary_x"]
    )


# -- subcommands ---------------------------------------------------------------


def cmd_spectrum(config: dict, command: str) -> int:
    out = resolve_output_dir(config, "spectrum")
    dataio.write_json(out / "config.json", config)
    phys = config["physics"]
    geometry = _build_geometry(config)
    ramp = default_ramp(geometry, J=phys["J"], tau_points=config["spectrum"]["tau_points"])
    scan = adiabatic_gap_scan(
        geometry, ramp, n_colors=phys["n_colors"], mu3=phys["mu3"], mu8=phys["mu8"]
    )
    dataio.write_csv(out / "spectrum.csv", ["tau", "E0", "E1", "gap"], scan.rows(), command)
    dataio.write_json(
        out / "metadata.json",
        {
            "experiment": "spectrum",
            "version": __version__,
            "geometry": repr(geometry),
            "theta": geometry.theta,
            "min_gap": scan.min_gap,
            "charge_sector": list(scan.charge),
            "sector_dimension": scan.metadata["sector_dimension"],
            "residual_bound": 1e-8,
            "command": command,
        },
    )
    print(f"spectrum: {len(scan.taus)} tau points, min gap {scan.min_gap:.6g} -> {out}")
    return EXIT_OK


def cmd_quench(config: dict, command: str) -> int:
    out = resolve_output_dir(config, "quench")
    dataio.write_json(out / "config.json", config)
    phys = config["physics"]
    q = config["quench"]
    geometry = _build_geometry(config)
    if geometry.length % 2 != 0:
        raise ConfigError("config error at geometry.length: quench needs even L")
    if geometry.legs != 1 or geometry.boundary_x != "open":
        raise ConfigError("config error at geometry: quench needs an open 1-leg chain")
    result = quench_false_vacuum(
        geometry,
        J=phys["J"],
        dt=q["dt"],
        t_max=q["t_max"],
        n_colors=phys["n_colors"],
        krylov_dim=q["krylov_dim"],
    )
    n_even = (geometry.length) // 2
    dataio.write_csv(
        out / "quench_total.csv",
        ["t", "D", "D_per_dimer"],
        ((t, d, d / n_even) for t, d in zip(result.times, result.total)),
        command,
    )
    n_bonds = result.per_bond.shape[1]
    dataio.write_csv(
        out / "quench_bonds.csv",
        ["t"] + [f"bond_{b}" for b in range(n_bonds)],
        (
            (result.times[i], *result.per_bond[i])
            for i in range(result.times.size)
        ),
        command,
    )
    summary = analysis.quench_summary(result.times, result.total)
    dataio.write_json(
        out / "metadata.json",
        {
            "experiment": "quench",
            "version": __version__,
            "geometry": repr(geometry),
            "norm_drift": result.norm_drift,
            "energy_drift": result.energy_drift,
            "summary": {
                "D0": summary.d0,
                "t_first_minimum": summary.t_first_minimum,
                "D_first_minimum": summary.d_first_minimum,
                "t_first_revival": summary.t_first_revival,
                "D_first_revival": summary.d_first_revival,
                "oscillating": summary.oscillating,
                "notes": summary.notes,
            },
            **result.metadata,
            "command": command,
        },
    )
    print(
        f"quench: {result.times.size} steps, D(0)={result.total[0]:.6g}, "
        f"norm drift {result.norm_drift:.2e} -> {out}"
    )
    return EXIT_OK


def _xi_one_leg(args):
    config, legs, command = args
    phys = config["physics"]
    qmc = config["qmc"]
    geometry = _build_geometry(config, legs=legs)
    spec = RunSpec(
        geometry=geometry,
        n_colors=phys["n_colors"],
        beta=phys["beta"],
        J=phys["J"],
        sweeps=qmc["sweeps"],
        thermalization=qmc["thermalization"],
        seed=config["seed"] + legs,
        bins=qmc["bins"],
        n_slices=qmc["slices"],
    )
    series = run_chain(spec)
    est = analysis.xi_estimate(series.correlation, series.s0.bins, series.s1.bins)
    return legs, series, est


def cmd_xi(config: dict, command: str) -> int:
    out = resolve_output_dir(config, "xi")
    dataio.write_json(out / "config.json", config)
    legs = config["geometry"]["legs"]
    legs_list = legs if isinstance(legs, list) else [legs]
    jobs = [(config, n, command) for n in legs_list]
    workers = config["workers"]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_xi_one_leg, jobs))
    else:
        results = [_xi_one_leg(j) for j in jobs]
    results.sort(key=lambda r: r[0])

    rows = []
    warnings = {}
    for n, series, est in results:
        rows.append(
            (
                n,
                est.xi_tail,
                est.xi_tail_error,
                est.xi_second_moment,
                est.xi_second_moment_error,
                est.tail_reliable,
                est.discrepancy,
                est.window[0],
                est.window[1],
                est.fit_quality,
            )
        )
        dataio.write_correlation_csv(out / f"corr_n{n}.csv", series.correlation, command)
        if series.warnings or est.notes:
            warnings[str(n)] = series.warnings + est.notes
    dataio.write_csv(
        out / "xi.csv",
        ["n", "xi", "xi_err", "xi2", "xi2_err", "tail_reliable", "discrepancy",
         "window_lo", "window_hi", "chi2_dof"],
        rows,
        command,
    )
    dataio.write_long_table(
        out / "xi_long.csv",
        {
            "xi_tail": (
                [r[0] for r in rows], [r[1] for r in rows], [r[2] for r in rows]
            ),
            "xi_second_moment": (
                [r[0] for r in rows], [r[3] for r in rows], [r[4] for r in rows]
            ),
        },
        command,
    )

    # scaling fit over even-n points (tail estimate; xi2 as fallback per point)
    points = []
    for n, series, est in results:
        if n % 2 != 0:
            continue
        if est.tail_reliable:
            points.append((n, est.xi_tail, est.xi_tail_error))
        elif est.second_moment_defined:
            points.append((n, est.xi_second_moment, est.xi_second_moment_error))
    fit_meta = {"points_used": [p[0] for p in points], "dropped": []}
    fit = None
    if len(points) >= 3:
        pts = sorted(points)
        while True:
            fit = analysis.asymptotic_freedom_fit(pts, n_colors=config["physics"]["n_colors"])
            if (
                not config["fit"]["drop_saturated"]
                or fit.chi2_dof <= config["fit"]["max_chi2"]
                or len(pts) <= 3
            ):
                break
            dropped = pts.pop()  # drop the largest-n (thermally saturated) point
            fit_meta["dropped"].append(dropped[0])
        fit_meta["points_used"] = [p[0] for p in pts]
        dataio.write_csv(
            out / "fit_report.csv",
            ["slope", "slope_err", "intercept", "intercept_err", "chi2_dof",
             "n_points", "stiffness_over_velocity"],
            [(fit.slope, fit.slope_error, fit.intercept, fit.intercept_error,
              fit.chi2_dof, fit.n_points, fit.stiffness_over_velocity)],
            command,
        )
        print(
            f"xi: slope {fit.slope:.4f} +- {fit.slope_error:.4f} over n={fit_meta['points_used']}"
            f" -> {out}"
        )
    else:
        fit_meta["note"] = "fit skipped: insufficient points (need >= 3 even-n values)"
        dataio.write_csv(
            out / "fit_report.csv",
            ["note"],
            [(fit_meta["note"],)],
            command,
        )
        print(f"xi: {fit_meta['note']} -> {out}")

    dataio.write_json(
        out / "metadata.json",
        {
            "experiment": "xi",
            "version": __version__,
            "legs": legs_list,
            "per_run_metadata": {str(n): s.metadata for n, s, _ in results},
            "warnings": warnings,
            "fit": fit_meta,
            "command": command,
        },
    )
    return EXIT_OK


def cmd_defect_sweep(config: dict, command: str) -> int:
    out = resolve_output_dir(config, "defect-sweep")
    dataio.write_json(out / "config.json", config)
    phys = config["physics"]
    qmc = config["qmc"]
    defects = config["defects"]
    geometry = _build_geometry(config)
    legs = geometry.legs
    base_spec = RunSpec(
        geometry=geometry,
        n_colors=phys["n_colors"],
        beta=phys["beta"],
        J=phys["J"],
        sweeps=qmc["sweeps"],
        thermalization=qmc["thermalization"],
        seed=config["seed"],
        bins=qmc["bins"],
        n_slices=qmc["slices"],
    )
    sweep_rows = []
    real_rows = []
    ens_meta = {}
    disorder_dir = out / "disorder"
    for p in defects["concentrations"]:
        ens = disorder_ensemble(
            base_spec,
            concentration=p,
            n_realizations=defects["realizations"],
            max_workers=config["workers"],
        )
        sweep_rows.append((p, legs, ens.xi_mean, ens.xi_error, len(ens.results)))
        for r, (xi, xi_err, series) in enumerate(
            zip(ens.xi_values, ens.xi_errors, ens.results)
        ):
            real_rows.append(
                (p, r, ens.metadata["seeds"][r], ens.metadata["defect_seeds"][r],
                 xi, xi_err, series.metadata["n_defects"])
            )
            realization = sample_defects(geometry, p, ens.metadata["defect_seeds"][r])
            save_realization(
                disorder_dir / f"p{p:g}_r{r:02d}.txt", geometry, realization
            )
        ens_meta[f"{p:g}"] = ens.metadata
    dataio.write_csv(
        out / "defect_sweep.csv",
        ["p", "n", "xi_mean", "xi_err", "n_realizations"],
        sweep_rows,
        command,
    )
    dataio.write_csv(
        out / "realizations.csv",
        ["p", "realization", "seed", "defect_seed", "xi", "xi_err", "n_defects"],
        real_rows,
        command,
    )
    dataio.write_json(
        out / "metadata.json",
        {
            "experiment": "defect-sweep",
            "version": __version__,
            "geometry": repr(geometry),
            "ensembles": ens_meta,
            "command": command,
        },
    )
    print(f"defect-sweep: {len(sweep_rows)} concentrations -> {out}")
    return EXIT_OK


def cmd_coupling(config: dict, command: str) -> int:
    out = resolve_output_dir(config, "coupling")
    dataio.write_json(out / "config.json", config)
    grid = config["coupling"]
    rows = []
    for n in grid["n_colors"]:
        for t in grid["t"]:
            for u in grid["U"]:
                for v in grid["V"]:
                    params = CouplingParams(t=t, U=u, V=v, n_colors=n)
                    try:
                        res = superexchange_coupling(params)
                        j, af, imp, pole = res.value, res.antiferromagnetic, res.static_impurity_regime, False
                    except CouplingPoleError:
                        j, af, imp, pole = math.nan, False, False, True
                    try:
                        j_same = same_rep_coupling(params)
                        pole_same = False
                    except CouplingPoleError:
                        j_same, pole_same = math.nan, True
                    rows.append((t, u, v, n, j, af, imp, pole, j_same, pole_same))
    dataio.write_csv(
        out / "coupling.csv",
        ["t", "U", "V", "N", "J", "antiferromagnetic", "static_impurity_regime",
         "pole", "J_same_rep", "pole_same_rep"],
        rows,
        command,
    )
    for t, u, v, n, j, af, imp, pole, j_same, pole_same in rows:
        mark = "POLE" if pole else f"J={j:.6g} AF={af} static_impurity={imp}"
        print(f"t={t:g} U={u:g} V={v:g} N={n}: {mark}")
    print(f"coupling: {len(rows)} rows -> {out}")
    return EXIT_OK


# -- entry point ---------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors are validation errors (exit 1)
        self.print_usage(sys.stderr)
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sunladder", description=__doc__)
    parser.add_argument("--version", action="version", version=f"sunladder {__version__}")
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name, help_text in (
        ("spectrum", "adiabatic-ramp spectrum: (tau, E0, E1, gap) table"),
        ("quench", "false-vacuum quench: D(t) total and per bond"),
        ("xi", "correlation lengths over a list of leg counts + scaling fit"),
        ("defect-sweep", "quenched-defect ensembles over concentrations"),
        ("coupling", "superexchange couplings over (t, U, V, N) grids"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("-c", "--config", help="YAML/JSON config file")
        p.add_argument("-o", "--output", help="output directory (flags win over config)")
        p.add_argument("--set", action="append", metavar="KEY.PATH=VALUE",
                       help="override a single config entry (repeatable)")
        if name != "coupling":
            p.add_argument("--seed", type=int)
            p.add_argument("--workers", type=int)
    return parser


COMMANDS = {
    "spectrum": cmd_spectrum,
    "quench": cmd_quench,
    "xi": cmd_xi,
    "defect-sweep": cmd_defect_sweep,
    "coupling": cmd_coupling,
}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    command_str = "sunladder " + " ".join(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        config = load_config(args.experiment, args.config, args.set, args)
        return COMMANDS[args.experiment](config, command_str)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (LanczosError, PropagationError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
