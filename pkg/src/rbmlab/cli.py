"""Command-line harness: configured runs, sweeps, and the validation suite.

Usage: ``rbmlab <subcommand> --config <file> [--seed S] [--workers K]
[--out DIR]``.  Every run writes ``<out>/<subcommand>.csv`` (header row,
floats in round-trip repr, complex values as ``<name>_re``/``<name>_im``,
UTF-8 with LF endings) plus ``<out>/<subcommand>.meta.json`` holding the
fully resolved configuration, seed, and package version -- enough to
regenerate any row.  No timestamps: rerunning a config reproduces both
files byte for byte.

Exit codes: 0 success, 2 configuration error (including unknown keys),
3 numeric non-convergence.  ``validate`` exits 1 if any check fails.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import warnings

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # 3.10
    import tomli as tomllib

from . import __version__, acceptance
from .ensembles import EnsembleSpec, build_variance_profile
from .estimators import (
    SpectralArgs,
    charpoly_ratio,
    charpoly_typical_ratio,
    dos_histogram,
    pair_correlation,
    r1_ratio,
)
from .limits import (
    DEFAULT_EPS_LADDER,
    calibrate_c0,
    gue_r2,
    r2_from_generalized,
    sine_kernel_ratio,
    warn_outside_r1_regime,
    warn_outside_sigma_regime,
)
from .transfer_spectra import (
    ConvergenceError,
    constants,
    k0_spectrum,
    mehler_spectrum,
    transfer_ratio,
)

DEFAULT_SEED = 7


class ConfigError(Exception):
    """Anything wrong with the run configuration (exit code 2)."""


# ---------------------------------------------------------------------------
# config schema
# ---------------------------------------------------------------------------

# per-command: {section: {key: (checker-name, default)}}; _REQUIRED marks
# keys that must be present.  Unknown sections or keys are hard errors.
_REQUIRED = object()

_ENSEMBLE = {
    "kind": ("str", _REQUIRED),
    "size": ("int", _REQUIRED),
    "bandwidth": ("int", _REQUIRED),
    "alpha": ("float", None),
}

_RUN = {
    "seed": ("int", None),
    "workers": ("int", None),
    "out": ("str", None),
}

_SCHEMA = {
    "dos": {
        "ensemble": _ENSEMBLE,
        "dos": {
            "bins": ("int", 50),
            "lo": ("float", -2.5),
            "hi": ("float", 2.5),
            "samples": ("int", 50),
        },
    },
    "charpoly": {
        "ensemble": _ENSEMBLE,
        "charpoly": {
            "xi": ("float_list", (0.25, 0.5, 1.0)),
            "energy": ("float", 0.0),
            "samples": ("int", 1000),
        },
    },
    "r1": {
        "ensemble": _ENSEMBLE,
        "r1": {
            "xi": ("float_list", (1.0,)),
            "energy": ("float", 0.0),
            "eps": ("float", 1.0),
            "samples": ("int", 10000),
            "placement": ("str", "shared"),
            "groups": ("int", 16),
        },
    },
    "paircorr": {
        "ensemble": _ENSEMBLE,
        "paircorr": {
            "energy": ("float", 0.0),
            "halfwidth": ("float", 10.0),
            "bins": ("int", 16),
            "r_max": ("float", 3.2),
            "samples": ("int", 100),
        },
    },
    "k0-spectrum": {
        "k0_spectrum": {
            "energy": ("float", 0.0),
            "bandwidth": ("int", 10),
            "nodes": ("int", 128),
            "count": ("int", 8),
        },
    },
    "crossover-sweep": {
        "crossover_sweep": {
            "n": ("int_list", (100, 1000, 10000, 100000)),
            "bandwidth": ("int", 10),
            "xi": ("float", 1.0),
            "energy": ("float", 0.0),
            "nodes": ("int", 128),
        },
    },
    "mehler": {
        "mehler": {
            "bandwidth": ("int", 20),
            "c": ("float", 2.0),
            "length": ("float", 0.0),  # 0 -> solver default
            "nodes": ("int", 400),
            "count": ("int", 8),
        },
    },
    "limits-table": {
        "limits_table": {
            "xi": ("float_list", (0.0, 0.25, 0.5, 1.0, 2.0)),
        },
    },
    "r2-sigma": {
        "r2_sigma": {
            "r": ("float_list", (0.25, 0.5, 1.0, 1.5, 2.5)),
            "energy": ("float", 0.0),
            "eps_ladder": ("float_list", DEFAULT_EPS_LADDER),
            "c0": ("float", 0.0),  # 0 -> calibrate first
            "h": ("float", 1e-3),
        },
    },
    "calibrate-c0": {
        "calibrate_c0": {
            "energy": ("float", 0.0),
            "probes": ("float_list", (0.5, 1.5)),
            "validation_point": ("float", 0.25),
            "c0_min": ("float", 0.25),
            "c0_max": ("float", 10.0),
            "scan_step": ("float", 0.05),
        },
    },
    "validate": {
        "validate": {
            "criteria": ("int_list", ()),  # empty -> all
        },
    },
}


def _coerce(command, section, key, kind, value):
    where = f"[{section}] {key}"
    if kind == "int":
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{where}: expected an integer, got {value!r}")
        return value
    if kind == "float":
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{where}: expected a number, got {value!r}")
        return float(value)
    if kind == "str":
        if not isinstance(value, str):
            raise ConfigError(f"{where}: expected a string, got {value!r}")
        return value
    if kind in ("float_list", "int_list"):
        if not isinstance(value, (list, tuple)) or not value:
            raise ConfigError(f"{where}: expected a non-empty list")
        out = []
        for v in value:
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise ConfigError(f"{where}: expected numbers, got {v!r}")
            if kind == "int_list" and not isinstance(v, int):
                raise ConfigError(f"{where}: expected integers, got {v!r}")
            out.append(int(v) if kind == "int_list" else float(v))
        return tuple(out)
    raise AssertionError(kind)


def _resolve_config(command, raw):
    """Validate ``raw`` against the command's schema; fill defaults.

    Returns a plain nested dict with every known key present, which is what
    goes into the meta record.
    """
    schema = dict(_SCHEMA[command])
    schema["run"] = _RUN
    if not isinstance(raw, dict):
        raise ConfigError("top level must be a table of sections")
    for section in raw:
        if section not in schema:
            raise ConfigError(f"unknown section [{section}]")
        if not isinstance(raw[section], dict):
            raise ConfigError(f"[{section}] must be a table")
        for key in raw[section]:
            if key not in schema[section]:
                raise ConfigError(f"unknown key {key!r} in [{section}]")
    resolved = {}
    for section, keys in schema.items():
        got = raw.get(section, {})
        resolved[section] = {}
        for key, (kind, default) in keys.items():
            if key in got:
                resolved[section][key] = _coerce(command, section, key, kind,
                                                 got[key])
            elif default is _REQUIRED:
                raise ConfigError(f"missing required key {key!r} in [{section}]")
            else:
                resolved[section][key] = default
    return resolved


def _ensemble_spec(cfg, seed):
    ens = cfg["ensemble"]
    try:
        profile = build_variance_profile(ens["kind"], ens["size"],
                                         ens["bandwidth"], alpha=ens["alpha"])
    except ValueError as exc:
        raise ConfigError(f"[ensemble]: {exc}") from exc
    return EnsembleSpec(profile=profile, seed=seed)


# ---------------------------------------------------------------------------
# emission
# ---------------------------------------------------------------------------

def _cell(v):
    if isinstance(v, str):
        return v
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def _emit(outdir, command, columns, rows, meta):
    os.makedirs(outdir, exist_ok=True)
    csv_path = os.path.join(outdir, f"{command}.csv")
    with open(csv_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_cell(v) for v in row])
    meta_path = os.path.join(outdir, f"{command}.meta.json")
    with open(meta_path, "w", encoding="utf-8", newline="") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return csv_path, meta_path


# ---------------------------------------------------------------------------
# subcommands: each returns (columns, rows, extra-meta)
# ---------------------------------------------------------------------------

def _cmd_dos(cfg, seed, workers):
    spec = _ensemble_spec(cfg, seed)
    p = cfg["dos"]
    edges = np.linspace(p["lo"], p["hi"], p["bins"] + 1)
    hist = dos_histogram(spec, edges, p["samples"], workers=workers)
    rows = [
        [edges[i], edges[i + 1], int(hist.counts[i]), hist.density[i],
         hist.stderr[i]]
        for i in range(len(hist.counts))
    ]
    return (["bin_left", "bin_right", "count", "density", "stderr"], rows,
            {"samples_used": hist.samples, "samples_skipped": hist.skipped})


def _cmd_charpoly(cfg, seed, workers):
    spec = _ensemble_spec(cfg, seed)
    p = cfg["charpoly"]
    rows = []
    for xi in p["xi"]:
        args = SpectralArgs(p["energy"], xi)
        est = charpoly_ratio(spec, args, p["samples"], workers=workers)
        typ = charpoly_typical_ratio(spec, args, p["samples"],
                                     workers=workers)
        rows.append([xi, est.mean.real, est.mean.imag, est.stderr,
                     typ.mean.real, typ.stderr, est.count,
                     est.exponent_offset])
    return (["xi", "value_re", "value_im", "stderr", "typical",
             "typical_stderr", "count", "exponent_offset"], rows, {})


def _cmd_r1(cfg, seed, workers):
    spec = _ensemble_spec(cfg, seed)
    p = cfg["r1"]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        flag = warn_outside_r1_regime(p["energy"])
        rows = []
        for xi in p["xi"]:
            est = r1_ratio(spec, SpectralArgs(p["energy"], xi, p["eps"]),
                           p["samples"], workers=workers,
                           placement=p["placement"], groups=p["groups"])
            rows.append([xi, est.mean.real, est.mean.imag, est.stderr,
                         est.count, int(flag)])
    return (["xi", "value_re", "value_im", "stderr", "count",
             "regime_warning"], rows,
            {"placement": p["placement"]})


def _cmd_paircorr(cfg, seed, workers):
    spec = _ensemble_spec(cfg, seed)
    p = cfg["paircorr"]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        flag = warn_outside_sigma_regime(p["energy"])
        hist = pair_correlation(spec, p["energy"], p["halfwidth"], p["bins"],
                                p["samples"], workers=workers,
                                r_max=p["r_max"])
    rows = [
        [hist.edges[i], hist.edges[i + 1], int(hist.counts[i]),
         hist.density[i], hist.stderr[i], int(flag)]
        for i in range(len(hist.counts))
    ]
    return (["r_left", "r_right", "count", "density", "stderr",
             "regime_warning"], rows,
            {"samples_used": hist.samples, "samples_skipped": hist.skipped})


def _cmd_k0_spectrum(cfg, seed, workers):
    p = cfg["k0_spectrum"]
    t_star = constants(p["energy"]).t_star
    beta = t_star * p["bandwidth"] ** 2
    lam = k0_spectrum(t_star, p["bandwidth"], nodes=p["nodes"])
    rows = [[j, lam[j], 1.0 - j * (j + 1) / beta]
            for j in range(min(p["count"], len(lam)))]
    return (["j", "eigenvalue", "series_approx"], rows, {"beta": beta})


def _cmd_crossover_sweep(cfg, seed, workers):
    p = cfg["crossover_sweep"]
    rows = []
    reals = []
    for n in p["n"]:
        value = transfer_ratio(n, p["bandwidth"], p["energy"], p["xi"],
                               nodes=p["nodes"])
        reals.append(value.real)
        rows.append([n, p["bandwidth"], p["xi"], value.real, value.imag])
    diffs = np.diff(reals)
    monotone = bool(np.all(diffs >= -1e-12) or np.all(diffs <= 1e-12))
    return (["n", "bandwidth", "xi", "value_re", "value_im"], rows,
            {"monotone_in_n": monotone})


def _cmd_mehler(cfg, seed, workers):
    p = cfg["mehler"]
    length = p["length"] if p["length"] > 0 else None
    out = mehler_spectrum(p["bandwidth"], p["c"], length, p["nodes"],
                          full_output=True)
    lam = out.eigenvalues
    rows = []
    for j in range(min(p["count"], len(lam))):
        ratio = lam[j] / lam[j - 1] if j > 0 else ""
        rows.append([j, lam[j], ratio])
    return (["j", "eigenvalue", "ratio_to_previous"], rows,
            {"predicted_ratio": out.predicted_ratio,
             "boundary_mass": out.boundary_mass,
             "half_width": out.half_width})


def _cmd_limits_table(cfg, seed, workers):
    p = cfg["limits_table"]
    rows = [[xi, sine_kernel_ratio(xi), gue_r2(xi)] for xi in p["xi"]]
    return (["xi", "sine_kernel_ratio", "gue_r2"], rows, {})


def _cmd_r2_sigma(cfg, seed, workers):
    p = cfg["r2_sigma"]
    c0 = p["c0"]
    extra = {}
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        if c0 <= 0:
            cal = calibrate_c0(p["energy"], eps_ladder=p["eps_ladder"],
                               h=p["h"])
            c0 = cal.c0
            extra["calibrated"] = True
        rows = []
        for r in p["r"]:
            res = r2_from_generalized(p["energy"], p["eps_ladder"],
                                      r / 2.0, -r / 2.0, c0, p["h"])
            rows.append([r, res.value, res.eps_error,
                         int(res.regime_warning)])
    extra["c0"] = c0
    return (["r", "value", "eps_error", "regime_warning"], rows, extra)


def _cmd_calibrate_c0(cfg, seed, workers):
    p = cfg["calibrate_c0"]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        cal = calibrate_c0(p["energy"], probes=p["probes"],
                           validation_point=p["validation_point"],
                           c0_min=p["c0_min"], c0_max=p["c0_max"],
                           scan_step=p["scan_step"])
    rows = [
        [cand, resid, int(cand == cal.c0)]
        for cand, resid in zip(cal.candidates, cal.candidate_residuals)
    ]
    return (["candidate_c0", "residual", "chosen"], rows,
            {"c0": cal.c0, "probe_residual": cal.probe_residual,
             "validation_residual": cal.validation_residual,
             "probes": list(cal.probes),
             "validation_point": cal.validation_point})


def _cmd_validate(cfg, seed, workers):
    p = cfg["validate"]
    indices = list(p["criteria"]) or None
    try:
        results = acceptance.run_checks(indices, workers=workers)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    rows = [
        [r.index, r.name, int(r.passed), r.measured, r.bound, r.detail]
        for r in results
    ]
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'} {r.index:2d} "
              f"{r.name}: {r.detail}")
    all_passed = all(r.passed for r in results)
    return (["number", "name", "passed", "measured", "bound", "detail"],
            rows,
            {"all_passed": all_passed,
             "results": [{"number": r.index, "name": r.name,
                          "passed": r.passed} for r in results]})


_COMMANDS = {
    "dos": _cmd_dos,
    "charpoly": _cmd_charpoly,
    "r1": _cmd_r1,
    "paircorr": _cmd_paircorr,
    "k0-spectrum": _cmd_k0_spectrum,
    "crossover-sweep": _cmd_crossover_sweep,
    "mehler": _cmd_mehler,
    "limits-table": _cmd_limits_table,
    "r2-sigma": _cmd_r2_sigma,
    "calibrate-c0": _cmd_calibrate_c0,
    "validate": _cmd_validate,
}


def _load_config(path):
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config does not parse: {exc}") from exc


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="rbmlab",
        description="Band-matrix crossover laboratory: reproducible runs "
                    "of the sampling, transfer-operator, and closed-form "
                    "routes.")
    parser.add_argument("command", choices=sorted(_COMMANDS))
    parser.add_argument("--config", required=True,
                        help="run configuration (structured key/value file)")
    parser.add_argument("--seed", type=int, default=None,
                        help="override the config seed")
    parser.add_argument("--workers", type=int, default=None,
                        help="worker processes (default: RBMLAB_WORKERS or 1)")
    parser.add_argument("--out", default=None,
                        help="output directory (default: config or '.')")
    args = parser.parse_args(argv)

    try:
        cfg = _resolve_config(args.command, _load_config(args.config))
    except ConfigError as exc:
        print(f"rbmlab: config error: {exc}", file=sys.stderr)
        return 2

    run = cfg["run"]
    seed = args.seed if args.seed is not None else run["seed"]
    if seed is None:
        seed = DEFAULT_SEED
    workers = args.workers if args.workers is not None else run["workers"]
    if workers is None:
        workers = int(os.environ.get("RBMLAB_WORKERS", "1"))
    outdir = args.out if args.out is not None else (run["out"] or ".")
    resolved = {**cfg, "run": {"seed": seed, "workers": workers,
                               "out": outdir}}

    try:
        columns, rows, extra = _COMMANDS[args.command](cfg, seed, workers)
    except ConfigError as exc:
        print(f"rbmlab: config error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"rbmlab: config error: {exc}", file=sys.stderr)
        return 2
    except (ConvergenceError, ZeroDivisionError, RuntimeError) as exc:
        print(f"rbmlab: did not converge: {exc}", file=sys.stderr)
        return 3

    meta = {
        "command": args.command,
        "version": __version__,
        "config": resolved,
        **extra,
    }
    csv_path, meta_path = _emit(outdir, args.command, columns, rows, meta)
    print(f"wrote {csv_path} and {meta_path}")
    if args.command == "validate" and not meta["all_passed"]:
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
