"""Config-driven command line front end.

Four verbs. ``estimate``, ``test`` and ``tune`` operate on a single series
read from disk (plain one-column text or CSV); ``experiment`` runs seeded
Monte Carlo studies over simulated models and writes plot-ready CSV tables.

Config files are flat ``key = value`` text: one pair per line, ``#`` starts
a comment, keys may appear once. Unknown keys are hard errors, a silent typo
would corrupt an experiment. Every run writes a ``<out>.manifest.jsonl``
line holding the effective config, the root seed, and a sha256 of each
output file, so any result can be re-derived bit-identically (manifests
carry no timestamps or host state).

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

import argparse
import csv
import hashlib
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import __version__
from .errors import ConfigError, NumericalError
from .lrcov import bandwidth_cv
from .precision import estimate_precision, export_banded_csv, operator_norm_error
from .procsim import ModelSpec, TimeSeriesSample, derive_seed, simulate, true_precision
from .sievebasis import FAMILIES
from .structtest import KINDS, decide, null_moments, run_test
from .tuning import TuningGrids, two_step

EXPERIMENTS = ("Estimate", "SizeH01", "SizeH02", "PowerCurve", "Tuning")

SIZE_LEVELS = (0.01, 0.05, 0.1)

# dense oracle bound for the estimation experiment
ORACLE_MAX_N = 4096

DEFAULT_REPLICATIONS = {"Estimate": 200, "SizeH01": 500, "SizeH02": 500, "PowerCurve": 300, "Tuning": 200}
DEFAULT_C_GRID = (1, 2, 3, 4, 5, 6)
DEFAULT_H_GRID = (0.1, 0.15, 0.2, 0.25, 0.3)

CSV_FIELDS = {
    "Estimate": ("model", "basis", "n", "replications", "mean_opnorm_error", "sd_opnorm_error"),
    "SizeH01": ("model", "basis", "kind", "k0", "n", "level", "replications", "rejection_rate"),
    "SizeH02": ("model", "basis", "kind", "k0", "n", "level", "replications", "rejection_rate"),
    "PowerCurve": ("model", "basis", "kind", "k0", "param", "value", "level", "replications", "rejection_rate"),
    "Tuning": ("model", "basis", "n", "replication", "chosen_b", "chosen_c", "chosen_h"),
}


# ---------------------------------------------------------------- parsing

def _parse_int(text):
    try:
        return int(text)
    except ValueError:
        raise ConfigError(f"expected an integer, got {text!r}") from None


def _parse_float(text):
    try:
        return float(text)
    except ValueError:
        raise ConfigError(f"expected a number, got {text!r}") from None


def _parse_bool(text):
    low = text.strip().lower()
    if low in ("true", "false"):
        return low == "true"
    raise ConfigError(f"expected true or false, got {text!r}")


def _parse_int_list(text):
    items = [s for s in (p.strip() for p in text.split(",")) if s]
    if not items:
        raise ConfigError("expected a non-empty comma-separated integer list")
    return tuple(_parse_int(s) for s in items)


def _parse_float_list(text):
    items = [s for s in (p.strip() for p in text.split(",")) if s]
    if not items:
        raise ConfigError("expected a non-empty comma-separated number list")
    return tuple(_parse_float(s) for s in items)


def _parse_str(text):
    return text


_KEY_PARSERS = {
    "experiment": _parse_str,
    "model": _parse_str,
    "delta": _parse_float,
    "innovation_sd": _parse_float,
    "n_list": _parse_int_list,
    "basis": _parse_str,
    "replications": _parse_int,
    "B": _parse_int,
    "level": _parse_float,
    "seed": _parse_int,
    "output_path": _parse_str,
    "data_path": _parse_str,
    "b": _parse_int,
    "c": _parse_int,
    "k0": _parse_int,
    "h": _parse_float,
    "kind": _parse_str,
    "delta_list": _parse_float_list,
    "tune": _parse_bool,
    "c_grid": _parse_int_list,
    "h_grid": _parse_float_list,
    "b0": _parse_int,
}

# keys each verb accepts; anything else in the file is a hard error
_VERB_KEYS = {
    "estimate": {"data_path", "b", "c", "basis", "output_path", "seed"},
    "test": {"data_path", "kind", "k0", "b", "c", "basis", "h", "B", "level", "seed", "output_path"},
    "tune": {"data_path", "basis", "c_grid", "h_grid", "b0", "B", "level", "seed", "output_path"},
    "experiment": {
        "experiment", "model", "delta", "innovation_sd", "n_list", "basis",
        "replications", "B", "level", "seed", "output_path",
        "b", "c", "k0", "h", "kind", "delta_list", "tune", "c_grid", "h_grid", "b0",
    },
}


def parse_config_text(text, verb):
    """Parse flat key = value config text into a raw mapping.

    Raises ConfigError with the offending line number for malformed lines,
    duplicate keys, keys unknown to the verb, or unparseable values.
    """
    if verb not in _VERB_KEYS:
        raise ConfigError(f"unknown verb {verb!r}")
    allowed = _VERB_KEYS[verb]
    raw = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line.strip()!r}")
        key, value = (part.strip() for part in stripped.split("=", 1))
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        if key not in _KEY_PARSERS or key not in allowed:
            raise ConfigError(f"line {lineno}: unknown config key {key!r} for verb {verb!r}")
        if key in raw:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        if not value:
            raise ConfigError(f"line {lineno}: empty value for key {key!r}")
        try:
            raw[key] = _KEY_PARSERS[key](value)
        except ConfigError as exc:
            raise ConfigError(f"line {lineno}: key {key!r}: {exc}") from None
    return raw


def load_config(path, verb):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from None
    return parse_config_text(text, verb)


# ------------------------------------------------------- experiment config

@dataclass(frozen=True)
class ExperimentConfig:
    """Validated, fully-defaulted description of one experiment run."""

    experiment: str
    model: ModelSpec
    n_list: tuple
    basis: str
    replications: int
    B: int
    level: float
    seed: int
    output_path: str = None
    b: int = None
    c: int = None
    k0: int = None
    h: float = 0.15
    kind: str = None
    delta_list: tuple = None
    tune: bool = False
    c_grid: tuple = DEFAULT_C_GRID
    h_grid: tuple = DEFAULT_H_GRID
    b0: int = None


def _build_model(raw):
    name = raw.get("model")
    if name is None:
        raise ConfigError("missing required key 'model'")
    kwargs = {}
    if "delta" in raw:
        kwargs["delta"] = raw["delta"]
    elif "delta_list" in raw and name == "TvAR3delta":
        # base model placeholder; the sweep re-creates one model per grid point
        kwargs["delta"] = raw["delta_list"][0]
    if "innovation_sd" in raw:
        kwargs["innovation_sd"] = raw["innovation_sd"]
    try:
        return ModelSpec(kind=name, **kwargs)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def config_from_mapping(raw):
    """Validate a raw experiment mapping into an ExperimentConfig.

    The mapping uses the same keys and value types as the config file (the
    manifest echoes configs in exactly this form, so a manifest line can be
    fed back through here to reproduce a run).
    """
    unknown = set(raw) - _VERB_KEYS["experiment"]
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    experiment = raw.get("experiment")
    if experiment not in EXPERIMENTS:
        raise ConfigError(f"experiment must be one of {EXPERIMENTS}, got {experiment!r}")
    model = _build_model(raw)
    n_list = raw.get("n_list")
    if not n_list:
        raise ConfigError("missing required key 'n_list'")
    if any(n < 16 for n in n_list):
        raise ConfigError("all n_list entries must be >= 16")
    basis = raw.get("basis", "Fourier")
    if basis not in FAMILIES:
        raise ConfigError(f"basis must be one of {FAMILIES}, got {basis!r}")
    replications = raw.get("replications", DEFAULT_REPLICATIONS[experiment])
    if replications < 1:
        raise ConfigError("replications must be >= 1")
    B = raw.get("B", 500)
    level = raw.get("level", 0.05)
    if not (0.0 < level < 1.0):
        raise ConfigError("level must lie in (0, 1)")
    cfg = ExperimentConfig(
        experiment=experiment,
        model=model,
        n_list=tuple(n_list),
        basis=basis,
        replications=replications,
        B=B,
        level=level,
        seed=raw.get("seed", 0),
        output_path=raw.get("output_path"),
        b=raw.get("b"),
        c=raw.get("c"),
        k0=raw.get("k0"),
        h=raw.get("h", 0.15),
        kind=raw.get("kind"),
        delta_list=tuple(raw["delta_list"]) if "delta_list" in raw else None,
        tune=raw.get("tune", False),
        c_grid=tuple(raw.get("c_grid", DEFAULT_C_GRID)),
        h_grid=tuple(raw.get("h_grid", DEFAULT_H_GRID)),
        b0=raw.get("b0"),
    )
    _validate_experiment(cfg)
    return cfg


def _require(cfg, field):
    if getattr(cfg, field) is None:
        raise ConfigError(f"experiment {cfg.experiment} requires key {field!r}")


def _validate_experiment(cfg):
    if not cfg.c_grid or not cfg.h_grid:
        raise ConfigError("grids must be non-empty")
    if cfg.experiment == "Estimate":
        if any(n > ORACLE_MAX_N for n in cfg.n_list):
            raise ConfigError(f"Estimate requires n <= {ORACLE_MAX_N} (dense oracle bound)")
        if not cfg.tune:
            _require(cfg, "b")
            _require(cfg, "c")
    elif cfg.experiment in ("SizeH01", "SizeH02"):
        _require(cfg, "b")
        _require(cfg, "c")
        if cfg.experiment == "SizeH02":
            _require(cfg, "k0")
            if not (0 <= cfg.k0 < cfg.b):
                raise ConfigError("SizeH02 requires 0 <= k0 < b")
    elif cfg.experiment == "PowerCurve":
        kind = cfg.kind if cfg.kind is not None else "whitenoise"
        if kind not in KINDS:
            raise ConfigError(f"kind must be one of {KINDS}, got {kind!r}")
        _require(cfg, "b")
        _require(cfg, "c")
        if kind == "banded":
            _require(cfg, "k0")
        if cfg.delta_list is not None:
            if cfg.model.kind != "TvAR3delta":
                raise ConfigError("delta_list is only meaningful for model TvAR3delta")
            if len(cfg.n_list) != 1:
                raise ConfigError("delta_list sweeps need a single n in n_list")
    # Tuning needs nothing beyond the defaults


def canonical_config(cfg):
    """Effective config as a flat {key: string} mapping.

    Values are rendered exactly as they would appear in a config file, so
    the mapping round-trips through parse_config_text / config_from_mapping.
    """
    out = {
        "experiment": cfg.experiment,
        "model": cfg.model.kind,
        "n_list": ",".join(str(n) for n in cfg.n_list),
        "basis": cfg.basis,
        "replications": str(cfg.replications),
        "B": str(cfg.B),
        "level": repr(cfg.level),
        "seed": str(cfg.seed),
    }
    if cfg.model.delta is not None:
        out["delta"] = repr(cfg.model.delta)
    if cfg.model.innovation_sd != 1.0:
        out["innovation_sd"] = repr(cfg.model.innovation_sd)
    for field in ("b", "c", "k0", "b0"):
        if getattr(cfg, field) is not None:
            out[field] = str(getattr(cfg, field))
    out["h"] = repr(cfg.h)
    if cfg.kind is not None:
        out["kind"] = cfg.kind
    if cfg.delta_list is not None:
        out["delta_list"] = ",".join(repr(d) for d in cfg.delta_list)
    if cfg.tune:
        out["tune"] = "true"
    out["c_grid"] = ",".join(str(c) for c in cfg.c_grid)
    out["h_grid"] = ",".join(repr(h) for h in cfg.h_grid)
    return out


def config_from_strings(mapping):
    """Rebuild an ExperimentConfig from a {key: string} mapping (manifest echo)."""
    raw = {}
    for key, value in mapping.items():
        if key not in _KEY_PARSERS:
            raise ConfigError(f"unknown config key {key!r}")
        raw[key] = _KEY_PARSERS[key](value)
    return config_from_mapping(raw)


# ------------------------------------------------------------ replication

def _map_reps(worker, arglist, threads):
    # executor.map preserves input order, so results are deterministic by
    # replication index regardless of completion order
    if threads <= 1:
        return [worker(args) for args in arglist]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(worker, arglist))


def _estimate_rep(args):
    model, n, b, c, basis, tune, c_grid, h_grid, b0, level, B, data_seed = args
    sample = simulate(model, n, data_seed)
    if tune:
        grids = TuningGrids(c_grid=c_grid, h_grid=h_grid, b0=b0, B=B, seed=derive_seed(data_seed, 1))
        report = two_step(sample, grids, level, basis)
        b, c = report.chosen_b, report.chosen_c
    bundle = estimate_precision(sample, b, c, basis)
    return operator_norm_error(bundle.estimate, _oracle_cached(model, n))


_ORACLE_CACHE = {}


def _oracle_cached(model, n):
    key = (model, n)
    if key not in _ORACLE_CACHE:
        _ORACLE_CACHE[key] = true_precision(model, n)
    return _ORACLE_CACHE[key]


def _size_rep(args):
    model, n, kind, k0, b, c, basis, h, B, level, data_seed = args
    sample = simulate(model, n, data_seed)
    result = run_test(sample, kind, level, b, c, basis, h, B, derive_seed(data_seed, 1), k0=k0)
    rejects = tuple(decide(result.statistic, result.null_draws, lvl)[1] for lvl in SIZE_LEVELS)
    return rejects, result.p_value


def _power_rep(args):
    model, n, kind, k0, b, c, basis, h, B, level, data_seed = args
    sample = simulate(model, n, data_seed)
    result = run_test(sample, kind, level, b, c, basis, h, B, derive_seed(data_seed, 1), k0=k0)
    return bool(result.reject)


def _tuning_rep(args):
    model, n, c_grid, h_grid, b0, level, B, basis, data_seed = args
    sample = simulate(model, n, data_seed)
    grids = TuningGrids(c_grid=c_grid, h_grid=h_grid, b0=b0, B=B, seed=derive_seed(data_seed, 1))
    report = two_step(sample, grids, level, basis)
    return report.chosen_b, report.chosen_c, report.chosen_h


# ------------------------------------------------------------ experiments

def run_estimate_experiment(config, threads=1):
    """Mean and sd of the operator-norm error per (model, basis, n)."""
    rows = []
    for n in config.n_list:
        base = derive_seed(config.seed, n)
        arglist = [
            (config.model, n, config.b, config.c, config.basis, config.tune,
             config.c_grid, config.h_grid, config.b0, config.level, config.B,
             derive_seed(base, rep))
            for rep in range(config.replications)
        ]
        errs = np.array(_map_reps(_estimate_rep, arglist, threads))
        sd = float(errs.std(ddof=1)) if errs.size > 1 else 0.0
        rows.append({
            "model": config.model.kind,
            "basis": config.basis,
            "n": n,
            "replications": config.replications,
            "mean_opnorm_error": repr(float(errs.mean())),
            "sd_opnorm_error": repr(sd),
        })
    return rows


def run_size_experiment(config, threads=1):
    """Rejection frequencies under a null model at levels 0.01 / 0.05 / 0.1."""
    kind = "banded" if config.experiment == "SizeH02" else "whitenoise"
    k0 = config.k0 if kind == "banded" else None
    rows = []
    for n in config.n_list:
        base = derive_seed(config.seed, n)
        arglist = [
            (config.model, n, kind, k0, config.b, config.c, config.basis,
             config.h, config.B, config.level, derive_seed(base, rep))
            for rep in range(config.replications)
        ]
        results = _map_reps(_size_rep, arglist, threads)
        for pos, level in enumerate(SIZE_LEVELS):
            rate = sum(res[0][pos] for res in results) / config.replications
            rows.append({
                "model": config.model.kind,
                "basis": config.basis,
                "kind": kind,
                "k0": "" if k0 is None else k0,
                "n": n,
                "level": repr(level),
                "replications": config.replications,
                "rejection_rate": repr(rate),
            })
    return rows


def run_power_experiment(config, threads=1):
    """Rejection rate per grid point: over n_list, or over delta_list."""
    kind = config.kind if config.kind is not None else "whitenoise"
    k0 = config.k0 if kind == "banded" else None

    def _rate(model, n, base):
        arglist = [
            (model, n, kind, k0, config.b, config.c, config.basis,
             config.h, config.B, config.level, derive_seed(base, rep))
            for rep in range(config.replications)
        ]
        flags = _map_reps(_power_rep, arglist, threads)
        return sum(flags) / config.replications

    rows = []
    if config.delta_list is not None:
        n = config.n_list[0]
        for pos, delta in enumerate(config.delta_list):
            model = ModelSpec(kind="TvAR3delta", delta=delta,
                              innovation_sd=config.model.innovation_sd)
            rate = _rate(model, n, derive_seed(config.seed, 1_000_000 + pos))
            rows.append({"param": "delta", "value": repr(delta), "rate": rate, "n": n})
    else:
        for n in config.n_list:
            rate = _rate(config.model, n, derive_seed(config.seed, n))
            rows.append({"param": "n", "value": str(n), "rate": rate, "n": n})
    return [
        {
            "model": config.model.kind,
            "basis": config.basis,
            "kind": kind,
            "k0": "" if k0 is None else k0,
            "param": row["param"],
            "value": row["value"],
            "level": repr(config.level),
            "replications": config.replications,
            "rejection_rate": repr(row["rate"]),
        }
        for row in rows
    ]


def run_tuning_experiment(config, threads=1):
    """Two-step CV choices per replication, one row each."""
    rows = []
    for n in config.n_list:
        base = derive_seed(config.seed, n)
        arglist = [
            (config.model, n, config.c_grid, config.h_grid, config.b0,
             config.level, config.B, config.basis, derive_seed(base, rep))
            for rep in range(config.replications)
        ]
        picks = _map_reps(_tuning_rep, arglist, threads)
        for rep, (b, c, h) in enumerate(picks):
            rows.append({
                "model": config.model.kind,
                "basis": config.basis,
                "n": n,
                "replication": rep,
                "chosen_b": b,
                "chosen_c": c,
                "chosen_h": repr(float(h)),
            })
    return rows


_RUNNERS = {
    "Estimate": run_estimate_experiment,
    "SizeH01": run_size_experiment,
    "SizeH02": run_size_experiment,
    "PowerCurve": run_power_experiment,
    "Tuning": run_tuning_experiment,
}


def run_experiment(config, threads=1):
    """Dispatch on config.experiment; returns (fieldnames, rows)."""
    rows = _RUNNERS[config.experiment](config, threads)
    return CSV_FIELDS[config.experiment], rows


# ---------------------------------------------------------------- outputs

def _sha256(path):
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def write_rows_csv(path, fieldnames, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(fieldnames))
        writer.writeheader()
        for row in rows:
            writer.writerow(row)


def write_manifest(out_path, verb, config_echo, seed, outputs):
    """Append one manifest JSON line next to the output file.

    outputs maps file paths to their sha256 hex digests. The line contains
    no timestamps: rerunning the echoed config must reproduce the hashes.
    """
    record = {
        "verb": verb,
        "config": config_echo,
        "seed": seed,
        "outputs": {path: _sha256(path) for path in outputs},
        "package": "lsprec",
        "version": __version__,
    }
    manifest_path = out_path + ".manifest.jsonl"
    with open(manifest_path, "a", encoding="utf-8") as fh:
        fh.write(json.dumps(record, sort_keys=True) + "\n")
    return manifest_path


def read_series(path):
    """One numeric column (plain text or single-column CSV) as an array."""
    try:
        try:
            values = np.loadtxt(path, dtype=float)
        except ValueError:
            values = np.loadtxt(path, dtype=float, delimiter=",")
    except OSError as exc:
        raise ConfigError(f"cannot read data file {path}: {exc}") from None
    except ValueError as exc:
        raise ConfigError(f"data file {path} is not a one-column numeric series: {exc}") from None
    values = np.atleast_1d(np.asarray(values, dtype=float))
    if values.ndim != 1:
        raise ConfigError(f"data file {path} must hold exactly one numeric column")
    return values


def _series_sample(path):
    values = read_series(path)
    return TimeSeriesSample(values=values, n=len(values), model=None, seed=None)


# ------------------------------------------------------------------ verbs

def _required(raw, key, verb):
    if key not in raw:
        raise ConfigError(f"verb {verb!r} requires config key {key!r}")
    return raw[key]


def _resolve_out(raw, out_flag):
    out = out_flag if out_flag is not None else raw.get("output_path")
    if out is None:
        raise ConfigError("an output path is required (--out or output_path in the config)")
    return out


def cmd_estimate(raw, out_flag, threads, seed_flag):
    out = _resolve_out(raw, out_flag)
    sample = _series_sample(_required(raw, "data_path", "estimate"))
    b = _required(raw, "b", "estimate")
    c = _required(raw, "c", "estimate")
    basis = raw.get("basis", "Fourier")
    try:
        bundle = estimate_precision(sample, b, c, basis)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    export_banded_csv(bundle.estimate, out)
    echo = {"data_path": raw["data_path"], "b": str(b), "c": str(c), "basis": basis}
    write_manifest(out, "estimate", echo, raw.get("seed", 0), [out])
    return 0


def cmd_test(raw, out_flag, threads, seed_flag):
    out = _resolve_out(raw, out_flag)
    sample = _series_sample(_required(raw, "data_path", "test"))
    kind = _required(raw, "kind", "test")
    b = _required(raw, "b", "test")
    c = _required(raw, "c", "test")
    basis = raw.get("basis", "Fourier")
    h = raw.get("h", 0.15)
    B = raw.get("B", 500)
    level = raw.get("level", 0.05)
    seed = seed_flag if seed_flag is not None else raw.get("seed", 0)
    k0 = raw.get("k0")
    try:
        result = run_test(sample, kind, level, b, c, basis, h, B, seed, k0=k0)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    record = {
        "kind": result.kind,
        "k0": result.k0,
        "n": sample.n,
        "b": b,
        "c": c,
        "basis": basis,
        "h": h,
        "B": B,
        "level": level,
        "seed": seed,
        "statistic": result.statistic,
        "p_value": result.p_value,
        "reject": bool(result.reject),
        "null_diagnostics": null_moments(result.null_draws),
    }
    with open(out, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(record, sort_keys=True) + "\n")
    echo = {k: str(v) for k, v in raw.items()}
    echo["seed"] = str(seed)
    write_manifest(out, "test", echo, seed, [out])
    return 0


def cmd_tune(raw, out_flag, threads, seed_flag):
    out = _resolve_out(raw, out_flag)
    sample = _series_sample(_required(raw, "data_path", "tune"))
    basis = raw.get("basis", "Fourier")
    level = raw.get("level", 0.05)
    seed = seed_flag if seed_flag is not None else raw.get("seed", 0)
    grids = TuningGrids(
        c_grid=tuple(raw.get("c_grid", DEFAULT_C_GRID)),
        h_grid=tuple(raw.get("h_grid", DEFAULT_H_GRID)),
        b0=raw.get("b0"),
        B=raw.get("B", 500),
        seed=seed,
    )
    try:
        report = two_step(sample, grids, level, basis)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    record = {
        "chosen_b": report.chosen_b,
        "chosen_c": report.chosen_c,
        "chosen_h": report.chosen_h,
        "cv_curve": [[c, score] for c, score in report.cv_curve],
        "bstar_trace": [[b1, p] for b1, p in report.bstar_trace],
    }
    with open(out, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(record, sort_keys=True) + "\n")
    echo = {k: str(v) for k, v in raw.items()}
    echo["seed"] = str(seed)
    write_manifest(out, "tune", echo, seed, [out])
    return 0


def cmd_experiment(raw, out_flag, threads, seed_flag):
    if seed_flag is not None:
        raw = dict(raw)
        raw["seed"] = seed_flag
    config = config_from_mapping(raw)
    out = out_flag if out_flag is not None else config.output_path
    if out is None:
        raise ConfigError("an output path is required (--out or output_path in the config)")
    fieldnames, rows = run_experiment(config, threads)
    write_rows_csv(out, fieldnames, rows)
    write_manifest(out, "experiment", canonical_config(config), config.seed, [out])
    return 0


_COMMANDS = {
    "estimate": cmd_estimate,
    "test": cmd_test,
    "tune": cmd_tune,
    "experiment": cmd_experiment,
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="lsprec",
        description="Precision-matrix estimation and structure tests for locally stationary series.",
    )
    sub = parser.add_subparsers(dest="verb", required=True)
    descriptions = {
        "estimate": "fit one series and export the banded Cholesky factor as CSV",
        "test": "run a white-noise or bandedness test on one series",
        "tune": "two-step CV selection of (b, c) and bandwidth for one series",
        "experiment": "run a seeded Monte Carlo experiment to CSV",
    }
    for verb, desc in descriptions.items():
        sp = sub.add_parser(verb, help=desc)
        sp.add_argument("--config", required=True, help="flat key = value config file")
        sp.add_argument("--out", default=None, help="output path (overrides output_path)")
        sp.add_argument("--threads", type=int, default=1, help="worker processes for replications")
        sp.add_argument("--seed", type=int, default=None, help="override the config seed")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.threads < 1:
            raise ConfigError("--threads must be >= 1")
        raw = load_config(args.config, args.verb)
        return _COMMANDS[args.verb](raw, args.out, args.threads, args.seed)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
