"""Command-line driver: ``devmine <command> --config cfg.json [--set a.b=v ...]``.

Exit codes: 0 success, 1 usage or config error, 2 data error, 3 internal error.
Failures print one JSON error record on stderr.
"""

from __future__ import annotations

import argparse
import copy
import csv
import hashlib
import json
import os
import platform
import sys
from dataclasses import replace
from importlib import metadata
from pathlib import Path

import jsonschema
import numpy as np
import scipy

from . import __version__
from .classifiers import KnnConfig, TreeParams
from .evaluation import BenchmarkConfig, derive_seed, fit_fold, run_benchmark, stratified_kfold
from .feature_selection import SelectionConfig, write_selection_csv
from .log_model import (
    FormatConfig,
    LabelingSpec,
    LogError,
    compute_log_stats,
    label_traces,
    parse_event_log,
    write_event_log,
)
from .patterns import ALL_KINDS, mine, value_matrix, write_jsonl
from .rules import MEASURES, cumulative_values, extract_rules, rule_measures, write_curve_csv, write_ruleset_csv
from .synthgen import OUTCOME_COLUMN, ImpossibleSpecError, SynthSpec, generate

COMMANDS = ("stats", "mine", "select", "train", "evaluate", "rules", "synth")

KIND_NAMES = [str(k) for k in ALL_KINDS]

CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "input": {"type": "string"},
        "format": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "case_id": {"type": "string"},
                "activity": {"type": "string"},
                "timestamp": {"type": ["string", "null"]},
                "outcome": {"type": ["string", "null"]},
            },
        },
        "labeling": {
            "type": "object",
            "additionalProperties": False,
            "required": ["mode"],
            "properties": {
                "mode": {"enum": ["temporal", "outcome"]},
                "threshold_minutes": {"type": "number", "minimum": 0},
                "deviant_when": {"enum": ["above", "below"]},
                "outcome_attribute": {"type": "string"},
                "deviant_value": {"type": "string"},
                "normal_value": {"type": ["string", "null"]},
            },
        },
        "features": {
            "type": "array",
            "minItems": 1,
            "uniqueItems": True,
            "items": {"enum": KIND_NAMES},
        },
        "selection": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "min_support": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
                "coverage_threshold": {"type": "number", "minimum": 1},
            },
        },
        "mining": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"ip_max_len": {"type": "integer", "minimum": 1}},
        },
        "classifiers": {
            "type": "object",
            "additionalProperties": False,
            "minProperties": 1,
            "properties": {
                "tree": {
                    "type": "object",
                    "additionalProperties": False,
                    "properties": {
                        "max_depth": {"type": "integer", "minimum": 1},
                        "min_samples_leaf": {"type": "integer", "minimum": 1},
                        "min_gain": {"type": "number", "minimum": 0},
                    },
                },
                "knn": {
                    "type": "object",
                    "additionalProperties": False,
                    "properties": {"k": {"type": "integer", "minimum": 1}},
                },
            },
        },
        "folds": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"k": {"type": "integer", "minimum": 2}},
        },
        "oversampling": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "enabled": {"type": "boolean"},
                "ratio": {"type": "number", "minimum": 1},
            },
        },
        "rules": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "fold": {"type": ["integer", "null"], "minimum": 0},
                "evaluate_on": {"enum": ["train", "test"]},
                "curves": {"type": "boolean"},
            },
        },
        "synth": {"type": "object"},
        "output_dir": {"type": "string"},
        "seed": {"type": "integer", "minimum": 0},
    },
}

DEFAULTS = {
    "format": {"case_id": "case_id", "activity": "activity", "timestamp": "timestamp",
               "outcome": OUTCOME_COLUMN},
    "labeling": {"mode": "outcome", "outcome_attribute": OUTCOME_COLUMN, "deviant_value": "deviant"},
    "features": KIND_NAMES,
    "selection": {},
    "mining": {},
    "classifiers": {"tree": {}, "knn": {}},
    "folds": {},
    "oversampling": {},
    "rules": {},
    "synth": {},
    "output_dir": "out",
    "seed": 0,
}


class ConfigError(Exception):
    pass


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="devmine", description="Deviance mining on labeled event logs.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", "-c", required=True, help="pipeline config JSON")
    p.add_argument("--set", dest="overrides", action="append", default=[], metavar="PATH=VALUE",
                   help="override a config field by dotted path; VALUE is parsed as JSON if possible")
    p.add_argument("--out", "-o", help="output directory (same as --set output_dir=...)")
    return p


def apply_override(config: dict, assignment: str) -> None:
    if "=" not in assignment:
        raise ConfigError(f"override {assignment!r} is not of the form path=value")
    path, raw = assignment.split("=", 1)
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    keys = path.split(".")
    node = config
    for k in keys[:-1]:
        node = node.setdefault(k, {})
        if not isinstance(node, dict):
            raise ConfigError(f"override {path!r} descends into a non-object")
    node[keys[-1]] = value


def load_config(path, overrides=(), out=None) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file {path} not found") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    for assignment in overrides:
        apply_override(raw, assignment)
    if out is not None:
        raw["output_dir"] = os.path.abspath(out)
    try:
        jsonschema.validate(raw, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = ".".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"config schema error at {where}: {exc.message}") from None
    config = copy.deepcopy(DEFAULTS)
    config.update(raw)
    base = Path(path).resolve().parent
    for key in ("input", "output_dir"):
        if key in config and not os.path.isabs(config[key]):
            config[key] = str(base / config[key])
    try:
        _build_objects(config)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid config: {exc}") from None
    return config


def _build_objects(config: dict) -> dict:
    sel = SelectionConfig(**config["selection"])
    clfs = config["classifiers"]
    bench = BenchmarkConfig(
        kinds=tuple(config["features"]),
        classifiers=tuple(name for name in ("tree", "knn") if name in clfs),
        selection=sel,
        tree=TreeParams(**clfs.get("tree", {})),
        knn=KnnConfig(**clfs.get("knn", {})),
        k_folds=config["folds"].get("k", 5),
        seed=config["seed"],
        ip_max_len=config["mining"].get("ip_max_len", 15),
        oversample=config["oversampling"].get("enabled", True),
        oversample_ratio=config["oversampling"].get("ratio", 1.0),
    )
    return {
        "format": FormatConfig.from_dict(config["format"]),
        "labeling": LabelingSpec.from_dict(config["labeling"]),
        "benchmark": bench,
    }


def config_hash(config: dict) -> str:
    canonical = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()


def _versions() -> dict:
    try:
        pkg = metadata.version("artifact")
    except metadata.PackageNotFoundError:
        pkg = __version__
    return {"devmine": pkg, "numpy": np.__version__, "scipy": scipy.__version__,
            "python": platform.python_version()}


def _load_log(config: dict, objs: dict):
    if "input" not in config:
        raise ConfigError("config field 'input' is required for this command")
    log = parse_event_log(config["input"], objs["format"])
    return label_traces(log, objs["labeling"])


def _cmd_synth(config, objs, out: Path) -> list[str]:
    fields = dict(config["synth"])
    fields.setdefault("seed", derive_seed(config["seed"], 2))
    try:
        spec = SynthSpec.from_dict(fields)
    except TypeError as exc:
        raise ConfigError(f"invalid synth section: {exc}") from None
    log = generate(spec)
    fc = FormatConfig(outcome=OUTCOME_COLUMN)
    write_event_log(log, out / "log.csv", fc)
    return ["log.csv"]


def _cmd_stats(config, objs, out: Path) -> list[str]:
    stats = compute_log_stats(_load_log(config, objs))
    with open(out / "stats.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["statistic", "value"])
        for k, v in stats.as_rows():
            w.writerow([k, repr(v) if isinstance(v, float) else v])
    return ["stats.csv"]


def _cmd_mine(config, objs, out: Path) -> list[str]:
    log = _load_log(config, objs)
    bench = objs["benchmark"]
    written = []
    for kind in bench.kinds:
        feats = mine(log, kind, bench.selection.min_support, bench.ip_max_len)
        name = f"patterns_{kind}.jsonl"
        write_jsonl(feats, log.activities, out / name)
        written.append(name)
    return written


def _cmd_select(config, objs, out: Path) -> list[str]:
    log = _load_log(config, objs)
    bench = objs["benchmark"]
    written = []
    for kind in bench.kinds:
        fm = fit_fold(log, kind, bench, derive_seed(bench.seed, 1, 0), fit_models=False)
        name = f"selected_{kind}.csv"
        write_selection_csv(fm.selected, log.activities, out / name)
        written.append(name)
    return written


def _cmd_train(config, objs, out: Path) -> list[str]:
    log = _load_log(config, objs)
    bench = objs["benchmark"]
    written = []
    for kind in bench.kinds:
        fm = fit_fold(log, kind, bench, derive_seed(bench.seed, 1, 0))
        model = fm.models.get("tree")
        if model is None:
            continue
        name = f"tree_{kind}.json"
        with open(out / name, "w", encoding="utf-8") as fh:
            fh.write(model.to_json(indent=2, sort_keys=True) + "\n")
        written.append(name)
    return written


def _cmd_rules(config, objs, out: Path) -> list[str]:
    log = _load_log(config, objs)
    bench = objs["benchmark"]
    opts = config["rules"]
    fold = opts.get("fold")
    evaluate_on = opts.get("evaluate_on", "train")
    if fold is None:
        if evaluate_on == "test":
            raise ConfigError("rules.evaluate_on='test' needs rules.fold")
        train_log, eval_log, seed = log, log, derive_seed(bench.seed, 1, 0)
    else:
        plan = stratified_kfold(log, bench.k_folds, derive_seed(bench.seed, 0))
        if fold >= plan.k:
            raise ConfigError(f"rules.fold={fold} but only {plan.k} folds")
        train_log = log.select_cases(plan.train_ids(fold))
        eval_log = train_log if evaluate_on == "train" else log.select_cases(plan.test_ids(fold))
        seed = derive_seed(bench.seed, 1, fold)

    tree_only = replace(bench, classifiers=("tree",))
    written = []
    for kind in bench.kinds:
        fm = fit_fold(train_log, kind, tree_only, seed)
        if fm.train is None:
            continue
        rules = extract_rules(fm.models["tree"])
        data = fm.train
        if eval_log is not train_log:
            data = type(fm.train)(fm.train.feature_ids, value_matrix(fm.selected_features, eval_log),
                                  np.asarray(eval_log.deviant_mask(), dtype=bool), eval_log.case_ids,
                                  fm.train.feature_names)
        name = f"rules_{kind}.csv"
        write_ruleset_csv(rules, data, len(train_log), out / name)
        written.append(name)
        if opts.get("curves", True):
            measured = rule_measures(rules, data)
            for m in MEASURES:
                curve = cumulative_values([(mv.get(m), r.id) for r, (_, mv) in zip(rules, measured)])
                cname = f"curve_{kind}_{m}.csv"
                write_curve_csv(curve, m, out / cname)
                written.append(cname)
    return written


def _cmd_evaluate(config, objs, out: Path) -> list[str]:
    log = _load_log(config, objs)
    report = run_benchmark(log, objs["benchmark"])
    report.write_csv(out / "report.csv")
    report.write_json(out / "report.json")
    written = ["report.csv", "report.json"]
    written += report.write_summary_tables(out)
    report.write_runtime_csv(out / "runtime.csv")
    written.append("runtime.csv")
    return written


HANDLERS = {
    "synth": _cmd_synth, "stats": _cmd_stats, "mine": _cmd_mine, "select": _cmd_select,
    "train": _cmd_train, "rules": _cmd_rules, "evaluate": _cmd_evaluate,
}


def _error(exc: BaseException, code: int, command: str | None) -> int:
    record = {
        "error": {
            "type": type(exc).__name__,
            "module": type(exc).__module__,
            "message": str(exc),
            "command": command,
            "exit_code": code,
        }
    }
    print(json.dumps(record, sort_keys=True), file=sys.stderr)
    return code


def run(argv=None) -> int:
    command = None
    try:
        args = build_parser().parse_args(argv)
        command = args.command
        config = load_config(args.config, args.overrides, args.out)
        objs = _build_objects(config)
    except (UsageError, ConfigError) as exc:
        return _error(exc, 1, command)

    out = Path(config["output_dir"])
    try:
        out.mkdir(parents=True, exist_ok=True)
        written = HANDLERS[command](config, objs, out)
        manifest = {
            "command": command,
            "config_sha256": config_hash(config),
            "seed": config["seed"],
            "versions": _versions(),
            "outputs": written,
        }
        with open(out / f"manifest_{command}.json", "w", encoding="utf-8") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)
            fh.write("\n")
    except ConfigError as exc:
        return _error(exc, 1, command)
    except (LogError, ImpossibleSpecError, FileNotFoundError, ValueError) as exc:
        return _error(exc, 2, command)
    except Exception as exc:  # noqa: BLE001
        return _error(exc, 3, command)
    return 0


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
