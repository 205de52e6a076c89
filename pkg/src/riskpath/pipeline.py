"""End-to-end orchestration: raw file to report tables.

Stages communicate through CSV files in the output directory:

=============== =========================== ======================================
stage           reads                       writes
=============== =========================== ======================================
ingest          raw XPT/CSV, codebook       clean.csv, train.csv, test.csv
describe        clean.csv                   table1.csv, counts/*.csv, *.svg
resample-bench  train.csv                   table2.csv
select          train.csv                   table4.csv, table5.csv, selections.csv
evaluate        selections.csv, train/test  table6.csv, coefficients.csv, roc.svg
=============== =========================== ======================================

Only ``evaluate`` opens test.csv. Sampler comparison uses a validation split
carved out of the training partition.
"""
import csv
import hashlib
import json
import os
import platform
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .codebook import Dataset, apply_codebook, load_codebook, split_train_test
from .descriptives import SUMMARY_COLUMNS, format_summary, log10_transform, summary_table, tabulate_categorical
from .errors import ConfigError, EvaluationError, RiskpathError, StageInputError
from .evaluation import COMPARE_HEADER, compare_models, evaluate, markdown_table
from .glm import PenaltySpec, fit_logistic, predict_proba
from .resampling import SamplerSpec, resample
from .selection import (
    group_lasso_selections,
    load_policies,
    penalized_selection,
    selection_matrix,
    stepwise_select,
)
from .svg import bar_svg, box_svg, roc_svg
from .xpt import load_csv, read_xpt

STAGES = ("ingest", "describe", "resample-bench", "select", "evaluate")
CORE_ARTIFACTS = ("table1.csv", "table2.csv", "table4.csv", "table5.csv", "table6.csv",
                  "roc.svg", "manifest.json")
SAMPLER_LABELS = {"smote": "SMOTE", "oversample": "Over sampling",
                  "undersample": "Under sampling", "class_weight": "Class weight"}


@dataclass
class PipelineConfig:
    input_path: Path
    input_format: str
    seed: int
    output: Path
    codebook: Path = None
    member: str = None
    test_fraction: float = 0.2
    sampler: dict = field(default_factory=lambda: {"method": "smote"})
    alpha: float = 0.5
    n_lambda: int = 100
    min_ratio: float = 1e-4
    folds: int = 10
    metric: str = "auc"
    rule: str = "1se"
    max_selections: int = 4
    policies: list = field(default_factory=lambda: [1, 2, 3, 4, 5])
    policy_file: Path = None
    stepwise_direction: str = "both"
    skew_type: int = 3
    log_offset: bool = True
    svg: bool = True
    source: Path = None

    def stage_seed(self, stage):
        digest = hashlib.sha256(f"{self.seed}:{stage}".encode()).digest()
        return int.from_bytes(digest[:4], "big")

    def sampler_spec(self, method=None, stage="sampler"):
        opts = dict(self.sampler)
        return SamplerSpec(
            method=method or opts.get("method", "smote"),
            smote_k=int(opts.get("smote_k", 5)),
            target_ratio=float(opts.get("target_ratio", 1.0)),
            seed=self.stage_seed(stage),
        )


def _resolve(base, value):
    if value is None:
        return None
    value = str(value)
    if value.startswith("bundled:"):
        return Path(str(resources.files("riskpath.data").joinpath(value[len("bundled:"):])))
    path = Path(value)
    return path if path.is_absolute() else (base / path)


def load_config(path, out=None, seed=None):
    """Read and validate a YAML pipeline config; ``out``/``seed`` override it."""
    path = _resolve(Path.cwd(), path)
    try:
        doc = yaml.safe_load(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"config {path} is not valid YAML: {exc}") from None
    if not isinstance(doc, dict):
        raise ConfigError("config must be a mapping")
    base = path.parent
    try:
        inp = doc["input"]
        cfg = PipelineConfig(
            input_path=_resolve(base, inp["path"]),
            input_format=inp.get("format", "csv"),
            member=inp.get("member"),
            seed=int(seed if seed is not None else doc["seed"]),
            output=Path(out) if out is not None else _resolve(base, doc.get("output", "out")),
            codebook=_resolve(base, doc.get("codebook")),
            test_fraction=float(doc.get("test_fraction", 0.2)),
            sampler=dict(doc.get("sampler") or {"method": "smote"}),
            policies=list(doc.get("policies", [1, 2, 3, 4, 5])),
            policy_file=_resolve(base, doc.get("policy_file")),
            source=path,
        )
    except KeyError as exc:
        raise ConfigError(f"config lacks required key {exc}") from None
    pen = doc.get("penalty") or {}
    cfg.alpha = float(pen.get("alpha", cfg.alpha))
    cfg.n_lambda = int(pen.get("n_lambda", cfg.n_lambda))
    cfg.min_ratio = float(pen.get("min_ratio", cfg.min_ratio))
    cfg.folds = int(pen.get("folds", cfg.folds))
    cfg.metric = pen.get("metric", cfg.metric)
    cfg.rule = pen.get("rule", cfg.rule)
    cfg.max_selections = int(pen.get("max_selections", cfg.max_selections))
    cfg.stepwise_direction = (doc.get("stepwise") or {}).get("direction", cfg.stepwise_direction)
    desc = doc.get("describe") or {}
    cfg.skew_type = int(desc.get("skew_type", cfg.skew_type))
    cfg.log_offset = bool(desc.get("log_offset", cfg.log_offset))
    cfg.svg = bool(desc.get("svg", cfg.svg))
    validate(cfg)
    return cfg


def validate(cfg):
    if cfg.input_format not in ("csv", "xpt"):
        raise ConfigError(f"input format must be csv or xpt, not {cfg.input_format!r}")
    if not cfg.input_path.is_file():
        raise ConfigError(f"input file {cfg.input_path} does not exist")
    if cfg.codebook is not None and not cfg.codebook.is_file():
        raise ConfigError(f"codebook {cfg.codebook} does not exist")
    if cfg.policy_file is not None and not cfg.policy_file.is_file():
        raise ConfigError(f"policy file {cfg.policy_file} does not exist")
    if not 0 < cfg.test_fraction < 1:
        raise ConfigError("test_fraction must lie in (0, 1)")
    if cfg.metric not in ("auc", "deviance") or cfg.rule not in ("max", "1se"):
        raise ConfigError("penalty.metric must be auc|deviance and penalty.rule max|1se")
    if not 0 <= cfg.alpha <= 1:
        raise ConfigError("penalty.alpha must lie in [0, 1]")
    cfg.sampler_spec()
    if cfg.output.exists() and not cfg.output.is_dir():
        raise ConfigError(f"output {cfg.output} is not a directory")
    parent = cfg.output if cfg.output.exists() else cfg.output.parent
    if parent.exists() and not os.access(parent, os.W_OK):
        raise ConfigError(f"output directory {cfg.output} is not writable")


def threads():
    try:
        return max(1, int(os.environ.get("RISKPATH_THREADS", "1")))
    except ValueError:
        raise ConfigError("RISKPATH_THREADS must be an integer") from None


# ---------------------------------------------------------------- io

def _fmt(v):
    return f"{float(v):.17g}"


def write_csv(path, header, rows):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def write_dataset(path, data, outcome="Stroke"):
    rows = ([_fmt(v) for v in x] + [_fmt(t)] for x, t in zip(data.X, data.y))
    write_csv(path, list(data.names) + [outcome], rows)


def read_dataset(path, codebook, stage):
    if not path.is_file():
        raise StageInputError(f"{path.name} is missing; run the earlier stages first",
                              "evaluation" if stage == "evaluation" else "modeling")
    names = codebook.predictors
    table = load_csv(path, names + [codebook.outcome])
    X = np.column_stack([table[n] for n in names])
    kinds = {r.target: r.kind for r in codebook.rules if r.target != codebook.outcome}
    levels = {r.target: r.levels for r in codebook.rules
              if r.target != codebook.outcome and r.kind != "continuous"}
    return Dataset(X, table[codebook.outcome], names, kinds, levels)


def sha256_file(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


# ---------------------------------------------------------------- stages

def _codebook(cfg):
    return load_codebook(cfg.codebook)


def stage_ingest(cfg):
    codebook = _codebook(cfg)
    if cfg.input_format == "xpt":
        raw = read_xpt(cfg.input_path, member=cfg.member)
    else:
        raw = load_csv(cfg.input_path, sorted(set(codebook.sources)))
    data = apply_codebook(raw, codebook)
    train, test = split_train_test(data, cfg.test_fraction, cfg.stage_seed("split"))
    out = cfg.output
    write_dataset(out / "clean.csv", data, codebook.outcome)
    write_dataset(out / "train.csv", train, codebook.outcome)
    write_dataset(out / "test.csv", test, codebook.outcome)
    return ["clean.csv", "train.csv", "test.csv"]


def stage_describe(cfg):
    codebook = _codebook(cfg)
    data = read_dataset(cfg.output / "clean.csv", codebook, "describe")
    rows = summary_table(data, skew_type=cfg.skew_type)
    write_csv(cfg.output / "table1.csv", SUMMARY_COLUMNS, format_summary(rows))
    written = ["table1.csv"]
    categorical = [n for n in data.names if data.kinds[n] != "continuous"]
    counts = {}
    for name in categorical + [codebook.outcome]:
        values = data.y if name == codebook.outcome else data.column(name)
        levels = (0, 1) if name == codebook.outcome else data.levels[name]
        counts[name] = tabulate_categorical(values, levels)
        write_csv(cfg.output / "counts" / f"{name}.csv", ("level", "count"), counts[name].items())
        written.append(f"counts/{name}.csv")
    if cfg.svg:
        (cfg.output / "outcome.svg").write_text(bar_svg(codebook.outcome, counts[codebook.outcome]))
        continuous = {r.name: log10_transform(data.column(r.name), offset=cfg.log_offset) for r in rows}
        if continuous:
            (cfg.output / "continuous_log10.svg").write_text(box_svg(continuous))
            written.append("continuous_log10.svg")
        written.append("outcome.svg")
    return written


def stage_resample_bench(cfg):
    codebook = _codebook(cfg)
    train = read_dataset(cfg.output / "train.csv", codebook, "resample-bench")
    fit_part, valid = split_train_test(train, cfg.test_fraction, cfg.stage_seed("bench-split"))
    reports = []
    for method in ("smote", "oversample", "undersample", "class_weight"):
        sampled = resample(fit_part, cfg.sampler_spec(method, stage="bench"))
        fit = fit_logistic(sampled.X, sampled.y, weights=sampled.weights, names=sampled.names)
        reports.append(evaluate(SAMPLER_LABELS[method], predict_proba(fit, valid.X), valid.y,
                                provenance={"sampler": method}))
    rows = [(r.label, f"{r.auc:.6f}", f"{r.sensitivity:.6f}", f"{r.specificity:.6f}") for r in reports]
    write_csv(cfg.output / "table2.csv", ("Name", "AUC", "Sens", "Spec"), rows)
    return ["table2.csv"]


def _policies(cfg):
    table = load_policies(cfg.policy_file)
    missing = [p for p in cfg.policies if p not in table]
    if missing:
        raise ConfigError(f"unknown grouping policies {missing}")
    return [table[p] for p in cfg.policies]


def selection_inputs(cfg, train, n_threads=1):
    """Resampled training data plus the CV keyword arguments every selector shares."""
    sampled = resample(train, cfg.sampler_spec())
    common = dict(folds=cfg.folds, seed=cfg.stage_seed("cv"), weights=sampled.weights,
                  n_lambda=cfg.n_lambda, min_ratio=cfg.min_ratio, metric=cfg.metric,
                  threads=n_threads, rule=cfg.rule)
    return sampled, common


def select_all(cfg, train, n_threads=1):
    """Every selection the pipeline reports, on the resampled training data."""
    sampled, common = selection_inputs(cfg, train, n_threads)
    X, y, names = sampled.X, sampled.y, sampled.names
    plain = [
        stepwise_select(sampled, direction=cfg.stepwise_direction),
        penalized_selection(X, y, names, PenaltySpec("lasso"), "Lasso", **common),
        penalized_selection(X, y, names, PenaltySpec("elastic_net", alpha=cfg.alpha), "Elasticnet",
                            **common),
    ]
    grouped = []
    for policy in _policies(cfg):
        grouped += group_lasso_selections(X, y, names, policy, max_selections=cfg.max_selections,
                                          **common)
    return plain, grouped


def stage_select(cfg):
    codebook = _codebook(cfg)
    train = read_dataset(cfg.output / "train.csv", codebook, "select")
    plain, grouped = select_all(cfg, train, threads())
    names = train.names
    write_csv(cfg.output / "table4.csv", ("Model", "Variables removed"),
              [(r.method, ", ".join(r.removed(names))) for r in plain])
    write_csv(cfg.output / "table5.csv", ["Variables"] + [r.method for r in grouped],
              selection_matrix(grouped, names))
    write_csv(cfg.output / "selections.csv", ("method", "lambda", "variables"),
              [(r.method, "" if r.lam is None else _fmt(r.lam), ";".join(r.selected))
               for r in plain + grouped])
    return ["table4.csv", "table5.csv", "selections.csv"]


def read_selections(path):
    if not path.is_file():
        raise StageInputError("selections.csv is missing; run the select stage first", "evaluation")
    with open(path, encoding="utf-8", newline="") as f:
        rows = list(csv.DictReader(f))
    return [(r["method"], [v for v in r["variables"].split(";") if v]) for r in rows]


def _model_label(method):
    if method.startswith("Group"):
        return f"variables from {method.replace('Group', 'Group ', 1)}"
    return f"variables from {'Elastic Net' if method == 'Elasticnet' else method}"


def stage_evaluate(cfg):
    codebook = _codebook(cfg)
    selections = read_selections(cfg.output / "selections.csv")
    train = read_dataset(cfg.output / "train.csv", codebook, "evaluation")
    test = read_dataset(cfg.output / "test.csv", codebook, "evaluation")
    sampled = resample(train, cfg.sampler_spec())
    models = [("Full Logistic Regression", list(train.names))]
    models += [(_model_label(m), v) for m, v in selections]
    reports, coef_rows = [], []
    for label, variables in models:
        if not variables:
            continue
        sub = sampled.subset(variables)
        fit = fit_logistic(sub.X, sub.y, weights=sub.weights, names=variables)
        probs = predict_proba(fit, test.subset(variables).X)
        reports.append(evaluate(label, probs, test.y, provenance={
            "sampler": cfg.sampler.get("method", "smote"), "variables": variables, "seed": cfg.seed}))
        coef_rows += [(label, name, _fmt(value)) for name, value in fit.to_rows()]
    table = compare_models(reports)
    write_csv(cfg.output / "table6.csv", COMPARE_HEADER, table)
    (cfg.output / "table6.md").write_text(markdown_table(COMPARE_HEADER, table))
    write_csv(cfg.output / "coefficients.csv", ("model", "name", "value"), coef_rows)
    (cfg.output / "roc.svg").write_text(roc_svg([(r.label, r.roc) for r in reports]))
    return ["table6.csv", "table6.md", "coefficients.csv", "roc.svg"]


STAGE_FUNCS = {
    "ingest": stage_ingest,
    "describe": stage_describe,
    "resample-bench": stage_resample_bench,
    "select": stage_select,
    "evaluate": stage_evaluate,
}

TEST_READERS = ("evaluate",)


def run_stage(cfg, stage):
    cfg.output.mkdir(parents=True, exist_ok=True)
    if stage != "evaluate":
        return STAGE_FUNCS[stage](cfg)
    try:
        return stage_evaluate(cfg)
    except RiskpathError as exc:
        if exc.stage in ("config", "evaluation"):
            raise
        raise EvaluationError(str(exc)) from exc


def _versions():
    import scipy
    import sklearn
    return {"riskpath": __version__, "python": platform.python_version(),
            "numpy": np.__version__, "scipy": scipy.__version__, "scikit-learn": sklearn.__version__}


def run_pipeline(cfg):
    """Run every stage in order and write ``manifest.json``; returns the manifest."""
    written = []
    for stage in STAGES:
        written += run_stage(cfg, stage)
    out = cfg.output
    manifest = {
        "inputs": {
            "data": {"path": str(cfg.input_path.name), "sha256": sha256_file(cfg.input_path)},
            "codebook": {"path": cfg.codebook.name if cfg.codebook else "bundled:codebook_brfss2022.yaml",
                         "sha256": sha256_file(cfg.codebook) if cfg.codebook else None},
            "config": {"path": cfg.source.name if cfg.source else None,
                       "sha256": sha256_file(cfg.source) if cfg.source else None},
        },
        "seed": cfg.seed,
        "stage_seeds": {s: cfg.stage_seed(s) for s in ("split", "bench-split", "bench", "sampler", "cv")},
        "versions": _versions(),
        "partitions": {"train": sha256_file(out / "train.csv"), "test": sha256_file(out / "test.csv")},
        "test_partition_readers": list(TEST_READERS),
        "artifacts": {name: sha256_file(out / name) for name in sorted(written)},
    }
    manifest["artifacts"]["manifest.json"] = None
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return manifest
