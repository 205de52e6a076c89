"""Recode raw survey columns into the analysis variables.

The mapping from raw source columns to analysis variables lives in a YAML
codebook (see ``data/codebook_brfss2022.yaml`` for the schema); nothing here
knows BRFSS column names.
"""
import math
from dataclasses import dataclass, field
from importlib import resources

import numpy as np
import yaml

from .errors import ConfigError, DegenerateSplit, EmptyResult, UnknownSource

PREDICTORS = (
    "Male", "Education", "Sleep", "Drug", "BMI", "Age", "Heart", "Drinking",
    "Mental", "COPD", "Smoke", "Visual", "Veteran", "Hearing", "Physical",
    "Dental", "Depression", "TypeI",
)
OUTCOME = "Stroke"

KINDS = ("continuous", "binary", "ordinal")


@dataclass
class RecodeRule:
    target: str
    source: str
    kind: str = "continuous"
    value_map: dict = field(default_factory=dict)
    missing_codes: frozenset = frozenset()
    levels: tuple = ()
    valid_range: tuple = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"{self.target}: unknown kind {self.kind!r}")
        self.value_map = {float(k): float(v) for k, v in self.value_map.items()}
        self.missing_codes = frozenset(float(c) for c in self.missing_codes)
        overlap = self.missing_codes & set(self.value_map)
        if overlap:
            raise ConfigError(f"{self.target}: codes {sorted(overlap)} are both mapped and missing")
        if self.kind == "binary" and not self.levels:
            self.levels = (0, 1)
        if self.kind == "ordinal":
            if not self.levels:
                raise ConfigError(f"{self.target}: ordinal rule needs levels")
            lv = [int(v) for v in self.levels]
            if lv != list(range(lv[0], lv[0] + len(lv))):
                raise ConfigError(f"{self.target}: ordinal levels must be consecutive integers")
        self.levels = tuple(int(v) for v in self.levels)

    def recode(self, raw):
        """Recode a float column. Returns ``(values, keep)``."""
        raw = np.asarray(raw, dtype=float)
        keep = ~np.isnan(raw)
        if self.missing_codes:
            keep &= ~np.isin(raw, list(self.missing_codes))
        out = raw.copy()
        mapped = np.zeros(raw.shape, dtype=bool)
        for code, value in self.value_map.items():
            hit = raw == code
            out[hit] = value
            mapped |= hit
        if self.kind == "continuous":
            if self.valid_range is not None:
                lo, hi = self.valid_range
                keep &= mapped | ((raw >= lo) & (raw <= hi))
        else:
            # categorical values must either be mapped or already a level
            keep &= np.isin(out, self.levels)
        return out, keep


@dataclass
class Codebook:
    rules: list
    outcome: str = OUTCOME

    @property
    def predictors(self):
        return [r.target for r in self.rules if r.target != self.outcome]

    @property
    def sources(self):
        return [r.source for r in self.rules]


def load_codebook(path=None):
    """Read a YAML codebook. ``None`` loads the bundled BRFSS 2022 default."""
    if path is None:
        text = resources.files("riskpath.data").joinpath("codebook_brfss2022.yaml").read_text()
    else:
        try:
            with open(path, encoding="utf-8") as f:
                text = f.read()
        except OSError as exc:
            raise ConfigError(f"cannot read codebook {path}: {exc}") from None
    return parse_codebook(yaml.safe_load(text))


def parse_codebook(doc):
    if not isinstance(doc, dict) or "variables" not in doc:
        raise ConfigError("codebook must be a mapping with a 'variables' block")
    defaults = doc.get("defaults", {})
    rules = []
    for target, spec in doc["variables"].items():
        if not spec.get("include", True):
            continue
        try:
            rules.append(RecodeRule(
                target=target,
                source=spec["source"],
                kind=spec.get("kind", "continuous"),
                value_map=spec.get("map") or {},
                missing_codes=spec.get("missing", defaults.get("missing", [])),
                levels=tuple(spec.get("levels", ())),
                valid_range=tuple(spec["range"]) if "range" in spec else None,
            ))
        except KeyError as exc:
            raise ConfigError(f"codebook entry {target} lacks {exc}") from None
    outcome = doc.get("outcome", OUTCOME)
    if outcome not in [r.target for r in rules]:
        raise ConfigError(f"codebook defines no rule for outcome {outcome}")
    return Codebook(rules=rules, outcome=outcome)


@dataclass
class Dataset:
    """Clean analysis table: one float column per predictor plus the outcome."""

    X: np.ndarray
    y: np.ndarray
    names: list
    kinds: dict = None
    levels: dict = field(default_factory=dict)
    weights: np.ndarray = None

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=float)
        self.y = np.asarray(self.y, dtype=float)
        if self.X.ndim != 2 or self.X.shape[1] != len(self.names):
            raise ValueError("X must be 2-D with one column per name")
        if self.X.shape[0] != self.y.shape[0]:
            raise ValueError("X and y disagree on the number of rows")
        if self.weights is None:
            self.weights = np.ones(len(self.y))
        if self.kinds is None:
            self.kinds = {n: "continuous" for n in self.names}

    @property
    def n(self):
        return len(self.y)

    def column(self, name):
        return self.X[:, self.names.index(name)]

    def take(self, rows):
        rows = np.asarray(rows)
        return Dataset(self.X[rows], self.y[rows], list(self.names), dict(self.kinds),
                       dict(self.levels), self.weights[rows])

    def subset(self, names):
        idx = [self.names.index(n) for n in names]
        return Dataset(self.X[:, idx], self.y, list(names),
                       {n: self.kinds[n] for n in names},
                       {n: self.levels[n] for n in names if n in self.levels},
                       self.weights)

    def class_counts(self):
        n1 = int(np.sum(self.y == 1))
        return self.n - n1, n1


@dataclass
class DesignMatrix:
    X: np.ndarray
    y: np.ndarray
    names: list
    weights: np.ndarray = None


def apply_codebook(raw, codebook):
    """Recode ``raw`` and drop every row with a missing or unmapped value.

    ``codebook`` may be a :class:`Codebook` or a plain list of rules (the
    outcome is then taken to be ``Stroke``).
    """
    if not isinstance(codebook, Codebook):
        codebook = Codebook(rules=list(codebook))
    absent = [r.source for r in codebook.rules if r.source not in raw]
    if absent:
        raise UnknownSource(f"source column(s) not in input: {', '.join(absent)}")

    keep = np.ones(raw.n_rows, dtype=bool)
    recoded = {}
    for rule in codebook.rules:
        values = raw[rule.source]
        if not isinstance(values, np.ndarray):
            raise UnknownSource(f"source column {rule.source} is not numeric")
        out, ok = rule.recode(values)
        recoded[rule.target] = out
        keep &= ok
    if not keep.any():
        raise EmptyResult("every row was dropped by the codebook")

    names = codebook.predictors
    X = np.column_stack([recoded[n][keep] for n in names]) if names else np.zeros((int(keep.sum()), 0))
    kinds = {r.target: r.kind for r in codebook.rules if r.target != codebook.outcome}
    levels = {r.target: r.levels for r in codebook.rules
              if r.target != codebook.outcome and r.kind != "continuous"}
    return Dataset(X=X, y=recoded[codebook.outcome][keep], names=names, kinds=kinds, levels=levels)


def encode_design(data):
    """One numeric column per predictor; ordinal variables keep integer scores."""
    X = np.array(data.X, dtype=float)
    if not np.isfinite(X).all():
        raise ValueError("design matrix has non-finite entries")
    return DesignMatrix(X=X, y=np.array(data.y, dtype=float), names=list(data.names),
                        weights=np.array(data.weights, dtype=float))


def _round_half_up(x):
    return int(math.floor(x + 0.5))


def split_train_test(data, test_fraction=0.2, seed=0):
    """Stratified split: each class contributes ``round(test_fraction * n_c)`` test rows."""
    if not 0 < test_fraction < 1:
        raise ValueError("test_fraction must lie strictly between 0 and 1")
    rng = np.random.default_rng(seed)
    test_rows = []
    for label in (0.0, 1.0):
        rows = np.flatnonzero(data.y == label)
        if len(rows) == 0:
            raise DegenerateSplit(f"class {int(label)} is absent")
        k = _round_half_up(test_fraction * len(rows))
        if k == 0 or k == len(rows):
            raise DegenerateSplit(f"class {int(label)} would be missing from one side of the split")
        test_rows.append(rng.permutation(rows)[:k])
    test = np.sort(np.concatenate(test_rows))
    train = np.setdiff1d(np.arange(data.n), test)
    return data.take(train), data.take(test)
