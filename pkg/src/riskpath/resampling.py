"""Class-imbalance corrections applied to training data.

All samplers are deterministic functions of ``(data, spec)``; randomness comes
from a generator seeded with ``spec.seed`` only.
"""
import math
from dataclasses import dataclass

import numpy as np

from .codebook import Dataset
from .errors import ConfigError, KTooLarge, SingleClass, TooFewMinority

METHODS = ("class_weight", "oversample", "undersample", "smote")


@dataclass(frozen=True)
class SamplerSpec:
    method: str = "smote"
    smote_k: int = 5
    target_ratio: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.method not in METHODS:
            raise ConfigError(f"unknown sampler {self.method!r}")
        if self.smote_k < 1:
            raise ConfigError("smote_k must be at least 1")
        if not 0 < self.target_ratio <= 1:
            raise ConfigError("target_ratio must lie in (0, 1]")


@dataclass
class SmoteLog:
    """Parents and gaps of every synthetic row, kept for auditing."""

    base: np.ndarray  # row index (into the input) of x
    neighbor: np.ndarray  # row index of z
    gap: np.ndarray
    raw: np.ndarray  # synthetic rows before level rounding


def _round_half_up(x):
    return int(math.floor(x + 0.5))


def _classes(y):
    n1 = int(np.sum(y == 1))
    n0 = len(y) - n1
    if n0 == 0 or n1 == 0:
        raise SingleClass("both outcome classes are required")
    # ties make class 1 the minority
    minority = 1.0 if n1 <= n0 else 0.0
    return minority, 1.0 - minority


def class_weights(labels):
    """Inverse-prevalence weights ``n / (2 n_c)``; returns ``(w0, w1)``."""
    y = np.asarray(labels)
    n = len(y)
    n1 = int(np.sum(y == 1))
    n0 = n - n1
    if n0 == 0 or n1 == 0:
        raise SingleClass("both outcome classes are required")
    return n / (2.0 * n0), n / (2.0 * n1)


def weight_classes(data, spec=None):
    w0, w1 = class_weights(data.y)
    out = data.take(np.arange(data.n))
    out.weights = np.where(data.y == 1, w1, w0) * data.weights
    return out


def _shuffle(data, rng):
    return data.take(rng.permutation(data.n))


def oversample(data, spec):
    minority, majority = _classes(data.y)
    rng = np.random.default_rng(spec.seed)
    mino = np.flatnonzero(data.y == minority)
    n_major = data.n - len(mino)
    target = _round_half_up(spec.target_ratio * n_major)
    extra = rng.choice(mino, size=max(target - len(mino), 0), replace=True)
    rows = np.concatenate([np.arange(data.n), extra])
    return _shuffle(data.take(rows), rng)


def undersample(data, spec):
    minority, majority = _classes(data.y)
    rng = np.random.default_rng(spec.seed)
    mino = np.flatnonzero(data.y == minority)
    majo = np.flatnonzero(data.y == majority)
    target = min(_round_half_up(len(mino) / spec.target_ratio), len(majo))
    kept = np.sort(rng.choice(majo, size=target, replace=False))
    rows = np.sort(np.concatenate([mino, kept]))
    return _shuffle(data.take(rows), rng)


def nearest_neighbors(Z, k):
    """Indices of the ``k`` nearest rows of ``Z`` (excluding self), stable on ties."""
    sq = np.sum(Z * Z, axis=1)
    d2 = sq[:, None] + sq[None, :] - 2.0 * Z @ Z.T
    np.maximum(d2, 0.0, out=d2)
    np.fill_diagonal(d2, np.inf)
    return np.argsort(d2, axis=1, kind="stable")[:, :k]


def _snap_to_levels(values, levels):
    lo, hi = min(levels), max(levels)
    return np.clip(np.floor(values + 0.5), lo, hi)


def smote(data, spec, return_log=False):
    """Synthetic minority oversampling.

    Each synthetic row is ``x + u (z - x)`` for a random minority row ``x``,
    one of its ``smote_k`` nearest minority neighbours ``z`` (Euclidean, on
    columns standardised with the statistics of ``data``) and
    ``u ~ Uniform(0, 1)``. Binary and ordinal columns are then rounded to the
    nearest valid level.
    """
    minority, _ = _classes(data.y)
    mino = np.flatnonzero(data.y == minority)
    if len(mino) < 2:
        raise TooFewMinority("SMOTE needs at least two minority rows")
    if spec.smote_k > len(mino) - 1:
        raise KTooLarge(f"smote_k={spec.smote_k} exceeds minority size - 1 ({len(mino) - 1})")

    rng = np.random.default_rng(spec.seed)
    n_major = data.n - len(mino)
    n_new = max(_round_half_up(spec.target_ratio * n_major) - len(mino), 0)

    mu = data.X.mean(axis=0)
    sd = data.X.std(axis=0)
    sd[sd == 0] = 1.0
    Xm = data.X[mino]
    neighbors = nearest_neighbors((Xm - mu) / sd, spec.smote_k)

    base = rng.integers(0, len(mino), size=n_new)
    pick = rng.integers(0, spec.smote_k, size=n_new)
    gap = rng.random(n_new)
    other = neighbors[base, pick]
    raw = Xm[base] + gap[:, None] * (Xm[other] - Xm[base])

    synth = raw.copy()
    for j, name in enumerate(data.names):
        if data.kinds.get(name, "continuous") != "continuous":
            synth[:, j] = _snap_to_levels(synth[:, j], data.levels.get(name) or (0, 1))

    w_new = data.weights[mino][base]
    out = Dataset(
        X=np.vstack([data.X, synth]),
        y=np.concatenate([data.y, np.full(n_new, minority)]),
        names=list(data.names),
        kinds=dict(data.kinds),
        levels=dict(data.levels),
        weights=np.concatenate([data.weights, w_new]),
    )
    out = _shuffle(out, rng)
    if return_log:
        return out, SmoteLog(base=mino[base], neighbor=mino[other], gap=gap, raw=raw)
    return out


def resample(data, spec):
    """Dispatch on ``spec.method``."""
    if spec.method == "class_weight":
        return weight_classes(data)
    if spec.method == "oversample":
        return oversample(data, spec)
    if spec.method == "undersample":
        return undersample(data, spec)
    return smote(data, spec)
