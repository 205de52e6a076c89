"""Summary statistics for continuous variables and counts for categorical ones."""
import math
from dataclasses import dataclass, astuple, fields

import numpy as np

from .errors import NonPositiveValue, UnknownLevel

SUMMARY_COLUMNS = ("name", "n", "mean", "sd", "median", "max", "min", "skew", "se")


@dataclass
class SummaryRow:
    name: str
    n: int
    mean: float
    sd: float
    median: float
    max: float
    min: float
    skew: float
    se: float

    def as_tuple(self):
        return astuple(self)


def skewness(values, kind=3):
    """Sample skewness.

    ``kind`` follows the usual three textbook definitions: 1 is the moment
    ratio g1 = m3 / m2**1.5, 2 is the bias-adjusted G1, and 3 (the default)
    is b1 = g1 * ((n - 1) / n)**1.5.
    """
    x = np.asarray(values, dtype=float)
    n = x.size
    d = x - x.mean()
    m2 = np.mean(d * d)
    denom = m2 ** 1.5
    # denom can underflow to 0 for tiny nonzero spread
    if n < 2 or denom == 0:
        return 0.0
    g1 = np.mean(d ** 3) / denom
    if kind == 1:
        return float(g1)
    if kind == 2:
        if n < 3:
            return 0.0
        return float(g1 * math.sqrt(n * (n - 1)) / (n - 2))
    if kind == 3:
        return float(g1 * ((n - 1) / n) ** 1.5)
    raise ValueError(f"unknown skewness type {kind}")


def describe_continuous(values, name="", skew_type=3):
    x = np.asarray(values, dtype=float)
    if x.size == 0:
        raise ValueError("describe_continuous needs at least one value")
    if not np.isfinite(x).all():
        raise ValueError("values must be finite")
    n = x.size
    mean = float(x.mean())
    sd = float(x.std(ddof=1)) if n > 1 else 0.0
    return SummaryRow(
        name=name,
        n=n,
        mean=mean,
        sd=sd,
        median=float(np.median(x)),
        max=float(x.max()),
        min=float(x.min()),
        skew=skewness(x, skew_type),
        se=sd / math.sqrt(n),
    )


def tabulate_categorical(values, levels):
    counts = {lv: 0 for lv in levels}
    for v in values:
        key = int(v) if float(v).is_integer() else v
        if key not in counts:
            raise UnknownLevel(f"value {v!r} is not one of {list(levels)}")
        counts[key] += 1
    return counts


def log10_transform(values, offset=False):
    """Elementwise log10; with ``offset`` the transform is log10(x + 1)."""
    x = np.asarray(values, dtype=float)
    if offset:
        x = x + 1.0
    if np.any(x <= 0):
        raise NonPositiveValue("log10 needs positive values; enable the +1 offset for day counts")
    return np.log10(x)


def summary_table(data, skew_type=3):
    """Summary rows for every continuous column of a Dataset."""
    return [describe_continuous(data.column(n), name=n, skew_type=skew_type)
            for n in data.names if data.kinds.get(n) == "continuous"]


def format_summary(rows, digits=2):
    """Rows as lists of strings in SUMMARY_COLUMNS order."""
    out = []
    for r in rows:
        cells = []
        for f in fields(r):
            v = getattr(r, f.name)
            if f.name in ("name", "n"):
                cells.append(str(v))
            else:
                cells.append(f"{v:.{digits}f}")
        out.append(cells)
    return out
