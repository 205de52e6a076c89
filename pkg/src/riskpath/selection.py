"""Variable selection: stepwise AIC, cross-validated penalised fits and
group-lasso selections under the grouping policies."""
import csv
import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from importlib import resources

import numpy as np
from sklearn.model_selection import StratifiedKFold

from .errors import AllZeroPath, ConfigError, DegenerateFold
from .evaluation import roc_auc
from .glm import (
    PenaltySpec,
    _as_arrays,
    _Problem,
    aic,
    decision_function,
    fit_logistic,
    fit_path,
    lambda_grid,
    logistic_loss,
    path_anchor,
)


@dataclass(frozen=True)
class GroupingPolicy:
    policy_id: object
    groups: dict  # variable -> group id

    def __post_init__(self):
        ids = sorted(set(self.groups.values()))
        if ids != list(range(1, len(ids) + 1)):
            raise ConfigError(f"policy {self.policy_id}: group ids must be contiguous from 1")

    def groups_for(self, names):
        missing = [n for n in names if n not in self.groups]
        if missing:
            raise ConfigError(f"policy {self.policy_id} does not cover {', '.join(missing)}")
        return [self.groups[n] for n in names]

    @property
    def n_groups(self):
        return len(set(self.groups.values()))


def load_policies(path=None):
    """Grouping policies keyed by id, read from a ``variable,group1,...`` CSV."""
    if path is None:
        text = resources.files("riskpath.data").joinpath("grouping_policies.csv").read_text()
    else:
        with open(path, encoding="utf-8") as f:
            text = f.read()
    rows = list(csv.reader(io.StringIO(text)))
    header, body = rows[0], [r for r in rows[1:] if r]
    policies = {}
    for j, col in enumerate(header[1:], start=1):
        pid = int(col[5:]) if col.startswith("group") and col[5:].isdigit() else col
        policies[pid] = GroupingPolicy(pid, {r[0]: int(r[j]) for r in body})
    return policies


@dataclass
class SelectionResult:
    method: str
    selected: list
    lam: float = None
    cv_curve: list = field(default_factory=list)
    aic: float = None

    def removed(self, names):
        return [n for n in names if n not in self.selected]


@dataclass
class CVResult:
    lam: float
    index: int
    lambdas: np.ndarray
    mean: np.ndarray
    sd: np.ndarray
    path: object  # LambdaPath on the full data

    @property
    def curve(self):
        return list(zip(self.lambdas.tolist(), self.mean.tolist(), self.sd.tolist()))


def stratified_folds(y, folds, seed):
    """Validation index arrays, stratified by outcome and fixed by ``seed``."""
    y = np.asarray(y)
    if folds < 2:
        raise DegenerateFold("need at least two folds")
    if min(np.sum(y == 0), np.sum(y == 1)) < folds:
        raise DegenerateFold(f"a class has fewer rows than the {folds} folds")
    splitter = StratifiedKFold(n_splits=folds, shuffle=True, random_state=seed)
    return [test for _, test in splitter.split(np.zeros(len(y)), y)]


def _fold_scores(X, y, w, penalty, lambdas, valid, metric):
    train = np.setdiff1d(np.arange(len(y)), valid)
    path = fit_path(X[train], y[train], penalty, weights=w[train], lambdas=lambdas)
    out = np.empty(len(lambdas))
    for k, fit in enumerate(path.fits):
        eta = decision_function(fit, X[valid])
        if metric == "auc":
            out[k] = roc_auc(eta, y[valid])[0]
        else:
            out[k] = 2.0 * logistic_loss(eta, y[valid], w[valid])
    return out


def cv_select_lambda(X, y, penalty, folds=10, seed=0, weights=None, n_lambda=100,
                     min_ratio=1e-4, metric="auc", threads=1, names=None, rule="1se"):
    """Pick lambda by stratified K-fold cross-validation.

    The grid is anchored at the lambda_max of the full data. With
    ``metric="auc"`` higher mean validation AUC is better, with
    ``metric="deviance"`` lower mean deviance. ``rule="max"`` takes the best
    mean score; ``rule="1se"`` takes the largest lambda whose mean score is
    within one standard error (fold sd / sqrt(folds)) of the best. Ties go
    to the larger lambda either way.
    """
    if rule not in ("max", "1se"):
        raise ConfigError(f"unknown lambda rule {rule!r}")
    if metric not in ("auc", "deviance"):
        raise ConfigError(f"unknown CV metric {metric!r}")
    X, y, w = _as_arrays(X, y, weights)
    prob = _Problem(X, y, w, penalty)
    lambdas = lambda_grid(path_anchor(prob, penalty), n_lambda, min_ratio)
    parts = stratified_folds(y, folds, seed)
    for valid in parts:
        if len(np.unique(y[valid])) < 2:
            raise DegenerateFold("a validation fold lacks one class")

    def run(valid):
        return _fold_scores(X, y, w, penalty, lambdas, valid, metric)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            scores = np.array(list(pool.map(run, parts)))
    else:
        scores = np.array([run(v) for v in parts])

    mean = scores.mean(axis=0)
    sd = scores.std(axis=0, ddof=1)
    target = mean if metric == "auc" else -mean
    best = int(np.flatnonzero(target == target.max())[0])
    if rule == "1se":
        floor = target[best] - sd[best] / np.sqrt(folds)
        index = int(np.flatnonzero(target >= floor)[0])
    else:
        index = best
    path = fit_path(X, y, penalty, weights=w, lambdas=lambdas, names=names)
    return CVResult(lam=float(lambdas[index]), index=index, lambdas=lambdas,
                    mean=mean, sd=sd, path=path)


def active_variables(fit, names=None):
    """Names of the columns with a nonzero standardised coefficient."""
    names = names if names is not None else fit.names
    return [names[j] for j in fit.active]


def penalized_selection(X, y, names, penalty, label, folds=10, seed=0, weights=None,
                        n_lambda=100, min_ratio=1e-4, metric="auc", threads=1, rule="1se"):
    cv = cv_select_lambda(X, y, penalty, folds=folds, seed=seed, weights=weights,
                          n_lambda=n_lambda, min_ratio=min_ratio, metric=metric,
                          threads=threads, names=names, rule=rule)
    fit = cv.path.fits[cv.index]
    return SelectionResult(label, active_variables(fit, names), cv.lam, cv.curve)


def group_lasso_selections(X, y, names, policy, folds=10, seed=0, weights=None,
                           n_lambda=100, min_ratio=1e-4, metric="auc", threads=1,
                           max_selections=4, group_weights=None, rule="1se"):
    """Group-lasso selections for one grouping policy.

    If the CV-chosen lambda keeps some group, that single selection is
    returned. Otherwise the path is walked toward smaller lambdas and each
    nonempty active set larger than the previous one is emitted (labels
    ``Group<k>(1)``, ``Group<k>(2)``, ...), at most ``max_selections``.
    """
    penalty = PenaltySpec("group_lasso", groups=policy.groups_for(names),
                          group_weights=group_weights)
    label = f"Group{policy.policy_id}"
    for attempt, ratio in enumerate((min_ratio, min_ratio * 1e-2)):
        cv = cv_select_lambda(X, y, penalty, folds=folds, seed=seed, weights=weights,
                              n_lambda=n_lambda, min_ratio=ratio, metric=metric,
                              threads=threads, names=names, rule=rule)
        fits = cv.path.fits
        chosen = active_variables(fits[cv.index], names)
        if chosen:
            return [SelectionResult(label, chosen, cv.lam, cv.curve)]
        out = []
        size = 0
        for k in range(cv.index + 1, len(fits)):
            selected = active_variables(fits[k], names)
            if len(selected) > size:
                size = len(selected)
                out.append(SelectionResult(f"{label}({len(out) + 1})", selected,
                                           float(cv.lambdas[k]), cv.curve))
                if max_selections and len(out) == max_selections:
                    break
        if out:
            return out
    raise AllZeroPath(f"{label}: no lambda on the path keeps any group")


def _aic_of(X, y, w, cols, cache):
    key = frozenset(cols)
    if key not in cache:
        sub = X[:, sorted(cols)]
        fit = fit_logistic(sub, y, weights=w)
        cache[key] = aic(fit, sub, y, weights=w)
    return cache[key]


def stepwise_select(data, direction="both", label="Stepwise"):
    """Stepwise AIC search over single-variable additions and removals.

    ``both`` and ``backward`` start from the full model, ``forward`` from
    the intercept-only model. Stops when no move lowers the AIC.
    """
    if direction not in ("both", "backward", "forward"):
        raise ConfigError(f"unknown stepwise direction {direction!r}")
    X, y, w = _as_arrays(data.X, data.y, data.weights)
    p = X.shape[1]
    cache = {}
    current = set(range(p)) if direction != "forward" else set()
    score = _aic_of(X, y, w, current, cache)
    while True:
        moves = []
        if direction in ("both", "backward"):
            moves += [current - {j} for j in sorted(current)]
        if direction in ("both", "forward"):
            moves += [current | {j} for j in range(p) if j not in current]
        if not moves:
            break
        scored = [(_aic_of(X, y, w, m, cache), sorted(m)) for m in moves]
        best_score, best = min(scored, key=lambda t: t[0])
        if best_score >= score:
            break
        current, score = set(best), best_score
    selected = [data.names[j] for j in sorted(current)]
    return SelectionResult(label, selected, aic=score)


def is_local_aic_optimum(data, selected):
    """True when no single addition or removal lowers the AIC of ``selected``."""
    X, y, w = _as_arrays(data.X, data.y, data.weights)
    cols = {data.names.index(n) for n in selected}
    cache = {}
    base = _aic_of(X, y, w, cols, cache)
    neighbours = [cols - {j} for j in cols] + [cols | {j} for j in range(X.shape[1]) if j not in cols]
    return all(_aic_of(X, y, w, m, cache) >= base for m in neighbours)


def selection_matrix(results, names):
    """Rows ``(variable, '*' or '' per result)`` in ``names`` order."""
    return [(n, *("*" if n in r.selected else "" for r in results)) for n in names]
