"""Logistic regression: plain IRLS and penalised fits along lambda paths.

Penalised problems are solved on internally standardised columns and
minimise::

    (1 / W) * sum_i w_i * [log(1 + exp(eta_i)) - y_i * eta_i] + lam * P(beta)

with ``W = sum_i w_i`` and

* lasso        ``P = sum_j |beta_j|``
* elastic net  ``P = alpha * sum_j |beta_j| + (1 - alpha) / 2 * sum_j beta_j**2``
* group lasso  ``P = sum_g w_g * ||beta_g||_2``

The intercept is never penalised. Coefficients are reported on the original
column scale.
"""
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit, log1p

from ._kernels import block_descent
from .errors import (
    AlphaZero,
    Collinear,
    ColumnMismatch,
    InvalidPenalty,
    NoConvergence,
    SeparationWarning,
    SingleClass,
)

KINDS = ("none", "lasso", "elastic_net", "group_lasso")

ACTIVE_TOL = 1e-8
COEF_CAP = 30.0
INNER_TOL = 1e-10
OUTER_TOL = 1e-9
MAX_OUTER = 1000
MAX_SWEEPS = 10000
RIDGE_ANCHOR_ALPHA = 1e-3


@dataclass
class PenaltySpec:
    kind: str = "none"
    lam: float = 0.0
    alpha: float = 0.5
    groups: tuple = None
    group_weights: dict = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidPenalty(f"unknown penalty {self.kind!r}")
        if self.lam < 0 or not math.isfinite(self.lam):
            raise InvalidPenalty("lambda must be a finite non-negative number")
        if self.kind == "lasso":
            self.alpha = 1.0
        if not 0.0 <= self.alpha <= 1.0:
            raise InvalidPenalty("alpha must lie in [0, 1]")
        if self.kind == "group_lasso":
            if self.groups is None:
                raise InvalidPenalty("group lasso needs a group id per column")
            self.groups = tuple(self.groups)

    def with_lambda(self, lam):
        return PenaltySpec(self.kind, lam, self.alpha, self.groups, self.group_weights)

    def group_ids(self):
        """Distinct group ids in order of first appearance."""
        return list(dict.fromkeys(self.groups))

    def weight_of(self, gid, size):
        if self.group_weights is not None and gid in self.group_weights:
            return float(self.group_weights[gid])
        return math.sqrt(size)


@dataclass
class FitResult:
    intercept: float
    coef: np.ndarray
    converged: bool
    iterations: int
    objective: float
    names: list = None
    coef_std: np.ndarray = None
    intercept_std: float = None
    center: np.ndarray = None
    scale: np.ndarray = None
    penalty: PenaltySpec = None
    separated: bool = False
    trace: list = field(default_factory=list)

    @property
    def active(self):
        """Indices of columns whose standardised coefficient is nonzero."""
        b = self.coef_std if self.coef_std is not None else self.coef
        return np.flatnonzero(np.abs(b) > ACTIVE_TOL)

    @property
    def active_names(self):
        names = self.names or [f"x{j}" for j in range(len(self.coef))]
        return [names[j] for j in self.active]

    def to_rows(self):
        names = self.names or [f"x{j}" for j in range(len(self.coef))]
        return [("(Intercept)", self.intercept)] + list(zip(names, self.coef))


@dataclass
class LambdaPath:
    lambdas: np.ndarray
    fits: list
    penalty: PenaltySpec

    @property
    def active_sizes(self):
        return [len(f.active) for f in self.fits]

    def __len__(self):
        return len(self.fits)


# ---------------------------------------------------------------- helpers

def soft_threshold(z, gamma):
    if gamma < 0:
        raise ValueError("threshold must be non-negative")
    return math.copysign(max(abs(z) - gamma, 0.0), z) if abs(z) > gamma else 0.0


def group_soft_threshold(v, gamma):
    if gamma < 0:
        raise ValueError("threshold must be non-negative")
    v = np.asarray(v, dtype=float)
    norm = np.linalg.norm(v)
    if norm <= gamma:
        return np.zeros_like(v)
    return (1.0 - gamma / norm) * v


def _as_arrays(X, y, weights):
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    y = np.asarray(y, dtype=float)
    w = np.ones(len(y)) if weights is None else np.asarray(weights, dtype=float)
    if X.shape[0] != len(y) or len(w) != len(y):
        raise ValueError("X, y and weights disagree on the number of rows")
    if np.any(w < 0):
        raise ValueError("weights must be non-negative")
    pos = w > 0
    if not (np.any(y[pos] == 1) and np.any(y[pos] == 0)):
        raise SingleClass("both outcome classes are required")
    return X, y, w


def standardize(X, w):
    """Weighted mean and population standard deviation of each column."""
    W = w.sum()
    center = w @ X / W
    scale = np.sqrt(w @ (X - center) ** 2 / W)
    return center, scale


def logistic_loss(eta, y, w):
    """Weighted mean negative log-likelihood."""
    # log(1 + exp(eta)) evaluated stably
    soft = np.maximum(eta, 0.0) + log1p(np.exp(-np.abs(eta)))
    return float(w @ (soft - y * eta) / w.sum())


def loss_gradient(X, y, beta0, beta, weights=None):
    """Gradient of the weighted mean logistic loss wrt ``(beta0, beta)``."""
    X, y, w = np.asarray(X, float), np.asarray(y, float), (
        np.ones(len(y)) if weights is None else np.asarray(weights, float))
    resid = w * (expit(beta0 + X @ beta) - y) / w.sum()
    return float(resid.sum()), X.T @ resid


def loss_value(X, y, beta0, beta, weights=None):
    w = np.ones(len(y)) if weights is None else np.asarray(weights, float)
    return logistic_loss(beta0 + np.asarray(X, float) @ beta, np.asarray(y, float), w)


def _null_intercept(y, w):
    ybar = float(w @ y / w.sum())
    return math.log(ybar / (1.0 - ybar))


def penalty_value(spec, b):
    if spec.kind == "none" or spec.lam == 0:
        return 0.0
    if spec.kind in ("lasso", "elastic_net"):
        a = spec.alpha
        return spec.lam * (a * np.abs(b).sum() + 0.5 * (1 - a) * (b @ b))
    total = 0.0
    groups = np.asarray(spec.groups)
    for gid in spec.group_ids():
        idx = groups == gid
        total += spec.weight_of(gid, int(idx.sum())) * np.linalg.norm(b[idx])
    return spec.lam * total


# ---------------------------------------------------------------- IRLS

def fit_logistic(X, y, weights=None, names=None, tol=1e-10, max_iter=100):
    """Unpenalised weighted logistic regression by iteratively reweighted least squares.

    Returns a :class:`FitResult` on the original scale. When some
    standardised coefficient passes the separation cap the capped estimate is
    returned with ``converged=False`` and ``separated=True``.
    """
    X, y, w = _as_arrays(X, y, weights)
    n, p = X.shape
    Z = np.column_stack([np.ones(n), X])
    center, scale = standardize(X, w)
    if p and (np.any(scale == 0) or np.linalg.matrix_rank((X - center) * np.sqrt(w)[:, None]) < p):
        raise Collinear("design columns are constant or linearly dependent")

    theta = np.zeros(p + 1)
    theta[0] = _null_intercept(y, w)
    eta = Z @ theta
    dev = logistic_loss(eta, y, w)
    trace = [dev]
    converged = separated = False
    it = 0
    for it in range(1, max_iter + 1):
        mu = expit(eta)
        v = np.maximum(mu * (1 - mu), 1e-12) * w
        grad = Z.T @ (w * (mu - y))
        hess = Z.T @ (Z * v[:, None])
        try:
            step = np.linalg.solve(hess, grad)
        except np.linalg.LinAlgError:
            raise Collinear("information matrix is singular") from None
        new = theta - step
        new_dev = logistic_loss(Z @ new, y, w)
        # step halving keeps IRLS monotone on awkward data
        halvings = 0
        while new_dev > dev + 1e-15 * abs(dev) and halvings < 30:
            step *= 0.5
            new = theta - step
            new_dev = logistic_loss(Z @ new, y, w)
            halvings += 1
        change = np.max(np.abs(new - theta))
        theta, dev = new, new_dev
        eta = Z @ theta
        trace.append(dev)
        if p and np.max(np.abs(theta[1:] * scale)) > COEF_CAP:
            separated = True
            break
        if change < tol:
            converged = True
            break

    if separated:
        theta[1:] = np.clip(theta[1:] * scale, -COEF_CAP, COEF_CAP) / scale
        warnings.warn("coefficients reached the separation cap", SeparationWarning, stacklevel=2)
    b0, beta = float(theta[0]), theta[1:].copy()
    return FitResult(
        intercept=b0, coef=beta, converged=converged, iterations=it,
        objective=dev, names=list(names) if names is not None else None,
        coef_std=beta * scale, intercept_std=b0 + float(beta @ center),
        center=center, scale=scale, penalty=PenaltySpec("none"),
        separated=separated, trace=trace,
    )


# ---------------------------------------------------------------- penalised

class _Problem:
    """Standardised problem data shared by every fit on one (X, y, w)."""

    def __init__(self, X, y, w, spec):
        self.X, self.y, self.w = X, y, w
        self.W = w.sum()
        self.center, self.scale = standardize(X, w)
        self.live = self.scale > 0
        Xs = np.zeros_like(X)
        Xs[:, self.live] = (X[:, self.live] - self.center[self.live]) / self.scale[self.live]
        self.Z = np.column_stack([np.ones(len(y)), Xs])
        self.majorizer = self.Z.T @ (self.Z * (w / (4.0 * self.W))[:, None])
        self._blocks(spec)

    def _blocks(self, spec):
        p = self.X.shape[1]
        live = self.live
        blocks, weights = [[0]], [0.0]
        if spec.kind == "group_lasso":
            if len(spec.groups) != p:
                raise InvalidPenalty("group map must cover every column exactly once")
            groups = np.asarray(spec.groups)
            for gid in spec.group_ids():
                cols = np.flatnonzero(groups == gid)
                keep = [int(j) + 1 for j in cols if live[j]]
                if keep:
                    blocks.append(keep)
                    weights.append(spec.weight_of(gid, len(cols)))
        else:
            for j in range(p):
                if live[j]:
                    blocks.append([j + 1])
                    weights.append(1.0)
        self.block_list = blocks
        self.block_weights = np.asarray(weights)
        self.starts = np.cumsum([0] + [len(b) for b in blocks]).astype(np.int64)
        self.members = np.asarray([j for b in blocks for j in b], dtype=np.int64)
        self.wide_blocks = [(g, np.asarray(b)) for g, b in enumerate(blocks) if len(b) > 1]

    def gamma(self, H):
        """Largest eigenvalue of each diagonal block of ``H``."""
        out = np.diag(H)[self.members[self.starts[:-1]]].copy()
        for g, b in self.wide_blocks:
            out[g] = np.linalg.eigvalsh(H[np.ix_(b, b)])[-1]
        return out

    def objective(self, theta, spec):
        eta = self.Z @ theta
        return logistic_loss(eta, self.y, self.w) + penalty_value(spec, theta[1:]), eta

    def score(self):
        """X_s' w (y - ybar) / W at the null model."""
        ybar = self.w @ self.y / self.W
        return self.Z[:, 1:].T @ (self.w * (self.y - ybar)) / self.W


def lambda_max(X, y, penalty, weights=None):
    """Smallest lambda for which every slope is zero."""
    X, y, w = _as_arrays(X, y, weights)
    prob = _Problem(X, y, w, penalty)
    return _lambda_max(prob, penalty)


def _lambda_max(prob, spec):
    s = prob.score()
    if spec.kind in ("lasso", "none"):
        return float(np.max(np.abs(s))) if s.size else 0.0
    if spec.kind == "elastic_net":
        if spec.alpha == 0:
            raise AlphaZero("elastic net with alpha=0 has no finite lambda_max")
        return float(np.max(np.abs(s))) / spec.alpha if s.size else 0.0
    best = 0.0
    for g, b in enumerate(prob.block_list[1:], start=1):
        idx = np.asarray(b) - 1
        best = max(best, float(np.linalg.norm(s[idx])) / prob.block_weights[g])
    return best


def _solve(prob, spec, theta, tol=OUTER_TOL, max_outer=MAX_OUTER):
    lam = spec.lam if spec.kind != "none" else 0.0
    a = spec.alpha if spec.kind in ("lasso", "elastic_net") else 1.0
    thresh = lam * a * prob.block_weights
    thresh[0] = 0.0
    ridge = np.full(len(prob.block_list), lam * (1.0 - a))
    ridge[0] = 0.0
    gamma_major = prob.gamma(prob.majorizer)

    Z, y, w, W = prob.Z, prob.y, prob.w, prob.W
    obj, eta = prob.objective(theta, spec)
    trace = [obj]
    converged = separated = False
    it = 0
    for it in range(1, max_outer + 1):
        mu = expit(eta)
        grad = Z.T @ (w * (mu - y)) / W
        # Try the Newton quadratic first, fall back to the 1/4-curvature
        # majoriser whenever it fails to lower the objective.
        new = None
        v = mu * (1.0 - mu) * w / W
        H = Z.T @ (Z * v[:, None])
        if np.min(np.diag(H)[prob.members]) > 1e-10:
            cand = theta.copy()
            block_descent(H, grad.copy(), cand, prob.starts, prob.members, prob.gamma(H),
                          thresh, ridge, INNER_TOL, MAX_SWEEPS)
            cand_obj, cand_eta = prob.objective(cand, spec)
            if cand_obj <= obj + 1e-14 * abs(obj):
                new, new_obj, new_eta = cand, cand_obj, cand_eta
        if new is None:
            new = theta.copy()
            block_descent(prob.majorizer, grad.copy(), new, prob.starts, prob.members,
                          gamma_major, thresh, ridge, INNER_TOL, MAX_SWEEPS)
            new_obj, new_eta = prob.objective(new, spec)
        change = float(np.max(np.abs(new - theta)))
        theta, obj, eta = new, new_obj, new_eta
        trace.append(new_obj)
        if np.max(np.abs(theta[1:]), initial=0.0) > COEF_CAP:
            np.clip(theta[1:], -COEF_CAP, COEF_CAP, out=theta[1:])
            separated = True
            break
        if change < tol:
            converged = True
            break
    else:
        raise NoConvergence(f"no convergence after {max_outer} outer iterations")
    return theta, converged, separated, it, trace


def _result(prob, spec, theta, converged, separated, it, trace, names):
    live = prob.live
    b_std = np.zeros(prob.X.shape[1])
    b_std[live] = theta[1:][live]
    beta = np.zeros_like(b_std)
    beta[live] = b_std[live] / prob.scale[live]
    b0 = float(theta[0] - beta @ prob.center)
    return FitResult(
        intercept=b0, coef=beta, converged=converged, iterations=it,
        objective=trace[-1], names=list(names) if names is not None else None,
        coef_std=b_std, intercept_std=float(theta[0]), center=prob.center,
        scale=prob.scale, penalty=spec, separated=separated, trace=trace,
    )


def _fit(prob, spec, warm, names, lam_max=None):
    p = prob.X.shape[1]
    if spec.kind != "none" and spec.lam > 0:
        if lam_max is None:
            try:
                lam_max = _lambda_max(prob, spec)
            except AlphaZero:
                lam_max = np.inf
        if spec.lam >= lam_max:
            # KKT at beta = 0 holds exactly here; skip the iterations so
            # the slopes are exact zeros.
            theta = np.zeros(p + 1)
            theta[0] = _null_intercept(prob.y, prob.w)
            obj, _ = prob.objective(theta, spec)
            return _result(prob, spec, theta, True, False, 0, [obj], names)
    theta = np.zeros(p + 1)
    if warm is not None:
        theta[:] = warm
    else:
        theta[0] = _null_intercept(prob.y, prob.w)
    theta[1:][~prob.live] = 0.0
    out = _solve(prob, spec, theta)
    if out[2]:
        warnings.warn("coefficients reached the separation cap", SeparationWarning, stacklevel=3)
    return _result(prob, spec, *out, names)


def fit_penalized(X, y, penalty, weights=None, warm_start=None, names=None):
    """Fit one penalised logistic model.

    Parameters
    ----------
    X : array (n, p)
        Design on the original scale.
    y : array (n,)
        0/1 outcome.
    penalty : PenaltySpec
    weights : array (n,), optional
        Observation weights.
    warm_start : array (p + 1,), optional
        Starting point on the standardised scale, intercept first (as in
        ``[fit.intercept_std, *fit.coef_std]``).
    """
    X, y, w = _as_arrays(X, y, weights)
    prob = _Problem(X, y, w, penalty)
    return _fit(prob, penalty, warm_start, names)


def lambda_grid(lam_max, n_lambda=100, min_ratio=1e-4):
    if n_lambda < 2:
        raise ValueError("a path needs at least two lambdas")
    return lam_max * np.power(min_ratio, np.arange(n_lambda) / (n_lambda - 1))


def path_anchor(prob, spec):
    if spec.kind == "elastic_net" and spec.alpha == 0:
        return _lambda_max(prob, PenaltySpec("elastic_net", 0.0, RIDGE_ANCHOR_ALPHA))
    return _lambda_max(prob, spec)


def fit_path(X, y, penalty, n_lambda=100, min_ratio=1e-4, weights=None, lambdas=None,
             names=None):
    """Warm-started fits over a decreasing, log-spaced lambda grid.

    The grid runs from lambda_max down to ``min_ratio * lambda_max`` unless
    ``lambdas`` is given explicitly.
    """
    X, y, w = _as_arrays(X, y, weights)
    prob = _Problem(X, y, w, penalty)
    lam_max = path_anchor(prob, penalty)
    if lambdas is None:
        lambdas = lambda_grid(lam_max, n_lambda, min_ratio)
    lambdas = np.asarray(lambdas, dtype=float)
    if np.any(np.diff(lambdas) >= 0):
        raise ValueError("lambda grid must be strictly decreasing")
    fits, warm = [], None
    exact_max = lam_max if not (penalty.kind == "elastic_net" and penalty.alpha == 0) else np.inf
    for lam in lambdas:
        fit = _fit(prob, penalty.with_lambda(float(lam)), warm, names, lam_max=exact_max)
        warm = np.concatenate([[fit.intercept_std], fit.coef_std])
        fits.append(fit)
    return LambdaPath(lambdas=lambdas, fits=fits, penalty=penalty)


def predict_proba(fit, X):
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[None, :]
    if X.shape[1] != len(fit.coef):
        raise ColumnMismatch(f"model has {len(fit.coef)} columns, input has {X.shape[1]}")
    return expit(fit.intercept + X @ fit.coef)


def decision_function(fit, X):
    return fit.intercept + np.asarray(X, dtype=float) @ fit.coef


def aic(fit, X, y, weights=None):
    """2k - 2 loglik, with k counting the intercept and every slope."""
    X, y, w = _as_arrays(X, y, weights)
    loglik = -logistic_loss(fit.intercept + X @ fit.coef, y, w) * w.sum()
    return 2.0 * (len(fit.coef) + 1) - 2.0 * loglik
