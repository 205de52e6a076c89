"""Independent reference implementations used only by the tests.

None of these import the package under test.
"""
from fractions import Fraction

import numpy as np


def standardize(X, w=None):
    w = np.ones(len(X)) if w is None else np.asarray(w, float)
    mu = w @ X / w.sum()
    sd = np.sqrt(w @ (X - mu) ** 2 / w.sum())
    return (X - mu) / sd, mu, sd


def _loss_grad(Z, y, w, theta):
    eta = Z @ theta
    prob = 1.0 / (1.0 + np.exp(-eta))
    loss = np.sum(w * (np.logaddexp(0.0, eta) - y * eta)) / w.sum()
    return loss, Z.T @ (w * (prob - y)) / w.sum()


def proximal_gradient(Xs, y, lam, kind="lasso", alpha=1.0, groups=None, group_weights=None,
                      w=None, tol=1e-14, max_iter=500000):
    """Accelerated proximal gradient (FISTA with restarts) on standardized columns.

    Returns ``theta = (intercept, slopes...)`` on the standardized scale.
    """
    n, p = Xs.shape
    w = np.ones(n) if w is None else np.asarray(w, float)
    Z = np.column_stack([np.ones(n), Xs])
    L = np.linalg.eigvalsh(Z.T @ (Z * w[:, None]) / (4 * w.sum()))[-1]
    if kind == "elastic_net":
        L += lam * (1 - alpha)
    step = 1.0 / L

    if kind == "group_lasso":
        groups = np.asarray(groups)
        ids = list(dict.fromkeys(groups.tolist()))
        blocks = [np.flatnonzero(groups == g) + 1 for g in ids]
        gw = [group_weights[g] if group_weights else np.sqrt(len(b)) for g, b in zip(ids, blocks)]

    def prox(v):
        out = v.copy()
        if kind in ("lasso", "elastic_net"):
            s = v[1:]
            out[1:] = np.sign(s) * np.maximum(np.abs(s) - step * lam * alpha, 0.0)
        else:
            for b, wt in zip(blocks, gw):
                nrm = np.linalg.norm(v[b])
                out[b] = 0.0 if nrm <= step * lam * wt else (1 - step * lam * wt / nrm) * v[b]
        return out

    def grad(theta):
        _, g = _loss_grad(Z, y, w, theta)
        if kind == "elastic_net":
            g = g.copy()
            g[1:] += lam * (1 - alpha) * theta[1:]
        return g

    theta = np.zeros(p + 1)
    ybar = w @ y / w.sum()
    theta[0] = np.log(ybar / (1 - ybar))
    mom, t = theta.copy(), 1.0
    for _ in range(max_iter):
        new = prox(mom - step * grad(mom))
        if np.max(np.abs(new - theta)) < tol:
            return new
        t_new = 0.5 * (1 + np.sqrt(1 + 4 * t * t))
        if (mom - new) @ (new - theta) > 0:  # gradient restart
            t_new, mom = 1.0, new.copy()
        else:
            mom = new + (t - 1) / t_new * (new - theta)
        theta, t = new, t_new
    return theta


def newton_logistic(X, y, w=None, tol=1e-13, max_iter=200):
    """Plain Newton-Raphson on the log-likelihood, original scale."""
    n = len(y)
    w = np.ones(n) if w is None else np.asarray(w, float)
    Z = np.column_stack([np.ones(n), X])
    theta = np.zeros(Z.shape[1])
    for _ in range(max_iter):
        prob = 1.0 / (1.0 + np.exp(-(Z @ theta)))
        g = Z.T @ (w * (y - prob))
        H = Z.T @ (Z * (w * prob * (1 - prob))[:, None])
        step = np.linalg.solve(H, g)
        theta = theta + step
        if np.max(np.abs(step)) < tol:
            break
    return theta


def concordance_auc(scores, labels):
    """P(score_pos > score_neg) + 1/2 P(tie), exact rational arithmetic."""
    pos = [s for s, l in zip(scores, labels) if l == 1]
    neg = [s for s, l in zip(scores, labels) if l == 0]
    total = Fraction(0)
    for a in pos:
        for b in neg:
            if a > b:
                total += 1
            elif a == b:
                total += Fraction(1, 2)
    return total / (len(pos) * len(neg))


def aic_exhaustive(X, y, names):
    """AIC of every nonempty subset (small p only)."""
    from itertools import combinations
    out = {}
    n = len(y)
    for k in range(0, X.shape[1] + 1):
        for combo in combinations(range(X.shape[1]), k):
            theta = newton_logistic(X[:, list(combo)], y) if combo else None
            if theta is None:
                p = y.mean()
                ll = n * (p * np.log(p) + (1 - p) * np.log(1 - p))
            else:
                eta = theta[0] + X[:, list(combo)] @ theta[1:]
                ll = np.sum(y * eta - np.logaddexp(0, eta))
            out[tuple(names[j] for j in combo)] = 2 * (len(combo) + 1) - 2 * ll
    return out
