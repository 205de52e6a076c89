"""Synthetic survey-shaped data with a known logistic ground truth.

Columns mimic the coded analysis variables (binary items, Education 1-5,
Dental 0-2, and six continuous measures in their native units). Only Age,
Heart, Physical and Dental enter the true model.
"""
import numpy as np

from .codebook import OUTCOME, PREDICTORS

TRUE_VARIABLES = ("Age", "Heart", "Physical", "Dental")

# Effects per standard deviation of each planted column.
TRUE_EFFECTS = {"Age": 1.2, "Heart": 0.9, "Physical": 0.9, "Dental": 0.9}
INTERCEPT = -1.5

BINARY_RATES = {
    "Male": 0.45, "Drug": 0.05, "Heart": 0.15, "COPD": 0.15, "Smoke": 0.5,
    "Visual": 0.1, "Veteran": 0.15, "Hearing": 0.12, "Depression": 0.25, "TypeI": 0.1,
}


def generate_predictors(n, rng):
    cols = {}
    for name, rate in BINARY_RATES.items():
        cols[name] = (rng.random(n) < rate).astype(float)
    cols["Education"] = rng.choice([1, 2, 3, 4, 5], size=n, p=[0.05, 0.1, 0.3, 0.3, 0.25]).astype(float)
    cols["Dental"] = rng.choice([0, 1, 2], size=n, p=[0.4, 0.35, 0.25]).astype(float)
    cols["Sleep"] = np.clip(np.round(rng.normal(7, 1.5, n)), 1, 24)
    cols["BMI"] = np.round(np.clip(rng.lognormal(np.log(2900), 0.2, n), 1200, 9000))
    cols["Age"] = np.round(np.clip(rng.normal(58, 13, n), 18, 80))
    cols["Drinking"] = np.clip(rng.poisson(2.0, n), 0, 76).astype(float)
    cols["Mental"] = np.clip(np.round(rng.exponential(6, n)), 0, 30)
    cols["Physical"] = np.clip(np.round(rng.exponential(8, n)), 0, 30)
    return np.column_stack([cols[name] for name in PREDICTORS])


def true_logit(X):
    eta = np.full(X.shape[0], INTERCEPT)
    for name, effect in TRUE_EFFECTS.items():
        col = X[:, PREDICTORS.index(name)]
        eta += effect * (col - col.mean()) / col.std()
    return eta


def generate(n=2000, seed=20221):
    """Return ``(X, y, names)`` with the outcome drawn from the planted model."""
    rng = np.random.default_rng(seed)
    X = generate_predictors(n, rng)
    prob = 1.0 / (1.0 + np.exp(-true_logit(X)))
    y = (rng.random(n) < prob).astype(float)
    return X, y, list(PREDICTORS)


def write_csv(path, n=2000, seed=20221):
    X, y, names = generate(n, seed)
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(",".join(names + [OUTCOME]) + "\n")
        for row, label in zip(X, y):
            f.write(",".join(f"{v:g}" for v in row) + f",{label:g}\n")
