"""Penalised logistic regression on the synthetic fixture.

Walks a lasso path from lambda_max downward and shows which columns
enter first, then compares the three penalties at one lambda.
"""
import numpy as np

from riskpath.glm import PenaltySpec, fit_path, fit_penalized, lambda_max
from riskpath.selection import load_policies
from riskpath.synthetic import TRUE_VARIABLES, generate

X, y, names = generate(n=2000, seed=20221)
print(f"{len(y)} rows, prevalence {y.mean():.3f}; planted: {', '.join(TRUE_VARIABLES)}")

# At lambda_max every slope is exactly zero; just below it one column enters.
lasso = PenaltySpec("lasso")
lm = lambda_max(X, y, lasso)
print(f"lasso lambda_max = {lm:.5f}")
print("slopes at lambda_max:", np.count_nonzero(fit_penalized(X, y, lasso.with_lambda(lm)).coef))

path = fit_path(X, y, lasso, n_lambda=40, min_ratio=1e-3, names=names)
seen = []
for lam, fit in zip(path.lambdas, path.fits):
    new = [n for n in fit.active_names if n not in seen]
    if new:
        seen += new
        print(f"  lambda {lam:.5f}: +{', '.join(new)}")

# Same lambda, three penalties. Group lasso uses the finest grouping policy.
lam = 0.2 * lm
groups = load_policies()[5].groups_for(names)
for spec in (PenaltySpec("lasso", lam=lam),
             PenaltySpec("elastic_net", lam=lam, alpha=0.5),
             PenaltySpec("group_lasso", lam=lam, groups=groups)):
    fit = fit_penalized(X, y, spec, names=names)
    print(f"{spec.kind:12s} keeps {len(fit.active)}: {', '.join(fit.active_names)}")
