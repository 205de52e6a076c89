"""How the four imbalance corrections change a plain logistic model.

Each sampler rebalances the training part only; the held-out part keeps
the natural prevalence.
"""
import numpy as np

from riskpath.codebook import Dataset, split_train_test
from riskpath.evaluation import compare_models, evaluate, markdown_table, COMPARE_HEADER
from riskpath.glm import fit_logistic, predict_proba
from riskpath.resampling import SamplerSpec, resample
from riskpath.synthetic import generate

X, y, names = generate(n=2000, seed=7)
# thin the positives so the imbalance is closer to a real survey
keep = (y == 0) | (np.random.default_rng(0).random(len(y)) < 0.25)
data = Dataset(X[keep], y[keep], names)
train, test = split_train_test(data, 0.2, seed=1)
print("train classes (neg, pos):", train.class_counts())

reports = []
for method in ("class_weight", "oversample", "undersample", "smote"):
    sampled = resample(train, SamplerSpec(method, seed=1))
    print(f"{method:13s} -> {sampled.class_counts()}")
    fit = fit_logistic(sampled.X, sampled.y, weights=sampled.weights)
    reports.append(evaluate(method, predict_proba(fit, test.X), test.y))

# Without rebalancing the 0.5 cutoff rarely fires, so sensitivity collapses.
plain = fit_logistic(train.X, train.y)
reports.append(evaluate("none", predict_proba(plain, test.X), test.y))
print(markdown_table(COMPARE_HEADER, compare_models(reports)))
