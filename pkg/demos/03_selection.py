"""Cross-validated selection: lasso, elastic net and group lasso.

The lambda grid starts at lambda_max of the full data. By default the
largest lambda within one standard error of the best validation AUC is
used; ``rule="max"`` takes the best mean instead.
"""
from riskpath.codebook import Dataset
from riskpath.glm import PenaltySpec
from riskpath.resampling import SamplerSpec, resample
from riskpath.selection import cv_select_lambda, group_lasso_selections, load_policies, penalized_selection
from riskpath.synthetic import generate

X, y, names = generate(n=2000, seed=3)
data = resample(Dataset(X, y, names), SamplerSpec("smote", seed=3))
X, y = data.X, data.y

for rule in ("1se", "max"):
    cv = cv_select_lambda(X, y, PenaltySpec("lasso"), folds=10, seed=3, rule=rule, names=names)
    fit = cv.path.fits[cv.index]
    print(f"lasso, rule={rule}: lambda {cv.lam:.5f}, AUC {cv.mean[cv.index]:.4f}, "
          f"keeps {', '.join(fit.active_names)}")

en = penalized_selection(X, y, names, PenaltySpec("elastic_net", alpha=0.5), "Elasticnet", seed=3)
print("elastic net keeps", ", ".join(en.selected))

# Coarse policies zero whole blocks at once; the finest one acts like lasso.
for pid, policy in load_policies().items():
    for sel in group_lasso_selections(X, y, names, policy, seed=3):
        print(f"{sel.method:10s} {len(sel.selected):2d} kept: {', '.join(sel.selected)}")
