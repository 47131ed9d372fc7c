"""
Scoring unknowns on a synthetic benchmark
=========================================

Generate a small benchmark, fit class means and logit bounds on the training
split, then score the test split with COSTARR and with the max-logit baseline.
"""

import numpy as np

from costarr import BinLabeled, SynthConfig, fit_model, generate, oscr, score

# %%
# A benchmark is four pieces: train / val / test splits and the linear head
# that produced their logits. Unknown test samples carry label -1.
cfg = SynthConfig(seed=42, n_classes=20, dim=128, test_known=600, test_unknown=600)
train, val, test, head = generate(cfg)
print("train", train.features.shape, "test", test.features.shape)
print("unknown test samples:", int((test.labels == -1).sum()))

# %%
# Fitting only looks at correctly classified training samples: their logits set
# the normalization bounds, and their features give one mean per class.
model = fit_model(train, head)
print(f"logit bounds: [{model.gnl.l_tmin:.3f}, {model.gnl.l_tmax:.3f}]")
print("class means:", model.class_means.shape)

# %%
# Higher scores mean "more likely known". The area under the OSCR curve
# summarises how well a score ranks correct knowns above unknowns.
for method in ("costarr", "maxlogit"):
    t = score(test, model, method)
    curve = oscr(BinLabeled.from_predictions(t.score, t.predicted, test.labels))
    print(f"{method:9s} AUOSCR = {curve.auc:.4f}")

# %%
# Scores of the first few known and unknown samples, side by side.
t = score(test, model, "costarr")
known = test.labels >= 0
print("known:  ", np.round(t.score[known][:5], 3))
print("unknown:", np.round(t.score[~known][:5], 3))
