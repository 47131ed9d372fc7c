"""
Which half of the representation matters?
=========================================

COSTARR compares a sample to its predicted class through two blocks: the raw
features and their product with that class's weights. Dropping either block,
or swapping the logit factor for a softmax or nothing, gives the ablations
compared here. Averages are over three seeds of the default benchmark.
"""

import numpy as np

from costarr import METHODS, BinLabeled, SynthConfig, auroc, fit_model, generate, oscr, score

seeds = (42, 43, 44)
table = {m: [] for m in METHODS}
roc = {m: [] for m in METHODS}

# %%
# Each seed gets its own head, masks and splits.
for seed in seeds:
    train, _, test, head = generate(SynthConfig(seed=seed))
    model = fit_model(train, head)
    for m in METHODS:
        t = score(test, model, m)
        data = BinLabeled.from_predictions(t.score, t.predicted, test.labels)
        table[m].append(oscr(data).auc)
        roc[m].append(auroc(data))

# %%
# Ranking by mean AUOSCR.
print(f"{'method':10s} {'AUOSCR':>8s} {'AUROC':>8s}")
for m in sorted(METHODS, key=lambda m: -np.mean(table[m])):
    print(f"{m:10s} {np.mean(table[m]):8.4f} {np.mean(roc[m]):8.4f}")
