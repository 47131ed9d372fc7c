"""
Looking at the classifier weights
=================================

Every feature dimension is strongly weighted by some class and nearly ignored
by others. The per-dimension min / max over classes makes this visible, and
sorting one class's weighted features shows where its evidence lives.
"""

import numpy as np

from costarr import SynthConfig, export_sorted_hadamard, fit_model, generate, weight_stats

train, _, test, head = generate(SynthConfig(seed=42))

# %%
# Across dimensions, the smallest class-wise maximum is still large and the
# largest class-wise minimum is still tiny.
st = weight_stats(head)
print(f"min over dims of max weight: {st.per_dim_max.min():.3f}")
print(f"max over dims of min weight: {st.per_dim_min.max():.4f}")

# %%
# The histogram is [bins x D]; every column sums to the number of classes.
print("histogram", st.histogram.shape, "column sums", set(st.histogram.sum(axis=0).tolist()))

# %%
# Product features of class 0's test samples, columns ordered by class 0's
# weight. Mass piles up at the right, on the few heavily weighted dims.
model = fit_model(train, head)
hs = export_sorted_hadamard(test, model, 0)
mine = hs[test.labels == 0]
thirds = np.array_split(mine.mean(axis=0), 3)
print("mean product feature, low / mid / high weight thirds:", [round(float(t.mean()), 4) for t in thirds])
