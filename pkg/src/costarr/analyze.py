"""Per-dimension statistics of classifier weights across classes."""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from .tensors import ClassifierHead

DEFAULT_BINS = 80


@dataclass(frozen=True)
class WeightStats:
    per_dim_min: np.ndarray
    per_dim_mean: np.ndarray
    per_dim_max: np.ndarray
    histogram: np.ndarray  # int64 [bins x D], counts of |W| per dim
    bin_edges: np.ndarray  # [bins + 1], uniform over [0, max |W|]

    def summary_csv(self) -> str:
        buf = io.StringIO()
        buf.write("dim,min,mean,max\n")
        for d, (lo, mu, hi) in enumerate(zip(self.per_dim_min.tolist(), self.per_dim_mean.tolist(),
                                             self.per_dim_max.tolist())):
            buf.write(f"{d},{lo!r},{mu!r},{hi!r}\n")
        return buf.getvalue()

    def histogram_csv(self) -> str:
        buf = io.StringIO()
        buf.write(",".join(f"d{d}" for d in range(self.histogram.shape[1])) + "\n")
        for row in self.histogram.tolist():
            buf.write(",".join(str(v) for v in row) + "\n")
        return buf.getvalue()


def weight_stats(head: ClassifierHead, bins: int = DEFAULT_BINS) -> WeightStats:
    """Min / mean / max of the weights of each feature dimension over classes.

    The histogram counts absolute weights per dimension in ``bins`` equal bins
    spanning ``[0, max |W|]``; the top bin is closed, so each column sums to C.
    """
    if bins < 2:
        raise ValueError(f"bins must be >= 2, got {bins}")
    w = np.asarray(head.weights, dtype=np.float64)
    aw = np.abs(w)
    top = float(aw.max())
    edges = np.linspace(0.0, top, bins + 1)
    if top > 0:
        idx = np.minimum((aw / top * bins).astype(np.int64), bins - 1)
    else:
        idx = np.zeros(aw.shape, dtype=np.int64)
    hist = np.zeros((bins, w.shape[1]), dtype=np.int64)
    cols = np.broadcast_to(np.arange(w.shape[1]), w.shape)
    np.add.at(hist, (idx, cols), 1)
    return WeightStats(w.min(axis=0), w.mean(axis=0), w.max(axis=0), hist, edges)
