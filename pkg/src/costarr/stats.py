"""Paired Wilcoxon signed-rank test and Bonferroni correction."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateError

EXACT_MAX_N = 25


@dataclass(frozen=True)
class WilcoxonResult:
    statistic: float  # min(W+, W-)
    p_value: float  # two-sided
    n: int  # pairs left after dropping zero differences
    method: str  # "exact" or "approx"


def average_ranks(x: np.ndarray) -> np.ndarray:
    """1-based ranks of ``x`` with ties given the mean of the ranks they span."""
    x = np.asarray(x, dtype=np.float64)
    order = np.argsort(x, kind="stable")
    xs = x[order]
    ranks = np.empty(len(x))
    i = 0
    while i < len(xs):
        j = i
        while j + 1 < len(xs) and xs[j + 1] == xs[i]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def signed_rank_null_counts(doubled_ranks: np.ndarray) -> np.ndarray:
    """Number of sign assignments giving each value of ``2 * W+``.

    ``doubled_ranks`` are twice the (possibly half-integer) average ranks, so
    they are integers and the distribution can be built by exact integer
    convolution: entry ``s`` of the result counts the subsets whose doubled
    rank sum equals ``s``. The counts sum to ``2**n``.
    """
    r = np.asarray(doubled_ranks, dtype=np.int64)
    counts = np.zeros(int(r.sum()) + 1, dtype=object)
    counts[0] = 1
    top = 0
    for v in r.tolist():
        counts[v : top + v + 1] = counts[v : top + v + 1] + counts[: top + 1]
        top += v
    return counts


def _exact_p(doubled: np.ndarray, w2: int) -> float:
    counts = signed_rank_null_counts(doubled)
    total2 = len(counts) - 1
    s = np.arange(len(counts))
    extreme = (s <= w2) | (s >= total2 - w2)
    return float(counts[extreme].sum()) / float(2 ** len(doubled))


def _approx_p(ranks: np.ndarray, w: float) -> float:
    n = len(ranks)
    mean = n * (n + 1) / 4.0
    _, tie_sizes = np.unique(ranks, return_counts=True)
    var = n * (n + 1) * (2 * n + 1) / 24.0 - float(np.sum(tie_sizes**3 - tie_sizes)) / 48.0
    # w <= mean always; continuity correction moves it toward the mean
    z = min(w - mean + 0.5, 0.0) / math.sqrt(var)
    return min(1.0, math.erfc(-z / math.sqrt(2.0)))


def wilcoxon_signed_rank(a, b, method: str = "auto") -> WilcoxonResult:
    """Two-sided Wilcoxon signed-rank test on paired samples ``a`` and ``b``.

    Zero differences are dropped and tied absolute differences receive average
    ranks. With ``method="auto"`` the exact null distribution (all ``2**n``
    sign assignments, tie-aware) is used for ``n <= 25`` and the normal
    approximation with tie-corrected variance and continuity correction above.

    Raises
    ------
    DegenerateError
        If every difference is zero; ``p`` is then taken as 1.0 by convention.
    """
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    if a.shape != b.shape or a.size == 0:
        raise ValueError(f"paired samples must be non-empty and equal length, got {a.size} and {b.size}")
    d = a - b
    d = d[d != 0]
    if d.size == 0:
        raise DegenerateError("all paired differences are zero (p = 1.0)")
    ranks = average_ranks(np.abs(d))
    doubled = np.rint(2 * ranks).astype(np.int64)
    w_plus2 = int(doubled[d > 0].sum())
    w_minus2 = int(doubled[d < 0].sum())
    w2 = min(w_plus2, w_minus2)
    n = d.size
    if method == "auto":
        method = "exact" if n <= EXACT_MAX_N else "approx"
    if method == "exact":
        p = _exact_p(doubled, w2)
    elif method == "approx":
        p = _approx_p(ranks, w2 / 2.0)
    else:
        raise ValueError(f"method must be 'auto', 'exact' or 'approx', got {method!r}")
    return WilcoxonResult(w2 / 2.0, p, n, method)


def bonferroni(p: float, m: int) -> float:
    if m < 1:
        raise ValueError(f"number of tests must be >= 1, got {m}")
    return min(1.0, m * p)
