"""Open-set metrics: OSA / OOSA with a validation threshold, OSCR, AUROC."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class BinLabeled:
    """Scores with known / correctly-classified flags for one split."""

    score: np.ndarray
    known: np.ndarray
    correct: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "score", np.asarray(self.score, dtype=np.float64))
        object.__setattr__(self, "known", np.asarray(self.known, dtype=bool))
        object.__setattr__(self, "correct", np.asarray(self.correct, dtype=bool))
        if not (self.score.shape == self.known.shape == self.correct.shape) or self.score.ndim != 1:
            raise ValueError("score, known and correct must be 1-D arrays of equal length")
        if (self.correct & ~self.known).any():
            raise ValueError("a sample cannot be correct without being known")

    @classmethod
    def from_predictions(cls, score, predicted, labels) -> "BinLabeled":
        labels = np.asarray(labels)
        known = labels != -1
        return cls(score, known, known & (np.asarray(predicted) == labels))

    def __len__(self):
        return self.score.shape[0]

    @property
    def n_known(self) -> int:
        return int(self.known.sum())

    @property
    def n_unknown(self) -> int:
        return int((~self.known).sum())

    def _require_both(self, what: str) -> None:
        if self.n_known == 0 or self.n_unknown == 0:
            raise ValueError(
                f"{what} needs at least one known and one unknown sample "
                f"(got {self.n_known} known, {self.n_unknown} unknown)"
            )


@dataclass(frozen=True)
class OscrCurve:
    fpr: np.ndarray
    ccr: np.ndarray
    thresholds: np.ndarray
    auc: float

    @property
    def points(self) -> list[tuple[float, float]]:
        return list(zip(self.fpr.tolist(), self.ccr.tolist()))


@dataclass(frozen=True)
class OosaResult:
    threshold: float
    val_osa: float
    test_osa: float


def osa(data: BinLabeled, tau: float) -> float:
    """Open-set accuracy at threshold ``tau``.

    Accepted (``score >= tau``) correctly classified knowns plus rejected
    unknowns, over all samples. Misclassified knowns always count as errors.
    """
    if len(data) == 0:
        raise ValueError("osa of an empty set")
    accepted = data.score >= tau
    good = (data.correct & accepted).sum() + (~data.known & ~accepted).sum()
    return float(good) / len(data)


def threshold_candidates(scores: np.ndarray) -> np.ndarray:
    """Midpoints between consecutive unique scores plus one value beyond each end."""
    u = np.unique(np.asarray(scores, dtype=np.float64))
    mids = u[:-1] + (u[1:] - u[:-1]) / 2.0
    # adjacent floats: the midpoint may round down onto the lower score
    mids = np.where(mids > u[:-1], mids, u[1:])
    return np.concatenate([[u[0] - 1.0], mids, [u[-1] + 1.0]])


def osa_curve(data: BinLabeled) -> tuple[np.ndarray, np.ndarray]:
    """OSA at every candidate threshold, in ascending threshold order.

    Computed with cumulative counts over the sorted unique scores.
    """
    if len(data) == 0:
        raise ValueError("osa of an empty set")
    cand = threshold_candidates(data.score)
    u, inverse = np.unique(data.score, return_inverse=True)
    # candidate k (0..len(u)) accepts exactly the scores u[k:], rejects u[:k]
    correct_at = np.bincount(inverse, weights=data.correct, minlength=len(u))
    unknown_at = np.bincount(inverse, weights=~data.known, minlength=len(u))
    accepted_correct = np.concatenate([np.cumsum(correct_at[::-1])[::-1], [0.0]])
    rejected_unknown = np.concatenate([[0.0], np.cumsum(unknown_at)])
    return cand, (accepted_correct + rejected_unknown) / len(data)


def predict_threshold(val: BinLabeled) -> float:
    """Threshold maximising validation OSA over the midpoint candidate set (ties -> smallest)."""
    val._require_both("threshold prediction")
    cand, values = osa_curve(val)
    return float(cand[int(np.argmax(values))])


def oosa(val: BinLabeled, test: BinLabeled) -> OosaResult:
    """Predict the threshold on ``val`` and report OSA on ``test`` at that threshold."""
    tau = predict_threshold(val)
    return OosaResult(tau, osa(val, tau), osa(test, tau))


def oscr(test: BinLabeled) -> OscrCurve:
    """Open-set classification rate curve (CCR against FPR) and its area.

    Thresholds sweep from +inf down through every unique score; a sample is
    accepted when ``score >= tau``. The area is the trapezoidal integral over
    FPR in [0, 1], extended flat at the final CCR when the last FPR is below 1.
    """
    test._require_both("OSCR")
    u, inverse = np.unique(test.score, return_inverse=True)
    correct_at = np.bincount(inverse, weights=test.correct, minlength=len(u))[::-1]
    unknown_at = np.bincount(inverse, weights=~test.known, minlength=len(u))[::-1]
    ccr = np.concatenate([[0.0], np.cumsum(correct_at)]) / test.n_known
    fpr = np.concatenate([[0.0], np.cumsum(unknown_at)]) / test.n_unknown
    thresholds = np.concatenate([[np.inf], u[::-1]])
    return OscrCurve(fpr, ccr, thresholds, _trapezoid_to_one(fpr, ccr))


def _trapezoid_to_one(x: np.ndarray, y: np.ndarray) -> float:
    area = float(np.sum((x[1:] - x[:-1]) * (y[1:] + y[:-1]) / 2.0))
    if x[-1] < 1.0:
        area += (1.0 - float(x[-1])) * float(y[-1])
    return area


def auroc(test: BinLabeled) -> float:
    """Area under the ROC curve with knowns as the positive class.

    Sweeps thresholds over the unique scores; grouping ties into a single
    step makes the trapezoid count tied known/unknown pairs as one half.
    """
    test._require_both("AUROC")
    u, inverse = np.unique(test.score, return_inverse=True)
    pos = np.bincount(inverse, weights=test.known, minlength=len(u))[::-1]
    neg = np.bincount(inverse, weights=~test.known, minlength=len(u))[::-1]
    tpr = np.concatenate([[0.0], np.cumsum(pos)]) / test.n_known
    fpr = np.concatenate([[0.0], np.cumsum(neg)]) / test.n_unknown
    return float(np.sum((fpr[1:] - fpr[:-1]) * (tpr[1:] + tpr[:-1]) / 2.0))
