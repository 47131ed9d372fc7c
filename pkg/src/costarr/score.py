"""Per-sample open-set scores: COSTARR, its ablations, and logit baselines."""

from __future__ import annotations

import csv
import io
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import FormatError, ShapeError
from .fit import CostarrModel, argmax_lowest, gnl
from .tensors import LabeledSet

EPS = 1e-12

METHODS = ("costarr", "hadamard", "features", "nologit", "cosm", "maxlogit", "msp", "magnorm")
BOUNDED = frozenset({"costarr", "hadamard", "features", "nologit", "cosm", "msp"})
LOGIT_ARGMAX = frozenset({"costarr", "cosm", "maxlogit", "msp", "magnorm"})


@dataclass(frozen=True)
class ScoreTable:
    method: str
    predicted: np.ndarray  # int64 [N]
    score: np.ndarray  # float64 [N]

    def __len__(self):
        return self.score.shape[0]

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("sample_id,predicted,score\n")
        for i, (p, s) in enumerate(zip(self.predicted.tolist(), self.score.tolist())):
            buf.write(f"{i},{p},{s!r}\n")
        return buf.getvalue()

    def write_csv(self, path: str | os.PathLike) -> None:
        with open(path, "w", newline="") as fh:
            fh.write(self.to_csv())


def read_score_csv(path: str | os.PathLike, method: str = "unknown") -> ScoreTable:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["sample_id", "predicted", "score"]:
            raise FormatError(f"{path}: expected header sample_id,predicted,score, got {header}")
        ids, pred, score = [], [], []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 3:
                raise FormatError(f"{path}:{lineno}: expected 3 cells, got {len(row)}")
            try:
                ids.append(int(row[0]))
                pred.append(int(row[1]))
                score.append(float(row[2]))
            except ValueError as exc:
                raise FormatError(f"{path}:{lineno}: {exc}") from None
    if ids != list(range(len(ids))):
        raise FormatError(f"{path}: sample_id must run 0..N-1 in order")
    return ScoreTable(method, np.array(pred, dtype=np.int64), np.array(score, dtype=np.float64))


# -- similarity --------------------------------------------------------------


def _rescaled_cosine(x: np.ndarray, mu: np.ndarray) -> np.ndarray:
    """0.5 * (1 + cos) between each row of ``x`` and the matching row of ``mu``.

    Both arguments are 2-D with equal shape (``mu`` may broadcast). Vectors with
    norm below ``EPS`` get the neutral value 0.5.
    """
    dot = (x * mu).sum(axis=-1)
    xx = (x * x).sum(axis=-1)
    mm = (mu * mu).sum(axis=-1)
    denom = np.sqrt(xx * mm)
    degenerate = (np.sqrt(xx) < EPS) | (np.sqrt(mm) < EPS)
    with np.errstate(invalid="ignore", divide="ignore"):
        cos = np.clip(dot / np.where(degenerate, 1.0, denom), -1.0, 1.0)
    return np.where(degenerate, 0.5, 0.5 * (1.0 + cos))


def concat_vector(f: np.ndarray, w: np.ndarray) -> np.ndarray:
    """``Concat(F, F * W_j)`` for one vector or a batch of rows."""
    f = np.asarray(f, dtype=np.float64)
    return np.concatenate([f, f * w], axis=-1)


def costarr_similarity(f: np.ndarray, model: CostarrModel, j: int) -> float:
    """COSTARR similarity of feature vector ``f`` to class ``j``, in [0, 1]."""
    f = np.asarray(f, dtype=np.float64)
    if f.shape != (model.dim,):
        raise ShapeError(f"feature vector must have shape ({model.dim},), got {f.shape}")
    if not 0 <= j < model.n_classes:
        raise IndexError(f"class index {j} out of range [0, {model.n_classes})")
    w = np.asarray(model.head.weights[j], dtype=np.float64)
    return float(_rescaled_cosine(concat_vector(f, w)[None, :], model.class_means[j][None, :])[0])


def _similarity_to_class(f: np.ndarray, model: CostarrModel, cls: np.ndarray, part: str) -> np.ndarray:
    """Similarity of each row of ``f`` to its own class ``cls[i]``."""
    w = np.asarray(model.head.weights, dtype=np.float64)[cls]
    if part == "full":
        x, mu = concat_vector(f, w), model.class_means[cls]
    elif part == "features":
        x, mu = f, model.feature_means[cls]
    elif part == "hadamard":
        x, mu = f * w, model.hadamard_means[cls]
    else:
        raise ValueError(part)
    return _rescaled_cosine(x, mu)


def similarity_matrix(f: np.ndarray, model: CostarrModel, part: str = "full") -> np.ndarray:
    """``[N x C]`` similarities of every sample to every class."""
    f = np.asarray(f, dtype=np.float64)
    out = np.empty((f.shape[0], model.n_classes))
    for j in range(model.n_classes):
        out[:, j] = _similarity_to_class(f, model, np.full(f.shape[0], j), part)
    return out


# -- scorers -----------------------------------------------------------------


def _softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def _check(data: LabeledSet, model: CostarrModel | None) -> tuple[np.ndarray, np.ndarray]:
    f = np.asarray(data.features, dtype=np.float64)
    logits = np.asarray(data.logits, dtype=np.float64)
    if model is not None:
        if f.shape[1] != model.dim:
            raise ShapeError(f"features have D={f.shape[1]}, model expects D={model.dim}")
        if logits.shape[1] != model.n_classes:
            raise ShapeError(f"logits have C={logits.shape[1]}, model expects C={model.n_classes}")
    return f, logits


def score_costarr(data: LabeledSet, model: CostarrModel) -> ScoreTable:
    f, logits = _check(data, model)
    m = argmax_lowest(logits)
    lam = gnl(logits[np.arange(len(m)), m], model.gnl)
    sim = _similarity_to_class(f, model, m, "full")
    return ScoreTable("costarr", m, np.asarray(lam * sim, dtype=np.float64))


def _best_similarity(data, model, part, method) -> ScoreTable:
    f, _ = _check(data, model)
    sims = similarity_matrix(f, model, part)
    pred = argmax_lowest(sims)
    return ScoreTable(method, pred, sims[np.arange(len(pred)), pred])


def score_hadamard(data: LabeledSet, model: CostarrModel) -> ScoreTable:
    """Ablation: Hadamard half only, used for both class selection and score."""
    return _best_similarity(data, model, "hadamard", "hadamard")


def score_features(data: LabeledSet, model: CostarrModel) -> ScoreTable:
    """Ablation: feature half only, used for both class selection and score."""
    return _best_similarity(data, model, "features", "features")


def score_nologit(data: LabeledSet, model: CostarrModel) -> ScoreTable:
    """Ablation: full concatenated similarity, no logit factor."""
    return _best_similarity(data, model, "full", "nologit")


def score_cosm(data: LabeledSet, model: CostarrModel) -> ScoreTable:
    """Ablation: COSTARR similarity scaled by the max softmax instead of the GNL logit."""
    f, logits = _check(data, model)
    m = argmax_lowest(logits)
    p = _softmax(logits)[np.arange(len(m)), m]
    return ScoreTable("cosm", m, p * _similarity_to_class(f, model, m, "full"))


def score_maxlogit(data: LabeledSet, model: CostarrModel | None = None) -> ScoreTable:
    _, logits = _check(data, None)
    m = argmax_lowest(logits)
    return ScoreTable("maxlogit", m, logits[np.arange(len(m)), m].copy())


def score_msp(data: LabeledSet, model: CostarrModel | None = None) -> ScoreTable:
    _, logits = _check(data, None)
    m = argmax_lowest(logits)
    return ScoreTable("msp", m, _softmax(logits)[np.arange(len(m)), m])


def score_magnorm(data: LabeledSet, model: CostarrModel | None = None) -> ScoreTable:
    """Max logit divided by the feature L2 norm.

    This is the magnitude normalisation used by PostMax *without* its
    extreme-value (Weibull) calibration stage, so it is only an approximation
    of that baseline.
    """
    f, logits = _check(data, None)
    m = argmax_lowest(logits)
    norm = np.sqrt((f * f).sum(axis=1))
    return ScoreTable("magnorm", m, logits[np.arange(len(m)), m] / np.maximum(norm, EPS))


SCORERS = {
    "costarr": score_costarr,
    "hadamard": score_hadamard,
    "features": score_features,
    "nologit": score_nologit,
    "cosm": score_cosm,
    "maxlogit": score_maxlogit,
    "msp": score_msp,
    "magnorm": score_magnorm,
}


def score(data: LabeledSet, model: CostarrModel | None, method: str, threads: int = 1,
          chunk: int = 1024) -> ScoreTable:
    """Score ``data`` with ``method``, optionally splitting rows across threads.

    Every row is computed independently, so the table is identical for any
    ``threads`` value.
    """
    try:
        fn = SCORERS[method]
    except KeyError:
        raise ValueError(f"unknown method {method!r}; choose from {', '.join(METHODS)}") from None
    if model is None and method not in ("maxlogit", "msp", "magnorm"):
        raise ValueError(f"method {method!r} needs a fitted model")
    n = len(data)
    if threads <= 1 or n <= chunk:
        return fn(data, model)
    parts = [
        LabeledSet(data.features[s : s + chunk], data.logits[s : s + chunk], data.labels[s : s + chunk])
        for s in range(0, n, chunk)
    ]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        tables = list(pool.map(lambda p: fn(p, model), parts))
    return ScoreTable(
        method,
        np.concatenate([t.predicted for t in tables]),
        np.concatenate([t.score for t in tables]),
    )


def export_sorted_hadamard(data: LabeledSet, model: CostarrModel, j: int) -> np.ndarray:
    """Rows of ``F(x) * W_j`` with columns ordered by ascending ``W_j``."""
    if not 0 <= j < model.n_classes:
        raise IndexError(f"class index {j} out of range [0, {model.n_classes})")
    f, _ = _check(data, model)
    w = np.asarray(model.head.weights[j], dtype=np.float64)
    order = np.argsort(w, kind="stable")
    return (f * w)[:, order]
