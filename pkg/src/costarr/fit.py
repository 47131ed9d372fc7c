"""Fitting the per-class means and global logit bounds used by COSTARR."""

from __future__ import annotations

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import FitError, FormatError
from .tensors import ClassifierHead, LabeledSet, read_tensor, write_tensor

log = logging.getLogger(__name__)

MODEL_FILES = ("weights.cst", "bias.cst", "class_means.cst", "gnl.cst", "counts.cst", "fallback.cst")
MANIFEST_NAME = "manifest.txt"


@dataclass(frozen=True)
class GnlBounds:
    """Minimum and maximum logit seen on correctly classified training samples."""

    l_tmin: float
    l_tmax: float

    def __post_init__(self):
        if not self.l_tmax > self.l_tmin:
            raise FitError(f"degenerate logits: l_tmax ({self.l_tmax}) must exceed l_tmin ({self.l_tmin})")


def gnl(l, bounds: GnlBounds):
    """Globalized normalized logit: min-max rescale with training bounds, clamped to [0, 1]."""
    x = (np.asarray(l, dtype=np.float64) - bounds.l_tmin) / (bounds.l_tmax - bounds.l_tmin)
    out = np.clip(x, 0.0, 1.0)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class CostarrModel:
    head: ClassifierHead
    class_means: np.ndarray  # [C x 2D]: mean of Concat(F, F * W_j) over T_j
    gnl: GnlBounds
    counts: np.ndarray  # int64 [C]
    fallback: np.ndarray  # bool [C]

    @property
    def n_classes(self) -> int:
        return self.class_means.shape[0]

    @property
    def dim(self) -> int:
        return self.head.dim

    @property
    def feature_means(self) -> np.ndarray:
        return self.class_means[:, : self.dim]

    @property
    def hadamard_means(self) -> np.ndarray:
        return self.class_means[:, self.dim :]


def argmax_lowest(x: np.ndarray) -> np.ndarray:
    """Row-wise argmax; ``np.argmax`` already returns the first (lowest) index on ties."""
    return np.argmax(x, axis=1).astype(np.int64)


def kahan_mean(rows: np.ndarray) -> np.ndarray:
    """Column means of ``rows`` with compensated float64 summation in row order.

    Uses Neumaier's variant of Kahan summation, which also recovers the low
    bits when an addend is larger than the running total.
    """
    rows = np.asarray(rows, dtype=np.float64)
    total = np.zeros(rows.shape[1])
    comp = np.zeros(rows.shape[1])
    for r in rows:
        t = total + r
        comp += np.where(np.abs(total) >= np.abs(r), (total - t) + r, (r - t) + total)
        total = t
    return (total + comp) / rows.shape[0]


def class_mean(features: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Mean of ``Concat(F, F * w)`` over the rows of ``features``."""
    f = np.asarray(features, dtype=np.float64)
    return kahan_mean(np.concatenate([f, f * np.asarray(w, dtype=np.float64)], axis=1))


def fit_model(train: LabeledSet, head: ClassifierHead, threads: int = 1) -> CostarrModel:
    """Fit COSTARR class means and GNL bounds on a labelled training split.

    Class ``j`` is summarised by the mean of ``Concat(F(x), F(x) * W_j)`` over
    training samples labelled ``j`` whose argmax logit is also ``j``. If a
    class has no correctly classified sample, all of its samples are used and
    the class is flagged in ``fallback``.

    Parameters
    ----------
    train : LabeledSet
        Training split; must contain no unknown (-1) labels.
    head : ClassifierHead
        Final-layer weights and bias that produced ``train.logits``.
    threads : int
        Worker threads for the per-class means. The result does not depend on it.
    """
    head.check_compatible(train)
    labels = train.labels
    if (labels == -1).any():
        raise FitError("training split contains unknown (-1) labels")
    logits = np.asarray(train.logits, dtype=np.float64)
    correct = argmax_lowest(logits) == labels
    if not correct.any():
        raise FitError("no correctly classified training samples; GNL bounds undefined")
    sel = logits[correct]
    bounds = GnlBounds(float(sel.min()), float(sel.max()))

    n_classes = head.n_classes
    members = []
    fallback = np.zeros(n_classes, dtype=bool)
    for j in range(n_classes):
        of_class = labels == j
        if not of_class.any():
            raise FitError(f"class {j} has no training samples")
        rows = np.flatnonzero(of_class & correct)
        if rows.size == 0:
            log.warning("class %d has no correctly classified samples; using all %d", j, of_class.sum())
            rows = np.flatnonzero(of_class)
            fallback[j] = True
        members.append(rows)

    weights = np.asarray(head.weights, dtype=np.float64)

    def one(j):
        return class_mean(train.features[members[j]], weights[j])

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            means = list(pool.map(one, range(n_classes)))
    else:
        means = [one(j) for j in range(n_classes)]

    return CostarrModel(
        head=head,
        class_means=np.vstack(means),
        gnl=bounds,
        counts=np.array([m.size for m in members], dtype=np.int64),
        fallback=fallback,
    )


def save_model(model: CostarrModel, directory: str | os.PathLike) -> None:
    os.makedirs(directory, exist_ok=True)
    j = lambda name: os.path.join(directory, name)  # noqa: E731
    write_tensor(model.head.weights, j("weights.cst"))
    write_tensor(model.head.bias, j("bias.cst"))
    write_tensor(model.class_means, j("class_means.cst"))
    write_tensor(np.array([model.gnl.l_tmin, model.gnl.l_tmax]), j("gnl.cst"))
    write_tensor(model.counts.astype(np.int64), j("counts.cst"))
    write_tensor(model.fallback.astype(np.int64), j("fallback.cst"))
    with open(j(MANIFEST_NAME), "w") as fh:
        fh.write(f"costarr-model v1 C={model.n_classes} D={model.dim}\n")


def load_model(directory: str | os.PathLike) -> CostarrModel:
    j = lambda name: os.path.join(directory, name)  # noqa: E731
    with open(j(MANIFEST_NAME)) as fh:
        line = fh.readline().split()
    if len(line) != 4 or line[:2] != ["costarr-model", "v1"]:
        raise FormatError(f"{directory}: not a costarr-model v1 directory")
    c, d = int(line[2].removeprefix("C=")), int(line[3].removeprefix("D="))
    head = ClassifierHead(read_tensor(j("weights.cst")), read_tensor(j("bias.cst")))
    bounds = read_tensor(j("gnl.cst"))
    model = CostarrModel(
        head=head,
        class_means=read_tensor(j("class_means.cst")),
        gnl=GnlBounds(float(bounds[0]), float(bounds[1])),
        counts=read_tensor(j("counts.cst")),
        fallback=read_tensor(j("fallback.cst")).astype(bool),
    )
    if head.weights.shape != (c, d) or model.class_means.shape != (c, 2 * d):
        raise FormatError(f"{directory}: tensor shapes disagree with manifest C={c} D={d}")
    return model
