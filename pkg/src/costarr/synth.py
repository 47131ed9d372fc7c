"""Deterministic synthetic benchmark with attenuating classifier weights.

Each class owns a small set of *active* feature dimensions with large weights;
every other dimension is attenuated (weight <= 0.05). Known samples fire
strongly on their class's active dimensions and also carry some incidental
"context" activation on dimensions their class attenuates. Unknown samples
imitate a known class at reduced intensity and add a fixed boost on a random
subset of that class's attenuated dimensions.

Few boosted dimensions leave the unknown's logit visibly low; many boosted
dimensions push the logits of *other* classes (for which those dimensions are
active) up to known levels while distorting the feature vector. Logit-only and
feature-only detectors therefore each miss a different part of the unknowns.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .rng import CounterStream
from .tensors import ClassifierHead, LabeledSet

# stream ids; one independent counter stream per purpose
_MASKS, _WEIGHTS_HI, _WEIGHTS_LO = 1, 2, 3
_SPLIT_STREAMS = {"train": 10, "val": 20, "test": 30}

WEIGHT_HIGH = (0.8, 1.2)
WEIGHT_LOW = (0.0, 0.05)
ACTIVE_MEAN = 1.0
INACTIVE_MEAN = 0.1
NOISE_SIGMA = 0.2
UNKNOWN_INTENSITY = 0.8
CONTEXT_MAGNITUDE = (0.5, 3.0)
BOOST_COUNT_FRAC = 0.7  # boosted dims per unknown: uniform in [1, BOOST_COUNT_FRAC * n_active]


@dataclass(frozen=True)
class SynthConfig:
    seed: int = 42
    n_classes: int = 50
    dim: int = 256
    train_per_class: int = 200
    test_known: int = 1000
    test_unknown: int = 1000
    active_frac: float = 0.1
    unknown_boost: float = 3.0

    def __post_init__(self):
        if self.n_classes < 2:
            raise ValueError(f"n_classes must be >= 2, got {self.n_classes}")
        if self.dim < 4:
            raise ValueError(f"dim must be >= 4, got {self.dim}")
        if not 0.0 < self.active_frac < 1.0:
            raise ValueError(f"active_frac must be in (0, 1), got {self.active_frac}")
        if self.active_frac * self.dim < 1:
            raise ValueError("active_frac * dim must be >= 1")
        if not self.unknown_boost > 0:
            raise ValueError(f"unknown_boost must be > 0, got {self.unknown_boost}")
        if self.n_active >= self.dim:
            raise ValueError("active_frac leaves no attenuated dimensions")
        for name in ("train_per_class", "test_known", "test_unknown"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in an unsigned 64-bit integer")

    @property
    def n_active(self) -> int:
        return math.ceil(self.active_frac * self.dim)

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class SynthData:
    train: LabeledSet
    val: LabeledSet
    test: LabeledSet
    head: ClassifierHead
    masks: np.ndarray  # bool [C x D], True on each class's active dims

    def __iter__(self):
        # unpacks as (train, val, test, head)
        return iter((self.train, self.val, self.test, self.head))


def class_masks(cfg: SynthConfig) -> np.ndarray:
    """Active-dimension mask per class.

    Classes are dealt ``n_active`` distinct dims each from a queue of
    concatenated random permutations of ``range(dim)``; a dim already held by
    the current class is skipped. Overlap across classes is allowed, and when
    ``n_classes * n_active >= dim`` every dim is active for at least one class.
    """
    rng = CounterStream(cfg.seed, _MASKS)
    masks = np.zeros((cfg.n_classes, cfg.dim), dtype=bool)
    queue: list[int] = []
    for j in range(cfg.n_classes):
        while masks[j].sum() < cfg.n_active:
            if not queue:
                queue = rng.permutation(cfg.dim).tolist()
            masks[j, queue.pop(0)] = True
    return masks


def make_head(cfg: SynthConfig, masks: np.ndarray) -> ClassifierHead:
    hi = CounterStream(cfg.seed, _WEIGHTS_HI).uniform(masks.shape, *WEIGHT_HIGH)
    lo = CounterStream(cfg.seed, _WEIGHTS_LO).uniform(masks.shape, *WEIGHT_LOW)
    return ClassifierHead(np.where(masks, hi, lo), np.zeros(cfg.n_classes))


def _pick_attenuated(rng: CounterStream, masks: np.ndarray, classes: np.ndarray,
                     counts: np.ndarray) -> np.ndarray:
    """Per row, a random subset of ``counts[i]`` dims attenuated for ``classes[i]``."""
    n, dim = len(classes), masks.shape[1]
    keys = rng.uniform((n, dim))
    picked = np.zeros((n, dim), dtype=bool)
    for i in range(n):
        attenuated = np.flatnonzero(~masks[classes[i]])
        order = attenuated[np.argsort(keys[i, attenuated], kind="stable")]
        picked[i, order[: counts[i]]] = True
    return picked


def known_features(rng: CounterStream, masks: np.ndarray, classes: np.ndarray) -> np.ndarray:
    """Features for known samples of the given classes.

    Active dims ~ N(1.0, 0.2), attenuated dims ~ N(0.1, 0.2), truncated at 0.
    On top of that, a uniform number in ``[0, n_active]`` of attenuated dims
    get context activation drawn from ``CONTEXT_MAGNITUDE``.
    """
    n, dim = len(classes), masks.shape[1]
    n_active = int(masks[0].sum())
    mean = np.where(masks[classes], ACTIVE_MEAN, INACTIVE_MEAN)
    f = np.maximum(rng.normal(mean.shape) * NOISE_SIGMA + mean, 0.0)
    counts = rng.integers((n,), n_active + 1)
    context = _pick_attenuated(rng, masks, classes, counts)
    return f + context * rng.uniform((n, dim), *CONTEXT_MAGNITUDE)


def unknown_features(rng: CounterStream, masks: np.ndarray, n: int, boost: float):
    """Features for unknown samples.

    Each unknown picks a source class, draws a known-like sample of it, scales
    it by ``UNKNOWN_INTENSITY`` and adds ``boost`` to a random subset of the
    source class's attenuated dimensions. The subset size is uniform in
    ``[1, max(1, floor(BOOST_COUNT_FRAC * n_active))]``.

    Returns
    -------
    features : ndarray [n x D]
    source : ndarray [n] int64, the imitated class
    base : ndarray [n x D], the scaled sample before the boost
    boosted : ndarray [n x D] bool, where the boost was added
    """
    n_active = int(masks[0].sum())
    source = rng.integers((n,), masks.shape[0])
    base = UNKNOWN_INTENSITY * known_features(rng, masks, source)
    max_count = max(1, int(BOOST_COUNT_FRAC * n_active))
    counts = 1 + rng.integers((n,), max_count)
    boosted = _pick_attenuated(rng, masks, source, counts)
    return base + boost * boosted, source, base, boosted


def _split(cfg, masks, head, name, n_known_per_class=None, n_known=0, n_unknown=0) -> LabeledSet:
    rng = CounterStream(cfg.seed, _SPLIT_STREAMS[name])
    if n_known_per_class is not None:
        classes = np.repeat(np.arange(cfg.n_classes), n_known_per_class)
    else:
        classes = np.arange(n_known) % cfg.n_classes
    feats = [known_features(rng, masks, classes)]
    labels = [classes.astype(np.int64)]
    if n_unknown:
        unk = unknown_features(CounterStream(cfg.seed, _SPLIT_STREAMS[name] + 1), masks, n_unknown,
                               cfg.unknown_boost)[0]
        feats.append(unk)
        labels.append(np.full(n_unknown, -1, dtype=np.int64))
    f = np.concatenate(feats)
    return LabeledSet(f, head.logits(f), np.concatenate(labels))


def generate(cfg: SynthConfig | None = None) -> SynthData:
    """Build train / val / test splits and the classifier head for ``cfg``.

    The validation split has the same known / unknown sizes as the test split
    but is drawn from separate streams, so its unknowns act as a surrogate set.
    """
    cfg = cfg or SynthConfig()
    masks = class_masks(cfg)
    head = make_head(cfg, masks)
    train = _split(cfg, masks, head, "train", n_known_per_class=cfg.train_per_class)
    val = _split(cfg, masks, head, "val", n_known=cfg.test_known, n_unknown=cfg.test_unknown)
    test = _split(cfg, masks, head, "test", n_known=cfg.test_known, n_unknown=cfg.test_unknown)
    return SynthData(train, val, test, head, masks)
