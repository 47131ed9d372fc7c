import numpy as np
import pytest

from costarr.fit import fit_model
from costarr.tensors import ClassifierHead, LabeledSet


def random_problem(rng, n_classes=5, dim=8, n=50, bias=True):
    """Random head and a training split whose labels agree with the argmax logit for most rows."""
    w = rng.normal(size=(n_classes, dim))
    b = rng.normal(size=n_classes) if bias else np.zeros(n_classes)
    head = ClassifierHead(w, b)
    f = rng.normal(size=(n, dim))
    logits = head.logits(f)
    labels = np.argmax(logits, axis=1)
    flip = rng.random(n) < 0.2
    labels[flip] = rng.integers(0, n_classes, flip.sum())
    labels[:n_classes] = np.arange(n_classes)  # every class present
    return LabeledSet(f, logits, labels.astype(np.int64)), head


@pytest.fixture
def rng():
    return np.random.default_rng(20250101)


@pytest.fixture
def fitted(rng):
    train, head = random_problem(rng)
    return fit_model(train, head), train, head
