import math

import numpy as np
import pytest

from costarr.errors import ShapeError
from costarr.fit import CostarrModel, GnlBounds, fit_model
from costarr.score import (
    BOUNDED,
    EPS,
    LOGIT_ARGMAX,
    METHODS,
    costarr_similarity,
    export_sorted_hadamard,
    read_score_csv,
    score,
    score_cosm,
    score_costarr,
    score_features,
    score_hadamard,
    score_magnorm,
    score_maxlogit,
    score_msp,
    score_nologit,
)
from costarr.tensors import ClassifierHead, LabeledSet

from conftest import random_problem


def make_model(weights, class_means, bounds=(0.0, 1.0)):
    w = np.asarray(weights, dtype=float)
    return CostarrModel(
        head=ClassifierHead(w, np.zeros(w.shape[0])),
        class_means=np.asarray(class_means, dtype=float),
        gnl=GnlBounds(*bounds),
        counts=np.ones(w.shape[0], dtype=np.int64),
        fallback=np.zeros(w.shape[0], dtype=bool),
    )


def dataset(features, logits, labels=None):
    f = np.asarray(features, dtype=float)
    lg = np.asarray(logits, dtype=float)
    lab = np.full(len(f), -1) if labels is None else np.asarray(labels)
    return LabeledSet(f, lg, lab.astype(np.int64))


# -- oracles -------------------------------------------------------------------


def py_cos01(u, v):
    """0.5 * (1 + cos) with plain Python arithmetic."""
    dot = sum(a * b for a, b in zip(u, v))
    nu = math.sqrt(sum(a * a for a in u))
    nv = math.sqrt(sum(b * b for b in v))
    if nu < EPS or nv < EPS:
        return 0.5
    return 0.5 * (1.0 + max(-1.0, min(1.0, dot / (nu * nv))))


def py_parts(f, w, mean, part):
    d = len(f)
    h = [a * b for a, b in zip(f, w)]
    if part == "features":
        return f, mean[:d]
    if part == "hadamard":
        return h, mean[d:]
    return f + h, mean


def py_argmax(xs):
    best = 0
    for j, v in enumerate(xs):
        if v > xs[best]:
            best = j
    return best


def py_softmax_max(lg):
    m = max(lg)
    e = [math.exp(v - m) for v in lg]
    return max(e) / sum(e)


# -- costarr_similarity ------------------------------------------------------------


@pytest.fixture
def tiny():
    w = [[1.0, 0.5, 2.0], [0.2, 1.0, 0.0]]
    f = np.array([1.0, 2.0, 3.0])
    mu0 = np.concatenate([f, f * w[0]])
    return f, w, mu0


def test_similarity_identical(tiny):
    f, w, mu0 = tiny
    model = make_model(w, [mu0, np.ones(6)])
    assert costarr_similarity(f, model, 0) == 1.0


def test_similarity_antiparallel(tiny):
    f, w, mu0 = tiny
    model = make_model(w, [-mu0, np.ones(6)])
    assert costarr_similarity(f, model, 0) == 0.0


def test_similarity_orthogonal():
    # C_0(x) = [1, 0, 0, 0]; mean orthogonal to it
    model = make_model([[0.0, 1.0]], [[0.0, 1.0, 0.0, 1.0]])
    assert costarr_similarity(np.array([1.0, 0.0]), model, 0) == 0.5


def test_similarity_zero_vector_is_neutral():
    model = make_model([[1.0, 1.0]], [[1.0, 2.0, 1.0, 2.0]])
    assert costarr_similarity(np.zeros(2), model, 0) == 0.5
    zero_mean = make_model([[1.0, 1.0]], [[0.0, 0.0, 0.0, 0.0]])
    assert costarr_similarity(np.ones(2), zero_mean, 0) == 0.5


def test_similarity_random_vs_oracle(rng):
    for _ in range(50):
        w = rng.normal(size=(3, 8))
        means = rng.normal(size=(3, 16))
        model = make_model(w, means)
        f = rng.normal(size=8)
        for j in range(3):
            expected = py_cos01(*py_parts(f.tolist(), w[j].tolist(), means[j].tolist(), "full"))
            assert abs(costarr_similarity(f, model, j) - expected) <= 1e-12


@pytest.mark.parametrize("alpha", [1e-3, 1.0, 1e3])
def test_similarity_scale_invariant(rng, alpha):
    w = rng.normal(size=(4, 16))
    model = make_model(w, rng.normal(size=(4, 32)))
    for _ in range(20):
        f = rng.normal(size=16)
        for j in range(4):
            assert abs(costarr_similarity(alpha * f, model, j) - costarr_similarity(f, model, j)) <= 1e-12


def test_similarity_argument_checks(tiny):
    f, w, mu0 = tiny
    model = make_model(w, [mu0, mu0])
    with pytest.raises(ShapeError):
        costarr_similarity(f[:2], model, 0)
    with pytest.raises(IndexError):
        costarr_similarity(f, model, 2)


# -- costarr score -------------------------------------------------------------------


def test_score_both_factors_one(tiny):
    f, w, mu0 = tiny
    model = make_model(w, [mu0, np.ones(6)], bounds=(0.0, 5.0))
    t = score_costarr(dataset([f], [[5.0, 1.0]]), model)
    assert t.predicted.tolist() == [0]
    assert t.score.tolist() == [1.0]


def test_score_zero_at_or_below_lower_bound(tiny):
    f, w, mu0 = tiny
    model = make_model(w, [mu0, np.ones(6)], bounds=(2.0, 5.0))
    t = score_costarr(dataset([f, f], [[2.0, 1.0], [-3.0, -4.0]]), model)
    assert t.score.tolist() == [0.0, 0.0]


def test_score_hand_system():
    """2 classes, D=2, W = I, b = 0, one training sample per class.

    Training: class 0 F=[2,1] (logits [2,1]); class 1 F=[1,3] (logits [1,3]).
    Bounds over all logits of both samples: l_tmin = 1, l_tmax = 3.
    Means: mu_0 = [2,1,2,0], mu_1 = [1,3,0,3].

    x=[3,1]:   m=0, gnl(3)=1,   C_0=[3,1,3,0], dot=13, |C|=sqrt(19), |mu|=3
    x=[1,2]:   m=1, gnl(2)=0.5, C_1=[1,2,0,2], dot=13, |C|=3, |mu|=sqrt(19)
    x=[.5,.2]: m=0, gnl(.5)=0
    """
    head = ClassifierHead(np.eye(2), np.zeros(2))
    tf = np.array([[2.0, 1.0], [1.0, 3.0]])
    model = fit_model(LabeledSet(tf, head.logits(tf), np.array([0, 1])), head)
    assert (model.gnl.l_tmin, model.gnl.l_tmax) == (1.0, 3.0)
    assert model.class_means.tolist() == [[2, 1, 2, 0], [1, 3, 0, 3]]

    x = np.array([[3.0, 1.0], [1.0, 2.0], [0.5, 0.2]])
    t = score_costarr(dataset(x, head.logits(x)), model)
    sim = 0.5 * (1 + 13 / (3 * math.sqrt(19)))
    assert t.predicted.tolist() == [0, 1, 0]
    np.testing.assert_allclose(t.score, [1.0 * sim, 0.5 * sim, 0.0], rtol=0, atol=1e-12)


def test_score_costarr_random_vs_oracle(fitted, rng):
    model, _, head = fitted
    f = rng.normal(size=(40, model.dim))
    data = dataset(f, head.logits(f))
    t = score_costarr(data, model)
    lo, hi = model.gnl.l_tmin, model.gnl.l_tmax
    for i in range(40):
        lg = data.logits[i].tolist()
        m = py_argmax(lg)
        lam = max(0.0, min(1.0, (lg[m] - lo) / (hi - lo)))
        sim = py_cos01(*py_parts(f[i].tolist(), head.weights[m].tolist(), model.class_means[m].tolist(), "full"))
        assert t.predicted[i] == m
        assert abs(t.score[i] - lam * sim) <= 1e-12


def test_dimension_mismatch(fitted):
    model, _, _ = fitted
    with pytest.raises(ShapeError):
        score_costarr(dataset(np.zeros((2, model.dim + 1)), np.zeros((2, model.n_classes))), model)
    with pytest.raises(ShapeError):
        score_costarr(dataset(np.zeros((2, model.dim)), np.zeros((2, model.n_classes + 1))), model)


# -- similarity-only ablations ---------------------------------------------------------

ABLATIONS = {"hadamard": score_hadamard, "features": score_features, "nologit": score_nologit}


def _ablation_model(part, f, w):
    """Class 1's mean matches the sample's ``part``; class 0's is antiparallel to it."""
    f = np.asarray(f, dtype=float)
    w = np.asarray(w, dtype=float)
    d = len(f)
    means = []
    for j, sign in ((0, -1.0), (1, 1.0)):
        feat, had = sign * f, sign * f * w[j]
        if part == "features":
            had = np.ones(d)
        elif part == "hadamard":
            feat = np.ones(d)
        means.append(np.concatenate([feat, had]))
    return make_model(w, means)


@pytest.mark.parametrize("part", list(ABLATIONS))
def test_ablation_exact_match(part):
    f, w = [1.0, 2.0], [[1.0, 0.5], [2.0, 0.25]]
    model = _ablation_model(part, f, w)
    t = ABLATIONS[part](dataset([f], [[9.0, 0.0]]), model)
    assert t.predicted.tolist() == [1]
    assert t.score.tolist() == [1.0]


@pytest.mark.parametrize("part", list(ABLATIONS))
def test_ablation_tie_goes_to_class_zero(part):
    w = [[1.0, 0.5], [1.0, 0.5]]
    mean = [0.3, 0.7, 0.3, 0.35]
    model = make_model(w, [mean, mean])
    t = ABLATIONS[part](dataset([[1.0, 2.0]], [[0.0, 5.0]]), model)
    assert t.predicted.tolist() == [0]


@pytest.mark.parametrize("part", list(ABLATIONS))
def test_ablation_random_vs_oracle(part, fitted, rng):
    model, _, head = fitted
    f = rng.normal(size=(30, model.dim))
    t = ABLATIONS[part](dataset(f, head.logits(f)), model)
    for i in range(30):
        sims = [py_cos01(*py_parts(f[i].tolist(), head.weights[j].tolist(), model.class_means[j].tolist(), part))
                for j in range(model.n_classes)]
        m = py_argmax(sims)
        assert t.predicted[i] == m
        assert abs(t.score[i] - sims[m]) <= 1e-12


# -- softmax / logit baselines -----------------------------------------------------------------


def test_cosm_uniform_logits(rng):
    w = rng.normal(size=(4, 3))
    model = make_model(w, rng.normal(size=(4, 6)))
    f = np.array([0.3, -1.0, 2.0])
    t = score_cosm(dataset([f], [[1.5] * 4]), model)
    assert t.predicted.tolist() == [0]
    assert t.score[0] == 0.25 * costarr_similarity(f, model, 0)


def test_cosm_saturated_softmax(tiny):
    f, w, mu0 = tiny
    model = make_model(w, [mu0, np.ones(6)])
    t = score_cosm(dataset([f], [[100.0, 0.0]]), model)
    assert abs(t.score[0] - 1.0) <= 1e-9


def test_cosm_random_vs_oracle(fitted, rng):
    model, _, head = fitted
    f = rng.normal(size=(30, model.dim))
    data = dataset(f, head.logits(f))
    t = score_cosm(data, model)
    for i in range(30):
        lg = data.logits[i].tolist()
        m = py_argmax(lg)
        expected = py_softmax_max(lg) * py_cos01(
            *py_parts(f[i].tolist(), head.weights[m].tolist(), model.class_means[m].tolist(), "full"))
        assert abs(t.score[i] - expected) <= 1e-12


def test_maxlogit_examples():
    t = score_maxlogit(dataset([[0.0]] * 2, [[1.0, 3.0, 2.0], [5.0, 5.0, 1.0]]))
    assert t.predicted.tolist() == [1, 0]
    assert t.score.tolist() == [3.0, 5.0]


def test_msp_examples():
    t = score_msp(dataset([[0.0]] * 2, [[2.0] * 5, [200.0, 0.0, 0.0, 0.0, 0.0]]))
    assert t.score[0] == pytest.approx(0.2, abs=1e-15)
    assert abs(t.score[1] - 1.0) <= 1e-12


def test_magnorm_examples():
    t = score_magnorm(dataset([[0.0, 2.0], [0.0, 0.0]], [[6.0, 1.0], [6.0, 1.0]]))
    assert t.score[0] == 3.0
    assert t.score[1] == 6.0 / EPS


def test_logit_baselines_random_vs_oracle(rng):
    f = rng.normal(size=(40, 6))
    lg = rng.normal(scale=4, size=(40, 7))
    data = dataset(f, lg)
    ml, sm, mg = score_maxlogit(data), score_msp(data), score_magnorm(data)
    for i in range(40):
        row = lg[i].tolist()
        m = py_argmax(row)
        assert ml.predicted[i] == sm.predicted[i] == mg.predicted[i] == m
        assert ml.score[i] == row[m]
        assert abs(sm.score[i] - py_softmax_max(row)) <= 1e-12
        norm = math.sqrt(sum(v * v for v in f[i].tolist()))
        assert abs(mg.score[i] - row[m] / norm) <= 1e-12 * abs(row[m] / norm)


# -- table-level properties -------------------------------------------------------------------


def test_argmax_consistency_and_ranges(fitted, rng):
    model, _, head = fitted
    f = rng.normal(scale=3, size=(500, model.dim))
    data = dataset(f, head.logits(f))
    tables = {m: score(data, model, m) for m in METHODS}
    ref = tables["maxlogit"].predicted
    for m in LOGIT_ARGMAX:
        np.testing.assert_array_equal(tables[m].predicted, ref)
    for m in BOUNDED:
        s = tables[m].score
        assert s.dtype == np.float64
        assert s.min() >= 0.0 and s.max() <= 1.0


def test_float32_inputs_give_float64_scores(fitted, rng):
    model, _, head = fitted
    f = rng.normal(size=(10, model.dim)).astype(np.float32)
    data = dataset(f, head.logits(f).astype(np.float32))
    for m in METHODS:
        assert score(data, model, m).score.dtype == np.float64


def test_threaded_scoring_is_identical(fitted, rng):
    model, _, head = fitted
    f = rng.normal(size=(2500, model.dim))
    data = dataset(f, head.logits(f))
    for m in METHODS:
        a = score(data, model, m, threads=1)
        b = score(data, model, m, threads=8, chunk=300)
        assert a.score.tobytes() == b.score.tobytes()
        assert a.predicted.tobytes() == b.predicted.tobytes()


def test_unknown_method(fitted):
    model, train, _ = fitted
    with pytest.raises(ValueError):
        score(train, model, "scale")


def test_csv_round_trip(fitted, rng, tmp_path):
    model, _, head = fitted
    f = rng.normal(size=(25, model.dim))
    t = score(dataset(f, head.logits(f)), model, "costarr")
    path = tmp_path / "s.csv"
    t.write_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "sample_id,predicted,score"
    assert lines[3].startswith("2,")
    back = read_score_csv(path)
    assert back.score.tobytes() == t.score.tobytes()
    assert back.predicted.tolist() == t.predicted.tolist()


# -- sorted Hadamard export --------------------------------------------------------------------


def test_sorted_hadamard_identity_and_reverse():
    f = np.array([[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]])
    asc = make_model([[0.1, 0.2, 0.3], [0.3, 0.2, 0.1]], np.zeros((2, 6)))
    data = dataset(f, np.zeros((2, 2)))
    np.testing.assert_array_equal(export_sorted_hadamard(data, asc, 0), f * [0.1, 0.2, 0.3])
    np.testing.assert_array_equal(export_sorted_hadamard(data, asc, 1), (f * [0.3, 0.2, 0.1])[:, ::-1])


def test_sorted_hadamard_random(rng):
    w = rng.normal(size=(3, 12))
    model = make_model(w, np.zeros((3, 24)))
    f = rng.normal(size=(5, 12))
    out = export_sorted_hadamard(dataset(f, np.zeros((5, 3))), model, 2)
    order = sorted(range(12), key=lambda k: w[2, k])
    expected = np.array([[f[i, k] * w[2, k] for k in order] for i in range(5)])
    np.testing.assert_array_equal(out, expected)
    assert np.all(np.diff(w[2, order]) >= 0)
