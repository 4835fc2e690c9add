import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from gaborhmm.classifier import classify, dist, fit, score_table
from gaborhmm.errors import DataError
from gaborhmm.hmm import PathVector


def test_fit_single_path_mean_is_the_path():
    state = fit({"a": [np.array([3.0, 1.0, 2.0])]})
    np.testing.assert_array_equal(state.classes[0].mean_path, [3.0, 1.0, 2.0])
    assert state.classes[0].n_train == 1


def test_fit_identical_paths_floor_the_variance():
    p = np.array([1.0, 2.0, 3.0])
    state = fit({"a": [p, p.copy()]}, var_floor=1e-6)
    np.testing.assert_array_equal(state.pooled_var, np.full(3, 1e-6))


def test_fit_mean_of_two_paths():
    state = fit({"a": [np.array([0.0, 0.0, 1.0]), np.array([0.0, 2.0, 1.0])]})
    np.testing.assert_array_equal(state.classes[0].mean_path, [0.0, 1.0, 1.0])


def test_fit_accepts_path_vectors_and_sorts_classes():
    paths = {
        "zeta": [PathVector(states=np.array([0, 1, 2]))],
        "alpha": [PathVector(states=np.array([2, 1, 0]))],
    }
    state = fit(paths)
    assert state.class_ids() == ["alpha", "zeta"]


def test_fit_validation():
    with pytest.raises(DataError):
        fit({})
    with pytest.raises(DataError):
        fit({"a": []})
    with pytest.raises(DataError):
        fit({"a": [np.zeros(3)], "b": [np.zeros(4)]})
    with pytest.raises(ValueError):
        fit({"a": [np.zeros(3)]}, measure="hamming")


def test_dist_self_distances():
    x = np.array([1.0, -2.0, 0.5])
    assert dist(x, x, "l2") == 0.0
    assert dist(x, x, "l1") == 0.0
    assert dist(x, x, "mahalanobis", pooled_var=np.ones(3)) == 0.0
    assert dist(x, x, "cosine") == pytest.approx(-1.0, rel=1e-15)


def test_dist_orthogonal_unit_vectors():
    x = np.array([1.0, 0.0])
    y = np.array([0.0, 1.0])
    assert dist(x, y, "l2") == 2.0
    assert dist(x, y, "l1") == 2.0
    assert dist(x, y, "cosine") == 0.0


def test_dist_mahalanobis_unit_variance_equals_l2_exactly():
    rng = np.random.default_rng(5)
    for _ in range(50):
        x = rng.normal(size=8)
        y = rng.normal(size=8)
        assert dist(x, y, "mahalanobis", pooled_var=np.ones(8)) == dist(x, y, "l2")


def test_dist_validation():
    with pytest.raises(ValueError):
        dist(np.zeros(3), np.zeros(4), "l2")
    with pytest.raises(ValueError):
        dist(np.zeros(3), np.ones(3), "cosine")
    with pytest.raises(ValueError):
        dist(np.zeros(3), np.ones(3), "mahalanobis")
    with pytest.raises(ValueError):
        dist(np.ones(3), np.ones(3), "mahalanobis", pooled_var=np.ones(4))
    with pytest.raises(ValueError):
        dist(np.ones(3), np.ones(3), "chebyshev")


def test_classify_reference_scores():
    state = fit({
        "one": [np.array([0.0, 0.0])],
        "two": [np.array([10.0, 10.0])],
    }, measure="l2")
    predicted, scores = classify(np.array([1.0, 1.0]), state)
    assert predicted == "one"
    np.testing.assert_array_equal(scores, [2.0, 162.0])


def test_classify_self_means_every_measure():
    rng = np.random.default_rng(11)
    means = rng.normal(size=(6, 10)) * 4.0
    for measure in ("l1", "l2", "mahalanobis", "cosine"):
        state = fit(
            {f"c{i}": [means[i]] for i in range(6)}, measure=measure
        )
        for i in range(6):
            predicted, _ = classify(means[i], state)
            assert predicted == f"c{i}"


def test_classify_cosine_scale_invariance():
    rng = np.random.default_rng(13)
    means = rng.normal(size=(5, 12))
    state = fit({f"c{i}": [means[i]] for i in range(5)}, measure="cosine")
    for _ in range(100):
        query = rng.normal(size=12)
        c = float(rng.uniform(0.01, 100.0))
        assert classify(query, state)[0] == classify(c * query, state)[0]


def test_classify_tie_goes_to_first_sorted_class():
    mean = np.array([1.0, 2.0])
    state = fit({"b": [mean], "a": [mean.copy()]}, measure="l2")
    predicted, scores = classify(np.array([4.0, 4.0]), state)
    assert predicted == "a"
    assert scores[0] == scores[1]


def test_full_covariance_matches_direct_solve():
    rng = np.random.default_rng(17)
    paths = {f"c{i}": [rng.normal(size=6) + i for _ in range(4)] for i in range(3)}
    state = fit(paths, measure="mahalanobis", covariance="full", ridge=1e-6)
    assert state.cov_chol is not None
    residuals = []
    for cid, vectors in sorted(paths.items()):
        stack = np.stack([np.asarray(v, float) for v in vectors])
        residuals.append(stack - stack.mean(axis=0))
    spread = np.concatenate(residuals)
    cov = spread.T @ spread / spread.shape[0] + 1e-6 * np.eye(6)
    query = rng.normal(size=6)
    scores = score_table(state, query)
    for k, model in enumerate(state.classes):
        d = query - model.mean_path
        expected = d @ np.linalg.solve(cov, d)
        assert scores[k] == pytest.approx(expected, rel=1e-9)


@settings(max_examples=100, deadline=None)
@given(
    vecs=hnp.arrays(
        np.float64, (2, 6),
        elements=st.floats(min_value=-100, max_value=100,
                           allow_nan=False, allow_infinity=False),
    ),
)
def test_dist_symmetry_and_nonnegativity(vecs):
    x, y = vecs[0], vecs[1]
    for measure in ("l1", "l2"):
        assert dist(x, y, measure) == dist(y, x, measure)
        assert dist(x, y, measure) >= 0.0
    pooled = np.full(6, 2.5)
    assert dist(x, y, "mahalanobis", pooled_var=pooled) == \
        dist(y, x, "mahalanobis", pooled_var=pooled)
    if np.linalg.norm(x) > 0 and np.linalg.norm(y) > 0:
        assert dist(x, y, "cosine") == pytest.approx(dist(y, x, "cosine"), rel=1e-12)
        assert -1.0 - 1e-12 <= dist(x, y, "cosine") <= 1.0 + 1e-12
