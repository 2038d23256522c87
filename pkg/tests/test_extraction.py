import json

import numpy as np
import pytest

from mifx.data import DataError, Dataset
from mifx.extraction import (ExtractionConfig, ProjectionMatrix, Scorer, extract, objective, project,
                             redundancy_penalty, relevance)
from mifx.ga import GaConfig, ga_optimize
from mifx.infotheory import HistogramConfig, entropy_binned, mi_cc, mi_cd
from conftest import two_gaussians
from oracles import matmul


@pytest.fixture
def sign_task():
    """Labels are the sign of x1; the other three coordinates are noise.

    Coordinates are uniform on [-1, 1] so the sign boundary falls on (or within
    a sliver of) a bin edge; a Gaussian x1 would put a mixed bin over zero.
    """
    rng = np.random.default_rng(0)
    X = rng.uniform(-1, 1, (2000, 4))
    y = (X[:, 0] > 0).astype(int)
    return Dataset.from_arrays(X, y)


class TestProject:
    def test_basis_vector_picks_column(self, small_blobs):
        W = ProjectionMatrix(np.eye(4)[[2]])
        np.testing.assert_array_equal(project(W, small_blobs).features[:, 0], small_blobs.features[:, 2])

    def test_identity(self, small_blobs):
        out = project(ProjectionMatrix(np.eye(4)), small_blobs)
        np.testing.assert_array_equal(out.features, small_blobs.features)
        np.testing.assert_array_equal(out.labels, small_blobs.labels)

    def test_brute_force_product(self):
        X = [[1.0, 2.0], [-3.0, 0.5], [4.0, -1.0]]
        V = np.array([[0.6, 0.8], [1 / np.sqrt(2), -1 / np.sqrt(2)]])
        out = project(ProjectionMatrix(V), Dataset(X, [0, 1, 0], 2)).features
        expected = matmul(X, V.T.tolist())
        np.testing.assert_allclose(out, expected, rtol=0, atol=1e-15)
        np.testing.assert_allclose(np.linalg.norm(out, axis=0),
                                   [sum(r[k] ** 2 for r in expected) ** 0.5 for k in range(2)], atol=1e-14)

    def test_dimension_mismatch(self, small_blobs):
        with pytest.raises(DataError):
            project(ProjectionMatrix(np.eye(3)[:1]), small_blobs)

    def test_rejects_non_unit_vectors(self):
        with pytest.raises(ValueError):
            ProjectionMatrix([[1.0, 1.0]])


class TestRelevance:
    def test_informative_direction(self, sign_task):
        assert relevance(np.eye(4)[0], sign_task) >= 0.95

    def test_uninformative_direction(self, sign_task):
        w = np.array([0.0, 1.0, -1.0, 0.5])
        assert relevance(w, sign_task) <= 0.05

    def test_scale_invariance(self, sign_task):
        w = np.array([0.3, -0.2, 0.9, 0.1])
        assert relevance(2 * w, sign_task) == relevance(w, sign_task)

    def test_matches_mi_cd(self, sign_task):
        w = np.array([0.5, 0.5, -0.5, 0.5])
        assert relevance(w, sign_task) == mi_cd(sign_task.features @ w, sign_task.labels)

    def test_zero_vector(self, sign_task):
        with pytest.raises(ValueError):
            relevance(np.zeros(4), sign_task)


class TestPenalty:
    def test_empty_previous(self, sign_task):
        assert redundancy_penalty(np.eye(4)[1], [], sign_task) == 0.0

    def test_self_cancellation(self, sign_task):
        w = np.array([0.8, 0.6, 0.0, 0.0])
        y = sign_task.features @ w
        assert mi_cc(y, y) == entropy_binned(y)
        assert redundancy_penalty(w, [w], sign_task) == mi_cd(y, sign_task.labels)

    def test_independent_coordinates(self):
        rng = np.random.default_rng(1)
        X = rng.standard_normal((50_000, 3))
        ds = Dataset.from_arrays(X, (X[:, 0] + X[:, 1] > 0).astype(int))
        assert redundancy_penalty(np.eye(3)[0], [np.eye(3)[1]], ds) <= 0.05

    def test_formula(self, sign_task):
        w = np.array([0.2, 0.9, 0.1, -0.3])
        prev = [np.eye(4)[0], np.array([0.6, 0.0, 0.8, 0.0])]
        X, c = sign_task.features, sign_task.labels
        y = X @ w
        expected = 0.0
        for s in prev:
            ys = X @ s
            expected += mi_cc(y, ys) * mi_cd(ys, c) / entropy_binned(ys)
        assert redundancy_penalty(w, prev, sign_task) == pytest.approx(expected, rel=1e-12)

    def test_constant_previous_feature_contributes_nothing(self):
        rng = np.random.default_rng(2)
        X = rng.standard_normal((200, 3))
        X[:, 2] = 1.5
        ds = Dataset.from_arrays(X, (X[:, 0] > 0).astype(int))
        assert redundancy_penalty(np.eye(3)[0], [np.eye(3)[2]], ds) == 0.0

    def test_nonnegative(self, sign_task):
        rng = np.random.default_rng(3)
        prev = rng.standard_normal((3, 4))
        for w in rng.standard_normal((20, 4)):
            assert redundancy_penalty(w, prev, sign_task) >= 0


class TestObjective:
    def test_reduces_to_relevance(self, sign_task):
        w = np.array([0.4, 0.1, 0.2, 0.3])
        assert objective(w, [], sign_task) == relevance(w, sign_task)

    def test_duplicate_cancels(self, sign_task):
        w = np.eye(4)[0]
        assert objective(w, [w], sign_task) == 0.0

    def test_order_invariant(self, sign_task):
        rng = np.random.default_rng(4)
        prev = rng.standard_normal((4, 4))
        w = rng.standard_normal(4)
        base = objective(w, prev, sign_task)
        for perm in ([3, 2, 1, 0], [1, 3, 0, 2]):
            assert objective(w, prev[perm], sign_task) == base

    def test_scorer_batch_matches_single(self, sign_task):
        rng = np.random.default_rng(5)
        W = rng.standard_normal((7, 4))
        prev = rng.standard_normal((2, 4))
        scorer = Scorer(sign_task, prev)
        batch = scorer.score(W)
        for i, w in enumerate(W):
            single = scorer.score(w[None])
            for a, b in zip(batch, single):
                assert a[i] == b[0]


class TestExtract:
    def test_first_component_on_gaussian_task(self):
        ds = two_gaussians(0, n=1000, d=6)
        W = extract(ds, ExtractionConfig(t=1, ga=GaConfig(population=30, generations=30, restarts=1)), seed=0)
        assert abs(W.vectors[0, 0]) >= 0.9

    def test_t1_is_single_ga_run(self, sign_task, fast_ga):
        from mifx.extraction import component_seed
        cfg = ExtractionConfig(t=1, ga=fast_ga)
        W = extract(sign_task, cfg, seed=3)
        res = ga_optimize(lambda P: np.array([relevance(p, sign_task) for p in P]), 4, fast_ga,
                          component_seed(3, 0), batch=True)
        np.testing.assert_array_equal(W.vectors[0], res.vector)

    def test_diagnostics_and_bookkeeping(self, sign_task, fast_ga):
        W = extract(sign_task, ExtractionConfig(t=3, ga=fast_ga), seed=1)
        assert W.t == 3 and W.method == "mifx"
        np.testing.assert_allclose(np.linalg.norm(W.vectors, axis=1), 1.0, atol=1e-9)
        for i, diag in enumerate(W.diagnostics):
            prev = W.vectors[:i]
            assert diag["objective"] == objective(W.vectors[i], prev, sign_task)
            assert diag["relevance"] == relevance(W.vectors[i], sign_task)
            assert diag["objective"] >= diag["ga_initial_best"]
            assert diag["relevance"] <= W.diagnostics[0]["relevance"] + 0.05
        assert W.diagnostics[0]["penalty"] == 0.0

    def test_deterministic(self, sign_task, fast_ga):
        cfg = ExtractionConfig(t=2, ga=fast_ga)
        a, b = extract(sign_task, cfg, seed=5), extract(sign_task, cfg, seed=5)
        assert np.array_equal(a.vectors, b.vectors)

    def test_errors(self, sign_task):
        with pytest.raises(DataError):
            extract(sign_task, ExtractionConfig(t=5))
        one_class = Dataset(sign_task.features, np.zeros(sign_task.n, dtype=int), 1)
        with pytest.raises(DataError):
            extract(one_class, ExtractionConfig(t=1))


def test_model_json_round_trip(tmp_path, sign_task, fast_ga):
    W = extract(sign_task, ExtractionConfig(t=2, hist=HistogramConfig(n_bins=16), ga=fast_ga), seed=2)
    p = tmp_path / "model.json"
    W.save(p)
    doc = json.loads(p.read_text())
    assert set(doc) == {"d", "t", "method", "vectors", "hist", "seed", "diagnostics"}
    assert doc["t"] == 2 and doc["d"] == 4 and doc["seed"] == 2 and doc["hist"]["n_bins"] == 16
    assert set(doc["diagnostics"][0]) == {"relevance", "penalty", "objective"}
    back = ProjectionMatrix.load(p)
    assert np.array_equal(back.vectors, W.vectors)
    assert back.hist == W.hist


def test_extraction_config_round_trip():
    cfg = ExtractionConfig(t=3, hist=HistogramConfig(n_bins=20, value_range=(-1, 1)),
                           ga=GaConfig(population=10, elites=1), entropy_floor=1e-5)
    assert ExtractionConfig.from_dict(json.loads(json.dumps(cfg.to_dict()))) == cfg
