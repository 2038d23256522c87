"""Randomized invariants, 100+ hypothesis cases each."""
import math

import numpy as np
from hypothesis import HealthCheck, given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from mifx.baselines import lda_fit, pca_fit
from mifx.data import Dataset
from mifx.evaluation import cross_validate
from mifx.extraction import ExtractionConfig, extract, redundancy_penalty, relevance
from mifx.ga import GaConfig
from mifx.infotheory import HistogramConfig, entropy_binned, entropy_discrete, mi_cc, mi_cd

CASES = settings(max_examples=100, deadline=None, derandomize=True,
                 suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large])
TINY_GA = GaConfig(population=6, generations=3, restarts=1, elites=1, tournament_size=2)

finite = st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False)
bins = st.integers(2, 40)


@st.composite
def paired(draw, min_n=2, max_n=300):
    n = draw(st.integers(min_n, max_n))
    x = draw(arrays(np.float64, n, elements=finite))
    y = draw(arrays(np.float64, n, elements=finite))
    return x, y


@st.composite
def labelled(draw, min_n=2, max_n=300):
    x, _ = draw(paired(min_n, max_n))
    c = draw(arrays(np.int64, len(x), elements=st.integers(0, 4)))
    return x, c


@st.composite
def small_dataset(draw, min_n=12, max_n=40, max_d=4, min_classes=2):
    """Integer seed plus shape parameters; numpy does the sampling."""
    seed = draw(st.integers(0, 2**32 - 1))
    n = draw(st.integers(min_n, max_n))
    d = draw(st.integers(1, max_d))
    k = draw(st.integers(min_classes, 3))
    rng = np.random.default_rng(seed)
    y = np.arange(n) % k
    X = rng.standard_normal((n, d)) * rng.uniform(0.1, 10) + y[:, None] * rng.uniform(0, 2, d)
    return Dataset.from_arrays(X, y)


@CASES
@given(paired(), bins)
def test_nonnegativity(xy, nb):
    x, y = xy
    cfg = HistogramConfig(n_bins=nb)
    assert entropy_binned(x, cfg) >= 0
    assert mi_cc(x, y, cfg) >= 0
    assert mi_cd(x, (y > 0).astype(int), cfg) >= 0


@CASES
@given(paired(), bins)
def test_mi_symmetry(xy, nb):
    x, y = xy
    cfg = HistogramConfig(n_bins=nb)
    assert mi_cc(x, y, cfg) == mi_cc(y, x, cfg)


@CASES
@given(labelled(), bins)
def test_entropy_bounds(xc, nb):
    x, c = xc
    cfg = HistogramConfig(n_bins=nb)
    hx, hc = entropy_binned(x, cfg), entropy_discrete(c)
    assert hx <= math.log2(min(nb, len(x))) + 1e-12
    assert hc <= math.log2(len(np.unique(c))) + 1e-12
    i = mi_cd(x, c, cfg)
    assert i <= min(hx, hc) + 1e-12
    y = np.roll(x, 1)
    assert mi_cc(x, y, cfg) <= min(hx, entropy_binned(y, cfg)) + 1e-12


@CASES
@given(st.lists(st.integers(-2000, 2000), min_size=2, max_size=200), st.integers(-6, 6),
       st.integers(-1000, 1000), bins)
def test_affine_invariance(ints, k, shift, nb):
    # dyadic data, power-of-two scale and integer shift: every operation is exact
    x = np.array(ints, dtype=float) / 16
    cfg = HistogramConfig(n_bins=nb)
    z = x * 2.0**k + shift
    c = np.array(ints) % 3
    assert entropy_binned(z, cfg) == entropy_binned(x, cfg)
    assert mi_cd(z, c, cfg) == mi_cd(x, c, cfg)
    assert mi_cc(z, x[::-1], cfg) == mi_cc(x, x[::-1], cfg)


@CASES
@given(small_dataset(), st.integers(-8, 8))
def test_relevance_scale_invariance(ds, k):
    w = np.linspace(1, 2, ds.d) * (-1) ** np.arange(ds.d)
    assert relevance(w * 2.0**k, ds) == relevance(w, ds)


@CASES
@given(labelled(min_n=2), st.integers(0, 2**32 - 1))
def test_entropy_permutation_invariance(xc, seed):
    x, c = xc
    perm = np.random.default_rng(seed).permutation(len(x))
    assert entropy_binned(x[perm]) == entropy_binned(x)
    assert mi_cd(x[perm], c[perm]) == mi_cd(x, c)


@CASES
@given(small_dataset(), st.integers(0, 1000))
def test_penalty_nonnegative(ds, seed):
    rng = np.random.default_rng(seed)
    prev = rng.standard_normal((2, ds.d))
    assert redundancy_penalty(rng.standard_normal(ds.d), prev, ds) >= 0


@CASES
@given(small_dataset(), st.integers(0, 1000))
def test_unit_norm_outputs(ds, seed):
    t = min(ds.d, 2)
    for W in (extract(ds, ExtractionConfig(t=t, ga=TINY_GA), seed), pca_fit(ds, t),
              lda_fit(ds, min(t, ds.n_classes - 1))):
        np.testing.assert_allclose(np.linalg.norm(W.vectors, axis=1), 1.0, atol=1e-9)


@CASES
@given(small_dataset(), st.sampled_from(["raw", "pca", "lda"]), st.integers(0, 1000))
def test_report_mean_consistency(ds, method, seed):
    rep = cross_validate(ds, method, list(range(1, ds.d + 1)), folds=3, seed=seed)
    for row, mean in zip(rep.fold_accuracies, rep.mean_accuracy):
        if mean is None:
            assert all(v is None for v in row)
            continue
        assert all(0.0 <= v <= 100.0 for v in row)
        assert abs(mean - sum(row) / len(row)) <= 1e-9


@CASES
@given(small_dataset(), st.sampled_from(["pca", "lda", "mifx"]), st.integers(0, 1000))
def test_no_leakage_refit(ds, method, seed):
    cfg = ExtractionConfig(ga=TINY_GA)
    cross_validate(ds, method, [1], folds=3, seed=seed, cfg=cfg, check_leakage=True)


PROPERTIES = {
    "nonnegativity": [test_nonnegativity, test_penalty_nonnegative],
    "symmetry": [test_mi_symmetry],
    "entropy bounds": [test_entropy_bounds, test_entropy_permutation_invariance],
    "affine invariance": [test_affine_invariance, test_relevance_scale_invariance],
    "unit-norm outputs": [test_unit_norm_outputs],
    "report mean-consistency": [test_report_mean_consistency],
    "no-leakage refit": [test_no_leakage_refit],
}
