"""1-NN classification, cross-validated evaluation and comparison tables."""
from __future__ import annotations

import hashlib
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .baselines import lda_fit, pca_fit
from .data import DataError, Dataset, FoldPlan, apply_normalizer, fit_normalizer, stratified_kfold
from .extraction import ExtractionConfig, ProjectionMatrix, extract, project

log = logging.getLogger(__name__)

METHOD_ORDER = ("raw", "pca", "lda", "mifx")


def _sq_distances(test: np.ndarray, train: np.ndarray) -> np.ndarray:
    # explicit differences rather than the |a|^2+|b|^2-2ab expansion, so exact ties stay ties
    out = np.zeros((test.shape[0], train.shape[0]))
    for j in range(test.shape[1]):
        diff = test[:, j:j + 1] - train[None, :, j]
        out += diff * diff
    return out


def knn_classify(train: Dataset, test: Dataset, k: int = 1, chunk: int = 256) -> np.ndarray:
    """Euclidean k-nearest-neighbour labels for every test sample.

    Distance ties go to the lowest training index. For ``k > 1`` the majority
    label wins; tied vote counts go to whichever tied class has the nearest
    member among the k neighbours.
    """
    if train.n == 0:
        raise DataError("training set is empty")
    if train.d != test.d:
        raise DataError(f"dimension mismatch: train has {train.d} features, test has {test.d}")
    if not 1 <= k <= train.n:
        raise ValueError(f"k must lie in [1, {train.n}]")
    pred = np.empty(test.n, dtype=np.int64)
    for start in range(0, test.n, chunk):
        D = _sq_distances(test.features[start:start + chunk], train.features)
        if k == 1:
            pred[start:start + chunk] = train.labels[np.argmin(D, axis=1)]
            continue
        nn = np.argsort(D, axis=1, kind="stable")[:, :k]
        for r, row in enumerate(nn):
            labs = train.labels[row]
            votes = np.bincount(labs)
            tied = np.flatnonzero(votes == votes.max())
            # labs is ordered nearest first
            pred[start + r] = next(l for l in labs if l in tied)
    return pred


def accuracy(predicted, actual) -> float:
    p = np.asarray(predicted)
    a = np.asarray(actual)
    if p.shape != a.shape:
        raise ValueError(f"length mismatch: {p.size} vs {a.size}")
    if p.size == 0:
        raise ValueError("empty label lists")
    return 100.0 * np.count_nonzero(p == a) / p.size


@dataclass
class EvaluationReport:
    dataset_name: str
    method: str
    classifier: str
    dims_evaluated: list[int]
    fold_accuracies: list[list[float | None]]
    mean_accuracy: list[float | None]
    seed: int
    config_digest: str
    folds: int = 10
    config: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "dataset_name": self.dataset_name,
            "method": self.method,
            "classifier": self.classifier,
            "dims_evaluated": list(self.dims_evaluated),
            "fold_accuracies": self.fold_accuracies,
            "mean_accuracy": self.mean_accuracy,
            "seed": self.seed,
            "folds": self.folds,
            "config_digest": self.config_digest,
            "config": self.config,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "EvaluationReport":
        return cls(d["dataset_name"], d["method"], d["classifier"], list(d["dims_evaluated"]),
                   d["fold_accuracies"], d["mean_accuracy"], d["seed"], d["config_digest"],
                   d.get("folds", len(d["fold_accuracies"][0]) if d["fold_accuracies"] else 0),
                   d.get("config", {}))

    def accuracy_at(self, dim: int) -> float | None:
        return self.mean_accuracy[self.dims_evaluated.index(dim)] if dim in self.dims_evaluated else None


def config_digest(config: dict) -> str:
    blob = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def fold_seed(seed: int, fold: int) -> int:
    return int(np.random.SeedSequence([seed, fold, 0x5EED]).generate_state(1)[0])


def fit_extractor(method: str, train: Dataset, t: int, cfg: ExtractionConfig, seed: int) -> ProjectionMatrix | None:
    if method == "pca":
        return pca_fit(train, t)
    if method == "lda":
        return lda_fit(train, t)
    if method == "mifx":
        return extract(train, ExtractionConfig(t, cfg.hist, cfg.ga, cfg.entropy_floor), seed)
    raise ValueError(f"unknown method {method!r}")


def _max_dim(method: str, data: Dataset, dims: list[int]) -> int:
    if method == "lda":
        return min(max(dims), data.n_classes - 1)
    return max(dims)


def _run_fold(data: Dataset, plan: FoldPlan, fold: int, method: str, dims: list[int],
              cfg: ExtractionConfig, seed: int, knn_k: int, norm_mode: str,
              raw_columns, check_leakage: bool) -> list[float | None]:
    train_idx, test_idx = plan.train_indices(fold), plan.test_indices(fold)
    train_raw, test_raw = data.take(train_idx), data.take(test_idx)
    params = fit_normalizer(train_raw, norm_mode)
    train, test = apply_normalizer(params, train_raw), apply_normalizer(params, test_raw)
    t = _max_dim(method, data, dims)

    if method == "raw":
        cols = list(raw_columns) if raw_columns is not None else list(range(data.d))
        Ztr, Zte = train.features[:, cols], test.features[:, cols]
    else:
        W = fit_extractor(method, train, t, cfg, fold_seed(seed, fold))
        Ztr, Zte = project(W, train).features, project(W, test).features
        if check_leakage:
            _assert_no_leakage(data, train_idx, test_idx, method, t, cfg, fold_seed(seed, fold),
                               norm_mode, W, Zte, test_raw)

    accs: list[float | None] = []
    for dim in dims:
        if dim > t or dim > Ztr.shape[1]:
            accs.append(None)
            continue
        tr = train.with_features(Ztr[:, :dim])
        te = test.with_features(Zte[:, :dim])
        accs.append(accuracy(knn_classify(tr, te, knn_k), te.labels))
    return accs


def _assert_no_leakage(data, train_idx, test_idx, method, t, cfg, seed, norm_mode, W, Zte, test_raw):
    """Refit from an independent copy of the training rows, with the test rows
    scrambled in the source matrix, and require a bit-identical projection."""
    rng = np.random.default_rng(0)
    scrambled = np.array(data.features)
    scrambled[test_idx] = rng.standard_normal((test_idx.size, data.d)) * 1e3
    train_copy = Dataset(scrambled[train_idx], data.labels[train_idx].copy(), data.n_classes)
    params = fit_normalizer(train_copy, norm_mode)
    W2 = fit_extractor(method, apply_normalizer(params, train_copy), t, cfg, seed)
    Zte2 = project(W2, apply_normalizer(params, test_raw)).features
    if not (np.array_equal(W.vectors, W2.vectors) and np.array_equal(Zte, Zte2)):
        raise AssertionError("fold projection depends on data outside the training split")


def cross_validate(data: Dataset, method: str, dims, folds: int = 10, seed: int = 42,
                   cfg: ExtractionConfig = ExtractionConfig(), plan: FoldPlan | None = None,
                   knn_k: int = 1, stratify: bool = True, norm_mode: str = "per-feature",
                   raw_columns=None, n_jobs: int = 1, check_leakage: bool = False) -> EvaluationReport:
    """k-fold evaluation: per fold normalize on train, fit the extractor on the
    normalized train split, project both splits and score KNN at every dim.

    Dims that a method cannot produce (LDA beyond C-1) are reported as ``None``.
    Fold seeds derive from ``(seed, fold)``, so ``n_jobs`` never changes results.
    """
    if method not in METHOD_ORDER:
        raise ValueError(f"unknown method {method!r}; choose from {METHOD_ORDER}")
    dims = sorted(set(int(x) for x in dims))
    if not dims or dims[0] < 1:
        raise ValueError("dims must be positive integers")
    n_feat = len(raw_columns) if (method == "raw" and raw_columns is not None) else data.d
    if dims[-1] > n_feat:
        raise DataError(f"dims exceeds feature count ({dims[-1]} > {n_feat})")
    if plan is None:
        plan = stratified_kfold(data, folds, seed, stratify)
    elif plan.assignments.shape[0] != data.n:
        raise DataError("fold plan does not match dataset size")

    def run(f):
        return _run_fold(data, plan, f, method, dims, cfg, seed, knn_k, norm_mode,
                         raw_columns, check_leakage)

    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            per_fold = list(pool.map(run, range(plan.k)))
    else:
        per_fold = [run(f) for f in range(plan.k)]

    table = [[per_fold[f][i] for f in range(plan.k)] for i in range(len(dims))]
    means = [None if any(v is None for v in row) else float(np.mean(row)) for row in table]
    config = {
        "dataset": data.name, "n": data.n, "d": data.d, "n_classes": data.n_classes,
        "method": method, "dims": dims, "folds": plan.k, "seed": seed,
        "stratified": plan.stratified, "fold_seed": plan.seed, "knn_k": knn_k,
        "normalization": norm_mode,
        "raw_columns": list(raw_columns) if raw_columns is not None else None,
        "extraction": cfg.to_dict() if method == "mifx" else None,
    }
    return EvaluationReport(data.name, method, f"knn-{knn_k}", dims, table, means, seed,
                            config_digest(config), plan.k, config)


def _fmt(v) -> str:
    return "-" if v is None else f"{v:.1f}"


def render_table(reports, fmt: str = "markdown", reference: dict | None = None) -> str:
    """Dims as rows, methods as columns (raw, pca, lda, mifx, then reference columns).

    ``reference`` maps a column name to ``{dim: value}``; those columns are
    appended after the computed methods.
    """
    reports = list(reports)
    if not reports:
        raise ValueError("no reports to render")
    if len({r.dataset_name for r in reports}) > 1 or len({r.classifier for r in reports}) > 1:
        raise ValueError("reports must share dataset and classifier")
    by_method: dict[str, EvaluationReport] = {}
    for r in reports:
        if r.method in by_method:
            raise ValueError(f"duplicate report for method {r.method!r}")
        by_method[r.method] = r
    methods = [m for m in METHOD_ORDER if m in by_method] + sorted(m for m in by_method if m not in METHOD_ORDER)
    reference = reference or {}
    dims = sorted({d for r in reports for d in r.dims_evaluated} |
                  {d for col in reference.values() for d in col})
    header = ["dim"] + methods + list(reference)
    rows = []
    for dim in dims:
        row = [str(dim)] + [_fmt(by_method[m].accuracy_at(dim)) for m in methods]
        row += [_fmt(reference[c].get(dim)) for c in reference]
        rows.append(row)

    if fmt == "csv":
        return "\n".join(",".join(r) for r in [header] + rows) + "\n"
    if fmt == "json":
        doc = {"dataset": reports[0].dataset_name, "classifier": reports[0].classifier,
               "columns": header[1:],
               "rows": [{"dim": int(r[0]), **{h: (None if v == "-" else float(v))
                                               for h, v in zip(header[1:], r[1:])}} for r in rows]}
        return json.dumps(doc, indent=2) + "\n"
    if fmt != "markdown":
        raise ValueError(f"unknown table format {fmt!r}")
    title = f"{reports[0].dataset_name} ({reports[0].classifier}, % accuracy)"
    lines = [title, "", "| " + " | ".join(header) + " |",
             "|" + "|".join("---:" for _ in header) + "|"]
    lines += ["| " + " | ".join(r) + " |" for r in rows]
    return "\n".join(lines) + "\n"


def save_reports(reports, path) -> None:
    reports = list(reports)
    doc = reports[0].to_dict() if len(reports) == 1 else [r.to_dict() for r in reports]
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")


def load_reports(path) -> list[EvaluationReport]:
    doc = json.loads(Path(path).read_text())
    docs = doc if isinstance(doc, list) else [doc]
    return [EvaluationReport.from_dict(d) for d in docs]
