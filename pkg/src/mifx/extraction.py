"""Component-by-component mutual-information feature extraction.

Each new direction ``w`` maximizes

    I(wX; C) - sum_s I(wX; w_s X) * I(w_s X; C) / H(w_s X)

over the unit sphere, with the sum running over previously extracted
directions. The first direction has no penalty term and simply maximizes
relevance. All terms are one-dimensional histogram estimates.
"""
from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .data import DataError, Dataset
from .ga import GaConfig, ga_optimize
from .infotheory import DEFAULT_HIST, HistogramConfig, bin_index, entropy_rows

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ExtractionConfig:
    t: int = 1
    hist: HistogramConfig = DEFAULT_HIST
    ga: GaConfig = GaConfig()
    entropy_floor: float = 1e-6

    def __post_init__(self):
        if self.t < 1:
            raise ValueError("t must be at least 1")
        if not self.entropy_floor > 0:
            raise ValueError("entropy_floor must be positive")

    def to_dict(self) -> dict:
        return {"t": self.t, "hist": self.hist.to_dict(), "ga": self.ga.to_dict(),
                "entropy_floor": self.entropy_floor}

    @classmethod
    def from_dict(cls, d: dict) -> "ExtractionConfig":
        return cls(t=int(d.get("t", 1)),
                   hist=HistogramConfig.from_dict(d.get("hist", {})),
                   ga=GaConfig(**d.get("ga", {})),
                   entropy_floor=float(d.get("entropy_floor", 1e-6)))


@dataclass(frozen=True, eq=False)
class ProjectionMatrix:
    """Ordered unit-norm directions, one row per extracted component."""

    vectors: np.ndarray
    method: str = "mifx"
    diagnostics: list = field(default_factory=list)
    seed: int | None = None
    hist: HistogramConfig | None = None

    def __post_init__(self):
        V = np.array(self.vectors, dtype=np.float64, ndmin=2)
        if V.shape[0] < 1 or V.shape[1] < 1:
            raise ValueError("a projection needs at least one vector")
        norms = np.linalg.norm(V, axis=1)
        if np.any(np.abs(norms - 1.0) > 1e-9):
            raise ValueError("projection vectors must have unit norm")
        V.setflags(write=False)
        object.__setattr__(self, "vectors", V)

    @property
    def t(self) -> int:
        return self.vectors.shape[0]

    @property
    def d(self) -> int:
        return self.vectors.shape[1]

    def head(self, t: int) -> "ProjectionMatrix":
        return ProjectionMatrix(self.vectors[:t], self.method, self.diagnostics[:t], self.seed, self.hist)

    def to_dict(self) -> dict:
        return {
            "d": self.d,
            "t": self.t,
            "method": self.method,
            "vectors": self.vectors.tolist(),
            "hist": self.hist.to_dict() if self.hist else None,
            "seed": self.seed,
            "diagnostics": [{k: float(r[k]) for k in ("relevance", "penalty", "objective")}
                            for r in self.diagnostics],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ProjectionMatrix":
        V = np.asarray(d["vectors"], dtype=np.float64)
        if V.shape != (d["t"], d["d"]):
            raise ValueError(f"vectors shape {V.shape} does not match t={d['t']}, d={d['d']}")
        return cls(V, d.get("method", "mifx"), list(d.get("diagnostics", [])), d.get("seed"),
                   HistogramConfig.from_dict(d["hist"]) if d.get("hist") else None)

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")

    @classmethod
    def load(cls, path) -> "ProjectionMatrix":
        return cls.from_dict(json.loads(Path(path).read_text()))


def _project_rows(X: np.ndarray, W: np.ndarray) -> np.ndarray:
    """``X @ w`` for each row ``w`` of ``W``, stacked as columns.

    One matrix-vector product per direction keeps column k bit-identical to
    ``X @ W[k]`` no matter how many directions are projected together.
    """
    out = np.empty((X.shape[0], W.shape[0]))
    for k, w in enumerate(W):
        out[:, k] = X @ w
    return out


def project(W: ProjectionMatrix, X: Dataset) -> Dataset:
    """Map samples onto the directions of ``W`` (one output column per vector)."""
    if W.d != X.d:
        raise DataError(f"projection expects {W.d} features, data has {X.d}")
    names = tuple(f"{W.method}{k + 1}" for k in range(W.t))
    return X.with_features(_project_rows(X.features, W.vectors), names)


class Scorer:
    """Batched evaluator of relevance, redundancy penalty and objective.

    Everything that depends only on the data and the already-extracted
    directions (their bin codes, class relevance and binned entropy) is computed
    once at construction.
    """

    def __init__(self, X: Dataset, previous=(), hist: HistogramConfig = DEFAULT_HIST,
                 entropy_floor: float = 1e-6):
        self.X = X.features
        self.labels = X.labels
        self.nc = max(X.n_classes, int(X.labels.max()) + 1)
        self.hist = hist
        self.floor = entropy_floor
        self.h_c = self._entropy(np.bincount(self.labels, minlength=self.nc)[None])[0]
        prev = np.asarray(previous, dtype=np.float64).reshape(-1, X.d) if len(previous) else np.empty((0, X.d))
        self.prev = prev
        self.prev_codes = bin_index(_project_rows(self.X, prev), hist) if prev.shape[0] else None
        self.prev_h = np.empty(prev.shape[0])
        self.prev_rel = np.empty(prev.shape[0])
        if prev.shape[0]:
            self.prev_h, self.prev_rel = self._h_and_rel(self.prev_codes)

    def _entropy(self, counts: np.ndarray) -> np.ndarray:
        return entropy_rows(counts, self.hist.log_base, self.hist.bias_correction)

    def _h_and_rel(self, codes: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        n, m = codes.shape
        nb, nc = self.hist.n_bins, self.nc
        offs = np.arange(m) * nb
        h_x = self._entropy(np.bincount((codes + offs).ravel(), minlength=m * nb).reshape(m, nb))
        joint = codes * nc + self.labels[:, None] + offs * nc
        h_xc = self._entropy(np.bincount(joint.ravel(), minlength=m * nb * nc).reshape(m, nb * nc))
        rel = np.maximum((h_x + self.h_c) - h_xc, 0.0)
        return h_x, rel

    def score(self, W: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Return ``(relevance, penalty, objective)`` arrays for the rows of ``W``."""
        W = np.atleast_2d(np.asarray(W, dtype=np.float64))
        if W.shape[1] != self.X.shape[1]:
            raise DataError(f"weight vectors have length {W.shape[1]}, data has {self.X.shape[1]} features")
        if np.any(~np.any(W != 0, axis=1)):
            raise ValueError("weight vector must be nonzero")
        codes = bin_index(_project_rows(self.X, W), self.hist)
        h_x, rel = self._h_and_rel(codes)
        m = W.shape[0]
        nb = self.hist.n_bins
        terms = np.zeros((m, self.prev.shape[0]))
        offs = np.arange(m) * nb * nb
        for s in range(self.prev.shape[0]):
            h_s = self.prev_h[s]
            if h_s < self.floor:
                continue  # constant feature: its MI with anything is 0, summand defined as 0
            joint = codes * nb + self.prev_codes[:, s:s + 1] + offs
            h_xs = self._entropy(np.bincount(joint.ravel(), minlength=m * nb * nb).reshape(m, nb * nb))
            mi = np.maximum((h_x + h_s) - h_xs, 0.0)
            terms[:, s] = (mi / max(h_s, self.floor)) * self.prev_rel[s]
        pen = np.array([math.fsum(row) for row in terms])
        return rel, pen, rel - pen

    def objective(self, W: np.ndarray) -> np.ndarray:
        return self.score(W)[2]


def _as_vectors(Ws) -> np.ndarray:
    if isinstance(Ws, ProjectionMatrix):
        return Ws.vectors
    if Ws is None or len(Ws) == 0:
        return np.empty((0, 0))
    return np.asarray(Ws, dtype=np.float64)


def _score_one(w, Ws, X: Dataset, hist, entropy_floor):
    prev = _as_vectors(Ws)
    if prev.size and prev.shape[1] != X.d:
        raise DataError(f"previous vectors have length {prev.shape[1]}, data has {X.d} features")
    scorer = Scorer(X, prev if prev.size else (), hist, entropy_floor)
    rel, pen, obj = scorer.score(np.asarray(w, dtype=np.float64)[None, :])
    return float(rel[0]), float(pen[0]), float(obj[0])


def relevance(w, X: Dataset, hist: HistogramConfig = DEFAULT_HIST) -> float:
    """Histogram MI between the projected feature ``X @ w`` and the class labels."""
    return _score_one(w, (), X, hist, 1e-6)[0]


def redundancy_penalty(w, Ws, X: Dataset, hist: HistogramConfig = DEFAULT_HIST,
                       entropy_floor: float = 1e-6) -> float:
    return _score_one(w, Ws, X, hist, entropy_floor)[1]


def objective(w, Ws, X: Dataset, hist: HistogramConfig = DEFAULT_HIST,
              entropy_floor: float = 1e-6) -> float:
    """Relevance minus redundancy penalty; equals relevance when ``Ws`` is empty."""
    return _score_one(w, Ws, X, hist, entropy_floor)[2]


def component_seed(seed: int, i: int) -> int:
    return int(np.random.SeedSequence([seed, i]).generate_state(1)[0])


def extract(X: Dataset, cfg: ExtractionConfig = ExtractionConfig(), seed: int = 0) -> ProjectionMatrix:
    """Extract ``cfg.t`` directions greedily, one GA run per component."""
    if cfg.t > X.d:
        raise DataError(f"cannot extract t={cfg.t} components from {X.d} features")
    if np.unique(X.labels).size < 2:
        raise DataError("extraction needs at least two classes")
    vectors: list[np.ndarray] = []
    diags: list[dict] = []
    for i in range(cfg.t):
        scorer = Scorer(X, vectors, cfg.hist, cfg.entropy_floor)
        res = ga_optimize(scorer.objective, X.d, cfg.ga, component_seed(seed, i), batch=True)
        w = res.vector
        rel, pen, obj = (float(v[0]) for v in scorer.score(w[None]))
        diags.append({"relevance": rel, "penalty": pen, "objective": obj,
                      "ga_initial_best": res.initial_best, "evaluations": res.evaluations})
        log.info("component %d: relevance %.4f penalty %.4f objective %.4f", i + 1, rel, pen, obj)
        vectors.append(w)
    return ProjectionMatrix(np.array(vectors), "mifx", diags, seed, cfg.hist)
