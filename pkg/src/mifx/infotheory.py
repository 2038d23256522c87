"""Histogram (plug-in) estimators of entropy and low-dimensional mutual information.

All entropies are computed from integer cell counts by a single routine,
:func:`entropy_rows`, whose result is a deterministic function of the
*multiset* of nonzero counts: it does not depend on cell order or on how many
empty cells a table has. Mutual information
is assembled as ``(H(X) + H(Y)) - H(X, Y)``, which makes

* ``mi_cc(x, y) == mi_cc(y, x)`` bit for bit, and
* ``mi_cc(x, x) == entropy_binned(x)`` bit for bit (``2h - h`` is exact),

both of which the redundancy term of the extractor relies on.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class HistogramConfig:
    """Binning and estimator settings.

    ``value_range=None`` bins each variable over its observed min..max with the
    top edge inclusive; a ``(lo, hi)`` pair fixes the range and clips values
    outside it into the edge bins.
    """

    n_bins: int = 32
    value_range: tuple[float, float] | None = None
    log_base: float = 2.0
    bias_correction: bool = False

    def __post_init__(self):
        if int(self.n_bins) != self.n_bins or self.n_bins < 2:
            raise ValueError(f"n_bins must be an integer >= 2, got {self.n_bins}")
        if self.value_range is not None:
            lo, hi = self.value_range
            if not lo < hi:
                raise ValueError(f"fixed range requires lo < hi, got {self.value_range}")
            object.__setattr__(self, "value_range", (float(lo), float(hi)))
        if self.log_base not in (2, 2.0, math.e):
            raise ValueError("log_base must be 2 or e")

    def to_dict(self) -> dict:
        return {"n_bins": self.n_bins,
                "value_range": list(self.value_range) if self.value_range else None,
                "log_base": "e" if self.log_base == math.e else 2,
                "bias_correction": self.bias_correction}

    @classmethod
    def from_dict(cls, d: dict) -> "HistogramConfig":
        base = d.get("log_base", 2)
        return cls(n_bins=int(d.get("n_bins", 32)),
                   value_range=tuple(d["value_range"]) if d.get("value_range") else None,
                   log_base=math.e if base in ("e", math.e) else 2.0,
                   bias_correction=bool(d.get("bias_correction", False)))


DEFAULT_HIST = HistogramConfig()


@dataclass(frozen=True, eq=False)
class Histogram:
    """Binned counts. ``counts`` is 1-D for a single variable and 2-D for joints
    (bins x classes, or bins x bins)."""

    bin_edges: np.ndarray
    counts: np.ndarray
    total: int

    def marginal(self, axis: int = 1) -> np.ndarray:
        return self.counts.sum(axis=axis) if self.counts.ndim == 2 else self.counts


def entropy_from_counts(counts, log_base: float = 2.0, bias_correction: bool = False) -> float:
    """Plug-in entropy of the distribution ``counts / counts.sum()``.

    Uses ``H = log n - (1/n) sum c log c`` with 0 log 0 = 0. With
    ``bias_correction`` the Miller-Madow term ``(m - 1) / 2n`` (m occupied cells)
    is added.
    """
    c = np.asarray(counts, dtype=np.float64).ravel()
    if not np.any(c > 0):
        raise ValueError("entropy of an empty histogram is undefined")
    return float(entropy_rows(c[None, :], log_base, bias_correction)[0])


def entropy_rows(counts: np.ndarray, log_base: float = 2.0, bias_correction: bool = False) -> np.ndarray:
    """Row-wise :func:`entropy_from_counts` for a (rows x cells) count matrix.

    The ``c log c`` terms of each row are sorted and added strictly left to
    right. Leading zeros add exactly, so every row's result depends only on its
    multiset of nonzero counts, never on cell layout or table size.
    """
    counts = np.asarray(counts, dtype=np.float64)
    safe = np.where(counts > 0, counts, 1.0)
    terms = np.sort(counts * np.log(safe), axis=1)
    s = np.add.accumulate(terms, axis=1)[:, -1]
    n = counts.sum(axis=1)  # integer-valued, exact in any order
    h = np.log(n) - s / n
    if bias_correction:
        h = h + (np.count_nonzero(counts, axis=1) - 1) / (2.0 * n)
    h = np.maximum(h, 0.0)
    return h / math.log(log_base) if log_base != math.e else h


def _check_values(values) -> np.ndarray:
    x = np.asarray(values, dtype=np.float64)
    if x.ndim != 1:
        x = x.ravel()
    if x.size == 0:
        raise ValueError("empty input")
    if not np.all(np.isfinite(x)):
        raise ValueError("values must be finite")
    return x


def _check_labels(labels) -> np.ndarray:
    c = np.asarray(labels)
    if c.size == 0:
        raise ValueError("empty label list")
    if not np.issubdtype(c.dtype, np.integer):
        # arbitrary hashable labels: encode by first appearance
        _, first, inv = np.unique(c, return_index=True, return_inverse=True)
        rank = np.argsort(np.argsort(first))
        return rank[inv].astype(np.int64)
    c = c.astype(np.int64).ravel()
    if c.min() < 0:
        _, c = np.unique(c, return_inverse=True)
    return c


def bin_edges(lo: float, hi: float, n_bins: int) -> np.ndarray:
    if hi == lo:
        hi = lo + 1.0
    return lo + (hi - lo) * np.arange(n_bins + 1) / n_bins


def bin_index(values: np.ndarray, cfg: HistogramConfig = DEFAULT_HIST) -> np.ndarray:
    """Equal-width bin index of every entry, column by column for 2-D input.

    Under the min..max policy the index is ``floor((x - lo) / (hi - lo) * n_bins)``
    with the maximum mapped into the last bin; a constant column maps entirely
    to bin 0. For positive power-of-two rescaling and exact shifts the
    arithmetic is exact, so bin assignment is affine-equivariant.
    """
    x = np.asarray(values, dtype=np.float64)
    nb = cfg.n_bins
    if cfg.value_range is None:
        lo = x.min(axis=0)
        hi = x.max(axis=0)
    else:
        lo, hi = cfg.value_range
        lo = np.full(x.shape[1:], lo)
        hi = np.full(x.shape[1:], hi)
    width = hi - lo
    const = width == 0
    width = np.where(const, 1.0, width)
    with np.errstate(invalid="ignore"):
        idx = np.floor((x - lo) / width * nb)
    idx = np.clip(idx, 0, nb - 1).astype(np.int64)
    if np.any(const):
        idx[..., const] = 0
    return idx


def bin_1d(values, cfg: HistogramConfig = DEFAULT_HIST) -> Histogram:
    x = _check_values(values)
    idx = bin_index(x, cfg)
    lo, hi = cfg.value_range or (float(x.min()), float(x.max()))
    return Histogram(bin_edges(lo, hi, cfg.n_bins), np.bincount(idx, minlength=cfg.n_bins), x.size)


def joint_histogram_cd(values, labels, cfg: HistogramConfig = DEFAULT_HIST) -> Histogram:
    """Bins x classes count table."""
    x = _check_values(values)
    c = _check_labels(labels)
    if x.size != c.size:
        raise ValueError(f"length mismatch: {x.size} values vs {c.size} labels")
    nc = int(c.max()) + 1
    idx = bin_index(x, cfg)
    counts = np.bincount(idx * nc + c, minlength=cfg.n_bins * nc).reshape(cfg.n_bins, nc)
    lo, hi = cfg.value_range or (float(x.min()), float(x.max()))
    return Histogram(bin_edges(lo, hi, cfg.n_bins), counts, x.size)


def _h(counts, cfg: HistogramConfig) -> float:
    return entropy_from_counts(counts, cfg.log_base, cfg.bias_correction)


def _mi_from_codes(a: np.ndarray, b: np.ndarray, na: int, nb: int, cfg: HistogramConfig) -> float:
    ha = _h(np.bincount(a, minlength=na), cfg)
    hb = _h(np.bincount(b, minlength=nb), cfg)
    hab = _h(np.bincount(a * nb + b, minlength=na * nb), cfg)
    return max((ha + hb) - hab, 0.0)


def entropy_discrete(labels, log_base: float = 2.0) -> float:
    """Entropy of the empirical class distribution (bits by default)."""
    c = _check_labels(labels)
    return entropy_from_counts(np.bincount(c), log_base)


def entropy_binned(values, cfg: HistogramConfig = DEFAULT_HIST) -> float:
    """Discrete entropy of the bin-occupancy distribution of ``values``."""
    x = _check_values(values)
    return _h(np.bincount(bin_index(x, cfg), minlength=cfg.n_bins), cfg)


def mi_cd(values, labels, cfg: HistogramConfig = DEFAULT_HIST) -> float:
    """Plug-in mutual information between a binned real variable and class labels."""
    x = _check_values(values)
    c = _check_labels(labels)
    if x.size != c.size:
        raise ValueError(f"length mismatch: {x.size} values vs {c.size} labels")
    if x.size < 2:
        raise ValueError("need at least 2 samples")
    return _mi_from_codes(bin_index(x, cfg), c, cfg.n_bins, int(c.max()) + 1, cfg)


def mi_cc(x, y, cfg: HistogramConfig = DEFAULT_HIST) -> float:
    """Plug-in mutual information between two real variables on an
    ``n_bins x n_bins`` grid, each axis binned independently."""
    x = _check_values(x)
    y = _check_values(y)
    if x.size != y.size:
        raise ValueError(f"length mismatch: {x.size} vs {y.size}")
    if x.size < 2:
        raise ValueError("need at least 2 samples")
    nb = cfg.n_bins
    return _mi_from_codes(bin_index(x, cfg), bin_index(y, cfg), nb, nb, cfg)


def mi_2d_cd(x1, x2, labels, cfg: HistogramConfig = DEFAULT_HIST) -> float:
    """Plug-in MI between the 2-D cell ``(bin(x1), bin(x2))`` and class labels."""
    x1 = _check_values(x1)
    x2 = _check_values(x2)
    c = _check_labels(labels)
    if not x1.size == x2.size == c.size:
        raise ValueError("length mismatch")
    nb = cfg.n_bins
    cell = bin_index(x1, cfg) * nb + bin_index(x2, cfg)
    return _mi_from_codes(cell, c, nb * nb, int(c.max()) + 1, cfg)


def bayes_error_bounds(h_c: float, mi: float, n_classes: int) -> tuple[float, float]:
    """Fano lower and Hellman-Raviv upper bounds on the Bayes error.

    ``h_c`` and ``mi`` must be in bits. Returns ``(lower, upper)`` clamped to
    ``[0, 1]``.
    """
    if h_c < 0 or mi < 0:
        raise ValueError("entropy and mutual information must be nonnegative")
    if n_classes < 2:
        raise ValueError("need at least 2 classes")
    gap = h_c - mi
    upper = min(max(gap / 2.0, 0.0), 1.0)
    lower = min(max((gap - 1.0) / math.log2(n_classes), 0.0), 1.0)
    return lower, upper
