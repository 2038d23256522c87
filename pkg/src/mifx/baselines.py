"""PCA and Fisher LDA projections, used as comparison methods."""
from __future__ import annotations

import numpy as np
from scipy.linalg import solve_triangular

from .data import DataError, Dataset
from .extraction import ProjectionMatrix


def jacobi_eigh(A: np.ndarray, tol: float = 1e-13, max_sweeps: int = 100) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.

    Returns ``(eigenvalues, eigenvectors)`` sorted by descending eigenvalue,
    eigenvectors as columns.
    """
    A = np.array(A, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("matrix must be square")
    if not np.allclose(A, A.T, rtol=1e-10, atol=1e-12 * max(1.0, np.abs(A).max())):
        raise ValueError("matrix must be symmetric")
    A = (A + A.T) / 2
    n = A.shape[0]
    V = np.eye(n)
    scale = np.linalg.norm(A)
    for _ in range(max_sweeps):
        off = np.linalg.norm(A - np.diag(np.diag(A)))
        if off <= tol * scale or scale == 0:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if abs(apq) <= 1e-18 * np.sqrt(abs(A[p, p] * A[q, q])) or abs(apq) < 1e-300:
                    A[p, q] = A[q, p] = 0.0
                    continue
                theta = (A[q, q] - A[p, p]) / (2 * apq)
                if abs(theta) > 1e150:
                    t = 1 / (2 * theta)
                else:
                    t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1)) if theta != 0 else 1.0
                c = 1 / np.sqrt(t * t + 1)
                s = t * c
                ap, aq = A[:, p].copy(), A[:, q].copy()
                A[:, p] = c * ap - s * aq
                A[:, q] = s * ap + c * aq
                ap, aq = A[p, :].copy(), A[q, :].copy()
                A[p, :] = c * ap - s * aq
                A[q, :] = s * ap + c * aq
                vp, vq = V[:, p].copy(), V[:, q].copy()
                V[:, p] = c * vp - s * vq
                V[:, q] = s * vp + c * vq
                A[p, q] = A[q, p] = 0.0
    else:
        raise ArithmeticError("Jacobi iteration did not converge")
    w = np.diag(A).copy()
    order = np.argsort(-w, kind="stable")
    return w[order], V[:, order]


def _fix_signs(V: np.ndarray) -> np.ndarray:
    """Flip each row so its largest-magnitude entry is positive."""
    V = np.array(V)
    idx = np.argmax(np.abs(V), axis=1)
    signs = np.sign(V[np.arange(V.shape[0]), idx])
    signs[signs == 0] = 1
    return V * signs[:, None]


def pca_fit(X: Dataset, t: int) -> ProjectionMatrix:
    """Top-``t`` principal directions of the mean-centred sample covariance."""
    if t < 1 or t > X.d:
        raise DataError(f"cannot extract t={t} principal components from {X.d} features")
    if X.n < 2:
        raise DataError("PCA needs at least 2 samples")
    Z = X.features - X.features.mean(axis=0)
    cov = Z.T @ Z / (X.n - 1)
    _, vecs = jacobi_eigh(cov)
    V = vecs[:, :t].T
    V = V / np.linalg.norm(V, axis=1, keepdims=True)
    return ProjectionMatrix(_fix_signs(V), "pca")


def pca_spectrum(X: Dataset) -> tuple[np.ndarray, np.ndarray]:
    """All covariance eigenvalues (descending) and sign-fixed eigenvectors as rows."""
    Z = X.features - X.features.mean(axis=0)
    vals, vecs = jacobi_eigh(Z.T @ Z / (X.n - 1))
    return vals, _fix_signs(vecs.T)


def scatter_matrices(X: Dataset) -> tuple[np.ndarray, np.ndarray]:
    """Within-class and between-class scatter over the classes present in ``X``."""
    mu = X.features.mean(axis=0)
    d = X.d
    Sw = np.zeros((d, d))
    Sb = np.zeros((d, d))
    for c in np.unique(X.labels):
        Xc = X.features[X.labels == c]
        mc = Xc.mean(axis=0)
        Zc = Xc - mc
        Sw += Zc.T @ Zc
        diff = (mc - mu)[:, None]
        Sb += Xc.shape[0] * (diff @ diff.T)
    return Sw, Sb


def fisher_ratio(w: np.ndarray, Sw: np.ndarray, Sb: np.ndarray) -> float:
    return float(w @ Sb @ w) / float(w @ Sw @ w)


def lda_fit(X: Dataset, t: int) -> ProjectionMatrix:
    """Fisher discriminant directions solving ``Sb w = lam (Sw + eps I) w``.

    A ridge ``eps = 1e-6 * trace(Sw) / d`` is added only when ``Sw`` is
    numerically singular.
    """
    classes, counts = np.unique(X.labels, return_counts=True)
    n_classes = classes.size
    if t < 1 or t > X.d:
        raise DataError(f"cannot extract t={t} discriminants from {X.d} features")
    if t > n_classes - 1:
        raise DataError(f"t exceeds C-1 = {n_classes - 1}")
    if np.any(counts < 2):
        raise DataError(f"class {classes[np.argmin(counts)]} has fewer than 2 samples")
    Sw, Sb = scatter_matrices(X)
    d = X.d
    evals, _ = jacobi_eigh(Sw)
    if evals[-1] <= 1e-12 * max(evals[0], 1e-300):
        Sw = Sw + 1e-6 * np.trace(Sw) / d * np.eye(d)
        if np.trace(Sw) == 0:
            Sw = Sw + np.eye(d)
    L = np.linalg.cholesky(Sw)
    # M = L^-1 Sb L^-T is symmetric and shares the generalized eigenvalues
    tmp = solve_triangular(L, Sb, lower=True)
    M = solve_triangular(L, tmp.T, lower=True).T
    _, U = jacobi_eigh((M + M.T) / 2)
    W = solve_triangular(L.T, U[:, :t], lower=False).T
    W = W / np.linalg.norm(W, axis=1, keepdims=True)
    return ProjectionMatrix(_fix_signs(W), "lda")
