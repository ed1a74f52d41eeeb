"""Least squares with column-pivoted QR and explicit rank handling."""

from __future__ import annotations

import numpy as np
import scipy.linalg


def ols_fit(X: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, float]:
    """Minimize ||y - X beta||^2; rank-deficient pivot columns get beta = 0.

    Returns (coefficients, residual sum of squares).
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64).ravel()
    n, p = X.shape
    if n < p:
        raise ValueError(f"need at least as many rows as columns, got {n}x{p}")
    if y.size != n:
        raise ValueError(f"y has {y.size} entries, X has {n} rows")

    Q, R, piv = scipy.linalg.qr(X, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    tol = max(n, p) * np.finfo(np.float64).eps * (diag[0] if diag.size else 0.0)
    rank = int(np.sum(diag > tol))

    beta_piv = np.zeros(p)
    if rank > 0:
        qty = Q.T @ y
        beta_piv[:rank] = scipy.linalg.solve_triangular(R[:rank, :rank], qty[:rank], lower=False)
    beta = np.zeros(p)
    beta[piv] = beta_piv

    resid = y - X @ beta
    rss = float(resid @ resid)
    return beta, rss
