"""Exact Gaussian-process regression with incremental Cholesky updates.

The model conditions on observations y = f(x) + noise and serves the
posterior

    mean(x) = k_t(x)^T (K_t + lam*I)^{-1} y
    var(x)  = k(x, x) - k_t(x)^T (K_t + lam*I)^{-1} k_t(x)

where lam is the regularizer (noise variance).  New observations extend the
lower-triangular factor by one row instead of refitting; a full refit with a
jitter ladder is the fallback when roundoff spoils the extension pivot.

The model also accumulates the information gain of the selected points,

    gain_t = 1/2 * sum_{i<=t} ln(1 + var_{i-1}(x_i) / lam),

which equals 1/2 * ln det(I + K_t / lam).
"""

from __future__ import annotations

import math

import numpy as np
from scipy.linalg import lapack, solve_triangular

from .kernels import KernelSpec, cross_matrix, gram_matrix

_JITTER_LADDER = (0.0, 1e-10, 1e-8, 1e-6)
_PIVOT_FLOOR = 1e-14


class GpNumericsError(RuntimeError):
    """Cholesky factorization failed even with jitter."""

    def __init__(self, message: str, pivot_index: int | None = None):
        super().__init__(message)
        self.pivot_index = pivot_index


def _cholesky_lower(a: np.ndarray) -> np.ndarray:
    c, info = lapack.dpotrf(a, lower=1, clean=1)
    if info > 0:
        raise GpNumericsError(
            f"matrix not positive definite at pivot {info - 1}",
            pivot_index=info - 1,
        )
    if info < 0:
        raise GpNumericsError(f"bad argument {-info} to dpotrf")
    return c


class GpModel:
    """GP regressor owned by a single run loop; posterior reads are const."""

    def __init__(self, kernel: KernelSpec, lam: float):
        if not (np.isfinite(lam) and lam > 0):
            raise ValueError(f"regularizer must be positive, got {lam}")
        self.kernel = kernel
        self.lam = float(lam)
        self._X: np.ndarray | None = None  # (n, d)
        self._y: np.ndarray = np.zeros(0)
        self._L: np.ndarray | None = None  # lower factor of K + lam*I
        self._alpha: np.ndarray | None = None  # (K + lam*I)^{-1} y
        self._info_gain = 0.0

    @classmethod
    def fit(cls, kernel: KernelSpec, lam: float, points, observations) -> "GpModel":
        """Build a model from a batch of data via sequential updates."""
        model = cls(kernel, lam)
        for x, y in zip(points, observations):
            model.update(x, y)
        return model

    @property
    def n(self) -> int:
        return 0 if self._X is None else self._X.shape[0]

    @property
    def points(self) -> np.ndarray:
        return np.zeros((0, 0)) if self._X is None else self._X.copy()

    @property
    def observations(self) -> np.ndarray:
        return self._y.copy()

    @property
    def chol_factor(self) -> np.ndarray | None:
        return None if self._L is None else self._L.copy()

    def _ensure_alpha(self) -> np.ndarray:
        if self._alpha is None:
            z = solve_triangular(self._L, self._y, lower=True)
            self._alpha = solve_triangular(self._L, z, lower=True, trans="T")
        return self._alpha

    def posterior_many(self, xs) -> tuple[np.ndarray, np.ndarray]:
        """Posterior (means, stddevs) at a batch of query points."""
        xs = np.atleast_2d(np.asarray(xs, dtype=float))
        if self.n == 0:
            return np.zeros(xs.shape[0]), np.ones(xs.shape[0])
        kc = cross_matrix(self.kernel, self._X, xs)  # (n, m)
        mean = kc.T @ self._ensure_alpha()
        v = solve_triangular(self._L, kc, lower=True)
        var = 1.0 - np.einsum("ij,ij->j", v, v)
        var = np.clip(var, 0.0, None)
        return mean, np.sqrt(var)

    def posterior(self, x) -> tuple[float, float]:
        """Posterior (mean, stddev) at one point; (0, 1) with no data."""
        mean, std = self.posterior_many(np.atleast_2d(np.asarray(x, dtype=float)))
        return float(mean[0]), float(std[0])

    def _refit(self) -> None:
        K = gram_matrix(self.kernel, self._X)
        last_err: GpNumericsError | None = None
        for jitter in _JITTER_LADDER:
            A = K + (self.lam + jitter) * np.eye(self.n)
            try:
                self._L = _cholesky_lower(A)
                self._alpha = None
                return
            except GpNumericsError as err:
                last_err = err
        raise last_err

    def update(self, x, y: float) -> None:
        """Condition on one more (x, y) pair; O(n^2) factor extension."""
        x = np.asarray(x, dtype=float).reshape(-1)
        if not (np.all(np.isfinite(x)) and np.isfinite(y)):
            raise ValueError("update inputs must be finite")

        _, sigma_prev = self.posterior(x)
        self._info_gain += 0.5 * math.log1p(sigma_prev * sigma_prev / self.lam)

        if self._X is None:
            self._X = x[None, :]
            self._y = np.array([float(y)])
            self._L = np.array([[math.sqrt(1.0 + self.lam)]])
            self._alpha = None
            return

        c = cross_matrix(self.kernel, self._X, x[None, :])[:, 0]
        b = solve_triangular(self._L, c, lower=True)
        pivot_sq = 1.0 + self.lam - float(b @ b)
        self._X = np.vstack([self._X, x[None, :]])
        self._y = np.append(self._y, float(y))
        if pivot_sq <= _PIVOT_FLOOR:
            self._refit()
            return
        n = self._L.shape[0]
        L = np.zeros((n + 1, n + 1))
        L[:n, :n] = self._L
        L[n, :n] = b
        L[n, n] = math.sqrt(pivot_sq)
        self._L = L
        self._alpha = None

    def accumulated_info_gain(self) -> float:
        """Running 1/2 * sum ln(1 + var_prev(x_i)/lam) over inserted points."""
        return self._info_gain

    def log_det_info_gain(self) -> float:
        """Direct 1/2 * ln det(I + K/lam) from the current factor.

        Independent cross-check of the running sum (uses the identity
        det(K + lam*I) = det(lam*I) * det(I + K/lam)).
        """
        if self.n == 0:
            return 0.0
        log_det = 2.0 * float(np.sum(np.log(np.diag(self._L))))
        return 0.5 * (log_det - self.n * math.log(self.lam))
