"""Stationary covariance kernels with unit variance.

Two families are supported: the squared-exponential kernel

    k(x, y) = exp(-||x - y||^2 / (2 l^2))

and the Matern kernel

    k(x, y) = 2^(1-nu) / Gamma(nu) * (r/l)^nu * K_nu(r/l),   r = ||x - y||_2,

where K_nu is the modified Bessel function of the second kind.  Both attain
exactly 1 at distance zero, so every Gram matrix has a unit diagonal.

Half-integer nu in {1/2, 3/2, 5/2} is dispatched to the well-known closed
forms; any other nu goes through the Bessel routine.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gamma as _gamma
from scipy.special import kv as _bessel_kv

SQUARED_EXPONENTIAL = "se"
MATERN = "matern"

# Distances below this fraction of the lengthscale are treated as zero;
# the Bessel evaluation degenerates to 0 * inf there.
_ZERO_SNAP = 1e-12

_HALF_INTEGER_NUS = (0.5, 1.5, 2.5)


@dataclass(frozen=True)
class KernelSpec:
    """Kernel family plus hyperparameters.  Immutable, safe to share."""

    family: str
    lengthscale: float
    nu: float | None = None

    def __post_init__(self):
        if self.family not in (SQUARED_EXPONENTIAL, MATERN):
            raise ValueError(f"unknown kernel family: {self.family!r}")
        if not (np.isfinite(self.lengthscale) and self.lengthscale > 0):
            raise ValueError(f"lengthscale must be positive, got {self.lengthscale}")
        if self.family == MATERN:
            if self.nu is None or not (np.isfinite(self.nu) and self.nu > 0):
                raise ValueError(f"Matern kernel needs nu > 0, got {self.nu}")

    def __call__(self, x, y):
        return kernel_eval(self, x, y)


def _matern_half_integer(s: np.ndarray, nu: float) -> np.ndarray:
    """Closed forms for nu in {1/2, 3/2, 5/2}; s = r / l."""
    if nu == 0.5:
        return np.exp(-s)
    if nu == 1.5:
        c = math.sqrt(3.0) * s
        return (1.0 + c) * np.exp(-c)
    if nu == 2.5:
        c = math.sqrt(5.0) * s
        return (1.0 + c + c * c / 3.0) * np.exp(-c)
    raise ValueError(f"no closed form for nu={nu}")


def _matern_bessel(s: np.ndarray, nu: float) -> np.ndarray:
    """General-nu Matern via the modified Bessel function; s = r / l, s > 0.

    Uses the standard sqrt(2 nu) argument scaling, so nu = 1/2 reduces to
    exp(-r/l) and the half-integer closed forms agree with this route.
    """
    z = math.sqrt(2.0 * nu) * s
    coef = 2.0 ** (1.0 - nu) / _gamma(nu)
    with np.errstate(over="raise", invalid="raise"):
        try:
            out = coef * np.power(z, nu) * _bessel_kv(nu, z)
        except FloatingPointError as exc:
            raise OverflowError(
                f"Bessel evaluation out of range for nu={nu}"
            ) from exc
    if not np.all(np.isfinite(out)):
        raise OverflowError(f"Bessel evaluation out of range for nu={nu}")
    return out


def kernel_of_distance(spec: KernelSpec, r) -> np.ndarray:
    """Evaluate the kernel as a function of Euclidean distance (vectorized)."""
    r = np.asarray(r, dtype=float)
    if np.any(r < 0) or not np.all(np.isfinite(r)):
        raise ValueError("distances must be finite and nonnegative")
    s = r / spec.lengthscale
    if spec.family == SQUARED_EXPONENTIAL:
        return np.exp(-0.5 * s * s)
    zero = s < _ZERO_SNAP
    s_safe = np.where(zero, 1.0, s)
    if spec.nu in _HALF_INTEGER_NUS:
        vals = _matern_half_integer(s_safe, spec.nu)
    else:
        vals = _matern_bessel(s_safe, spec.nu)
    return np.where(zero, 1.0, vals)


def matern_via_bessel(spec: KernelSpec, r) -> np.ndarray:
    """Force the Bessel-based route, bypassing closed-form dispatch.

    Used to cross-check the half-integer closed forms.
    """
    r = np.asarray(r, dtype=float)
    s = r / spec.lengthscale
    zero = s < _ZERO_SNAP
    s_safe = np.where(zero, 1.0, s)
    return np.where(zero, 1.0, _matern_bessel(s_safe, spec.nu))


def _check_points(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise ValueError(f"dimension mismatch: {x.shape} vs {y.shape}")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ValueError("kernel inputs must be finite")
    return x, y


def kernel_eval(spec: KernelSpec, x, y) -> float:
    """Covariance between two points; always in (0, 1]."""
    x, y = _check_points(x, y)
    r = float(np.linalg.norm(x - y))
    return float(kernel_of_distance(spec, r))


def cross_matrix(spec: KernelSpec, xs, ys) -> np.ndarray:
    """Covariance matrix between two point sets, shape (len(xs), len(ys))."""
    xs = np.atleast_2d(np.asarray(xs, dtype=float))
    ys = np.atleast_2d(np.asarray(ys, dtype=float))
    if not (np.all(np.isfinite(xs)) and np.all(np.isfinite(ys))):
        raise ValueError("kernel inputs must be finite")
    diff = xs[:, None, :] - ys[None, :, :]
    r = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    return kernel_of_distance(spec, r)


def gram_matrix(spec: KernelSpec, points) -> np.ndarray:
    """Symmetric PSD covariance matrix of a point set, unit diagonal."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if points.shape[0] < 1:
        raise ValueError("need at least one point")
    K = cross_matrix(spec, points, points)
    # enforce exact symmetry and unit diagonal against roundoff
    K = 0.5 * (K + K.T)
    np.fill_diagonal(K, 1.0)
    return K
