"""Cap integral transform and its spectral action on zonal functions.

Averaging a function over the height-s cap around each point defines an
integral transform; on a degree-k zonal function P_k(e . v) it acts as
multiplication by a scalar lambda_k(s).  That eigenvalue is the weighted
integral of P_k over [s, 1], normalized by the full-sphere weight mass,
and it vanishes exactly at the freak heights for degree k-1.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import beta as _beta_fn

from .orthopoly import legendre_eval

__all__ = [
    "CapEigenvalue",
    "cap_eigenvalue",
    "funk_hecke_lambda",
    "odd_mean_zero_check",
    "transform_apply",
    "weight_mass",
]


@lru_cache(maxsize=None)
def _gauss_rule(order):
    x, w = np.polynomial.legendre.leggauss(order)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def weight_mass(n: int) -> float:
    """Full integral of (1-t^2)^((n-3)/2) over [-1, 1]."""
    if n < 2:
        raise ValueError(f"dimension must be >= 2, got {n}")
    return float(_beta_fn(0.5, (n - 1) / 2))


def _zonal_integral(n, k, theta_lo, theta_hi, order):
    # After t = cos(theta) the weighted integrand becomes the trigonometric
    # polynomial P_k(cos theta) sin(theta)^(n-2), so Gauss-Legendre in theta
    # converges super-geometrically regardless of the parity of n.
    x, w = _gauss_rule(order)
    half = 0.5 * (theta_hi - theta_lo)
    theta = theta_lo + half * (x + 1.0)
    f = legendre_eval(n, k, np.cos(theta)) * np.sin(theta) ** (n - 2)
    return half * float(np.dot(w, f))


def _default_order(k):
    return max(40, 4 * k)


@lru_cache(maxsize=4096)
def funk_hecke_lambda(n: int, k: int, s: float, order: int | None = None) -> float:
    """Eigenvalue lambda_k(s) of the height-s cap transform in dimension n.

    Defined by the normalized weighted integral of the dimension-n Legendre
    polynomial of degree k over [s, 1]:

        lambda_k(s) = int_s^1 P_k(t) (1-t^2)^((n-3)/2) dt / weight_mass(n)

    so that averaging v -> P_k(e . v) over the cap C_s(u) gives
    lambda_k(s) * P_k(e . u); for k=0 this is the uniform cap measure.
    Computed by Gauss-Legendre quadrature of order max(40, 4k) after the
    substitution t = cos(theta).
    """
    if n < 2:
        raise ValueError(f"dimension must be >= 2, got {n}")
    if k < 0:
        raise ValueError(f"degree must be >= 0, got {k}")
    if not -1.0 < s < 1.0:
        raise ValueError(f"cap height must lie in (-1, 1), got {s}")
    if order is None:
        order = _default_order(k)
    num = _zonal_integral(n, k, 0.0, float(np.arccos(s)), order)
    return num / weight_mass(n)


def odd_mean_zero_check(n: int, k: int, order: int | None = None) -> float:
    """Full-sphere mean of the degree-k zonal function for odd k.

    Returns the normalized integral of P_k(e . v) over the whole sphere,
    computed by quadrature; for odd degrees the symmetry of the weight
    forces it below 1e-12 in magnitude.
    """
    if k % 2 == 0:
        raise ValueError("mean-zero identity is claimed only for odd degrees")
    if order is None:
        order = _default_order(k)
    num = _zonal_integral(n, k, 0.0, np.pi, order)
    return num / weight_mass(n)


def transform_apply(n: int, k: int, s: float, axis, u) -> float:
    """Cap transform of v -> P_k(axis . v), evaluated at u."""
    axis = np.asarray(axis, dtype=float)
    u = np.asarray(u, dtype=float)
    if axis.shape != u.shape or axis.shape != (n,):
        raise ValueError("dimension mismatch between axis, u and n")
    dot = float(np.clip(np.dot(axis, u), -1.0, 1.0))
    return funk_hecke_lambda(n, k, s) * legendre_eval(n, k, dot)


@dataclass(frozen=True)
class CapEigenvalue:
    """A cap-transform eigenvalue together with the parameters producing it."""

    dim: int
    degree: int
    height: float
    value: float


def cap_eigenvalue(n: int, k: int, s: float) -> CapEigenvalue:
    """funk_hecke_lambda packaged with its parameters."""
    return CapEigenvalue(dim=n, degree=k, height=float(s), value=funk_hecke_lambda(n, k, float(s)))
