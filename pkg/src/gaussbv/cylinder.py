"""Canonical cylindrical approximations: conditional expectations onto the
first m coordinates, the smoothing-monotonicity inequality, and rotation
invariance of the Gaussian measure.

E_m u integrates out the coordinates beyond m against their Gaussian
factors, E_m u(x) = int u(P_m x + (I - P_m) y) dgamma(y); on a tensor grid
with a product measure this is an exact weighted contraction along the
integrated axes, so the tower property E_m E_n = E_m holds to rounding.
Coordinates follow the fixed grid axes (the eigenbasis of the diagonal
covariances in scope); non-diagonal covariances must be whitened first
(GaussianMeasure.whitening).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fields import GridField, gradient, integrate, integrate_h_norm, interp_at
from .semigroup import ou_apply

__all__ = [
    "CylinderProjection",
    "conditional_expectation",
    "tower_check",
    "monotonicity_check",
    "rotation_invariance_check",
]


@dataclass(frozen=True)
class CylinderProjection:
    """Retain the first m of total_dim grid coordinates."""

    m: int
    total_dim: int

    def __post_init__(self):
        if not 1 <= self.m <= self.total_dim:
            raise ValueError("need 1 <= m <= total_dim")


def _axis_gamma_weights(u: GridField, axis: int) -> np.ndarray:
    if not u.measure.is_diagonal:
        raise ValueError("cylindrical projections need a diagonal covariance; whiten first")
    x = u.grid.axes[axis]
    mean = u.measure.mean[axis]
    var = u.measure.cov[axis, axis]
    g = np.exp(-0.5 * (x - mean) ** 2 / var) / np.sqrt(2 * np.pi * var)
    return u.grid.axis_lebesgue[axis] * g


def conditional_expectation(u: GridField, m: int) -> GridField:
    """E_m u: integrate out axes m..d-1; the result is constant along them."""
    proj = CylinderProjection(m, u.dim)
    vals = u.values
    for axis in range(proj.total_dim - 1, m - 1, -1):
        w = _axis_gamma_weights(u, axis)
        w = w / w.sum()  # renormalise the truncated 1-D mass to exactly one
        vals = np.tensordot(vals, w, axes=(axis, 0))
    for axis in range(m, proj.total_dim):
        vals = np.expand_dims(vals, axis)
    vals = np.broadcast_to(vals, u.values.shape).copy()
    return u.with_values(vals)


def tower_check(u: GridField, m: int, n: int, tol: float = 1e-8) -> bool:
    """E_m(E_n u) = E_m u up to tol (exact contractions: rounding only)."""
    if not m <= n <= u.dim:
        raise ValueError("need m <= n <= dim")
    lhs = conditional_expectation(conditional_expectation(u, n), m)
    rhs = conditional_expectation(u, m)
    return bool(np.max(np.abs(lhs.values - rhs.values)) <= tol)


def monotonicity_check(
    u: GridField, m: int, t: float, slack: float = 0.01
) -> tuple[float, float, bool]:
    """Smoothed-gradient monotonicity under cylindrical projection:
    int |grad T_t E_m u| dgamma <= int |grad T_t u| dgamma."""
    if t <= 0:
        raise ValueError("t must be positive")
    lhs = integrate_h_norm(gradient(ou_apply(conditional_expectation(u, m), t)))
    rhs = integrate_h_norm(gradient(ou_apply(u, t)))
    return lhs, rhs, bool(lhs <= rhs * (1.0 + slack))


def rotation_invariance_check(
    u: GridField, theta: float, n_mc: int = 10**6, seed: int = 0
) -> tuple[float, float, bool]:
    """Monte Carlo check of int int u(cos(theta) x + sin(theta) y) = int u.

    Returns (mc_estimate, quadrature_value, pass) with a 4-sigma band.
    """
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    x = rng.standard_normal((n_mc, u.dim))
    y = rng.standard_normal((n_mc, u.dim))
    pts = np.cos(theta) * x + np.sin(theta) * y
    samples = interp_at(u, pts)
    lhs = float(samples.mean())
    rhs = integrate(u)
    band = 4.0 * float(samples.std(ddof=1)) / np.sqrt(n_mc)
    return lhs, rhs, bool(abs(lhs - rhs) < max(band, 1e-12))
