"""Gaussian measures on R^d: densities, distribution functions, the
isoperimetric profile, quadrature rules, sampling and Cameron-Martin shifts.

Throughout, the reference measure is gamma = N(a, Q).  The standard measure
(a = 0, Q = Id) is the one the rest of the library integrates against; its
one-dimensional density and distribution function are

    G1(x)   = exp(-x^2/2) / sqrt(2 pi)
    Phi(x)  = int_{-inf}^x G1(s) ds

and the isoperimetric profile is U(t) = G1(Phi^{-1}(t)), the perimeter of a
halfspace of Gaussian volume t.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.special import ndtr

__all__ = [
    "GaussianMeasure",
    "QuadratureRule",
    "CameronMartinShift",
    "standard_measure",
    "gaussian_density",
    "gaussian_cdf",
    "gaussian_cdf_inverse",
    "isoperimetric_profile",
    "build_quadrature",
    "sample_gaussian",
    "cameron_martin_density",
]

SQRT_2PI = np.sqrt(2.0 * np.pi)

MAX_GRID_DIM = 3


class DegenerateMeasureError(ValueError):
    """Raised when an operation needs a positive definite covariance."""


def _as_matrix(cov, dim: int) -> np.ndarray:
    cov = np.asarray(cov, dtype=float)
    if cov.ndim == 0:
        cov = cov * np.eye(dim)
    elif cov.ndim == 1:
        cov = np.diag(cov)
    if cov.shape != (dim, dim):
        raise ValueError(f"covariance must be {dim}x{dim}, got {cov.shape}")
    if not np.allclose(cov, cov.T, atol=1e-12):
        raise ValueError("covariance must be symmetric")
    return cov


@dataclass(frozen=True)
class GaussianMeasure:
    """A Gaussian measure N(mean, cov) on R^d.

    Immutable; all derived quantities (inverse covariance, Cholesky factor)
    are cached on first use.  The covariance must be symmetric positive
    semidefinite; operations that need densities additionally require it to
    be positive definite and raise :class:`DegenerateMeasureError` otherwise.
    """

    mean: np.ndarray
    cov: np.ndarray
    dim: int

    def __init__(self, mean, cov, dim: int | None = None):
        mean = np.atleast_1d(np.asarray(mean, dtype=float))
        if dim is None:
            dim = mean.shape[0]
        if mean.shape != (dim,):
            raise ValueError(f"mean must have shape ({dim},)")
        cov = _as_matrix(cov, dim)
        eig = np.linalg.eigvalsh(cov)
        if eig.min() < -1e-10 * max(1.0, eig.max()):
            raise ValueError("covariance must be positive semidefinite")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)
        object.__setattr__(self, "dim", int(dim))

    @classmethod
    def standard(cls, dim: int) -> "GaussianMeasure":
        return cls(np.zeros(dim), np.eye(dim), dim)

    @property
    def is_standard(self) -> bool:
        return bool(
            np.all(self.mean == 0.0) and np.array_equal(self.cov, np.eye(self.dim))
        )

    @property
    def is_diagonal(self) -> bool:
        return bool(np.count_nonzero(self.cov - np.diag(np.diag(self.cov))) == 0)

    @cached_property
    def _chol(self) -> np.ndarray:
        try:
            return np.linalg.cholesky(self.cov)
        except np.linalg.LinAlgError as exc:
            raise DegenerateMeasureError("covariance is singular") from exc

    @cached_property
    def _cov_inv(self) -> np.ndarray:
        if np.linalg.matrix_rank(self.cov) < self.dim:
            raise DegenerateMeasureError("covariance is singular")
        return np.linalg.inv(self.cov)

    @cached_property
    def _log_norm(self) -> float:
        sign, logdet = np.linalg.slogdet(self.cov)
        if sign <= 0:
            raise DegenerateMeasureError("covariance is singular")
        return -0.5 * (self.dim * np.log(2.0 * np.pi) + logdet)

    def density(self, x) -> np.ndarray:
        """Gaussian density at x; x has shape (..., dim) or (dim,)."""
        x = np.asarray(x, dtype=float)
        scalar = x.ndim == 1
        pts = np.atleast_2d(x) - self.mean
        q = np.einsum("...i,ij,...j->...", pts, self._cov_inv, pts)
        out = np.exp(self._log_norm - 0.5 * q)
        return float(out[0]) if scalar else out

    def whitening(self):
        """Return (L_inv, mean) mapping x -> L_inv @ (x - mean) to standard
        coordinates; grids for non-diagonal covariances are built there."""
        return np.linalg.inv(self._chol), self.mean.copy()


def standard_measure(dim: int) -> GaussianMeasure:
    """The standard Gaussian measure N(0, Id) on R^dim."""
    return GaussianMeasure.standard(dim)


def gaussian_density(m: GaussianMeasure, x) -> float | np.ndarray:
    """Density of m at x, (2 pi)^{-d/2} det(Q)^{-1/2} exp(-<x-a, Q^{-1}(x-a)>/2)."""
    return m.density(x)


def gaussian_cdf(t):
    """Standard normal distribution function Phi, accurate in both tails."""
    return ndtr(t)


def gaussian_cdf_inverse(p, tol: float = 1e-13, max_iter: int = 80):
    """Inverse of Phi by bracketed Newton iteration.

    Symmetry is enforced structurally: for p > 1/2 the result is
    -Phi^{-1}(1-p), so U(t) = U(1-t) holds to solver tolerance.

    Raises ValueError at p <= 0 or p >= 1 (the inverse is infinite there).
    """
    p_arr = np.atleast_1d(np.asarray(p, dtype=float))
    if np.any((p_arr <= 0.0) | (p_arr >= 1.0)):
        raise ValueError("gaussian_cdf_inverse requires p in (0, 1)")
    out = np.empty_like(p_arr)
    upper = p_arr > 0.5
    q = np.where(upper, 1.0 - p_arr, p_arr)  # q in (0, 1/2]

    # Newton on Phi(x) - q with a maintained bracket [lo, hi].
    x = np.full_like(q, -1.0)
    small = q < 1e-3
    x[small] = -np.sqrt(2.0 * np.log(1.0 / q[small]))
    lo = np.minimum(x - 2.0, -45.0)
    hi = np.zeros_like(q)
    for _ in range(max_iter):
        f = ndtr(x) - q
        lo = np.where(f < 0, np.maximum(lo, x), lo)
        hi = np.where(f > 0, np.minimum(hi, x), hi)
        step = f / np.maximum(np.exp(-0.5 * x * x) / SQRT_2PI, 1e-320)
        x_new = x - step
        bad = (x_new <= lo) | (x_new >= hi)
        x_new = np.where(bad, 0.5 * (lo + hi), x_new)
        if np.all(np.abs(x_new - x) < tol):
            x = x_new
            break
        x = x_new
    out = np.where(upper, -x, x)
    if np.isscalar(p) or np.asarray(p).ndim == 0:
        return float(out[0])
    return out


def isoperimetric_profile(t):
    """U(t) = Phi' o Phi^{-1}(t): perimeter of a halfspace of volume t.

    Defined on [0, 1] with U(0) = U(1) = 0; symmetric about 1/2 where it
    attains its maximum 1/sqrt(2 pi).
    """
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any((t_arr < 0.0) | (t_arr > 1.0)):
        raise ValueError("isoperimetric_profile requires t in [0, 1]")
    out = np.zeros_like(t_arr)
    interior = (t_arr > 0.0) & (t_arr < 1.0)
    if np.any(interior):
        x = gaussian_cdf_inverse(t_arr[interior])
        out[interior] = np.exp(-0.5 * np.square(x)) / SQRT_2PI
    if np.isscalar(t) or np.asarray(t).ndim == 0:
        return float(out[0])
    return out


@dataclass(frozen=True)
class QuadratureRule:
    """Tensor quadrature against the standard Gaussian measure on R^d.

    kind is "gauss-hermite" (spectrally accurate for smooth integrands) or
    "uniform-truncated" (a trapezoid grid on [-R, R]^d carrying the Gaussian
    density in its weights; the right tool for discontinuous integrands).
    Stored per axis; the flattened tensor nodes/weights are materialised
    lazily.  Weights sum to the gamma-measure of the covered region.
    """

    kind: str
    axes: tuple[np.ndarray, ...]
    axis_weights: tuple[np.ndarray, ...]          # gamma-weights per axis
    axis_lebesgue: tuple[np.ndarray, ...] | None  # uniform kind only

    @property
    def dim(self) -> int:
        return len(self.axes)

    @cached_property
    def nodes(self) -> np.ndarray:
        """All tensor nodes, shape (n_nodes, dim)."""
        mesh = np.meshgrid(*self.axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)

    @cached_property
    def weights(self) -> np.ndarray:
        """Flattened tensor-product gamma-weights, shape (n_nodes,)."""
        return self.weight_tensor.ravel()

    @cached_property
    def weight_tensor(self) -> np.ndarray:
        w = self.axis_weights[0]
        for aw in self.axis_weights[1:]:
            w = np.multiply.outer(w, aw)
        return w

    @cached_property
    def lebesgue_tensor(self) -> np.ndarray:
        if self.axis_lebesgue is None:
            raise ValueError("lebesgue weights only exist for the uniform kind")
        w = self.axis_lebesgue[0]
        for aw in self.axis_lebesgue[1:]:
            w = np.multiply.outer(w, aw)
        return w

    def integrate(self, f) -> float:
        """Integral of f against standard gamma; f maps (n, dim) -> (n,)."""
        return float(np.dot(self.weights, np.asarray(f(self.nodes), dtype=float)))


def _hermite_axis(level: int) -> tuple[np.ndarray, np.ndarray]:
    # probabilists' normalisation: sum w = 1, nodes for N(0, 1)
    x, w = np.polynomial.hermite.hermgauss(level)
    return x * np.sqrt(2.0), w / np.sqrt(np.pi)


def _uniform_axis(level: int, radius: float) -> tuple[np.ndarray, np.ndarray]:
    x = np.linspace(-radius, radius, level)
    h = x[1] - x[0]
    lw = np.full(level, h)
    lw[0] *= 0.5
    lw[-1] *= 0.5
    return x, lw


def build_quadrature(
    dim: int,
    kind: str,
    level: int,
    box_radius: float = 6.0,
) -> QuadratureRule:
    """Build a tensor quadrature rule for the standard measure on R^dim.

    level is the number of 1-D nodes per axis.  The uniform kind covers
    [-box_radius, box_radius]^dim; with the default radius 6 the Gaussian
    mass left outside is below 2e-9 per dimension.
    """
    if dim > MAX_GRID_DIM or dim < 1:
        raise ValueError(f"unsupported dimension {dim}; grids cover d <= {MAX_GRID_DIM}")
    if level < 8:
        raise ValueError("level must be at least 8")
    if kind == "gauss-hermite":
        x, w = _hermite_axis(level)
        return QuadratureRule(
            kind=kind,
            axes=(x,) * dim,
            axis_weights=(w,) * dim,
            axis_lebesgue=None,
        )
    if kind == "uniform-truncated":
        x, lw = _uniform_axis(level, box_radius)
        gw = lw * np.exp(-0.5 * x * x) / SQRT_2PI
        return QuadratureRule(
            kind=kind,
            axes=(x,) * dim,
            axis_weights=(gw,) * dim,
            axis_lebesgue=(lw,) * dim,
        )
    raise ValueError(f"unknown quadrature kind {kind!r}")


def sample_gaussian(m: GaussianMeasure, n: int, seed: int) -> np.ndarray:
    """Draw n points from m, shape (n, dim).  Deterministic given seed.

    Each call derives its own Philox stream from the seed, so concurrent
    callers never share generator state.
    """
    if n < 1:
        raise ValueError("n must be positive")
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    z = rng.standard_normal((n, m.dim))
    return m.mean + z @ m._chol.T


@dataclass(frozen=True)
class CameronMartinShift:
    """A translation direction h with its paired linear functional.

    In the truncated setting H is identified with R^d under the norm
    |h|_H = |Q^{-1/2} h|; the functional is h_hat(x) = <x, Q^{-1} h> and the
    translated measure has density exp(h_hat(x) - |h|_H^2 / 2) against the
    centred measure.
    """

    h: np.ndarray
    q_inv_h: np.ndarray = field(repr=False)
    h_norm_sq: float

    def __init__(self, h, measure: GaussianMeasure | None = None):
        h = np.atleast_1d(np.asarray(h, dtype=float))
        if measure is None:
            measure = GaussianMeasure.standard(h.shape[0])
        if measure.dim != h.shape[0]:
            raise ValueError("shift and measure dimensions disagree")
        if np.any(measure.mean != 0.0):
            raise ValueError("Cameron-Martin shifts are defined for centred measures")
        q_inv_h = measure._cov_inv @ h
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "q_inv_h", q_inv_h)
        object.__setattr__(self, "h_norm_sq", float(h @ q_inv_h))

    def h_hat(self, x) -> np.ndarray:
        """The linear functional x -> <x, Q^{-1} h>."""
        return np.asarray(x, dtype=float) @ self.q_inv_h


def cameron_martin_density(shift: CameronMartinShift, x) -> float | np.ndarray:
    """Density of the h-translated measure: exp(h_hat(x) - |h|_H^2 / 2)."""
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 1
    val = np.exp(np.atleast_2d(x) @ shift.q_inv_h - 0.5 * shift.h_norm_sq)
    return float(val[0]) if scalar else val
