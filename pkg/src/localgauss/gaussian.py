"""Multivariate Gaussian models and the self-consistent covariance fit.

Two density forms are supported. ``standard`` is the usual normalized
density

    (2*pi)**(-K/2) * det(S)**(-1/2) * exp(-(x-mu)' S^-1 (x-mu) / 2)

while ``sharp`` drops the 1/2 in the exponent and normalizes by
``(2*pi*det(S))**(-1/2)`` regardless of dimension, so its weights fall off
twice as fast. The form only changes weighting sharpness and cross-cluster
scale, never the location of a single model's maximum.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .spatial import PointSet

DENSITY_FORMS = ("standard", "sharp")

# ladder floor and escalation target for the inverse residual check
RIDGE_BASE = 1e-8
_INV_TOL = 1e-10
_TWO_PI = 2.0 * math.pi


class WeightUnderflowWarning(RuntimeWarning):
    """Every member density underflowed; weights fell back to uniform."""


@dataclass
class GaussianModel:
    """A fitted Gaussian cluster model with cached evaluation terms.

    sigma is the (possibly ridge-regularized) covariance actually used for
    evaluation; sigma_inv and sigma_det are derived from its Cholesky
    factor, and norm_const caches the standard-form normalizer.
    """

    mu: np.ndarray
    sigma: np.ndarray
    sigma_inv: np.ndarray
    sigma_det: float
    norm_const: float
    ridge: float = 0.0
    iterations: int = 0
    converged: bool = True
    degenerate: bool = False
    weight_underflow: bool = False

    @property
    def k(self) -> int:
        return self.mu.shape[0]

    @property
    def sharp_norm(self) -> float:
        return 1.0 / math.sqrt(_TWO_PI * self.sigma_det)

    @classmethod
    def from_covariance(
        cls, mu: np.ndarray, sigma: np.ndarray, ridge: float = RIDGE_BASE, **meta
    ) -> "GaussianModel":
        """Build a model, escalating the ridge until sigma factorizes cleanly.

        The ladder adds lam * tr(sigma)/K * I with lam = ridge * 10**j
        (unit scale when the trace is zero) until the Cholesky factorization
        succeeds and sigma_inv @ sigma matches the identity to 1e-10.
        """
        mu = np.asarray(mu, dtype=np.float64)
        sigma = symmetrize(np.asarray(sigma, dtype=np.float64))
        k = sigma.shape[0]
        trace = float(np.trace(sigma))
        scale = trace / k if trace > 0 else 1.0
        eye = np.eye(k)

        lam = 0.0
        while True:
            work = sigma if lam == 0.0 else sigma + (lam * scale) * eye
            try:
                chol = np.linalg.cholesky(work)
            except np.linalg.LinAlgError:
                chol = None
            if chol is not None:
                inv = scipy.linalg.cho_solve((chol, True), eye)
                if np.max(np.abs(inv @ work - eye)) <= _INV_TOL:
                    break
            if lam == 0.0:
                lam = ridge if ridge > 0 else RIDGE_BASE
            else:
                lam *= 10.0
            if lam > 1e16:
                raise np.linalg.LinAlgError("covariance could not be regularized")

        det = float(np.prod(np.diag(chol)) ** 2)
        norm = (_TWO_PI ** (-k / 2.0)) / math.sqrt(det)
        return cls(
            mu=mu,
            sigma=work,
            sigma_inv=symmetrize(inv),
            sigma_det=det,
            norm_const=norm,
            ridge=lam,
            **meta,
        )


@dataclass
class FitParams:
    """Knobs for the self-consistent covariance loop."""

    tol: float = 0.01
    max_iter: int = 50
    ridge: float = RIDGE_BASE
    density_form: str = "standard"

    def __post_init__(self):
        if not (self.tol > 0):
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if self.ridge < 0:
            raise ValueError("ridge must be >= 0")
        if self.density_form not in DENSITY_FORMS:
            raise ValueError(f"density_form must be one of {DENSITY_FORMS}")


def symmetrize(c: np.ndarray) -> np.ndarray:
    """Mirror the upper triangle down so symmetry is exact, not approximate."""
    u = np.triu(c)
    return u + np.triu(c, 1).T


def density_many(x: np.ndarray, model: GaussianModel, form: str = "standard") -> np.ndarray:
    """Density of each row of x under the model, for the chosen form."""
    d = np.atleast_2d(np.asarray(x, dtype=np.float64)) - model.mu
    q = np.einsum("ij,jk,ik->i", d, model.sigma_inv, d)
    if form == "standard":
        return model.norm_const * np.exp(-0.5 * q)
    if form == "sharp":
        return model.sharp_norm * np.exp(-q)
    raise ValueError(f"density_form must be one of {DENSITY_FORMS}")


def density(x: np.ndarray, model: GaussianModel, form: str = "standard") -> float:
    """Density of a single point under the model."""
    return float(density_many(np.asarray(x, dtype=np.float64)[None, :], model, form)[0])


def covariance_plain(member_ids: np.ndarray, points: PointSet, mu: np.ndarray) -> np.ndarray:
    """Unweighted covariance of the members around mu (1/N normalization)."""
    ids = np.asarray(member_ids, dtype=np.int64)
    if ids.size == 0:
        raise ValueError("covariance needs at least one member")
    d = points.points[ids] - np.asarray(mu, dtype=np.float64)
    return symmetrize(d.T @ d / ids.size)


def _weights(x: np.ndarray, model: GaussianModel, form: str):
    p = density_many(x, model, form)
    total = p.sum()
    if not (total > 0.0) or not np.isfinite(total):
        n = x.shape[0]
        return np.full(n, 1.0 / n), True
    return p / total, False


def _weighted_cov(x: np.ndarray, mu: np.ndarray, w: np.ndarray) -> np.ndarray:
    d = x - mu
    return symmetrize((d * w[:, None]).T @ d)


def covariance_weighted(
    member_ids: np.ndarray,
    points: PointSet,
    mu: np.ndarray,
    input_model: GaussianModel,
    form: str = "standard",
) -> np.ndarray:
    """Density-weighted covariance around mu.

    Each member is weighted by its density under input_model, normalized so
    the weights sum to one; members closer to the center count for more.
    If every density underflows to zero the weights fall back to uniform and
    a WeightUnderflowWarning is emitted.
    """
    ids = np.asarray(member_ids, dtype=np.int64)
    if ids.size == 0:
        raise ValueError("covariance needs at least one member")
    x = points.points[ids]
    mu = np.asarray(mu, dtype=np.float64)
    w, fell_back = _weights(x, input_model, form)
    if fell_back:
        warnings.warn(
            "all member densities underflowed; using uniform weights",
            WeightUnderflowWarning,
            stacklevel=2,
        )
    return _weighted_cov(x, mu, w)


def fit_covariance(
    member_ids: np.ndarray,
    points: PointSet,
    mu: np.ndarray,
    params: FitParams | None = None,
) -> GaussianModel:
    """Fit a cluster covariance by the smoothed self-consistent loop.

    Starts from the plain covariance, then repeatedly re-weights with the
    density under the average of the last two iterates and stops once the
    largest elementwise change falls below params.tol. The returned model
    carries the iteration count and convergence, degeneracy, and
    weight-underflow flags.
    """
    if params is None:
        params = FitParams()
    ids = np.asarray(member_ids, dtype=np.int64)
    if ids.size == 0:
        raise ValueError("cannot fit a covariance with no members")
    x = points.points[ids]
    mu = np.asarray(mu, dtype=np.float64)

    prev = curr = covariance_plain(ids, points, mu)
    iterations = 0
    converged = False
    underflow = False
    for _ in range(params.max_iter):
        smoothed = 0.5 * (curr + prev)
        input_model = GaussianModel.from_covariance(mu, smoothed, ridge=params.ridge)
        w, fell_back = _weights(x, input_model, params.density_form)
        underflow = underflow or fell_back
        nxt = _weighted_cov(x, mu, w)
        iterations += 1
        diff = float(np.max(np.abs(nxt - smoothed)))
        prev, curr = curr, nxt
        if diff < params.tol:
            converged = True
            break

    return GaussianModel.from_covariance(
        mu,
        curr,
        ridge=params.ridge,
        iterations=iterations,
        converged=converged,
        degenerate=ids.size < 2,
        weight_underflow=underflow,
    )
