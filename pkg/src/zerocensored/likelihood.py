"""The zero-censored Gaussian log-likelihood and its numerical maximization.

Interior points contribute ordinary normal log-densities.  A point that was
pulled to a face enters through its rotated coordinates z = B y: the density
of the non-first coordinates evaluated at zero, times the upper-tail
probability of the first coordinate beyond the rotation radius c1.  The
constant Jacobian term (n d + n/2) log D of the exponent-one transformation is
included so reported values are full data log-likelihoods; it does not move
the maximizer.

The covariance is optimized through its Cholesky factor with log-transformed
diagonal, so every parameter vector maps to an SPD matrix and the search is
unconstrained apart from a +/-30 safety bound on the log-diagonal entries.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular
from scipy.optimize import minimize
from scipy.special import log_ndtr

from .dataset import TransformedSample
from .gaussian import (
    LOG_2PI,
    MvnParams,
    NotPositiveDefiniteError,
    cholesky,
    conditional_split,
    mvn_logpdf,
    std_normal_log_tail,
)

#: Safety bound on the log-diagonal coordinates of the packed Cholesky factor.
LOG_DIAG_BOUND = 30.0


class ParameterBoundError(RuntimeError):
    """Raised when the optimizer drives a log-diagonal coordinate onto the safety bound."""


def pack_params(mean, cov) -> np.ndarray:
    """Pack (mean, SPD cov) into one unconstrained vector of length d + d(d+1)/2.

    Layout: mean entries, then the lower triangle of the Cholesky factor in
    row-major order with the diagonal log-transformed.
    """
    mean = np.asarray(mean, dtype=float)
    chol = cholesky(cov)
    d = mean.size
    tri = chol[np.tril_indices(d)].copy()
    diag_pos = _diag_positions(d)
    tri[diag_pos] = np.log(tri[diag_pos])
    return np.concatenate([mean, tri])


def unpack_params(theta, dim: int) -> tuple[np.ndarray, np.ndarray]:
    """Invert ``pack_params``: returns (mean, cov) with cov SPD by construction."""
    mean, chol = _unpack_chol(theta, dim)
    return mean, chol @ chol.T


def _diag_positions(d: int) -> np.ndarray:
    rows, cols = np.tril_indices(d)
    return np.flatnonzero(rows == cols)


def _unpack_chol(theta, dim: int) -> tuple[np.ndarray, np.ndarray]:
    theta = np.asarray(theta, dtype=float)
    expected = dim + dim * (dim + 1) // 2
    if theta.shape != (expected,):
        raise ValueError(f"packed vector must have length {expected}, got shape {theta.shape}")
    tri = theta[dim:].copy()
    diag_pos = _diag_positions(dim)
    # Allow the finite-difference probes to peek just past the optimizer bound.
    if np.any(np.abs(tri[diag_pos]) > LOG_DIAG_BOUND + 1e-3):
        raise ParameterBoundError("log-diagonal coordinate beyond the +/-30 safety bound")
    tri[diag_pos] = np.exp(tri[diag_pos])
    chol = np.zeros((dim, dim))
    chol[np.tril_indices(dim)] = tri
    return theta[:dim].copy(), chol


def boundary_term(rotation, radius: float, mean, cov) -> float:
    """Censored log-contribution of one face point with rotation data (B, c1).

    Computes mu_z = B mu and Sigma_z = B Sigma B^T, splits off the first
    rotated coordinate, and returns the marginal log-density of the remaining
    coordinates at zero plus log(1 - Phi((c1 - cond_mean) / cond_sd)).
    """
    b = np.asarray(rotation, dtype=float)
    c1 = float(radius)
    if c1 <= 0.0:
        raise ValueError(f"rotation radius must be positive, got {c1!r}")
    mean = np.asarray(mean, dtype=float)
    cov = np.asarray(cov, dtype=float)
    mu_z = b @ mean
    sig_z = b @ cov @ b.T
    sig_z = 0.5 * (sig_z + sig_z.T)  # rotation leaves eps-level asymmetry
    d = mu_z.size
    if d == 1:
        sd = math.sqrt(float(sig_z[0, 0]))
        return std_normal_log_tail((c1 - float(mu_z[0])) / sd)
    split = conditional_split(MvnParams(mu_z, sig_z))
    marginal = mvn_logpdf(np.zeros(d - 1), MvnParams(split.marginal_mean, split.marginal_cov))
    tail = std_normal_log_tail((c1 - split.cond_mean_at_zero) / math.sqrt(split.cond_var))
    return float(marginal + tail)


def _boundary_terms(rotations: np.ndarray, radii: np.ndarray, mean: np.ndarray, cov: np.ndarray) -> np.ndarray:
    """Vectorized ``boundary_term`` over a stack of face points."""
    mu_z = rotations @ mean  # (n2, d)
    sig_z = np.einsum("nij,jk,nlk->nil", rotations, cov, rotations, optimize=True)
    d = mu_z.shape[1]
    if d == 1:
        sd = np.sqrt(sig_z[:, 0, 0])
        return log_ndtr(-(radii - mu_z[:, 0]) / sd)
    marg_cov = sig_z[:, 1:, 1:]
    try:
        chol_m = np.linalg.cholesky(marg_cov)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefiniteError("rotated marginal covariance is not positive definite") from exc
    k = d - 1
    w = np.linalg.solve(chol_m, -mu_z[:, 1:, None])[..., 0]
    log_det = 2.0 * np.sum(np.log(np.diagonal(chol_m, axis1=1, axis2=2)), axis=1)
    marginal = -0.5 * (k * LOG_2PI + log_det + np.sum(w * w, axis=1))
    cross = sig_z[:, 0, 1:]
    half = np.linalg.solve(chol_m, cross[..., None])
    weights = np.linalg.solve(np.transpose(chol_m, (0, 2, 1)), half)[..., 0]
    cond_mean = mu_z[:, 0] - np.einsum("nk,nk->n", weights, mu_z[:, 1:])
    cond_var = sig_z[:, 0, 0] - np.einsum("nk,nk->n", weights, cross)
    if np.any(cond_var <= 0.0):
        raise NotPositiveDefiniteError("conditional variance is not positive")
    return marginal + log_ndtr(-(radii - cond_mean) / np.sqrt(cond_var))


def log_likelihood(sample: TransformedSample, mean, cov) -> float:
    """Full zero-censored log-likelihood of a transformed sample at (mean, cov).

    Equals -(n1/2) log|2 pi Sigma| minus half the interior quadratic forms,
    plus the face-point boundary terms, plus (n d + n/2) log D.  Summation is
    NumPy pairwise over fixed-shape arrays, so values are reproducible for a
    given sample ordering.
    """
    mean = np.asarray(mean, dtype=float)
    cov = np.asarray(cov, dtype=float)
    if sample.n_obs == 0:
        raise ValueError("empty sample")
    if mean.shape != (sample.dim,) or cov.shape != (sample.dim, sample.dim):
        raise ValueError("parameter dimensions do not match the sample")
    chol = cholesky(cov)
    return _log_likelihood_chol(sample, mean, chol, cov)


def _log_likelihood_chol(sample: TransformedSample, mean: np.ndarray, chol: np.ndarray, cov: np.ndarray) -> float:
    d = sample.dim
    n1 = sample.n_interior
    n2 = sample.n_face
    n = n1 + n2
    total = (n * d + 0.5 * n) * math.log(sample.n_parts)
    if n1:
        log_det = 2.0 * float(np.sum(np.log(np.diag(chol))))
        resid = sample.interior - mean
        w = solve_triangular(chol, resid.T, lower=True)
        total += -0.5 * n1 * (d * LOG_2PI + log_det) - 0.5 * float(np.sum(w * w))
    if n2:
        total += float(np.sum(_boundary_terms(sample.rotations, sample.radii, mean, cov)))
    return total


def numerical_gradient(fun, theta, *, rel_step: float = 1e-6) -> np.ndarray:
    """Central-difference gradient with per-coordinate step rel_step * (1 + |theta_i|)."""
    theta = np.asarray(theta, dtype=float)
    grad = np.empty(theta.size)
    for i in range(theta.size):
        h = rel_step * (1.0 + abs(theta[i]))
        up = theta.copy()
        up[i] += h
        down = theta.copy()
        down[i] -= h
        grad[i] = (fun(up) - fun(down)) / (2.0 * h)
    return grad


@dataclass(frozen=True)
class FittedModel:
    """Maximum-likelihood estimate with convergence metadata.

    ``trace`` holds the log-likelihood at the initial point and after each
    optimizer iteration.  ``seed`` records data provenance when the fitted
    sample was simulated; it is None for real data.
    """

    mean: np.ndarray
    cov: np.ndarray
    loglik: float
    iterations: int
    converged: bool
    gradient_norm: float
    n_parts: int
    n_interior: int
    n_face: int
    trace: tuple[float, ...] = field(default=(), repr=False)
    seed: int | None = None

    @property
    def params(self) -> MvnParams:
        return MvnParams(self.mean, self.cov)

    @property
    def dim(self) -> int:
        return int(self.mean.size)

    def to_dict(self) -> dict:
        return {
            "mean": [float(v) for v in self.mean],
            "cov": [[float(v) for v in row] for row in self.cov],
            "loglik": float(self.loglik),
            "converged": bool(self.converged),
            "iterations": int(self.iterations),
            "D": int(self.n_parts),
            "n1": int(self.n_interior),
            "n2": int(self.n_face),
            "seed": None if self.seed is None else int(self.seed),
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_dict(cls, doc: dict) -> "FittedModel":
        return cls(
            mean=np.asarray(doc["mean"], dtype=float),
            cov=np.asarray(doc["cov"], dtype=float),
            loglik=float(doc["loglik"]),
            iterations=int(doc["iterations"]),
            converged=bool(doc["converged"]),
            gradient_norm=float(doc.get("gradient_norm", math.nan)),
            n_parts=int(doc["D"]),
            n_interior=int(doc["n1"]),
            n_face=int(doc["n2"]),
            seed=doc.get("seed"),
        )

    @classmethod
    def from_json(cls, text: str) -> "FittedModel":
        return cls.from_dict(json.loads(text))


def fit(
    sample: TransformedSample,
    *,
    max_iter: int = 5000,
    gradient_tol: float = 1e-6,
    loglik_rel_tol: float = 1e-10,
    ridge: float = 1e-8,
    seed: int | None = None,
) -> FittedModel:
    """Maximize the censored log-likelihood over (mean, cov) by L-BFGS-B.

    Gradients are central finite differences (step 1e-6 * (1 + |theta|)).
    The start point is the sample mean and covariance (1/n convention) of all
    transformed points, face vectors included as-is; the covariance gets a
    +ridge * I bump if it is numerically singular.  Convergence means the
    projected gradient inf-norm fell below ``gradient_tol`` or the relative
    log-likelihood change fell below ``loglik_rel_tol``; hitting ``max_iter``
    returns ``converged=False`` rather than raising.
    """
    d = sample.dim
    n1 = sample.n_interior
    if sample.n_obs == 0:
        raise ValueError("empty sample")
    if n1 < d + 1:
        warnings.warn(
            f"only {n1} interior points for dimension {d}; covariance may be unidentifiable",
            stacklevel=2,
        )

    points = np.vstack([sample.interior, sample.face])
    mean0 = points.mean(axis=0)
    resid = points - mean0
    cov0 = resid.T @ resid / points.shape[0]
    try:
        cholesky(cov0)
    except NotPositiveDefiniteError:
        cov0 = cov0 + ridge * np.eye(d)
        cholesky(cov0)  # give up if still singular
    theta0 = pack_params(mean0, cov0)

    def negloglik(theta: np.ndarray) -> float:
        mean, chol = _unpack_chol(theta, d)
        try:
            return -_log_likelihood_chol(sample, mean, chol, chol @ chol.T)
        except NotPositiveDefiniteError:
            return 1e300  # unreachable under the log-Cholesky map; belt and braces

    best_theta = theta0.copy()
    best_value = negloglik(theta0)

    def objective(theta: np.ndarray) -> float:
        nonlocal best_theta, best_value
        value = negloglik(theta)
        if value < best_value:
            best_value = value
            best_theta = np.array(theta)
        return value

    def gradient(theta: np.ndarray) -> np.ndarray:
        return numerical_gradient(negloglik, theta)

    trace = [-best_value]

    def record(theta: np.ndarray) -> None:
        trace.append(-negloglik(theta))

    bounds = [(None, None)] * theta0.size
    for pos in _diag_positions(d):
        bounds[d + pos] = (-LOG_DIAG_BOUND, LOG_DIAG_BOUND)

    result = minimize(
        objective,
        theta0,
        jac=gradient,
        method="L-BFGS-B",
        bounds=bounds,
        callback=record,
        options={
            "maxiter": max_iter,
            "maxfun": 50 * max_iter,
            "ftol": loglik_rel_tol,
            "gtol": gradient_tol,
            "maxls": 60,
        },
    )
    if negloglik(result.x) <= best_value:
        best_value = negloglik(result.x)
        best_theta = np.array(result.x)

    tri = best_theta[d:]
    if np.any(np.abs(tri[_diag_positions(d)]) >= LOG_DIAG_BOUND - 1e-6):
        raise ParameterBoundError(
            "optimum hit the +/-30 log-diagonal bound; the covariance scale is degenerate"
        )

    mean_hat, cov_hat = unpack_params(best_theta, d)
    grad_norm = float(np.max(np.abs(numerical_gradient(negloglik, best_theta))))
    return FittedModel(
        mean=mean_hat,
        cov=cov_hat,
        loglik=-best_value,
        iterations=int(result.nit),
        converged=bool(result.success),
        gradient_norm=grad_norm,
        n_parts=sample.n_parts,
        n_interior=n1,
        n_face=sample.n_face,
        trace=tuple(trace),
        seed=seed,
    )
