"""Gaussian-process regression over behavior space with a caller-supplied prior mean.

The posterior mean starts from the prior and corrects it with a kernel
regression on the residuals (measured minus prior) of the observations:

    mu(x)  = prior(x) + k(x)' K^-1 (P - prior(chi_1..t))
    var(x) = k(x,x) - k(x)' K^-1 k(x)
    K      = [k(chi_i, chi_j)] + noise_var * I

The kernel is Matern with smoothness fixed at 5/2 and length scale ``rho``.
With a constant prior this reduces to classic GP regression. States are
immutable after fit; queries are safe to run concurrently. Refits happen
from scratch on each new observation (observation counts stay tiny, so the
cubic factorization cost is negligible).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.linalg import cho_factor, cho_solve, LinAlgError
from scipy.spatial.distance import cdist

SQRT5 = np.sqrt(5.0)

# Diagonal jitter ladder tried in order when the factorization fails.
JITTERS = (0.0, 1e-10, 1e-9, 1e-8, 1e-7, 1e-6)

PriorFn = Callable[[np.ndarray], float]


class IllConditionedKernelError(RuntimeError):
    """Factorization failed even at maximum jitter."""

    def __init__(self, message: str, cond_estimate: float):
        super().__init__(message)
        self.cond_estimate = cond_estimate


@dataclass(frozen=True)
class KernelParams:
    """Matern-5/2 kernel parameters.

    ``signal_var`` scales the prior variance k(x,x); it stays 1.0 except in
    constant-variance mode, where the caller supplies the variance level.
    """

    rho: float
    signal_var: float = 1.0

    def __post_init__(self):
        if not self.rho > 0:
            raise ValueError(f"rho must be positive, got {self.rho}")
        if not self.signal_var > 0:
            raise ValueError(f"signal_var must be positive, got {self.signal_var}")


def matern52(x1, x2, rho: float) -> float:
    """Unit-variance Matern-5/2 covariance of two points.

    Returns (1 + sqrt(5) d/rho + 5 d^2 / (3 rho^2)) * exp(-sqrt(5) d/rho)
    with d the Euclidean distance; 1.0 exactly at d=0.
    """
    a = np.asarray(x1, dtype=float)
    b = np.asarray(x2, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    if not rho > 0:
        raise ValueError("rho must be positive")
    d = float(np.linalg.norm(a - b))
    return float(matern52_from_dist(np.array(d), rho))


def matern52_from_dist(d: np.ndarray, rho: float) -> np.ndarray:
    s = (SQRT5 / rho) * d
    return (1.0 + s + s * s / 3.0) * np.exp(-s)


def matern52_matrix(X1: np.ndarray, X2: np.ndarray, rho: float) -> np.ndarray:
    return matern52_from_dist(cdist(X1, X2), rho)


@dataclass(frozen=True)
class Observation:
    """One tested behavior: descriptor, measured performance, prior there."""

    chi: np.ndarray
    measured: float
    prior_at_chi: float


@dataclass(frozen=True)
class GpState:
    """Fitted GP, ready for posterior queries."""

    kernel: KernelParams
    noise_var: float
    observations: tuple[Observation, ...]
    prior: PriorFn | float
    X: np.ndarray | None  # (t, d) observation descriptors
    _cho: tuple | None
    _alpha: np.ndarray | None  # K^-1 residuals
    jitter: float
    cond_estimate: float

    @property
    def n_obs(self) -> int:
        return len(self.observations)


def _prior_at(prior: PriorFn | float, x: np.ndarray) -> float:
    if callable(prior):
        return float(prior(x))
    return float(prior)


def fit(
    prior: PriorFn | float,
    observations: Sequence[Observation],
    noise_var: float,
    kernel: KernelParams,
) -> GpState:
    """Build and factorize the observation covariance.

    The symmetric positive-definite factorization escalates diagonal jitter
    (1e-10 up to 1e-6 in decade steps) before giving up with an
    IllConditionedKernelError carrying a condition estimate.
    """
    if not noise_var > 0:
        raise ValueError(f"noise_var must be positive, got {noise_var}")
    obs = tuple(observations)
    if not obs:
        return GpState(
            kernel=kernel,
            noise_var=noise_var,
            observations=obs,
            prior=prior,
            X=None,
            _cho=None,
            _alpha=None,
            jitter=0.0,
            cond_estimate=1.0,
        )
    X = np.array([np.asarray(o.chi, dtype=float) for o in obs])
    if not np.all(np.isfinite(X)):
        raise ValueError("observation descriptors must be finite")
    residuals = np.array([o.measured - o.prior_at_chi for o in obs])
    if not np.all(np.isfinite(residuals)):
        raise ValueError("observation values must be finite")
    K = kernel.signal_var * matern52_matrix(X, X, kernel.rho)
    K[np.diag_indices_from(K)] += noise_var
    for jitter in JITTERS:
        try:
            cho = cho_factor(K + jitter * np.eye(len(K)), lower=True)
        except LinAlgError:
            continue
        alpha = cho_solve(cho, residuals)
        return GpState(
            kernel=kernel,
            noise_var=noise_var,
            observations=obs,
            prior=prior,
            X=X,
            _cho=cho,
            _alpha=alpha,
            jitter=jitter,
            cond_estimate=float(np.linalg.cond(K)),
        )
    cond = float(np.linalg.cond(K))
    raise IllConditionedKernelError(
        f"kernel matrix not positive definite at max jitter {JITTERS[-1]:g} "
        f"(condition estimate {cond:.3e})",
        cond_estimate=cond,
    )


def posterior(state: GpState, x) -> tuple[float, float]:
    """Posterior (mean, variance) at one point; variance clamped to >= 0."""
    xq = np.atleast_2d(np.asarray(x, dtype=float))
    mu, var = posterior_batch(state, xq)
    return float(mu[0]), float(var[0])


def posterior_batch(
    state: GpState,
    X: np.ndarray,
    prior_values: np.ndarray | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Posterior means and variances for a (n, d) batch of query points.

    ``prior_values`` overrides evaluation of the state's prior, which lets
    callers with precomputed per-cell priors avoid n Python calls.
    """
    Xq = np.asarray(X, dtype=float)
    if Xq.ndim != 2:
        raise ValueError(f"expected a (n, d) query batch, got shape {Xq.shape}")
    if prior_values is None:
        pv = np.array([_prior_at(state.prior, row) for row in Xq])
    else:
        pv = np.asarray(prior_values, dtype=float)
        if pv.shape != (len(Xq),):
            raise ValueError("prior_values must align with the query batch")
    sv = state.kernel.signal_var
    if state.n_obs == 0:
        return pv.copy(), np.full(len(Xq), sv)
    kxs = sv * matern52_matrix(Xq, state.X, state.kernel.rho)  # (n, t)
    mu = pv + kxs @ state._alpha
    v = cho_solve(state._cho, kxs.T, check_finite=False)  # K^-1 k per query
    var = sv - np.einsum("ij,ji->i", kxs, v)
    np.clip(var, 0.0, None, out=var)
    return mu, var
