"""Zipf-Mandelbrot rank-size law: evaluation, least-squares fitting, and
discretization into a probability vector over a bounded rank set.

The law is s = f(r) = alpha / (beta + r)^gamma with alpha > 0, gamma > 0
and beta > -1, so f is defined, positive and strictly decreasing on
r >= 1.  Fitting minimizes the untransformed residual sum of squares
with a damped Gauss-Newton (Levenberg-Marquardt) iteration; the free
parameters live in an internal log space (log alpha, log(1+beta),
log gamma) which keeps every iterate inside the valid domain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import t as _t_dist

__all__ = [
    "ZMParams",
    "FitConfig",
    "FitInternals",
    "FitResult",
    "TargetDistribution",
    "ParameterDomainError",
    "FitConvergenceError",
    "UnidentifiableParameterError",
    "zm_eval",
    "fit_zm",
    "confidence_intervals",
    "target_distribution",
]

PARAM_NAMES = ("alpha", "beta", "gamma")


class ParameterDomainError(ValueError):
    """Raised when rank-size parameters leave their valid domain."""


class FitConvergenceError(RuntimeError):
    """Raised when the fit iteration cap is reached before convergence.

    Carries the best parameters seen so far plus diagnostics.
    """

    def __init__(self, message: str, best_params: "ZMParams", rss: float, n_iter: int):
        super().__init__(message)
        self.best_params = best_params
        self.rss = rss
        self.n_iter = n_iter


class UnidentifiableParameterError(RuntimeError):
    """Raised when the normal equations are singular and no confidence
    interval can be attached to the point estimates."""


@dataclass(frozen=True)
class ZMParams:
    """Parameters of the law s = alpha / (beta + r)^gamma."""

    alpha: float
    beta: float
    gamma: float

    def __post_init__(self):
        if not (math.isfinite(self.alpha) and self.alpha > 0):
            raise ParameterDomainError(f"alpha must be positive, got {self.alpha}")
        if not (math.isfinite(self.gamma) and self.gamma > 0):
            raise ParameterDomainError(f"gamma must be positive, got {self.gamma}")
        if not (math.isfinite(self.beta) and self.beta + 1 > 0):
            raise ParameterDomainError(f"beta must exceed -1, got {self.beta}")


def zm_eval(params: ZMParams, r) -> float:
    """Evaluate the law at rank ``r`` (scalar or array, every entry >= 1)."""
    r_arr = np.asarray(r, dtype=float)
    if np.any(r_arr < 1):
        raise ParameterDomainError(f"rank must be >= 1, got {r}")
    out = params.alpha / (params.beta + r_arr) ** params.gamma
    if np.isscalar(r) or r_arr.ndim == 0:
        return float(out)
    return out


@dataclass(frozen=True)
class TargetDistribution:
    """Discrete probability vector over ranks 1..r_bar, decreasing in rank."""

    probs: np.ndarray
    r_bar: int

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        if p.size != self.r_bar:
            raise ValueError(f"probs length {p.size} != r_bar {self.r_bar}")
        if np.any(p <= 0):
            raise ValueError("target probabilities must all be positive")
        if abs(p.sum() - 1.0) > 1e-12:
            raise ValueError(f"target probabilities sum to {p.sum()!r}, not 1")
        if p.size > 1 and np.any(np.diff(p) >= 0):
            raise ValueError("target probabilities must be strictly decreasing in rank")

    def prob(self, r: int) -> float:
        if not 1 <= r <= self.r_bar:
            raise ValueError(f"rank {r} outside 1..{self.r_bar}")
        return float(self.probs[r - 1])


def target_distribution(params: ZMParams, r_bar: int) -> TargetDistribution:
    """Normalize f over ranks 1..r_bar: probs[r] = f(r) / sum_h f(h)."""
    if r_bar < 1:
        raise ValueError(f"r_bar must be >= 1, got {r_bar}")
    f = zm_eval(params, np.arange(1, r_bar + 1))
    f = np.atleast_1d(np.asarray(f, dtype=float))
    total = f.sum()
    if not math.isfinite(total) or total <= 0:
        raise ValueError("normalizer of the target distribution underflowed")
    return TargetDistribution(probs=f / total, r_bar=int(r_bar))


@dataclass(frozen=True)
class FitConfig:
    """Deterministic fit settings: damping schedule and stopping rules."""

    max_iter: int = 500
    rel_tol: float = 1e-10
    damping_init: float = 1e-3
    damping_up: float = 10.0
    damping_down: float = 10.0


@dataclass(frozen=True)
class FitInternals:
    """Solution-point quantities needed for interval construction."""

    params: "ZMParams"
    jacobian: np.ndarray  # d f / d (alpha, beta, gamma) at the solution, n x 3
    residuals: np.ndarray
    n_points: int


@dataclass(frozen=True)
class FitResult:
    params: ZMParams
    ci: dict[str, tuple[float, float]]
    level: float
    rss: float
    r_squared: float
    n_points: int
    n_iter: int
    ill_conditioned: bool = False
    internals: FitInternals | None = field(repr=False, default=None)


def _model_and_jacobian_log(theta: np.ndarray, r: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Model values and Jacobian wrt (log alpha, log(1+beta), log gamma)."""
    a, b, g = theta
    alpha = math.exp(a)
    beta_p1 = math.exp(b)  # beta + 1, positive by construction
    gamma = math.exp(g)
    denom = beta_p1 + (r - 1.0)  # = beta + r, always > 0
    f = alpha * denom ** (-gamma)
    jac = np.empty((r.size, 3))
    jac[:, 0] = f
    jac[:, 1] = -gamma * f * beta_p1 / denom
    jac[:, 2] = -gamma * f * np.log(denom)
    return f, jac


def _theta_to_params(theta: np.ndarray) -> ZMParams:
    return ZMParams(
        alpha=math.exp(theta[0]),
        beta=math.exp(theta[1]) - 1.0,
        gamma=math.exp(theta[2]),
    )


def _initial_theta(ranks: np.ndarray, sizes: np.ndarray) -> np.ndarray:
    # Pure-Zipf starting point: gamma from the log-log slope, beta = 0,
    # alpha matched to the first data point.
    slope = np.polyfit(np.log(ranks), np.log(sizes), 1)[0]
    gamma0 = max(-slope, 1e-3)
    alpha0 = sizes[0] * ranks[0] ** gamma0
    return np.array([math.log(alpha0), 0.0, math.log(gamma0)])


def fit_zm(points, level: float = 0.95, config: FitConfig | None = None) -> FitResult:
    """Least-squares fit of the rank-size law to (rank, size) points.

    Needs at least 4 points with strictly increasing positive integer
    ranks and positive sizes.  Returns a :class:`FitResult` whose
    confidence intervals are Student-t based at ``level``.  Degenerate
    data that leaves parameters unidentifiable yields a result flagged
    ``ill_conditioned`` with NaN intervals; exhausting the iteration cap
    raises :class:`FitConvergenceError` carrying the best point so far.
    """
    if config is None:
        config = FitConfig()
    pts = np.asarray(list(points), dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("points must be (rank, size) pairs")
    ranks = pts[:, 0]
    sizes = pts[:, 1]
    if ranks.size < 4:
        raise ValueError(f"need at least 4 points, got {ranks.size}")
    if np.any(ranks < 1) or np.any(ranks != np.round(ranks)):
        raise ValueError("ranks must be positive integers")
    if np.any(np.diff(ranks) <= 0):
        raise ValueError("ranks must be strictly increasing")
    if np.any(sizes <= 0):
        raise ValueError("sizes must be positive")
    if not 0.0 < level < 1.0:
        raise ValueError(f"confidence level must be in (0, 1), got {level}")

    theta = _initial_theta(ranks, sizes)
    f, jac = _model_and_jacobian_log(theta, ranks)
    residuals = sizes - f
    rss = float(residuals @ residuals)
    damping = config.damping_init

    converged = False
    n_iter = 0
    for n_iter in range(1, config.max_iter + 1):
        jtj = jac.T @ jac
        jtr = jac.T @ residuals
        step_ok = False
        # Inner damping search: raise damping until a step reduces the rss.
        for _ in range(60):
            lhs = jtj + damping * np.diag(np.diag(jtj))
            try:
                delta = np.linalg.solve(lhs, jtr)
            except np.linalg.LinAlgError:
                damping *= config.damping_up
                continue
            theta_new = theta + delta
            if np.any(np.abs(theta_new) > 700):  # exp overflow guard
                damping *= config.damping_up
                continue
            f_new, jac_new = _model_and_jacobian_log(theta_new, ranks)
            residuals_new = sizes - f_new
            rss_new = float(residuals_new @ residuals_new)
            if math.isfinite(rss_new) and rss_new <= rss:
                step_ok = True
                break
            damping *= config.damping_up
        if not step_ok:
            # No downhill direction at any damping: local minimum.
            converged = True
            break
        improvement = rss - rss_new
        theta, f, jac, residuals = theta_new, f_new, jac_new, residuals_new
        rss_prev, rss = rss, rss_new
        damping = max(damping / config.damping_down, 1e-15)
        if rss == 0.0 or improvement <= config.rel_tol * max(rss_prev, 1e-300):
            converged = True
            break

    params = _theta_to_params(theta)
    if not converged:
        raise FitConvergenceError(
            f"no convergence within {config.max_iter} iterations (rss={rss:.6g})",
            best_params=params,
            rss=rss,
            n_iter=n_iter,
        )

    denom = params.beta + ranks
    jac_orig = np.empty((ranks.size, 3))
    jac_orig[:, 0] = f / params.alpha
    jac_orig[:, 1] = -params.gamma * f / denom
    jac_orig[:, 2] = -f * np.log(denom)
    internals = FitInternals(
        params=params, jacobian=jac_orig, residuals=residuals, n_points=int(ranks.size)
    )

    tss = float(((sizes - sizes.mean()) ** 2).sum())
    ill = tss == 0.0  # constant sizes pin the fit to the gamma -> 0 boundary
    r_squared = 1.0 - rss / tss if tss > 0 else math.nan
    if not ill:
        try:
            ci = confidence_intervals(internals, level)
        except UnidentifiableParameterError:
            ill = True
    if ill:
        ci = {name: (math.nan, math.nan) for name in PARAM_NAMES}

    return FitResult(
        params=params,
        ci=ci,
        level=level,
        rss=rss,
        r_squared=r_squared,
        n_points=int(ranks.size),
        n_iter=n_iter,
        ill_conditioned=ill,
        internals=internals,
    )


def confidence_intervals(internals: FitInternals, level: float) -> dict[str, tuple[float, float]]:
    """Symmetric t-based intervals around the point estimates.

    The covariance is the Jacobian-based one, s^2 (J'J)^-1 with
    s^2 = rss / (n - 3).  Columns are rescaled before inversion so the
    singularity check reflects genuine collinearity rather than the very
    different natural scales of the three parameters.
    """
    if not 0.0 < level < 1.0:
        raise ValueError(f"confidence level must be in (0, 1), got {level}")
    jac = internals.jacobian
    n, p = jac.shape
    if n <= p:
        raise UnidentifiableParameterError(f"{n} points cannot identify {p} parameters")
    col_scale = np.linalg.norm(jac, axis=0)
    if np.any(col_scale == 0) or not np.all(np.isfinite(col_scale)):
        raise UnidentifiableParameterError("unidentifiable parameter: degenerate Jacobian column")
    jac_scaled = jac / col_scale
    jtj = jac_scaled.T @ jac_scaled
    if np.linalg.cond(jtj) > 1e12:
        raise UnidentifiableParameterError("unidentifiable parameter: singular normal equations")
    cov_scaled = np.linalg.inv(jtj)
    rss = float(internals.residuals @ internals.residuals)
    s2 = rss / (n - p)
    half = _t_dist.ppf(1.0 - (1.0 - level) / 2.0, n - p) * np.sqrt(s2 * np.diag(cov_scaled)) / col_scale
    point = internals.params
    estimates = (point.alpha, point.beta, point.gamma)
    return {name: (est - h, est + h) for name, est, h in zip(PARAM_NAMES, estimates, half)}
