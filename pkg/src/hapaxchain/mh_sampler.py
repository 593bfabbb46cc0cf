"""Metropolis-Hastings generation of rank sequences.

The chain lives on {1, ..., r_bar} with a uniform proposal, so a move
from i to j is accepted with probability min(1, F_j / F_i) where F is
the target distribution.  The exact transition kernel implied by this
rule is available in closed form, which gives two independent checks:
detailed balance holds entrywise, and power iteration on the kernel
recovers F.  A convergence study runs many seeded chains and compares
each to a reference sample with the KS statistic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .corpus import RankSequence
from .markov import TransitionMatrix1
from .ranksize import TargetDistribution
from .stats import DEFAULT_LEVELS, ks_threshold, ks_two_sample

__all__ = [
    "MHConfig",
    "MHRunResult",
    "ConvergenceReport",
    "acceptance_prob",
    "run_chain",
    "mh_transition_matrix",
    "stationary_oracle",
    "mean_acceptance_exact",
    "iid_sample",
    "convergence_study",
]


@dataclass(frozen=True)
class MHConfig:
    """Settings of one chain: length, seed, optional fixed start."""

    n_steps: int
    seed: int = 0
    initial_state: int | None = None

    def __post_init__(self):
        if self.n_steps < 1:
            raise ValueError(f"n_steps must be >= 1, got {self.n_steps}")


@dataclass(frozen=True)
class MHRunResult:
    samples: RankSequence
    accepted: int
    acceptance_rate: float


def acceptance_prob(f: TargetDistribution, i: int, j: int) -> float:
    """min(1, F_j / F_i); moves toward lower rank are always accepted."""
    return min(1.0, f.prob(j) / f.prob(i))


def run_chain(f: TargetDistribution, config: MHConfig) -> MHRunResult:
    """Generate ``n_steps`` states of the chain.

    The start is ``initial_state`` or a seeded uniform draw over the
    rank set; each step proposes j uniformly, draws u on [0, 1) and
    accepts when u <= min(1, F_j / F_x).  No burn-in is discarded.
    """
    r_bar = f.r_bar
    rng = np.random.Generator(np.random.PCG64(_as_seedseq(config.seed)))
    if config.initial_state is not None:
        if not 1 <= config.initial_state <= r_bar:
            raise ValueError(f"initial state {config.initial_state} outside 1..{r_bar}")
        current = config.initial_state - 1
    else:
        current = int(rng.integers(0, r_bar))

    n = config.n_steps
    out = np.empty(n, dtype=np.int64)
    out[0] = current
    accepted = 0
    if n > 1:
        proposals = rng.integers(0, r_bar, size=n - 1).tolist()
        us = rng.random(n - 1).tolist()
        probs = f.probs.tolist()
        for t in range(1, n):
            j = proposals[t - 1]
            # u <= min(1, F_j/F_x) without the min: u < 1 always holds.
            if us[t - 1] * probs[current] <= probs[j]:
                current = j
                accepted += 1
            out[t] = current
    rate = accepted / (n - 1) if n > 1 else 1.0
    return MHRunResult(
        samples=RankSequence(values=out + 1, alphabet_size=r_bar),
        accepted=accepted,
        acceptance_rate=rate,
    )


def mh_transition_matrix(f: TargetDistribution) -> TransitionMatrix1:
    """Exact kernel of the chain: off-diagonal (1/r_bar) * min(1, F_j/F_i),
    diagonal absorbing the rejected mass.  Satisfies detailed balance."""
    p = np.asarray(f.probs, dtype=float)
    r_bar = f.r_bar
    accept = np.minimum(1.0, p[None, :] / p[:, None])
    kernel = accept / r_bar
    off_diag_sums = kernel.sum(axis=1) - np.diag(kernel)
    np.fill_diagonal(kernel, 1.0 - off_diag_sums)
    return TransitionMatrix1(
        states=np.arange(1, r_bar + 1, dtype=np.int64),
        counts=None,
        probs=kernel,
        marginal=p.copy(),
    )


def stationary_oracle(tm: TransitionMatrix1, tol: float = 1e-13, max_iter: int = 1_000_000) -> np.ndarray:
    """Fixed point of v -> v P by power iteration from the uniform vector.

    Stops when successive iterates differ by less than ``tol`` in max
    norm; raises if the iteration cap is hit first.
    """
    p = tm.probs
    v = np.full(p.shape[0], 1.0 / p.shape[0])
    for _ in range(max_iter):
        v_next = v @ p
        v_next /= v_next.sum()
        if np.abs(v_next - v).max() < tol:
            return v_next
        v = v_next
    raise RuntimeError(f"power iteration did not converge within {max_iter} iterations")


def mean_acceptance_exact(f: TargetDistribution) -> float:
    """Stationary mean acceptance probability, sum_i F_i (1/r_bar) sum_j a(i,j)."""
    p = np.asarray(f.probs, dtype=float)
    accept = np.minimum(1.0, p[None, :] / p[:, None])
    return float(p @ accept.mean(axis=1))


def iid_sample(f: TargetDistribution, size: int, seed) -> np.ndarray:
    """Independent draws of ranks distributed according to F."""
    if size < 1:
        raise ValueError(f"size must be >= 1, got {size}")
    rng = np.random.Generator(np.random.PCG64(_as_seedseq(seed)))
    return rng.choice(np.arange(1, f.r_bar + 1), size=size, p=f.probs)


@dataclass(frozen=True)
class ConvergenceReport:
    """KS statistics of many chains against a reference sample."""

    ks_statistics: list[float]
    thresholds: dict[float, float]
    pass_fraction: dict[float, float]
    runs: int
    n_steps: int
    reference_size: int
    seed: int
    levels: tuple[float, ...]
    halve_alpha: bool


def convergence_study(
    f: TargetDistribution,
    runs: int,
    config: MHConfig,
    reference,
    levels=DEFAULT_LEVELS,
    halve_alpha: bool = True,
) -> ConvergenceReport:
    """Run independent seeded chains and KS-compare each to ``reference``.

    Run k uses the substream (config.seed, k), so the study is
    reproducible as a whole and each chain individually.
    """
    if runs < 1:
        raise ValueError(f"runs must be >= 1, got {runs}")
    reference = np.asarray(reference, dtype=float).ravel()
    if reference.size == 0:
        raise ValueError("reference sample must be non-empty")

    ks_stats = []
    for k in range(runs):
        run_cfg = MHConfig(
            n_steps=config.n_steps,
            seed=np.random.SeedSequence(entropy=config.seed, spawn_key=(k,)),
            initial_state=config.initial_state,
        )
        result = run_chain(f, run_cfg)
        ks_stats.append(ks_two_sample(result.samples.values, reference))

    thresholds = {
        lv: ks_threshold(lv, config.n_steps, reference.size, halve_alpha) for lv in levels
    }
    arr = np.asarray(ks_stats)
    pass_fraction = {lv: float((arr <= thr).mean()) for lv, thr in thresholds.items()}
    return ConvergenceReport(
        ks_statistics=ks_stats,
        thresholds=thresholds,
        pass_fraction=pass_fraction,
        runs=runs,
        n_steps=config.n_steps,
        reference_size=int(reference.size),
        seed=config.seed if isinstance(config.seed, int) else -1,
        levels=tuple(levels),
        halve_alpha=halve_alpha,
    )


def _as_seedseq(seed) -> np.random.SeedSequence:
    if isinstance(seed, np.random.SeedSequence):
        return seed
    return np.random.SeedSequence(seed)
