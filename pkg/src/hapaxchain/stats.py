"""Statistical primitives shared by the pipeline stages.

Everything in this module is a pure function of its inputs: descriptive
indicators, the two-sample Kolmogorov-Smirnov statistic with its
closed-form threshold family, a chi-square goodness-of-fit statistic,
the Wilcoxon-Mann-Whitney rank-sum test (normal approximation with tie
correction), and Shannon entropy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import chi2 as _chi2_dist

__all__ = [
    "DescriptiveStats",
    "KSResult",
    "descriptive_stats",
    "derived_indicators",
    "ks_two_sample",
    "ks_threshold",
    "ks_compare",
    "chi_square_gof",
    "chi_square_threshold",
    "wmw_test",
    "shannon_entropy",
]

DEFAULT_LEVELS = (0.05, 0.01, 0.001)


@dataclass(frozen=True)
class DescriptiveStats:
    """Descriptive indicators of a real-valued sample.

    ``variance`` uses the n-1 divisor; ``skewness`` and ``kurtosis`` are
    the population-moment versions (kurtosis is raw, not excess).  On a
    constant sample the moment ratios are undefined and reported as NaN.
    """

    n: int
    mean: float
    variance: float
    std_dev: float
    skewness: float
    kurtosis: float
    median: float
    max: float
    min: float
    rms: float
    std_error: float
    mean_over_sd: float
    pearson_skew: float


def derived_indicators(mean: float, std_dev: float, median: float, n: int) -> tuple[float, float, float]:
    """Return (mean/sd, Pearson skew 3*(mean-median)/sd, standard error).

    NaN for the first two when ``std_dev`` is zero.
    """
    if std_dev > 0.0:
        mean_over_sd = mean / std_dev
        pearson = 3.0 * (mean - median) / std_dev
    else:
        mean_over_sd = math.nan
        pearson = math.nan
    return mean_over_sd, pearson, std_dev / math.sqrt(n)


def descriptive_stats(values) -> DescriptiveStats:
    """Compute the full indicator set for a sample of size >= 2."""
    x = np.asarray(values, dtype=float)
    if x.ndim != 1:
        x = x.ravel()
    n = x.size
    if n < 2:
        raise ValueError(f"descriptive_stats requires at least 2 values, got {n}")

    mean = float(x.mean())
    variance = float(x.var(ddof=1))
    std_dev = math.sqrt(variance)
    centered = x - mean
    m2 = float(np.mean(centered**2))
    if m2 > 0.0:
        z = centered / math.sqrt(m2)  # standardizing avoids moment underflow
        skewness = float(np.mean(z**3))
        kurtosis = float(np.mean(z**4))
    else:
        skewness = math.nan
        kurtosis = math.nan
    median = float(np.median(x))
    rms = math.sqrt(float(np.mean(x**2)))
    mean_over_sd, pearson, std_error = derived_indicators(mean, std_dev, median, n)
    return DescriptiveStats(
        n=n,
        mean=mean,
        variance=variance,
        std_dev=std_dev,
        skewness=skewness,
        kurtosis=kurtosis,
        median=median,
        max=float(x.max()),
        min=float(x.min()),
        rms=rms,
        std_error=std_error,
        mean_over_sd=mean_over_sd,
        pearson_skew=pearson,
    )


def ks_two_sample(a, b) -> float:
    """Two-sample KS statistic: sup |ECDF_a - ECDF_b| over pooled values.

    Ties and discrete data are handled exactly by evaluating both ECDFs
    at every pooled sample value.
    """
    a = np.sort(np.asarray(a, dtype=float).ravel())
    b = np.sort(np.asarray(b, dtype=float).ravel())
    if a.size == 0 or b.size == 0:
        raise ValueError("ks_two_sample requires two non-empty samples")
    pooled = np.concatenate([a, b])
    cdf_a = np.searchsorted(a, pooled, side="right") / a.size
    cdf_b = np.searchsorted(b, pooled, side="right") / b.size
    return float(np.abs(cdf_a - cdf_b).max())


def ks_threshold(alpha: float, n: int, m: int, halve_alpha: bool = True) -> float:
    """Critical value sqrt(-0.5 * ln(a) * (n+m)/(n*m)) for the KS statistic.

    With ``halve_alpha`` the significance level is divided by two before
    taking the logarithm, which is the classical two-sided Smirnov
    approximation; without it the formula is applied to ``alpha`` as is.
    Both parameterizations are deliberately exposed.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must be in (0, 1), got {alpha}")
    if n < 1 or m < 1:
        raise ValueError(f"sample sizes must be >= 1, got n={n}, m={m}")
    a = alpha / 2.0 if halve_alpha else alpha
    return math.sqrt(-0.5 * math.log(a) * (n + m) / (n * m))


@dataclass(frozen=True)
class KSResult:
    """KS statistic together with its per-level thresholds and decisions."""

    statistic: float
    n: int
    m: int
    thresholds: dict[float, float]
    reject: dict[float, bool]


def ks_compare(a, b, levels=DEFAULT_LEVELS, halve_alpha: bool = True) -> KSResult:
    """Run the two-sample KS test against the threshold family."""
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    stat = ks_two_sample(a, b)
    thresholds = {lv: ks_threshold(lv, a.size, b.size, halve_alpha) for lv in levels}
    reject = {lv: stat > thr for lv, thr in thresholds.items()}
    return KSResult(statistic=stat, n=int(a.size), m=int(b.size), thresholds=thresholds, reject=reject)


def chi_square_gof(observed_counts, expected_probs) -> tuple[float, int]:
    """Chi-square goodness-of-fit statistic and degrees of freedom.

    ``expected_probs`` must sum to one (it is renormalized internally, so
    a jointly rescaled vector gives the identical statistic).  States are
    not pooled; df = number of states - 1.
    """
    obs = np.asarray(observed_counts, dtype=float).ravel()
    probs = np.asarray(expected_probs, dtype=float).ravel()
    if obs.size != probs.size:
        raise ValueError(f"state count mismatch: {obs.size} observed vs {probs.size} expected")
    total = obs.sum()
    if total <= 0:
        raise ValueError("chi_square_gof requires a positive total observed count")
    if np.any(probs < 0):
        raise ValueError("expected probabilities must be non-negative")
    psum = probs.sum()
    if psum <= 0:
        raise ValueError("expected probabilities must have a positive sum")
    probs = probs / psum
    zero_expected = probs == 0.0
    if np.any(zero_expected & (obs > 0)):
        raise ValueError("observed count in a state with zero expected probability")
    expected = probs * total
    mask = ~zero_expected
    statistic = float(((obs[mask] - expected[mask]) ** 2 / expected[mask]).sum())
    return statistic, int(obs.size - 1)


def chi_square_threshold(alpha: float, df: int) -> float:
    """Upper critical value of the chi-square distribution with ``df`` dof."""
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must be in (0, 1), got {alpha}")
    if df < 0:
        raise ValueError(f"df must be >= 0, got {df}")
    if df == 0:
        return 0.0
    return float(_chi2_dist.ppf(1.0 - alpha, df))


def _midranks(x: np.ndarray) -> np.ndarray:
    """Ranks 1..n with ties assigned the mean rank of their group."""
    order = np.argsort(x, kind="stable")
    sx = x[order]
    new_group = np.r_[True, sx[1:] != sx[:-1]]
    group = np.cumsum(new_group) - 1
    counts = np.bincount(group)
    ends = np.cumsum(counts)
    mid = ends - (counts - 1) / 2.0
    ranks = np.empty(x.size, dtype=float)
    ranks[order] = mid[group]
    return ranks


def wmw_test(a, b) -> tuple[float, float]:
    """Wilcoxon-Mann-Whitney test, two-sided.

    Uses the rank-sum U of the first sample (midrank ties), the normal
    approximation with tie-corrected variance, and a 0.5 continuity
    correction.  Returns ``(z, p)``.  When every pooled value is equal
    the variance is zero and the degenerate convention (0.0, 1.0) is
    returned.
    """
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    if a.size == 0 or b.size == 0:
        raise ValueError("wmw_test requires two non-empty samples")
    n1, n2 = a.size, b.size
    n = n1 + n2
    pooled = np.concatenate([a, b])
    ranks = _midranks(pooled)
    r1 = float(ranks[:n1].sum())
    u = r1 - n1 * (n1 + 1) / 2.0
    mu = n1 * n2 / 2.0

    _, tie_counts = np.unique(pooled, return_counts=True)
    tie_counts = tie_counts.astype(float)
    tie_term = float((tie_counts**3 - tie_counts).sum())
    variance = n1 * n2 / 12.0 * ((n + 1) - tie_term / (n * (n - 1)))
    if variance <= 0.0:
        return 0.0, 1.0

    sd = math.sqrt(variance)
    diff = u - mu
    if diff > 0:
        z = (diff - 0.5) / sd
    elif diff < 0:
        z = (diff + 0.5) / sd
    else:
        z = 0.0
    p = min(1.0, math.erfc(abs(z) / math.sqrt(2.0)))
    return z, p


def shannon_entropy(counts) -> float:
    """Shannon entropy (natural log) of a discrete count vector."""
    c = np.asarray(counts, dtype=float).ravel()
    if np.any(c < 0):
        raise ValueError("counts must be non-negative")
    total = c.sum()
    if total <= 0:
        raise ValueError("shannon_entropy requires a positive total count")
    p = c[c > 0] / total
    return float(-(p * np.log(p)).sum())
