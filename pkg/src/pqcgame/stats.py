"""Small-sample benchmark statistics."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

MAX_WILCOXON_PAIRS = 20


@dataclass(frozen=True)
class SummaryStats:
    mean: float
    sd: float
    median: float
    min: float
    max: float
    n: int


def _as_sample(xs) -> np.ndarray:
    xs = np.asarray(xs, dtype=float).reshape(-1)
    if xs.size == 0:
        raise ValueError("empty sample")
    return xs


def summarize(xs) -> SummaryStats:
    xs = _as_sample(xs)
    n = xs.size
    mean = math.fsum(xs) / n
    sd = math.sqrt(math.fsum((xs - mean) ** 2) / (n - 1)) if n > 1 else 0.0
    return SummaryStats(mean, sd, float(np.median(xs)), float(xs.min()), float(xs.max()), n)


def bootstrap_ci(xs, level: float = 0.95, resamples: int = 10_000, rng_seed: int = 0):
    """Percentile bootstrap interval for the mean."""
    xs = _as_sample(xs)
    if not 0 < level < 1:
        raise ValueError("level must lie in (0, 1)")
    rng = np.random.default_rng(rng_seed)
    idx = rng.integers(0, xs.size, size=(resamples, xs.size))
    means = xs[idx].mean(axis=1)
    alpha = (1 - level) / 2
    lo, hi = np.quantile(means, [alpha, 1 - alpha])
    return float(lo), float(hi)


def _avg_ranks(values: np.ndarray) -> np.ndarray:
    order = np.argsort(values, kind="stable")
    ranks = np.empty(values.size)
    i = 0
    while i < values.size:
        j = i
        while j + 1 < values.size and values[order[j + 1]] == values[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2 + 1
        i = j + 1
    return ranks


def signed_rank_statistic(d) -> tuple[float, np.ndarray]:
    """``W+`` and the average ranks of ``|d|`` after dropping zeros."""
    d = np.asarray(d, dtype=float)
    d = d[d != 0]
    ranks = _avg_ranks(np.abs(d))
    return float(ranks[d > 0].sum()), ranks


def wilcoxon_paired_onesided(a, b) -> float:
    """Exact one-sided signed-rank p-value for H1: ``a > b``."""
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError("paired samples must have equal length")
    d = a - b
    w_plus, ranks = signed_rank_statistic(d)
    m = ranks.size
    if m == 0:
        raise ValueError("all paired differences are zero")
    if m > MAX_WILCOXON_PAIRS:
        raise ValueError(f"exact enumeration supports at most {MAX_WILCOXON_PAIRS} non-zero pairs, got {m}")
    # count sign patterns whose W+ is at least the observed one; ranks are
    # multiples of 1/2 so doubling keeps everything integral
    r2 = np.rint(2 * ranks).astype(np.int64)
    target = int(round(2 * w_plus))
    counts = {0: 1}
    for r in r2:
        nxt = dict(counts)
        for s, c in counts.items():
            nxt[s + r] = nxt.get(s + r, 0) + c
        counts = nxt
    hits = sum(c for s, c in counts.items() if s >= target)
    return hits / 2**m


def cohens_dz(a, b) -> float:
    d = np.asarray(a, dtype=float) - np.asarray(b, dtype=float)
    if d.size < 2:
        raise ValueError("need at least two pairs")
    if np.ptp(d) == 0:
        raise ValueError("paired differences are constant; d_z is undefined")
    s = summarize(d)
    return s.mean / s.sd
