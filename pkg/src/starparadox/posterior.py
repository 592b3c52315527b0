"""Monte Carlo posteriors over resolved trees from star-tree data.

The posterior ratio between two resolved trees given pattern counts is the
ratio of prior expectations of the likelihood kernels

    K_i = P0^n0 * P1^n_i * P2^(n - n0 - n_i),        i in {1, 2, 3},

so everything reduces to estimating E[K_i] by averaging over prior draws.
Kernels underflow at sequence lengths of a few hundred, so all accumulation
happens in log scale with streaming log-sum-exp.

Reproducibility contract: work is split into fixed-size chunks, each chunk
draws from a substream seeded by (seed, tag, chunk index), and reduction
folds the per-chunk partials in ascending chunk order.  Results are
therefore bit-identical for any worker count.  The three trees share draws
(common random numbers), which makes equal counts give exactly equal
estimates and shrinks the variance of ratios.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .model import PatternCounts, PatternProbs, log_pattern_prob_arrays, star_probs
from .priors import Prior

__all__ = [
    "DegenerateEstimate",
    "LogMeanResult",
    "PosteriorEstimate",
    "ParadoxResult",
    "simulate_counts",
    "log_likelihood_kernel",
    "kernel_log_values",
    "expected_kernel",
    "tree_posterior",
    "paradox_scan",
    "wilson_interval",
]

DRAW_CHUNK = 8192
TRIAL_CHUNK = 64

_TAG_KERNEL = 1
_TAG_SCAN = 2


class DegenerateEstimate(RuntimeError):
    """Every sampled kernel value was zero; the log-mean is undefined."""


def _chunk_rng(seed: int, tag: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), tag, index]))


def simulate_counts(t: float, n: int, seed) -> PatternCounts:
    """Multinomial(n, star pattern probabilities at t); deterministic given seed."""
    if n < 1:
        raise ValueError("sequence length n must be >= 1")
    q = star_probs(t)
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    draw = rng.multinomial(n, q.array)
    return PatternCounts(*map(int, draw))


def log_likelihood_kernel(counts: PatternCounts, probs: PatternProbs, tree: int) -> float:
    """log of P0^n0 P1^n_tree P2^(n - n0 - n_tree); -inf when a zero-probability
    pattern carries positive count.  Zero counts contribute nothing even
    against vanishing probabilities."""
    if tree not in (1, 2, 3):
        raise ValueError("tree index must be 1, 2 or 3")
    lp = probs.log_array
    n_tree = counts.array[tree]
    rest = counts.n - counts.n0 - n_tree
    total = 0.0
    for count, logp in ((counts.n0, lp[0]), (n_tree, lp[1]), (rest, lp[2])):
        if count > 0:
            total += count * logp
    return total


def kernel_log_values(
    counts: PatternCounts, lp0: np.ndarray, lp1: np.ndarray, lp2: np.ndarray, tree: int
) -> np.ndarray:
    """Vectorized log-kernel over arrays of per-draw log pattern probabilities."""
    n_tree = int(counts.array[tree])
    rest = counts.n - counts.n0 - n_tree
    total = np.zeros_like(lp0)
    for count, logp in ((counts.n0, lp0), (n_tree, lp1), (rest, lp2)):
        if count > 0:
            total = total + count * logp
    return total


@dataclass(frozen=True)
class LogMeanResult:
    """log of a Monte Carlo mean with a delta-method standard error (log scale)."""

    log_mean: float
    stderr: float
    n_samples: int


@dataclass(frozen=True)
class PosteriorEstimate:
    log_epi: np.ndarray     # per-tree log E[K_i]
    stderr: np.ndarray      # per-tree log-scale standard errors
    posterior: np.ndarray   # P(tree i | counts), sums to 1
    n_samples: int

    def __post_init__(self) -> None:
        post = self.posterior
        if np.any(post < 0.0) or abs(post.sum() - 1.0) > 1e-10:
            raise ValueError("posterior must be a probability vector")


@dataclass(frozen=True)
class ParadoxResult:
    n: int
    epsilon: float
    delta_hat: float
    ci_lo: float
    ci_hi: float
    trials: int

    def __post_init__(self) -> None:
        if not (0.0 <= self.ci_lo <= self.ci_hi <= 1.0 and 0.0 <= self.delta_hat <= 1.0):
            raise ValueError("estimates must lie in [0, 1]")


def wilson_interval(successes: int, trials: int, z: float = 1.959963984540054) -> tuple[float, float]:
    """95% Wilson score interval; well behaved at 0 and 1."""
    if trials <= 0:
        raise ValueError("trials must be positive")
    phat = successes / trials
    denom = 1.0 + z * z / trials
    center = (phat + z * z / (2 * trials)) / denom
    half = z * math.sqrt(phat * (1 - phat) / trials + z * z / (4 * trials * trials)) / denom
    lo = 0.0 if successes == 0 else max(0.0, center - half)
    hi = 1.0 if successes == trials else min(1.0, center + half)
    return lo, hi


# ---------------------------------------------------------------------------
# streaming log-sum-exp accumulation
# ---------------------------------------------------------------------------

def _partials(logs: np.ndarray) -> tuple[float, float, float, int]:
    """(max, sum exp(l - max), sum exp(2(l - max)), count) of one block."""
    m = float(np.max(logs))
    if m == -math.inf:
        return -math.inf, 0.0, 0.0, logs.size
    a = np.exp(logs - m)
    return m, float(a.sum()), float((a * a).sum()), logs.size


def _merge(p, q):
    m1, s1, t1, n1 = p
    m2, s2, t2, n2 = q
    m = max(m1, m2)
    if m == -math.inf:
        return -math.inf, 0.0, 0.0, n1 + n2
    w1 = math.exp(m1 - m) if m1 > -math.inf else 0.0
    w2 = math.exp(m2 - m) if m2 > -math.inf else 0.0
    return m, s1 * w1 + s2 * w2, t1 * w1 * w1 + t2 * w2 * w2, n1 + n2


def _finish(p) -> LogMeanResult:
    m, s, t, n = p
    if s <= 0.0:
        raise DegenerateEstimate("all kernel samples vanished")
    mu = s / n
    var = max(t / n - mu * mu, 0.0) * (n / max(n - 1, 1))
    se_log = math.sqrt(var / n) / mu
    return LogMeanResult(m + math.log(mu), se_log, n)


def _kernel_chunk(prior: Prior, counts: PatternCounts, trees, seed: int, index: int, size: int):
    rng = _chunk_rng(seed, _TAG_KERNEL, index)
    te, ti = prior.sample(rng, size)
    lp0, lp1, lp2 = log_pattern_prob_arrays(te, ti)
    return [_partials(kernel_log_values(counts, lp0, lp1, lp2, tr)) for tr in trees]


def _accumulate_kernels(prior, counts, trees, n_samples, seed, jobs):
    n_chunks = (n_samples + DRAW_CHUNK - 1) // DRAW_CHUNK
    sizes = [min(DRAW_CHUNK, n_samples - i * DRAW_CHUNK) for i in range(n_chunks)]
    args = [(prior, counts, trees, seed, i, sizes[i]) for i in range(n_chunks)]
    if jobs > 1 and n_chunks > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_kernel_chunk_star, args, chunksize=4))
    else:
        results = [_kernel_chunk(*a) for a in args]
    totals = results[0]
    for part in results[1:]:
        totals = [_merge(a, b) for a, b in zip(totals, part)]
    return totals


def _kernel_chunk_star(args):
    return _kernel_chunk(*args)


def expected_kernel(
    prior: Prior,
    counts: PatternCounts,
    tree: int,
    n_samples: int,
    seed: int,
    jobs: int = 1,
) -> LogMeanResult:
    """Monte Carlo estimate of log E[K_tree] with a log-scale standard error."""
    if n_samples < 1000:
        raise ValueError("n_samples must be >= 1000")
    if tree not in (1, 2, 3):
        raise ValueError("tree index must be 1, 2 or 3")
    totals = _accumulate_kernels(prior, counts, (tree,), n_samples, seed, jobs)
    return _finish(totals[0])


def tree_posterior(
    prior: Prior,
    counts: PatternCounts,
    tree_weights,
    n_samples: int,
    seed: int,
    jobs: int = 1,
) -> PosteriorEstimate:
    """Posterior over the three resolved trees: posterior_i ~ w_i E[K_i].

    Weights must be strictly positive; they are normalized internally, so
    common rescaling changes nothing.  All trees share the same draws.
    """
    w = np.asarray(tree_weights, dtype=float)
    if w.shape != (3,) or np.any(w <= 0.0) or not np.all(np.isfinite(w)):
        raise ValueError("tree_weights must be three strictly positive numbers")
    if n_samples < 1000:
        raise ValueError("n_samples must be >= 1000")
    w = w / w.sum()
    totals = _accumulate_kernels(prior, counts, (1, 2, 3), n_samples, seed, jobs)
    results = [_finish(p) for p in totals]
    log_epi = np.array([r.log_mean for r in results])
    stderr = np.array([r.stderr for r in results])
    log_post = np.log(w) + log_epi
    log_post -= np.max(log_post)
    post = np.exp(log_post)
    post /= post.sum()
    return PosteriorEstimate(log_epi, stderr, post, n_samples)


# ---------------------------------------------------------------------------
# the paradox scan
# ---------------------------------------------------------------------------

def _posterior_block(counts, lp0, lp1, lp2, log_w):
    log_means = np.empty(3)
    for tree in (1, 2, 3):
        logs = kernel_log_values(counts, lp0, lp1, lp2, tree)
        m = float(np.max(logs))
        if m == -math.inf:
            raise DegenerateEstimate("all kernel samples vanished")
        log_means[tree - 1] = m + math.log(np.mean(np.exp(logs - m)))
    lp = log_w + log_means
    lp -= lp.max()
    p = np.exp(lp)
    return p / p.sum()


def _scan_chunk(prior, t, epsilon, n, n_samples, log_w, seed, n_index, chunk, n_trials):
    rng = _chunk_rng(seed, _TAG_SCAN, n_index * 1_000_003 + chunk)
    q = star_probs(t).array
    hits = 0
    for _ in range(n_trials):
        counts = PatternCounts(*map(int, rng.multinomial(n, q)))
        te, ti = prior.sample(rng, n_samples)
        lp0, lp1, lp2 = log_pattern_prob_arrays(te, ti)
        post = _posterior_block(counts, lp0, lp1, lp2, log_w)
        if post[0] >= 1.0 - epsilon:
            hits += 1
    return hits


def _scan_chunk_star(args):
    return _scan_chunk(*args)


def paradox_scan(
    prior: Prior,
    t: float,
    epsilon: float,
    n_list,
    trials: int,
    n_samples: int,
    seed: int,
    tree_weights=(1.0, 1.0, 1.0),
    jobs: int = 1,
) -> list[ParadoxResult]:
    """Estimate delta(n) = P(posterior of tree 1 >= 1 - epsilon) on star data.

    For each sequence length n, ``trials`` count vectors are simulated from
    the star tree at edge length t and the posterior is estimated with
    ``n_samples`` prior draws per trial; the hit fraction is reported with
    a 95% Wilson interval.
    """
    if not (0.0 < epsilon < 1.0):
        raise ValueError("epsilon must lie in (0, 1)")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    n_list = [int(v) for v in n_list]
    if any(b <= a for a, b in zip(n_list, n_list[1:])) or any(v < 1 for v in n_list):
        raise ValueError("n_list must be ascending positive integers")
    w = np.asarray(tree_weights, dtype=float)
    if w.shape != (3,) or np.any(w <= 0.0):
        raise ValueError("tree_weights must be three strictly positive numbers")
    log_w = np.log(w / w.sum())

    results = []
    for n_index, n in enumerate(n_list):
        n_chunks = (trials + TRIAL_CHUNK - 1) // TRIAL_CHUNK
        sizes = [min(TRIAL_CHUNK, trials - i * TRIAL_CHUNK) for i in range(n_chunks)]
        args = [
            (prior, t, epsilon, n, n_samples, log_w, seed, n_index, i, sizes[i])
            for i in range(n_chunks)
        ]
        if jobs > 1 and n_chunks > 1:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                hits = sum(pool.map(_scan_chunk_star, args, chunksize=1))
        else:
            hits = sum(_scan_chunk(*a) for a in args)
        lo, hi = wilson_interval(hits, trials)
        results.append(ParadoxResult(n, epsilon, hits / trials, lo, hi, trials))
    return results
