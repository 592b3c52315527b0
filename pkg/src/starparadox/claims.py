"""Conditional-expectation checks behind the paradox argument.

For counts in the band event F_c (which favours tree 1) and j in {2, 3},
two facts connect the kernels K_j to the band interval I_t of 4 P0 - 1:

* band advantage: E[K_j | 4P0 - 1 in I_t] >= E[K_j | 4P0 - 1 not in I_t]
  for n large, with explicit envelopes on both sides built from
  mu_t = q0^q0 q1^{3 q1}, the corner probability Q_n(t) and the
  Kullback-Leibler defect outside the band;

* conditional dominance: E[K_1 | 4P0 - 1 = z] >= c^2 * alpha *
  E[K_j | 4P0 - 1 = z] uniformly over z in I_t, with alpha independent
  of c.

Both are estimated here by stratified Monte Carlo over prior draws; the
point conditioning in the second uses hard bands z +- delta_z.  The module
also exposes the per-draw factorizations of the kernels (through the
centered statistics, and through mu_t, U_t, W_j) used to verify the
machinery sample by sample.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import (
    PatternCounts,
    band_half_width,
    band_interval,
    delta_stats,
    in_band_fc,
    log_pattern_prob_arrays,
    star_probs,
    zeta,
)
from .posterior import kernel_log_values
from .priors import Prior

__all__ = [
    "EmptyStratum",
    "Claim1Report",
    "Claim2Report",
    "corner_draws",
    "log_mu",
    "log_u_statistic",
    "log_w_statistic",
    "kernel_log_by_deltas",
    "kernel_log_by_corner",
    "uv_variables",
    "in_band_advantage",
    "conditional_ratio_scan",
]


class EmptyStratum(RuntimeError):
    """A conditioning stratum received no prior draws."""


# ---------------------------------------------------------------------------
# per-draw building blocks
# ---------------------------------------------------------------------------

def log_mu(t: float) -> float:
    """log of q0^q0 q1^(3 q1), the per-site likelihood scale on the star tree."""
    q = star_probs(t)
    return q.p0 * math.log(q.p0) + 3.0 * q.p1 * math.log(q.p1)


def log_u_statistic(t: float, lp0, lp1, lp2) -> np.ndarray:
    """log U_t = q0 log P0 + q1 log P1 + 2 q1 log P2 - log mu_t per draw."""
    q = star_probs(t)
    return q.p0 * lp0 + q.p1 * lp1 + 2.0 * q.p1 * lp2 - log_mu(t)


def log_w_statistic(counts: PatternCounts, t: float, lp0, lp1, lp2, j: int) -> np.ndarray:
    """log W_j = d0 log P0 + (dj - d0/3) log P1 + (d1 + dk - 2 d0/3) log P2."""
    if j not in (2, 3):
        raise ValueError("j must be 2 or 3")
    k = 5 - j
    d = delta_stats(counts, t)
    dj = d.d2 if j == 2 else d.d3
    dk = d.d2 if k == 2 else d.d3
    return d.d0 * lp0 + (dj - d.d0 / 3.0) * lp1 + (d.d1 + dk - 2.0 * d.d0 / 3.0) * lp2


def kernel_log_by_deltas(counts: PatternCounts, t: float, lp0, lp1, lp2, tree: int) -> np.ndarray:
    """Kernel in centered form: n0 log P0 + s (log P1 + 2 log P2)
    + d_tree sqrt(n) (log P1 - log P2), with s = (n - n0)/3."""
    d = delta_stats(counts, t)
    d_tree = (d.d1, d.d2, d.d3)[tree - 1]
    s = (counts.n - counts.n0) / 3.0
    rn = math.sqrt(counts.n)
    return counts.n0 * lp0 + s * (lp1 + 2.0 * lp2) + d_tree * rn * (lp1 - lp2)


def kernel_log_by_corner(counts: PatternCounts, t: float, lp0, lp1, lp2, j: int) -> np.ndarray:
    """Kernel in corner form: n (log mu_t + log U_t) + sqrt(n) log W_j."""
    n = counts.n
    return n * (log_mu(t) + log_u_statistic(t, lp0, lp1, lp2)) + math.sqrt(n) * log_w_statistic(
        counts, t, lp0, lp1, lp2, j
    )


def uv_variables(te, ti) -> tuple[np.ndarray, np.ndarray]:
    """Per-draw (U, V): U = (P1 - P2)/(1 - P0) and V = zeta(U)."""
    x = np.exp(-4.0 * np.asarray(te, dtype=float))
    w = np.exp(-4.0 * np.asarray(ti, dtype=float))
    si = 1.0 + 2.0 * w
    u = x * (3.0 - si) / (3.0 - x * si)
    return u, zeta(u)


def corner_draws(t: float, n: int, rng: np.random.Generator, size: int):
    """Points of the corner box {ti <= 1/n, t <= te <= t + 1/n} (uniform)."""
    te = t + rng.random(size) / n
    ti = rng.random(size) / n
    return te, ti


# ---------------------------------------------------------------------------
# stratified estimators
# ---------------------------------------------------------------------------

def _log_mean_se(logs: np.ndarray) -> tuple[float, float]:
    m = float(np.max(logs))
    if m == -math.inf:
        return -math.inf, math.inf
    a = np.exp(logs - m)
    n = a.size
    mu = a.mean()
    var = max(float((a * a).mean()) - mu * mu, 0.0) * (n / max(n - 1, 1))
    return m + math.log(mu), math.sqrt(var / n) / mu


def _paired_log_ratio_se(l1: np.ndarray, l2: np.ndarray) -> float:
    """Delta-method s.e. of log(sum e^l1 / sum e^l2) with shared draws."""
    m1, m2 = float(np.max(l1)), float(np.max(l2))
    a = np.exp(l1 - m1)
    b = np.exp(l2 - m2)
    infl = a / a.sum() - b / b.sum()
    return math.sqrt(float((infl * infl).sum()))


@dataclass(frozen=True)
class Claim1Report:
    j: int
    n_in: int
    n_out: int
    log_mean_in: float
    log_mean_out: float
    se_in: float
    se_out: float
    log_ratio: float            # in - out
    se_ratio: float
    significant: bool           # log_ratio > 3 se_ratio
    envelope_low_log: float     # lower envelope for the in-band mean
    envelope_high_log: float    # upper envelope for the out-of-band mean
    samplewise_upper_ok: bool   # every out draw obeys the kernel <= envelope bound


def in_band_advantage(
    prior: Prior,
    t: float,
    counts: PatternCounts,
    c: float,
    j: int,
    n_samples: int,
    seed: int,
) -> Claim1Report:
    """Estimate E[K_j | 4P0-1 in I_t] against E[K_j | 4P0-1 not in I_t].

    Counts must lie in the band event F_c.  Also evaluates the two
    envelopes: the in-band mean dominates mu^n Q_n exp(n log(1 - kap/n))
    q1^(c sqrt n) with kap = 5 exp(-4t)/q0, and every out-of-band draw
    obeys K_j <= mu^n exp(-n l_t^2 / 32) (checked sample-wise).
    """
    if j not in (2, 3):
        raise ValueError("j must be 2 or 3")
    if not in_band_fc(counts, c, t):
        raise ValueError("counts must lie in the band event F_c")
    rng = np.random.default_rng(seed)
    te, ti = prior.sample(rng, n_samples)
    lp0, lp1, lp2 = log_pattern_prob_arrays(te, ti)
    zval = 4.0 * np.exp(lp0) - 1.0
    iv = band_interval(t)
    inside = (zval >= iv.lo) & (zval <= iv.hi)
    if not np.any(inside):
        raise EmptyStratum("no draw fell in the band interval")
    if not np.any(~inside):
        raise EmptyStratum("no draw fell outside the band interval")
    logs = kernel_log_values(counts, lp0, lp1, lp2, j)
    lm_in, se_in = _log_mean_se(logs[inside])
    lm_out, se_out = _log_mean_se(logs[~inside])

    n = counts.n
    q = star_probs(t)
    kap = 5.0 * math.exp(-4.0 * t) / q.p0
    env_low = (
        n * log_mu(t)
        + prior.log_q_n(t, n)
        + n * math.log1p(-kap / n)
        + c * math.sqrt(n) * math.log(q.p1)
    )
    ell = band_half_width(t)
    env_high = n * log_mu(t) - n * ell * ell / 32.0
    out_ok = bool(np.all(logs[~inside] <= env_high + 1e-9 * abs(env_high)))
    log_ratio = lm_in - lm_out
    se_ratio = math.hypot(se_in, se_out)
    return Claim1Report(
        j=j,
        n_in=int(inside.sum()),
        n_out=int((~inside).sum()),
        log_mean_in=lm_in,
        log_mean_out=lm_out,
        se_in=se_in,
        se_out=se_out,
        log_ratio=log_ratio,
        se_ratio=se_ratio,
        significant=bool(log_ratio > 3.0 * se_ratio),
        envelope_low_log=env_low,
        envelope_high_log=env_high,
        samplewise_upper_ok=out_ok,
    )


@dataclass(frozen=True)
class Claim2Report:
    j: int
    c: float
    z_grid: np.ndarray
    band_counts: np.ndarray
    log_ratio: np.ndarray       # per z: log E[K_1 | z] - log E[K_j | z]
    se_ratio: np.ndarray
    min_log_gap: float          # inf_z (log_ratio - 2 log c)
    min_ratio_over_c2: float    # inf_z E[K_1|z] / (c^2 E[K_j|z]); inf if the gap overflows
    min_ratio_over_3c2: float
    min_ratio_over_4c2: float
    significant: bool           # min_log_gap > 3 se at the argmin


def conditional_ratio_scan(
    prior: Prior,
    t: float,
    counts: PatternCounts,
    c: float,
    j: int,
    z_points: int,
    n_samples: int,
    seed: int,
) -> Claim2Report:
    """Scan z over the band interval and compare E[K_1 | z] to c^2 E[K_j | z].

    Point conditioning uses hard bands z +- delta_z with delta_z = half the
    grid spacing, so the bands tile I_t.  Both normalizations of the
    dominance constant (3 c^2 and 4 c^2) are reported.
    """
    if j not in (2, 3):
        raise ValueError("j must be 2 or 3")
    if not in_band_fc(counts, c, t):
        raise ValueError("counts must lie in the band event F_c")
    iv = band_interval(t)
    edges = np.linspace(iv.lo, iv.hi, z_points + 1)
    centers = 0.5 * (edges[:-1] + edges[1:])
    rng = np.random.default_rng(seed)
    te, ti = prior.sample(rng, n_samples)
    lp0, lp1, lp2 = log_pattern_prob_arrays(te, ti)
    zval = 4.0 * np.exp(lp0) - 1.0
    l1 = kernel_log_values(counts, lp0, lp1, lp2, 1)
    lj = kernel_log_values(counts, lp0, lp1, lp2, j)

    log_ratio = np.empty(z_points)
    se_ratio = np.empty(z_points)
    band_n = np.empty(z_points, dtype=int)
    for k in range(z_points):
        mask = (zval >= edges[k]) & (zval < edges[k + 1])
        band_n[k] = int(mask.sum())
        if band_n[k] == 0:
            raise EmptyStratum(f"z band {k} around {centers[k]:.4f} is empty")
        m1, _ = _log_mean_se(l1[mask])
        mj, _ = _log_mean_se(lj[mask])
        log_ratio[k] = m1 - mj
        se_ratio[k] = _paired_log_ratio_se(l1[mask], lj[mask])
    gap = log_ratio - 2.0 * math.log(c)
    k_min = int(np.argmin(gap))
    min_gap = float(gap[k_min])
    ratio = math.exp(min_gap) if min_gap < 700.0 else math.inf
    return Claim2Report(
        j=j,
        c=c,
        z_grid=centers,
        band_counts=band_n,
        log_ratio=log_ratio,
        se_ratio=se_ratio,
        min_log_gap=min_gap,
        min_ratio_over_c2=ratio,
        min_ratio_over_3c2=ratio / 3.0,
        min_ratio_over_4c2=ratio / 4.0,
        significant=bool(min_gap > 3.0 * se_ratio[k_min]),
    )
