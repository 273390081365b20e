"""Hop-count distance discretisation statistics.

For node pairs (i, j) on a connected graph, rho = d_ij / h_ij measures
the per-hop distance. On geometric graphs rho never exceeds the radius;
its spread shrinks as deployments densify, which is what makes hop
counts usable as discretised distances.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .geometry import Deployment, Region, generate_deployment
from .graphs import EdgeGraph, critical_radius, hop_matrix

# Above this node count all-pairs rho is quadratic-cost; default to a
# seeded sample of this many pairs instead.
PAIR_SAMPLE_THRESHOLD = 2000
DEFAULT_PAIR_SAMPLE = 200_000


@dataclass
class RhoStats:
    """Per-hop distance samples and summary statistics."""

    samples: np.ndarray
    mean: float
    variance: float
    cv: float
    hist_edges: np.ndarray
    hist_masses: np.ndarray
    bin_width: float
    pairs_used: int
    pairs_excluded: int


def _pair_sample(n, count, seed):
    rng = np.random.default_rng(seed)
    ii = np.empty(0, dtype=np.int64)
    jj = np.empty(0, dtype=np.int64)
    while ii.size < count:
        a = rng.integers(0, n, size=count)
        b = rng.integers(0, n, size=count)
        keep = a != b
        ii = np.concatenate([ii, a[keep]])
        jj = np.concatenate([jj, b[keep]])
    return ii[:count], jj[:count]


def rho_stats(dep: Deployment, g: EdgeGraph, pair_sample="all", seed: int = 0) -> RhoStats:
    """Distance-per-hop statistics over node pairs of g.

    pair_sample is "all" (every unordered pair) or a pair count sampled
    uniformly with the given seed. Disconnected pairs are excluded and
    counted; it is an error if nothing remains. The histogram bin width
    is radius/50 when g carries a radius, else max(rho)/50.
    """
    n = dep.n
    if g.n != n:
        raise ValueError(f"graph has {g.n} nodes, deployment has {n}")
    hops = hop_matrix(g)
    if pair_sample == "all":
        iu = np.triu_indices(n, 1)
        hvals = hops[iu].astype(np.float64)
        diff = dep.positions[iu[0]] - dep.positions[iu[1]]
    else:
        count = int(pair_sample)
        if count < 1:
            raise ValueError(f"pair_sample must be >= 1, got {pair_sample}")
        ii, jj = _pair_sample(n, count, seed)
        hvals = hops[ii, jj].astype(np.float64)
        diff = dep.positions[ii] - dep.positions[jj]
    dvals = np.sqrt(diff[:, 0] ** 2 + diff[:, 1] ** 2)
    finite = hvals > 0
    excluded = int(np.sum(hvals < 0))
    samples = dvals[finite] / hvals[finite]
    if samples.size == 0:
        raise ValueError("no connected pairs; rho is undefined")

    mean = float(samples.mean())
    variance = float(samples.var())
    cv = float(math.sqrt(variance) / mean)
    bin_width = (g.radius if g.radius else float(samples.max())) / 50.0
    top = max(float(samples.max()), bin_width)
    nbins = int(math.ceil(top / bin_width))
    edges = np.arange(nbins + 1) * bin_width
    hist, _ = np.histogram(samples, bins=edges)
    return RhoStats(
        samples=samples, mean=mean, variance=variance, cv=cv,
        hist_edges=edges, hist_masses=hist / samples.size, bin_width=bin_width,
        pairs_used=int(samples.size), pairs_excluded=excluded,
    )


@dataclass
class TrendRow:
    n: int
    var_rho: float
    cv_rho: float
    ci_var: float | None
    ci_cv: float | None


def _half_width(values) -> float | None:
    k = len(values)
    if k < 2:
        return None
    sd = float(np.std(values, ddof=1))
    return float(stats.t.ppf(0.975, k - 1) * sd / math.sqrt(k))


def rho_trend(region: Region, n_list, seeds_per_n: int, base_seed: int = 0,
              kind: str = "uniform-iid") -> list:
    """Mean rho variance and CV against n, on the exact critical graph.

    Each n uses seeds base_seed .. base_seed + seeds_per_n - 1; 95%
    half-widths use the Student t quantile and are None for a single
    seed. Pair sampling kicks in above PAIR_SAMPLE_THRESHOLD nodes.
    """
    rows = []
    for n in n_list:
        if n < 2:
            raise ValueError(f"need n >= 2, got {n}")
        variances, cvs = [], []
        for k in range(seeds_per_n):
            seed = base_seed + k
            dep = generate_deployment(kind, n, region, seed)
            _, cgg = critical_radius(dep)
            sample = "all" if n <= PAIR_SAMPLE_THRESHOLD else DEFAULT_PAIR_SAMPLE
            st = rho_stats(dep, cgg, pair_sample=sample, seed=seed)
            variances.append(st.variance)
            cvs.append(st.cv)
        rows.append(TrendRow(
            n=n,
            var_rho=float(np.mean(variances)),
            cv_rho=float(np.mean(cvs)),
            ci_var=_half_width(variances),
            ci_cv=_half_width(cvs),
        ))
    return rows


def save_trend_csv(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["n", "var_rho", "cv_rho", "ci_var", "ci_cv"])
        for r in rows:
            writer.writerow([
                r.n, repr(r.var_rho), repr(r.cv_rho),
                "" if r.ci_var is None else repr(r.ci_var),
                "" if r.ci_cv is None else repr(r.ci_cv),
            ])


def save_rho_histogram_csv(st: RhoStats, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["bin_lo", "bin_hi", "freq"])
        for k, mass in enumerate(st.hist_masses):
            writer.writerow([repr(float(st.hist_edges[k])),
                             repr(float(st.hist_edges[k + 1])), repr(float(mass))])
