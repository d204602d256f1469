"""Accuracy, RMSE, coverage and partition-agreement metrics over replications."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from ..core import PosteriorSamples
from ..posterior import ChangepointPosterior, highest_mass_set, point_estimates, quantile_interval

__all__ = [
    "ALPHAS",
    "MetricsReport",
    "evaluate_single",
    "segment_labels",
    "rand_index",
    "adjusted_rand_index",
    "evaluate_multi",
]

ALPHAS = (0.5, 0.2, 0.1, 0.05, 0.01)


@dataclass
class MetricsReport:
    """Replication summary.

    ``rmse0`` averages the within-posterior RMSE of each replication,
    ``rmse1`` uses posterior means and ``rmse2`` posterior modes.  Coverage
    maps each alpha to the fraction of replications whose quantile interval
    (``I``) or highest-mass set (``C``) contains the truth.
    """

    reps: int
    pct_exact: float
    pct_exact_se: float
    rmse0: float
    rmse0_se: float
    rmse0_sd: float
    rmse1: float
    rmse2: float
    jensen_bound: float
    coverage_I: dict = field(default_factory=dict)
    coverage_C: dict = field(default_factory=dict)
    rand: float | None = None
    adjusted_rand: float | None = None

    def to_dict(self) -> dict:
        out = asdict(self)
        out["coverage_I"] = {str(a): v for a, v in self.coverage_I.items()}
        out["coverage_C"] = {str(a): v for a, v in self.coverage_C.items()}
        return out


def evaluate_single(results, kappa_star: int, n: int, alphas=ALPHAS) -> MetricsReport:
    """Metrics over replications, each a :class:`PosteriorSamples` (or array of kappa draws).

    Raises AssertionError if the Jensen relation
    ``rmse0 <= sqrt(rmse1^2 + mean within-variance)`` fails.
    """
    kappas = [r.kappa if isinstance(r, PosteriorSamples) else np.asarray(r, dtype=np.int64) for r in results]
    R = len(kappas)
    if R == 0:
        raise ValueError("no replications")
    modes = np.empty(R)
    means = np.empty(R)
    within = np.empty(R)
    wvar = np.empty(R)
    cov_I = {a: 0 for a in alphas}
    cov_C = {a: 0 for a in alphas}
    for r, k in enumerate(kappas):
        modes[r], means[r] = point_estimates(k)
        within[r] = math.sqrt(np.mean((k - kappa_star) ** 2.0))
        wvar[r] = np.mean((k - means[r]) ** 2)
        post = ChangepointPosterior.from_samples(k, n)
        for a in alphas:
            cov_I[a] += kappa_star in quantile_interval(post, a)
            cov_C[a] += kappa_star in highest_mass_set(post, a)
    exact = float(np.mean(modes == kappa_star))
    rmse0 = float(within.mean())
    rmse1 = float(math.sqrt(np.mean((means - kappa_star) ** 2)))
    rmse2 = float(math.sqrt(np.mean((modes - kappa_star) ** 2)))
    bound = float(math.sqrt(rmse1**2 + wvar.mean()))
    assert rmse0 <= bound * (1 + 1e-12) + 1e-12, "Jensen relation violated"
    sd = float(within.std(ddof=1)) if R > 1 else 0.0
    return MetricsReport(
        reps=R,
        pct_exact=exact,
        pct_exact_se=math.sqrt(exact * (1 - exact) / R),
        rmse0=rmse0,
        rmse0_se=sd / math.sqrt(R),
        rmse0_sd=sd,
        rmse1=rmse1,
        rmse2=rmse2,
        jensen_bound=bound,
        coverage_I={a: cov_I[a] / R for a in alphas},
        coverage_C={a: cov_C[a] / R for a in alphas},
    )


def segment_labels(breaks, n: int) -> np.ndarray:
    """Label of each row ``1..n``: the number of changepoints strictly before it."""
    b = np.sort(np.asarray(list(breaks), dtype=np.int64))
    if b.size and (b[0] < 1 or b[-1] >= n):
        raise ValueError("changepoints must lie in 1..n-1")
    return np.searchsorted(b, np.arange(1, n + 1), side="left")


def _pair_counts(a, b):
    _, ai = np.unique(a, return_inverse=True)
    _, bi = np.unique(b, return_inverse=True)
    table = np.zeros((ai.max() + 1, bi.max() + 1))
    np.add.at(table, (ai, bi), 1)
    comb = lambda x: x * (x - 1) / 2.0  # noqa: E731
    return comb(table).sum(), comb(table.sum(axis=1)).sum(), comb(table.sum(axis=0)).sum(), comb(float(len(a)))


def rand_index(a, b) -> float:
    """Fraction of unordered pairs on which two labelings agree."""
    same, ra, rb, total = _pair_counts(a, b)
    if total == 0:
        return 1.0
    return float((total + 2 * same - ra - rb) / total)


def adjusted_rand_index(a, b) -> float:
    """Hubert-Arabie adjusted Rand index; 1 when both labelings are trivial and equal."""
    same, ra, rb, total = _pair_counts(a, b)
    if total == 0:
        return 1.0
    expected = ra * rb / total
    top = 0.5 * (ra + rb)
    if top == expected:
        return 1.0
    return float((same - expected) / (top - expected))


def evaluate_multi(estimated, truth, n: int) -> tuple:
    """(rand, adjusted rand) between the segmentations induced on ``1..n``."""
    a = segment_labels(estimated, n)
    b = segment_labels(truth, n)
    return rand_index(a, b), adjusted_rand_index(a, b)
