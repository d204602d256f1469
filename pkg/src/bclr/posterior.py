"""Posterior summaries for changepoint chains, plus checks of the model's theory.

Includes two independent routes to the marginal ``pi(kappa | X)``:
quadrature over beta (d = 1) and a Monte Carlo average over PG(1, 0)
latent variables with beta integrated out analytically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import log_expit, logsumexp

from .core import GaussianPrior, KappaPrior, PosteriorSamples, _as_values
from .rng import RngStream, sample_pg_many

__all__ = [
    "ChangepointPosterior",
    "CredibleSet",
    "SnrReport",
    "point_estimates",
    "quantile_interval",
    "highest_mass_set",
    "normalized_entropy",
    "snr_report",
    "check_margin",
    "margin_bound",
    "is_unimodal",
    "marginal_mc_oracle",
    "marginal_quadrature",
    "total_variation",
]

_CUM_TOL = 1e-12


@dataclass(frozen=True)
class ChangepointPosterior:
    """pmf over the consecutive support ``start, start+1, ..., start+len(pmf)-1``."""

    pmf: np.ndarray
    start: int = 1

    def __post_init__(self):
        p = np.array(self.pmf, dtype=np.float64).ravel()
        if p.size < 1 or np.any(p < 0) or abs(p.sum() - 1.0) > 1e-9:
            raise ValueError("pmf must be non-negative and sum to 1")
        p = p / p.sum()
        p.setflags(write=False)
        object.__setattr__(self, "pmf", p)
        object.__setattr__(self, "start", int(self.start))

    @property
    def support(self) -> np.ndarray:
        return np.arange(self.start, self.start + self.pmf.size)

    @classmethod
    def from_samples(cls, samples, n: int, start: int = 1) -> "ChangepointPosterior":
        """Relative frequencies of local draws ``1..n-1``, relabelled to begin at ``start``."""
        kappa = samples.kappa if isinstance(samples, PosteriorSamples) else np.asarray(samples, dtype=np.int64)
        counts = np.bincount(kappa - 1, minlength=n - 1)[: n - 1]
        return cls(counts / counts.sum(), start)

    @classmethod
    def from_mapping(cls, masses: dict) -> "ChangepointPosterior":
        lo, hi = min(masses), max(masses)
        p = np.zeros(hi - lo + 1)
        for k, v in masses.items():
            p[k - lo] = v
        return cls(p, lo)

    def prob(self, k: int) -> float:
        i = k - self.start
        return float(self.pmf[i]) if 0 <= i < self.pmf.size else 0.0

    def mode(self) -> int:
        """Smallest maximizer of the pmf."""
        return int(self.start + np.argmax(self.pmf))

    def mean(self) -> float:
        return float(self.support @ self.pmf)


@dataclass(frozen=True)
class CredibleSet:
    kind: str  # "quantile-interval" or "highest-mass"
    members: tuple
    mass: float

    def __contains__(self, k):
        return k in self.members

    @property
    def bounds(self) -> tuple:
        return (min(self.members), max(self.members))


@dataclass(frozen=True)
class SnrReport:
    """Per-coordinate posterior mean, sd and SNR, with ``order`` sorting SNR descending."""

    mean: np.ndarray
    sd: np.ndarray
    snr: np.ndarray
    infinite: np.ndarray
    order: np.ndarray

    def rows(self, labels=None):
        """(index, label, mean, sd, snr) tuples in descending SNR order."""
        out = []
        for j in self.order:
            lab = labels[j] if labels is not None else f"x{j + 1}"
            out.append((int(j), lab, float(self.mean[j]), float(self.sd[j]), float(self.snr[j])))
        return out


def point_estimates(samples) -> tuple:
    """Posterior mode (smallest maximizer of draw frequencies) and mean of kappa."""
    kappa = samples.kappa if isinstance(samples, PosteriorSamples) else np.asarray(samples, dtype=np.int64)
    if kappa.size == 0:
        raise ValueError("no posterior draws")
    counts = np.bincount(kappa)
    return int(np.argmax(counts)), float(kappa.mean())


def _quantile(post: ChangepointPosterior, a: float) -> int:
    cum = np.cumsum(post.pmf)
    idx = int(np.searchsorted(cum, a - _CUM_TOL, side="left"))
    return post.start + min(idx, post.pmf.size - 1)


def quantile_interval(post: ChangepointPosterior, alpha: float) -> CredibleSet:
    """Equal-tailed interval ``[q_{alpha/2}, q_{1-alpha/2}]`` with q_a = inf{k : F(k) >= a}."""
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    lo, hi = _quantile(post, alpha / 2), _quantile(post, 1 - alpha / 2)
    members = tuple(range(lo, hi + 1))
    mass = float(post.pmf[lo - post.start : hi - post.start + 1].sum())
    return CredibleSet("quantile-interval", members, mass)


def highest_mass_set(post: ChangepointPosterior, alpha: float) -> CredibleSet:
    """Smallest set of highest-probability points with mass >= 1 - alpha.

    Ties in probability are resolved towards smaller indices, which yields
    the minimal-sum set among the minimal-cardinality candidates.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    order = np.lexsort((np.arange(post.pmf.size), -post.pmf))
    cum = np.cumsum(post.pmf[order])
    k = int(np.searchsorted(cum, 1 - alpha - _CUM_TOL, side="left")) + 1
    k = min(k, post.pmf.size)
    chosen = np.sort(order[:k])
    return CredibleSet("highest-mass", tuple(int(post.start + i) for i in chosen), float(post.pmf[chosen].sum()))


def normalized_entropy(post) -> float:
    """Shannon entropy divided by log of the support size (0 for a single point)."""
    p = post.pmf if isinstance(post, ChangepointPosterior) else np.asarray(post, dtype=np.float64)
    m = p.size
    if m < 2:
        return 0.0
    nz = p[p > 0]
    h = -float(np.sum(nz * np.log(nz))) / math.log(m)
    if h > 1.0 - 1e-12:  # uniform up to rounding
        return 1.0
    return max(h, 0.0)


def snr_report(samples) -> SnrReport:
    """SNR_j = mean(beta_j)^2 / var(beta_j), sample variance with ddof = 1.

    Coordinates with zero posterior spread get SNR = inf and are flagged.
    """
    beta = samples.beta if isinstance(samples, PosteriorSamples) else np.atleast_2d(np.asarray(samples, float))
    if beta.shape[0] < 2:
        raise ValueError("SNR needs at least 2 draws")
    mean = beta.mean(axis=0)
    sd = beta.std(axis=0, ddof=1)
    infinite = sd == 0
    with np.errstate(divide="ignore", invalid="ignore"):
        snr = np.where(infinite, np.inf, mean**2 / np.where(infinite, 1.0, sd) ** 2)
    order = np.lexsort((np.arange(snr.size), -snr))
    return SnrReport(mean, sd, snr, infinite, order)


def check_margin(X, beta, kappa_star: int):
    """Separation margin of ``x_i'beta`` around ``kappa_star``, or None.

    Returns the largest gamma with ``x_i'beta <= -gamma`` for i <= kappa_star
    and ``x_i'beta >= gamma`` after it, when that gamma is positive.
    """
    v = _as_values(X)
    eta = v @ np.asarray(beta, dtype=np.float64)
    if not 1 <= kappa_star < eta.size:
        raise ValueError("kappa_star must lie in 1..n-1")
    gamma = min(float(np.min(-eta[:kappa_star])), float(np.min(eta[kappa_star:])))
    return gamma if gamma > 0 else None


def margin_bound(gamma: float) -> float:
    """Lower bound (1 - e^-gamma) / (1 + e^-gamma) on pi(kappa* | beta, X)."""
    return math.tanh(gamma / 2.0)


def is_unimodal(pmf) -> bool:
    """Non-decreasing then non-increasing."""
    d = np.diff(np.asarray(pmf, dtype=np.float64))
    if d.size == 0:
        return True
    peak = int(np.argmax(np.asarray(pmf)))
    return bool(np.all(d[:peak] >= 0) and np.all(d[peak:] <= 0))


def marginal_mc_oracle(X, prior: GaussianPrior, mc_draws: int, rng: RngStream, batch: int = 20000) -> ChangepointPosterior:
    """Monte Carlo marginal of kappa under a uniform kappa prior.

    ``pi(k | X) ∝ E_omega[ det(V)^(1/2) exp(xbar_k' V xbar_k / 2) ]`` with
    omega_i iid PG(1, 0), ``V = (X'ΩX + Σ⁻¹)⁻¹`` and
    ``xbar_k = sum_i sign_k(i) x_i / 2`` (sign -1 for i <= k, +1 after).
    Meant for tiny problems.
    """
    if np.any(prior.mu != 0):
        raise ValueError("oracle requires zero-mean prior")
    v = _as_values(X)
    n, d = v.shape
    total = v.sum(axis=0)
    xbar = (total[None, :] - 2.0 * np.cumsum(v, axis=0)[: n - 1]) / 2.0  # (n-1, d)
    acc = None
    done = 0
    while done < mc_draws:
        m = min(batch, mc_draws - done)
        omega = sample_pg_many(np.zeros(m * n), rng).reshape(m, n)
        prec = np.einsum("mi,ij,ik->mjk", omega, v, v) + prior.precision[None]
        V = np.linalg.inv(prec)
        _, logdet_prec = np.linalg.slogdet(prec)
        quad = np.einsum("kj,mjl,kl->mk", xbar, V, xbar)
        logw = -0.5 * logdet_prec[:, None] + 0.5 * quad  # (m, n-1)
        chunk = logsumexp(logw, axis=0)
        acc = chunk if acc is None else np.logaddexp(acc, chunk)
        done += m
    return ChangepointPosterior(np.exp(acc - logsumexp(acc)))


def marginal_quadrature(X, prior: GaussianPrior, kappa_prior: KappaPrior | None = None,
                        lo: float = -10.0, hi: float = 10.0, points: int = 2001) -> ChangepointPosterior:
    """Marginal of kappa by trapezoidal integration of Q(beta, k | X) prior(beta), d = 1 only."""
    v = _as_values(X)
    n, d = v.shape
    if d != 1:
        raise ValueError("quadrature oracle supports d = 1 only")
    if points < 2001:
        raise ValueError("quadrature oracle needs at least 2001 grid points")
    grid = np.linspace(lo, hi, points)
    mu, var = float(prior.mu[0]), float(prior.sigma[0, 0])
    log_prior_b = -0.5 * (grid - mu) ** 2 / var
    eta = np.outer(v[:, 0], grid)  # (n, G)
    lo_lab = log_expit(-eta)  # label 0 before the change
    hi_lab = log_expit(eta)
    # log Q(beta, k) for k = 1..n-1 as explicit sums over rows
    logq = np.empty((n - 1, points))
    for k in range(1, n):
        logq[k - 1] = lo_lab[:k].sum(axis=0) + hi_lab[k:].sum(axis=0)
    integrand = logq + log_prior_b[None, :]
    h = grid[1] - grid[0]
    wts = np.full(points, math.log(h))
    wts[0] = wts[-1] = math.log(h / 2)
    logm = logsumexp(integrand + wts[None, :], axis=1)
    if kappa_prior is not None:
        logm = logm + kappa_prior.log_weights
    return ChangepointPosterior(np.exp(logm - logsumexp(logm)))


def total_variation(p, q) -> float:
    p = p.pmf if isinstance(p, ChangepointPosterior) else np.asarray(p, float)
    q = q.pmf if isinstance(q, ChangepointPosterior) else np.asarray(q, float)
    return 0.5 * float(np.abs(p - q).sum())
