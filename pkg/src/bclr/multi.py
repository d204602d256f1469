"""Multiple changepoints from overlapping two-block segments.

The series is cut into blocks at ``0 = tau_0 <= tau_1 < ... < tau_J < tau_{J+1} = n``.
Segment ``j`` is the union of blocks ``j`` and ``j + 1`` (rows
``tau_{j-1}+1 .. tau_{j+1}``) and gets its own single-changepoint fit.
Modes are extracted left to right under a minimum gap, then candidates with
diffuse posteriors are removed by a normalized-entropy threshold.  Two short
warm-up rounds refine the partition before the final fit.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import GaussianPrior, GibbsConfig, PosteriorSamples, run_gibbs, standardize_columns, _as_values
from .posterior import (
    ChangepointPosterior,
    normalized_entropy,
    quantile_interval,
    snr_report,
)
from .rng import RngStream

__all__ = [
    "Partition",
    "MultiConfig",
    "SegmentPosterior",
    "MultiResult",
    "initial_partition",
    "fit_segments",
    "constrained_picks",
    "constrained_modes",
    "prune_by_entropy",
    "multi_fit",
]


@dataclass(frozen=True)
class Partition:
    """Block boundaries ``(0, tau_1, ..., tau_J, n)``."""

    boundaries: tuple

    def __post_init__(self):
        b = tuple(int(t) for t in self.boundaries)
        if len(b) < 3:
            raise ValueError("a partition needs at least one interior boundary")
        if b[0] != 0 or any(b2 <= b1 for b1, b2 in zip(b, b[1:])):
            raise ValueError("boundaries must start at 0 and increase strictly")
        object.__setattr__(self, "boundaries", b)

    @property
    def n(self) -> int:
        return self.boundaries[-1]

    @property
    def J(self) -> int:
        return len(self.boundaries) - 2

    @classmethod
    def from_changepoints(cls, changepoints, n: int) -> "Partition":
        return cls((0, *changepoints, n))

    def segment(self, j: int) -> tuple:
        """Half-open row range ``[tau_{j-1}, tau_{j+1})`` of segment ``j`` (1-based)."""
        if not 1 <= j <= self.J:
            raise IndexError(f"segment {j} out of range 1..{self.J}")
        return self.boundaries[j - 1], self.boundaries[j + 1]


def initial_partition(n: int, J: int) -> Partition:
    """Equal mesh ``tau_j = floor(n j / (J + 1))``."""
    if J < 1:
        raise ValueError("J must be at least 1")
    if n < 2 * (J + 1):
        raise ValueError(f"n = {n} is too small for J = {J} segments")
    return Partition(tuple((n * j) // (J + 1) for j in range(J + 2)))


@dataclass(frozen=True)
class MultiConfig:
    """Settings of the multi-changepoint procedure.

    ``eta`` holds the warm-up entropy thresholds, one per warm-up round; a
    candidate is removed when its normalized entropy is ``>= eta``, so any
    threshold above 1 disables that round's pruning.  ``prior_scale`` gives
    each segment a ``N(0, prior_scale * I)`` prior.
    """

    J: int = 10
    min_gap: int = 10
    eta: tuple = (0.75, 0.5)
    eta_final: float = 1.0
    warmup: GibbsConfig = field(default_factory=lambda: GibbsConfig(600, 300))
    final: GibbsConfig = field(default_factory=GibbsConfig)
    prior_scale: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "eta", tuple(float(e) for e in self.eta))
        if self.J < 1:
            raise ValueError("J must be at least 1")
        if self.min_gap < 2:
            raise ValueError("min_gap must be at least 2")
        if any(not e > 0 for e in (*self.eta, self.eta_final)):
            raise ValueError("entropy thresholds must be positive")
        if not self.prior_scale > 0:
            raise ValueError("prior_scale must be positive")

    def check(self, n: int) -> None:
        """Raise unless ``min_gap < floor(n / (2J + 2))``."""
        limit = n // (2 * self.J + 2)
        if not self.min_gap < limit:
            raise ValueError(f"infeasible: min_gap {self.min_gap} must be < floor(n/(2J+2)) = {limit}")


@dataclass(frozen=True)
class SegmentPosterior:
    """Fit on segment ``j`` covering rows ``lo+1 .. hi`` (global, 1-based).

    The changepoint support is ``lo+1 .. hi-1``.
    """

    index: int
    lo: int
    hi: int
    posterior: ChangepointPosterior
    samples: PosteriorSamples

    @property
    def entropy(self) -> float:
        return normalized_entropy(self.posterior)


@dataclass(frozen=True)
class MultiResult:
    """Final changepoints with their segment posteriors and summaries."""

    changepoints: tuple
    segments: tuple
    entropies: tuple
    intervals: tuple
    snr: tuple
    history: tuple = ()  # partitions used by each stage

    def __len__(self):
        return len(self.changepoints)


def _local(X, lo: int, hi: int):
    v = _as_values(X)[lo:hi]
    fm, _, _ = standardize_columns(v)
    return fm


def fit_segments(X, partition: Partition, config: MultiConfig, rng: RngStream,
                 gibbs: GibbsConfig | None = None, stage: int = 0) -> list:
    """Single-changepoint fit on every segment, each with the sub-stream ``rng.child(stage, j)``.

    Segment rows are re-standardized locally before fitting.
    """
    gibbs = gibbs or config.final
    v = _as_values(X)
    if v.shape[0] != partition.n:
        raise ValueError(f"partition is for n = {partition.n}, data has {v.shape[0]} rows")
    d = v.shape[1]
    prior = GaussianPrior.isotropic(d, config.prior_scale)
    out = []
    for j in range(1, partition.J + 1):
        lo, hi = partition.segment(j)
        try:
            samples = run_gibbs(_local(v, lo, hi), prior, config=gibbs, rng=rng.child(stage, j))
        except Exception as exc:
            raise type(exc)(f"segment {j} (rows {lo + 1}..{hi}): {exc}") from exc
        post = ChangepointPosterior.from_samples(samples, hi - lo, start=lo + 1)
        out.append(SegmentPosterior(j, lo, hi, post, samples))
    return out


def constrained_picks(posteriors, delta: int) -> list:
    """Left-to-right constrained modes as ``(segment position, changepoint)`` pairs.

    With ``k_0 = 0``, ``k_j`` maximizes segment ``j``'s pmf over
    ``[k_{j-1} + delta, hi_j - delta]``.  An empty window, or one holding no
    posterior mass, sets ``k_j = k_{j-1}``; such repeats (and a leading 0) are
    dropped.  Ties go to the smallest index.
    """
    picks = []
    prev = 0
    for pos, seg in enumerate(posteriors):
        post = seg.posterior
        lo_w = max(prev + delta, post.start)
        hi_w = min(seg.hi - delta, post.start + post.pmf.size - 1)
        k = prev
        if lo_w <= hi_w:
            window = post.pmf[lo_w - post.start : hi_w - post.start + 1]
            if window.max() > 0:
                k = lo_w + int(np.argmax(window))
        if k != prev:
            picks.append((pos, k))
        prev = k
    return picks


def constrained_modes(posteriors, delta: int) -> list:
    """Changepoint estimates from :func:`constrained_picks`."""
    return [k for _, k in constrained_picks(posteriors, delta)]


def _summaries(posteriors, kept):
    segs = tuple(posteriors[p] for p, _ in kept)
    return dict(
        changepoints=tuple(k for _, k in kept),
        segments=segs,
        entropies=tuple(s.entropy for s in segs),
        intervals=tuple(quantile_interval(s.posterior, 0.05) for s in segs),
        snr=tuple(snr_report(s.samples) if len(s.samples) >= 2 else None for s in segs),
    )


def prune_by_entropy(posteriors, picks, eta: float, history=()) -> MultiResult:
    """Keep the picks whose segment posterior has normalized entropy below ``eta``.

    ``picks`` are ``(segment position, changepoint)`` pairs from
    :func:`constrained_picks`; plain changepoints are matched to the segment
    whose support contains them, first match winning.
    """
    pairs = []
    for p in picks:
        if isinstance(p, tuple):
            pairs.append(p)
            continue
        pos = next(i for i, s in enumerate(posteriors) if s.lo < p < s.hi)
        pairs.append((pos, int(p)))
    kept = [(p, k) for p, k in pairs if posteriors[p].entropy < eta]
    return MultiResult(history=tuple(history), **_summaries(posteriors, kept))


def multi_fit(X, config: MultiConfig | None = None, rng: RngStream | None = None,
              partition: Partition | None = None) -> MultiResult:
    """Warm-up rounds, then the final fit on the refined partition.

    Each warm-up round fits with ``config.warmup``, extracts constrained
    modes and prunes with its threshold; the survivors become the next
    partition.  The final round uses ``config.final`` and ``eta_final``.
    Passing ``partition`` (with ``config.eta = ()``) fits a user-chosen
    partition directly.  If no candidate survives, the result is empty.
    """
    if rng is None:
        raise ValueError("multi_fit requires an RngStream")
    config = config or MultiConfig()
    v = _as_values(X)
    n = v.shape[0]
    if partition is None:
        config.check(n)
        partition = initial_partition(n, config.J)
    elif partition.n != n:
        raise ValueError(f"partition is for n = {partition.n}, data has {n} rows")
    history = []
    stages = [(config.warmup, eta) for eta in config.eta] + [(config.final, config.eta_final)]
    result = None
    for stage, (gibbs, eta) in enumerate(stages):
        history.append(partition.boundaries)
        posts = fit_segments(v, partition, config, rng, gibbs=gibbs, stage=stage)
        result = prune_by_entropy(posts, constrained_picks(posts, config.min_gap), eta, history)
        if not result.changepoints:
            return result
        partition = Partition.from_changepoints(result.changepoints, n)
    return result
