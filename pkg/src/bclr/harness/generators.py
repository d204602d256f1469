"""Synthetic scenarios with known changepoints.

Every generator takes an :class:`~bclr.rng.RngStream` and consumes its
generator in place.  Changepoints are 1-based: rows ``1..kappa`` follow the
pre-change law.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..rng import RngStream, make_stream

__all__ = [
    "ScenarioSpec",
    "SCENARIOS",
    "gen_exp_images",
    "gen_mixed",
    "gen_covariance",
    "gen_multi3",
    "generate",
    "MIXED_B",
    "COV_SIGMA1",
    "MULTI_SIGMAS",
]

MIXED_B = np.array([[1.0, 0.0, 0.0], [0.0, 2.0, -1.0], [0.0, 0.0, 1.0]])
MIXED_P0 = (0.5, 0.2, 0.3)
MIXED_P1 = (0.1, 0.5, 0.4)

COV_SIGMA1 = np.array([
    [1.0, 0.8, 0.1, 0.0],
    [0.8, 1.0, 0.0, 0.0],
    [0.1, 0.0, 1.0, 0.0],
    [0.0, 0.0, 0.0, 1.0],
])

MULTI_SIGMAS = (
    np.array([[1.0, 0.2, 0.1], [0.2, 1.0, 0.0], [0.1, 0.0, 1.0]]),
    np.array([[4.0, 0.4, 0.2], [0.4, 1.0, 0.0], [0.2, 0.0, 1.0]]),
    np.array([[4.0, 0.4, -1.7], [0.4, 1.0, 0.0], [-1.7, 0.0, 1.0]]),
)
MULTI_BREAKS = (100, 175, 205)

_IMAGE_VARIANTS = {1: (25, -2.0), 2: (40, 1.0)}


def gen_exp_images(variant: int, rng: RngStream, n: int = 50, size: int = 50, per_frame: bool = True):
    """Noise videos where a bright or dark square appears after the change.

    Pixels are iid N(0, 1).  Post-change frames add the variant's offset
    (-2 after frame 25, or +1 after frame 40) on rows ``L1-W1..L1+W1`` and
    columns ``L2-W2..L2+W2`` (1-based), with ``L`` uniform on 5..44 and
    ``W`` uniform on 2..4.  The square is redrawn for every frame unless
    ``per_frame`` is False.

    Returns
    -------
    (frames, kappa_star)
        ``frames`` has shape ``(n, size, size)``.
    """
    if variant not in _IMAGE_VARIANTS:
        raise ValueError("variant must be 1 or 2")
    kappa, offset = _IMAGE_VARIANTS[variant]
    g = rng.generator
    frames = g.standard_normal((n, size, size))
    fixed = None
    for i in range(kappa, n):
        if fixed is None or per_frame:
            L = g.integers(5, 45, size=2)
            W = g.integers(2, 5, size=2)
            fixed = (L, W)
        L, W = fixed
        frames[i, L[0] - W[0] - 1 : L[0] + W[0], L[1] - W[1] - 1 : L[1] + W[1]] += offset
    return frames, kappa


def gen_mixed(rng: RngStream, n: int = 600, kappa: int = 350):
    """Two category dummies whose law changes, plus three static Laplace mixtures.

    Returns ``(rows, kappa_star)`` with columns ``1{Z=1}, 1{Z=2}, (Y B)``.
    """
    g = rng.generator
    y = g.laplace(0.0, 1.0, size=(n, 3)) @ MIXED_B
    z = np.empty(n, dtype=np.int64)
    z[:kappa] = g.choice(3, size=kappa, p=MIXED_P0) + 1
    z[kappa:] = g.choice(3, size=n - kappa, p=MIXED_P1) + 1
    dummies = np.column_stack([(z == 1), (z == 2)]).astype(np.float64)
    return np.column_stack([dummies, y]), kappa


def _mvn(g, mean, cov, m):
    L = np.linalg.cholesky(cov)
    return g.standard_normal((m, cov.shape[0])) @ L.T + mean


def gen_covariance(rng: RngStream, n: int = 300, kappa: int = 200):
    """N(0, I4) then N(0, Sigma1), where Sigma1 correlates x1 with x2 (0.8) and x3 (0.1)."""
    g = rng.generator
    rows = np.vstack([_mvn(g, np.zeros(4), np.eye(4), kappa), _mvn(g, np.zeros(4), COV_SIGMA1, n - kappa)])
    return rows, kappa


def gen_multi3(rng: RngStream):
    """250 trivariate normal rows with changes in variance, mean and correlation.

    Returns ``(rows, (100, 175, 205))``.
    """
    g = rng.generator
    s1, s2, s3 = MULTI_SIGMAS
    mu = np.array([0.0, 3.0, 0.0])
    z = np.zeros(3)
    rows = np.vstack([
        _mvn(g, z, s1, 100),
        _mvn(g, z, s2, 75),
        _mvn(g, mu, s2, 30),
        _mvn(g, mu, s3, 45),
    ])
    return rows, MULTI_BREAKS


SCENARIOS = ("exp1", "exp2", "mixed", "covariance", "multi3")


@dataclass(frozen=True)
class ScenarioSpec:
    """A scenario kind with replication count and master seed."""

    kind: str
    reps: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.kind not in SCENARIOS:
            raise ValueError(f"unknown scenario {self.kind!r}; choose from {', '.join(SCENARIOS)}")
        if self.reps < 1:
            raise ValueError("reps must be positive")

    def stream(self, rep: int) -> RngStream:
        """Master stream of replication ``rep``; data use ``child(0)``, chains ``child(1)``."""
        return make_stream(self.seed, rep)


def generate(kind: str, rng: RngStream):
    """Dispatch on scenario kind; returns ``(data, truth)``."""
    if kind == "exp1":
        return gen_exp_images(1, rng)
    if kind == "exp2":
        return gen_exp_images(2, rng)
    if kind == "mixed":
        return gen_mixed(rng)
    if kind == "covariance":
        return gen_covariance(rng)
    if kind == "multi3":
        return gen_multi3(rng)
    raise ValueError(f"unknown scenario {kind!r}")
