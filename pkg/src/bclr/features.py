"""Vectorizations of persistence diagrams.

``f_stat`` summarizes the lifetimes ``l = d - b`` and midlifes
``m = (d + b) / 2`` of PD0 and PD1 with 36 statistics.  Conventions:

* variance is the population second central moment;
* skewness is m3 / m2^1.5 and kurtosis m4 / m2^2 (not excess), both 0 when
  the sample has no spread;
* percentiles interpolate linearly between order statistics
  (``numpy.percentile`` default);
* every statistic of an empty diagram is 0.
"""

from __future__ import annotations

import numpy as np

from .cubical import PersistenceDiagram

__all__ = [
    "persistent_entropy",
    "alps",
    "f_stat",
    "f_stat_labels",
    "persistence_image",
    "moment_summary",
    "FSTAT_DIM",
]

FSTAT_DIM = 36
_FAMILIES = ("mean", "variance", "skewness", "kurtosis", "p25", "p50", "p75", "iqr")
_VARIANTS = (("l", 0), ("m", 0), ("l", 1), ("m", 1))


def f_stat_labels() -> list:
    """Coordinate names of :func:`f_stat`, e.g. ``"skewness(l, D0)"``."""
    labels = [f"{fam}({var}, D{dim})" for fam in _FAMILIES for var, dim in _VARIANTS]
    labels += ["entropy(l, D0)", "entropy(l, D1)", "alps(l, D0)", "alps(l, D1)"]
    return labels


def persistent_entropy(lifetimes) -> float:
    """Shannon entropy of lifetimes normalized by their total; 0 when empty."""
    l = np.asarray(lifetimes, dtype=np.float64).ravel()
    if l.size == 0:
        return 0.0
    p = l / l.sum()
    p = p[p > 0]
    return float(max(-np.sum(p * np.log(p)), 0.0))


def alps(lifetimes) -> float:
    """Integral over t >= 0 of log(1 + #{l_p > t}).

    The integrand is a step function, so the integral is the exact sum
    ``sum_k (l_(k) - l_(k-1)) * log(N - k + 2)`` over sorted lifetimes.
    """
    l = np.sort(np.asarray(lifetimes, dtype=np.float64).ravel())
    if l.size == 0:
        return 0.0
    n = l.size
    gaps = np.diff(np.concatenate([[0.0], l]))
    counts = n - np.arange(n)  # points still alive on each gap
    return float(np.sum(gaps * np.log1p(counts)))


def moment_summary(x) -> np.ndarray:
    """(mean, variance, skewness, kurtosis, p25, p50, p75, iqr) of a sample."""
    x = np.asarray(x, dtype=np.float64).ravel()
    if x.size == 0:
        return np.zeros(len(_FAMILIES))
    mean = x.mean()
    c = x - mean
    m2 = np.mean(c**2)
    if m2 <= (1e-12 * max(1.0, abs(mean))) ** 2:
        m2 = skew = kurt = 0.0
    else:
        skew = np.mean(c**3) / m2**1.5
        kurt = np.mean(c**4) / m2**2
    q25, q50, q75 = np.percentile(x, [25, 50, 75])
    return np.array([mean, m2, skew, kurt, q25, q50, q75, q75 - q25])


def f_stat(pd0: PersistenceDiagram, pd1: PersistenceDiagram) -> np.ndarray:
    """36-dimensional statistical embedding of a (PD0, PD1) pair.

    Ordered by family (mean, variance, skewness, kurtosis, 25th, 50th and
    75th percentile, IQR), each over (l, D0), (m, D0), (l, D1), (m, D1);
    then persistent entropy of l for D0, D1 and ALPS of l for D0, D1.
    """
    samples = {
        ("l", 0): pd0.lifetimes, ("m", 0): pd0.midlifes,
        ("l", 1): pd1.lifetimes, ("m", 1): pd1.midlifes,
    }
    table = np.column_stack([moment_summary(samples[v]) for v in _VARIANTS])  # (8, 4)
    tail = [persistent_entropy(pd0.lifetimes), persistent_entropy(pd1.lifetimes),
            alps(pd0.lifetimes), alps(pd1.lifetimes)]
    return np.concatenate([table.ravel(), tail])


def persistence_image(pd: PersistenceDiagram, sigma: float = 0.5, weight=(0.5, 1.0), size: int = 6) -> np.ndarray:
    """Persistence image sampled on a ``size x size`` grid, flattened column by column.

    The surface ``rho(x, y) = sum_p arctan(C l_p^p) exp(-((b_p-x)^2 + (l_p-y)^2) / (2 sigma^2))``
    is evaluated at equally spaced births ``x_i`` in ``[min b, max b]`` and
    lifetimes ``y_j`` in ``[min l, max l]``; entry ``j * size + i`` is
    ``rho(x_i, y_j)``.  A degenerate range collapses that axis to its single
    value.  An empty diagram gives zeros.
    """
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    if len(pd) == 0:
        return np.zeros(size * size)
    C, p = weight
    b, l = pd.births, pd.lifetimes
    xs = np.linspace(b.min(), b.max(), size)
    ys = np.linspace(l.min(), l.max(), size)
    w = np.arctan(C * l**p)
    gx = np.exp(-((b[:, None] - xs[None, :]) ** 2) / (2 * sigma**2))  # (N, size)
    gy = np.exp(-((l[:, None] - ys[None, :]) ** 2) / (2 * sigma**2))
    rho = np.einsum("n,ni,nj->ij", w, gx, gy)  # rho[i, j] = rho(x_i, y_j)
    return rho.ravel(order="F")
