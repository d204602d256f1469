"""Seeded random streams and an exact Polya-gamma PG(1, z) sampler.

Streams are Philox (counter-based) generators keyed through
:class:`numpy.random.SeedSequence`, so a stream is fully determined by
``(seed, stream_id, path)`` and can be re-created in O(1) anywhere.

The PG(1, z) sampler is Devroye-style alternating-series accept-reject
(Polson, Scott & Windle, 2013).  It is exact: proposals are accepted or
rejected by bracketing the target density between partial sums of its
series expansion, never by truncating the series.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numba
import numpy as np

__all__ = ["RngStream", "make_stream", "sample_pg", "sample_pg_many", "pg_mean"]

_TRUNC = 0.64
_PI = math.pi
_LOG_2PI = math.log(2.0 * math.pi)
_SQRT2 = math.sqrt(2.0)


@dataclass
class RngStream:
    """A reproducible random stream.

    Parameters
    ----------
    seed : int
        Non-negative 64-bit seed.
    stream_id : int
        Non-negative 64-bit stream index (replication, segment, ...).
    path : tuple of int
        Optional sub-stream keys appended by :meth:`child`.
    """

    seed: int
    stream_id: int = 0
    path: tuple = ()
    generator: np.random.Generator = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        for v in (self.seed, self.stream_id, *self.path):
            if not 0 <= int(v) < 2**64:
                raise ValueError("seed and stream keys must be 64-bit unsigned integers")
        self.seed = int(self.seed)
        self.stream_id = int(self.stream_id)
        self.path = tuple(int(p) for p in self.path)
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id, *self.path))
        self.generator = np.random.Generator(np.random.Philox(ss))

    def child(self, *keys: int) -> "RngStream":
        """Independent sub-stream derived from this stream's identity (not its state)."""
        return RngStream(self.seed, self.stream_id, self.path + tuple(keys))

    def fresh(self) -> "RngStream":
        """Same identity, rewound to the start of the sequence."""
        return RngStream(self.seed, self.stream_id, self.path)


def make_stream(seed: int, stream_id: int = 0) -> RngStream:
    """Create the stream identified by ``(seed, stream_id)``."""
    return RngStream(seed, stream_id)


@numba.njit(cache=True)
def _log_ncdf(x):
    # log of the standard normal CDF, with an asymptotic tail below -20
    if x > -20.0:
        return math.log(0.5 * math.erfc(-x / _SQRT2))
    x2 = x * x
    return -0.5 * x2 - math.log(-x) - 0.5 * _LOG_2PI + math.log(1.0 - 1.0 / x2 + 3.0 / (x2 * x2))


@numba.njit(cache=True)
def _series_coef(n, x):
    """n-th coefficient of the alternating series for the J*(1, 0) density."""
    k = (n + 0.5) * _PI
    if x > _TRUNC:
        return k * math.exp(-0.5 * k * k * x)
    if x > 0.0:
        expnt = -1.5 * (math.log(0.5 * _PI) + math.log(x)) + math.log(k) - 2.0 * (n + 0.5) * (n + 0.5) / x
        return math.exp(expnt)
    return 0.0


@numba.njit(cache=True)
def _mass_texpon(z):
    # probability of drawing the proposal from the exponential (right) piece
    t = _TRUNC
    fz = 0.125 * _PI * _PI + 0.5 * z * z
    b = math.sqrt(1.0 / t) * (t * z - 1.0)
    a = -math.sqrt(1.0 / t) * (t * z + 1.0)
    x0 = math.log(fz) + fz * t
    xb = x0 - z + _log_ncdf(b)
    xa = x0 + z + _log_ncdf(a)
    qdivp = 4.0 / _PI * (math.exp(xb) + math.exp(xa))
    return 1.0 / (1.0 + qdivp)


@numba.njit(cache=True)
def _rtigauss(rng, z):
    """Inverse-Gaussian(1/z, 1) truncated to (0, TRUNC)."""
    t = _TRUNC
    x = t + 1.0
    if z == 0.0 or 1.0 / z > t:
        alpha = 0.0
        while rng.random() > alpha:
            e1 = rng.standard_exponential()
            e2 = rng.standard_exponential()
            while e1 * e1 > 2.0 * e2 / t:
                e1 = rng.standard_exponential()
                e2 = rng.standard_exponential()
            x = 1.0 + e1 * t
            x = t / (x * x)
            alpha = math.exp(-0.5 * z * z * x)
    else:
        mu = 1.0 / z
        while x > t:
            y = rng.standard_normal()
            y2 = y * y
            half_mu = 0.5 * mu
            mu_y = mu * y2
            x = mu + half_mu * mu_y - half_mu * math.sqrt(4.0 * mu_y + mu_y * mu_y)
            if rng.random() > mu / (mu + x):
                x = mu * mu / x
    return x


@numba.njit(cache=True)
def pg_draw(rng, z):
    """One exact PG(1, z) draw using ``rng`` (a numpy Generator)."""
    # PG(1, z) = J*(1, |z|/2) / 4 and PG(1, z) = PG(1, -z)
    z = abs(z) * 0.5
    fz = 0.125 * _PI * _PI + 0.5 * z * z
    p_exp = _mass_texpon(z)
    while True:
        if rng.random() < p_exp:
            x = _TRUNC + rng.standard_exponential() / fz
        else:
            x = _rtigauss(rng, z)
        s = _series_coef(0, x)
        y = rng.random() * s
        n = 0
        while True:
            n += 1
            if n % 2 == 1:
                s -= _series_coef(n, x)
                if y <= s:
                    return 0.25 * x
            else:
                s += _series_coef(n, x)
                if y > s:
                    break


@numba.njit(cache=True)
def pg_fill(rng, z, out):
    for i in range(z.shape[0]):
        out[i] = pg_draw(rng, z[i])


def sample_pg(z: float, rng: RngStream) -> float:
    """Draw one PG(1, z) variate.

    Parameters
    ----------
    z : float
        Tilting parameter; any finite real.
    rng : RngStream
        Stream to draw from (advanced in place).
    """
    z = float(z)
    if not math.isfinite(z):
        raise ValueError("PG tilting parameter must be finite")
    return pg_draw(rng.generator, z)


def sample_pg_many(z, rng: RngStream) -> np.ndarray:
    """Vector of independent PG(1, z_i) draws, one per entry of ``z``."""
    z = np.ascontiguousarray(z, dtype=np.float64).ravel()
    if not np.all(np.isfinite(z)):
        raise ValueError("PG tilting parameter must be finite")
    out = np.empty_like(z)
    pg_fill(rng.generator, z, out)
    return out


def pg_mean(z):
    """E[PG(1, z)] = tanh(z/2) / (2z), with the z -> 0 limit 1/4."""
    z = np.abs(np.asarray(z, dtype=np.float64))
    small = z < 1e-6
    safe = np.where(small, 1.0, z)
    # tanh(z/2)/(2z) = 1/4 - z^2/48 + O(z^4)
    return np.where(small, 0.25 - z * z / 48.0, np.tanh(safe / 2.0) / (2.0 * safe))
