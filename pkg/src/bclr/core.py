"""Single-changepoint BCLR: preprocessing, full conditionals and the Gibbs chain.

The model treats rows ``x_1 .. x_n`` of a centered, scaled feature matrix as
covariates of a logistic regression whose labels are 0 up to the changepoint
``kappa`` and 1 afterwards.  Polya-gamma augmentation gives three tractable
full conditionals, sampled in the order kappa -> omega -> beta.

Changepoints are 1-based: ``kappa = k`` means rows ``1..k`` precede the change.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numba
import numpy as np
from scipy.special import gammaln, logsumexp

from .rng import RngStream, pg_draw

__all__ = [
    "FeatureMatrix",
    "GaussianPrior",
    "KappaPrior",
    "GibbsConfig",
    "PosteriorSamples",
    "IllConditionedPrecision",
    "NotStandardizedError",
    "standardize_columns",
    "log_kappa_weights",
    "sample_kappa",
    "sample_omegas",
    "sample_beta",
    "run_gibbs",
    "is_standardized",
]

CONSTANT_VAR_TOL = 1e-12
MEAN_TOL = 1e-10
VAR_TOL = 1e-8


class IllConditionedPrecision(np.linalg.LinAlgError):
    """X'ΩX + Σ⁻¹ could not be factorized."""


class NotStandardizedError(ValueError):
    """Raised when the sampler is given data that is not centered and scaled."""


@dataclass(frozen=True)
class FeatureMatrix:
    """Time-ordered n x d feature matrix.

    ``constant`` flags columns that had (numerically) zero variance when the
    matrix was standardized; those columns are centered to zero and left
    unscaled.
    """

    values: np.ndarray
    standardized: bool = False
    constant: np.ndarray = None

    def __post_init__(self):
        v = np.array(self.values, dtype=np.float64, order="C", copy=True)
        if v.ndim == 1:
            v = v[:, None]
        if v.ndim != 2:
            raise ValueError("feature matrix must be 2-dimensional")
        if v.shape[0] < 2 or v.shape[1] < 1:
            raise ValueError(f"feature matrix needs n >= 2 rows and d >= 1 columns, got {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("feature matrix contains non-finite values")
        v.setflags(write=False)
        const = np.zeros(v.shape[1], dtype=bool) if self.constant is None else np.asarray(self.constant, bool).copy()
        if const.shape != (v.shape[1],):
            raise ValueError("constant-column mask has wrong length")
        const.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "constant", const)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1]


def _as_values(X) -> np.ndarray:
    if isinstance(X, FeatureMatrix):
        return X.values
    v = np.ascontiguousarray(X, dtype=np.float64)
    return v[:, None] if v.ndim == 1 else v


def standardize_columns(X):
    """Center each column and divide by its population standard deviation.

    Returns
    -------
    (FeatureMatrix, means, scales)
        Columns with variance below 1e-12 are centered, given scale 1 and
        flagged as constant.
    """
    v = _as_values(X)
    if v.shape[0] < 2:
        raise ValueError("standardization needs at least 2 rows")
    means = v.mean(axis=0)
    centered = v - means
    var = np.mean(centered**2, axis=0)
    constant = var < CONSTANT_VAR_TOL
    scales = np.where(constant, 1.0, np.sqrt(np.where(constant, 1.0, var)))
    out = centered / scales
    out[:, constant] = 0.0
    return FeatureMatrix(out, standardized=True, constant=constant), means, scales


def is_standardized(X) -> bool:
    """True when every column is centered with unit population variance (or constant zero)."""
    v = _as_values(X)
    mean = v.mean(axis=0)
    var = np.mean((v - mean) ** 2, axis=0)
    const = var < CONSTANT_VAR_TOL
    ok_mean = np.abs(mean) < MEAN_TOL
    ok_var = np.abs(var - 1.0) < VAR_TOL
    return bool(np.all(ok_mean & (ok_var | const)))


@dataclass(frozen=True)
class GaussianPrior:
    """N(mu, sigma) prior on the regression coefficients."""

    mu: np.ndarray
    sigma: np.ndarray
    precision: np.ndarray = field(init=False, repr=False)
    precision_mu: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        mu = np.array(self.mu, dtype=np.float64).ravel()
        sigma = np.atleast_2d(np.array(self.sigma, dtype=np.float64))
        d = mu.shape[0]
        if sigma.shape != (d, d):
            raise ValueError(f"prior covariance must be {d}x{d}, got {sigma.shape}")
        if not np.all(np.isfinite(mu)) or not np.all(np.isfinite(sigma)):
            raise ValueError("prior parameters must be finite")
        if np.max(np.abs(sigma - sigma.T)) > 1e-12:
            raise ValueError("prior covariance must be symmetric")
        try:
            chol = np.linalg.cholesky(sigma)
        except np.linalg.LinAlgError as exc:
            raise ValueError("prior covariance must be positive definite") from exc
        inv_chol = np.linalg.solve(chol, np.eye(d))
        prec = inv_chol.T @ inv_chol
        prec = 0.5 * (prec + prec.T)
        for name, val in (("mu", mu), ("sigma", sigma), ("precision", prec), ("precision_mu", prec @ mu)):
            val.setflags(write=False)
            object.__setattr__(self, name, val)

    @property
    def d(self) -> int:
        return self.mu.shape[0]

    @classmethod
    def isotropic(cls, d: int, scale: float = 1.0) -> "GaussianPrior":
        """N(0, scale * I_d)."""
        return cls(np.zeros(d), scale * np.eye(d))


@dataclass(frozen=True)
class KappaPrior:
    """Prior over changepoint locations ``1..n-1``, stored as normalized log weights."""

    log_weights: np.ndarray

    def __post_init__(self):
        lw = np.array(self.log_weights, dtype=np.float64).ravel()
        if lw.size < 1 or not np.all(np.isfinite(lw)):
            raise ValueError("kappa prior weights must all be positive")
        lw = lw - logsumexp(lw)
        lw.setflags(write=False)
        object.__setattr__(self, "log_weights", lw)

    @property
    def weights(self) -> np.ndarray:
        return np.exp(self.log_weights)

    @property
    def n(self) -> int:
        """Series length this prior is defined for."""
        return self.log_weights.size + 1

    @classmethod
    def uniform(cls, n: int) -> "KappaPrior":
        return cls(np.zeros(n - 1))

    @classmethod
    def from_weights(cls, weights) -> "KappaPrior":
        w = np.asarray(weights, dtype=np.float64)
        if np.any(w <= 0):
            raise ValueError("kappa prior weights must all be positive")
        return cls(np.log(w))

    @classmethod
    def binomial(cls, n: int, p: float, nu: float = 1.0) -> "KappaPrior":
        """``pi(k) ∝ [C(n-2, k-1) p^(k-1) (1-p)^(n-1-k)]^nu`` for k = 1..n-1.

        With n = 50 and p = 0.8 this is the binomial prior with mode 40; small
        ``nu`` interpolates towards the uniform prior.
        """
        if not 0.0 < p < 1.0:
            raise ValueError("binomial prior needs 0 < p < 1")
        m = n - 2
        j = np.arange(n - 1, dtype=np.float64)
        logpmf = gammaln(m + 1) - gammaln(j + 1) - gammaln(m - j + 1) + j * math.log(p) + (m - j) * math.log1p(-p)
        return cls(nu * logpmf)


@dataclass(frozen=True)
class GibbsConfig:
    iterations: int = 5000
    burn_in: int = 2500

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError("iterations must be positive")
        if not 0 <= self.burn_in < self.iterations:
            raise ValueError("burn_in must satisfy 0 <= burn_in < iterations")


@dataclass(frozen=True)
class PosteriorSamples:
    """Post burn-in draws: ``kappa`` (m,) ints and ``beta`` (m, d)."""

    kappa: np.ndarray
    beta: np.ndarray

    def __post_init__(self):
        k = np.asarray(self.kappa, dtype=np.int64).ravel()
        b = np.asarray(self.beta, dtype=np.float64)
        if b.ndim == 1:
            b = b[:, None]
        if b.shape[0] != k.shape[0]:
            raise ValueError("kappa and beta draws must be index-aligned")
        object.__setattr__(self, "kappa", k)
        object.__setattr__(self, "beta", b)

    def __len__(self):
        return self.kappa.shape[0]

    def pmf(self, n: int) -> np.ndarray:
        """Relative frequencies of kappa over ``1..n-1`` (index 0 is kappa = 1)."""
        counts = np.bincount(self.kappa - 1, minlength=n - 1)[: n - 1]
        return counts / counts.sum()


# ---------------------------------------------------------------------------
# jitted kernels


@numba.njit(cache=True)
def _kappa_logpmf(eta, log_prior, out):
    """Normalized log pmf over kappa = 1..n-1 given linear predictors ``eta``."""
    n = eta.shape[0]
    s = 0.0
    for k in range(n - 1, 0, -1):
        s += eta[k]
        out[k - 1] = s + log_prior[k - 1]
    mx = -np.inf
    for k in range(n - 1):
        if out[k] > mx:
            mx = out[k]
    tot = 0.0
    for k in range(n - 1):
        tot += math.exp(out[k] - mx)
    lz = mx + math.log(tot)
    for k in range(n - 1):
        out[k] -= lz


@numba.njit(cache=True)
def _categorical(rng, logp):
    """Draw index i (0-based) with probability exp(logp[i]) / sum."""
    m = logp.shape[0]
    mx = -np.inf
    for i in range(m):
        if logp[i] > mx:
            mx = logp[i]
    tot = 0.0
    for i in range(m):
        tot += math.exp(logp[i] - mx)
    u = rng.random() * tot
    acc = 0.0
    last = 0
    for i in range(m):
        w = math.exp(logp[i] - mx)
        if w > 0.0:
            last = i
            acc += w
            if u < acc:
                return i
    return last


@numba.njit(cache=True)
def _cholesky(a, L):
    """Lower Cholesky factor of ``a`` into ``L``; returns False if not positive definite."""
    d = a.shape[0]
    for j in range(d):
        s = a[j, j]
        for k in range(j):
            s -= L[j, k] * L[j, k]
        if not s > 0.0:
            return False
        ljj = math.sqrt(s)
        L[j, j] = ljj
        for i in range(j + 1, d):
            t = a[i, j]
            for k in range(j):
                t -= L[i, k] * L[j, k]
            L[i, j] = t / ljj
        for i in range(j):
            L[i, j] = 0.0
    return True


@numba.njit(cache=True)
def _beta_draw(rng, X, kappa, omega, prec0, prec_mu, out, P, L, b, tmp):
    """beta | kappa, omega ~ N(V (X'delta + Σ⁻¹mu), V) with V = (X'ΩX + Σ⁻¹)⁻¹."""
    n, d = X.shape
    for i in range(d):
        b[i] = prec_mu[i]
        for j in range(d):
            P[i, j] = prec0[i, j]
    for r in range(n):
        w = omega[r]
        delta = -0.5 if r < kappa else 0.5
        for i in range(d):
            xi = X[r, i]
            b[i] += xi * delta
            wxi = w * xi
            for j in range(i + 1):
                P[i, j] += wxi * X[r, j]
    for i in range(d):
        for j in range(i):
            P[j, i] = P[i, j]
    if not _cholesky(P, L):
        return False
    # forward solve L y = b
    for i in range(d):
        s = b[i]
        for k in range(i):
            s -= L[i, k] * tmp[k]
        tmp[i] = s / L[i, i]
    # add noise in whitened space, then back solve L' beta = y + eps
    for i in range(d):
        tmp[i] += rng.standard_normal()
    for i in range(d - 1, -1, -1):
        s = tmp[i]
        for k in range(i + 1, d):
            s -= L[k, i] * out[k]
        out[i] = s / L[i, i]
    return True


@numba.njit(cache=True)
def _run_chain(rng, X, log_prior, prec0, prec_mu, mu0, iterations, burn_in, kappa_out, beta_out):
    n, d = X.shape
    beta = mu0.copy()
    eta = np.empty(n)
    omega = np.empty(n)
    logp = np.empty(n - 1)
    P = np.empty((d, d))
    L = np.zeros((d, d))
    b = np.empty(d)
    tmp = np.empty(d)
    kappa = _categorical(rng, log_prior) + 1
    for it in range(iterations):
        for r in range(n):
            s = 0.0
            for j in range(d):
                s += X[r, j] * beta[j]
            eta[r] = s
        _kappa_logpmf(eta, log_prior, logp)
        kappa = _categorical(rng, logp) + 1
        for r in range(n):
            omega[r] = pg_draw(rng, eta[r])
        if not _beta_draw(rng, X, kappa, omega, prec0, prec_mu, beta, P, L, b, tmp):
            return it
        if it >= burn_in:
            k = it - burn_in
            kappa_out[k] = kappa
            for j in range(d):
                beta_out[k, j] = beta[j]
    return -1


# ---------------------------------------------------------------------------
# public operations


def _check_beta(beta, d):
    beta = np.ascontiguousarray(beta, dtype=np.float64).ravel()
    if beta.shape[0] != d or not np.all(np.isfinite(beta)):
        raise ValueError("invalid coefficients")
    return beta


def _log_prior(prior, n):
    if prior is None:
        return np.zeros(n - 1) - math.log(n - 1)
    if prior.log_weights.size != n - 1:
        raise ValueError(f"kappa prior has support 1..{prior.n - 1}, data needs 1..{n - 1}")
    return np.ascontiguousarray(prior.log_weights)


def log_kappa_weights(X, beta, prior: KappaPrior | None = None) -> np.ndarray:
    """Normalized log full conditional of kappa given beta.

    Entry ``k - 1`` is ``log pi(kappa = k | beta, X)``, computed as
    ``sum_{i > k} x_i'beta + log prior(k)`` normalized in log space.
    """
    v = _as_values(X)
    beta = _check_beta(beta, v.shape[1])
    out = np.empty(v.shape[0] - 1)
    _kappa_logpmf(v @ beta, _log_prior(prior, v.shape[0]), out)
    return out


def sample_kappa(log_weights, rng: RngStream) -> int:
    """Categorical draw of kappa in ``1..len(log_weights)``."""
    lw = np.ascontiguousarray(log_weights, dtype=np.float64)
    if not np.any(np.isfinite(lw)):
        raise ValueError("log weights have no finite entry")
    return int(_categorical(rng.generator, lw)) + 1


def sample_omegas(X, beta, rng: RngStream) -> np.ndarray:
    """omega_i ~ PG(1, x_i'beta), independently for every row."""
    v = _as_values(X)
    beta = _check_beta(beta, v.shape[1])
    eta = v @ beta
    out = np.empty(v.shape[0])
    g = rng.generator
    for i in range(eta.shape[0]):
        out[i] = pg_draw(g, eta[i])
    return out


def sample_beta(X, kappa: int, omegas, prior: GaussianPrior, rng: RngStream) -> np.ndarray:
    """beta | kappa, omega ~ N(m, V) via a Cholesky factor of the precision."""
    v = _as_values(X)
    n, d = v.shape
    omegas = np.ascontiguousarray(omegas, dtype=np.float64).ravel()
    if omegas.shape[0] != n or np.any(omegas <= 0):
        raise ValueError("omegas must be n positive values")
    if prior.d != d:
        raise ValueError("prior dimension does not match the data")
    if not 0 <= kappa <= n:
        raise ValueError("kappa out of range")
    out = np.empty(d)
    ok = _beta_draw(
        rng.generator, v, int(kappa), omegas, prior.precision, prior.precision_mu,
        out, np.empty((d, d)), np.zeros((d, d)), np.empty(d), np.empty(d),
    )
    if not ok:
        raise IllConditionedPrecision("ill-conditioned precision")
    return out


def run_gibbs(
    X,
    prior_beta: GaussianPrior,
    prior_kappa: KappaPrior | None = None,
    config: GibbsConfig | None = None,
    rng: RngStream | None = None,
) -> PosteriorSamples:
    """Run the kappa -> omega -> beta Gibbs sampler.

    Parameters
    ----------
    X : FeatureMatrix or array
        Standardized features (refused otherwise).
    prior_beta : GaussianPrior
    prior_kappa : KappaPrior, optional
        Defaults to uniform on ``1..n-1``.
    config : GibbsConfig, optional
        Defaults to 5000 iterations with 2500 burn-in.
    rng : RngStream
        Consumed in place.

    Notes
    -----
    beta starts at the prior mean and kappa at a draw from its prior.
    """
    if rng is None:
        raise ValueError("run_gibbs requires an RngStream")
    config = config or GibbsConfig()
    v = _as_values(X)
    n, d = v.shape
    if n < 3:
        raise ValueError("need at least 3 observations")
    if not is_standardized(v):
        raise NotStandardizedError("data must be centered and scaled")
    if prior_beta.d != d:
        raise ValueError(f"prior dimension {prior_beta.d} does not match data dimension {d}")
    m = config.iterations - config.burn_in
    kappa_out = np.empty(m, dtype=np.int64)
    beta_out = np.empty((m, d))
    status = _run_chain(
        rng.generator, np.ascontiguousarray(v), _log_prior(prior_kappa, n),
        prior_beta.precision, prior_beta.precision_mu, np.array(prior_beta.mu),
        config.iterations, config.burn_in, kappa_out, beta_out,
    )
    if status >= 0:
        raise IllConditionedPrecision(f"ill-conditioned precision at iteration {status}")
    return PosteriorSamples(kappa_out, beta_out)
