"""Log-symmetric distribution kernels.

A log-symmetric distribution on (0, inf) is characterized by a density
generating function g with integral_0^inf u^(-1/2) g(u) du = 1, a median
eta > 0, and a shape parameter phi > 0.  The density is

    f(z) = g(ztilde^2) / (z sqrt(phi)),   ztilde = (log z - log eta) / sqrt(phi).

Equivalently log(Z) is symmetric about log(eta); the standard symmetric base
has density f0(w) = g(w^2) and CDF F0(w).
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy import integrate, interpolate, special, stats

__all__ = [
    "Family",
    "DensityGenerator",
    "LogSymmetricDist",
    "LATENCY_FAMILY_ALIASES",
]

_LOG_SQRT_2PI = 0.5 * np.log(2.0 * np.pi)


class Family(str, Enum):
    """Named log-symmetric families."""

    LOG_NORMAL = "lognormal"
    LOG_T = "logt"
    BIRNBAUM_SAUNDERS = "bs"
    LOG_LOGISTIC_I = "loglog1"
    LOG_LOGISTIC_II = "loglog2"
    LOG_POWER_EXP = "lpe"


# CLI spellings accepted for each family.
LATENCY_FAMILY_ALIASES = {
    "lognormal": Family.LOG_NORMAL,
    "logt": Family.LOG_T,
    "bs": Family.BIRNBAUM_SAUNDERS,
    "loglog1": Family.LOG_LOGISTIC_I,
    "loglog2": Family.LOG_LOGISTIC_II,
    "lpe": Family.LOG_POWER_EXP,
}

_NEEDS_EXTRA = {Family.LOG_T, Family.BIRNBAUM_SAUNDERS, Family.LOG_POWER_EXP}


@functools.lru_cache(maxsize=1)
def _loglogistic1_tables():
    """Normalizing constant and F0 spline for the type I log-logistic kernel.

    The constant c solves integral_{-inf}^{inf} c e^(-w^2) (1+e^(-w^2))^(-2) dw = 1.
    F0 is tabulated on a dense symmetric grid; beyond |w| = 12 the tail mass
    is below 1e-60, so the spline plus saturation covers the full real line.
    """
    unnorm = lambda w: np.exp(-w * w) / (1.0 + np.exp(-w * w)) ** 2
    total, _ = integrate.quad(unnorm, 0.0, 12.0, epsabs=1e-13, epsrel=1e-13)
    c = 1.0 / (2.0 * total)

    w_grid = np.linspace(0.0, 12.0, 6001)
    dens = c * np.exp(-w_grid * w_grid) / (1.0 + np.exp(-w_grid * w_grid)) ** 2
    half = integrate.cumulative_simpson(dens, x=w_grid, initial=0.0)
    f_grid = 0.5 + half
    spline = interpolate.CubicSpline(w_grid, f_grid)
    return c, w_grid, f_grid, spline


@dataclass(frozen=True)
class DensityGenerator:
    """A density generating function g for one log-symmetric family.

    ``extra`` is the fixed auxiliary parameter: degrees of freedom nu > 0
    (log-t), alpha > 0 (Birnbaum-Saunders), or -1 < k <= 1 (log-power-
    exponential).  It is set at construction and never estimated.
    """

    family: Family
    extra: float | None = None

    def __post_init__(self):
        fam = Family(self.family)
        object.__setattr__(self, "family", fam)
        if fam in _NEEDS_EXTRA:
            if self.extra is None:
                raise ValueError(f"{fam.value} requires an extra parameter")
            extra = float(self.extra)
            if fam is Family.LOG_T and extra <= 0:
                raise ValueError("log-t degrees of freedom must be positive")
            if fam is Family.BIRNBAUM_SAUNDERS and extra <= 0:
                raise ValueError("Birnbaum-Saunders alpha must be positive")
            if fam is Family.LOG_POWER_EXP and not (-1.0 < extra <= 1.0):
                raise ValueError("log-power-exponential k must be in (-1, 1]")
            object.__setattr__(self, "extra", extra)
        elif self.extra is not None:
            raise ValueError(f"{fam.value} takes no extra parameter")

    # -- g and its logarithm ------------------------------------------------

    def log_g(self, u):
        """log g(u), evaluated elementwise; u must be >= 0."""
        u = np.asarray(u, dtype=float)
        if np.any(u < 0):
            raise ValueError("g is defined for u >= 0")
        fam = self.family
        if fam is Family.LOG_NORMAL:
            out = -0.5 * u - _LOG_SQRT_2PI
        elif fam is Family.LOG_T:
            nu = self.extra
            const = -0.5 * np.log(nu) - special.betaln(0.5, 0.5 * nu)
            out = const - 0.5 * (nu + 1.0) * np.log1p(u / nu)
        elif fam is Family.BIRNBAUM_SAUNDERS:
            alpha = self.extra
            s = np.sqrt(u)
            # log cosh without overflow
            logcosh = np.abs(s) + np.log1p(np.exp(-2.0 * np.abs(s))) - np.log(2.0)
            # optimizer excursions can push u to inf, where inf - inf below
            # yields nan; the non-finite value is rejected downstream
            with np.errstate(over="ignore", invalid="ignore"):
                out = (
                    -_LOG_SQRT_2PI
                    - (2.0 / alpha**2) * np.sinh(s) ** 2
                    + np.log(2.0 / alpha)
                    + logcosh
                )
        elif fam is Family.LOG_LOGISTIC_I:
            c = _loglogistic1_tables()[0]
            out = np.log(c) - u - 2.0 * np.log1p(np.exp(-u))
        elif fam is Family.LOG_LOGISTIC_II:
            s = np.sqrt(u)
            out = -s - 2.0 * np.log1p(np.exp(-s))
        else:  # LOG_POWER_EXP
            k = self.extra
            half = 0.5 * (1.0 + k)
            const = -special.gammaln(1.0 + half) - (1.0 + half) * np.log(2.0)
            out = const - 0.5 * u ** (1.0 / (1.0 + k))
        return out if out.ndim else float(out)

    def g(self, u):
        """The density generating function g(u)."""
        return np.exp(self.log_g(u))

    def log_g_prime(self, u):
        """d/du log g(u).

        Families whose derivative has a finite one-sided limit at u = 0
        (Birnbaum-Saunders, type II log-logistic, log-power-exponential with
        k < 0) return that limit; log-power-exponential with k > 0 diverges
        at 0 and raises.
        """
        u = np.asarray(u, dtype=float)
        if np.any(u < 0):
            raise ValueError("log_g_prime is defined for u >= 0")
        fam = self.family
        if fam is Family.LOG_NORMAL:
            out = np.full_like(u, -0.5)
        elif fam is Family.LOG_T:
            nu = self.extra
            out = -0.5 * (nu + 1.0) / (nu + u)
        elif fam is Family.BIRNBAUM_SAUNDERS:
            alpha = self.extra
            s = np.sqrt(u)
            limit = 0.5 * (1.0 - 4.0 / alpha**2)
            with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
                val = (np.tanh(s) - (2.0 / alpha**2) * np.sinh(2.0 * s)) / (2.0 * s)
            out = np.where(s > 0, val, limit)
        elif fam is Family.LOG_LOGISTIC_I:
            out = -np.tanh(0.5 * u)
        elif fam is Family.LOG_LOGISTIC_II:
            s = np.sqrt(u)
            with np.errstate(divide="ignore", invalid="ignore"):
                val = -np.tanh(0.5 * s) / (2.0 * s)
            out = np.where(s > 0, val, -0.25)
        else:  # LOG_POWER_EXP
            k = self.extra
            if k == 0.0:
                out = np.full_like(u, -0.5)
            else:
                expo = 1.0 / (1.0 + k) - 1.0
                if k > 0 and np.any(u == 0):
                    raise ValueError(
                        "log_g_prime singular at u = 0 for log-power-exponential with k > 0"
                    )
                out = -(0.5 / (1.0 + k)) * u**expo
        return out if out.ndim else float(out)

    # -- standard symmetric base --------------------------------------------

    def f0(self, w):
        """Standard symmetric density f0(w) = g(w^2)."""
        w = np.asarray(w, dtype=float)
        out = np.exp(self.log_g(w * w))
        return out if out.ndim else float(out)

    def F0(self, w):
        """Standard symmetric CDF F0(w) = integral_{-inf}^w g(u^2) du."""
        w = np.asarray(w, dtype=float)
        fam = self.family
        if fam is Family.LOG_NORMAL:
            out = special.ndtr(w)
        elif fam is Family.LOG_T:
            out = stats.t.cdf(w, df=self.extra)
        elif fam is Family.BIRNBAUM_SAUNDERS:
            # sinh overflows for very large |w|; ndtr(+-inf) is the right limit
            with np.errstate(over="ignore"):
                out = special.ndtr((2.0 / self.extra) * np.sinh(w))
        elif fam is Family.LOG_LOGISTIC_II:
            out = special.expit(w)
        elif fam is Family.LOG_POWER_EXP:
            k = self.extra
            beta = 2.0 / (1.0 + k)
            out = stats.gennorm.cdf(w, beta=beta, scale=2.0 ** (0.5 * (1.0 + k)))
        else:  # LOG_LOGISTIC_I: spline over |w| <= 12 plus symmetry
            _, w_grid, _, spline = _loglogistic1_tables()
            a = np.abs(w)
            tail = np.where(a >= w_grid[-1], 1.0, spline(np.minimum(a, w_grid[-1])))
            out = np.where(w >= 0, tail, 1.0 - tail)
        out = np.asarray(out)
        return out if out.ndim else float(out)

    def S0(self, w):
        """Standard symmetric survival S0(w) = 1 - F0(w)."""
        return self.F0(-np.asarray(w, dtype=float))

    def sample_w0(self, rng: np.random.Generator, size: int):
        """Draws from the standard symmetric base distribution."""
        fam = self.family
        if fam is Family.LOG_NORMAL:
            return rng.standard_normal(size)
        if fam is Family.LOG_T:
            return rng.standard_t(self.extra, size)
        if fam is Family.BIRNBAUM_SAUNDERS:
            return np.arcsinh(0.5 * self.extra * rng.standard_normal(size))
        if fam is Family.LOG_LOGISTIC_II:
            return rng.logistic(size=size)
        if fam is Family.LOG_POWER_EXP:
            k = self.extra
            beta = 2.0 / (1.0 + k)
            return stats.gennorm.rvs(
                beta, scale=2.0 ** (0.5 * (1.0 + k)), size=size, random_state=rng
            )
        # LOG_LOGISTIC_I: numeric inverse CDF on the tabulated grid
        _, w_grid, f_grid, _ = _loglogistic1_tables()
        p = rng.uniform(size=size)
        full_w = np.concatenate([-w_grid[::-1], w_grid[1:]])
        full_f = np.concatenate([1.0 - f_grid[::-1], f_grid[1:]])
        return np.interp(p, full_f, full_w)

    def describe(self) -> str:
        if self.extra is None:
            return self.family.value
        return f"{self.family.value}({self.extra:g})"


@dataclass(frozen=True)
class LogSymmetricDist:
    """A log-symmetric distribution with median eta and shape phi."""

    kernel: DensityGenerator
    eta: float
    phi: float

    def __post_init__(self):
        if not (self.eta > 0):
            raise ValueError("eta must be positive")
        if not (self.phi > 0):
            raise ValueError("phi must be positive")

    def _zt(self, z):
        z = np.asarray(z, dtype=float)
        if np.any(z <= 0):
            raise ValueError("log-symmetric variates are positive")
        return (np.log(z) - np.log(self.eta)) / np.sqrt(self.phi)

    def log_density(self, z):
        z = np.asarray(z, dtype=float)
        zt = self._zt(z)
        out = self.kernel.log_g(zt * zt) - np.log(z) - 0.5 * np.log(self.phi)
        return out if out.ndim else float(out)

    def density(self, z):
        return np.exp(self.log_density(z))

    def cdf(self, z):
        return self.kernel.F0(self._zt(z))

    def survival(self, z):
        return self.kernel.S0(self._zt(z))

    def sample(self, rng: np.random.Generator, count: int):
        w0 = self.kernel.sample_w0(rng, count)
        return np.exp(np.log(self.eta) + np.sqrt(self.phi) * w0)
