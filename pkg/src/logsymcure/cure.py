"""Cure-fraction (long-term) survival models.

An incidence distribution for the latent number of competing causes M
combined with a latency distribution for the cause-specific times yields an
improper population survival function Sp whose limit at infinity is the cure
fraction p(M = 0).  Three incidence families are supported:

    Bernoulli  (standard mixture):   Sp = theta + (1 - theta) S(t)
    Poisson    (promotion time):     Sp = exp(-theta F(t)),  cure exp(-theta)
    Geometric:                       Sp = theta / (1 - (1 - theta) S(t))

The latency is either a log-symmetric distribution or, as a comparison
baseline, a Weibull distribution.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy import special

from .kernels import LogSymmetricDist

__all__ = [
    "Incidence",
    "Link",
    "IncidenceModel",
    "WeibullLatency",
    "CureModel",
    "cure_fraction",
    "apply_link",
    "THETA_CLAMP",
]

# Logistic-link outputs are clamped into this open interval so that the
# log-likelihood stays finite during optimizer excursions.
THETA_CLAMP = 1e-12


class Incidence(str, Enum):
    BERNOULLI = "bernoulli"
    POISSON = "poisson"
    GEOMETRIC = "geometric"


class Link(str, Enum):
    LOGISTIC = "logistic"
    LOG = "log"


_DEFAULT_LINK = {
    Incidence.BERNOULLI: Link.LOGISTIC,
    Incidence.GEOMETRIC: Link.LOGISTIC,
    Incidence.POISSON: Link.LOG,
}


@dataclass(frozen=True)
class IncidenceModel:
    """An incidence family plus the link mapping x'beta to theta."""

    family: Incidence
    link: Link | None = None

    def __post_init__(self):
        fam = Incidence(self.family)
        object.__setattr__(self, "family", fam)
        link = Link(self.link) if self.link is not None else _DEFAULT_LINK[fam]
        if link is Link.LOG and fam in (Incidence.BERNOULLI, Incidence.GEOMETRIC):
            raise ValueError(
                f"log link can leave (0, 1), the admissible theta range for {fam.value}"
            )
        object.__setattr__(self, "link", link)

    def theta_admissible(self, theta) -> bool:
        theta = np.asarray(theta, dtype=float)
        if self.family is Incidence.POISSON:
            return bool(np.all(theta > 0))
        return bool(np.all((theta > 0) & (theta < 1)))


def cure_fraction(incidence: IncidenceModel | Incidence, theta):
    """Cure fraction p(M = 0) for the given incidence family."""
    family = incidence.family if isinstance(incidence, IncidenceModel) else Incidence(incidence)
    theta = np.asarray(theta, dtype=float)
    if family is Incidence.POISSON:
        if np.any(theta <= 0):
            raise ValueError("Poisson incidence requires theta > 0")
        out = np.exp(-theta)
    else:
        if np.any((theta <= 0) | (theta >= 1)):
            raise ValueError(f"{family.value} incidence requires theta in (0, 1)")
        out = theta + 0.0
    return out if out.ndim else float(out)


def apply_link(incidence: IncidenceModel, beta, x):
    """theta_i = q(x_i' beta) for a design row or matrix x."""
    beta = np.asarray(beta, dtype=float)
    x = np.asarray(x, dtype=float)
    lp = x @ beta
    if incidence.link is Link.LOGISTIC:
        theta = np.clip(special.expit(lp), THETA_CLAMP, 1.0 - THETA_CLAMP)
    else:
        theta = np.exp(np.clip(lp, -700.0, 700.0))
        theta = np.maximum(theta, THETA_CLAMP)
    return theta if theta.ndim else float(theta)


def link_derivative(incidence: IncidenceModel, theta):
    """d theta / d (x' beta), evaluated at theta."""
    theta = np.asarray(theta, dtype=float)
    if incidence.link is Link.LOGISTIC:
        return theta * (1.0 - theta)
    return theta


@dataclass(frozen=True)
class WeibullLatency:
    """Weibull latency, the non-log-symmetric comparison baseline."""

    shape: float
    scale: float

    def __post_init__(self):
        if not (self.shape > 0 and self.scale > 0):
            raise ValueError("Weibull shape and scale must be positive")

    def _check(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t <= 0):
            raise ValueError("times must be positive")
        return t

    def log_density(self, t):
        t = self._check(t)
        r = t / self.scale
        out = (
            np.log(self.shape)
            - np.log(self.scale)
            + (self.shape - 1.0) * np.log(r)
            - r**self.shape
        )
        return out if out.ndim else float(out)

    def density(self, t):
        return np.exp(self.log_density(t))

    def survival(self, t):
        t = self._check(t)
        out = np.exp(-((t / self.scale) ** self.shape))
        return out if out.ndim else float(out)

    def cdf(self, t):
        t = self._check(t)
        out = -np.expm1(-((t / self.scale) ** self.shape))
        return out if out.ndim else float(out)

    def sample(self, rng: np.random.Generator, count: int):
        return self.scale * rng.weibull(self.shape, count)


Latency = LogSymmetricDist | WeibullLatency


@dataclass(frozen=True)
class CureModel:
    """Incidence plus latency: the improper population distribution of T."""

    incidence: IncidenceModel
    latency: Latency

    def _parts(self, t):
        """(S, F, log f) of the latency at t."""
        return self.latency.survival(t), self.latency.cdf(t), self.latency.log_density(t)

    def log_survival_p(self, theta, t):
        theta = np.asarray(theta, dtype=float)
        S = self.latency.survival(t)
        fam = self.incidence.family
        if fam is Incidence.BERNOULLI:
            out = np.log(theta + (1.0 - theta) * S)
        elif fam is Incidence.POISSON:
            out = -theta * (1.0 - S)
        else:  # geometric; 1 - (1-theta) S = theta + (1-theta) F
            out = np.log(theta) - np.log1p(-(1.0 - theta) * S)
        return out if np.ndim(out) else float(out)

    def survival_p(self, theta, t):
        """Improper population survival Sp(t)."""
        return np.exp(self.log_survival_p(theta, t))

    def log_subdensity_p(self, theta, t):
        theta = np.asarray(theta, dtype=float)
        S, F, logf = self._parts(t)
        fam = self.incidence.family
        with np.errstate(divide="ignore"):
            if fam is Incidence.BERNOULLI:
                out = np.log1p(-theta) + logf
            elif fam is Incidence.POISSON:
                out = np.log(theta) + logf - theta * F
            else:
                out = (
                    np.log(theta)
                    + np.log1p(-theta)
                    + logf
                    - 2.0 * np.log(theta + (1.0 - theta) * F)
                )
        return out if np.ndim(out) else float(out)

    def subdensity_p(self, theta, t):
        """Sub-density fp(t) = -dSp/dt."""
        return np.exp(self.log_subdensity_p(theta, t))

    def subhazard_p(self, theta, t):
        """Sub-hazard hp(t), computed definitionally as fp / Sp."""
        return np.exp(self.log_subdensity_p(theta, t) - self.log_survival_p(theta, t))

    def cure_fraction(self, theta):
        return cure_fraction(self.incidence, theta)
