"""Shared fixtures and helpers for the test suite."""

import numpy as np

from logsymcure import (
    Incidence,
    ModelSpec,
    SurvivalDataset,
)

# One representative (family, extra) per supported latency kernel, plus
# extra-parameter variations used by grid-style checks.
KERNEL_GRID = [
    ("lognormal", None),
    ("logt", 2.0),
    ("logt", 3.0),
    ("logt", 4.0),
    ("logt", 8.0),
    ("bs", 0.5),
    ("bs", 1.5),
    ("bs", 3.6),
    ("loglog1", None),
    ("loglog2", None),
    ("lpe", -0.5),
    ("lpe", 0.0),
    ("lpe", 1.0),
]

# One configuration per family (keeps slow parametrized tests smaller).
KERNEL_ONE_PER_FAMILY = [
    ("lognormal", None),
    ("logt", 3.0),
    ("bs", 1.5),
    ("loglog1", None),
    ("loglog2", None),
    ("lpe", 0.5),
]

INCIDENCES = [Incidence.BERNOULLI, Incidence.POISSON, Incidence.GEOMETRIC]


def make_dataset(
    seed: int = 0,
    n: int = 100,
    spec: ModelSpec | None = None,
    beta=None,
    eta: float = 5.0,
    phi: float = 1.0,
    censor_bound: float = 15.0,
) -> SurvivalDataset:
    """Small synthetic censored dataset drawn from a cure model."""
    from logsymcure.cure import apply_link
    from logsymcure.kernels import DensityGenerator, LATENCY_FAMILY_ALIASES, LogSymmetricDist

    spec = spec or ModelSpec(Incidence.POISSON, "lognormal")
    beta = np.asarray(beta if beta is not None else [0.3, 0.2, -0.1])
    rng = np.random.default_rng(seed)
    x1 = rng.uniform(size=n)
    x2 = (rng.uniform(size=n) < 0.5).astype(float)
    X = np.column_stack([np.ones(n), x1, x2])
    inc = spec.incidence_model()
    theta = apply_link(inc, beta, X)
    dist = LogSymmetricDist(
        DensityGenerator(LATENCY_FAMILY_ALIASES[spec.latency], spec.extra), eta, phi
    )
    if inc.family is Incidence.BERNOULLI:
        m = (rng.uniform(size=n) < 1.0 - theta).astype(int)
    elif inc.family is Incidence.POISSON:
        m = rng.poisson(theta)
    else:
        m = rng.geometric(np.clip(theta, 1e-12, 1.0)) - 1
    t = np.full(n, np.inf)
    for i in range(n):
        if m[i] > 0:
            t[i] = dist.sample(rng, m[i]).min()
    c = rng.uniform(0.0, censor_bound, size=n)
    y = np.minimum(t, c)
    delta = (t <= c).astype(float)
    return SurvivalDataset(y=y, delta=delta, X=X, covariate_names=("x1", "x2"))
