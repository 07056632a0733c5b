"""Maximum-likelihood fitting, model selection, and Wald/LRT inference."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import special

from .cure import Incidence, IncidenceModel, Link, apply_link, cure_fraction
from .kernels import DensityGenerator, LATENCY_FAMILY_ALIASES
from .likelihood import (
    LikelihoodEvaluator,
    ParamVector,
    SurvivalDataset,
    WeibullLikelihoodEvaluator,
)
from .optim import OptimConfig, default_starts, inverse_transform, maximize, transform

__all__ = ["ModelSpec", "FitResult", "fit", "lr_test", "select", "cure_fraction_by_profile", "default_selection_grid"]

WEIBULL = "weibull"


@dataclass(frozen=True)
class ModelSpec:
    """A candidate model: incidence family, latency family, fixed extra, link."""

    incidence: Incidence
    latency: str
    extra: float | None = None
    link: Link | None = None

    def __post_init__(self):
        object.__setattr__(self, "incidence", Incidence(self.incidence))
        lat = str(self.latency)
        if lat != WEIBULL and lat not in LATENCY_FAMILY_ALIASES:
            raise ValueError(f"unknown latency family {lat!r}")
        object.__setattr__(self, "latency", lat)
        if self.link is not None:
            object.__setattr__(self, "link", Link(self.link))

    def incidence_model(self) -> IncidenceModel:
        return IncidenceModel(self.incidence, self.link)

    def label(self) -> str:
        extra = "-" if self.extra is None else f"{self.extra:g}"
        return f"{self.incidence.value}/{self.latency}/{extra}"

    def make_evaluator(self, data: SurvivalDataset):
        inc = self.incidence_model()
        if self.latency == WEIBULL:
            return WeibullLikelihoodEvaluator(inc, data)
        kernel = DensityGenerator(LATENCY_FAMILY_ALIASES[self.latency], self.extra)
        return LikelihoodEvaluator(inc, kernel, data)


@dataclass
class FitResult:
    spec: ModelSpec
    lambda_hat: ParamVector
    se: np.ndarray
    vcov: np.ndarray
    loglik: float
    aic: float
    bic: float
    n: int
    n_events: int
    converged: bool
    gradient_norm: float
    start_index_of_best: int
    info_positive_definite: bool
    covariate_names: tuple[str, ...] = ()

    @property
    def k(self) -> int:
        """Free-parameter count: beta plus (eta, phi); fixed extras excluded."""
        return self.lambda_hat.size

    def parameter_names(self) -> list[str]:
        names = ["beta0"]
        if self.covariate_names:
            names += [f"beta[{c}]" for c in self.covariate_names]
        else:
            names += [f"beta{j}" for j in range(1, self.lambda_hat.beta.size)]
        if self.spec.latency == WEIBULL:
            return names + ["scale", "shape"]
        return names + ["eta", "phi"]

    def to_dict(self) -> dict:
        return {
            "model": {
                "incidence": self.spec.incidence.value,
                "latency": self.spec.latency,
                "extra": self.spec.extra,
                "link": self.spec.incidence_model().link.value,
            },
            "estimates": dict(
                zip(self.parameter_names(), [float(v) for v in self.lambda_hat.as_array()])
            ),
            "se": dict(
                zip(
                    self.parameter_names(),
                    [None if not np.isfinite(v) else float(v) for v in self.se],
                )
            ),
            "loglik": self.loglik,
            "aic": self.aic,
            "bic": self.bic,
            "n": self.n,
            "n_events": self.n_events,
            "converged": self.converged,
            "gradient_norm": self.gradient_norm,
            "info_positive_definite": self.info_positive_definite,
            "covariate_names": list(self.covariate_names),
        }


def fit(
    data: SurvivalDataset,
    spec: ModelSpec,
    config: OptimConfig | None = None,
    starts: list[ParamVector] | None = None,
) -> FitResult:
    """Best-of-multi-start MLE with observed-information standard errors."""
    config = config or OptimConfig()
    evaluator = spec.make_evaluator(data)
    inc = spec.incidence_model()
    if starts is None:
        starts = default_starts(data, inc, config.n_starts, config.seed)

    def objective(x):
        return evaluator.loglik(inverse_transform(x))

    def gradient(x):
        lam = inverse_transform(x)
        s = evaluator.score(lam)
        out = s.copy()
        out[-2] *= lam.eta
        out[-1] *= lam.phi
        return out

    best = None
    best_idx = -1
    failures = []
    for idx, start in enumerate(starts):
        try:
            res = maximize(objective, gradient, transform(start), config)
        except ValueError as exc:
            failures.append(str(exc))
            continue
        if best is None or res.fval > best.fval:
            best = res
            best_idx = idx
    if best is None:
        raise RuntimeError("all optimizer starts failed: " + "; ".join(failures))

    lam_hat = inverse_transform(best.x)
    k = lam_hat.size
    info = evaluator.observed_information(lam_hat)
    pd = bool(np.all(np.linalg.eigvalsh(0.5 * (info + info.T)) > 0))
    se = np.full(k, np.nan)
    vcov = np.full((k, k), np.nan)
    try:
        vcov = np.linalg.inv(info)
        diag = np.diag(vcov)
        se = np.sqrt(np.where(diag > 0, diag, np.nan))
    except np.linalg.LinAlgError:
        pass
    ll = best.fval
    return FitResult(
        spec=spec,
        lambda_hat=lam_hat,
        se=se,
        vcov=vcov,
        loglik=ll,
        aic=-2.0 * ll + 2.0 * k,
        bic=-2.0 * ll + k * np.log(data.n),
        n=data.n,
        n_events=data.n_events,
        converged=best.converged,
        gradient_norm=best.gradient_norm,
        start_index_of_best=best_idx,
        info_positive_definite=pd,
        covariate_names=data.covariate_names,
    )


def lr_test(full: FitResult, reduced: FitResult):
    """Likelihood-ratio test of a nested covariate subset.

    Returns (statistic, df, p_value); raises on non-nested pairs.
    """
    same_family = (
        full.spec.incidence == reduced.spec.incidence
        and full.spec.latency == reduced.spec.latency
        and full.spec.extra == reduced.spec.extra
        and full.spec.incidence_model().link == reduced.spec.incidence_model().link
    )
    if not same_family:
        raise ValueError("models differ in incidence/latency/link; not nested")
    df = full.k - reduced.k
    if df <= 0:
        raise ValueError("reduced model must have strictly fewer parameters")
    if full.n != reduced.n:
        raise ValueError("models fitted to different datasets")
    stat = max(2.0 * (full.loglik - reduced.loglik), 0.0)
    p_value = float(special.gammaincc(df / 2.0, stat / 2.0))
    return stat, df, p_value


@dataclass
class SelectionRow:
    spec: ModelSpec
    aic: float
    bic: float
    loglik: float
    converged: bool
    error: str | None = None

    def to_dict(self) -> dict:
        return {
            "incidence": self.spec.incidence.value,
            "latency": self.spec.latency,
            "extra": self.spec.extra,
            "aic": self.aic,
            "bic": self.bic,
            "loglik": self.loglik,
            "converged": self.converged,
            "error": self.error,
        }


def default_selection_grid() -> list[ModelSpec]:
    """Built-in candidate grid: 3 incidence families x {Weibull, log-normal,
    log-t nu in {2,4,6,8}, Birnbaum-Saunders alpha in {1.2, 2, 2.8, 3.6}},
    30 candidates in total."""
    grid = []
    for inc in (Incidence.BERNOULLI, Incidence.POISSON, Incidence.GEOMETRIC):
        grid.append(ModelSpec(inc, WEIBULL))
        grid.append(ModelSpec(inc, "lognormal"))
        for nu in (2.0, 4.0, 6.0, 8.0):
            grid.append(ModelSpec(inc, "logt", nu))
        for alpha in (1.2, 2.0, 2.8, 3.6):
            grid.append(ModelSpec(inc, "bs", alpha))
    return grid


def select(
    data: SurvivalDataset,
    grid: list[ModelSpec],
    config: OptimConfig | None = None,
    criterion: str = "aic",
) -> list[SelectionRow]:
    """Fit every candidate and rank ascending by the chosen criterion.

    Per-candidate failures are recorded, not fatal.  Ties break by fewer
    parameters, then by model label.
    """
    if not grid:
        raise ValueError("candidate grid is empty")
    if criterion not in ("aic", "bic"):
        raise ValueError("criterion must be 'aic' or 'bic'")
    rows = []
    for spec in grid:
        try:
            result = fit(data, spec, config)
            rows.append(
                SelectionRow(
                    spec=spec,
                    aic=result.aic,
                    bic=result.bic,
                    loglik=result.loglik,
                    converged=result.converged,
                )
            )
        except Exception as exc:  # recorded per candidate
            rows.append(
                SelectionRow(
                    spec=spec,
                    aic=np.inf,
                    bic=np.inf,
                    loglik=np.nan,
                    converged=False,
                    error=str(exc),
                )
            )
    rows.sort(
        key=lambda r: (
            getattr(r, criterion),
            r.spec.extra is not None,
            r.spec.label(),
        )
    )
    return rows


def cure_fraction_by_profile(result: FitResult, x) -> float:
    """Cure fraction for one covariate profile (including the intercept 1)."""
    x = np.asarray(x, dtype=float)
    if x.shape != (result.lambda_hat.beta.size,):
        raise ValueError("profile dimension does not match the fitted design")
    inc = result.spec.incidence_model()
    theta = apply_link(inc, result.lambda_hat.beta, x)
    return float(cure_fraction(inc, theta))
