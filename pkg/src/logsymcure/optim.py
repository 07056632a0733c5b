"""Quasi-Newton maximization with a strong-Wolfe line search.

The model parameters are mapped to an unconstrained space (beta unchanged,
eta and phi by natural log) so a plain BFGS iteration applies.  The line
search follows the classical bracketing/zoom scheme with Wolfe constants
c1 = 1e-4 and c2 = 0.9; non-finite objective excursions are treated as
infinitely bad and the step is shrunk.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .cure import IncidenceModel, Link
from .likelihood import NEG_INF_SENTINEL, ParamVector, SurvivalDataset

__all__ = [
    "OptimConfig",
    "OptimResult",
    "maximize",
    "transform",
    "inverse_transform",
    "default_starts",
]


@dataclass(frozen=True)
class OptimConfig:
    """Convergence is declared on the max-norm of the unconstrained gradient,
    scaled by the objective magnitude: ||g||_inf <= gradient_tolerance *
    max(1, |f|).  The scaling keeps the criterion attainable for large-n
    log-likelihoods, where the absolute gradient floor is set by the float
    precision of f itself."""

    max_iterations: int = 500
    gradient_tolerance: float = 1e-6
    step_tolerance: float = 1e-10
    n_starts: int = 5
    seed: int = 0

    def __post_init__(self):
        if self.gradient_tolerance <= 0 or self.step_tolerance <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_iterations < 1 or self.n_starts < 1:
            raise ValueError("max_iterations and n_starts must be >= 1")


@dataclass
class OptimResult:
    x: np.ndarray
    fval: float
    converged: bool
    iterations: int
    gradient_norm: float
    start_index_of_best: int = 0


def transform(lam: ParamVector) -> np.ndarray:
    """(beta, eta, phi) -> (beta, log eta, log phi)."""
    if not (lam.eta > 0 and lam.phi > 0):
        raise ValueError("eta and phi must be positive")
    return np.concatenate([lam.beta, [np.log(lam.eta), np.log(lam.phi)]])


def inverse_transform(x: np.ndarray) -> ParamVector:
    x = np.asarray(x, dtype=float)
    # optimizer excursions may overflow exp(); the resulting inf is rejected
    # downstream via the non-finite sentinel, so silence the warning here
    with np.errstate(over="ignore"):
        eta = float(np.exp(x[-2]))
        phi = float(np.exp(x[-1]))
    return ParamVector(beta=x[:-2], eta=eta, phi=phi)


def _finite(fun, x):
    v = fun(x)
    if v is None or not np.isfinite(v) or v <= NEG_INF_SENTINEL:
        return -np.inf
    return float(v)


def _wolfe_line_search(fun, grad, x, p, f0, g0, c1=1e-4, c2=0.9, max_iter=30):
    """Strong Wolfe search on phi(a) = fun(x + a p) for a maximization.

    Returns (alpha, f_new, g_new) or (None, ...) on breakdown.
    """
    d0 = float(g0 @ p)
    if d0 <= 0:
        return None, f0, g0

    def phi(a):
        return _finite(fun, x + a * p)

    def dphi(a):
        return float(grad(x + a * p) @ p)

    # shrink until the trial point is evaluable
    alpha = 1.0
    for _ in range(60):
        if np.isfinite(phi(alpha)):
            break
        alpha *= 0.5
    else:
        return None, f0, g0

    a_prev, f_prev = 0.0, f0
    a = alpha
    for i in range(max_iter):
        fa = phi(a)
        if (fa < f0 + c1 * a * d0) or (i > 0 and fa <= f_prev):
            return _zoom(phi, dphi, a_prev, a, f_prev, f0, d0, c1, c2)
        da = dphi(a)
        if abs(da) <= c2 * d0:  # |phi'(a)| <= c2 |phi'(0)|
            return a, fa, None
        if da <= 0:
            return _zoom(phi, dphi, a, a_prev, fa, f0, d0, c1, c2)
        a_prev, f_prev = a, fa
        a = min(2.0 * a, 1e10)
    return None, f0, g0


def _zoom(phi, dphi, a_lo, a_hi, f_lo, f0, d0, c1, c2, max_iter=30):
    for _ in range(max_iter):
        a = 0.5 * (a_lo + a_hi)
        fa = phi(a)
        if (fa < f0 + c1 * a * d0) or (fa <= f_lo):
            a_hi = a
        else:
            da = dphi(a)
            if abs(da) <= c2 * abs(d0):
                return a, fa, None
            if da * (a_hi - a_lo) <= 0:
                a_hi = a_lo
            a_lo, f_lo = a, fa
        if abs(a_hi - a_lo) < 1e-14:
            break
    fa = phi(a_lo)
    if a_lo > 0 and np.isfinite(fa) and fa > f0:
        return a_lo, fa, None
    return None, f0, None


def maximize(
    objective: Callable[[np.ndarray], float],
    gradient: Callable[[np.ndarray], np.ndarray],
    start: np.ndarray,
    config: OptimConfig,
) -> OptimResult:
    """BFGS maximization; returns the best point found even on failure."""
    x = np.asarray(start, dtype=float).copy()
    f = _finite(objective, x)
    if not np.isfinite(f):
        raise ValueError("objective is not finite at the start point")
    g = np.asarray(gradient(x), dtype=float)
    n = x.size
    H = np.eye(n)
    best_x, best_f = x.copy(), f

    def gtol(fval):
        return config.gradient_tolerance * max(1.0, abs(fval))

    converged = False
    it = 0
    fresh_hessian = True
    for it in range(1, config.max_iterations + 1):
        gnorm = float(np.max(np.abs(g)))
        if gnorm <= gtol(f):
            converged = True
            break
        p = H @ g
        if not np.all(np.isfinite(p)) or float(g @ p) <= 0:
            H = np.eye(n)
            fresh_hessian = True
            p = g.copy()
        alpha, f_new, _ = _wolfe_line_search(objective, gradient, x, p, f, g)
        if alpha is None:
            # retry once from a steepest-ascent restart before giving up
            if fresh_hessian:
                break
            H = np.eye(n)
            fresh_hessian = True
            continue
        s = alpha * p
        x_new = x + s
        g_new = np.asarray(gradient(x_new), dtype=float)
        if not np.all(np.isfinite(g_new)):
            break
        yv = g_new - g
        sy = float(s @ yv)
        if sy < -1e-12 * float(np.linalg.norm(s)) * float(np.linalg.norm(yv)):
            rho = 1.0 / sy
            V = np.eye(n) - rho * np.outer(s, yv)
            H = V @ H @ V.T + abs(rho) * np.outer(s, s)
            fresh_hessian = False
        x, f, g = x_new, f_new, g_new
        if f > best_f:
            best_x, best_f = x.copy(), f
        if float(np.linalg.norm(s)) <= config.step_tolerance * (
            1.0 + float(np.linalg.norm(x))
        ):
            break
    gnorm = float(np.max(np.abs(g)))
    if gnorm <= gtol(f):
        converged = True
    return OptimResult(
        x=best_x, fval=best_f, converged=converged, iterations=it, gradient_norm=gnorm
    )


def default_starts(
    data: SurvivalDataset,
    incidence: IncidenceModel,
    n_starts: int,
    seed: int = 0,
) -> list[ParamVector]:
    """Data-driven starting points plus seeded jitter.

    The first start sets eta to the median event time, phi to the variance of
    log event times, and the incidence intercept to the link-scale value whose
    cure fraction matches the Kaplan-Meier plateau.  Remaining starts perturb
    (log eta, log phi, beta0) by uniform +/-50%.
    """
    from .kaplan_meier import kaplan_meier

    event_times = data.y[data.delta == 1.0]
    if event_times.size:
        eta0 = float(np.median(event_times))
        logs = np.log(event_times)
        phi0 = float(np.var(logs, ddof=1)) if event_times.size > 1 else 1.0
        phi0 = max(phi0, 1e-3)
        plateau = kaplan_meier(data).plateau
    else:
        eta0 = float(np.median(data.y))
        phi0 = 1.0
        plateau = 1.0
    cure_guess = min(max(plateau, 0.01), 0.99)
    if incidence.link is Link.LOGISTIC:
        beta0 = float(np.log(cure_guess / (1.0 - cure_guess)))
    else:  # log link: cure = exp(-theta) -> theta = -log(cure)
        beta0 = float(np.log(-np.log(cure_guess)))
    p1 = data.n_coef
    base_beta = np.zeros(p1)
    base_beta[0] = beta0
    starts = [ParamVector(beta=base_beta, eta=eta0, phi=phi0)]
    rng = np.random.default_rng(seed)
    for _ in range(n_starts - 1):
        jit = rng.uniform(0.5, 1.5, size=3)
        b = base_beta.copy()
        b[0] = beta0 * jit[2] if beta0 != 0.0 else rng.uniform(-0.5, 0.5)
        starts.append(
            ParamVector(
                beta=b,
                eta=float(np.exp(np.log(eta0) * jit[0])) if eta0 != 1.0 else float(
                    np.exp(rng.uniform(-0.5, 0.5))
                ),
                phi=float(np.exp(np.log(phi0) * jit[1])) if phi0 != 1.0 else float(
                    np.exp(rng.uniform(-0.5, 0.5))
                ),
            )
        )
    return starts
