"""Kaplan-Meier product-limit estimator.

Used for diagnostics (cure-plateau detection), start values, and
fitted-vs-empirical overlays.  Ties between events and censorings at the
same time are resolved events-first, the standard convention.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .likelihood import SurvivalDataset

__all__ = ["KMCurve", "kaplan_meier", "kaplan_meier_grouped"]


@dataclass(frozen=True)
class KMCurve:
    """Product-limit estimate evaluated at the distinct event times."""

    times: np.ndarray
    survival: np.ndarray
    n_risk: np.ndarray
    n_event: np.ndarray

    @property
    def plateau(self) -> float:
        """S-hat at the largest event time; 1 when there are no events."""
        return float(self.survival[-1]) if self.times.size else 1.0

    def step_table(self):
        """Rows (time, estimate, n_risk, n_event) for export/plotting."""
        return list(zip(self.times, self.survival, self.n_risk, self.n_event))

    def evaluate(self, t):
        """Right-continuous step evaluation of S-hat(t)."""
        t = np.asarray(t, dtype=float)
        if not self.times.size:
            out = np.ones_like(t)
            return out if out.ndim else float(out)
        idx = np.searchsorted(self.times, t, side="right") - 1
        out = np.where(idx < 0, 1.0, self.survival[np.maximum(idx, 0)])
        return out if out.ndim else float(out)


def _km_arrays(y: np.ndarray, delta: np.ndarray) -> KMCurve:
    order = np.lexsort((1 - delta, y))  # events before censorings on ties
    y = y[order]
    delta = delta[order]
    n = y.size
    times, surv, n_risk, n_event = [], [], [], []
    s = 1.0
    for t in np.unique(y[delta == 1.0]):
        at_risk = int(np.sum(y >= t))
        d = int(np.sum((y == t) & (delta == 1.0)))
        s *= 1.0 - d / at_risk
        times.append(t)
        surv.append(s)
        n_risk.append(at_risk)
        n_event.append(d)
    return KMCurve(
        times=np.asarray(times, dtype=float),
        survival=np.asarray(surv, dtype=float),
        n_risk=np.asarray(n_risk, dtype=int),
        n_event=np.asarray(n_event, dtype=int),
    )


def kaplan_meier(data: SurvivalDataset) -> KMCurve:
    """Product-limit curve for the whole dataset."""
    return _km_arrays(data.y, data.delta)


def kaplan_meier_grouped(data: SurvivalDataset, column: int) -> dict[float, KMCurve]:
    """One curve per distinct value of design column ``column``.

    Empty groups cannot occur (levels are taken from the data); a level with
    no events yields a curve that is identically 1.
    """
    if not (0 < column < data.X.shape[1]):
        raise ValueError("group column index out of range")
    values = data.X[:, column]
    out = {}
    for level in np.unique(values):
        mask = values == level
        out[float(level)] = _km_arrays(data.y[mask], data.delta[mask])
    return out
