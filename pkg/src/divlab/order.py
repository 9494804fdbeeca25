"""The coarse order f <=_C g on sampled functions.

f <=_C g means f(x) <= C g(Cx + C) + Cx + C at every sample x of f.  g is
read by linear interpolation between its samples and never extrapolated:
if Cx + C falls beyond g's last sample the verdict is Undetermined.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Optional

import numpy as np

C_GRID = (1, 2, 4, 8, 16, 32, 64)

PRECEQ = "PrecEq"
NOT_PRECEQ = "NotPrecEqUpTo"
UNDETERMINED = "Undetermined"
ASYMP = "Asymp"


class SampledFunction:
    """Ordered samples (x, y) with x strictly increasing and y >= 0."""

    def __init__(self, points: Iterable[tuple]):
        pts = [(float(x), float(y)) for x, y in points]
        xs = [p[0] for p in pts]
        if any(b <= a for a, b in zip(xs, xs[1:])):
            raise ValueError("sample abscissae must be strictly increasing")
        if any(not math.isfinite(y) or y < 0 for _, y in pts):
            raise ValueError("sample values must be finite and nonnegative")
        self.x = np.array(xs)
        self.y = np.array([p[1] for p in pts])

    @classmethod
    def from_callable(cls, fn: Callable[[float], float], xs: Iterable) -> "SampledFunction":
        return cls((x, fn(x)) for x in xs)

    @classmethod
    def from_table(cls, table) -> "SampledFunction":
        """Finite samples of a divergence table; raises if any are not finite."""
        bad = [s.n for s in table.samples if not s.value.is_finite]
        if bad:
            raise ValueError(f"table has non-finite values at {bad}")
        return cls((s.n, s.value.value) for s in table.samples)

    def __len__(self):
        return len(self.x)

    def __call__(self, t: float) -> Optional[float]:
        """Linear interpolation; None outside the sampled range."""
        if t < self.x[0] or t > self.x[-1]:
            return None
        return float(np.interp(t, self.x, self.y))

    def scaled(self, c: float) -> "SampledFunction":
        return SampledFunction(zip(self.x, self.y * c))

    def __repr__(self):
        return f"SampledFunction({list(zip(self.x.tolist(), self.y.tolist()))})"


@dataclass
class OrderVerdict:
    relation: str
    C: Optional[float] = None
    violating_x: Optional[float] = None
    detail: str = ""

    @property
    def holds(self):
        return self.relation in (PRECEQ, ASYMP)

    def __str__(self):
        if self.relation in (PRECEQ, ASYMP):
            return f"{self.relation}(C={self.C:g})"
        if self.relation == NOT_PRECEQ:
            return f"{NOT_PRECEQ}({self.C:g})"
        return f"{UNDETERMINED}({self.detail})"


def preceq_check(f: SampledFunction, g: SampledFunction, C: float,
                 monotone: bool = False) -> OrderVerdict:
    """Check f <=_C g at every sample of f.

    Where Cx + C lies beyond g's samples the point still passes when
    f(x) <= Cx + C (g is nonnegative).  With ``monotone`` the caller vouches
    that g is non-decreasing, and g's last sample is used as a lower bound
    past the end; otherwise such points make the verdict Undetermined.
    """
    if C < 1:
        raise ValueError("C must be at least 1")
    for x, fx in zip(f.x, f.y):
        t = C * x + C
        gv = g(t)
        if gv is None:
            if fx <= C * x + C + 1e-9:
                continue
            if monotone and t > g.x[-1]:
                gv = float(g.y[-1])
            else:
                return OrderVerdict(UNDETERMINED, C, float(x), f"g not sampled at {t:g}")
        if fx > C * gv + C * x + C + 1e-9:
            return OrderVerdict(NOT_PRECEQ, C, float(x))
    return OrderVerdict(PRECEQ, C)


def preceq_search(f: SampledFunction, g: SampledFunction, c_grid=C_GRID,
                  monotone: bool = False) -> OrderVerdict:
    """Least grid C with f <=_C g, else NotPrecEqUpTo(max C).

    A C whose check is Undetermined does not count as established; the
    detail string keeps the first such reason.
    """
    last = None
    undet = ""
    for C in c_grid:
        v = preceq_check(f, g, C, monotone)
        if v.relation == PRECEQ:
            return v
        if v.relation == UNDETERMINED and not undet:
            undet = f"C={C:g}: {v.detail}"
        last = v
    return OrderVerdict(NOT_PRECEQ, float(c_grid[-1]), last.violating_x if last else None, undet)


def asymp_check(f: SampledFunction, g: SampledFunction, C: float,
                monotone: bool = False) -> OrderVerdict:
    a = preceq_check(f, g, C, monotone)
    if a.relation != PRECEQ:
        return a
    b = preceq_check(g, f, C, monotone)
    if b.relation != PRECEQ:
        return b
    return OrderVerdict(ASYMP, C)


def asymp_search(f: SampledFunction, g: SampledFunction, c_grid=C_GRID,
                 monotone: bool = False) -> OrderVerdict:
    a = preceq_search(f, g, c_grid, monotone)
    if a.relation != PRECEQ:
        return a
    b = preceq_search(g, f, c_grid, monotone)
    if b.relation != PRECEQ:
        return b
    return OrderVerdict(ASYMP, max(a.C, b.C))


@dataclass
class OrderEstimate:
    exponent: float
    residual: float


def estimate_order(f: SampledFunction, window: float = 0.5) -> OrderEstimate:
    """Least-squares slope of log y against log x over the tail window."""
    n = len(f)
    if n < 4:
        raise ValueError("need at least 4 samples")
    k = max(2, int(math.ceil(n * window)))
    xs, ys = f.x[-k:], f.y[-k:]
    if np.any(ys <= 0) or np.any(xs <= 0):
        raise ValueError("nonpositive values in the fitting window")
    lx, ly = np.log(xs), np.log(ys)
    A = np.vstack([lx, np.ones_like(lx)]).T
    sol, res, *_ = np.linalg.lstsq(A, ly, rcond=None)
    resid = float(np.sqrt(res[0] / k)) if len(res) else 0.0
    return OrderEstimate(float(sol[0]), resid)


def power_law(p: float, xmax: float = 4096, coef: float = 1.0) -> SampledFunction:
    """Reference y = coef * x^p sampled on the integers 0..xmax."""
    return SampledFunction.from_callable(lambda x: coef * x ** p, range(0, int(xmax) + 1))
