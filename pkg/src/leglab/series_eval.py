"""Partial sums, pointwise error sweeps over p, and Parseval norm sweeps.

Sweeps are incremental: all orders 1..pmax share one recurrence pass, so a
full sweep costs O(pmax) per evaluation point.  Float64 accumulation uses
Neumaier compensation; this keeps the telescoping error identities true to
a few ulps across the whole 2200-order range.

For the endpoint-constrained family the order-p truncation is the order-p
constrained solution (its tail differs from the stored coefficient prefix);
partial sums are therefore accumulated from the endpoint-vanishing bumps
a_k (P_{k+1} - P_{k-1}) / (2k+1) instead of a literal coefficient prefix.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .coefficients import Generator, LegendreSeries, derivative_coeffs
from .legendre import legendre_eval_range
from .precision import F64, FLOAT64, PrecisionContext


@dataclass
class ErrorSweep:
    """|error| at a fixed point x over increasing truncation order."""

    x: float
    pvalues: np.ndarray
    abs_error: np.ndarray
    target: str
    series_id: str

    def __post_init__(self):
        self.pvalues = np.asarray(self.pvalues, dtype=int)
        self.abs_error = np.asarray(self.abs_error, dtype=float)
        if np.any(np.diff(self.pvalues) <= 0):
            raise ValueError("pvalues must be strictly increasing")
        if not np.all(np.isfinite(self.abs_error)) or np.any(self.abs_error < 0):
            raise ValueError("abs_error entries must be finite and nonnegative")

    @property
    def pmax(self) -> int:
        return int(self.pvalues[-1])

    def write_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("p,abs_error\n")
            for p, e in zip(self.pvalues, self.abs_error):
                fh.write(f"{int(p)},{float(e)!r}\n")

    def metadata(self) -> dict:
        return {"x": self.x, "target": self.target, "series": self.series_id,
                "pmax": self.pmax, "n": len(self.pvalues)}


@dataclass
class NormSweep:
    """Norm of the truncation error over p, from Parseval tail sums."""

    pvalues: np.ndarray
    norm_error: np.ndarray
    norm: str = "L2"

    def __post_init__(self):
        self.pvalues = np.asarray(self.pvalues, dtype=int)
        self.norm_error = np.asarray(self.norm_error, dtype=float)
        tail = self.norm_error[self.norm_error > 0]
        if tail.size and np.any(np.diff(tail) > 1e-15 * tail[:-1]):
            raise ValueError("norm errors must be nonincreasing in p")

    def write_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(f"p,{self.norm.lower()}_error\n")
            for p, e in zip(self.pvalues, self.norm_error):
                fh.write(f"{int(p)},{float(e)!r}\n")


def _constrained_order_limit(series: LegendreSeries) -> int:
    return len(series.coeffs) - 2


def partial_sum(series: LegendreSeries, p: int, x, ctx: Optional[PrecisionContext] = None):
    """Evaluate the order-p approximation at x with one fused recurrence pass."""
    ctx = ctx or series.ctx
    if series.generator is Generator.CONSTRAINED_PVERSION:
        if p > _constrained_order_limit(series):
            raise IndexError(f"order {p} exceeds the constrained series order {_constrained_order_limit(series)}")
        return _constrained_value(series.params["a"], p, x, ctx)
    if p > series.degree:
        raise IndexError(f"p = {p} exceeds available coefficients (degree {series.degree})")
    with ctx.active():
        xv = ctx.convert(x)
        Px = legendre_eval_range(p, xv, ctx)
        if ctx.mode == F64:
            total = 0.0
            comp = 0.0
            for k in range(p + 1):
                t = float(series.coeffs[k]) * Px[k]
                s = total + t
                comp += (total - s) + t if abs(total) >= abs(t) else (t - s) + total
                total = s
            return total + comp
        total = ctx.zero()
        for k in range(p + 1):
            total += ctx.convert(series.coeffs[k]) * Px[k]
        return total


def _constrained_value(a, p, x, ctx):
    with ctx.active():
        av, xv = ctx.convert(a), ctx.convert(x)
        Pa = legendre_eval_range(p + 1, av, ctx)
        Px = legendre_eval_range(p + 1, xv, ctx)
        total = ctx.zero()
        for k in range(1, p + 1):
            ak = (Pa[k - 1] - Pa[k + 1]) / 2
            total += ak * (Px[k + 1] - Px[k - 1]) / (2 * k + 1)
        return total


def error_sweep(series: LegendreSeries, exact, x, pmax: int,
                ctx: Optional[PrecisionContext] = None, target: str = "") -> ErrorSweep:
    """|exact(x) - S_p(x)| for p = 1..pmax, accumulated incrementally.

    ``exact`` is a callable or a constant; ``None`` (or a callable returning
    None) switches to magnitude mode: the sweep records |S_p(x)| itself,
    which is how divergent and bounded-nonconvergent points are measured.
    """
    ctx = ctx or series.ctx
    value = exact(x) if callable(exact) else exact
    if series.generator is Generator.CONSTRAINED_PVERSION:
        limit = _constrained_order_limit(series)
        if pmax > limit:
            raise IndexError(f"pmax {pmax} exceeds constrained series order {limit}")
        errs = _constrained_sweep(series.params["a"], value, x, pmax, ctx)
    else:
        if pmax > series.degree:
            raise IndexError(f"pmax {pmax} exceeds available coefficients (degree {series.degree})")
        errs = _prefix_sweep(series, value, x, pmax, ctx)
    label = target or (f"{series.generator.value} exact={value!r}" if value is not None
                       else f"{series.generator.value} magnitude")
    return ErrorSweep(float(x), np.arange(1, pmax + 1), errs, label, series.series_id)


def _prefix_sweep(series, value, x, pmax, ctx):
    errs = np.empty(pmax)
    with ctx.active():
        xv = ctx.convert(x)
        if ctx.mode == F64:
            coeffs = [float(c) for c in series.coeffs[: pmax + 1]]
            xf = float(xv)
            pm1, pk = 1.0, xf
            total = coeffs[0]
            comp = 0.0
            ref = float(value) if value is not None else None
            for k in range(1, pmax + 1):
                t = coeffs[k] * pk
                s = total + t
                comp += (total - s) + t if abs(total) >= abs(t) else (t - s) + total
                total = s
                errs[k - 1] = abs(ref - (total + comp)) if ref is not None else abs(total + comp)
                pm1, pk = pk, ((2 * k + 1) * xf * pk - k * pm1) / (k + 1)
            return errs
        ref = ctx.convert(value) if value is not None else None
        pm1, pk = ctx.one(), xv
        total = ctx.convert(series.coeffs[0])
        for k in range(1, pmax + 1):
            total += ctx.convert(series.coeffs[k]) * pk
            errs[k - 1] = abs(float(ref - total)) if ref is not None else abs(float(total))
            pm1, pk = pk, ((2 * k + 1) * xv * pk - k * pm1) / (k + 1)
        return errs


def _constrained_sweep(a, value, x, pmax, ctx):
    errs = np.empty(pmax)
    with ctx.active():
        if ctx.mode == F64:
            af, xf = float(a), float(x)
            ref = float(value)
            pa0, pa1 = 1.0, af
            px0, px1 = 1.0, xf
            total, comp = 0.0, 0.0
            for k in range(1, pmax + 1):
                pa2 = ((2 * k + 1) * af * pa1 - k * pa0) / (k + 1)
                px2 = ((2 * k + 1) * xf * px1 - k * px0) / (k + 1)
                t = 0.5 * (pa0 - pa2) * (px2 - px0) / (2 * k + 1)
                s = total + t
                comp += (total - s) + t if abs(total) >= abs(t) else (t - s) + total
                total = s
                errs[k - 1] = abs(ref - (total + comp))
                pa0, pa1 = pa1, pa2
                px0, px1 = px1, px2
            return errs
        av, xv = ctx.convert(a), ctx.convert(x)
        ref = ctx.convert(value)
        pa0, pa1 = ctx.one(), av
        px0, px1 = ctx.one(), xv
        total = ctx.zero()
        for k in range(1, pmax + 1):
            pa2 = ((2 * k + 1) * av * pa1 - k * pa0) / (k + 1)
            px2 = ((2 * k + 1) * xv * px1 - k * px0) / (k + 1)
            total += (pa0 - pa2) * (px2 - px0) / (2 * (2 * k + 1))
            errs[k - 1] = abs(float(ref - total))
            pa0, pa1 = pa1, pa2
            px0, px1 = px1, px2
        return errs


def partial_sum_values(series: LegendreSeries, x, pmax: int,
                       ctx: Optional[PrecisionContext] = None) -> np.ndarray:
    """Signed partial sums S_1..S_pmax at x (for boundedness/oscillation checks)."""
    ctx = ctx or series.ctx
    if series.generator is Generator.CONSTRAINED_PVERSION:
        raise ValueError("use error sweeps for the constrained family")
    if pmax > series.degree:
        raise IndexError(f"pmax {pmax} exceeds available coefficients (degree {series.degree})")
    out = np.empty(pmax)
    with ctx.active():
        xv = ctx.convert(x)
        coeffs = [float(c) for c in series.coeffs[: pmax + 1]]
        xf = float(xv)
        pm1, pk = 1.0, xf
        total, comp = coeffs[0], 0.0
        for k in range(1, pmax + 1):
            t = coeffs[k] * pk
            s = total + t
            comp += (total - s) + t if abs(total) >= abs(t) else (t - s) + total
            total = s
            out[k - 1] = total + comp
            pm1, pk = pk, ((2 * k + 1) * xf * pk - k * pm1) / (k + 1)
    return out


def parseval_tail(series: LegendreSeries, p: int, exact_norm_sq: Optional[float] = None) -> float:
    """Squared L2 norm of the tail beyond p: sum_{k>p} c_k^2 * 2/(2k+1)."""
    c = series.as_floats()
    k = np.arange(len(c))
    sq = c * c * (2.0 / (2 * k + 1))
    tail = float(np.sum(sq[p + 1:]))
    if exact_norm_sq is not None:
        tail += max(exact_norm_sq - float(np.sum(sq)), 0.0)
    return tail


def norm_sweep(series: LegendreSeries, exact_norm_sq: Optional[float] = None,
               pmax: Optional[int] = None, norm: str = "L2") -> NormSweep:
    """Parseval tail sums over p.

    ``norm="Energy"`` measures the derivative of the approximated function:
    for a series that already represents a derivative (the step family) this
    equals its own L2 tail; otherwise the series is differentiated first.
    ``exact_norm_sq`` (the squared norm of the target, e.g. from quadrature)
    accounts for the tail beyond the available coefficients; without it a
    warning fires when the truncated remainder may exceed 1% of the result.
    """
    norm_key = norm.strip().lower()
    if norm_key not in ("l2", "energy"):
        raise ValueError("norm must be 'L2' or 'Energy'")
    work = series
    if norm_key == "energy" and series.generator is not Generator.STEP_DERIVATIVE:
        work = derivative_coeffs(series)
    c = work.as_floats()
    k = np.arange(len(c))
    sq = c * c * (2.0 / (2 * k + 1))
    total = float(np.sum(sq))
    remainder = 0.0
    if exact_norm_sq is not None:
        remainder = max(float(exact_norm_sq) - total, 0.0)
    if pmax is None:
        pmax = len(c) - 2
    if pmax >= len(c):
        raise IndexError("pmax exceeds available coefficients")
    # backward tail accumulation avoids cancellation of near-equal sums
    tails = np.cumsum(sq[::-1])[::-1]
    pv = np.arange(1, pmax + 1)
    values = remainder + tails[2:pmax + 2]
    if exact_norm_sq is None:
        cut = max(int(0.9 * len(sq)), pmax + 1)
        last_block = float(np.sum(sq[cut:]))
        if values[-1] > 0 and last_block > 0.01 * values[-1]:
            warnings.warn("norm tail truncated at the series end contributes more than 1% "
                          "of the reported value; supply exact_norm_sq or more coefficients")
    return NormSweep(pv, np.sqrt(np.maximum(values, 0.0)), "Energy" if norm_key == "energy" else "L2")


def squared_error_quadrature(series: LegendreSeries, exact_fn: Callable[[float], float],
                             p: int, breakpoints: Sequence[float] = ()) -> float:
    """Quadrature oracle for ||f - S_p||^2, split at the target's breakpoints.

    Uses a Gauss rule of order p + 3 per piece, exact whenever f is
    polynomial between breakpoints (the piecewise families here).
    """
    from .legendre import gauss_rule, legendre_range_array

    pts = sorted({-1.0, 1.0} | {float(b) for b in breakpoints if -1 < float(b) < 1})
    rule = gauss_rule(p + 3, FLOAT64)
    nodes = np.array(rule.nodes)
    weights = np.array(rule.weights)
    coeffs = series.as_floats()[: p + 1]
    total = 0.0
    for lo, hi in zip(pts[:-1], pts[1:]):
        xm = 0.5 * (hi + lo) + 0.5 * (hi - lo) * nodes
        table = legendre_range_array(p, xm)
        sp = coeffs @ table
        fx = np.array([exact_fn(t) for t in xm])
        total += 0.5 * (hi - lo) * float(np.sum(weights * (fx - sp) ** 2))
    return total
