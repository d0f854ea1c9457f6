"""Legendre polynomial kernels and Gauss quadrature.

Everything is built on the three-term recurrence
``(n+1) P_{n+1}(x) = (2n+1) x P_n(x) - n P_{n-1}(x)``,
which is numerically stable on [-1, 1] and works verbatim for floats,
mpmath big-floats, and exact rationals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .precision import FLOAT64, Number, PrecisionContext


def _check_domain(x, ctx: PrecisionContext) -> Number:
    xv = ctx.convert(x)
    if xv > ctx.one() or xv < -ctx.one():
        raise ValueError(f"x = {x} outside [-1, 1]")
    return xv


def legendre_eval(k: int, x, ctx: PrecisionContext = FLOAT64) -> Number:
    """Evaluate P_k(x) by the three-term recurrence in the context's arithmetic."""
    if k < 0:
        raise ValueError("degree must be nonnegative")
    xv = _check_domain(x, ctx)
    with ctx.active():
        pm1 = ctx.one()
        if k == 0:
            return pm1
        pk = xv
        for n in range(1, k):
            pm1, pk = pk, ((2 * n + 1) * xv * pk - n * pm1) / (n + 1)
        return pk


def legendre_eval_range(kmax: int, x, ctx: PrecisionContext = FLOAT64) -> list:
    """Return [P_0(x), ..., P_kmax(x)] from a single recurrence pass."""
    if kmax < 0:
        raise ValueError("degree must be nonnegative")
    xv = _check_domain(x, ctx)
    with ctx.active():
        out = [ctx.one()]
        if kmax == 0:
            return out
        out.append(xv)
        for n in range(1, kmax):
            out.append(((2 * n + 1) * xv * out[n] - n * out[n - 1]) / (n + 1))
        return out


def legendre_range_array(kmax: int, x: np.ndarray) -> np.ndarray:
    """Vectorized float64 recurrence: rows k = 0..kmax, columns the points x."""
    x = np.asarray(x, dtype=float)
    out = np.empty((kmax + 1,) + x.shape)
    out[0] = 1.0
    if kmax >= 1:
        out[1] = x
    for n in range(1, kmax):
        out[n + 1] = ((2 * n + 1) * x * out[n] - n * out[n - 1]) / (n + 1)
    return out


def bernstein_bound(k: int, x: float) -> float:
    """Envelope bound (1-x^2)^(-1/4) sqrt(2/(pi k)) for |P_k(x)| on the open interval."""
    if k < 1:
        raise ValueError("bound requires k >= 1")
    if not -1.0 < x < 1.0:
        raise ValueError("bound is valid only for |x| < 1")
    return (1.0 - x * x) ** -0.25 * math.sqrt(2.0 / (math.pi * k))


@dataclass
class QuadratureRule:
    """Gauss-Legendre nodes/weights; exact for polynomials of degree <= 2*order - 1."""

    nodes: list = field(repr=False)
    weights: list = field(repr=False)
    order: int = 0
    ctx: PrecisionContext = FLOAT64

    def integrate(self, f, lo=None, hi=None) -> Number:
        """Integrate a callable over [lo, hi] (default [-1, 1]) by affine mapping."""
        ctx = self.ctx
        with ctx.active():
            if lo is None and hi is None:
                return sum(w * f(t) for t, w in zip(self.nodes, self.weights))
            lo = ctx.convert(lo)
            hi = ctx.convert(hi)
            half = (hi - lo) / 2
            mid = (hi + lo) / 2
            return half * sum(w * f(mid + half * t) for t, w in zip(self.nodes, self.weights))


def gauss_rule(order: int, ctx: PrecisionContext = FLOAT64) -> QuadratureRule:
    """Gauss-Legendre rule by Newton iteration from Chebyshev initial guesses.

    Irrational nodes: exact-rational contexts are rejected.  Nodes are
    symmetrized about 0 so mirrored nodes agree bit for bit.
    """
    if order < 1:
        raise ValueError("order must be >= 1")
    ctx.require_inexact("gauss_rule")
    if order == 1:
        return QuadratureRule([ctx.zero()], [ctx.convert(2)], 1, ctx)
    with ctx.active():
        if ctx.mode == "f64":
            guesses = np.cos(np.pi * (4 * np.arange(order // 2) + 3) / (4 * order + 2))
            tol = 1e-15
        else:
            import mpmath

            guesses = [mpmath.cos(mpmath.pi * (4 * i + 3) / (4 * order + 2)) for i in range(order // 2)]
            tol = ctx.eps * 256
        nodes_pos = []
        weights_pos = []
        for x0 in np.atleast_1d(guesses):
            x = ctx.convert(x0)
            for _ in range(400):
                pk, dpk = _leg_and_deriv(order, x)
                dx = pk / dpk
                x = x - dx
                if abs(dx) <= tol * max(abs(x), 1):
                    break
            pk, dpk = _leg_and_deriv(order, x)
            nodes_pos.append(x)
            weights_pos.append(2 / ((1 - x * x) * dpk * dpk))
        # nodes_pos is descending; assemble ascending with mirrored negatives
        nodes = [-t for t in nodes_pos]
        weights = list(weights_pos)
        if order % 2 == 1:
            _, dp0 = _leg_and_deriv(order, ctx.zero())
            nodes.append(ctx.zero())
            weights.append(ctx.convert(2) / (dp0 * dp0))
        nodes.extend(reversed(nodes_pos))
        weights.extend(reversed(weights_pos))
        return QuadratureRule(nodes, weights, order, ctx)


def _leg_and_deriv(n: int, x):
    pm1, pk = 1, x
    for m in range(1, n):
        pm1, pk = pk, ((2 * m + 1) * x * pk - m * pm1) / (m + 1)
    return pk, n * (pm1 - x * pk) / (1 - x * x)
