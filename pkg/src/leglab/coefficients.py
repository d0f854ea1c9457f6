"""Legendre expansion coefficients for every function family studied here.

Closed forms:

* step derivative: a_k = (P_{k-1}(a) - P_{k+1}(a)) / 2, zero mean;
* model solution: c_0 = -a_1/3, c_k = a_{k-1}/(2k-1) - a_{k+1}/(2k+3),
  obtained by integrating the step series term by term;
* constrained approximation of order P: the same c_k for k < P with the
  downward coupling dropped in the last two coefficients, which makes the
  partial sums vanish at both endpoints for every order;
* |x|^beta: even moments from the ratio recurrence
  I_{j+1} = I_j (beta - 2j)/(beta + 2j + 3), I_0 = 1/(beta + 1);
* |x - a|^beta: modified moments mu_k = int |x-a|^beta P_k from the
  three-term recurrence
  (beta + k + 2) mu_{k+1} = a (2k+1) mu_k + (beta + 1 - k) mu_{k-1},
  derived from the Euler identity (x - a) f' = beta f;
* |x + 1|^beta: power moments I_k = int (1+x)^beta x^k combined with the
  exact integer monomial coefficients of P_k.  The alternating monomial
  sums cancel roughly 1.585 bits per degree, hence the adaptive working
  precision of 64 + ceil(1.6 P) bits with a doubled-precision recheck.

A singularity-splitting quadrature oracle cross-checks every generator.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Callable, Optional, Sequence

import mpmath
import numpy as np

from .functions import SingularFunctionSpec, exact_solution_derivative
from .legendre import gauss_rule, legendre_eval_range
from .precision import EXACT, F64, FLOAT64, PrecisionContext, PrecisionError, bigfloat


class Generator(str, Enum):
    STEP_DERIVATIVE = "StepDerivative"
    ABS_SHIFT = "AbsShift"
    CONSTRAINED_PVERSION = "ConstrainedPVersion"
    POWER_ABS = "PowerAbs"
    POWER_SHIFT_APPENDIX_A = "PowerShiftAppendixA"
    QUADRATURE_ORACLE = "QuadratureOracle"
    # additive members: provenance for the moment-recurrence route and
    # assembled multi-term specs
    SINGULAR_MOMENT = "SingularMoment"
    CUSTOM_SPEC = "CustomSpec"


@dataclass
class LegendreSeries:
    """Coefficient sequence c_0..c_P with provenance."""

    coeffs: list
    generator: Generator
    ctx: PrecisionContext
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        for c in self.coeffs:
            if isinstance(c, float) and not math.isfinite(c):
                raise ValueError("series coefficients must be finite")

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def series_id(self) -> str:
        p = ",".join(f"{k}={v:g}" for k, v in sorted(self.params.items()) if isinstance(v, (int, float)))
        return f"{self.generator.value}({p})@{self.ctx.describe()}/P{self.degree}"

    def as_floats(self) -> np.ndarray:
        return np.array([float(c) for c in self.coeffs])

    def write_csv(self, path) -> None:
        """Columns (k, coeff) with full-precision decimal rendering plus a JSON sidecar."""
        with open(path, "w") as fh:
            fh.write("k,coeff\n")
            for k, c in enumerate(self.coeffs):
                fh.write(f"{k},{render_number(c, self.ctx)}\n")
        sidecar = {
            "generator": self.generator.value,
            "params": {k: (v if isinstance(v, (int, float, str)) else str(v)) for k, v in self.params.items()},
            "precision": self.ctx.describe(),
            "length": len(self.coeffs),
        }
        with open(str(path) + ".json", "w") as fh:
            json.dump(sidecar, fh, indent=1, sort_keys=True)


def render_number(c, ctx: PrecisionContext) -> str:
    if ctx.mode == EXACT and isinstance(c, Fraction):
        return f"{c.numerator}/{c.denominator}"
    if ctx.mode == F64:
        return repr(float(c))
    digits = int(ctx.bits * 0.30103) + 3
    return mpmath.nstr(c, digits)


def _check_center(a, ctx) -> None:
    if not (-1 < float(a) < 1):
        raise ValueError(f"center a = {a} must lie strictly inside (-1, 1)")


def step_derivative_coeffs(a, P: int, ctx: PrecisionContext = FLOAT64) -> LegendreSeries:
    """Expansion of the unit-jump step at a: zero mean, a_k from endpoint differences."""
    _check_center(a, ctx)
    if P < 1:
        raise ValueError("P must be >= 1")
    with ctx.active():
        Pk = legendre_eval_range(P + 1, ctx.convert(a), ctx)
        coeffs = [ctx.zero()]
        half = ctx.convert(1) / 2
        for k in range(1, P + 1):
            coeffs.append(half * (Pk[k - 1] - Pk[k + 1]))
    return LegendreSeries(coeffs, Generator.STEP_DERIVATIVE, ctx, {"a": float(a)})


def abs_shift_coeffs(a, P: int, ctx: PrecisionContext = FLOAT64) -> LegendreSeries:
    """Expansion of the model solution (step series integrated term by term)."""
    _check_center(a, ctx)
    if P < 1:
        raise ValueError("P must be >= 1")
    ak = step_derivative_coeffs(a, P + 1, ctx).coeffs
    with ctx.active():
        coeffs = [-ak[1] / 3]
        for k in range(1, P + 1):
            coeffs.append(ak[k - 1] / (2 * k - 1) - ak[k + 1] / (2 * k + 3))
    return LegendreSeries(coeffs, Generator.ABS_SHIFT, ctx, {"a": float(a)})


def constrained_pversion_coeffs(a, P: int, ctx: PrecisionContext = FLOAT64) -> LegendreSeries:
    """Order-P endpoint-constrained coefficients b_0..b_{P+1}.

    Identical to the free expansion up to index P-1; the top two entries
    drop the coupling to degrees above P, which restores u_P(+-1) = 0
    exactly.  Partial sums of this family at lower orders p use the
    order-p tail modification, not a literal prefix (see series_eval).
    """
    _check_center(a, ctx)
    if P < 1:
        raise ValueError("P must be >= 1")
    ak = step_derivative_coeffs(a, P, ctx).coeffs
    with ctx.active():
        coeffs = [-ak[1] / 3]
        for k in range(1, P):
            coeffs.append(ak[k - 1] / (2 * k - 1) - ak[k + 1] / (2 * k + 3))
        coeffs.append(ak[P - 1] / (2 * P - 1))
        coeffs.append(ak[P] / (2 * P + 1))
    return LegendreSeries(coeffs, Generator.CONSTRAINED_PVERSION, ctx, {"a": float(a)})


def power_abs_coeffs(beta, P: int, ctx: Optional[PrecisionContext] = None) -> LegendreSeries:
    """Expansion of |x|^beta: odd coefficients identically zero.

    beta <= -1/2 requires a big-float or exact context (partial-sum
    cancellation at evaluation time dominates the coefficient error).
    """
    if float(beta) <= -1.0:
        raise ValueError("beta must exceed -1")
    if P < 1:
        raise ValueError("P must be >= 1")
    if ctx is None:
        ctx = bigfloat(256) if float(beta) <= -0.5 else FLOAT64
    if float(beta) <= -0.5 and ctx.mode == F64:
        raise PrecisionError("beta <= -1/2 requires a big-float or exact-rational context")
    with ctx.active():
        b = ctx.convert(beta)
        coeffs = [ctx.zero() for _ in range(P + 1)]
        # I_j = int_0^1 x^beta P_2j; c_2j = (2(2j)+1)/2 * 2 I_j = (4j+1) I_j
        I = ctx.one() / (b + 1)
        j = 0
        while 2 * j <= P:
            coeffs[2 * j] = (4 * j + 1) * I
            I = I * (b - 2 * j) / (b + 2 * j + 3)
            j += 1
    return LegendreSeries(coeffs, Generator.POWER_ABS, ctx, {"beta": float(beta)})


def singular_term_coeffs(a, beta, P: int, ctx: Optional[PrecisionContext] = None,
                         verify: bool = True) -> LegendreSeries:
    """Expansion of |x - a|^beta from the modified-moment three-term recurrence.

    Runs in big-float arithmetic by default; the result is certified by
    recomputing the top coefficient at doubled precision.
    """
    _check_center(a, ctx or FLOAT64)
    if float(beta) <= -1.0:
        raise ValueError("beta must exceed -1")
    if ctx is None:
        ctx = bigfloat(256)
    coeffs = _mu_recurrence(a, beta, P, ctx)
    if verify and ctx.mode == "big":
        check = _mu_recurrence(a, beta, P, bigfloat(2 * ctx.bits))
        cp, cq = mpmath.mpf(coeffs[P]), mpmath.mpf(check[P])
        if cq != 0 and abs(cp - cq) / abs(cq) > mpmath.mpf(2) ** (16 - ctx.bits):
            raise PrecisionError("modified-moment recurrence lost precision; raise the context bits")
    return LegendreSeries(coeffs, Generator.SINGULAR_MOMENT, ctx,
                          {"a": float(a), "beta": float(beta)})


def _mu_recurrence(a, beta, P, ctx):
    with ctx.active():
        b = ctx.convert(beta)
        av = ctx.convert(a)
        om, op = 1 - av, 1 + av
        mu_prev = (om ** (b + 1) + op ** (b + 1)) / (b + 1)
        mu = av * mu_prev + (om ** (b + 2) - op ** (b + 2)) / (b + 2)
        out = [mu_prev / 2, 3 * mu / 2]
        for k in range(1, P):
            mu_prev, mu = mu, (av * (2 * k + 1) * mu + (b + 1 - k) * mu_prev) / (b + k + 2)
            out.append((2 * k + 3) * mu / 2)
        return out[: P + 1]


def legendre_monomial_rows(P: int):
    """Exact monomial coefficients: P_k = 2^-k sum_j (-1)^j C(k,j) C(2k-2j,k) x^(k-2j).

    Yields (k, [(power, integer numerator), ...]); denominator 2^k implied.
    """
    for k in range(P + 1):
        row = []
        ckj = 1
        c2 = math.comb(2 * k, k)
        j = 0
        while k - 2 * j >= 0:
            row.append((k - 2 * j, ckj * c2 if j % 2 == 0 else -ckj * c2))
            m2 = 2 * k - 2 * j
            if m2 >= 2:
                c2 = c2 * ((m2 - k) * (m2 - k - 1)) // (m2 * (m2 - 1))
            ckj = ckj * (k - j) // (j + 1)
            j += 1
        yield k, row


def appendixA_moment(k: int, beta, prec_bits: int):
    """Moment int_{-1}^{1} |x+1|^beta x^k dx via the hypergeometric identity."""
    with mpmath.workprec(prec_bits):
        b = mpmath.mpf(beta)
        term1 = mpmath.hyp2f1(k + 1, -b, k + 2, -1) / (k + 1)
        term2 = (-1) ** k * mpmath.gamma(b + 1) * mpmath.gamma(k + 1) / mpmath.gamma(k + b + 2)
        return term1 + term2


def binomial_moment_oracle(k: int, beta, prec_bits: int = 256):
    """Independent closed form: substitute t = x + 1 and expand (t-1)^k binomially."""
    with mpmath.workprec(prec_bits):
        b = mpmath.mpf(beta)
        total = mpmath.mpf(0)
        for j in range(k + 1):
            total += math.comb(k, j) * (-1) ** (k - j) * mpmath.mpf(2) ** (b + j + 1) / (b + j + 1)
        return total


def _appendixA_moments(P: int, beta, prec_bits: int, sample_stride: int = 256):
    """All moments I_0..I_P at the given precision.

    I_0 is closed form; higher moments follow the exact integration-by-parts
    recurrence I_m = (2^(beta+1) - m I_{m-1}) / (beta + 1 + m).  A strided
    sample (plus the endpoints) is re-evaluated through the hypergeometric
    identity and must agree at working precision.
    """
    with mpmath.workprec(prec_bits):
        b = mpmath.mpf(beta)
        two_b1 = mpmath.mpf(2) ** (b + 1)
        I = [two_b1 / (b + 1)]
        for m in range(1, P + 1):
            I.append((two_b1 - m * I[m - 1]) / (b + 1 + m))
        tol = mpmath.mpf(2) ** (64 - prec_bits)
        checks = sorted({0, P} | set(range(0, P + 1, sample_stride)))
        for m in checks:
            ref = appendixA_moment(m, beta, prec_bits)
            scale = max(abs(ref), mpmath.mpf(1) / (m + 1))
            if abs(I[m] - ref) / scale > tol:
                raise PrecisionError(f"moment recurrence disagrees with the hypergeometric identity at m={m}")
        return I


def appendixA_precision_bits(P: int) -> int:
    # the monomial combination cancels ~1.585 bits per degree; 32 guard bits
    # on top of the 64 + ceil(1.6 P) floor keep the 1e-20 certification clear
    return 64 + math.ceil(1.6 * P) + 32


def power_shift_coeffs_appendixA(beta, P: int, ctx: Optional[PrecisionContext] = None) -> LegendreSeries:
    """Expansion of |x + 1|^beta by moment-times-monomial combination.

    The working precision follows the 64 + ceil(1.6 P) bit rule; the top
    coefficient is recomputed at doubled precision and the run aborts if the
    two disagree beyond 1e-20 relative.  The requested ctx only controls the
    precision of the *returned* coefficients (never higher than the working
    precision); exact-rational output is not supported.
    """
    if float(beta) <= -1.0:
        raise ValueError("beta must exceed -1")
    if P < 0:
        raise ValueError("P must be >= 0")
    if ctx is not None and ctx.mode == EXACT:
        raise PrecisionError("appendix-A coefficients are irrational; use a floating context")
    bits = appendixA_precision_bits(P)
    if ctx is not None and ctx.mode == "big" and ctx.bits > bits:
        bits = ctx.bits
    coeffs_hi = _power_shift_run(beta, P, bits)
    # certify the worst-cancellation coefficient against a doubled-precision run
    with mpmath.workprec(2 * bits):
        ref = _power_shift_single(beta, P, 2 * bits)
        cp = mpmath.mpf(coeffs_hi[P])
        scale = abs(ref) if ref != 0 else mpmath.mpf(1)
        if abs(cp - ref) / scale > mpmath.mpf("1e-20"):
            raise PrecisionError(
                f"appendix-A combination lost precision at P={P}: use more bits than {bits}")
    out_ctx = ctx or FLOAT64
    if out_ctx.mode == F64:
        coeffs = [float(c) for c in coeffs_hi]
    else:
        with out_ctx.active():
            coeffs = [+c for c in coeffs_hi]
    return LegendreSeries(coeffs, Generator.POWER_SHIFT_APPENDIX_A, out_ctx, {"beta": float(beta)})


def _power_shift_run(beta, P, bits):
    I = _appendixA_moments(P, beta, bits)
    with mpmath.workprec(bits):
        coeffs = []
        for k, row in legendre_monomial_rows(P):
            s = mpmath.mpf(0)
            for power, num in row:
                s += num * I[power]
            coeffs.append(s * (2 * k + 1) / mpmath.mpf(2) ** (k + 1))
        return coeffs


def _power_shift_single(beta, k, bits):
    I = _appendixA_moments(k, beta, bits, sample_stride=10 ** 9)
    with mpmath.workprec(bits):
        row = None
        for kk, r in legendre_monomial_rows(k):
            row = r
        s = mpmath.mpf(0)
        for power, num in row:
            s += num * I[power]
        return s * (2 * k + 1) / mpmath.mpf(2) ** (k + 1)


def polynomial_legendre_coeffs(poly: Sequence, P: int, ctx: PrecisionContext = FLOAT64) -> list:
    """Exact Legendre coefficients of a polynomial given by monomial coefficients.

    Horner in the Legendre basis: multiply-by-x uses
    x P_k = ((k+1) P_{k+1} + k P_{k-1}) / (2k+1).
    """
    with ctx.active():
        acc = [ctx.zero() for _ in range(max(P + 1, len(poly) + 1))]
        for cm in reversed(list(poly)):
            shifted = [ctx.zero() for _ in acc]
            for k, ck in enumerate(acc):
                if ck == 0:
                    continue
                shifted[k + 1] += (k + 1) * ck / (2 * k + 1)
                if k >= 1:
                    shifted[k - 1] += k * ck / (2 * k + 1)
            acc = shifted
            acc[0] += ctx.convert(cm)
        return acc[: P + 1]


def spec_coeffs(spec: SingularFunctionSpec, P: int, ctx: Optional[PrecisionContext] = None) -> LegendreSeries:
    """Expansion of a full singular-function description (linear combination)."""
    if P < 1:
        raise ValueError("P must be >= 1")
    if ctx is None:
        ctx = bigfloat(256)
    with ctx.active():
        total = [ctx.zero() for _ in range(P + 1)]
        for (c, a, b) in spec.terms:
            term = singular_term_coeffs(a, b, P, ctx)
            cv = ctx.convert(c)
            for k in range(P + 1):
                total[k] += cv * term.coeffs[k]
        if spec.analytic_part:
            for k, ck in enumerate(polynomial_legendre_coeffs(spec.analytic_part, P, ctx)):
                total[k] += ck
    return LegendreSeries(total, Generator.CUSTOM_SPEC, ctx, {"spec": spec.describe()})


def quadrature_oracle_coeffs(f: Callable[[float], float], P: int,
                             singular_points: Sequence[float] = (),
                             prec_bits: int = 128) -> LegendreSeries:
    """Independent oracle: c_k = (k + 1/2) int f P_k by tanh-sinh quadrature.

    The integration interval is split at every singular point, which keeps
    algebraic endpoint singularities harmless for tanh-sinh.  Intended for
    modest k (cross-checks), not production generation.
    """
    pts = sorted({-1.0, 1.0} | {float(s) for s in singular_points if -1 < float(s) < 1})
    with mpmath.workprec(prec_bits):
        coeffs = []
        for k in range(P + 1):
            def integrand(t, k=k):
                # f must accept mpf input so the node-to-singularity distance
                # keeps full precision under tanh-sinh clustering
                return mpmath.mpf(f(t)) * _legendre_mp(k, t)

            total = mpmath.mpf(0)
            for lo, hi in zip(pts[:-1], pts[1:]):
                total += mpmath.quad(integrand, [lo, hi])
            coeffs.append(float(total * (2 * k + 1) / 2))
    return LegendreSeries(coeffs, Generator.QUADRATURE_ORACLE, FLOAT64, {"points": len(pts)})


def _legendre_mp(k: int, x):
    pm1 = mpmath.mpf(1)
    if k == 0:
        return pm1
    pk = mpmath.mpf(x)
    for n in range(1, k):
        pm1, pk = pk, ((2 * n + 1) * x * pk - n * pm1) / (n + 1)
    return pk


def step_oracle_coeff(a: float, k: int, ctx: PrecisionContext = FLOAT64):
    """(k + 1/2) times two-piece Gauss integration of the step against P_k."""
    rule = gauss_rule(k // 2 + 2, ctx)
    below = exact_solution_derivative(a - 1.0, a)
    above = exact_solution_derivative(a + 1.0, a)

    def f_lo(t):
        return below * _poly_eval_ctx(k, t, ctx)

    def f_hi(t):
        return above * _poly_eval_ctx(k, t, ctx)

    with ctx.active():
        val = rule.integrate(f_lo, -1, a) + rule.integrate(f_hi, a, 1)
        return (ctx.convert(2 * k + 1) / 2) * val


def _poly_eval_ctx(k, t, ctx):
    from .legendre import legendre_eval

    return legendre_eval(k, t, ctx)


def derivative_coeffs(series: LegendreSeries) -> LegendreSeries:
    """Coefficients of the derivative series via the backward relation
    d_k = (2k+1) (c_{k+1} + d_{k+2} / (2k+5))."""
    ctx = series.ctx
    c = series.coeffs
    n = len(c)
    with ctx.active():
        d = [ctx.zero() for _ in range(n + 1)]
        for k in range(n - 2, -1, -1):
            d[k] = (2 * k + 1) * (c[k + 1] + d[k + 2] / (2 * k + 5))
    return LegendreSeries(d[: n - 1] if n > 1 else d[:1], series.generator, ctx,
                          dict(series.params, derivative=1))
