"""Automated verification of the expansion-error law for |x - a|^beta.

Five clauses are checked per parameter point:

1. interior points converge at rate beta + 1;
2. the interior constant grows like xi^(-1/4) toward the endpoints;
3. and like xi^(-1) toward the singular point;
4. the endpoints converge at rate beta + 1/2 (divergence with growth
   |beta + 1/2| below -1/2; bounded non-convergent sums at -1/2 exactly);
5. the singular point itself shows rate beta (growth |beta| for negative
   beta; for beta = 0 the jump family converges to the limit mean at rate 1).

"Rate 0" is always read as "bounded, non-Cauchy partial sums".  Fits that
stay preasymptotic after escalating pmax are marked as such rather than
failed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .coefficients import power_abs_coeffs, singular_term_coeffs
from .functions import Family, PowerShiftFamily, StepDerivativeFamily
from .precision import FLOAT64, PrecisionError, bigfloat
from .ratefit import (FitUnreliable, bounded_oscillation_check, constant_growth,
                      fit_rate, pinned_constant)
from .series_eval import error_sweep, partial_sum_values


@dataclass
class ToleranceProfile:
    """Acceptance bands: rates, growth exponents, constants."""

    rate: float = 0.05
    rate_deep_singular: float = 0.10  # beta near -1: long preasymptotics
    growth: float = 0.10
    constant_rel: float = 0.25

    def rate_tol(self, beta: float) -> float:
        return self.rate_deep_singular if beta <= -0.7 else self.rate


@dataclass
class ConjectureVerdict:
    clause: int
    params: dict
    measured: Optional[float]
    conjectured: Optional[float]
    tolerance: float
    status: str  # pass | fail | preasymptotic
    fit: Optional[dict] = None
    detail: str = ""

    def to_dict(self) -> dict:
        return {"clause": self.clause, "params": self.params, "measured": self.measured,
                "conjectured": self.conjectured, "tolerance": self.tolerance,
                "status": self.status, "fit": self.fit, "detail": self.detail}


@dataclass
class PowerTermFamily(Family):
    """|x - a|^beta itself; the beta = 0 member is handled by the jump family."""

    a: float = 0.0
    beta: float = 0.5
    name: str = field(default="powerterm", init=False)

    @property
    def interior_rate(self):
        return 1.0 + self.beta

    def exact(self, x):
        d = abs(x - self.a)
        if d == 0.0:
            return None if self.beta < 0 else (1.0 if self.beta == 0 else 0.0)
        return d ** self.beta

    def series(self, P, ctx=None):
        ctx = ctx or bigfloat(256)
        if self.a == 0.0:
            return power_abs_coeffs(self.beta, P, ctx)
        return singular_term_coeffs(self.a, self.beta, P, ctx)

    def singular_point(self):
        return self.a

    def describe(self):
        return f"|x-({self.a:g})|^{self.beta:g}"


def conjecture_family(beta: float, a: float) -> Family:
    if beta == 0.0:
        return StepDerivativeFamily(a=a)
    return PowerTermFamily(a=a, beta=beta)


def _sweep(family: Family, x: float, pmax: int, magnitude: bool = False):
    series = family.series(pmax + 1, None)
    exact = (lambda _x: None) if magnitude else family.exact
    return error_sweep(series, exact, x, pmax, FLOAT64)


def measured_rate(family: Family, x: float, pmax: int = 2200, ceiling: int = 10000,
                  magnitude: bool = False, window=None):
    """Fit with automatic pmax escalation; returns (fit or None, status, pmax used)."""
    pm = pmax
    last_exc = None
    while True:
        sweep = _sweep(family, x, pm, magnitude)
        if np.max(sweep.abs_error) == 0.0:
            return None, "exact", pm
        try:
            return fit_rate(sweep, window), "ok", pm
        except FitUnreliable as exc:
            last_exc = exc
            if pm >= ceiling:
                return None, f"preasymptotic ({last_exc})", pm
            pm = min(2 * pm, ceiling)


def _rate_verdict(clause, params, fit_status, expected, tol) -> ConjectureVerdict:
    fit, status, pm = fit_status
    if fit is None and status == "exact":
        # degenerate symmetry: the truncation error vanishes identically
        return ConjectureVerdict(clause, params, None, expected, tol, "pass",
                                 detail="error identically zero (exact by symmetry)")
    if fit is None:
        return ConjectureVerdict(clause, params, None, expected, tol, "preasymptotic",
                                 detail=f"{status}; pmax={pm}")
    ok = abs(fit.alpha - expected) <= tol
    return ConjectureVerdict(clause, params, fit.alpha, expected, tol,
                             "pass" if ok else "fail", fit.to_dict(),
                             detail=f"pmax={pm}")


def clause1_interior(beta: float, a: float, tol: ToleranceProfile,
                     x_points: Optional[Sequence[float]] = None,
                     pmax: int = 2200) -> list:
    family = conjecture_family(beta, a)
    expected = beta + 1.0
    if x_points is None:
        x_points = [(a - 1.0) / 2.0, (a + 1.0) / 2.0]
    out = []
    for x in x_points:
        fs = measured_rate(family, x, pmax)
        out.append(_rate_verdict(1, {"beta": beta, "a": a, "x": x}, fs, expected,
                                 tol.rate_tol(beta)))
    return out


def _growth_verdict(clause, beta, a, point, side, family, fixed_alpha, expected, tol,
                    xi_grid, pmax) -> ConjectureVerdict:
    params = {"beta": beta, "a": a, "point": point, "side": side}
    try:
        fit = constant_growth(family, point, side, xi_grid, fixed_alpha, pmax=pmax)
    except FitUnreliable as exc:
        return ConjectureVerdict(clause, params, None, expected, tol, "preasymptotic",
                                 detail=str(exc))
    ok = abs(fit.exponent - expected) <= tol
    return ConjectureVerdict(clause, params, fit.exponent, expected, tol,
                             "pass" if ok else "fail", fit.to_dict())


def clause2_boundary_growth(beta: float, a: float, tol: ToleranceProfile,
                            xi_grid=None, pmax: int = 2200) -> list:
    """C(-1 + xi), C(1 - xi) ~ xi^(-1/4) with the interior rate pinned."""
    family = conjecture_family(beta, a)
    xi_grid = xi_grid if xi_grid is not None else [1e-1, 1e-2, 1e-3, 1e-4]
    fixed = beta + 1.0
    out = []
    for point, side in ((-1.0, +1), (1.0, -1)):
        out.append(_growth_verdict(2, beta, a, point, side, family, fixed, -0.25,
                                   tol.growth, xi_grid, pmax))
    return out


def clause3_singular_growth(beta: float, a: float, tol: ToleranceProfile,
                            xi_grid=None, pmax: int = 2200) -> list:
    """C(a +- xi) ~ xi^(-1) with the interior rate pinned."""
    family = conjecture_family(beta, a)
    xi_grid = xi_grid if xi_grid is not None else [1e-1, 10 ** -1.5, 1e-2, 10 ** -2.5]
    fixed = beta + 1.0
    out = []
    for side in (+1, -1):
        out.append(_growth_verdict(3, beta, a, a, side, family, fixed, -1.0,
                                   tol.growth, xi_grid, pmax))
    return out


def clause4_endpoints(beta: float, a: float, tol: ToleranceProfile,
                      pmax: int = 2200) -> list:
    family = conjecture_family(beta, a)
    expected = beta + 0.5
    out = []
    for x in (-1.0, 1.0):
        params = {"beta": beta, "a": a, "x": x}
        if abs(expected) < 1e-12:
            v = _bounded_verdict(4, family, x, params, pmax)
        elif expected > 0:
            fs = measured_rate(family, x, pmax)
            v = _rate_verdict(4, params, fs, expected, tol.rate_tol(beta))
        else:
            fs = measured_rate(family, x, pmax, magnitude=True)
            v = _rate_verdict(4, params, fs, expected, tol.rate_tol(beta))
            v.detail += f" divergence growth p^{abs(expected):.3g}"
        out.append(v)
    return out


def clause5_singular_point(beta: float, a: float, tol: ToleranceProfile,
                           pmax: int = 2200) -> ConjectureVerdict:
    family = conjecture_family(beta, a)
    params = {"beta": beta, "a": a, "x": a}
    if beta == 0.0:
        # jump member: convergence to the mean of the one-sided limits at rate 1
        fs = measured_rate(family, a, pmax)
        v = _rate_verdict(5, params, fs, 1.0, tol.rate)
        v.detail += " (beta=0: convergence to the limit mean)"
        return v
    if beta > 0:
        fs = measured_rate(family, a, pmax)
        return _rate_verdict(5, params, fs, beta, tol.rate_tol(beta))
    fs = measured_rate(family, a, pmax, magnitude=True)
    v = _rate_verdict(5, params, fs, beta, tol.rate_tol(beta))
    v.detail += f" divergence growth p^{abs(beta):.3g}"
    return v


def _bounded_verdict(clause, family, x, params, pmax) -> ConjectureVerdict:
    series = family.series(pmax + 1, None)
    values = partial_sum_values(series, x, pmax, FLOAT64)
    chk = bounded_oscillation_check(values, np.arange(1, pmax + 1),
                                    windows=((pmax // 4, pmax // 2), (pmax // 2, pmax)))
    ok = chk["bounded"] and chk["non_cauchy"]
    return ConjectureVerdict(clause, params, 0.0, 0.0, 0.0,
                             "pass" if ok else "fail", None,
                             detail=f"bounded non-convergence check: {chk}")


def _run_parameter_point(args):
    beta, a, clauses, tol, pmax = args
    runners = {1: lambda: clause1_interior(beta, a, tol, pmax=pmax),
               2: lambda: clause2_boundary_growth(beta, a, tol, pmax=pmax),
               3: lambda: clause3_singular_growth(beta, a, tol, pmax=pmax),
               4: lambda: clause4_endpoints(beta, a, tol, pmax=pmax),
               5: lambda: [clause5_singular_point(beta, a, tol, pmax=pmax)]}
    verdicts = []
    for clause in clauses:
        try:
            verdicts.extend(runners[clause]())
        except PrecisionError as exc:
            # abort this parameter point with a machine-readable record,
            # never silent wrong numbers
            verdicts.append(ConjectureVerdict(clause, {"beta": beta, "a": a},
                                              None, None, 0.0, "error", detail=str(exc)))
    return verdicts


def conjecture_suite(beta_grid: Sequence[float], a_grid: Sequence[float],
                     tolerance_profile: Optional[ToleranceProfile] = None,
                     pmax: int = 2200, clauses: Sequence[int] = (1, 2, 3, 4, 5),
                     jobs: int = 1) -> list:
    """Run the requested clauses over the parameter grid.

    Parameter points are independent; with jobs > 1 they run on a process
    pool.  Verdict order is deterministic either way (grid order).
    """
    tol = tolerance_profile or ToleranceProfile()
    points = []
    for beta in beta_grid:
        if beta <= -1.0:
            raise ValueError("beta must exceed -1")
        for a in a_grid:
            if not -1.0 < a < 1.0:
                raise ValueError("a must lie strictly inside (-1, 1)")
            points.append((beta, a, tuple(clauses), tol, pmax))
    if jobs > 1 and len(points) > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=jobs) as pool:
            batches = list(pool.map(_run_parameter_point, points))
    else:
        batches = [_run_parameter_point(pt) for pt in points]
    return [v for batch in batches for v in batch]


def powershift_suite(beta_grid: Sequence[float],
                     tolerance_profile: Optional[ToleranceProfile] = None,
                     pmax: int = 2200, interior_x: float = -0.1,
                     growth_checks: bool = True) -> list:
    """Rates for the endpoint-singular family |x + 1|^beta.

    Expectations: 2 beta at -1 (beta > 0 only), 2 beta + 1 at +1, and
    2 beta + 3/2 at interior points; near-edge constant growth exponents
    3/4 (left) and 1/4 (right) when growth_checks is set.
    """
    tol = tolerance_profile or ToleranceProfile()
    eval_ctx = bigfloat(192)  # high rates push errors under float noise by p ~ 1000
    verdicts = []
    for beta in beta_grid:
        if beta <= -1.0:
            raise ValueError("beta must exceed -1")
        family = PowerShiftFamily(beta=beta)
        series = family.series(pmax + 1, eval_ctx)
        cases = []
        if beta > 0:
            cases.append((-1.0, 2.0 * beta, 1))
        cases.append((1.0, 2.0 * beta + 1.0, 2))
        cases.append((interior_x, 2.0 * beta + 1.5, 3))
        for x, expected, clause in cases:
            params = {"beta": beta, "x": x, "family": "powershift"}
            if abs(expected) < 1e-12:
                values = partial_sum_values(series, x, pmax, eval_ctx)
                chk = bounded_oscillation_check(values, np.arange(1, pmax + 1),
                                                windows=((pmax // 4, pmax // 2), (pmax // 2, pmax)))
                ok = chk["bounded"] and chk["non_cauchy"]
                verdicts.append(ConjectureVerdict(clause, params, 0.0, 0.0, 0.0,
                                                  "pass" if ok else "fail", None,
                                                  detail=f"rate 0: {chk}"))
                continue
            sweep = error_sweep(series, family.exact, x, pmax, eval_ctx)
            try:
                fit = fit_rate(sweep)
                ok = abs(fit.alpha - expected) <= tol.rate
                verdicts.append(ConjectureVerdict(clause, params, fit.alpha, expected,
                                                  tol.rate, "pass" if ok else "fail",
                                                  fit.to_dict()))
            except FitUnreliable as exc:
                verdicts.append(ConjectureVerdict(clause, params, None, expected,
                                                  tol.rate, "preasymptotic", detail=str(exc)))
        if growth_checks:
            fixed = 2.0 * beta + 1.5
            for point, side, expected in ((-1.0, +1, -0.75), (1.0, -1, -0.25)):
                params = {"beta": beta, "point": point, "family": "powershift"}
                xi_grid = [1e-1, 10 ** -1.5, 1e-2, 10 ** -2.5]
                Cs, xs = [], []
                for xi in xi_grid:
                    sweep = error_sweep(series, family.exact, point + side * xi, pmax, eval_ctx)
                    try:
                        Cs.append(pinned_constant(sweep, fixed))
                        xs.append(xi)
                    except FitUnreliable:
                        continue
                if len(xs) >= 2:
                    coef = np.polyfit(np.log(xs), np.log(Cs), 1)
                    ok = abs(float(coef[0]) - expected) <= tol.growth
                    verdicts.append(ConjectureVerdict(2, params, float(coef[0]), expected,
                                                      tol.growth, "pass" if ok else "fail",
                                                      {"xi": xs, "C": Cs, "fixed_alpha": fixed}))
                else:
                    verdicts.append(ConjectureVerdict(2, params, None, expected,
                                                      tol.growth, "preasymptotic"))
    return verdicts


def summarize(verdicts: Sequence[ConjectureVerdict]) -> str:
    lines = []
    width = max((len(str(v.params)) for v in verdicts), default=20)
    for v in verdicts:
        measured = "-" if v.measured is None else f"{v.measured:+.4f}"
        conj = "-" if v.conjectured is None else f"{v.conjectured:+.4f}"
        lines.append(f"clause {v.clause}  {str(v.params):<{width}}  measured {measured:>8}"
                     f"  conjectured {conj:>8}  [{v.status}]")
    counts = {}
    for v in verdicts:
        counts[v.status] = counts.get(v.status, 0) + 1
    lines.append("summary: " + ", ".join(f"{k}={v}" for k, v in sorted(counts.items())))
    return "\n".join(lines)
