"""Target functions: the model problem solution, its derivative, and the
singular power families, together with their exact point values.

Every family knows how to report its exact value at a point (using the
mean of one-sided limits at a jump) and which points are singular.  The
value ``None`` signals "no finite target here": sweeps then record the
partial-sum magnitude itself, which is how divergent cases are measured.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .precision import FLOAT64, PrecisionContext


@dataclass(frozen=True)
class SingularFunctionSpec:
    """Sum of weighted power singularities c_i |x - a_i|^(b_i) plus a polynomial.

    Terms are (weight, center, exponent) with |center| < 1 and exponent > -1;
    duplicate centers are merged.  The polynomial part is a monomial
    coefficient list, lowest degree first.
    """

    terms: tuple = ()
    analytic_part: tuple = ()

    def __post_init__(self):
        merged = {}
        for (c, a, b) in self.terms:
            if not -1.0 < a < 1.0:
                raise ValueError(f"center {a} must lie strictly inside (-1, 1)")
            if b <= -1.0:
                raise ValueError(f"exponent {b} must exceed -1")
            key = (a, b)
            merged[key] = merged.get(key, 0.0) + c
        object.__setattr__(self, "terms", tuple((c, a, b) for (a, b), c in sorted(merged.items())))
        object.__setattr__(self, "analytic_part", tuple(self.analytic_part))

    def value(self, x: float) -> Optional[float]:
        """Exact value at x, or None when a negative-exponent singularity sits at x."""
        total = 0.0
        for (c, a, b) in self.terms:
            d = abs(x - a)
            if d == 0.0:
                if b < 0:
                    return None
                total += c if b == 0 else 0.0
            else:
                total += c * d ** b
        for j, cj in enumerate(self.analytic_part):
            total += cj * x ** j
        return total

    def singular_points(self) -> list:
        # even integer exponents make the term a polynomial (no singularity)
        return [a for (_, a, b) in self.terms if b != int(b) or int(b) % 2 == 1]

    def describe(self) -> str:
        parts = [f"{c:g}*|x-({a:g})|^{b:g}" for (c, a, b) in self.terms]
        if self.analytic_part:
            parts.append("poly" + str(list(self.analytic_part)))
        return " + ".join(parts) if parts else "0"


def solution_slope_below(a: float) -> float:
    """Slope of the model solution left of the load point: (a - 1)/2."""
    return (a - 1.0) / 2.0


def exact_solution(x: float, a: float) -> float:
    """Piecewise-linear model solution with homogeneous endpoint values.

    Left branch c (x + 1), right branch c (a + 1) + (1 + c)(x - a), c = (a-1)/2.
    """
    c = solution_slope_below(a)
    if x < a:
        return c * (x + 1.0)
    return c * (a + 1.0) + (1.0 + c) * (x - a)


def exact_solution_derivative(x: float, a: float) -> float:
    """Unit-jump step: c below a, 1 + c above, mean of limits at the jump."""
    c = solution_slope_below(a)
    if x < a:
        return c
    if x > a:
        return 1.0 + c
    return 0.5 + c


class Family:
    """Common protocol: a named target with exact values and a coefficient generator."""

    name = "family"
    interior_rate: float = 1.0  # decay exponent away from singular/end points

    def exact(self, x: float) -> Optional[float]:
        raise NotImplementedError

    def series(self, P: int, ctx: PrecisionContext):
        raise NotImplementedError

    def singular_point(self) -> Optional[float]:
        return None

    def describe(self) -> str:
        return self.name


@dataclass
class StepDerivativeFamily(Family):
    """Derivative of the model solution: the unit-jump step at a."""

    a: float = 0.5
    name: str = field(default="step", init=False)
    interior_rate = 1.0

    def exact(self, x):
        return exact_solution_derivative(x, self.a)

    def series(self, P, ctx=None):
        from .coefficients import step_derivative_coeffs

        return step_derivative_coeffs(self.a, P, ctx or FLOAT64)

    def singular_point(self):
        return self.a

    def describe(self):
        return f"step a={self.a:g}"


@dataclass
class AbsShiftFamily(Family):
    """The model solution itself (a scaled |x - a| plus a linear function)."""

    a: float = 0.5
    name: str = field(default="absshift", init=False)
    interior_rate = 2.0

    def exact(self, x):
        return exact_solution(x, self.a)

    def series(self, P, ctx=None):
        from .coefficients import abs_shift_coeffs

        return abs_shift_coeffs(self.a, P, ctx or FLOAT64)

    def singular_point(self):
        return self.a

    def describe(self):
        return f"absshift a={self.a:g}"


@dataclass
class ConstrainedFamily(Family):
    """Endpoint-constrained polynomial approximations of the model solution."""

    a: float = 0.5
    name: str = field(default="constrained", init=False)
    interior_rate = 2.0

    def exact(self, x):
        return exact_solution(x, self.a)

    def series(self, P, ctx=None):
        from .coefficients import constrained_pversion_coeffs

        return constrained_pversion_coeffs(self.a, P, ctx or FLOAT64)

    def singular_point(self):
        return self.a

    def describe(self):
        return f"constrained a={self.a:g}"


@dataclass
class PowerAbsFamily(Family):
    """|x|^beta, even about 0; the beta = 0 member degenerates to the constant 1."""

    beta: float = -0.5
    name: str = field(default="powerabs", init=False)

    @property
    def interior_rate(self):
        return 1.0 + self.beta

    def exact(self, x):
        if x == 0.0:
            return None if self.beta < 0 else (1.0 if self.beta == 0 else 0.0)
        return abs(x) ** self.beta

    def series(self, P, ctx=None):
        from .coefficients import power_abs_coeffs

        # power_abs_coeffs picks a safe default context from beta when None
        return power_abs_coeffs(self.beta, P, ctx)

    def singular_point(self):
        return 0.0

    def describe(self):
        return f"|x|^{self.beta:g}"


@dataclass
class PowerShiftFamily(Family):
    """|x + 1|^beta with the singularity at the left endpoint."""

    beta: float = 0.5
    name: str = field(default="powershift", init=False)

    @property
    def interior_rate(self):
        return 2.0 * self.beta + 1.5

    def exact(self, x):
        base = 1.0 + x
        if base == 0.0:
            return None if self.beta < 0 else (1.0 if self.beta == 0 else 0.0)
        return base ** self.beta

    def series(self, P, ctx=None):
        from .coefficients import power_shift_coeffs_appendixA

        return power_shift_coeffs_appendixA(self.beta, P, ctx)

    def describe(self):
        return f"|x+1|^{self.beta:g}"


@dataclass
class SpecFamily(Family):
    """General piecewise-analytic target built from a SingularFunctionSpec."""

    spec: SingularFunctionSpec = field(default_factory=SingularFunctionSpec)
    name: str = field(default="spec", init=False)

    def exact(self, x):
        return self.spec.value(x)

    def series(self, P, ctx=None):
        from .coefficients import spec_coeffs
        from .precision import bigfloat

        return spec_coeffs(self.spec, P, ctx or bigfloat(256))

    def singular_point(self):
        pts = self.spec.singular_points()
        return pts[0] if pts else None

    def describe(self):
        return self.spec.describe()


def family_from_config(name: str, params: dict) -> Family:
    """Instantiate a family from config-file fields."""
    name = name.lower()
    if name in ("step", "stepderivative"):
        return StepDerivativeFamily(a=float(params.get("a", 0.5)))
    if name in ("absshift", "abs_shift"):
        return AbsShiftFamily(a=float(params.get("a", 0.5)))
    if name in ("constrained", "constrainedpversion"):
        return ConstrainedFamily(a=float(params.get("a", 0.5)))
    if name in ("powerabs", "power_abs"):
        return PowerAbsFamily(beta=float(params["beta"]))
    if name in ("powershift", "power_shift"):
        return PowerShiftFamily(beta=float(params["beta"]))
    if name in ("spec", "custom", "customspec"):
        spec = SingularFunctionSpec(
            terms=tuple(tuple(t) for t in params.get("terms", ())),
            analytic_part=tuple(params.get("poly", ())),
        )
        return SpecFamily(spec=spec)
    raise ValueError(f"unknown family {name!r}")
