"""One-dimensional p-version FEM for the point-source model problem.

The discrete space is spanned by nodal hat functions plus internal
integrated-Legendre modes N_k(xi) = (P_k(xi) - P_{k-2}(xi)) / sqrt(2(2k-1)),
whose derivatives are L2-orthonormal: the stiffness matrix is tridiagonal
on the hats and identity (scaled by 2/h) on the internal block, so the
solve is direct.  The load functional is l(v) = -v(a), the sign for which
the solved problem's exact solution is the piecewise-linear function in
``functions.exact_solution`` (kink down at the load point); coefficient
generators and the solver then agree sign for sign.

Point loads are evaluated exactly: the load vector holds basis values at a.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass

import numpy as np

from .functions import exact_solution
from .legendre import legendre_eval_range
from .precision import FLOAT64, PrecisionContext
from .series_eval import ErrorSweep


@dataclass
class Mesh1D:
    """Strictly increasing nodes spanning [-1, 1] with per-element degrees."""

    nodes: list
    degrees: list

    def __post_init__(self):
        if len(self.nodes) < 2:
            raise ValueError("a mesh needs at least two nodes")
        if self.nodes[0] != -1.0 or self.nodes[-1] != 1.0:
            raise ValueError("the mesh must span [-1, 1]")
        if any(b <= a for a, b in zip(self.nodes, self.nodes[1:])):
            raise ValueError("nodes must be strictly increasing")
        if len(self.degrees) != len(self.nodes) - 1:
            raise ValueError("one degree per element required")
        if any(p < 1 for p in self.degrees):
            raise ValueError("element degrees must be >= 1")

    @classmethod
    def uniform(cls, n: int, degree: int) -> "Mesh1D":
        """n elements of width h = 2/n: nodes i*h - 1."""
        h = 2.0 / n
        nodes = [i * h - 1.0 for i in range(n + 1)]
        nodes[-1] = 1.0
        return cls(nodes, [degree] * n)

    @property
    def n_elements(self) -> int:
        return len(self.nodes) - 1

    def element_of(self, x: float) -> int:
        if not self.nodes[0] <= x <= self.nodes[-1]:
            raise ValueError(f"x = {x} outside the mesh")
        i = bisect.bisect_right(self.nodes, x) - 1
        return min(i, self.n_elements - 1)

    def to_reference(self, e: int, x: float) -> float:
        lo, hi = self.nodes[e], self.nodes[e + 1]
        return (2.0 * x - (lo + hi)) / (hi - lo)


def internal_mode(k: int, xi: float, ctx: PrecisionContext = FLOAT64):
    """Integrated-Legendre shape N_k, k >= 2; vanishes at xi = -1, 1."""
    if k < 2:
        raise ValueError("internal modes start at k = 2")
    Pk = legendre_eval_range(k, ctx.convert(xi), ctx)
    return (Pk[k] - Pk[k - 2]) / ctx.sqrt(ctx.convert(2 * (2 * k - 1)))


@dataclass
class FemSolution:
    """Nodal values plus per-element internal-mode coefficients."""

    mesh: Mesh1D
    a: float
    nodal: list
    internal: list  # per element: coefficients for N_2..N_p
    ctx: PrecisionContext = FLOAT64

    def evaluate(self, x: float):
        e = self.mesh.element_of(float(x))
        lo, hi = self.mesh.nodes[e], self.mesh.nodes[e + 1]
        ctx = self.ctx
        with ctx.active():
            xv = ctx.convert(x)
            xi = (2 * xv - ctx.convert(lo + hi)) / ctx.convert(hi - lo)
            ul = ctx.convert(self.nodal[e])
            ur = ctx.convert(self.nodal[e + 1])
            val = ul * (1 - xi) / 2 + ur * (1 + xi) / 2
            coeffs = self.internal[e]
            if coeffs:
                Pk = legendre_eval_range(len(coeffs) + 1, xi, ctx)
                for i, ck in enumerate(coeffs):
                    k = i + 2
                    val += ck * (Pk[k] - Pk[k - 2]) / ctx.sqrt(ctx.convert(2 * (2 * k - 1)))
            return val

    def error(self, x: float) -> float:
        return float(exact_solution(float(x), self.a) - self.evaluate(x))

    def write_csv(self, path, samples_per_element: int = 20) -> None:
        with open(path, "w") as fh:
            fh.write("element,k,coeff\n")
            for e in range(self.mesh.n_elements):
                fh.write(f"{e},0,{float(self.nodal[e])!r}\n")
                fh.write(f"{e},1,{float(self.nodal[e + 1])!r}\n")
                for i, c in enumerate(self.internal[e]):
                    fh.write(f"{e},{i + 2},{float(c)!r}\n")
        with open(str(path) + ".trace.csv", "w") as fh:
            fh.write("x,u\n")
            for e in range(self.mesh.n_elements):
                lo, hi = self.mesh.nodes[e], self.mesh.nodes[e + 1]
                for t in np.linspace(lo, hi, samples_per_element, endpoint=False):
                    fh.write(f"{t!r},{float(self.evaluate(t))!r}\n")
            fh.write(f"1.0,{float(self.evaluate(1.0))!r}\n")


def _thomas(diag, off, rhs, ctx):
    """Solve a symmetric tridiagonal system in the context's arithmetic."""
    n = len(diag)
    c = [ctx.zero()] * n
    d = [ctx.zero()] * n
    c[0] = off[0] / diag[0] if n > 1 else ctx.zero()
    d[0] = rhs[0] / diag[0]
    for i in range(1, n):
        denom = diag[i] - off[i - 1] * c[i - 1]
        if i < n - 1:
            c[i] = off[i] / denom
        d[i] = (rhs[i] - off[i - 1] * d[i - 1]) / denom
    x = [ctx.zero()] * n
    x[-1] = d[-1]
    for i in range(n - 2, -1, -1):
        x[i] = d[i] - c[i] * x[i + 1]
    return x


def assemble_and_solve(mesh: Mesh1D, a: float, ctx: PrecisionContext = FLOAT64) -> FemSolution:
    """Direct solve: tridiagonal hat system plus decoupled internal modes."""
    if not -1.0 < a < 1.0:
        raise ValueError("the load point must lie strictly inside (-1, 1)")
    ctx.require_inexact("assemble_and_solve")
    with ctx.active():
        nodes = [ctx.convert(t) for t in mesh.nodes]
        n_int = mesh.n_elements - 1
        s = mesh.element_of(a)
        av = ctx.convert(a)
        nodal = [ctx.zero() for _ in range(mesh.n_elements + 1)]
        if n_int > 0:
            h = [nodes[i + 1] - nodes[i] for i in range(mesh.n_elements)]
            diag = [1 / h[i] + 1 / h[i + 1] for i in range(n_int)]
            off = [-1 / h[i + 1] for i in range(n_int - 1)]
            rhs = []
            for i in range(1, mesh.n_elements):
                # hat at interior node i evaluated at the load point, negated
                if nodes[i - 1] <= av <= nodes[i + 1]:
                    if av <= nodes[i]:
                        val = (av - nodes[i - 1]) / (nodes[i] - nodes[i - 1])
                    else:
                        val = (nodes[i + 1] - av) / (nodes[i + 1] - nodes[i])
                else:
                    val = ctx.zero()
                rhs.append(-val)
            sol = _thomas(diag, off, rhs, ctx)
            for i, v in enumerate(sol):
                nodal[i + 1] = v
        internal = []
        for e in range(mesh.n_elements):
            p = mesh.degrees[e]
            coeffs = []
            if e == s and p >= 2:
                he = nodes[e + 1] - nodes[e]
                xi_a = (2 * av - (nodes[e] + nodes[e + 1])) / he
                Pk = legendre_eval_range(p, xi_a, ctx)
                for k in range(2, p + 1):
                    nk = (Pk[k] - Pk[k - 2]) / ctx.sqrt(ctx.convert(2 * (2 * k - 1)))
                    coeffs.append(-(he / 2) * nk)
            internal.append(coeffs)
    return FemSolution(mesh, float(a), nodal, internal, ctx)


def internal_coefficient(mesh: Mesh1D, a: float, k: int, ctx: PrecisionContext = FLOAT64):
    """Closed-form internal coefficient on the singular element (for tests)."""
    s = mesh.element_of(a)
    lo, hi = mesh.nodes[s], mesh.nodes[s + 1]
    he = hi - lo
    xi_a = (2 * a - (lo + hi)) / he
    return -(he / 2.0) * float(internal_mode(k, xi_a, ctx))


def element_error_series(sol: FemSolution, x: float, pmax: int) -> ErrorSweep:
    """Pointwise error on the singular element as internal modes accumulate.

    Entry p corresponds to internal modes N_2..N_{p+1} (element degree
    p + 1), matching the order-p endpoint-constrained expansion under the
    affine map; on a single element the two sweeps coincide identically.
    """
    mesh, a, ctx = sol.mesh, sol.a, sol.ctx
    s = mesh.element_of(a)
    lo, hi = mesh.nodes[s], mesh.nodes[s + 1]
    if not lo <= x <= hi:
        raise ValueError("x must lie inside the element containing the load point")
    with ctx.active():
        he = ctx.convert(hi - lo)
        av = ctx.convert(a)
        xv = ctx.convert(x)
        xi_a = (2 * av - ctx.convert(lo + hi)) / he
        xi_x = (2 * xv - ctx.convert(lo + hi)) / he
        ua = legendre_eval_range(pmax + 2, xi_a, ctx)
        ux = legendre_eval_range(pmax + 2, xi_x, ctx)
        ul, ur = ctx.convert(sol.nodal[s]), ctx.convert(sol.nodal[s + 1])
        linear = ul * (1 - xi_x) / 2 + ur * (1 + xi_x) / 2
        exact = ctx.convert(exact_solution(float(x), a))
        errs = np.empty(pmax)
        total = linear
        for p in range(1, pmax + 1):
            k = p + 1
            norm2 = ctx.convert(2 * (2 * k - 1))
            nk_a = (ua[k] - ua[k - 2]) / ctx.sqrt(norm2)
            nk_x = (ux[k] - ux[k - 2]) / ctx.sqrt(norm2)
            total += -(he / 2) * nk_a * nk_x
            errs[p - 1] = abs(float(exact - total))
    return ErrorSweep(float(x), np.arange(1, pmax + 1), errs,
                      f"fem element degree sweep a={a:g}", f"pfem1d(a={a:g})")


def energy_norm_error(sol: FemSolution, order: int = 60) -> float:
    """||u - u_p||_E by exact piecewise Gauss quadrature of the derivative error."""
    from .legendre import gauss_rule

    mesh, a = sol.mesh, sol.a
    rule = gauss_rule(order, FLOAT64)
    total = 0.0
    for e in range(mesh.n_elements):
        lo, hi = mesh.nodes[e], mesh.nodes[e + 1]
        pieces = [(lo, a), (a, hi)] if lo < a < hi else [(lo, hi)]
        for plo, phi in pieces:
            if phi <= plo:
                continue

            def dsq(t, e=e):
                du = _derivative(sol, e, float(t))
                c = (a - 1.0) / 2.0
                due = c if t < a else 1.0 + c
                return (due - du) ** 2

            total += float(rule.integrate(dsq, plo, phi))
    return total ** 0.5


def _derivative(sol: FemSolution, e: int, x: float) -> float:
    mesh = sol.mesh
    lo, hi = mesh.nodes[e], mesh.nodes[e + 1]
    he = hi - lo
    xi = (2.0 * x - (lo + hi)) / he
    val = (float(sol.nodal[e + 1]) - float(sol.nodal[e])) / he
    coeffs = sol.internal[e]
    if coeffs:
        Pk = legendre_eval_range(len(coeffs) + 1, xi, FLOAT64)
        import math

        for i, ck in enumerate(coeffs):
            k = i + 2
            # d/dx N_k = (2/h) sqrt((2k-1)/2) P_{k-1}
            val += float(ck) * (2.0 / he) * math.sqrt((2 * k - 1) / 2.0) * Pk[k - 1]
    return val
