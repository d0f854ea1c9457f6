import math

import numpy as np
import pytest

from leglab.coefficients import constrained_pversion_coeffs, step_derivative_coeffs
from leglab.functions import exact_solution
from leglab.legendre import gauss_rule
from leglab.pfem import (FemSolution, Mesh1D, assemble_and_solve, element_error_series,
                         energy_norm_error, internal_mode)
from leglab.series_eval import error_sweep, partial_sum

A = 0.5


def test_mesh_validation():
    with pytest.raises(ValueError):
        Mesh1D([0.0, 1.0], [1])
    with pytest.raises(ValueError):
        Mesh1D([-1.0, 0.5, 0.2, 1.0], [1, 1, 1])
    with pytest.raises(ValueError):
        Mesh1D([-1.0, 1.0], [])
    m = Mesh1D.uniform(4, 3)
    assert m.nodes == pytest.approx([-1.0, -0.5, 0.0, 0.5, 1.0])
    assert m.element_of(-0.75) == 0
    assert m.element_of(1.0) == 3


def test_internal_modes_vanish_at_endpoints():
    for k in (2, 3, 7):
        assert abs(float(internal_mode(k, 1.0))) < 1e-14
        assert abs(float(internal_mode(k, -1.0))) < 1e-14
    with pytest.raises(ValueError):
        internal_mode(1, 0.0)


def test_load_at_node_gives_exact_solution():
    sol = assemble_and_solve(Mesh1D.uniform(4, 3), -0.5)
    for x in (-0.75, -0.5, -0.1, 0.2, 0.9, 1.0):
        assert abs(sol.error(x)) < 1e-14
    # boundary conditions exact
    assert float(sol.evaluate(-1.0)) == 0.0
    assert float(sol.evaluate(1.0)) == 0.0


def test_single_element_matches_constrained_series():
    sol = assemble_and_solve(Mesh1D.uniform(1, 101), A)
    b = constrained_pversion_coeffs(A, 100)
    for x in (-0.9, -0.4, 0.0, 0.3, 0.7, 0.95):
        v_fem = float(sol.evaluate(x))
        v_series = float(partial_sum(b, 100, x))
        assert abs(v_fem - v_series) <= 1e-10 * max(abs(v_series), 1e-3)


def test_internal_coefficient_closed_form():
    # coefficient of mode k+1 equals a_k sqrt(2/(2k+1)) on the full interval
    sol = assemble_and_solve(Mesh1D.uniform(1, 20), A)
    ak = step_derivative_coeffs(A, 20).coeffs
    for j in (1, 4, 9, 19):
        got = float(sol.internal[0][j - 1])
        want = float(ak[j]) * math.sqrt(2.0 / (2 * j + 1))
        assert got == pytest.approx(want, abs=1e-15)


def test_multi_element_exact_off_singular_element():
    mesh = Mesh1D.uniform(4, 8)
    sol = assemble_and_solve(mesh, 0.3)  # inside (0, 0.5)
    for x in (-0.95, -0.7, -0.5, -0.2, 0.0, 0.55, 0.8, 1.0):
        assert abs(sol.error(x)) <= 1e-12
    # nodes of the singular element are interpolated exactly as well
    for x in (0.0, 0.5):
        assert abs(sol.error(x)) <= 1e-13


def test_localization_under_degree_change():
    base = assemble_and_solve(Mesh1D([-1.0, 0.0, 1.0], [2, 2]), 0.4)
    rich = assemble_and_solve(Mesh1D([-1.0, 0.0, 1.0], [2, 30]), 0.4)
    for x in (-0.9, -0.5, -0.1):
        assert float(base.evaluate(x)) == pytest.approx(float(rich.evaluate(x)), abs=1e-14)


def test_galerkin_orthogonality():
    mesh = Mesh1D([-1.0, -0.2, 0.7, 1.0], [3, 6, 2])
    a = 0.25
    sol = assemble_and_solve(mesh, a)
    rule = gauss_rule(24)

    def derr(x):
        e = mesh.element_of(x)
        from leglab.pfem import _derivative

        c = (a - 1.0) / 2.0
        due = c if x < a else 1.0 + c
        return due - _derivative(sol, e, x)

    # hat test functions
    for i in (1, 2):
        lo, mid, hi = mesh.nodes[i - 1], mesh.nodes[i], mesh.nodes[i + 1]
        total = 0.0
        for plo, phi, slope in ((lo, mid, 1.0 / (mid - lo)), (mid, hi, -1.0 / (hi - mid))):
            pieces = [(plo, a), (a, phi)] if plo < a < phi else [(plo, phi)]
            for qlo, qhi in pieces:
                if qhi > qlo:
                    total += float(rule.integrate(lambda t: derr(t) * slope, qlo, qhi))
        assert abs(total) < 1e-10
    # internal modes of the singular element
    s = mesh.element_of(a)
    lo, hi = mesh.nodes[s], mesh.nodes[s + 1]
    he = hi - lo
    from leglab.legendre import legendre_eval

    for k in (2, 4):
        def dv(x, k=k):
            xi = (2 * x - (lo + hi)) / he
            return (2.0 / he) * math.sqrt((2 * k - 1) / 2.0) * legendre_eval(k - 1, xi)

        total = 0.0
        for qlo, qhi in ((lo, a), (a, hi)):
            total += float(rule.integrate(lambda t: derr(t) * dv(t), qlo, qhi))
        assert abs(total) < 1e-10


def test_energy_optimality_sampled():
    mesh = Mesh1D.uniform(1, 12)
    sol = assemble_and_solve(mesh, A)
    best = energy_norm_error(sol, order=40)
    rng = np.random.default_rng(11)
    for _ in range(6):
        competitor = FemSolution(mesh, A, list(sol.nodal),
                                 [list(np.array(sol.internal[0]) + rng.normal(0, 0.02, len(sol.internal[0])))])
        assert energy_norm_error(competitor, order=40) >= best - 1e-12


def test_element_error_series_matches_constrained_sweep():
    sol = assemble_and_solve(Mesh1D.uniform(1, 61), A)
    sweep_fem = element_error_series(sol, 0.3, 60)
    b = constrained_pversion_coeffs(A, 61)
    sweep_series = error_sweep(b, lambda x: exact_solution(x, A), 0.3, 60)
    assert sweep_fem.abs_error == pytest.approx(sweep_series.abs_error, abs=1e-14)


def test_element_error_series_at_mesh_node_is_zero():
    mesh = Mesh1D.uniform(2, 40)
    sol = assemble_and_solve(mesh, 0.3)
    sweep = element_error_series(sol, 0.0, 30)  # node of the mesh, edge of element
    assert np.all(sweep.abs_error < 1e-14)


def test_fem_error_rates_on_singular_element():
    sol = assemble_and_solve(Mesh1D.uniform(1, 1000), A)
    from leglab.ratefit import fit_rate

    sweep = element_error_series(sol, -0.99, 999)
    fit = fit_rate(sweep, (500, 999))
    assert fit.alpha == pytest.approx(2.0, abs=0.1)
    sweep_a = element_error_series(sol, A, 999)
    fit_a = fit_rate(sweep_a, (500, 999))
    assert fit_a.alpha == pytest.approx(1.0, abs=0.05)


def test_bigfloat_solve_matches_f64():
    from leglab.precision import EXACT_RATIONAL, PrecisionError, bigfloat

    mesh = Mesh1D.uniform(2, 6)
    sol64 = assemble_and_solve(mesh, 0.3)
    solbig = assemble_and_solve(Mesh1D.uniform(2, 6), 0.3, bigfloat(128))
    for x in (-0.6, 0.1, 0.4, 0.9):
        assert float(solbig.evaluate(x)) == pytest.approx(float(sol64.evaluate(x)), abs=1e-14)
    with pytest.raises(PrecisionError):
        assemble_and_solve(mesh, 0.3, EXACT_RATIONAL)


def test_invalid_load_point():
    with pytest.raises(ValueError):
        assemble_and_solve(Mesh1D.uniform(2, 2), 1.0)
    sol = assemble_and_solve(Mesh1D.uniform(2, 2), 0.3)
    with pytest.raises(ValueError):
        element_error_series(sol, -0.7, 2)  # outside the singular element


def test_solution_export(tmp_path):
    sol = assemble_and_solve(Mesh1D.uniform(2, 4), 0.3)
    path = tmp_path / "fem.csv"
    sol.write_csv(path)
    assert (tmp_path / "fem.csv").exists()
    assert (tmp_path / "fem.csv.trace.csv").exists()
    lines = path.read_text().splitlines()
    assert lines[0] == "element,k,coeff"
