import numpy as np
import pytest

from leglab.coefficients import abs_shift_coeffs, step_derivative_coeffs
from leglab.functions import AbsShiftFamily, ConstrainedFamily, StepDerivativeFamily
from leglab.legendre import legendre_eval_range
from leglab.series_eval import error_sweep

A = 0.5


@pytest.fixture(scope="session")
def step_family():
    return StepDerivativeFamily(a=A)


@pytest.fixture(scope="session")
def abs_family():
    return AbsShiftFamily(a=A)


@pytest.fixture(scope="session")
def constrained_family():
    return ConstrainedFamily(a=A)


@pytest.fixture(scope="session")
def step_series():
    return step_derivative_coeffs(A, 2201)


@pytest.fixture(scope="session")
def abs_series():
    return abs_shift_coeffs(A, 2201)


@pytest.fixture(scope="session")
def legendre_at_a():
    # P_0(a) .. P_2202(a), shared by the identity tests
    return np.array(legendre_eval_range(2202, A))


@pytest.fixture(scope="session")
def step_sweeps(step_family, step_series):
    xs = (-1.0, 1.0, A, 0.1, -0.99, -0.9999)
    return {x: error_sweep(step_series, step_family.exact, x, 2200) for x in xs}


@pytest.fixture(scope="session")
def abs_sweeps(abs_family, abs_series):
    xs = (-1.0, -0.99, 0.1, A, A + 0.01)
    return {x: error_sweep(abs_series, abs_family.exact, x, 2200) for x in xs}
