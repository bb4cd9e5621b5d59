"""Shared fixtures and the acceptance-line reporter."""

import numpy as np
import pytest

from pgcopula import (
    CopulaFamily,
    CopulaParams,
    CorrelationMatrix,
    MarginalParams,
    ModelParams,
    simulate_dataset,
)

# One line per acceptance criterion, echoed after the run so the
# verdicts survive pytest's output capture.
_CRITERION_LINES = []


@pytest.fixture
def criterion_log():
    def record(number, passed, detail):
        verdict = "PASS" if passed else "FAIL"
        line = f"criterion {number}: {verdict} - {detail}"
        _CRITERION_LINES.append(line)
        print(line)

    return record


def pytest_terminal_summary(terminalreporter):
    if _CRITERION_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_CRITERION_LINES):
            terminalreporter.write_line(line)


def bivariate_gaussian_model(rho=0.7):
    """The bivariate model used throughout: one peaked and one U-shaped
    marginal coupled by a gaussian copula."""
    return ModelParams(
        marginals=(MarginalParams(2.0, 2.0, 1.0), MarginalParams(0.5, 0.5, 1.0)),
        copula=CopulaParams(
            family=CopulaFamily.GAUSSIAN,
            correlation=CorrelationMatrix.from_upper(2, [rho]),
        ),
    )


def bivariate_t_model(rho=0.6, nu=3.0):
    return ModelParams(
        marginals=(MarginalParams(2.0, 2.0, 1.0), MarginalParams(1.5, 0.8, 2.0)),
        copula=CopulaParams(
            family=CopulaFamily.STUDENT_T,
            correlation=CorrelationMatrix.from_upper(2, [rho]),
            nu=nu,
        ),
    )


def trivariate_t_model():
    """Truth used for the 3-variate recovery runs."""
    return ModelParams(
        marginals=(
            MarginalParams(2.0, 2.0, 2.0),
            MarginalParams(0.5, 3.0, 1.0),
            MarginalParams(3.0, 5.0, 3.0),
        ),
        copula=CopulaParams(
            family=CopulaFamily.STUDENT_T,
            correlation=CorrelationMatrix.from_upper(3, [0.75, -0.75, -0.75]),
            nu=3.0,
        ),
    )


@pytest.fixture(scope="session")
def small_gaussian_data():
    rng = np.random.default_rng(7)
    return simulate_dataset(bivariate_gaussian_model(), 150, rng)
