"""Shared fixtures: the bench configurations used across the suite.

Reference constants are frozen from independent oracle computations
(adaptive quadrature, Bessel resummation, truncated-Fock traces); see the
individual test modules for the oracle that produced each value.
"""

import numpy as np
import pytest

from qwork import (RunParams, cavity_spectrum, esu_spectrum, gaussian_switching,
                   lapse_rescale, minkowski_continuum_spectrum,
                   single_mode_spectrum)

# frozen reference values for the single-mode bench configuration
# (omega = 1, weight = 1, f2 = 1, beta = 1, lambda = 0.1, gaussian T = 1)
CHIT_1 = 1.5203469010662807          # chitilde(1)
C_REF = 0.011557273497909217         # lambda^2 |chitilde|^2 / 2
A_REF = 0.02217880947317015          # c / sinh(1/2)
B_REF = 0.02500940143931191          # c * coth(1/2)
P_PI_REF = 0.9512115388174535        # P(pi) = exp(-2 b)
P0_REF = 0.9754206839506488
P1_REF = 0.0178328490646134
PM1_REF = 0.006560338548384655
MEAN_REF = 0.011557273497909217
M2_REF = 0.02500940143931191
VAR_REF = 0.024875830868606435
W_MID_REF = 0.9595173756674719       # W(-i beta/2) = 1 / (2 sinh(1/2))
THETA_REF = 0.009537210941208778     # +(lambda^2/2) sqrt(pi) 2 D(1)
CONV0_REF = 0.9516794969262348       # two-copy convolution weight at W = 0


@pytest.fixture(scope="session")
def ref_params():
    return RunParams(beta=1.0, lam=0.1, spec=single_mode_spectrum(1.0),
                     switching=gaussian_switching(1.0))


@pytest.fixture(scope="session")
def cavity20_params():
    spec = cavity_spectrum(length=np.pi, mass=0.0, max_modes=20,
                           position=0.37 * np.pi)
    return RunParams(beta=1.0, lam=0.1, spec=spec,
                     switching=gaussian_switching(1.0))


@pytest.fixture(scope="session")
def esu10_params():
    spec = esu_spectrum(radius=1.0, mass=0.0, max_n=10)
    return RunParams(beta=1.0, lam=0.1, spec=spec,
                     switching=gaussian_switching(1.0))


@pytest.fixture(scope="session")
def lapse_cavity_params():
    spec = lapse_rescale(
        cavity_spectrum(length=np.pi, mass=0.0, max_modes=20,
                        position=0.37 * np.pi), 2.0)
    return RunParams(beta=1.0, lam=0.1, spec=spec,
                     switching=gaussian_switching(1.0))


@pytest.fixture(scope="session")
def minkowski_params():
    spec = minkowski_continuum_spectrum(mass=0.0, omega_max=8.0, n_points=2048)
    return RunParams(beta=1.0, lam=0.1, spec=spec,
                     switching=gaussian_switching(1.0))


# -- acceptance reporting -----------------------------------------------------

ACCEPTANCE_LINES = []


def record_criterion(name, value, tol, ok=None):
    """Collect one pass/fail line per acceptance criterion; printed in the
    terminal summary."""
    if ok is None:
        ok = value <= tol
    status = "PASS" if ok else "FAIL"
    ACCEPTANCE_LINES.append(f"{status}  {name}: {value:.3e} (tolerance {tol:.0e})")
    return ok


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
