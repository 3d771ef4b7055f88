"""Thermal two-point function along the static worldline.

For a mode spectrum {w_j, Omega_j, f2_j} the thermal Wightman function at
inverse temperature beta, pulled back to the worldline, is the mode sum

    W(dtau) = sum_j w_j f2_j / (2 Omega_j)
              * cos[Omega_j (dtau + i beta/2)] / sinh(beta Omega_j / 2).

The sum converges absolutely only for Im(dtau) in the open strip
(-beta, 0).  Real-time separations are distributional boundary values and
are never evaluated directly: callers must supply an explicit -i*epsilon
offset (default epsilon = 1e-3 * beta where one is offered).

The cos/sinh ratio is evaluated in an exponential form whose arguments are
all nonpositive inside the strip, so large beta*Omega never overflows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, DomainError, ParameterError

DEFAULT_EPS_FACTOR = 1e-3
_ABS_SUM_SENTINEL = 1e100


@dataclass(frozen=True)
class StripPoint:
    """A complex proper-time separation tagged with its strip margin."""

    dtau: complex
    beta: float

    def __post_init__(self):
        if not self.beta > 0:
            raise ParameterError(f"beta must be positive, got {self.beta}")
        y = self.dtau.imag
        if not -self.beta < y < 0.0:
            raise DomainError(
                f"Im(dtau) = {y} outside the open strip (-{self.beta}, 0); "
                "supply an explicit -i*epsilon regulator for real separations")

    @property
    def margin(self):
        """Distance to the nearest strip boundary, in units of beta."""
        y = self.dtau.imag
        return min(-y, self.beta + y) / self.beta

    @property
    def tag(self):
        return "interior" if self.margin > 1e-3 else "near-boundary"


def _ratio_kernel(omega, beta, s):
    """cosh(omega s)/sinh(h) and sinh(omega s)/sinh(h), h = beta omega / 2.

    Stable for s in [-beta/2, 3 beta/2]: written as exponentials with
    arguments omega*(s - beta/2) and -omega*(s + beta/2), both bounded
    above by beta*omega in magnitude and nonpositive inside the strip.
    """
    ep = np.exp(omega * (s - 0.5 * beta))
    em = np.exp(-omega * (s + 0.5 * beta))
    denom = -np.expm1(-beta * omega)  # 1 - exp(-beta omega)
    return (ep + em) / denom, (ep - em) / denom


def wightman_terms(weights, omegas, f2s, beta, dtau):
    """Per-line contributions to W(dtau); dtau may be an array.

    Returns an array of shape ``dtau.shape + (n_lines,)``.
    """
    dtau = np.asarray(dtau, dtype=complex)
    x = dtau.real[..., None]
    s = 0.5 * beta + dtau.imag[..., None]  # in (-beta/2, beta/2) inside the strip
    rc, rs = _ratio_kernel(omegas, beta, s)
    # cos(A + iB) = cos A cosh B - i sin A sinh B with A = Omega x, B = Omega s
    val = np.cos(omegas * x) * rc - 1j * np.sin(omegas * x) * rs
    return (weights * f2s / (2.0 * omegas)) * val


def thermal_wightman(spec, beta, dtau):
    """W(dtau) for the spectrum; dtau must lie in the open strip.

    ``dtau`` may be complex scalar, a StripPoint, or an array of complex
    separations (each validated).
    """
    if not beta > 0:
        raise ParameterError(f"beta must be positive, got {beta}")
    if isinstance(dtau, StripPoint):
        if dtau.beta != beta:
            raise ParameterError("StripPoint built for a different beta")
        dtau = dtau.dtau
    arr = np.asarray(dtau, dtype=complex)
    y = arr.imag
    if np.any(y <= -beta) or np.any(y >= 0.0):
        raise DomainError(
            "Im(dtau) outside the open strip (-beta, 0); supply an explicit "
            "-i*epsilon regulator for real separations")
    w, om, f2 = spec.arrays()
    terms = wightman_terms(w, om, f2, beta, arr)
    abs_sum = np.abs(terms).sum(axis=-1)
    if not np.all(np.isfinite(abs_sum)) or np.any(abs_sum > _ABS_SUM_SENTINEL):
        raise ConvergenceError(
            f"mode sum exceeded the divergence sentinel (sum |term| = {abs_sum})")
    total = terms.sum(axis=-1)
    return total if arr.ndim else complex(total)


def kms_residual(spec, beta, tau_grid, epsilon=None):
    """Detailed-balance diagnostic: the thermal state must satisfy
    W(dtau - i beta) = W(-dtau) as boundary values.

    Evaluates max |W(t - i(beta - eps)) - W(-t - i eps)| over the grid,
    normalized by max |W| there.  Exact per line in exact arithmetic, so
    the residual measures accumulated floating error.
    """
    if epsilon is None:
        epsilon = DEFAULT_EPS_FACTOR * beta
    if not 0 < epsilon < beta / 2:
        raise ParameterError(
            f"epsilon must satisfy 0 < epsilon < beta/2, got {epsilon}")
    t = np.asarray(tau_grid, dtype=float)
    lhs = thermal_wightman(spec, beta, t - 1j * (beta - epsilon))
    rhs = thermal_wightman(spec, beta, -t - 1j * epsilon)
    scale = float(np.max(np.abs(lhs)))
    if scale == 0.0:
        return 0.0
    return float(np.max(np.abs(lhs - rhs)) / scale)
