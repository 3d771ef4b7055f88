"""Characteristic function of the interaction work for thermal field states.

For a pointlike detector with switching window chi and mode spectrum
{w_j, Omega_j, f2_j}, the characteristic function of the work done on a
thermal state at inverse temperature beta is the closed form

    P(mu) = exp( sum_j a_j * (cos[Omega_j (mu - i beta/2)] - cosh(h_j)) )

with h_j = beta Omega_j / 2 and a_j = lambda^2 w_j f2_j |chitilde(Omega_j)|^2
/ (2 Omega_j sinh(h_j)).  Naive evaluation of the cos/sinh ratio overflows
for large beta*Omega, so the exponent is computed in the split form

    exponent = sum_j [ b_j (cos(Omega_j x) - 1) + i c_j sin(Omega_j x) ]

for real mu = x, where

    c_j = lambda^2 w_j f2_j |chitilde(Omega_j)|^2 / (2 Omega_j)   (= a_j sinh h_j)
    b_j = c_j coth(h_j)                                           (= a_j cosh h_j)

and in the analogous hyperbolic-ratio form for complex mu inside the
closed strip |Im mu| <= beta (outside the strip the mode sum diverges and
evaluation is refused).  Both forms are exactly equal at real mu.

The module also carries the two brute-force cross-checks that share no
algebra with the closed form: a double-time-quadrature evaluation of the
exponent against the mode-sum Wightman function, and the global phase of
the time-ordered evolution together with the smeared field commutator.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import wightman as _wightman
from .errors import AccuracyError, ConvergenceError, DomainError, ParameterError
from .spectra import KIND_CONTINUUM, ModeSpectrum
from .switching import SwitchingProfile

# per-line contributions below this are dropped from the exponent
B_FLOOR = 1e-300
_ABS_SUM_SENTINEL = 1e100


@dataclass(frozen=True)
class RunParams:
    """Physical inputs of one run: state, coupling, geometry, window."""

    beta: float
    lam: float
    spec: ModeSpectrum
    switching: SwitchingProfile

    def __post_init__(self):
        if not (self.beta > 0 and math.isfinite(self.beta)):
            raise ParameterError(f"beta must be positive, got {self.beta}")
        if not (self.lam >= 0 and math.isfinite(self.lam)):
            raise ParameterError(f"lambda must be nonnegative, got {self.lam}")
        if (self.switching.family == "rectangular"
                and self.spec.kind == KIND_CONTINUUM):
            warnings.warn(
                "rectangular switching on a continuum spectrum: the sinc tails "
                "of the window make the mode sums converge slowly",
                stacklevel=2)
        w, om, f2 = self.spec.arrays()
        chi2 = chitilde_sq(self.switching, om)
        h = 0.5 * self.beta * om
        sentinel = float(np.sum(w * f2 * chi2 * (1.0 + _coth(h)) / (2.0 * om)))
        if not math.isfinite(sentinel):
            raise ParameterError(
                f"exponent mode sum is not absolutely convergent "
                f"(sentinel = {sentinel})")


def _coth(h):
    return (1.0 + np.exp(-2.0 * h)) / (-np.expm1(-2.0 * h))


def chitilde_sq(switching, omegas):
    """|chitilde(Omega)|^2 on an array of frequencies."""
    om = np.atleast_1d(np.asarray(omegas, dtype=float))
    if switching.family in ("gaussian", "rectangular"):
        vals = switching.fourier(om)
    else:
        vals = np.array([switching.fourier(o) for o in om])
    return np.abs(np.asarray(vals)) ** 2


def mode_coefficients(params):
    """(omega, c, b) arrays of the exponent, with negligible lines dropped.

    c_j is temperature independent; b_j = c_j coth(beta Omega_j / 2).
    """
    w, om, f2 = params.spec.arrays()
    chi2 = chitilde_sq(params.switching, om)
    c = params.lam**2 * w * f2 * chi2 / (2.0 * om)
    b = c * _coth(0.5 * params.beta * om)
    keep = b >= B_FLOOR
    return om[keep], c[keep], b[keep]


def _exponent(params, mu):
    """ln P(mu) for scalar or array mu inside the closed strip |Im mu| <= beta."""
    mu = np.asarray(mu, dtype=complex)
    if np.any(np.abs(mu.imag) > params.beta * (1.0 + 1e-12)):
        raise DomainError(
            f"Im(mu) outside the closed strip |Im mu| <= beta = {params.beta}; "
            "the closed form is not analytic there")
    om, c, _ = mode_coefficients(params)
    if om.size == 0:
        return np.zeros(mu.shape, dtype=complex) if mu.ndim else 0.0 + 0.0j
    x = mu.real[..., None]
    s = 0.5 * params.beta - mu.imag[..., None]
    rc, rs = _wightman._ratio_kernel(om, params.beta, s)
    coth = _coth(0.5 * params.beta * om)
    terms = c * (np.cos(om * x) * rc + 1j * np.sin(om * x) * rs - coth)
    abs_sum = np.abs(terms).sum(axis=-1)
    if not np.all(np.isfinite(abs_sum)) or np.any(abs_sum > _ABS_SUM_SENTINEL):
        raise ConvergenceError("characteristic-function exponent sum exceeded "
                               "the divergence sentinel")
    total = terms.sum(axis=-1)
    return total if mu.ndim else complex(total)


def charfunc_pointlike(params, mu):
    """Closed-form P(mu), valid on the closed strip |Im mu| <= beta.

    P(0) = 1 and P(i beta) = 1 hold exactly (term by term); for real mu
    the exponent has nonpositive real part, so |P| <= 1.
    """
    return np.exp(_exponent(params, mu))


@dataclass(frozen=True)
class CharFunctionSamples:
    """P sampled on a uniform half-open grid [mu_min, mu_max)."""

    mu_grid: np.ndarray
    values: np.ndarray
    params: RunParams

    @property
    def dmu(self):
        return float(self.mu_grid[1] - self.mu_grid[0])


def charfunc_samples(params, mu_min=-50.0, mu_max=50.0, n=4096, chunk=1024):
    """Sample the closed form on n uniformly spaced real mu values.

    The grid is half-open, mu_k = mu_min + k (mu_max - mu_min)/n, so for
    even n and symmetric limits it contains mu = 0 exactly.
    """
    if not mu_max > mu_min:
        raise ParameterError("mu_max must exceed mu_min")
    if not n >= 2:
        raise ParameterError("need at least 2 grid points")
    n = int(n)
    grid = mu_min + (mu_max - mu_min) / n * np.arange(n)
    values = np.empty(n, dtype=complex)
    for lo in range(0, n, chunk):
        hi = min(lo + chunk, n)
        values[lo:hi] = np.exp(_exponent(params, grid[lo:hi] + 0.0j))
    return CharFunctionSamples(mu_grid=grid, values=values, params=params)


# ---------------------------------------------------------------------------
# brute-force cross-checks: double time quadrature, Magnus phase, commutator
# ---------------------------------------------------------------------------

def _gl_nodes(profile, n_nodes, n_panels=None):
    lo, hi = profile.support()
    if n_panels is None:
        n_panels = max(4, n_nodes // 16)
    per = max(2, int(round(n_nodes / n_panels)))
    x, w = np.polynomial.legendre.leggauss(per)
    edges = np.linspace(lo, hi, n_panels + 1)
    nodes = np.concatenate([0.5 * (b - a) * x + 0.5 * (a + b)
                            for a, b in zip(edges[:-1], edges[1:])])
    weights = np.concatenate([np.full(per, 0.5 * (b - a)) * w
                              for a, b in zip(edges[:-1], edges[1:])])
    return nodes, weights


def _wightman_sum_chunked(w, om, f2, beta, dtau_flat, chunk=200_000):
    out = np.empty(dtau_flat.size, dtype=complex)
    step = max(1, chunk // max(1, om.size))
    for lo in range(0, dtau_flat.size, step):
        hi = min(lo + step, dtau_flat.size)
        out[lo:hi] = _wightman.wightman_terms(
            w, om, f2, beta, dtau_flat[lo:hi]).sum(axis=-1)
    return out


def _quadrature_exponent(params, mu, n_nodes, eps):
    """lambda^2 * double integral of chi chi' [W(dtau - mu) - W(dtau)]."""
    t, wq = _gl_nodes(params.switching, n_nodes)
    chi = params.switching(t)
    cw = chi * wq
    dtau = t[:, None] - t[None, :]  # tau' - tau
    w, om, f2 = params.spec.arrays()
    shifted = _wightman_sum_chunked(w, om, f2, params.beta,
                                    (dtau - mu - 1j * eps).ravel())
    plain = _wightman_sum_chunked(w, om, f2, params.beta,
                                  (dtau - 1j * eps).ravel())
    kernel = (shifted - plain).reshape(dtau.shape)
    return params.lam**2 * complex(cw @ kernel @ cw)


def charfunc_quadrature(params, mu, rel_tol=1e-7, n_nodes=160, eps=None):
    """P(mu) by brute-force double time quadrature of the Wightman pullback.

    Shares no algebraic steps with the closed form: the exponent is the
    double integral of chi(tau') chi(tau) [W(tau'-tau-mu) - W(tau'-tau)]
    against the mode-sum Wightman function, evaluated just inside the
    analyticity strip (eps defaults to 1e-9 * beta; it only regulates the
    boundary value and perturbs the result at O(eps)).

    The integral is evaluated at two resolutions; disagreement beyond
    ``rel_tol`` raises :class:`AccuracyError`.
    """
    mu = float(mu)
    if eps is None:
        eps = 1e-9 * params.beta
    coarse = _quadrature_exponent(params, mu, n_nodes, eps)
    fine = _quadrature_exponent(params, mu, int(n_nodes * 1.5), eps)
    err = abs(fine - coarse) / max(1.0, abs(fine))
    if err > rel_tol:
        raise AccuracyError("double time quadrature did not converge",
                            achieved=err)
    return complex(np.exp(fine))


def pullback_commutator(spec, s):
    """Free-field commutator kernel along the worldline:
    [phi(tau), phi(tau')] = -i D(tau - tau') with
    D(s) = sum_j w_j f2_j sin(Omega_j s) / Omega_j."""
    s = np.asarray(s, dtype=float)
    w, om, f2 = spec.arrays()
    return np.sum((w * f2 / om) * np.sin(np.multiply.outer(s, om)), axis=-1)


def magnus_phase(params, rel_tol=1e-8, n_nodes=128):
    """Global phase theta of the time-ordered evolution U = e^{i theta} e^{-i lambda phi(f)}.

    theta = +(lambda^2 / 2) * int dtau int^tau dtau' chi(tau) chi(tau') D(tau - tau')

    Sign convention: with [phi(tau), phi(tau')] = -i D(tau - tau') and the
    second-order term of the time-ordered exponential
    -(1/2) int int_{tau' < tau} [H(tau), H(tau')] = i theta, the overall
    sign of theta comes out positive for D as defined in
    :func:`pullback_commutator`.  The Trotterized product in the Fock
    oracle confirms it (phase of the vacuum matrix element).
    """
    coarse = _magnus_integral(params, n_nodes)
    fine = _magnus_integral(params, int(n_nodes * 1.5))
    err = abs(fine - coarse) / max(1.0, abs(fine))
    if err > rel_tol:
        raise AccuracyError("ordered double quadrature did not converge",
                            achieved=err)
    return 0.5 * params.lam**2 * fine


def _magnus_integral(params, n_nodes):
    """Ordered integral int dtau chi(tau) int_lo^tau dtau' chi(tau') D(tau-tau')."""
    lo, _ = params.switching.support()
    t_out, w_out = _gl_nodes(params.switching, n_nodes)
    x, w = np.polynomial.legendre.leggauss(max(8, n_nodes // 2))
    # inner nodes scaled to [lo, tau_i] for every outer node
    half = 0.5 * (t_out - lo)
    t_in = half[:, None] * x[None, :] + (lo + half)[:, None]
    w_in = half[:, None] * w[None, :]
    chi_out = params.switching(t_out)
    chi_in = params.switching(t_in.ravel()).reshape(t_in.shape)
    dkern = pullback_commutator(params.spec, (t_out[:, None] - t_in).ravel()
                                ).reshape(t_in.shape)
    inner = np.sum(w_in * chi_in * dkern, axis=1)
    return float(np.sum(w_out * chi_out * inner))


def delta_fg(params, mu, rel_tol=1e-8, n_nodes=128):
    """Smeared commutator Delta(f, g) between the window and its mu-translate.

    Delta(f, g)(mu) = int int chi(tau) chi(u) D(tau - u - mu) dtau du,
    evaluated by tensor quadrature; antisymmetric under f <-> g, hence odd
    in mu for any window.  The exponent of the closed form satisfies
    Im ln P(mu) = -(lambda^2 / 2) Delta(f, g)(mu).
    """
    coarse = _delta_fg_integral(params, mu, n_nodes)
    fine = _delta_fg_integral(params, mu, int(n_nodes * 1.5))
    err = abs(fine - coarse) / max(1.0, abs(fine))
    if err > rel_tol:
        raise AccuracyError("commutator quadrature did not converge",
                            achieved=err)
    return fine


def _delta_fg_integral(params, mu, n_nodes):
    t, wq = _gl_nodes(params.switching, n_nodes)
    cw = params.switching(t) * wq
    dkern = pullback_commutator(
        params.spec, (t[:, None] - t[None, :] - mu).ravel()).reshape(t.size, t.size)
    return float(cw @ dkern @ cw)


def delta_fg_modesum(params, mu):
    """Mode-sum shortcut for Delta(f, g):
    -sum_j w_j f2_j |chitilde(Omega_j)|^2 sin(Omega_j mu) / Omega_j."""
    w, om, f2 = params.spec.arrays()
    chi2 = chitilde_sq(params.switching, om)
    return float(-np.sum(w * f2 * chi2 * np.sin(om * np.asarray(mu, dtype=float)[..., None]) / om, axis=-1))
