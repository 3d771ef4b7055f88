"""Work distributions, moments, and the fluctuation identities.

Discrete spectra produce exact lattice distributions: one mode with
exponent coefficients (a, b) resums to atoms

    p_m = e^{-b} I_m(a) e^{m beta Omega / 2}   at   W_m = m Omega,

where I_m is the modified Bessel function (the generating identity
exp[(a/2)(t + 1/t)] = sum_m I_m(a) t^m applied to the exponent with
t = e^{h} e^{i Omega mu}).  Multimode spectra factorize, so their atom
sets are convolutions of the per-mode sets.  Detailed balance
p_m / p_{-m} = e^{beta W_m} is exact in this form, and the exponential
average sum_m p_m e^{-beta W_m} telescopes to exactly 1.

Continuum spectra go through FFT inversion of the characteristic
function with the asymptotic constant split off as an atom at W = 0
(delta combs alias catastrophically under a plain FFT, which is why the
discrete path uses atoms instead).

Moment conventions: ``mean_work`` is the exact first moment;
``second_moment`` is the quadratic-order closed form, which equals the
exact second *cumulant* of the distribution (the exact raw second moment
is second_moment + mean_work^2); ``variance`` is their literal difference
second_moment - mean_work^2, i.e. the quadratic-order variance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from .charfunc import CharFunctionSamples, mode_coefficients
from .errors import ParameterError, TruncationError, WindowError
from .spectra import KIND_CONTINUUM

DEFAULT_WEIGHT_FLOOR = 1e-14
ATOM_TAIL_TOL = 1e-12
# energies closer than this (relative to scale) merge into one atom
_MERGE_ATOL = 1e-9


@dataclass(frozen=True)
class AtomicDistribution:
    """Lattice work distribution: atoms (w[i], p[i]) and the generating beta.

    ``pruned_mass`` records how much weight was dropped (and renormalized
    away) by convolution pruning; it is reported, never silent.
    """

    w: np.ndarray
    p: np.ndarray
    beta: float
    pruned_mass: float = 0.0

    def __post_init__(self):
        if self.w.shape != self.p.shape:
            raise ParameterError("w and p must have equal shapes")
        total = float(np.sum(self.p))
        if abs(total - 1.0) > 1e-8:
            raise ParameterError(f"atom weights sum to {total}, not 1")

    def total(self):
        return float(np.sum(self.p))


@dataclass(frozen=True)
class SampledDensity:
    """Continuum work density on a uniform grid plus an atom at W = 0."""

    w_grid: np.ndarray
    density: np.ndarray
    atom_at_zero: float
    beta: float
    imag_residue: float = 0.0
    mass_drift: float = 0.0

    @property
    def dw(self):
        return float(self.w_grid[1] - self.w_grid[0])

    def total(self):
        return self.atom_at_zero + float(np.sum(self.density)) * self.dw


def _single_mode_ab(params):
    om, c, b = mode_coefficients(params)
    if om.size == 0:  # lambda = 0 or f2 = 0: trivial distribution
        return None
    if om.size != 1:
        raise ParameterError(
            f"atoms_single_mode needs a one-line spectrum, got {om.size} lines")
    h = 0.5 * params.beta * float(om[0])
    a = float(c[0]) / math.sinh(h)
    return float(om[0]), a, float(b[0]), h


def atoms_single_mode(params, m_max):
    """Exact atom set of a one-mode spectrum, m in [-m_max, m_max].

    The truncated tail 1 - sum_m p_m must not exceed 1e-12; otherwise a
    :class:`TruncationError` suggests a sufficient m_max.
    """
    if not m_max >= 1:
        raise ParameterError(f"m_max must be >= 1, got {m_max}")
    ab = _single_mode_ab(params)
    if ab is None:
        return AtomicDistribution(w=np.zeros(1), p=np.ones(1), beta=params.beta)
    omega, a, b, h = ab
    m = np.arange(-int(m_max), int(m_max) + 1)
    with np.errstate(under="ignore"):
        p = np.exp(-b + m * h) * special.iv(m, a)
    tail = 1.0 - float(np.sum(p))
    if tail > ATOM_TAIL_TOL:
        raise TruncationError(
            f"atom tail {tail:.3e} exceeds {ATOM_TAIL_TOL:.0e}",
            suggested=suggest_m_max(a, h))
    return AtomicDistribution(w=m * omega, p=p, beta=params.beta)


def suggest_m_max(a, h, tol=ATOM_TAIL_TOL):
    """Smallest m_max whose truncated atom tail is below tol."""
    for m_max in range(1, 512):
        m = np.arange(-m_max, m_max + 1)
        with np.errstate(under="ignore"):
            total = float(np.sum(np.exp(m * h) * special.iv(m, a)))
        if 1.0 - total * math.exp(-a * math.cosh(h)) <= tol:
            return m_max
    raise TruncationError("no m_max below 512 satisfies the tail bound")


def _merge_atoms(w, p):
    order = np.argsort(w)
    w, p = w[order], p[order]
    scale = max(1.0, float(np.max(np.abs(w))))
    gaps = np.diff(w) > _MERGE_ATOL * scale
    groups = np.concatenate([[0], np.cumsum(gaps)])
    n = groups[-1] + 1
    w_out = np.zeros(n)
    p_out = np.zeros(n)
    np.add.at(p_out, groups, p)
    np.add.at(w_out, groups, w * p)
    nonzero = p_out > 0
    w_out[nonzero] /= p_out[nonzero]
    return w_out, p_out


def convolve_atoms(d1, d2, weight_floor=DEFAULT_WEIGHT_FLOOR):
    """Atom set of the sum of two independent work contributions.

    Atoms below ``weight_floor`` are pruned and the rest renormalized; the
    removed mass is accumulated in ``pruned_mass``.
    """
    if abs(d1.beta - d2.beta) > 1e-12 * max(d1.beta, d2.beta):
        raise ParameterError(
            f"incompatible betas {d1.beta} and {d2.beta} in convolution")
    w = (d1.w[:, None] + d2.w[None, :]).ravel()
    p = (d1.p[:, None] * d2.p[None, :]).ravel()
    w, p = _merge_atoms(w, p)
    keep = p >= weight_floor
    pruned = float(np.sum(p[~keep]))
    w, p = w[keep], p[keep]
    p = p / np.sum(p)
    return AtomicDistribution(
        w=w, p=p, beta=d1.beta,
        pruned_mass=d1.pruned_mass + d2.pruned_mass + pruned)


def atoms_from_spectrum(params, m_max=None, weight_floor=DEFAULT_WEIGHT_FLOOR):
    """Exact atom set of a discrete multimode spectrum (per-mode convolution).

    ``m_max`` defaults to the per-mode suggestion from the tail bound.
    """
    from dataclasses import replace
    from .spectra import ModeSpectrum

    if params.spec.kind == KIND_CONTINUUM:
        raise ParameterError("continuum spectra take the FFT inversion path, "
                             "not the atom lattice")
    dist = None
    for line in params.spec.lines:
        sub = replace(params, spec=ModeSpectrum(lines=(line,), kind=params.spec.kind))
        ab = _single_mode_ab(sub)
        if ab is None:
            continue
        _, a, _, h = ab
        mm = m_max if m_max is not None else suggest_m_max(a, h)
        d = atoms_single_mode(sub, mm)
        dist = d if dist is None else convolve_atoms(dist, d, weight_floor)
    if dist is None:
        dist = AtomicDistribution(w=np.zeros(1), p=np.ones(1), beta=params.beta)
    return dist


# ---------------------------------------------------------------------------
# FFT inversion for continuum spectra
# ---------------------------------------------------------------------------

def asymptotic_charfunc(params):
    """P(mu -> infinity) = exp(-sum_j b_j): the weight of the W = 0 atom
    for continuum spectra (the oscillatory part dephases)."""
    _, _, b = mode_coefficients(params)
    return float(np.exp(-np.sum(b)))


def invert_fft(samples, apodization=None, atom_split=None,
               edge_mass_tol=1e-6):
    """Invert characteristic-function samples to a work density.

    P(W) = (1/2pi) integral P(mu) e^{-i W mu} dmu on the FFT frequency
    grid of the mu grid.  For continuum spectra (or ``atom_split=True``)
    the asymptotic constant P(inf) is subtracted first and returned as
    ``atom_at_zero``.

    ``apodization``: optional Gaussian window std in W units; the samples
    are multiplied by exp(-mu^2 sigma^2 / 2) before transforming, which
    convolves the density with a mass-preserving Gaussian kernel of width
    sigma.  Use it to turn the delta comb of a discrete spectrum into
    resolvable peaks (sigma ~ 5 / mu_max); leave None for continuum
    spectra and for round-trip checks.

    Probability mass within the outer 1% of the W grid on either side
    beyond ``edge_mass_tol`` indicates aliasing and raises
    :class:`WindowError`.
    """
    mu = samples.mu_grid
    dmu = samples.dmu
    n = mu.size
    if not np.allclose(np.diff(mu), dmu, rtol=0, atol=1e-9 * abs(dmu)):
        raise ParameterError("mu grid must be uniform")
    if abs(mu[0] + mu[-1] + dmu) > 1e-9 * abs(mu[0]):
        raise ParameterError("mu grid must be symmetric (half-open [-M, M))")

    values = samples.values
    if atom_split is None:
        atom_split = samples.params.spec.kind == KIND_CONTINUUM
    atom = asymptotic_charfunc(samples.params) if atom_split else 0.0
    work = values - atom
    if apodization is not None:
        work = work * np.exp(-0.5 * (mu * apodization) ** 2)

    spec = np.fft.fft(work)
    w_grid = 2.0 * math.pi * np.fft.fftfreq(n, d=dmu)
    dens = (dmu / (2.0 * math.pi)) * np.exp(-1j * w_grid * mu[0]) * spec
    w_grid = np.fft.fftshift(w_grid)
    dens = np.fft.fftshift(dens)

    imag_residue = float(np.max(np.abs(dens.imag)))
    dens = dens.real
    dw = float(w_grid[1] - w_grid[0])

    edge = max(1, int(0.01 * n))
    edge_mass = (np.abs(dens[:edge]).sum() + np.abs(dens[-edge:]).sum()) * dw
    if edge_mass > edge_mass_tol:
        raise WindowError(
            f"probability mass {edge_mass:.3e} within 1% of the W grid edge; "
            "widen the mu window or lower the frequency content")

    mass_drift = atom + float(np.sum(dens)) * dw - 1.0
    return SampledDensity(w_grid=w_grid, density=dens, atom_at_zero=atom,
                          beta=samples.params.beta,
                          imag_residue=imag_residue, mass_drift=mass_drift)


def forward_transform(density, mu_values, chunk=256):
    """P(mu) reconstructed from a sampled density plus its W = 0 atom."""
    mu = np.atleast_1d(np.asarray(mu_values, dtype=float))
    weights = density.density * density.dw
    out = np.empty(mu.size, dtype=complex)
    for lo in range(0, mu.size, chunk):
        hi = min(lo + chunk, mu.size)
        out[lo:hi] = np.exp(1j * np.outer(mu[lo:hi], density.w_grid)) @ weights
    out += density.atom_at_zero
    return out if np.ndim(mu_values) else complex(out[0])


# ---------------------------------------------------------------------------
# moments and fluctuation identities
# ---------------------------------------------------------------------------

def mean_work(params):
    """Exact first moment: (lambda^2/2) sum_j w_j |chitilde(Omega_j)|^2 f2_j.

    Temperature independent and nonnegative.
    """
    om, c, _ = mode_coefficients(params)
    return float(np.sum(c * om))


def second_moment(params):
    """Quadratic-order second moment
    (lambda^2/2) sum_j w_j Omega_j |chitilde|^2 coth(beta Omega_j/2) f2_j.

    Equals the exact second cumulant of the work distribution; the exact
    raw second moment is this plus mean_work(params)**2.
    """
    om, _, b = mode_coefficients(params)
    return float(np.sum(b * om * om))


def variance(params):
    """Quadratic-order work variance: second_moment - mean_work^2."""
    return second_moment(params) - mean_work(params) ** 2


def fdr_ratio(params):
    """mean / (beta variance / 2): 1 in the high-temperature limit; for a
    single mode equals tanh(beta Omega/2)/(beta Omega/2) at leading order
    in the coupling."""
    var = variance(params)
    if var == 0.0:
        raise ParameterError("variance is zero (lambda = 0?); ratio undefined")
    return mean_work(params) / (0.5 * params.beta * var)


def crooks_residual(dist, floor=DEFAULT_WEIGHT_FLOOR):
    """Detailed-balance residual max |ln(p(W)/p(-W)) - beta W|.

    Checked over atoms whose pair is resolvable at the floor: p >= floor
    and the balance-predicted mirror weight p e^{-beta W} >= floor (a
    mirror that detailed balance itself puts below the floor may have been
    pruned and carries no information).  An atom whose predicted mirror
    should be present but is missing counts as an infinite residual.
    """
    w, p, beta = dist.w, dist.p, dist.beta
    scale = max(1.0, float(np.max(np.abs(w))))
    order = np.argsort(w)
    ws, ps = w[order], p[order]
    residual = 0.0
    for wi, pi in zip(ws, ps):
        if pi < floor or pi * math.exp(-beta * wi) < floor:
            continue
        j = np.searchsorted(ws, -wi)
        hit = None
        for k in (j - 1, j, j + 1):
            if 0 <= k < ws.size and abs(ws[k] + wi) <= _MERGE_ATOL * scale:
                hit = k
                break
        if hit is None or ps[hit] <= 0.0:
            return math.inf
        residual = max(residual, abs(math.log(pi / ps[hit]) - beta * wi))
    return residual


def jarzynski_average(dist, beta=None):
    """Exponential work average sum_m p_m e^{-beta W_m}; equals 1 for
    thermal-state atom sets."""
    if beta is None:
        beta = dist.beta
    return float(np.sum(dist.p * np.exp(-beta * dist.w)))
