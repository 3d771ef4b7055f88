"""Brute-force validation in a truncated Fock space.

Everything here is dense linear algebra on the truncated bosonic space of
at most three modes: the trace formula for the characteristic function,
the full Ramsey interferometry protocol on the qubit (x) field space, and
a Trotterized product converging to the closed-form evolution
e^{i theta} e^{-i lambda phi(f)}.

The smeared field operator is built from the mode decomposition along the
worldline: with unit-commutator ladder operators per line,

    phi(f) = sum_j sqrt(w_j f2_j / (2 Omega_j))
             (chitilde(Omega_j)* A_j + chitilde(Omega_j) A_j^dagger),

and the free Hamiltonian is normal ordered, H = sum_j Omega_j N_j (the
constant drops out of every conjugation used here).  The Gibbs state is
built from the truncated H and renormalized; the discarded mass is
reported as ``gibbs_deficit``.

This module deliberately avoids the covariance-matrix (Gaussian state)
shortcut so it shares no derivation steps with the closed form.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .charfunc import RunParams, chitilde_sq, magnus_phase
from .errors import ParameterError, TruncationError
from .spectra import ModeSpectrum
from .switching import SwitchingProfile

MAX_DIMENSION = 20_000          # qubit (x) field space
THERMAL_TAIL_TOL = 1e-10
CERTIFICATE_TOL = 1e-8
CERTIFICATE_STEP = 5


@dataclass(frozen=True)
class FockOracleConfig:
    """Inputs of the truncated-Fock validator."""

    spec: ModeSpectrum
    cutoff: int | tuple[int, ...]
    beta: float
    lam: float
    switching: SwitchingProfile

    def __post_init__(self):
        if len(self.spec.lines) > 3:
            raise ParameterError(
                f"the oracle is desk-scale: at most 3 modes, got {len(self.spec.lines)}")
        if not self.beta > 0:
            raise ParameterError(f"beta must be positive, got {self.beta}")
        if self.lam < 0:
            raise ParameterError(f"lambda must be nonnegative, got {self.lam}")
        cuts = self.cutoffs()
        dim = 2 * math.prod(n + 1 for n in cuts)
        if dim > MAX_DIMENSION:
            raise ParameterError(
                f"qubit (x) Fock dimension {dim} exceeds the cap {MAX_DIMENSION}")
        for line, n in zip(self.spec.lines, cuts):
            tail = math.exp(-self.beta * line.omega * n)
            if tail > THERMAL_TAIL_TOL:
                raise ParameterError(
                    f"thermal tail exp(-beta omega N) = {tail:.3e} at omega="
                    f"{line.omega:g} exceeds {THERMAL_TAIL_TOL:g}; raise the cutoff")
            chi2 = float(chitilde_sq(self.switching, line.omega)[0])
            disp_sq = self.lam**2 * line.weight * line.f2 * chi2 / (2.0 * line.omega)
            if disp_sq > n / 4.0:
                raise ParameterError(
                    f"coherent displacement^2 = {disp_sq:.3g} exceeds N/4 = {n/4:.3g} "
                    f"at omega={line.omega:g}; the displaced state would graze the cutoff")

    def cutoffs(self):
        if isinstance(self.cutoff, int):
            return tuple(self.cutoff for _ in self.spec.lines)
        cuts = tuple(int(n) for n in self.cutoff)
        if len(cuts) != len(self.spec.lines):
            raise ParameterError("need one cutoff per mode")
        return cuts

    def with_cutoff_bump(self, step=CERTIFICATE_STEP):
        return FockOracleConfig(
            spec=self.spec, cutoff=tuple(n + step for n in self.cutoffs()),
            beta=self.beta, lam=self.lam, switching=self.switching)

    def run_params(self):
        return RunParams(beta=self.beta, lam=self.lam, spec=self.spec,
                         switching=self.switching)


def _ladder(n_max):
    return np.diag(np.sqrt(np.arange(1, n_max + 1)), -1)  # a^dagger


class FockOracle:
    """Dense operators of one truncated configuration, built once."""

    def __init__(self, config):
        self.config = config
        cuts = config.cutoffs()
        dims = [n + 1 for n in cuts]
        self.dim = math.prod(dims)
        w, om, f2 = config.spec.arrays()

        # per-mode raising operators embedded in the product space
        raising = []
        for i, d in enumerate(dims):
            ops = [np.eye(dl) for dl in dims]
            ops[i] = _ladder(cuts[i])
            full = ops[0]
            for o in ops[1:]:
                full = np.kron(full, o)
            raising.append(full)

        # occupations and energies of the product basis (kron ordering)
        occs = np.array(list(itertools.product(*[range(d) for d in dims])))
        self.occupations = occs
        self.energies = occs @ om

        # smeared field operator and its unitary
        chit = np.array([complex(config.switching.fourier(o)) for o in om])
        phi = np.zeros((self.dim, self.dim), dtype=complex)
        for j in range(len(om)):
            kappa = math.sqrt(w[j] * f2[j] / (2.0 * om[j]))
            phi += kappa * (chit[j] * raising[j] + np.conj(chit[j]) * raising[j].T)
        self.phi_f = phi
        self.u_phi = expm(-1j * config.lam * phi)
        self._u_phi_sq = np.abs(self.u_phi) ** 2

        # truncated Gibbs weights, renormalized; deficit vs the exact
        # normal-ordered partition function is reported
        boltz = np.exp(-config.beta * self.energies)
        z_trunc = float(boltz.sum())
        z_exact = math.prod(1.0 / -math.expm1(-config.beta * o) for o in om)
        self.gibbs = boltz / z_trunc
        self.gibbs_deficit = 1.0 - z_trunc / z_exact

    # -- characteristic function ---------------------------------------------

    def charfunc(self, mu):
        """Tr( e^{i lambda phi} e^{i mu H} e^{-i lambda phi} e^{-i mu H} rho ).

        H is diagonal in the number basis, so the conjugations reduce to
        phase vectors around the precomputed |e^{-i lambda phi}|^2 matrix.
        The global Magnus phase of the full evolution cancels between
        U and U^dagger and never appears.
        """
        mu = complex(mu)
        if abs(mu.imag) > self.config.beta * (1.0 + 1e-12):
            raise ParameterError("oracle charfunc is evaluated on |Im mu| <= beta")
        left = np.exp(1j * mu * self.energies)
        right = np.exp(-1j * mu * self.energies) * self.gibbs
        return complex(left @ self._u_phi_sq @ right)

    def charfunc_grid(self, mus):
        return np.array([self.charfunc(m) for m in np.asarray(mus)])

    # -- Ramsey protocol -------------------------------------------------------

    def ramsey(self, mu):
        """Bloch components (sigma3, sigma2) of the detector after the
        Hadamard / controlled-evolution / Hadamard sequence.

        Builds the full qubit (x) field density matrix and reduces it; no
        step reuses the trace-formula shortcut above.
        """
        mu = float(mu)
        d_mu = np.exp(-1j * mu * self.energies)
        a_blk = self.u_phi * d_mu[None, :]          # U e^{-i mu H}
        b_blk = d_mu[:, None] * self.u_phi          # e^{-i mu H} U
        rho = self.gibbs

        # G (rho_phi x |+><+|) G^dagger, qubit index blocked
        blocks = [[None, None], [None, None]]
        for i, first in ((0, a_blk), (1, b_blk)):
            for j, second in ((0, a_blk), (1, b_blk)):
                blocks[i][j] = 0.5 * (first * rho[None, :]) @ second.conj().T
        # Hadamard on the qubit: rho' = (H x I) rho (H x I)
        h = np.array([[1.0, 1.0], [1.0, -1.0]]) / math.sqrt(2.0)
        mixed = [[None, None], [None, None]]
        for i in range(2):
            for j in range(2):
                mixed[i][j] = sum(h[i, k] * blocks[k][l] * h[l, j]
                                  for k in range(2) for l in range(2))
        rho_d = np.array([[np.trace(mixed[i][j]) for j in range(2)]
                          for i in range(2)])
        sigma3 = np.array([[1.0, 0.0], [0.0, -1.0]])
        sigma2 = np.array([[0.0, -1j], [1j, 0.0]])
        return (float(np.real(np.trace(rho_d @ sigma3))),
                float(np.real(np.trace(rho_d @ sigma2))))


def fock_charfunc(config, mu, certify=True):
    """Oracle characteristic function with a cutoff-convergence certificate.

    When ``certify`` is set the value is recomputed with every cutoff
    raised by 5; a change above 1e-8 raises :class:`TruncationError` with
    a suggested cutoff.
    """
    value = FockOracle(config).charfunc(mu)
    if certify:
        bumped = FockOracle(config.with_cutoff_bump()).charfunc(mu)
        if abs(bumped - value) > CERTIFICATE_TOL:
            raise TruncationError(
                f"cutoff not converged: value moved {abs(bumped - value):.3e} "
                f"under N -> N+{CERTIFICATE_STEP}",
                suggested=tuple(n + 2 * CERTIFICATE_STEP for n in config.cutoffs()))
    return value


def ramsey_protocol(config, mu):
    """Detector Bloch components (sigma3, sigma2) = (Re P, Im P)."""
    return FockOracle(config).ramsey(mu)


@dataclass(frozen=True)
class TrotterReport:
    """Convergence data of the sliced evolution against the closed form."""

    n_steps: tuple[int, ...]
    distances: tuple[float, ...]
    fitted_order: float
    phase: float               # arg <vac| U_sliced |vac> at the largest n
    phase_closed: float        # Magnus phase of the closed form
    monotone: bool

    @property
    def phase_error(self):
        return abs(self.phase - self.phase_closed)


def trotter_unitary(config, n_steps=(64, 128, 256), window=None,
                    compare_margin=12, phase_steps=None):
    """Slice the time-ordered evolution and compare with the closed form.

    Midpoint slicing over the switching support; the spectral-norm
    distance is taken on the sub-block of occupations at least
    ``compare_margin`` below every cutoff, where the truncated ladder
    algebra is faithful (at the very top of the truncated space the field
    commutator is no longer central and the closed form does not apply).

    Returns a :class:`TrotterReport` with the fitted convergence order
    (midpoint slicing gives order 2) and the global phase extracted from
    the vacuum matrix element at the largest step count (``phase_steps``
    overrides it).
    """
    ns = tuple(int(n) for n in n_steps)
    if any(n < 2 for n in ns) or len(ns) < 2:
        raise ParameterError("need at least two step counts, each >= 2")
    oracle = FockOracle(config)
    cuts = config.cutoffs()
    keep = np.all(oracle.occupations <= np.array(cuts) - compare_margin, axis=1)
    if not np.any(keep):
        raise ParameterError("compare_margin leaves no states to compare on")

    theta = magnus_phase(config.run_params()) if config.lam > 0 else 0.0
    closed = np.exp(1j * theta) * oracle.u_phi
    closed_blk = closed[np.ix_(keep, keep)]

    if window is None:
        window = config.switching.support()
    lo, hi = window

    w, om, f2 = config.spec.arrays()
    kappa = np.sqrt(w * f2 / (2.0 * om))
    cuts_dims = [n + 1 for n in cuts]
    raising = []
    for i, d in enumerate(cuts_dims):
        ops = [np.eye(dl) for dl in cuts_dims]
        ops[i] = _ladder(cuts[i])
        full = ops[0]
        for o in ops[1:]:
            full = np.kron(full, o)
        raising.append(full)

    def product(n):
        dt = (hi - lo) / n
        u = np.eye(oracle.dim, dtype=complex)
        for k in range(n):
            t = lo + (k + 0.5) * dt
            chi = float(config.switching(t))
            if chi == 0.0:
                continue
            phi_t = np.zeros((oracle.dim, oracle.dim), dtype=complex)
            for j in range(om.size):
                ph = np.exp(1j * om[j] * t)
                phi_t += kappa[j] * (ph * raising[j] + np.conj(ph) * raising[j].T)
            u = expm(-1j * dt * config.lam * chi * phi_t) @ u
        return u

    distances = []
    last = None
    for n in ns:
        last = product(n)
        distances.append(float(np.linalg.norm(
            last[np.ix_(keep, keep)] - closed_blk, 2)))

    if phase_steps is not None and phase_steps not in ns:
        last = product(int(phase_steps))
    phase = float(np.angle(last[0, 0]))

    if config.lam == 0.0 or max(distances) == 0.0:
        order = math.inf
    else:
        order = -float(np.polyfit(np.log(ns), np.log(distances), 1)[0])
    monotone = all(d2 < d1 for d1, d2 in zip(distances, distances[1:]))
    return TrotterReport(
        n_steps=ns, distances=tuple(distances), fitted_order=order,
        phase=phase, phase_closed=float(theta), monotone=monotone)
