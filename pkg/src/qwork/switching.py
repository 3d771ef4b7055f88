"""Temporal switching windows chi(tau) and their Fourier transforms.

The Fourier convention is fixed project-wide as

    chitilde(Omega) = integral chi(tau) exp(+i Omega tau) dtau.

Only |chitilde|^2 enters the thermodynamic formulas, so the sign choice is
a pure bookkeeping convention; it is declared here once and used
everywhere (mode sums, smeared operators, commutator shortcuts).

Three families are supported: a Gaussian window exp(-tau^2 / 2 T^2) with
exact transform, a C-infinity bump compactly supported on [tau0, tau1]
(numeric transform, entire in Omega), and a rectangular window.  The
rectangular window has slowly decaying sinc tails; combining it with a
continuum spectrum makes mode sums converge slowly and triggers a warning
at parameter-validation time.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import AccuracyError, ParameterError

FOURIER_ABS_TOL = 1e-10


@dataclass(frozen=True)
class SwitchingProfile:
    """A temporal window.  ``family`` is gaussian | smooth-bump | rectangular."""

    family: str
    width: float = 0.0       # gaussian T
    tau0: float = 0.0        # compact families
    tau1: float = 0.0

    def __post_init__(self):
        if self.family == "gaussian":
            if not self.width > 0:
                raise ParameterError(f"gaussian window needs T > 0, got {self.width}")
        elif self.family in ("smooth-bump", "rectangular"):
            if not self.tau1 > self.tau0:
                raise ParameterError(
                    f"window needs tau1 > tau0, got [{self.tau0}, {self.tau1}]")
        else:
            raise ParameterError(f"unknown switching family {self.family!r}")

    # -- evaluation ---------------------------------------------------------

    def __call__(self, tau):
        tau = np.asarray(tau, dtype=float)
        if self.family == "gaussian":
            out = np.exp(-0.5 * (tau / self.width) ** 2)
        elif self.family == "rectangular":
            out = np.where((tau >= self.tau0) & (tau <= self.tau1), 1.0, 0.0)
        else:
            out = self._bump(tau)
        return out if out.ndim else float(out)

    def _bump(self, tau):
        # exp(1 - 1/(1-u^2)) on the open support, 0 outside; peak value 1
        u = np.atleast_1d(
            (2.0 * tau - (self.tau0 + self.tau1)) / (self.tau1 - self.tau0))
        out = np.zeros_like(u)
        inside = np.abs(u) < 1.0
        ui = u[inside]
        out[inside] = np.exp(1.0 - 1.0 / (1.0 - ui * ui))
        return out.reshape(np.shape(tau))

    def support(self):
        """Interval outside which chi is zero (or below double precision)."""
        if self.family == "gaussian":
            half = 9.0 * self.width  # exp(-40.5) ~ 2.6e-18
            return (-half, half)
        return (self.tau0, self.tau1)

    # -- Fourier transform ---------------------------------------------------

    def fourier(self, omega, abs_tol=FOURIER_ABS_TOL):
        """chitilde(omega) for real or complex omega.

        Gaussian and rectangular windows use closed forms (entire in
        omega); the bump is integrated adaptively over its compact support
        with absolute tolerance ``abs_tol``.
        """
        if self.family == "gaussian":
            t = self.width
            return complex(math.sqrt(2.0 * math.pi) * t) * np.exp(-0.5 * t * t * omega * omega)
        if self.family == "rectangular":
            half = 0.5 * (self.tau1 - self.tau0)
            center = 0.5 * (self.tau1 + self.tau0)
            return 2.0 * half * _sinc(omega * half) * np.exp(1j * omega * center)
        return self._bump_fourier(omega, abs_tol)

    def _bump_fourier(self, omega, abs_tol):
        om = complex(omega)
        val, err = integrate.quad(
            lambda tau: float(self._bump(np.asarray(tau))) * np.exp(1j * om * tau),
            self.tau0, self.tau1, epsabs=abs_tol * 0.1, epsrel=0.0,
            limit=400, complex_func=True)
        err_mag = abs(err)
        if err_mag > abs_tol:
            raise AccuracyError("bump Fourier transform did not converge",
                                achieved=err_mag)
        return val

    # -- config-file declaration ---------------------------------------------

    def declaration(self):
        if self.family == "gaussian":
            return f"gaussian T={self.width:g}"
        return f"{self.family} tau0={self.tau0:g} tau1={self.tau1:g}"


def _sinc(z):
    """sin(z)/z for real or complex z, stable near 0."""
    z = np.asarray(z)
    small = np.abs(z) < 1e-6
    safe = np.where(small, 1.0, z)
    out = np.where(small, 1.0 - z * z / 6.0, np.sin(safe) / safe)
    return out if out.ndim else complex(out)


def gaussian_switching(width):
    return SwitchingProfile(family="gaussian", width=width)


def bump_switching(tau0, tau1):
    return SwitchingProfile(family="smooth-bump", tau0=tau0, tau1=tau1)


def rectangular_switching(tau0, tau1):
    return SwitchingProfile(family="rectangular", tau0=tau0, tau1=tau1)


_DECL_RE = re.compile(r"^\s*(?P<family>[\w-]+)\s*(?P<args>.*)$")


def from_declaration(text):
    """Parse a declaration like "gaussian T=1.0" or "smooth-bump tau0=-1 tau1=1"."""
    m = _DECL_RE.match(text)
    if m is None:
        raise ParameterError(f"cannot parse switching declaration {text!r}")
    family = m.group("family")
    kv = {}
    for tok in m.group("args").split():
        if "=" not in tok:
            raise ParameterError(f"malformed switching argument {tok!r} in {text!r}")
        key, val = tok.split("=", 1)
        try:
            kv[key] = float(val)
        except ValueError:
            raise ParameterError(f"non-numeric switching argument {tok!r}") from None
    if family == "gaussian":
        if set(kv) != {"T"}:
            raise ParameterError(f"gaussian window takes exactly T=..., got {text!r}")
        return gaussian_switching(kv["T"])
    if family in ("smooth-bump", "rectangular"):
        if set(kv) != {"tau0", "tau1"}:
            raise ParameterError(
                f"{family} window takes tau0=... tau1=..., got {text!r}")
        ctor = bump_switching if family == "smooth-bump" else rectangular_switching
        return ctor(kv["tau0"], kv["tau1"])
    raise ParameterError(f"unknown switching family {family!r}")
