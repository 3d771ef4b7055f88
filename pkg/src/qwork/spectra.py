"""Mode spectra of scalar fields in static spacetimes.

Every geometry handled by the engine is reduced at construction time to a
list of lines ``(weight, omega, f2)``: a quadrature weight, a proper
frequency ``omega > 0`` and the mode density ``f2 = |F(x0)|^2`` at the
detector position.  Continuum bands are pre-discretized into quadrature
lines, so all downstream formulas are single weighted sums regardless of
whether the underlying spectrum is discrete or continuous.

Built-in geometries: a 1D Dirichlet cavity, the massless/massive Minkowski
continuum (density-of-states convention, see ``minkowski_continuum_spectrum``)
and the Einstein static universe.  Arbitrary spectra can be loaded from
text files.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DomainError, EmptyBandError, ParameterError, SpectrumParseError

KIND_DISCRETE = "discrete"
KIND_CONTINUUM = "continuum-quadrature"

# f2 contributions smaller than this relative to the largest line are kept;
# the cutoff only guards the convergence sentinel against inf/nan.
_SENTINEL_MAX = 1e100


@dataclass(frozen=True)
class ModeLine:
    """One spectral line: quadrature weight, proper frequency, mode density."""

    weight: float
    omega: float
    f2: float

    def __post_init__(self):
        if not (self.weight > 0 and math.isfinite(self.weight)):
            raise ParameterError(f"weight must be positive and finite, got {self.weight}")
        if not (self.omega > 0 and math.isfinite(self.omega)):
            raise ParameterError(f"omega must be positive and finite, got {self.omega}")
        if not (self.f2 >= 0 and math.isfinite(self.f2)):
            raise ParameterError(f"f2 must be nonnegative and finite, got {self.f2}")


@dataclass(frozen=True)
class ModeSpectrum:
    """An ordered set of mode lines plus bookkeeping.

    ``geometry`` carries the construction parameters of catalogued
    geometries (used by :func:`smear_overlap` to rebuild mode functions);
    it is not persisted by the file format.
    """

    lines: tuple[ModeLine, ...]
    kind: str = KIND_DISCRETE
    provenance: str = ""
    geometry: dict | None = field(default=None, compare=False)

    def __post_init__(self):
        if not self.lines:
            raise ParameterError("a ModeSpectrum needs at least one line")
        if self.kind not in (KIND_DISCRETE, KIND_CONTINUUM):
            raise ParameterError(f"unknown spectrum kind {self.kind!r}")
        s = self.zero_point_sum()
        if not math.isfinite(s) or s > _SENTINEL_MAX:
            raise ParameterError(
                f"zero-point sum {s} of the spectrum is not finite; "
                "the mode measure does not define a usable state")

    def __len__(self):
        return len(self.lines)

    def arrays(self):
        """Return (weight, omega, f2) as float arrays."""
        w = np.array([l.weight for l in self.lines])
        om = np.array([l.omega for l in self.lines])
        f2 = np.array([l.f2 for l in self.lines])
        return w, om, f2

    def zero_point_sum(self):
        """Convergence sentinel: sum of weight * f2 / (2 omega)."""
        w, om, f2 = self.arrays()
        return float(np.sum(w * f2 / (2.0 * om)))


def single_mode_spectrum(omega, weight=1.0, f2=1.0):
    """A one-line spectrum; the standard bench configuration."""
    return ModeSpectrum(
        lines=(ModeLine(weight=weight, omega=omega, f2=f2),),
        kind=KIND_DISCRETE,
        provenance=f"single mode omega={omega:g} weight={weight:g} f2={f2:g}",
    )


def cavity_spectrum(length, mass, max_modes, position):
    """Dirichlet cavity on [0, L]: omega_n = sqrt((n pi/L)^2 + m^2).

    Mode functions F_n(x) = sqrt(2/L) sin(n pi x / L) are orthonormal on
    the cavity, so the pointlike mode density at ``position`` is
    f2 = (2/L) sin^2(n pi x0 / L).
    """
    if not length > 0:
        raise ParameterError(f"cavity length must be positive, got {length}")
    if mass < 0:
        raise ParameterError(f"mass must be nonnegative, got {mass}")
    if not max_modes >= 1:
        raise ParameterError(f"max_modes must be >= 1, got {max_modes}")
    if not 0 <= position <= length:
        raise ParameterError(f"position {position} outside the cavity [0, {length}]")
    lines = []
    for n in range(1, int(max_modes) + 1):
        k = n * math.pi / length
        omega = math.sqrt(k * k + mass * mass)
        f2 = (2.0 / length) * math.sin(k * position) ** 2
        lines.append(ModeLine(weight=1.0, omega=omega, f2=f2))
    return ModeSpectrum(
        lines=tuple(lines),
        kind=KIND_DISCRETE,
        provenance=f"cavity L={length:g} m={mass:g} M={max_modes} x0={position:g}",
        geometry={
            "family": "cavity",
            "length": float(length),
            "mass": float(mass),
            "position": float(position),
        },
    )


def minkowski_density_of_states(omega, mass=0.0):
    """Modes per unit frequency and volume: g = omega sqrt(omega^2-m^2)/(2 pi^2).

    This is the d^3k/(2 pi)^3 measure written in the frequency variable;
    the pointlike mode density is folded into the line weights so that
    sum(weight * h(omega)) approximates integral(g(omega) h(omega) d omega).
    """
    om = np.asarray(omega, dtype=float)
    k2 = np.maximum(om * om - mass * mass, 0.0)
    return om * np.sqrt(k2) / (2.0 * math.pi**2)


def _gauss_legendre_panels(lo, hi, n_points, n_panels):
    """Composite Gauss-Legendre nodes/weights with n_points total nodes."""
    per = max(1, int(round(n_points / n_panels)))
    x, w = np.polynomial.legendre.leggauss(per)
    edges = np.linspace(lo, hi, n_panels + 1)
    nodes, weights = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        nodes.append(0.5 * (b - a) * x + 0.5 * (a + b))
        weights.append(0.5 * (b - a) * w)
    return np.concatenate(nodes), np.concatenate(weights)


def _midpoint_panels(lo, hi, n_points):
    h = (hi - lo) / n_points
    nodes = lo + h * (np.arange(n_points) + 0.5)
    return nodes, np.full(n_points, h)


def minkowski_continuum_spectrum(mass, omega_max, n_points, rule="gauss-legendre",
                                 n_panels=None):
    """Quadrature discretization of the Minkowski band [mass, omega_max].

    ``rule`` is "gauss-legendre" (composite panels, default) or "midpoint".
    """
    if mass < 0:
        raise ParameterError(f"mass must be nonnegative, got {mass}")
    if not omega_max > mass:
        raise EmptyBandError(
            f"omega_max={omega_max} must exceed the mass threshold {mass}")
    if not n_points >= 2:
        raise ParameterError(f"n_points must be >= 2, got {n_points}")
    if rule == "gauss-legendre":
        if n_panels is None:
            n_panels = max(1, int(n_points) // 16)
        nodes, qw = _gauss_legendre_panels(mass, omega_max, int(n_points), n_panels)
    elif rule == "midpoint":
        nodes, qw = _midpoint_panels(mass, omega_max, int(n_points))
    else:
        raise ParameterError(f"unknown quadrature rule {rule!r}")
    dens = minkowski_density_of_states(nodes, mass)
    lines = [ModeLine(weight=float(w * g), omega=float(om), f2=1.0)
             for w, g, om in zip(qw, dens, nodes) if w * g > 0]
    return ModeSpectrum(
        lines=tuple(lines),
        kind=KIND_CONTINUUM,
        provenance=(f"minkowski m={mass:g} omega_max={omega_max:g} "
                    f"n={n_points} rule={rule}"),
    )


def esu_spectrum(radius, mass, max_n):
    """Einstein static universe of radius a, minimally coupled massive field.

    Level n has omega_n = sqrt(n(n+2)/a^2 + m^2) and degeneracy (n+1)^2.
    By homogeneity the summed mode density of a level is position
    independent, f2 = (n+1)^2 / (2 pi^2 a^3); the degeneracy is folded into
    f2 so one line stands for the whole level.
    """
    if not radius > 0:
        raise ParameterError(f"radius must be positive, got {radius}")
    if mass < 0:
        raise ParameterError(f"mass must be nonnegative, got {mass}")
    if not max_n >= 1:
        raise ParameterError(f"max_n must be >= 1, got {max_n}")
    lines = []
    vol = 2.0 * math.pi**2 * radius**3
    for n in range(1, int(max_n) + 1):
        omega = math.sqrt(n * (n + 2) / radius**2 + mass * mass)
        f2 = (n + 1) ** 2 / vol
        lines.append(ModeLine(weight=1.0, omega=omega, f2=f2))
    return ModeSpectrum(
        lines=tuple(lines),
        kind=KIND_DISCRETE,
        provenance=f"esu a={radius:g} m={mass:g} max_n={max_n}",
    )


def lapse_rescale(spec, lapse):
    """Redshift of the static observer: every omega becomes omega / lapse.

    Weights and mode densities are untouched.  Composes multiplicatively:
    rescaling by a then b equals rescaling by a*b exactly.
    """
    if not lapse > 0:
        raise ParameterError(f"lapse must be positive, got {lapse}")
    lines = tuple(replace(l, omega=l.omega / lapse) for l in spec.lines)
    return ModeSpectrum(
        lines=lines,
        kind=spec.kind,
        provenance=f"{spec.provenance} | lapse N0={lapse:g}",
        geometry=None if spec.geometry is None else dict(spec.geometry, lapse=lapse),
    )


@dataclass(frozen=True)
class SmearingProfile:
    """Spatial profile of the detector inside a cavity.

    family "delta" is the pointlike limit at ``center``; family "gaussian"
    is a normal profile of width ``sigma`` truncated to the cavity and
    renormalized there (the truncated tail mass must be negligible).
    """

    family: str
    center: float
    sigma: float = 0.0

    def __post_init__(self):
        if self.family not in ("delta", "gaussian"):
            raise ParameterError(f"unknown smearing family {self.family!r}")
        if self.family == "gaussian" and not self.sigma > 0:
            raise ParameterError("gaussian smearing needs sigma > 0")


def delta_smearing(center):
    return SmearingProfile(family="delta", center=center)


def gaussian_smearing(center, sigma):
    return SmearingProfile(family="gaussian", center=center, sigma=sigma)


# mass of a gaussian profile allowed to spill past the cavity walls
_SMEAR_TAIL_TOL = 1e-6


def smear_overlap(spec, smearing, n_quad=2048):
    """Effective spectrum of a spatially smeared detector in a cavity.

    Replaces each line's f2 by the squared overlap
    ``|integral psi(x) F_n(x) dx|^2`` with the cavity mode functions.  The
    delta profile reproduces the pointlike spectrum at its center exactly.
    """
    geo = spec.geometry
    if geo is None or geo.get("family") != "cavity":
        raise DomainError("smear_overlap needs a spectrum of the cavity family "
                          "with intact geometry metadata")
    if "lapse" in geo:
        raise DomainError("apply smear_overlap before lapse_rescale: the smeared "
                          "overlap is defined in the cavity frame")
    length = geo["length"]
    if not 0 <= smearing.center <= length:
        raise DomainError(
            f"smearing center {smearing.center} outside the cavity [0, {length}]")

    norm = math.sqrt(2.0 / length)
    if smearing.family == "delta":
        overlap = lambda n: norm * math.sin(n * math.pi * smearing.center / length)
        inside = 1.0
    else:
        c, s = smearing.center, smearing.sigma
        # tail mass outside the walls must be negligible for the truncated
        # profile to represent a detector inside the cavity
        outside = (math.erfc((length - c) / (s * math.sqrt(2.0)))
                   + math.erfc(c / (s * math.sqrt(2.0)))) / 2.0
        if outside > _SMEAR_TAIL_TOL:
            raise DomainError(
                f"gaussian smearing leaks {outside:.2e} of its mass outside the "
                f"cavity walls (tolerance {_SMEAR_TAIL_TOL:.0e})")
        x, w = _gauss_legendre_panels(0.0, length, n_quad, max(8, n_quad // 32))
        psi = np.exp(-0.5 * ((x - c) / s) ** 2) / (s * math.sqrt(2.0 * math.pi))
        inside = float(np.sum(w * psi))
        psi = psi / inside
        overlap = lambda n: float(np.sum(w * psi * norm * np.sin(n * math.pi * x / length)))

    lines = []
    for i, line in enumerate(spec.lines, start=1):
        ov = overlap(i)
        lines.append(replace(line, f2=ov * ov))
    return ModeSpectrum(
        lines=tuple(lines),
        kind=spec.kind,
        provenance=(f"{spec.provenance} | smeared "
                    f"{smearing.family}(center={smearing.center:g}"
                    + (f", sigma={smearing.sigma:g}" if smearing.family == "gaussian" else "")
                    + ")"),
        geometry=None,
    )


# ---------------------------------------------------------------------------
# text format: '#' comments, a "kind: discrete|continuum" header, then
# data lines "weight omega f2"
# ---------------------------------------------------------------------------

_KIND_TO_FILE = {KIND_DISCRETE: "discrete", KIND_CONTINUUM: "continuum"}
_FILE_TO_KIND = {v: k for k, v in _KIND_TO_FILE.items()}


def save_spectrum(spec, path):
    """Write a spectrum as UTF-8 text; provenance goes into '#' comments."""
    with open(path, "w", encoding="utf-8") as fh:
        if spec.provenance:
            fh.write(f"# {spec.provenance}\n")
        fh.write(f"kind: {_KIND_TO_FILE[spec.kind]}\n")
        for line in spec.lines:
            fh.write(f"{line.weight:.17g} {line.omega:.17g} {line.f2:.17g}\n")


def load_spectrum(path):
    """Read a spectrum file written by :func:`save_spectrum` (or by hand)."""
    kind = None
    lines = []
    provenance = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            text = raw.strip()
            if not text:
                continue
            if text.startswith("#"):
                provenance.append(text.lstrip("# "))
                continue
            if text.startswith("kind:"):
                tag = text.split(":", 1)[1].strip()
                if tag not in _FILE_TO_KIND:
                    raise SpectrumParseError(f"unknown kind {tag!r}", lineno)
                if kind is not None:
                    raise SpectrumParseError("duplicate kind header", lineno)
                kind = _FILE_TO_KIND[tag]
                continue
            if kind is None:
                raise SpectrumParseError("data before the 'kind:' header", lineno)
            parts = text.split()
            if len(parts) != 3:
                raise SpectrumParseError(
                    f"expected 'weight omega f2', got {len(parts)} fields", lineno)
            try:
                w, om, f2 = (float(p) for p in parts)
            except ValueError as exc:
                raise SpectrumParseError(str(exc), lineno) from None
            try:
                lines.append(ModeLine(weight=w, omega=om, f2=f2))
            except ParameterError as exc:
                raise SpectrumParseError(str(exc), lineno) from None
    if kind is None:
        raise SpectrumParseError("missing 'kind:' header")
    if not lines:
        raise SpectrumParseError("no data lines")
    return ModeSpectrum(lines=tuple(lines), kind=kind,
                        provenance="; ".join(provenance))
