"""Run configuration files: flat key = value text with section headers.

Example::

    # reference single-mode run
    [spectrum]
    kind = single-mode
    omega = 1.0
    weight = 1.0
    f2 = 1.0

    [switching]
    switching = gaussian T=1.0

    [run]
    beta = 1.0
    lambda = 0.1
    mu-min = -50.0
    mu-max = 50.0
    mu-n = 4096

Spectrum kinds: ``single-mode``, ``cavity`` (length, mass, max-modes,
position), ``minkowski`` (mass, omega-max, n-points[, rule]), ``esu``
(radius, mass, max-n) and ``file`` (path, relative to the config file).
An optional ``lapse`` key rescales any of them.  Unknown keys are
rejected: configs are contracts, typos must not pass silently.
"""

from __future__ import annotations

import configparser
import os
from dataclasses import dataclass, field

from . import spectra, switching as _switching
from .charfunc import RunParams
from .errors import ConfigError, ParameterError, SpectrumParseError

_SECTION_KEYS = {
    "spectrum": {"kind", "omega", "weight", "f2", "length", "mass", "max-modes",
                 "position", "omega-max", "n-points", "rule", "radius", "max-n",
                 "path", "lapse"},
    "switching": {"switching"},
    "run": {"beta", "lambda", "mu-min", "mu-max", "mu-n"},
    "workdist": {"m-max", "weight-floor", "apodization"},
    "oracle": {"enabled", "cutoff", "mu-n", "mu-max"},
    "verify": {"check-beta", "tau-grid-max", "tau-grid-n", "epsilon"},
    "output": {"directory", "jobs"},
}


@dataclass
class RunConfig:
    """Everything a subcommand needs, already validated and built."""

    params: RunParams
    mu_min: float = -50.0
    mu_max: float = 50.0
    mu_n: int = 4096
    m_max: int | None = None
    weight_floor: float = 1e-14
    apodization: float | None = None
    oracle_enabled: bool = False
    oracle_cutoff: int = 40
    oracle_mu_max: float = 10.0
    oracle_mu_n: int = 64
    check_beta: float | None = None
    tau_grid_max: float = 5.0
    tau_grid_n: int = 64
    epsilon: float | None = None
    outdir: str = "."
    jobs: int = 1
    source_path: str | None = field(default=None, compare=False)


class _Section:
    def __init__(self, parser, name, path):
        self.name = name
        self.path = path
        self.data = dict(parser[name]) if parser.has_section(name) else {}
        allowed = _SECTION_KEYS[name]
        for key in self.data:
            if key not in allowed:
                raise ConfigError(
                    f"{path}: unknown key {key!r} in section [{name}]")

    def get(self, key, default=None):
        return self.data.get(key, default)

    def get_float(self, key, default=None, required=False):
        raw = self.data.get(key)
        if raw is None or raw == "":
            if required:
                raise ConfigError(
                    f"{self.path}: missing required key {key!r} in [{self.name}]")
            return default
        try:
            return float(raw)
        except ValueError:
            raise ConfigError(
                f"{self.path}: key {key!r} in [{self.name}] is not a number: "
                f"{raw!r}") from None

    def get_int(self, key, default=None, required=False):
        val = self.get_float(key, default=default, required=required)
        if val is None:
            return None
        if val != int(val):
            raise ConfigError(
                f"{self.path}: key {key!r} in [{self.name}] must be an integer")
        return int(val)

    def get_bool(self, key, default=False):
        raw = self.data.get(key)
        if raw is None or raw == "":
            return default
        low = raw.strip().lower()
        if low in ("true", "yes", "1", "on"):
            return True
        if low in ("false", "no", "0", "off"):
            return False
        raise ConfigError(
            f"{self.path}: key {key!r} in [{self.name}] is not a boolean: {raw!r}")


def _build_spectrum(sec, config_dir):
    kind = sec.get("kind")
    if kind is None:
        raise ConfigError(f"{sec.path}: [spectrum] needs a 'kind'")
    try:
        if kind == "single-mode":
            spec = spectra.single_mode_spectrum(
                omega=sec.get_float("omega", required=True),
                weight=sec.get_float("weight", 1.0),
                f2=sec.get_float("f2", 1.0))
        elif kind == "cavity":
            spec = spectra.cavity_spectrum(
                length=sec.get_float("length", required=True),
                mass=sec.get_float("mass", 0.0),
                max_modes=sec.get_int("max-modes", required=True),
                position=sec.get_float("position", required=True))
        elif kind == "minkowski":
            spec = spectra.minkowski_continuum_spectrum(
                mass=sec.get_float("mass", 0.0),
                omega_max=sec.get_float("omega-max", required=True),
                n_points=sec.get_int("n-points", required=True),
                rule=sec.get("rule", "gauss-legendre"))
        elif kind == "esu":
            spec = spectra.esu_spectrum(
                radius=sec.get_float("radius", required=True),
                mass=sec.get_float("mass", 0.0),
                max_n=sec.get_int("max-n", required=True))
        elif kind == "file":
            path = sec.get("path")
            if not path:
                raise ConfigError(f"{sec.path}: spectrum kind 'file' needs a path")
            full = path if os.path.isabs(path) else os.path.join(config_dir, path)
            if not os.path.exists(full):
                raise ConfigError(f"{sec.path}: spectrum file not found: {full}")
            spec = spectra.load_spectrum(full)
        else:
            raise ConfigError(f"{sec.path}: unknown spectrum kind {kind!r}")
    except (ParameterError, SpectrumParseError) as exc:
        raise ConfigError(f"{sec.path}: bad spectrum: {exc}") from exc
    lapse = sec.get_float("lapse")
    if lapse is not None:
        spec = spectra.lapse_rescale(spec, lapse)
    return spec


def load_config(path):
    """Parse and validate a run configuration file."""
    if not os.path.exists(path):
        raise ConfigError(f"config file not found: {path}")
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
    parser.optionxform = str
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    for name in parser.sections():
        if name not in _SECTION_KEYS:
            raise ConfigError(f"{path}: unknown section [{name}]")
    for required in ("spectrum", "switching", "run"):
        if not parser.has_section(required):
            raise ConfigError(f"{path}: missing required section [{required}]")

    config_dir = os.path.dirname(os.path.abspath(path))
    sec = {name: _Section(parser, name, path) for name in _SECTION_KEYS}

    spec = _build_spectrum(sec["spectrum"], config_dir)
    decl = sec["switching"].get("switching")
    if not decl:
        raise ConfigError(f"{path}: [switching] needs a 'switching' declaration")
    try:
        profile = _switching.from_declaration(decl)
    except ParameterError as exc:
        raise ConfigError(f"{path}: bad switching declaration: {exc}") from exc

    beta = sec["run"].get_float("beta", required=True)
    lam = sec["run"].get_float("lambda", required=True)
    try:
        params = RunParams(beta=beta, lam=lam, spec=spec, switching=profile)
    except ParameterError as exc:
        raise ConfigError(f"{path}: bad run parameters: {exc}") from exc

    mu_min = sec["run"].get_float("mu-min", -50.0)
    mu_max = sec["run"].get_float("mu-max", 50.0)
    mu_n = sec["run"].get_int("mu-n", 4096)
    if not (mu_max > mu_min and mu_n >= 2):
        raise ConfigError(f"{path}: bad mu grid")

    jobs = sec["output"].get_int("jobs", 1)
    if jobs < 1:
        raise ConfigError(f"{path}: jobs must be >= 1")

    return RunConfig(
        params=params,
        mu_min=mu_min, mu_max=mu_max, mu_n=mu_n,
        m_max=sec["workdist"].get_int("m-max"),
        weight_floor=sec["workdist"].get_float("weight-floor", 1e-14),
        apodization=sec["workdist"].get_float("apodization"),
        oracle_enabled=sec["oracle"].get_bool("enabled", False),
        oracle_cutoff=sec["oracle"].get_int("cutoff", 40),
        oracle_mu_max=sec["oracle"].get_float("mu-max", 10.0),
        oracle_mu_n=sec["oracle"].get_int("mu-n", 64),
        check_beta=sec["verify"].get_float("check-beta"),
        tau_grid_max=sec["verify"].get_float("tau-grid-max", 5.0),
        tau_grid_n=sec["verify"].get_int("tau-grid-n", 64),
        epsilon=sec["verify"].get_float("epsilon"),
        outdir=sec["output"].get("directory", "."),
        jobs=jobs,
        source_path=os.path.abspath(path),
    )
