"""Generate reference inputs through the engine's command line interface.

The plots package consumes only the delimited files the engine writes, so
the fixtures shell out to the installed ``qwork`` CLI rather than import
it.
"""

import subprocess
import sys

import pytest

REF_CONFIG = """\
[spectrum]
kind = single-mode
omega = 1.0
weight = 1.0
f2 = 1.0

[switching]
switching = gaussian T=1.0

[run]
beta = 1.0
lambda = {lam}

[output]
directory = {out}
"""

CONTINUUM_CONFIG = """\
[spectrum]
kind = minkowski
omega-max = 8.0
n-points = 1024

[switching]
switching = gaussian T=1.0

[run]
beta = 1.0
lambda = 0.1

[output]
directory = {out}
"""


def run_qwork(*args):
    proc = subprocess.run([sys.executable, "-m", "qwork.cli", *args],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    return proc.stdout


@pytest.fixture(scope="session")
def reference_outputs(tmp_path_factory):
    """atoms.csv, density.csv and sweep.csv of the reference run."""
    base = tmp_path_factory.mktemp("refrun")
    out = base / "out"
    cfg = base / "run.cfg"
    cfg.write_text(REF_CONFIG.format(lam=0.1, out=out))
    run_qwork("workdist", "--config", str(cfg))
    betas = ",".join(f"{b:.3f}" for b in
                     [0.2, 0.5, 1.0, 1.5, 2.0, 3.0, 4.0, 5.0])
    run_qwork("sweep", "--config", str(cfg), "--axis", "beta",
              "--values", betas)

    cfg0 = base / "run0.cfg"
    out0 = base / "out0"
    cfg0.write_text(REF_CONFIG.format(lam=0.0, out=out0))
    run_qwork("workdist", "--config", str(cfg0))

    cfgc = base / "runc.cfg"
    outc = base / "outc"
    cfgc.write_text(CONTINUUM_CONFIG.format(out=outc))
    run_qwork("workdist", "--config", str(cfgc))

    return {
        "atoms": out / "atoms.csv",
        "sweep": out / "sweep.csv",
        "atoms_lambda0": out0 / "atoms.csv",
        "density": outc / "density.csv",
    }
