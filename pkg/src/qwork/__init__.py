"""Work statistics of thermal scalar fields interacting with a localized
detector in static spacetimes: closed-form characteristic functions,
exact lattice work distributions, fluctuation-identity diagnostics, and a
truncated-Fock-space brute-force oracle."""

from .charfunc import (CharFunctionSamples, RunParams, charfunc_pointlike,
                       charfunc_quadrature, charfunc_samples, delta_fg,
                       delta_fg_modesum, magnus_phase)
from .fockoracle import (FockOracle, FockOracleConfig, TrotterReport,
                         fock_charfunc, ramsey_protocol, trotter_unitary)
from .spectra import (ModeLine, ModeSpectrum, cavity_spectrum, delta_smearing,
                      esu_spectrum, gaussian_smearing, lapse_rescale,
                      load_spectrum, minkowski_continuum_spectrum,
                      save_spectrum, single_mode_spectrum, smear_overlap)
from .switching import (SwitchingProfile, bump_switching, from_declaration,
                        gaussian_switching, rectangular_switching)
from .wightman import StripPoint, kms_residual, thermal_wightman
from .workdist import (AtomicDistribution, SampledDensity, atoms_from_spectrum,
                       atoms_single_mode, convolve_atoms, crooks_residual,
                       fdr_ratio, forward_transform, invert_fft,
                       jarzynski_average, mean_work, second_moment, variance)

__version__ = "0.1.0"
