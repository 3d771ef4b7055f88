"""Work distributions, moments, inversion, and fluctuation identities."""

import math
from dataclasses import replace

import numpy as np
import pytest

from qwork import (AtomicDistribution, RunParams, atoms_from_spectrum,
                   atoms_single_mode, charfunc_pointlike, charfunc_samples,
                   convolve_atoms, crooks_residual, fdr_ratio,
                   forward_transform, gaussian_switching, invert_fft,
                   jarzynski_average, mean_work, second_moment,
                   single_mode_spectrum, variance)
from qwork.errors import ParameterError, TruncationError, WindowError
from qwork.workdist import suggest_m_max

from conftest import (B_REF, CONV0_REF, M2_REF, MEAN_REF, P0_REF, P1_REF,
                      PM1_REF, VAR_REF)


def _delta_distribution(beta=1.0):
    return AtomicDistribution(w=np.zeros(1), p=np.ones(1), beta=beta)


class TestAtoms:
    def test_reference_weights(self, ref_params):
        dist = atoms_single_mode(ref_params, 8)
        mid = dist.w.size // 2
        assert dist.w[mid] == 0.0
        assert dist.p[mid] == pytest.approx(P0_REF, rel=1e-12)
        assert dist.p[mid + 1] == pytest.approx(P1_REF, rel=1e-12)
        assert dist.p[mid - 1] == pytest.approx(PM1_REF, rel=1e-12)
        assert np.all(dist.p >= 0.0)

    def test_total_is_charfunc_at_zero(self, ref_params):
        dist = atoms_single_mode(ref_params, 10)
        assert dist.total() == pytest.approx(
            float(charfunc_pointlike(ref_params, 0.0).real), abs=1e-12)

    def test_lambda_zero_single_atom(self):
        params = RunParams(beta=1.0, lam=0.0, spec=single_mode_spectrum(1.0),
                           switching=gaussian_switching(1.0))
        dist = atoms_single_mode(params, 3)
        assert dist.w.tolist() == [0.0]
        assert dist.p.tolist() == [1.0]

    def test_tail_bound_enforced(self):
        # strong coupling spreads the lattice; m_max = 1 cannot hold it
        params = RunParams(beta=1.0, lam=1.0, spec=single_mode_spectrum(1.0),
                           switching=gaussian_switching(1.0))
        with pytest.raises(TruncationError) as err:
            atoms_single_mode(params, 1)
        assert err.value.suggested >= 2
        dist = atoms_single_mode(params, err.value.suggested)
        assert 1.0 - dist.total() <= 1e-12

    def test_rejects_multimode(self, cavity20_params):
        with pytest.raises(ParameterError):
            atoms_single_mode(cavity20_params, 8)

    def test_suggest_m_max_monotone(self):
        assert suggest_m_max(0.02, 0.5) <= suggest_m_max(0.5, 0.5)


class TestConvolution:
    def test_identity_with_delta(self, ref_params):
        dist = atoms_single_mode(ref_params, 8)
        conv = convolve_atoms(dist, _delta_distribution(), weight_floor=0.0)
        assert np.allclose(conv.w, dist.w, atol=1e-12)
        assert np.allclose(conv.p, dist.p, rtol=1e-12)

    def test_two_copy_reference_weight(self, ref_params):
        dist = atoms_single_mode(ref_params, 8)
        conv = convolve_atoms(dist, dist)
        at_zero = conv.p[np.argmin(np.abs(conv.w))]
        assert at_zero == pytest.approx(CONV0_REF, rel=1e-10)

    def test_mass_preserved_before_pruning(self, ref_params):
        dist = atoms_single_mode(ref_params, 8)
        conv = convolve_atoms(dist, dist, weight_floor=0.0)
        assert conv.total() == pytest.approx(1.0, abs=1e-12)
        assert conv.pruned_mass == 0.0

    def test_pruning_reported(self, ref_params):
        dist = atoms_single_mode(ref_params, 8)
        conv = convolve_atoms(dist, dist, weight_floor=1e-10)
        assert conv.pruned_mass > 0.0
        assert conv.total() == pytest.approx(1.0, abs=1e-12)

    def test_incompatible_beta_rejected(self, ref_params):
        dist = atoms_single_mode(ref_params, 8)
        with pytest.raises(ParameterError):
            convolve_atoms(dist, _delta_distribution(beta=2.0))

    def test_multimode_builder(self, cavity20_params):
        dist = atoms_from_spectrum(cavity20_params)
        assert dist.total() == pytest.approx(1.0, abs=1e-10)
        assert np.all(dist.p >= 0.0)
        assert dist.pruned_mass < 1e-10


class TestMoments:
    def test_reference_values(self, ref_params):
        assert mean_work(ref_params) == pytest.approx(MEAN_REF, rel=1e-12)
        assert second_moment(ref_params) == pytest.approx(M2_REF, rel=1e-12)
        assert variance(ref_params) == pytest.approx(VAR_REF, rel=1e-12)

    def test_against_spec_rounding(self, ref_params):
        # coarse published approximations of the same quantities
        assert abs(mean_work(ref_params) - 0.011558) <= 1e-6
        assert abs(second_moment(ref_params) - 0.025010) <= 1e-6

    def test_lambda_zero(self):
        params = RunParams(beta=1.0, lam=0.0, spec=single_mode_spectrum(1.0),
                           switching=gaussian_switching(1.0))
        assert mean_work(params) == 0.0
        assert second_moment(params) == 0.0
        assert variance(params) == 0.0

    def test_lambda_square_scaling(self, ref_params):
        doubled = replace(ref_params, lam=0.2)
        assert mean_work(doubled) == pytest.approx(4 * mean_work(ref_params),
                                                   rel=1e-12)
        assert second_moment(doubled) == pytest.approx(
            4 * second_moment(ref_params), rel=1e-12)

    def test_zero_temperature_limit(self):
        # coth -> 1, so the second moment reduces to mean * omega
        params = RunParams(beta=200.0, lam=0.1, spec=single_mode_spectrum(1.0),
                           switching=gaussian_switching(1.0))
        assert second_moment(params) == pytest.approx(mean_work(params) * 1.0,
                                                      rel=1e-12)

    def test_mean_nonnegative_random(self):
        rng = np.random.default_rng(11)
        for _ in range(10):
            spec = single_mode_spectrum(float(rng.uniform(0.2, 5.0)),
                                        f2=float(rng.uniform(0.0, 2.0)))
            params = RunParams(beta=float(rng.uniform(0.1, 5.0)),
                               lam=float(rng.uniform(0.0, 1.0)),
                               spec=spec, switching=gaussian_switching(1.0))
            assert mean_work(params) >= 0.0

    def test_finite_difference_oracle(self, ref_params, cavity20_params):
        # Richardson central differences of P at 0: the first derivative
        # gives the mean, the second gives mean^2 + second cumulant
        for params in (ref_params, cavity20_params):
            p = lambda mu: charfunc_pointlike(params, mu)
            h = 0.01

            def d1(hh):
                return complex(p(hh) - p(-hh)) / (2 * hh)

            def d2(hh):
                return complex(p(hh) - 2 * p(0.0) + p(-hh)) / (hh * hh)

            mean_fd = ((4 * d1(h / 2) - d1(h)) / 3).imag
            raw2_fd = -((4 * d2(h / 2) - d2(h)) / 3).real
            kappa2_fd = raw2_fd - mean_fd**2
            assert mean_fd == pytest.approx(mean_work(params), rel=1e-7)
            assert kappa2_fd == pytest.approx(second_moment(params), rel=1e-7)

    def test_atom_sum_oracle(self, ref_params):
        dist = atoms_single_mode(ref_params, 10)
        mean_atoms = float(np.sum(dist.w * dist.p))
        raw2_atoms = float(np.sum(dist.w**2 * dist.p))
        assert mean_atoms == pytest.approx(mean_work(ref_params), rel=1e-10)
        assert raw2_atoms - mean_atoms**2 == pytest.approx(
            second_moment(ref_params), rel=1e-10)
        # the raw second moment exceeds the quadratic-order closed form by
        # exactly the squared mean
        assert raw2_atoms == pytest.approx(
            second_moment(ref_params) + mean_work(ref_params) ** 2, rel=1e-10)


class TestFluctuationIdentities:
    def test_crooks_exact_single_mode(self, ref_params):
        dist = atoms_single_mode(ref_params, 8)
        assert crooks_residual(dist) <= 1e-10
        mid = dist.w.size // 2
        assert math.log(dist.p[mid + 1] / dist.p[mid - 1]) == pytest.approx(
            ref_params.beta * 1.0, rel=1e-12)

    def test_crooks_high_temperature_symmetry(self):
        beta = 1e-4
        params = RunParams(beta=beta, lam=0.1, spec=single_mode_spectrum(1.0),
                           switching=gaussian_switching(1.0))
        dist = atoms_single_mode(params, suggest_m_max(
            mean_work(params) / math.sinh(beta / 2), beta / 2))
        mid = dist.w.size // 2
        ratio = dist.p[mid + 1] / dist.p[mid - 1]
        assert abs(ratio - 1.0) <= 2 * beta

    def test_crooks_preserved_by_convolution(self, ref_params):
        d1 = atoms_single_mode(ref_params, 8)
        spec2 = single_mode_spectrum(2.0, f2=0.7)
        d2 = atoms_single_mode(replace(ref_params, spec=spec2), 6)
        conv = convolve_atoms(d1, d2)
        assert crooks_residual(conv) <= 1e-8

    def test_crooks_detects_tampered_beta(self, ref_params):
        dist = atoms_single_mode(ref_params, 8)
        tampered = replace(dist, beta=2.0)
        assert crooks_residual(tampered) > 0.1

    def test_missing_mirror_is_infinite(self):
        dist = AtomicDistribution(w=np.array([0.0, 1.0]),
                                  p=np.array([0.7, 0.3]), beta=1.0)
        assert crooks_residual(dist) == math.inf

    def test_jarzynski_exact(self, ref_params):
        dist = atoms_single_mode(ref_params, 10)
        assert abs(jarzynski_average(dist) - 1.0) <= 1e-12
        assert abs(jarzynski_average(dist)
                   - charfunc_pointlike(ref_params, 1j).real) <= 1e-10

    def test_jarzynski_lambda_zero(self):
        assert jarzynski_average(_delta_distribution()) == 1.0

    def test_crooks_implies_jarzynski_bound(self, ref_params):
        # |sum p e^{-beta W} - 1| <= residual * sum p e^{-beta W} for any
        # atom set with mirrors; exercised on a deliberately skewed set
        dist = atoms_single_mode(ref_params, 8)
        skew = dist.p.copy()
        mid = dist.w.size // 2
        skew[mid + 1] *= 1.01
        skew = skew / skew.sum()
        skewed = AtomicDistribution(w=dist.w, p=skew, beta=dist.beta)
        residual = crooks_residual(skewed)
        avg = jarzynski_average(skewed)
        assert abs(avg - 1.0) <= residual * avg + 1e-12

    def test_fdr_limits(self):
        sw = gaussian_switching(1.0)
        hot = RunParams(beta=0.01, lam=0.01, spec=single_mode_spectrum(1.0),
                        switching=sw)
        assert fdr_ratio(hot) == pytest.approx(1.0, abs=1e-3)
        cold = RunParams(beta=10.0, lam=1e-4, spec=single_mode_spectrum(1.0),
                         switching=sw)
        assert fdr_ratio(cold) == pytest.approx(0.2, rel=0.02)

    def test_fdr_single_mode_identity(self):
        sw = gaussian_switching(1.0)
        for beta in np.geomspace(0.01, 10.0, 12):
            params = RunParams(beta=float(beta), lam=1e-4,
                               spec=single_mode_spectrum(1.0), switching=sw)
            x = beta / 2
            assert fdr_ratio(params) == pytest.approx(
                math.tanh(x) / x, abs=1e-6, rel=1e-6)

    def test_variance_monotone_in_temperature(self, esu10_params):
        inv_betas = np.linspace(0.2, 5.0, 20)
        vals = [variance(replace(esu10_params, beta=1.0 / ib))
                for ib in inv_betas]
        assert np.all(np.diff(vals) > 0.0)


class TestInversion:
    def test_lambda_zero_pure_atom(self):
        from qwork import minkowski_continuum_spectrum
        spec = minkowski_continuum_spectrum(0.0, 8.0, 512)
        params = RunParams(beta=1.0, lam=0.0, spec=spec,
                           switching=gaussian_switching(1.0))
        samples = charfunc_samples(params, -50.0, 50.0, 2048)
        dens = invert_fft(samples)
        assert dens.atom_at_zero == pytest.approx(1.0, abs=1e-12)
        assert np.max(np.abs(dens.density)) <= 1e-12

    def test_continuum_mass_and_roundtrip(self, minkowski_params):
        samples = charfunc_samples(minkowski_params, -50.0, 50.0, 4096)
        dens = invert_fft(samples)
        assert dens.total() == pytest.approx(1.0, abs=1e-6)
        assert dens.imag_residue <= 1e-10
        inner = np.abs(samples.mu_grid) <= 25.0
        rec = forward_transform(dens, samples.mu_grid[inner])
        assert np.max(np.abs(rec - samples.values[inner])) <= 1e-5

    def test_apodized_peaks_match_atoms(self, ref_params):
        samples = charfunc_samples(ref_params, -50.0, 50.0, 4096)
        dens = invert_fft(samples, apodization=0.1, atom_split=False)
        dist = atoms_single_mode(ref_params, 8)
        dw = dens.dw
        for m in (-2, -1, 0, 1, 2):
            mask = np.abs(dens.w_grid - m * 1.0) <= 0.5
            mass = float(np.sum(dens.density[mask])) * dw
            atom = dist.p[np.argmin(np.abs(dist.w - m))]
            assert abs(mass - atom) <= 1e-4

    def test_unapodized_comb_trips_alias_guard(self, ref_params):
        samples = charfunc_samples(ref_params, -50.0, 50.0, 4096)
        with pytest.raises(WindowError):
            invert_fft(samples, atom_split=False)

    def test_grid_validation(self, minkowski_params):
        from qwork.charfunc import CharFunctionSamples
        bad = CharFunctionSamples(mu_grid=np.array([0.0, 1.0, 3.0]),
                                  values=np.ones(3, dtype=complex),
                                  params=minkowski_params)
        with pytest.raises(ParameterError):
            invert_fft(bad)
