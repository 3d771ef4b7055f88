"""Geometry catalogue: mode frequencies, densities, quadrature, file I/O."""

import math

import numpy as np
import pytest
from scipy import integrate

from qwork import (ModeLine, ModeSpectrum, cavity_spectrum, delta_smearing,
                   esu_spectrum, gaussian_smearing, lapse_rescale,
                   load_spectrum, minkowski_continuum_spectrum, save_spectrum,
                   smear_overlap)
from qwork.errors import (DomainError, EmptyBandError, ParameterError,
                          SpectrumParseError)
from qwork.spectra import KIND_CONTINUUM, minkowski_density_of_states


class TestCavity:
    def test_reference_modes(self):
        spec = cavity_spectrum(length=math.pi, mass=0.0, max_modes=3,
                               position=math.pi / 2)
        w, om, f2 = spec.arrays()
        assert np.allclose(om, [1.0, 2.0, 3.0], rtol=1e-15)
        assert np.allclose(f2, [2 / math.pi, 0.0, 2 / math.pi], atol=1e-15)
        assert np.all(w == 1.0)

    def test_mode_normalization_oracle(self):
        # the mode functions behind f2 must be orthonormal on the cavity
        length = 2.7
        for n in (1, 2, 5):
            val, _ = integrate.quad(
                lambda x: (2 / length) * math.sin(n * math.pi * x / length) ** 2,
                0, length)
            assert abs(val - 1.0) < 1e-12

    def test_pointlike_density_oracle(self):
        # f2 equals the squared orthonormal mode function at the detector
        length, x0 = 1.8, 0.33
        spec = cavity_spectrum(length, 0.0, 4, x0)
        for n, line in enumerate(spec.lines, start=1):
            fn = math.sqrt(2 / length) * math.sin(n * math.pi * x0 / length)
            assert line.f2 == pytest.approx(fn * fn, rel=1e-14)

    def test_node_at_wall(self):
        spec = cavity_spectrum(length=1.0, mass=0.0, max_modes=1, position=0.0)
        assert spec.lines[0].f2 == 0.0

    def test_massive_dispersion(self):
        spec = cavity_spectrum(length=math.pi, mass=1.0, max_modes=1,
                               position=math.pi / 2)
        assert spec.lines[0].omega == pytest.approx(math.sqrt(2.0), rel=1e-15)

    def test_parameter_errors(self):
        with pytest.raises(ParameterError):
            cavity_spectrum(length=-1.0, mass=0.0, max_modes=3, position=0.0)
        with pytest.raises(ParameterError):
            cavity_spectrum(length=1.0, mass=0.0, max_modes=0, position=0.5)
        with pytest.raises(ParameterError):
            cavity_spectrum(length=1.0, mass=0.0, max_modes=3, position=2.0)


class TestMinkowski:
    def test_density_reference_values(self):
        assert minkowski_density_of_states(1.0) == pytest.approx(
            1.0 / (2 * math.pi**2), rel=1e-14)
        assert minkowski_density_of_states(2.0) == pytest.approx(
            4.0 / (2 * math.pi**2), rel=1e-14)
        assert minkowski_density_of_states(1.0, mass=1.0) == 0.0

    def test_band_sum_against_kspace_oracle(self):
        # sum(weight h(omega)) must reproduce the radial k-space integral
        # int dk k^2/(2 pi^2) h(omega(k)), evaluated independently in k
        h = lambda o: np.exp(-o)

        def band_sum(mass, omega_max, n):
            spec = minkowski_continuum_spectrum(mass, omega_max, n_points=n)
            w, om, f2 = spec.arrays()
            return float(np.sum(w * f2 * h(om)))

        def k_oracle(mass, omega_max):
            k_max = math.sqrt(omega_max**2 - mass**2)
            val, _ = integrate.quad(
                lambda k: k * k / (2 * math.pi**2) * h(math.hypot(k, mass)),
                0, k_max, limit=200, epsabs=1e-14, epsrel=1e-13)
            return val

        assert band_sum(0.0, 6.0, 1024) == pytest.approx(k_oracle(0.0, 6.0),
                                                         rel=1e-12)
        # the massive band has a sqrt(omega - m) edge, so the quadrature
        # converges algebraically there
        assert band_sum(0.4, 6.0, 2048) == pytest.approx(k_oracle(0.4, 6.0),
                                                         rel=1e-5)

    def test_empty_band(self):
        with pytest.raises(EmptyBandError):
            minkowski_continuum_spectrum(mass=1.0, omega_max=1.0, n_points=16)

    def test_refinement_converges(self):
        def zero_point(n):
            spec = minkowski_continuum_spectrum(0.0, 10.0, n_points=n)
            w, om, f2 = spec.arrays()
            return float(np.sum(w * f2 / (2 * om) * np.exp(-om)))

        coarse, fine = zero_point(2048), zero_point(4096)
        assert abs(fine - coarse) <= 1e-6 * abs(fine)

    def test_midpoint_rule_available(self):
        spec = minkowski_continuum_spectrum(0.0, 4.0, 256, rule="midpoint")
        assert spec.kind == KIND_CONTINUUM
        assert len(spec) == 256


class TestEsu:
    def test_lowest_frequency(self):
        spec = esu_spectrum(radius=1.0, mass=0.0, max_n=1)
        assert spec.lines[0].omega == pytest.approx(math.sqrt(3.0), rel=1e-15)

    def test_degeneracy_enumeration_oracle(self):
        # level-n harmonic labels (l, m) with 0 <= l <= n, |m| <= l
        def count(n):
            return sum(2 * l + 1 for l in range(n + 1))

        assert count(2) == 9
        spec = esu_spectrum(radius=1.0, mass=0.0, max_n=6)
        vol = 2 * math.pi**2
        for n, line in enumerate(spec.lines, start=1):
            assert line.f2 * vol == pytest.approx(count(n), rel=1e-12)

    def test_level1_density_oracle(self):
        # the four level-1 harmonics are the cartesian coordinates of S^3,
        # normalized numerically; their squared sum at any point gives f2
        radial, _ = integrate.quad(
            lambda chi: math.cos(chi) ** 2 * math.sin(chi) ** 2, 0, math.pi)
        polar, _ = integrate.quad(math.sin, 0, math.pi)
        norm_sq = radial * polar * 2 * math.pi  # norm of x1 = cos(chi) on S^3
        # sum_i x_i^2 = 1 on the sphere, all four share the same norm
        density = 1.0 / norm_sq
        spec = esu_spectrum(radius=1.0, mass=0.0, max_n=1)
        assert spec.lines[0].f2 == pytest.approx(density, rel=1e-10)

    def test_massive_shift(self):
        spec = esu_spectrum(radius=2.0, mass=0.5, max_n=1)
        assert spec.lines[0].omega == pytest.approx(
            math.sqrt(3.0 / 4.0 + 0.25), rel=1e-15)


class TestLapse:
    def test_identity(self, ref_params):
        spec = ref_params.spec
        assert lapse_rescale(spec, 1.0).arrays()[1] == pytest.approx(
            spec.arrays()[1])

    def test_halves_frequency(self):
        spec = lapse_rescale(cavity_spectrum(math.pi, 0.0, 1, math.pi / 2), 2.0)
        assert spec.lines[0].omega == pytest.approx(0.5, rel=1e-15)

    def test_inverse_lapse_doubles(self):
        base = cavity_spectrum(math.pi, 0.0, 1, math.pi / 2)
        spec = lapse_rescale(base, 0.5)
        assert spec.lines[0].omega == pytest.approx(2.0, rel=1e-15)
        assert spec.lines[0].f2 == base.lines[0].f2

    def test_composition_exact(self):
        base = esu_spectrum(1.0, 0.0, 5)
        chained = lapse_rescale(lapse_rescale(base, 2.0), 4.0)
        direct = lapse_rescale(base, 8.0)
        assert all(a.omega == b.omega for a, b in zip(chained.lines, direct.lines))

    def test_rejects_nonpositive(self):
        with pytest.raises(ParameterError):
            lapse_rescale(esu_spectrum(1.0, 0.0, 1), 0.0)


class TestSmearing:
    def test_delta_matches_pointlike(self):
        x0 = 0.61
        base = cavity_spectrum(math.pi, 0.0, 8, x0)
        smeared = smear_overlap(base, delta_smearing(x0))
        _, _, f2a = base.arrays()
        _, _, f2b = smeared.arrays()
        assert np.allclose(f2b, f2a, rtol=1e-10, atol=1e-300)

    def test_even_profile_kills_odd_mode(self):
        base = cavity_spectrum(math.pi, 0.0, 2, math.pi / 2)
        smeared = smear_overlap(base, gaussian_smearing(math.pi / 2, 0.2))
        assert smeared.lines[1].f2 < 1e-20

    def test_gaussian_suppression_oracle(self):
        length, sigma = math.pi, 0.3
        base = cavity_spectrum(length, 0.0, 1, length / 2)
        smeared = smear_overlap(base, gaussian_smearing(length / 2, sigma))
        # high-resolution independent overlap integral; the profile is
        # normalized on the cavity, so divide by its inside mass
        psi = lambda x: (math.exp(-0.5 * ((x - length / 2) / sigma) ** 2)
                         / (sigma * math.sqrt(2 * math.pi)))
        inside, _ = integrate.quad(psi, 0, length, limit=400,
                                   epsabs=1e-14, epsrel=1e-13)
        val, _ = integrate.quad(
            lambda x: psi(x) * math.sqrt(2 / length)
            * math.sin(math.pi * x / length),
            0, length, limit=400, epsabs=1e-14, epsrel=1e-13)
        val /= inside
        assert smeared.lines[0].f2 == pytest.approx(val * val, rel=1e-8)
        assert smeared.lines[0].f2 < base.lines[0].f2

    def test_support_errors(self):
        base = cavity_spectrum(1.0, 0.0, 2, 0.5)
        with pytest.raises(DomainError):
            smear_overlap(base, delta_smearing(1.5))
        with pytest.raises(DomainError):
            smear_overlap(base, gaussian_smearing(0.5, 5.0))  # leaks past walls

    def test_requires_cavity_geometry(self):
        with pytest.raises(DomainError):
            smear_overlap(esu_spectrum(1.0, 0.0, 2), delta_smearing(0.5))

    def test_lapse_then_smear_rejected(self):
        spec = lapse_rescale(cavity_spectrum(1.0, 0.0, 2, 0.5), 2.0)
        with pytest.raises(DomainError):
            smear_overlap(spec, delta_smearing(0.5))


class TestSpectrumFile:
    def test_round_trip(self, tmp_path):
        spec = esu_spectrum(1.3, 0.2, 7)
        path = tmp_path / "esu.spec"
        save_spectrum(spec, path)
        loaded = load_spectrum(path)
        assert loaded.kind == spec.kind
        assert loaded.lines == spec.lines

    def test_regenerated_cavity_matches(self, tmp_path):
        spec = cavity_spectrum(math.pi, 0.0, 12, 1.1)
        path = tmp_path / "cavity.spec"
        save_spectrum(spec, path)
        assert load_spectrum(path).lines == spec.lines

    def test_invalid_line_cited(self, tmp_path):
        path = tmp_path / "bad.spec"
        path.write_text("kind: discrete\n1.0 2.0 0.5\n1.0 -2.0 0.5\n")
        with pytest.raises(SpectrumParseError, match="line 3"):
            load_spectrum(path)

    def test_malformed_field_count(self, tmp_path):
        path = tmp_path / "bad.spec"
        path.write_text("kind: discrete\n1.0 2.0\n")
        with pytest.raises(SpectrumParseError, match="line 2"):
            load_spectrum(path)

    def test_missing_header(self, tmp_path):
        path = tmp_path / "bad.spec"
        path.write_text("1.0 2.0 0.5\n")
        with pytest.raises(SpectrumParseError):
            load_spectrum(path)


class TestInvariants:
    def test_mode_line_validation(self):
        with pytest.raises(ParameterError):
            ModeLine(weight=0.0, omega=1.0, f2=1.0)
        with pytest.raises(ParameterError):
            ModeLine(weight=1.0, omega=-1.0, f2=1.0)
        with pytest.raises(ParameterError):
            ModeLine(weight=1.0, omega=1.0, f2=-0.5)
        with pytest.raises(ParameterError):
            ModeSpectrum(lines=())

    def test_random_catalogue_invariants(self):
        rng = np.random.default_rng(20240817)
        for _ in range(25):
            builder = rng.integers(0, 3)
            if builder == 0:
                length = float(rng.uniform(0.5, 5.0))
                spec = cavity_spectrum(length, float(rng.uniform(0, 2)),
                                       int(rng.integers(1, 30)),
                                       float(rng.uniform(0, length)))
            elif builder == 1:
                spec = esu_spectrum(float(rng.uniform(0.5, 3.0)),
                                    float(rng.uniform(0, 2)),
                                    int(rng.integers(1, 15)))
            else:
                m = float(rng.uniform(0, 1.5))
                spec = minkowski_continuum_spectrum(
                    m, m + float(rng.uniform(0.5, 8.0)),
                    int(rng.integers(64, 512)))
            w, om, f2 = spec.arrays()
            assert np.all(w > 0) and np.all(om > 0) and np.all(f2 >= 0)
            assert np.all(np.isfinite(w)) and np.all(np.isfinite(om))
            assert math.isfinite(spec.zero_point_sum())
