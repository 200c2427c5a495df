import numpy as np
import pytest

from subwave.capacitance import CapacitanceMatrix
from subwave.hill import (
    EP_SENTINEL,
    HillSystem,
    MathieuParams,
    Monodromy,
    floquet_exponents,
    hill_monodromy,
    mathieu_char_exponent,
    mathieu_map_rho,
    mathieu_map_rho_kappa,
    meissner_exponents,
    resonator_hill_matrix,
    uniform_hill_coefficient,
)
from subwave.errors import NonpositiveKappa
from subwave.lattice import fold_quasifrequency
from subwave.modulation import FourierLaw, ModulationProfile


def constant_system(omega0: float, period: float) -> HillSystem:
    return HillSystem(1, period, lambda t: np.array([[omega0**2]], dtype=complex))


class TestMonodromy:
    def test_constant_coefficient_closed_form(self):
        w0, T = 0.7, 5.0
        W = hill_monodromy(constant_system(w0, T), 1e-12).W
        exact = np.array(
            [[np.cos(w0 * T), np.sin(w0 * T) / w0], [-w0 * np.sin(w0 * T), np.cos(w0 * T)]]
        )
        assert np.abs(W - exact).max() < 1e-10

    def test_unit_determinant(self):
        system = HillSystem(
            2,
            2 * np.pi / 0.3,
            lambda t: np.array(
                [[0.01 + 0.004 * np.cos(0.3 * t), 0.002], [0.002, 0.012 - 0.003 * np.sin(0.3 * t)]],
                dtype=complex,
            ),
        )
        W = hill_monodromy(system, 1e-11).W
        assert abs(np.linalg.det(W) - 1.0) < 1e-8

    def test_tolerance_range(self):
        with pytest.raises(ValueError):
            hill_monodromy(constant_system(1.0, 1.0), 1e-3)

    def test_ode_convergence(self):
        system = HillSystem(
            1, 2 * np.pi / 0.2,
            lambda t: np.array([[0.01 * (1 + 0.3 * np.cos(0.2 * t))]], dtype=complex),
        )
        coarse = floquet_exponents(hill_monodromy(system, 1e-8), 0.2).exponents
        fine = floquet_exponents(hill_monodromy(system, 5e-9), 0.2).exponents
        assert np.abs(coarse - fine).max() < 10 * 1e-8


class TestFloquetExponents:
    def test_identity_multiplier(self):
        W = np.eye(2, dtype=complex)
        spectrum = floquet_exponents(Monodromy(W, 2 * np.pi / 0.2, 1e-10), 0.2)
        assert np.allclose(spectrum.exponents, 0.0)

    def test_negative_multiplier_folds_to_edge(self):
        modulation = 0.2
        period = 2 * np.pi / modulation
        W = -np.eye(2, dtype=complex)
        spectrum = floquet_exponents(Monodromy(W, period, 1e-10), modulation)
        assert np.allclose(spectrum.exponents.real, -modulation / 2)

    def test_jordan_block_sentinel(self):
        W = np.array([[1.0, 1.0], [0.0, 1.0]], dtype=complex)
        spectrum = floquet_exponents(Monodromy(W, 10.0, 1e-10), 0.6283185307179586)
        assert spectrum.ep_condition == EP_SENTINEL

    def test_multiplier_exponent_identity(self):
        rng = np.random.default_rng(2)
        M = rng.normal(size=(4, 4))
        W = np.linalg.matrix_power(np.eye(4) + 0.01 * (M - M.T), 8).astype(complex)
        W /= np.linalg.det(W) ** (1 / 4)
        period = 17.0
        spectrum = floquet_exponents(Monodromy(W, period, 1e-10), 2 * np.pi / period)
        recovered = np.exp(1j * spectrum.exponents * period)
        assert np.allclose(np.sort_complex(recovered), np.sort_complex(spectrum.multipliers), rtol=1e-9)
        assert abs(np.prod(spectrum.multipliers) - 1.0) < 1e-7


class TestMathieu:
    def test_harmonic_oscillator(self):
        assert mathieu_char_exponent(MathieuParams(0.25, 0.0)) == pytest.approx(0.5)
        assert mathieu_char_exponent(MathieuParams(4.0, 0.0)) == pytest.approx(2.0)
        assert mathieu_char_exponent(MathieuParams(25.0, 0.0)) == pytest.approx(5.0)

    def test_first_tongue_is_unstable(self):
        nu_det = mathieu_char_exponent(MathieuParams(1.0, 0.1), "hill_determinant")
        nu_mon = mathieu_char_exponent(MathieuParams(1.0, 0.1), "monodromy")
        assert abs(nu_det.imag) > 1e-3
        assert abs(nu_det - nu_mon) < 1e-8
        # tongue edges sit near a = 1 +/- q - q^2/8: just outside, stable
        nu_out = mathieu_char_exponent(MathieuParams(1.2, 0.1))
        assert abs(nu_out.imag) < 1e-10

    def test_cross_method_spot_grid(self):
        rng = np.random.default_rng(9)
        for _ in range(12):
            a = rng.uniform(0.2, 24.0)
            q = rng.uniform(-9.0, 9.0)
            nu_det = mathieu_char_exponent(MathieuParams(a, q), "hill_determinant")
            if abs(nu_det - round(nu_det.real)) < 1e-3:
                continue  # too close to a tongue boundary
            nu_mon = mathieu_char_exponent(MathieuParams(a, q), "monodromy")
            assert abs(nu_det - nu_mon) < 1e-8

    def test_negative_a(self):
        nu = mathieu_char_exponent(MathieuParams(-1.0, 0.0))
        assert nu == pytest.approx(1j)

    def test_parameter_maps(self):
        p = mathieu_map_rho(0.1, 0.2, 0.3)
        assert (p.a, p.q) == (pytest.approx(1.0), pytest.approx(-0.15))
        p2 = mathieu_map_rho_kappa(0.1, 0.2, 0.3)
        assert (p2.a, p2.q) == (pytest.approx(1.0), pytest.approx(-0.3))
        assert mathieu_map_rho(0.37, 0.21, 0.0).q == 0.0
        # |q|/a = eps/2 < 1/2 for the density-only map
        rng = np.random.default_rng(1)
        for _ in range(20):
            ws, om, eps = rng.uniform(0.01, 1), rng.uniform(0.05, 1), rng.uniform(0, 0.99)
            pm = mathieu_map_rho(ws, om, eps)
            assert abs(pm.q) / pm.a == pytest.approx(eps / 2, rel=1e-12)


class TestMeissner:
    def test_equal_segments_reduce_to_static(self):
        modulation = 0.2
        period = 2 * np.pi / modulation
        exps = meissner_exponents(0.08, 2.5, 2.5, 0.4, period)
        expected = fold_quasifrequency(0.08 / np.sqrt(2.5), modulation)
        assert np.allclose(sorted(exps.real), sorted([expected, -expected]), atol=1e-12)
        assert np.allclose(exps.imag, 0.0, atol=1e-12)

    def test_trace_formula_and_monodromy(self):
        ws, r1, r2, t0 = 0.08, 1.0, 2.5, 0.3
        period = 2 * np.pi / 0.2
        w1, w2 = ws / np.sqrt(r1), ws / np.sqrt(r2)
        d1, d2 = t0 + period / 2, period / 2 - t0
        trace = 2 * np.cos(w1 * d1) * np.cos(w2 * d2) - (w1 / w2 + w2 / w1) * np.sin(
            w1 * d1
        ) * np.sin(w2 * d2)
        exps = meissner_exponents(ws, r1, r2, t0, period)
        # multipliers of the transfer product must reproduce the trace
        mults = np.exp(1j * exps * period)
        assert np.sum(mults) == pytest.approx(trace, abs=1e-12)

        # time-domain monodromy of the piecewise-constant system
        def coeff(t):
            w = w1 if t - period / 2 < t0 else w2
            return np.array([[w**2]], dtype=complex)

        # integrate on [0, T] with the switch shifted to s = t - T/2
        system = HillSystem(1, period, lambda t: coeff(t))
        spectrum = floquet_exponents(hill_monodromy(system, 1e-12), 0.2)
        # same trace up to ordering of the segments (cyclic permutation)
        assert np.sum(spectrum.multipliers) == pytest.approx(trace, abs=1e-9)

    def test_zero_frequency(self):
        exps = meissner_exponents(0.0, 1.0, 2.0, 0.1, 10.0)
        assert np.allclose(exps, 0.0)

    def test_switch_inside_period(self):
        with pytest.raises(ValueError):
            meissner_exponents(0.1, 1.0, 2.0, 6.0, 10.0)


class TestUniformCoefficient:
    def test_constant_kappa_reduces_to_instantaneous(self):
        omega, eps, ws = 0.2, 0.3, 0.08
        kappa = FourierLaw.constant(omega)
        coeff = uniform_hill_coefficient(
            kappa, lambda t: ws * np.sqrt(1 + eps * np.cos(omega * t))
        )
        for t in [0.0, 3.0, 11.0]:
            assert coeff(t) == pytest.approx(ws**2 * (1 + eps * np.cos(omega * t)), rel=1e-12)

    def test_correction_vs_finite_differences(self):
        omega, eps = 0.2, 0.4
        kappa = FourierLaw.inverse_cosine(omega, eps)  # kappa = 1/(1+eps cos)

        def correction(t):
            return uniform_hill_coefficient(kappa, lambda s: 0.0 * s)(t)

        # second differences at step 1e-5 sit at the roundoff floor, so the
        # second derivative uses the optimal step for its own check
        for t in [0.0, 4.1]:
            h = 1e-5
            k = kappa.value(t)
            k1 = (kappa.value(t + h) - kappa.value(t - h)) / (2 * h)
            h2 = 1e-4
            k2 = (kappa.value(t + h2) - 2 * k + kappa.value(t - h2)) / h2**2
            expected = k2 / (2 * k) - 0.75 * (k1 / k) ** 2
            assert correction(t) == pytest.approx(expected, rel=1e-5)

    def test_nonpositive_kappa(self):
        bad = FourierLaw(0.2, np.array([-0.6, 1.0, -0.6], dtype=complex))
        with pytest.raises(NonpositiveKappa):
            uniform_hill_coefficient(bad, lambda t: 0.1)

    def test_constant_impedance_closed_form(self):
        # with rho = 1/kappa the exponents equal the static frequency times
        # the period average of kappa
        modulation, ws = 0.2, 0.083
        for eps in (0.1, 0.3, 0.6):
            kappa = FourierLaw.cosine(modulation, eps)
            coeff = uniform_hill_coefficient(kappa, lambda t: ws * kappa.value(t))
            system = HillSystem(1, kappa.period, lambda t: np.array([[coeff(t)]], dtype=complex))
            spectrum = floquet_exponents(hill_monodromy(system, 1e-12), modulation)
            expected = fold_quasifrequency(ws * kappa.mean(), modulation)
            assert np.abs(np.sort(spectrum.exponents.real) - np.array([-expected, expected])).max() < 1e-7
            assert np.abs(spectrum.exponents.imag).max() < 1e-9


def fake_capacitance(value: complex, n: int = 1) -> CapacitanceMatrix:
    return CapacitanceMatrix(alpha=np.zeros(2), entries=np.eye(n, dtype=complex) * value)


class TestResonatorHillMatrix:
    def test_static_reduction(self, square):
        _, array = square
        profile = ModulationProfile.static(0.2, 1)
        C = fake_capacitance(3.7)
        system = resonator_hill_matrix(C, profile, array)
        spectrum = floquet_exponents(hill_monodromy(system, 1e-11), 0.2)
        mat = array.material
        omega_s = np.sqrt(mat.delta * 3.7 / array.volumes[0]) * mat.v_r
        expected = fold_quasifrequency(omega_s, 0.2)
        assert np.abs(np.sort(spectrum.exponents.real) - np.sort([expected, -expected])).max() < 1e-9

    def test_common_density_modulation_is_spectrally_static(self, dimer):
        # one shared density law and constant kappa leave the exponents at
        # their static values
        _, array = dimer
        modulation = 0.2
        profile = ModulationProfile.cosine_rho(modulation, 0.4, [0.7, 0.7])
        C = CapacitanceMatrix(
            alpha=np.zeros(2),
            entries=np.array([[5.0, -1.5], [-1.5, 5.0]], dtype=complex),
        )
        system = resonator_hill_matrix(C, profile, array)
        spectrum = floquet_exponents(hill_monodromy(system, 1e-11), modulation)
        mat = array.material
        lam = np.linalg.eigvalsh(C.entries.real)
        static = np.sqrt(mat.delta * lam / array.volumes[0]) * mat.v_r
        expected = sorted(
            [fold_quasifrequency(w, modulation) for w in static]
            + [fold_quasifrequency(-w, modulation) for w in static]
        )
        assert np.abs(np.sort(spectrum.exponents.real) - np.array(expected)).max() < 1e-8

    def test_constant_impedance_single_resonator_opens_gap(self, square):
        # kappa = 1/rho = 1 + eps cos with the static frequency at the zone
        # edge behaves like the first instability tongue
        _, array = square
        modulation, eps = 0.2, 0.3
        omega_s = modulation / 2
        mat = array.material
        value = omega_s**2 * array.volumes[0] / (mat.delta * mat.v_r**2)
        profile = ModulationProfile.constant_impedance(modulation, eps, [0.0])
        system = resonator_hill_matrix(fake_capacitance(value), profile, array)
        spectrum = floquet_exponents(hill_monodromy(system, 1e-11), modulation)
        assert np.abs(spectrum.exponents.imag).max() > 1e-3

    def test_scalar_exponent_pairing(self, square):
        _, array = square
        modulation = 0.2
        profile = ModulationProfile.cosine_kappa(modulation, 0.25, [0.9])
        system = resonator_hill_matrix(fake_capacitance(3.0), profile, array)
        spectrum = floquet_exponents(hill_monodromy(system, 1e-11), modulation)
        w1, w2 = spectrum.exponents
        assert abs(fold_quasifrequency(w1 + w2, modulation)) < 1e-8
        # multiset closed under w -> -conj(w)
        mirrored = sorted(
            (-np.conj(w) if abs(w.real) > 1e-12 else w for w in spectrum.exponents),
            key=lambda z: (round(z.real, 9), z.imag),
        )
        folded = sorted(
            (fold_quasifrequency(w, modulation) for w in mirrored),
            key=lambda z: (round(z.real, 9), z.imag),
        )
        original = sorted(spectrum.exponents, key=lambda z: (round(z.real, 9), z.imag))
        assert np.allclose(folded, original, atol=1e-8)

    def test_profile_size_mismatch(self, square):
        _, array = square
        profile = ModulationProfile.static(0.2, 2)
        with pytest.raises(ValueError):
            resonator_hill_matrix(fake_capacitance(3.0), profile, array)
