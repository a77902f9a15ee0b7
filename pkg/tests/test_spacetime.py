import itertools

import numpy as np
import pytest
from numpy.testing import assert_allclose
from pydantic import ValidationError

from nonlocality_service.errors import NariaiViolation, NonPositiveMass, NonPositiveParameter
from nonlocality_service.qstate import DIM, SIGN_PATTERN, ghz_density, validate
from nonlocality_service.spacetime import (
    SchwarzschildScenario,
    SdSScenario,
    build_schwarzschild_state,
    build_sds_state,
    hawking_temperature,
    reduce_schwarzschild,
    schwarzschild_closed_form,
    sds_closed_form,
    sds_horizons,
    sds_thermo,
    squeeze_coeffs,
    svetlichny_schwarzschild,
    svetlichny_schwarzschild_pipeline,
    svetlichny_sds,
    svetlichny_sds_pipeline,
)
from nonlocality_service.svetlichny import S_MAX, Branch

SQRT2 = np.sqrt(2.0)
HALF = 1 / np.sqrt(2.0)


def metric(r, mass, lambda_cosmo):
    return 1 - 2 * mass / r - lambda_cosmo * r**2 / 3


def mass_for(parameter, lambda_cosmo):
    """Mass giving 3 M sqrt(Lambda) = parameter"""
    return parameter / (3 * np.sqrt(lambda_cosmo))


class TestHawking:
    def test_temperature(self):
        assert hawking_temperature(1.0) == pytest.approx(0.0397887, rel=1e-6)
        assert hawking_temperature(1 / (8 * np.pi)) == pytest.approx(1.0)
        assert hawking_temperature(100.0) < hawking_temperature(10.0) < hawking_temperature(1.0)

    def test_non_positive_mass(self):
        with pytest.raises(NonPositiveMass):
            hawking_temperature(0.0)

    def test_squeeze_limits(self):
        cold = squeeze_coeffs(1.0, 1e-6)
        hot = squeeze_coeffs(1.0, 1e6)
        assert_allclose(cold, (1.0, 0.0), atol=1e-9)
        assert_allclose(hot, (HALF, HALF), atol=1e-6)

    def test_squeeze_unit_temperature(self):
        cos, sin = squeeze_coeffs(1.0, 1.0)
        assert cos == pytest.approx(1 / np.sqrt(np.exp(-1) + 1))
        assert sin == pytest.approx(1 / np.sqrt(np.e + 1))
        assert cos == pytest.approx(0.85502, abs=1e-5)
        assert sin == pytest.approx(0.51860, abs=1e-5)
        assert cos**2 + sin**2 == pytest.approx(1.0, abs=1e-12)

    def test_squeeze_rejects_non_positive(self):
        with pytest.raises(NonPositiveParameter):
            squeeze_coeffs(0.0, 1.0)
        with pytest.raises(NonPositiveParameter):
            squeeze_coeffs(1.0, -1.0)


class TestSchwarzschildScenario:
    def test_partition_must_cover_n(self):
        with pytest.raises(ValidationError):
            SchwarzschildScenario(alpha=0.5, temperature=1.0, n=2, p=2, q=1)

    def test_needs_temperature_or_mass(self):
        with pytest.raises(ValidationError):
            SchwarzschildScenario(alpha=0.5, n=1, p=1, q=0)

    def test_mass_and_temperature_must_agree(self):
        with pytest.raises(ValidationError):
            SchwarzschildScenario(alpha=0.5, temperature=1.0, mass=1.0)

    def test_party_count_range(self):
        with pytest.raises(ValidationError):
            SchwarzschildScenario(alpha=0.5, temperature=1.0, n=4, p=4, q=0)

    def test_mass_equivalent_to_temperature(self):
        by_mass = SchwarzschildScenario(alpha=0.6, mass=0.05, n=2, p=1, q=1)
        by_temperature = SchwarzschildScenario(
            alpha=0.6, temperature=hawking_temperature(0.05), n=2, p=1, q=1
        )
        assert svetlichny_schwarzschild(by_mass).value == pytest.approx(
            svetlichny_schwarzschild(by_temperature).value, abs=1e-12
        )

    def test_kept_modes(self):
        s = SchwarzschildScenario(alpha=0.5, temperature=1.0, n=3, p=1, q=2)
        assert [str(m) for m in s.kept_modes()] == ["kruskal_4", "out_1", "in_2", "in_3"]
        assert len(s.modes()) == 7


class TestSchwarzschildState:
    def test_single_branch_norm(self):
        psi = build_schwarzschild_state(SchwarzschildScenario(alpha=1.0, temperature=0.7, n=1))
        cos, sin = squeeze_coeffs(1.0, 0.7)
        assert np.linalg.norm(psi.amplitudes) == pytest.approx(1.0)
        assert psi.amplitudes[0] == pytest.approx(cos)
        assert psi.amplitudes[3] == pytest.approx(sin)

    def test_zero_temperature_is_ghz_times_vacuum(self):
        psi = build_schwarzschild_state(SchwarzschildScenario(alpha=HALF, temperature=1e-6, n=1))
        expected = np.zeros(32)
        expected[0] = expected[int("11110", 2)] = HALF
        assert_allclose(psi.amplitudes, expected, atol=1e-9)

    def test_zero_temperature_reduces_to_ghz(self):
        rho = reduce_schwarzschild(SchwarzschildScenario(alpha=HALF, temperature=1e-6, n=1, p=1, q=0))
        assert_allclose(rho.entries, ghz_density().entries, atol=1e-9)

    @pytest.mark.parametrize("n, p, q", [(1, 1, 0), (1, 0, 1), (2, 1, 1), (3, 0, 3)])
    def test_excited_only(self, n, p, q):
        s = SchwarzschildScenario(alpha=0.0, temperature=0.5, n=n, p=p, q=q)
        rho = reduce_schwarzschild(s)
        occupied = int("1" * (4 - n + p) + "0" * q, 2)
        expected = np.zeros((DIM, DIM))
        expected[occupied, occupied] = 1.0
        assert_allclose(rho.entries, expected, atol=1e-15)

        result = svetlichny_schwarzschild(s)
        assert result.branch is Branch.DIAGONAL
        assert result.value == pytest.approx(4 * SQRT2)

    def test_interior_coherence(self):
        s = SchwarzschildScenario(alpha=HALF, omega=1.0, temperature=1.0, n=2, p=0, q=2)
        rho = reduce_schwarzschild(s).entries
        assert rho[3, 12] == pytest.approx(0.5 / (np.e + 1))

    def test_mixed_partition_matrix(self):
        alpha = 0.6
        s = SchwarzschildScenario(alpha=alpha, omega=1.0, temperature=0.8, n=2, p=1, q=1)
        cos, sin = squeeze_coeffs(1.0, 0.8)
        weight = {0: cos**2, 1: sin**2}

        expected = np.zeros((DIM, DIM))
        # kruskal_3 kruskal_4 out_1 in_2 with both far modes empty on the ground branch
        for out_bit, in_bit in itertools.product((0, 1), repeat=2):
            index = 2 * out_bit + in_bit
            expected[index, index] = alpha**2 * weight[out_bit] * weight[in_bit]
        expected[14, 14] = 1 - alpha**2
        expected[1, 14] = expected[14, 1] = alpha * np.sqrt(1 - alpha**2) * cos * sin

        assert_allclose(reduce_schwarzschild(s).entries, expected, atol=1e-14)

    def test_unit_temperature_value(self):
        s = SchwarzschildScenario(alpha=HALF, omega=1.0, temperature=1.0, n=1, p=1, q=0)
        result = svetlichny_schwarzschild(s)
        assert result.branch is Branch.COHERENCE
        assert result.value == pytest.approx(8 * SQRT2 / np.sqrt(np.exp(-1) + 1), rel=1e-12)
        assert result.value == pytest.approx(9.673, abs=1e-3)

    def test_flat_limit(self):
        s = SchwarzschildScenario(alpha=HALF, temperature=1e-6, n=1, p=1, q=0)
        assert svetlichny_schwarzschild(s).value == pytest.approx(S_MAX, abs=1e-6)

    def test_pipeline_agrees(self, rng):
        for _ in range(50):
            n = int(rng.integers(1, 4))
            p = int(rng.integers(0, n + 1))
            s = SchwarzschildScenario(
                alpha=float(rng.uniform(0.05, 0.95)),
                omega=float(rng.uniform(0.5, 2.0)),
                temperature=float(np.exp(rng.uniform(np.log(0.2), np.log(5.0)))),
                n=n,
                p=p,
                q=n - p,
            )
            assert validate(reduce_schwarzschild(s)).passed
            assert svetlichny_schwarzschild(s).value == pytest.approx(
                svetlichny_schwarzschild_pipeline(s).value, abs=1e-12
            )

    def test_closed_form_signed_sum(self):
        s = SchwarzschildScenario(alpha=0.3, temperature=0.9, n=3, p=1, q=2)
        _, signed_sum = schwarzschild_closed_form(s)
        assert signed_sum == pytest.approx(float(reduce_schwarzschild(s).diagonal @ SIGN_PATTERN))

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_value_decreases_with_temperature(self, n):
        values = [
            svetlichny_schwarzschild(
                SchwarzschildScenario(alpha=HALF, temperature=t, n=n, p=n, q=0)
            ).value
            for t in np.linspace(1e-3, 3.0, 101)
        ]
        assert np.all(np.diff(values) < 0)


class TestHorizons:
    def test_de_sitter_limit(self):
        r_h, r_c = sds_horizons(1e-9, 1.0)
        assert r_h == pytest.approx(0.0, abs=1e-6)
        assert r_c == pytest.approx(np.sqrt(3.0), abs=1e-6)

    def test_roots_satisfy_metric(self):
        r_h, r_c = sds_horizons(0.033, 1.0)
        assert 0 < r_h < r_c
        assert abs(metric(r_h, 0.033, 1.0)) < 1e-10
        assert abs(metric(r_c, 0.033, 1.0)) < 1e-10

    def test_near_nariai_degeneracy(self):
        r_h, r_c = sds_horizons(mass_for(1 - 1e-12, 1.0), 1.0)
        assert r_h == pytest.approx(1.0, abs=1e-5)
        assert r_c == pytest.approx(1.0, abs=1e-5)

    def test_nariai_violation(self):
        with pytest.raises(NariaiViolation):
            sds_horizons(0.5, 1.0)

    def test_non_positive_inputs(self):
        with pytest.raises(NonPositiveMass):
            sds_horizons(0.0, 1.0)
        with pytest.raises(NonPositiveParameter):
            sds_horizons(0.1, 0.0)


class TestSdSThermo:
    def test_black_hole_hotter(self, rng):
        for _ in range(200):
            lambda_cosmo = float(10 ** rng.uniform(-4, 0))
            mass = mass_for(float(rng.uniform(0.01, 0.99)), lambda_cosmo)
            th = sds_thermo(mass, lambda_cosmo, 1.0)
            assert th.T_H > th.T_C
            assert abs(metric(th.r_H, mass, lambda_cosmo)) < 1e-10

    def test_unit_squeezing(self):
        th = sds_thermo(0.033, 1.0, 1.0)
        assert th.cos_r**2 + th.sin_r**2 == pytest.approx(1.0, abs=1e-12)
        assert th.cos_w**2 + th.sin_w**2 == pytest.approx(1.0, abs=1e-12)
        assert 0 < th.sin_r < th.cos_r < 1
        assert set(th.to_json()) >= {"r_H", "r_C", "T_H", "T_C"}

    def test_near_nariai_surface_gravity_vanishes(self):
        th = sds_thermo(mass_for(1 - 1e-8, 1.0), 1.0, 1.0)
        assert th.k_H < 1e-3
        assert th.k_C < 1e-3

    def test_guard_band(self):
        with pytest.raises(NariaiViolation):
            sds_thermo(mass_for(1 - 1e-10, 1.0), 1.0, 1.0)


class TestSdSState:
    def test_scenario_validation(self):
        with pytest.raises(ValidationError):
            SdSScenario(alpha=0.5, mass=0.033, lambda_cosmo=1.0, n=2, m=1)
        with pytest.raises(ValidationError):
            SdSScenario(alpha=0.5, mass=0.4, lambda_cosmo=1.0)

    def test_excited_only(self):
        s = SdSScenario(alpha=0.0, mass=0.033, lambda_cosmo=1.0, n=2, m=2)
        rho = build_sds_state(s).entries
        assert rho[15, 15] == pytest.approx(1.0)
        assert np.trace(rho).real == pytest.approx(1.0)

        result = svetlichny_sds(s)
        assert result.value == pytest.approx(4 * SQRT2)
        assert result.branch is Branch.DIAGONAL

    def test_matrix_elements(self):
        alpha = HALF
        s = SdSScenario(alpha=alpha, mass=0.033, lambda_cosmo=1.0, omega=1.0, n=2, m=2)
        th = s.thermo()
        horizon = {0: th.cos_r**2, 1: th.sin_r**2}
        cosmological = {0: th.cos_w**2, 1: th.sin_w**2}

        expected = np.zeros((DIM, DIM))
        for a1, a2, b1, b2 in itertools.product((0, 1), repeat=4):
            index = 8 * a1 + 4 * a2 + 2 * b1 + b2
            expected[index, index] = (
                alpha**2 * horizon[a1] * horizon[a2] * cosmological[b1] * cosmological[b2]
            )
        expected[15, 15] += 1 - alpha**2
        expected[0, 15] = expected[15, 0] = (
            alpha * np.sqrt(1 - alpha**2) * th.cos_r**2 * th.cos_w**2
        )

        rho = build_sds_state(s)
        assert validate(rho).passed
        assert_allclose(rho.entries, expected, atol=1e-14)

    def test_flat_limit(self):
        s = SdSScenario(alpha=HALF, mass=10.0, lambda_cosmo=1e-6, n=2, m=2)
        th = s.thermo()
        assert th.cos_r == pytest.approx(1.0, abs=1e-9)
        assert th.cos_w == pytest.approx(1.0, abs=1e-9)
        assert_allclose(build_sds_state(s).entries, ghz_density().entries, atol=1e-8)
        assert svetlichny_sds(s).value == pytest.approx(S_MAX, abs=1e-4)

    def test_closed_form_pair(self):
        s = SdSScenario(alpha=0.5, mass=0.033, lambda_cosmo=1.0, n=3, m=1)
        pair, _ = sds_closed_form(s)
        assert pair == pytest.approx(abs(build_sds_state(s).entries[0, 15]), abs=1e-15)

    def test_pipeline_agrees(self, rng):
        for _ in range(50):
            n = int(rng.integers(1, 4))
            lambda_cosmo = float(10 ** rng.uniform(-3, 0))
            s = SdSScenario(
                alpha=float(rng.uniform(0.05, 0.95)),
                omega=float(rng.uniform(0.5, 2.0)),
                mass=mass_for(float(rng.uniform(0.05, 0.95)), lambda_cosmo),
                lambda_cosmo=lambda_cosmo,
                n=n,
                m=4 - n,
            )
            assert svetlichny_sds(s).value == pytest.approx(svetlichny_sds_pipeline(s).value, abs=1e-12)
