import numpy as np
import pytest
from numpy.testing import assert_allclose

from nonlocality_service.errors import NonUnitVector, OutOfRange
from nonlocality_service.qstate import (
    DIM,
    XTypeState,
    classify_xtype,
    pauli_tensor,
    random_density_operator,
    random_xtype_state,
)
from nonlocality_service.svetlichny import (
    S_MAX,
    Branch,
    LambdaPair,
    MeasurementSettings,
    attainable_value,
    coherence_certificate,
    diagonal_certificate,
    expectation,
    inner_max,
    lambdas,
    nonlocality_measure,
    optimal_c_pair,
    svetlichny_operator,
    svetlichny_xtype,
    upper_bound,
)
from tests.conftest import X, Y, Z, random_settings, random_unit

SQRT2 = np.sqrt(2.0)


def closed_form_inner(pair: LambdaPair) -> float:
    L0 = pair.lambda0 @ pair.lambda0
    L1 = pair.lambda1 @ pair.lambda1
    g = pair.lambda0 @ pair.lambda1
    return 2 * np.sqrt(0.5 * (L0 + L1 + np.sqrt(max(0.0, (L0 + L1) ** 2 - 4 * g**2))))


def pair_of(v0, v1) -> LambdaPair:
    return LambdaPair(np.asarray(v0, dtype=float), np.asarray(v1, dtype=float))


class TestOperator:
    def test_all_z_on_ground_state(self, zero_state):
        assert expectation(zero_state, MeasurementSettings.uniform(Z)) == pytest.approx(-4.0)

    def test_all_z_operator_is_diagonal(self):
        S = svetlichny_operator(MeasurementSettings.uniform(Z))
        assert np.max(np.abs(S - np.diag(np.diag(S)))) == 0

    def test_xy_settings_on_ghz(self, ghz, xy_settings):
        assert expectation(ghz, xy_settings) == pytest.approx(8.0)

    def test_hermitian_and_traceless(self, rng):
        for _ in range(5):
            S = svetlichny_operator(random_settings(rng))
            assert np.max(np.abs(S - S.conj().T)) < 1e-12
            assert abs(np.trace(S)) < 1e-12

    def test_maximally_mixed_vanishes(self, rng, mixed):
        for _ in range(5):
            assert expectation(mixed, random_settings(rng)) == pytest.approx(0.0, abs=1e-12)

    def test_non_unit_direction(self):
        with pytest.raises(NonUnitVector):
            MeasurementSettings(2 * X, X, X, X, X, X, X, X)

    def test_settings_dict_round_trip(self, xy_settings):
        restored = MeasurementSettings.from_dict(xy_settings.to_dict())
        assert_allclose(restored.c_prime, Y)


class TestLambdas:
    def test_ghz_xy_pair(self, ghz):
        pair = lambdas(pauli_tensor(ghz), X, Y, X, Y, X, Y)
        assert_allclose(pair.lambda0, [0, 4, 0], atol=1e-12)
        assert_allclose(pair.lambda1, [4, 0, 0], atol=1e-12)
        assert pair.lambda0 @ pair.lambda0 + pair.lambda1 @ pair.lambda1 == pytest.approx(32.0)
        assert inner_max(pair) == pytest.approx(8 * SQRT2)

    def test_zero_tensor(self):
        pair = lambdas(np.zeros((3, 3, 3, 3)), X, Y, X, Y, X, Y)
        assert_allclose(pair.lambda0, 0)
        assert_allclose(pair.lambda1, 0)

    def test_repeated_settings_collapse(self, rng):
        tensor = pauli_tensor(random_density_operator(rng))
        a, b, d = random_unit(rng, 3)
        pair = lambdas(tensor, a, a, b, b, d, d)
        T_ab_d = np.einsum("i,j,ijkl,l->k", a, b, tensor.correlations, d)
        assert_allclose(pair.lambda0, -2 * T_ab_d, atol=1e-12)
        assert_allclose(pair.lambda1, -2 * T_ab_d, atol=1e-12)

    def test_non_unit_direction(self, ghz):
        with pytest.raises(NonUnitVector):
            lambdas(pauli_tensor(ghz), X, Y, X, Y, X, 0.5 * Y)

    def test_expectation_factorises(self, rng):
        for _ in range(10):
            rho = random_density_operator(rng)
            s = random_settings(rng)
            pair = lambdas(pauli_tensor(rho), s.a, s.a_prime, s.b, s.b_prime, s.d, s.d_prime)
            reduced = s.c @ pair.total + s.c_prime @ pair.difference
            assert expectation(rho, s) == pytest.approx(reduced, abs=1e-10)


class TestInnerMax:
    @pytest.mark.parametrize(
        "lambda0, lambda1, expected",
        [
            ([1, 0, 0], [0, 1, 0], 2 * SQRT2),
            ([2, 0, 0], [2, 0, 0], 4.0),
            ([3, 0, 0], [4, 0, 0], 8.0),
            ([0, 0, 0], [0, 0, 0], 0.0),
        ],
    )
    def test_examples(self, lambda0, lambda1, expected):
        assert inner_max(pair_of(lambda0, lambda1)) == pytest.approx(expected)

    def test_upper_bound_examples(self):
        assert upper_bound(pair_of([1, 0, 0], [0, 1, 0])) == pytest.approx(2 * SQRT2)
        assert upper_bound(pair_of([2, 0, 0], [2, 0, 0])) == pytest.approx(np.sqrt(32))
        assert upper_bound(pair_of([0, 0, 0], [0, 0, 0])) == 0.0

    def test_matches_closed_form_and_bound(self, rng):
        for _ in range(200):
            pair = pair_of(*rng.normal(scale=2.0, size=(2, 3)))
            value = inner_max(pair)
            assert value == pytest.approx(closed_form_inner(pair), rel=1e-9)
            assert value <= upper_bound(pair) + 1e-12

    def test_bound_tight_when_orthogonal(self, rng):
        v0 = rng.normal(size=3)
        v1 = np.cross(v0, rng.normal(size=3))
        pair = pair_of(v0, v1)
        assert inner_max(pair) == pytest.approx(upper_bound(pair), rel=1e-12)

    def test_optimal_c_pair_attains_maximum(self, rng):
        for _ in range(50):
            pair = pair_of(*rng.normal(size=(2, 3)))
            c, c_prime = optimal_c_pair(pair)
            assert np.linalg.norm(c) == pytest.approx(1.0)
            assert c @ pair.total + c_prime @ pair.difference == pytest.approx(inner_max(pair))

    def test_optimal_c_pair_degenerate(self):
        c, c_prime = optimal_c_pair(pair_of([1, 0, 0], [1, 0, 0]))
        assert_allclose(c, X)
        assert_allclose(c_prime, Z)

    def test_search_over_inner_angles(self, rng):
        # 2 cos(t) <e0, l0> + 2 sin(t) <e1, l1> over orthonormal (e0, e1)
        pair = pair_of([3, 0, 0], [4, 0, 0])
        best = 0.0
        for _ in range(4000):
            e0 = random_unit(rng)
            e1 = np.cross(e0, random_unit(rng))
            e1 /= np.linalg.norm(e1)
            for t in np.linspace(0, 2 * np.pi, 16, endpoint=False):
                best = max(best, 2 * np.cos(t) * e0 @ pair.lambda0 + 2 * np.sin(t) * e1 @ pair.lambda1)
        assert best <= inner_max(pair) + 1e-9
        assert best > inner_max(pair) - 0.5


class TestClosedForm:
    def test_ghz(self, ghz):
        result = svetlichny_xtype(classify_xtype(ghz))
        assert result.value == pytest.approx(8 * SQRT2, abs=1e-12)
        assert result.measure == pytest.approx(1.0)
        assert result.branch is Branch.COHERENCE
        assert result.genuinely_nonlocal

    def test_ground_state(self, zero_state):
        x = classify_xtype(zero_state)
        result = svetlichny_xtype(x)
        assert result.value == pytest.approx(4 * SQRT2)
        assert result.measure == 0.0
        assert result.branch is Branch.DIAGONAL
        assert result.floor == pytest.approx(4.0)
        assert attainable_value(x) == pytest.approx(4.0)

    def test_balanced_branches_tie_to_coherence(self):
        diag = np.zeros(DIM)
        diag[0] = diag[15] = 0.5
        result = svetlichny_xtype(XTypeState(diag=diag, pair_index=1, pair_value=0.25))
        assert result.value == pytest.approx(4 * SQRT2)
        assert result.branch is Branch.COHERENCE

    def test_phase_invariance(self, rng):
        x = random_xtype_state(rng)
        base = svetlichny_xtype(x).value
        for phase in np.linspace(0, 2 * np.pi, 7):
            rotated = XTypeState(x.diag, x.pair_index, abs(x.pair_value) * np.exp(1j * phase))
            assert svetlichny_xtype(rotated).value == pytest.approx(base, abs=1e-14)

    def test_result_json(self, ghz):
        payload = svetlichny_xtype(classify_xtype(ghz)).to_json()
        assert payload["branch"] == "coherence"
        assert set(payload) >= {"value", "measure", "branch"}

    def test_dominates_random_settings(self, rng):
        for _ in range(20):
            x = random_xtype_state(rng)
            rho = x.to_matrix()
            bound = svetlichny_xtype(x).value
            for _ in range(50):
                assert expectation(rho, random_settings(rng)) <= bound + 1e-6

    @pytest.mark.slow
    def test_dominates_many_random_settings(self, rng):
        for _ in range(20):
            x = random_xtype_state(rng)
            rho = x.to_matrix()
            bound = svetlichny_xtype(x).value
            for _ in range(1000):
                assert expectation(rho, random_settings(rng)) <= bound + 1e-6


class TestCertificates:
    @pytest.mark.parametrize("pair_index", range(1, 9))
    def test_coherence_certificate_every_pair(self, rng, pair_index):
        for _ in range(3):
            x = random_xtype_state(rng, pair_index=pair_index)
            settings = coherence_certificate(x)
            assert expectation(x.to_matrix(), settings) == pytest.approx(
                16 * SQRT2 * abs(x.pair_value), abs=1e-10
            )

    def test_ghz_certificate_reaches_maximum(self, ghz):
        settings = coherence_certificate(classify_xtype(ghz))
        assert expectation(ghz, settings) == pytest.approx(S_MAX, abs=1e-10)

    def test_diagonal_certificate(self, rng):
        for _ in range(5):
            x = random_xtype_state(rng)
            settings = diagonal_certificate(x)
            assert expectation(x.to_matrix(), settings) == pytest.approx(4 * abs(x.signed_sum), abs=1e-10)


class TestMeasure:
    @pytest.mark.parametrize(
        "value, expected",
        [(8.0, 0.0), (S_MAX, 1.0), (4 * SQRT2, 0.0), (0.0, 0.0), (S_MAX + 5e-7, 1.0)],
    )
    def test_examples(self, value, expected):
        assert nonlocality_measure(value) == pytest.approx(expected, abs=1e-12)

    def test_midpoint(self):
        assert nonlocality_measure((8 + S_MAX) / 2) == pytest.approx(0.5)

    def test_overshoot(self):
        with pytest.raises(OutOfRange):
            nonlocality_measure(S_MAX + 1e-5)

    def test_monotone(self):
        values = np.linspace(0, S_MAX, 50)
        measures = [nonlocality_measure(v) for v in values]
        assert all(b >= a for a, b in zip(measures, measures[1:]))
        assert min(measures) >= 0.0 and max(measures) <= 1.0
