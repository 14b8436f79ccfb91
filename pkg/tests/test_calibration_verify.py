import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from calibration_verify import (
    SUITES,
    FrameError,
    MixedForm,
    adapted_frame,
    amgm_det_check,
    comass_estimate,
    complex_to_real,
    evaluate_mixed,
    evaluate_mixed_batch,
    evaluate_mixed_metric,
    fibration_check,
    fibration_weights,
    graph_oracle,
    kahler_form,
    kahler_power,
    lemma41_bound,
    lichnerowicz_split,
    oracle_suite,
    plane_form,
    run_suite,
    standard_complex_structure,
    wirtinger_check,
)
from energy_densities import metric_whiten
from exterior_algebra import DomainError, KForm, basis_form, basis_size, submatrix_dets
from utils.rng import random_orthogonal, random_spd

finite = st.floats(min_value=-10.0, max_value=10.0, allow_nan=False, allow_infinity=False)


def single_entry(m, n, k, row, col):
    table = np.zeros((basis_size(m, k), basis_size(n, k)))
    table[row, col] = 1.0
    return MixedForm(m, n, k, table)


class TestMixedForm:
    def test_shape_checked(self):
        with pytest.raises(DomainError):
            MixedForm(3, 3, 2, np.zeros((3, 2)))
        with pytest.raises(DomainError):
            MixedForm(2, 3, 3, np.zeros((0, 1)))

    def test_sup_norm(self, rng):
        table = rng.standard_normal((3, 3))
        phi = MixedForm(3, 3, 1, table)
        assert phi.sup_norm ** 2 == pytest.approx(np.sum(table ** 2), rel=1e-12)

    def test_permutation_value(self):
        # Phi = e'_2 ^ *e_1 on A swapping the coordinates
        phi = single_entry(2, 2, 1, 0, 1)
        assert evaluate_mixed(phi, np.array([[0.0, 1.0], [1.0, 0.0]])) == pytest.approx(1.0)

    def test_zero_map(self, rng):
        phi = MixedForm(3, 4, 2, rng.standard_normal((3, 6)))
        assert evaluate_mixed(phi, np.zeros((4, 3))) == 0.0

    def test_shape_mismatch(self, rng):
        phi = MixedForm(3, 3, 2, rng.standard_normal((3, 3)))
        with pytest.raises(DomainError):
            evaluate_mixed(phi, np.zeros((2, 3)))

    def test_graph_oracle(self, rng):
        for _ in range(100):
            phi = MixedForm(3, 3, 2, rng.standard_normal((3, 3)))
            a = rng.standard_normal((3, 3))
            oracle = graph_oracle(phi, a)
            assert evaluate_mixed(phi, a) == pytest.approx(oracle, rel=1e-10, abs=1e-10)

    @pytest.mark.parametrize("m,n,k", [(1, 1, 1), (2, 3, 1), (3, 2, 2), (4, 4, 3), (5, 2, 2)])
    def test_graph_oracle_shapes(self, rng, m, n, k):
        phi = MixedForm.from_product(
            KForm(m, k, rng.standard_normal(basis_size(m, k))),
            KForm(n, k, rng.standard_normal(basis_size(n, k))),
        )
        a = rng.standard_normal((n, m))
        assert evaluate_mixed(phi, a) == pytest.approx(graph_oracle(phi, a), rel=1e-10, abs=1e-10)

    def test_linear_in_phi(self, rng):
        first = MixedForm(3, 2, 1, rng.standard_normal((3, 2)))
        second = MixedForm(3, 2, 1, rng.standard_normal((3, 2)))
        total = MixedForm(3, 2, 1, first.coeffs + 2.0 * second.coeffs)
        a = rng.standard_normal((2, 3))
        expected = evaluate_mixed(first, a) + 2.0 * evaluate_mixed(second, a)
        assert evaluate_mixed(total, a) == pytest.approx(expected, rel=1e-12)

    def test_batch_matches_scalar(self, rng):
        phi = MixedForm(4, 3, 2, rng.standard_normal((6, 3)))
        stack = rng.standard_normal((7, 3, 4))
        batch = evaluate_mixed_batch(phi, stack)
        assert batch.shape == (7,)
        for i in range(7):
            assert batch[i] == pytest.approx(evaluate_mixed(phi, stack[i]), rel=1e-12, abs=1e-12)

    def test_metric_reduction(self, rng):
        phi = MixedForm(3, 2, 1, rng.standard_normal((3, 2)))
        a = rng.standard_normal((2, 3))
        G, H = random_spd(rng, 3), random_spd(rng, 2)
        assert evaluate_mixed_metric(phi, a, G, H) == pytest.approx(evaluate_mixed(phi, metric_whiten(a, G, H)))


class TestLemma41:
    def test_zero_map(self, rng):
        phi = MixedForm(3, 3, 2, rng.standard_normal((3, 3)))
        assert lemma41_bound(phi, np.zeros((3, 3))) == (0.0, 0.0)

    def test_single_entry_identity(self):
        lhs, rhs = lemma41_bound(single_entry(3, 3, 2, 0, 0), np.eye(3))
        assert lhs == pytest.approx(1.0)
        # 2! * C(3,2) * C(3,2) * |Phi| * |1_3|_2^2 = 18 * 3
        assert rhs == pytest.approx(54.0)

    def test_random(self, rng):
        for _ in range(500):
            m, n = int(rng.integers(1, 7)), int(rng.integers(1, 7))
            k = int(rng.integers(1, min(3, m, n) + 1))
            phi = MixedForm(m, n, k, rng.standard_normal((basis_size(m, k), basis_size(n, k))))
            lhs, rhs = lemma41_bound(phi, rng.standard_normal((n, m)))
            assert lhs <= rhs + 1e-10 * (1 + rhs)


class TestLichnerowicz:
    def test_conjugation(self):
        split = lichnerowicz_split(np.diag([1.0, -1.0]))
        assert split.d_norm_sq == pytest.approx(0.0)
        assert split.dbar_norm_sq == pytest.approx(1.0)
        assert split.pairing == pytest.approx(-1.0)
        assert split.expected_pairing == pytest.approx(-1.0)

    def test_zero(self):
        split = lichnerowicz_split(np.zeros((4, 4)))
        assert (split.d_norm_sq, split.dbar_norm_sq, split.pairing) == (0.0, 0.0, 0.0)

    def test_holomorphic(self, rng):
        z = rng.standard_normal((2, 3)) + 1j * rng.standard_normal((2, 3))
        split = lichnerowicz_split(complex_to_real(z))
        assert split.dbar_norm_sq <= 1e-14
        assert split.energy_residual <= 1e-12
        assert split.pairing_residual <= 1e-10

    def test_random_standard(self, rng):
        for m, n in [(1, 1), (2, 2), (3, 3), (2, 3), (3, 1)]:
            for _ in range(20):
                a = rng.standard_normal((2 * n, 2 * m))
                split = lichnerowicz_split(a)
                energy = float(np.sum(a ** 2))
                assert split.energy_residual <= 1e-12 * (1 + energy)
                assert split.pairing_residual <= 1e-10 * (1 + energy)

    def test_conjugated_structures(self, rng):
        for _ in range(20):
            o_s, o_t = random_orthogonal(rng, 4), random_orthogonal(rng, 4)
            J_s = o_s @ standard_complex_structure(2) @ o_s.T
            J_t = o_t @ standard_complex_structure(2) @ o_t.T
            a = rng.standard_normal((4, 4))
            split = lichnerowicz_split(a, J_s, J_t)
            assert split.pairing_residual <= 1e-10 * (1 + np.sum(a ** 2))

    def test_invalid_structure(self):
        with pytest.raises(FrameError):
            lichnerowicz_split(np.eye(2), J_src=np.eye(2))
        with pytest.raises(FrameError):
            lichnerowicz_split(np.eye(3))

    def test_kahler_conventions(self):
        assert kahler_power(2, 2).terms() == {(1, 2, 3, 4): pytest.approx(1.0)}
        assert np.array_equal(complex_to_real(1j * np.eye(2)), standard_complex_structure(2))
        J = standard_complex_structure(1)
        assert float(kahler_form(1).coeffs[0]) == J[1, 0]

    def test_to_dict(self):
        payload = lichnerowicz_split(np.eye(2)).to_dict()
        assert set(payload) == {"dNormSq", "dBarNormSq", "energyResidual", "pairing", "expectedPairing"}


class TestWirtinger:
    def test_complex_line(self):
        frame = np.eye(4)[:, [0, 1]]
        assert wirtinger_check(frame, kahler_form(2)) == pytest.approx(0.0, abs=1e-12)

    def test_totally_real(self):
        frame = np.eye(4)[:, [0, 2]]
        assert wirtinger_check(frame, kahler_form(2)) == pytest.approx(1.0)

    def test_reversed_orientation(self):
        frame = np.eye(4)[:, [1, 0]]
        assert wirtinger_check(frame, kahler_form(2)) == pytest.approx(2.0)

    def test_random_frames(self, rng):
        psi = kahler_form(2)
        for _ in range(200):
            q, _ = np.linalg.qr(rng.standard_normal((4, 2)))
            assert -1e-10 <= wirtinger_check(q, psi) <= 2.0 + 1e-10

    def test_non_orthonormal(self):
        with pytest.raises(FrameError):
            wirtinger_check(np.array([[1.0, 1.0], [0.0, 1.0], [0.0, 0.0], [0.0, 0.0]]), kahler_form(2))


class TestFibration:
    def test_coordinate_projection(self):
        result = fibration_check(np.array([[1.0, 0.0, 0.0]]), basis_form(3, (2, 3)))
        assert result.lhs == pytest.approx(1.0)
        assert result.rhs == pytest.approx(1.0)
        assert result.fiber_value == pytest.approx(1.0)
        assert result.calibrated

    def test_rotated_fiber_plane(self):
        theta = 0.7
        plane = np.array([[0.0, np.sin(theta)], [1.0, 0.0], [0.0, np.cos(theta)]])
        result = fibration_check(np.array([[1.0, 0.0, 0.0]]), plane_form(plane))
        assert result.lhs == pytest.approx(np.cos(theta))
        assert result.rhs == pytest.approx(1.0)
        assert result.fiber_value == pytest.approx(np.cos(theta))
        assert not result.calibrated

    def test_rank_deficient(self):
        result = fibration_check(np.array([[1.0, 0.0, 0.0], [0.0, 0.0, 0.0]]), basis_form(3, (3,)))
        assert result.lhs == pytest.approx(0.0, abs=1e-12)
        assert result.rhs == pytest.approx(0.0, abs=1e-12)
        assert result.fiber_value is None
        assert not result.calibrated

    def test_requires_submersion_shape(self):
        with pytest.raises(FrameError):
            fibration_check(np.eye(2), KForm(2, 0, [1.0]))

    def test_rejects_large_comass(self):
        with pytest.raises(FrameError):
            fibration_check(np.array([[1.0, 0.0, 0.0]]), basis_form(3, (2, 3), 2.0))

    def test_factorization(self, rng):
        for _ in range(50):
            frame = random_orthogonal(rng, 5)
            phi = plane_form(frame[:, :3])
            a = rng.standard_normal((2, 5))
            result = fibration_check(a, phi, precondition_samples=0)
            assert result.lhs <= result.rhs + 1e-9
            assert result.lhs == pytest.approx(result.rhs * result.fiber_value, rel=1e-9, abs=1e-12)

    def test_batch_weights_match(self, rng):
        phi = KForm(5, 3, rng.standard_normal(10))
        rows, cols, weights = fibration_weights(phi, 2)
        a = rng.standard_normal((6, 2, 5))
        batch = submatrix_dets(a, rows, cols) @ weights
        for i in range(6):
            lhs = fibration_check(a[i], phi, precondition_samples=0).lhs
            assert batch[i] == pytest.approx(lhs, rel=1e-10, abs=1e-12)

    def test_volume_scale(self):
        result = fibration_check(np.array([[2.0, 0.0, 0.0]]), basis_form(3, (2, 3)), vol_scale=3.0)
        assert result.lhs == pytest.approx(6.0)
        assert result.rhs == pytest.approx(6.0)

    def test_adapted_frame(self, rng):
        a = rng.standard_normal((2, 4))
        frame = adapted_frame(a)
        assert np.allclose(frame.T @ frame, np.eye(4), atol=1e-12)
        assert np.linalg.det(frame) > 0
        assert np.linalg.det(a @ frame[:, :2]) > 0
        assert np.allclose(a @ frame[:, 2:], 0.0, atol=1e-12)

    def test_plane_form_comass(self, rng):
        phi = plane_form(random_orthogonal(rng, 4)[:, :2])
        assert comass_estimate(phi, 500, rng) <= 1.0 + 1e-12


class TestAmGm:
    def test_identity(self):
        assert amgm_det_check(np.eye(3)) == pytest.approx((1.0, 1.0))

    def test_diagonal(self):
        assert amgm_det_check(np.diag([2.0, 0.5])) == pytest.approx((1.0, 1.5625))

    def test_scaled_rotation(self, rng):
        o = random_orthogonal(rng, 4)
        if np.linalg.det(o) < 0:
            o[:, 0] *= -1.0
        lhs, rhs = amgm_det_check(2.5 * o)
        assert lhs == pytest.approx(rhs, rel=1e-10)

    def test_non_square(self):
        with pytest.raises(DomainError):
            amgm_det_check(np.zeros((2, 3)))

    @settings(max_examples=200, deadline=None)
    @given(arrays(np.float64, (3, 3), elements=finite))
    def test_property(self, a):
        lhs, rhs = amgm_det_check(a)
        assert lhs <= rhs + 1e-10 * (1 + abs(rhs))


class TestSuites:
    @pytest.mark.parametrize("name", SUITES)
    def test_suite_passes(self, name):
        report = run_suite(name, 3_000, seed=17)
        assert report.passed, report.to_dict()
        assert report.failures == 0
        assert report.worst_case is None

    def test_wirtinger_margin_range(self):
        report = run_suite("wirtinger", 3_000, seed=2)
        assert report.min_margin >= -1e-10
        assert report.extras["maxMargin"] <= 2.0 + 1e-10

    def test_lemma41_reports_sharper_constant(self):
        report = run_suite("lemma41", 3_000, seed=4)
        assert 0.0 < report.extras["sharperConstant"]

    def test_workers_do_not_change_result(self):
        serial = run_suite("amgm", 5_000, seed=3, workers=1)
        threaded = run_suite("amgm", 5_000, seed=3, workers=3)
        assert serial.to_dict() == threaded.to_dict()

    def test_unknown_suite(self):
        with pytest.raises(ValueError):
            run_suite("hodge", 10)

    def test_oracles(self):
        report = oracle_suite(300, seed=9)
        assert report.passed, report.to_dict()
        assert report.extras["mixedMaxRelError"] <= 1e-10
        assert report.extras["pullbackMaxRelError"] <= 1e-10
