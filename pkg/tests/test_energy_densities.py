import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from energy_densities import (
    LinearMapData,
    SpectrumError,
    holder_energy_bound,
    metric_whiten,
    norm_comparison,
    schatten_p,
    sigma_pq,
    singular_spectrum,
    tau_m,
    tau_tilde,
)
from exterior_algebra import DomainError
from utils.rng import random_orthogonal, random_spd

finite = st.floats(min_value=-10.0, max_value=10.0, allow_nan=False, allow_infinity=False)


class TestSpectrum:
    def test_identity(self):
        assert singular_spectrum(LinearMapData(np.eye(4))).values == pytest.approx((1.0,) * 4)

    def test_diagonal(self):
        assert singular_spectrum(LinearMapData(np.diag([3.0, 4.0]))).values == pytest.approx((16.0, 9.0))

    def test_zero(self):
        assert singular_spectrum(LinearMapData(np.zeros((3, 2)))).values == (0.0, 0.0)

    def test_matches_generalized_eigenproblem(self, rng):
        for _ in range(50):
            n, m = int(rng.integers(1, 6)), int(rng.integers(1, 6))
            a = rng.standard_normal((n, m))
            G, H = random_spd(rng, m), random_spd(rng, n)
            expected = np.sort(np.linalg.eigvals(np.linalg.inv(G) @ a.T @ H @ a).real)[::-1]
            got = singular_spectrum(LinearMapData(a, G, H)).as_array()
            assert np.allclose(got, np.clip(expected, 0, None), atol=1e-9)

    def test_frame_invariance(self, rng):
        for _ in range(50):
            n, m = int(rng.integers(1, 6)), int(rng.integers(1, 6))
            a = rng.standard_normal((n, m))
            G, H = random_spd(rng, m), random_spd(rng, n)
            # metric-orthogonal changes of frame: U^T H U = H, V^T G V = G
            h_half, h_inv_half = np.linalg.cholesky(H).T, np.linalg.inv(np.linalg.cholesky(H).T)
            g_half, g_inv_half = np.linalg.cholesky(G).T, np.linalg.inv(np.linalg.cholesky(G).T)
            u = h_inv_half @ random_orthogonal(rng, n) @ h_half
            v = g_inv_half @ random_orthogonal(rng, m) @ g_half
            before = singular_spectrum(LinearMapData(a, G, H)).as_array()
            after = singular_spectrum(LinearMapData(u @ a @ v, G, H)).as_array()
            assert np.allclose(before, after, atol=1e-10 * (1 + before.max()))

    def test_bad_metric(self):
        with pytest.raises(DomainError):
            LinearMapData(np.eye(2), src_metric=-np.eye(2))

    def test_spectrum_error_reports_condition(self):
        err = SpectrumError("eigen-solver failed", 1e8)
        assert "condition number" in str(err)
        assert err.condition == 1e8


class TestSchatten:
    @pytest.mark.parametrize("p", [0.5, 1.0, 2.0, 3.0])
    def test_identity(self, p):
        assert schatten_p(LinearMapData(np.eye(3)), p) == pytest.approx(3 ** (1.0 / p))

    def test_diagonal(self):
        data = LinearMapData(np.diag([3.0, 4.0]))
        assert schatten_p(data, 1) == pytest.approx(7.0)
        assert schatten_p(data, 2) == pytest.approx(5.0)

    def test_zero_and_bad_exponent(self):
        assert schatten_p(LinearMapData(np.zeros((2, 2))), 1.5) == 0.0
        with pytest.raises(DomainError):
            schatten_p(LinearMapData(np.eye(2)), 0.0)

    def test_sigma_pq_examples(self):
        assert sigma_pq(LinearMapData(np.eye(5)), 2, 2) == pytest.approx(5.0)
        assert sigma_pq(LinearMapData(np.diag([3.0, 4.0])), 4, 4) == pytest.approx(337.0)
        assert sigma_pq(LinearMapData(np.diag([3.0, 4.0])), 2, 2) == pytest.approx(25.0)

    def test_sigma_2p_is_frobenius_power(self, rng):
        for _ in range(100):
            a = rng.standard_normal((3, 4))
            G, H = random_spd(rng, 4), random_spd(rng, 3)
            frob_sq = np.trace(np.linalg.inv(G) @ a.T @ H @ a)
            for p in (1.0, 2.0, 3.5):
                assert sigma_pq(LinearMapData(a, G, H), 2, p) == pytest.approx(frob_sq ** (p / 2), rel=1e-12)


class TestVolumeDensities:
    def test_isometric_inclusion(self):
        a = np.vstack([np.eye(2), np.zeros((2, 2))])
        assert tau_m(LinearMapData(a)) == pytest.approx(1.0)
        assert tau_m(LinearMapData(3.0 * a)) == pytest.approx(9.0)

    def test_tau_m_singular_values(self, rng):
        a = rng.standard_normal((4, 2))
        s = np.linalg.svd(a, compute_uv=False)
        assert tau_m(LinearMapData(a)) == pytest.approx(s[0] * s[1])

    def test_tau_m_requires_n_ge_m(self):
        with pytest.raises(DomainError):
            tau_m(LinearMapData(np.ones((1, 2))))

    def test_submersion(self):
        assert tau_tilde(LinearMapData(np.hstack([np.eye(2), np.zeros((2, 1))]))) == pytest.approx(1.0)

    def test_rank_deficient(self):
        assert tau_tilde(LinearMapData(np.array([[1.0, 2.0, 3.0], [2.0, 4.0, 6.0]]))) == pytest.approx(0.0, abs=1e-12)

    def test_tau_tilde_singular_values(self, rng):
        a = rng.standard_normal((2, 3))
        s = np.linalg.svd(a, compute_uv=False)
        assert tau_tilde(LinearMapData(a)) == pytest.approx(s[0] * s[1])

    def test_tau_tilde_with_metrics(self, spd, rng):
        a = rng.standard_normal((2, 4))
        G, H = spd(4), spd(2)
        expected = np.sqrt(np.linalg.det(a @ np.linalg.inv(G) @ a.T @ H))
        assert tau_tilde(LinearMapData(a, G, H)) == pytest.approx(expected, rel=1e-10)
        assert tau_tilde(LinearMapData(a, G, 4.0 * H)) == pytest.approx(4.0 * expected, rel=1e-10)

    def test_tau_tilde_requires_m_ge_n(self):
        with pytest.raises(DomainError):
            tau_tilde(LinearMapData(np.ones((3, 2))))

    def test_amgm_against_schatten(self, rng):
        for _ in range(2000):
            m = int(rng.integers(1, 5))
            data = LinearMapData(rng.standard_normal((m + int(rng.integers(0, 3)), m)))
            lhs = tau_m(data) ** (2.0 / m)
            rhs = schatten_p(data, 2) ** 2 / m
            assert lhs <= rhs * (1 + 1e-10)

    def test_tau_squared_is_spectrum_product(self, rng):
        data = LinearMapData(rng.standard_normal((5, 3)), random_spd(rng, 3), random_spd(rng, 5))
        assert tau_m(data) ** 2 == pytest.approx(np.prod(singular_spectrum(data).as_array()), rel=1e-10)


class TestComparisons:
    def test_identity_equality(self):
        lhs, rhs = norm_comparison(LinearMapData(np.eye(3)), 1.0, 2.0)
        assert lhs == pytest.approx(rhs)
        assert lhs == pytest.approx(3.0)

    def test_rank_one(self):
        lhs, rhs = norm_comparison(LinearMapData(np.diag([1.0, 0.0])), 1.0, 2.0)
        assert (lhs, rhs) == pytest.approx((1.0, np.sqrt(2.0)))

    def test_order_enforced(self):
        with pytest.raises(DomainError):
            norm_comparison(LinearMapData(np.eye(2)), 4.0, 2.0)

    @settings(max_examples=200, deadline=None)
    @given(arrays(np.float64, (4, 3), elements=finite), st.floats(min_value=1.0, max_value=4.0))
    def test_power_mean_property(self, a, p):
        lhs, rhs = norm_comparison(LinearMapData(a), p, 2.0 * p)
        assert lhs <= rhs + 1e-10 * rhs + 1e-300

    def test_holder_bound(self):
        e_p, bound = holder_energy_bound(2.0, 8.0, 1.0, 1.0, 2.0)
        assert e_p == 2.0
        assert bound == pytest.approx(np.sqrt(8.0))
        with pytest.raises(DomainError):
            holder_energy_bound(1.0, 1.0, 1.0, 3.0, 2.0)


def test_whitening_preserves_spectrum(rng):
    a = rng.standard_normal((3, 4))
    G, H = random_spd(rng, 4), random_spd(rng, 3)
    white = metric_whiten(a, G, H)
    assert np.allclose(
        singular_spectrum(LinearMapData(white)).as_array(),
        singular_spectrum(LinearMapData(a, G, H)).as_array(),
        atol=1e-10,
    )
