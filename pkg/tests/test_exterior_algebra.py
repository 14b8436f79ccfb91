import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from exterior_algebra import (
    DomainError,
    KForm,
    MetricData,
    basis_form,
    basis_size,
    compound_matrix,
    evaluate,
    hodge_star,
    inner,
    interior,
    kform_from_json,
    kform_to_json,
    multi_index_basis,
    pullback,
    small_det,
    volume_form,
    wedge,
)
from utils.rng import random_spd

G2_TERMS = {
    (1, 2, 3): 1.0, (1, 4, 5): 1.0, (1, 6, 7): 1.0, (2, 4, 6): 1.0,
    (2, 5, 7): -1.0, (3, 4, 7): -1.0, (3, 5, 6): -1.0,
}


def random_form(rng, m, k):
    return KForm(m, k, rng.standard_normal(basis_size(m, k)))


def e(m, *index):
    return basis_form(m, tuple(index))


class TestBasis:
    def test_small_basis(self):
        assert list(multi_index_basis(3, 2)) == [(1, 2), (1, 3), (2, 3)]

    def test_scalar_basis(self):
        assert list(multi_index_basis(5, 0)) == [()]

    def test_count_matches_direct_enumeration(self):
        basis = multi_index_basis(7, 3)
        direct = [(a, b, c) for a in range(1, 8) for b in range(a + 1, 8) for c in range(b + 1, 8)]
        assert len(basis) == 35
        assert list(basis) == direct

    @pytest.mark.parametrize("m,k", [(3, -1), (3, 4)])
    def test_out_of_range_degree(self, m, k):
        with pytest.raises(DomainError):
            multi_index_basis(m, k)

    def test_coefficient_length_checked(self):
        with pytest.raises(DomainError):
            KForm(3, 2, [1.0, 2.0])


class TestWedge:
    def test_basis_products(self):
        assert wedge(e(2, 1), e(2, 2)).allclose(e(2, 1, 2))
        assert wedge(e(2, 2), e(2, 1)).allclose(-e(2, 1, 2))

    def test_bilinear_expansion(self):
        result = wedge(e(3, 1) + e(3, 2), e(3, 3))
        assert result.allclose(e(3, 1, 3) + e(3, 2, 3))

    def test_degree_overflow(self):
        with pytest.raises(DomainError):
            wedge(e(3, 1, 2), e(3, 2, 3))

    def test_dimension_mismatch(self):
        with pytest.raises(DomainError):
            wedge(e(3, 1), e(4, 1))

    def test_graded_anticommutativity(self, rng):
        for m, k, l in [(5, 2, 3), (6, 1, 3), (6, 3, 3), (7, 2, 2)]:
            a, b = random_form(rng, m, k), random_form(rng, m, l)
            assert wedge(a, b).allclose((-1) ** (k * l) * wedge(b, a), atol=1e-12)

    def test_associativity(self, rng):
        for _ in range(20):
            a, b, c = random_form(rng, 7, 2), random_form(rng, 7, 1), random_form(rng, 7, 3)
            assert wedge(wedge(a, b), c).allclose(wedge(a, wedge(b, c)), atol=1e-10)


class TestInterior:
    def test_basis_cases(self):
        assert interior([1, 0, 0], e(3, 1, 2)).allclose(e(3, 2))
        assert interior([0, 0, 1], e(3, 1, 2)).allclose(KForm.zero(3, 1))

    def test_g2_contraction_norm(self):
        phi = KForm.from_terms(7, 3, G2_TERMS)
        contracted = interior(np.eye(7)[0], phi)
        assert contracted.norm_sq() == pytest.approx(3.0)
        # brute force on basis pairs
        for i in range(7):
            for j in range(7):
                direct = evaluate(phi, np.column_stack([np.eye(7)[0], np.eye(7)[i], np.eye(7)[j]]))
                via_iota = evaluate(contracted, np.column_stack([np.eye(7)[i], np.eye(7)[j]]))
                assert direct == pytest.approx(via_iota)

    def test_zero_form_rejected(self):
        with pytest.raises(DomainError):
            interior([1.0], KForm(1, 0, [1.0]))

    def test_adjoint_of_wedge(self, rng):
        for m, k in [(4, 2), (6, 3), (8, 4)]:
            u = rng.standard_normal(m)
            alpha, beta = random_form(rng, m, k), random_form(rng, m, k - 1)
            u_flat = KForm(m, 1, u)
            lhs = inner(interior(u, alpha), beta)
            rhs = inner(alpha, wedge(u_flat, beta))
            assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-12)


class TestInnerAndStar:
    def test_examples(self):
        assert inner(e(2, 1, 2), e(2, 1, 2)) == pytest.approx(1.0)
        assert inner(KForm.from_terms(7, 3, G2_TERMS), KForm.from_terms(7, 3, G2_TERMS)) == pytest.approx(7.0)
        assert inner(e(1, 1), e(1, 1), MetricData(np.array([[4.0]]))) == pytest.approx(0.25)

    def test_degree_mismatch(self):
        with pytest.raises(DomainError):
            inner(e(3, 1), e(3, 1, 2))

    def test_plane_star(self):
        assert hodge_star(e(2, 1)).allclose(e(2, 2))
        assert hodge_star(e(2, 2)).allclose(-e(2, 1))
        assert hodge_star(hodge_star(e(2, 1))).allclose(-e(2, 1))

    def test_g2_dual(self):
        star = hodge_star(KForm.from_terms(7, 3, G2_TERMS))
        expected = KForm.from_terms(7, 4, {
            (4, 5, 6, 7): 1, (2, 3, 6, 7): 1, (2, 3, 4, 5): 1, (1, 3, 5, 7): 1,
            (1, 3, 4, 6): -1, (1, 2, 5, 6): -1, (1, 2, 4, 7): -1,
        })
        assert star.allclose(expected)

    def test_defining_identity_random_metrics(self, rng):
        for trial in range(300):
            m = int(rng.integers(1, 9))
            k = int(rng.integers(0, min(m, 4) + 1))
            metric = MetricData(random_spd(rng, m), orientation=1 if trial % 2 else -1)
            alpha, beta = random_form(rng, m, k), random_form(rng, m, k)
            lhs = wedge(alpha, hodge_star(beta, metric)).coeffs[0]
            value = inner(alpha, beta, metric)
            rhs = value * volume_form(metric).coeffs[0]
            assert abs(lhs - rhs) <= 1e-12 * (1.0 + abs(rhs)) * 100

    def test_double_star_sign(self, rng):
        for _ in range(30):
            m = int(rng.integers(1, 8))
            metric = MetricData(random_spd(rng, m))
            for k in range(m + 1):
                for index in multi_index_basis(m, k):
                    form = basis_form(m, index) if index else KForm(m, 0, [1.0])
                    twice = hodge_star(hodge_star(form, metric), metric)
                    assert twice.allclose((-1) ** (k * (m - k)) * form, atol=1e-9)

    def test_non_spd_metric_rejected(self):
        with pytest.raises(DomainError):
            MetricData(np.array([[1.0, 2.0], [2.0, 1.0]]))
        with pytest.raises(DomainError):
            MetricData(np.array([[1.0, 0.1], [0.0, 1.0]]))


class TestPullback:
    def test_identity_and_scaling(self, rng):
        beta = random_form(rng, 5, 3)
        assert pullback(np.eye(5), beta).allclose(beta, atol=1e-14)
        assert pullback(2.0 * np.eye(5), beta).allclose(8.0 * beta, atol=1e-12)

    def test_diagonal(self):
        a = np.diag([2.0, 3.0, 5.0, 7.0])
        assert pullback(a, e(4, 1, 3, 4)).allclose(70.0 * e(4, 1, 3, 4))

    def test_composition(self, rng):
        for _ in range(200):
            n, p, m = (int(x) for x in rng.integers(1, 9, size=3))
            k = int(rng.integers(0, min(n, p, m) + 1))
            a, b = rng.standard_normal((n, p)), rng.standard_normal((p, m))
            beta = random_form(rng, n, k)
            direct = pullback(a @ b, beta).coeffs
            staged = pullback(b, pullback(a, beta)).coeffs
            assert np.max(np.abs(direct - staged)) <= 1e-10 * (1.0 + np.max(np.abs(direct)))

    def test_matches_multilinear_evaluation(self, rng):
        for _ in range(100):
            n, m = int(rng.integers(2, 7)), int(rng.integers(2, 7))
            k = int(rng.integers(1, min(n, m) + 1))
            a = rng.standard_normal((n, m))
            beta = random_form(rng, n, k)
            pulled = pullback(a, beta)
            for pos, index in enumerate(multi_index_basis(m, k)):
                cols = [i - 1 for i in index]
                assert pulled.coeffs[pos] == pytest.approx(evaluate(beta, a[:, cols]), rel=1e-10, abs=1e-10)

    def test_degree_too_large(self):
        with pytest.raises(DomainError):
            pullback(np.ones((3, 2)), e(3, 1, 2, 3))

    def test_batched_matches_single(self, rng):
        from exterior_algebra import pullback_coefficients

        beta = random_form(rng, 6, 3)
        stack = rng.standard_normal((10, 6, 5))
        batched = pullback_coefficients(stack, beta)
        for i in range(10):
            assert np.allclose(batched[i], pullback(stack[i], beta).coeffs, atol=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.integers(min_value=1, max_value=6), st.integers(min_value=0, max_value=2**32 - 1))
def test_closed_form_minors_match_lu(k, seed):
    a = np.random.default_rng(seed).standard_normal((4, k, k))
    assert np.allclose(small_det(a), np.linalg.det(a), rtol=1e-10, atol=1e-12)


def test_compound_is_multiplicative(rng):
    a, b = rng.standard_normal((5, 4)), rng.standard_normal((4, 6))
    for k in range(0, 5):
        assert np.allclose(compound_matrix(a @ b, k), compound_matrix(a, k) @ compound_matrix(b, k), atol=1e-10)


def test_kform_json():
    form = KForm.from_terms(4, 2, {(1, 2): 1.5, (3, 4): -2.0})
    payload = kform_to_json(form)
    assert payload == {"m": 4, "k": 2, "coeffs": [1.5, 0.0, 0.0, 0.0, 0.0, -2.0]}
    assert kform_from_json(payload).allclose(form)
    with pytest.raises(DomainError):
        kform_from_json({"m": 4, "k": 2})
