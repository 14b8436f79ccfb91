"""
Mixed forms Phi = sum Phi_IJ e'_J ^ (*e_I) on R^m x R^n and their value on
graphs of linear maps.
"""

from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Optional, Tuple

import numpy as np
from scipy.special import factorial

from energy_densities import metric_whiten
from exterior_algebra import (
    DomainError,
    KForm,
    basis_size,
    compound_matrix,
    evaluate,
    hodge_star,
    index_array,
    index_lookup,
    multi_index_basis,
    shift_form,
    submatrix_dets,
    wedge,
)


@dataclass(frozen=True, eq=False)
class MixedForm:
    """Coefficient table Phi_IJ over I in I_k^m (source) and J in I_k^n (target)."""
    m: int
    n: int
    k: int
    coeffs: np.ndarray

    def __post_init__(self):
        table = np.array(self.coeffs, dtype=float)
        shape = (basis_size(self.m, self.k), basis_size(self.n, self.k))
        if self.k < 0 or self.k > min(self.m, self.n):
            raise DomainError(f"no degree-{self.k} mixed forms for m={self.m}, n={self.n}")
        if table.shape != shape:
            raise DomainError(f"mixed form table must be {shape}, got {table.shape}")
        table.setflags(write=False)
        object.__setattr__(self, "coeffs", table)

    @cached_property
    def sup_norm(self) -> float:
        """sqrt(sum Phi_IJ^2), the pointwise norm in orthonormal frames."""
        return float(np.sqrt(np.sum(self.coeffs ** 2)))

    @classmethod
    def from_product(cls, source: KForm, target: KForm) -> "MixedForm":
        """Phi_IJ = c_I b_J for a source k-form c and target k-form b."""
        if source.k != target.k:
            raise DomainError(f"degrees differ: {source.k} vs {target.k}")
        return cls(source.m, target.m, source.k, np.outer(source.coeffs, target.coeffs))


def _check_shape(phi: MixedForm, a: np.ndarray):
    if a.shape[-2:] != (phi.n, phi.m):
        raise DomainError(f"map of shape {a.shape[-2:]} does not fit a mixed form on R^{phi.m} x R^{phi.n}")


def evaluate_mixed(phi: MixedForm, a: np.ndarray) -> float:
    """
    ((1, f)^* Phi) / vol at a point where df = A, in orthonormal frames.

    Args:
        phi: Mixed form
        a: n x m matrix

    Returns:
        sum_{I,J} Phi_IJ det(A[J, I])
    """
    a = np.asarray(a, dtype=float)
    _check_shape(phi, a)
    return float(np.sum(phi.coeffs * compound_matrix(a, phi.k).T))


def evaluate_mixed_batch(phi: MixedForm, a: np.ndarray) -> np.ndarray:
    """evaluate_mixed over a stack (N, n, m), expanding only the support of Phi."""
    a = np.asarray(a, dtype=float)
    _check_shape(phi, a)
    src, tgt = np.nonzero(phi.coeffs)
    if src.size == 0:
        return np.zeros(a.shape[:-2])
    rows = index_array(phi.n, phi.k)[tgt]
    cols = index_array(phi.m, phi.k)[src]
    return submatrix_dets(a, rows, cols) @ phi.coeffs[src, tgt]


def evaluate_mixed_metric(phi: MixedForm, a: np.ndarray, G: np.ndarray, H: np.ndarray) -> float:
    """evaluate_mixed for general metrics, with Phi given in orthonormal frames."""
    return evaluate_mixed(phi, metric_whiten(a, G, H))


@lru_cache(maxsize=None)
def _product_table(m: int, n: int, k: int) -> Tuple[np.ndarray, np.ndarray]:
    # position and sign of e'_J ^ *e_I in the degree-m basis of R^{m+n}
    total = m + n
    lookup = index_lookup(total, m)
    pos = np.zeros((basis_size(m, k), basis_size(n, k)), dtype=np.intp)
    sign = np.zeros(pos.shape)
    for a, index in enumerate(multi_index_basis(m, k)):
        star = shift_form(hodge_star(KForm.from_terms(m, k, {index: 1.0})), total, 0)
        for b, target in enumerate(multi_index_basis(n, k)):
            prime = shift_form(KForm.from_terms(n, k, {target: 1.0}), total, m)
            product = wedge(prime, star)
            (key, value), = product.terms().items()
            pos[a, b] = lookup[key]
            sign[a, b] = value
    return pos, sign


def mixed_to_form(phi: MixedForm) -> KForm:
    """Phi as an honest m-form on R^{m+n} (source coordinates first)."""
    pos, sign = _product_table(phi.m, phi.n, phi.k)
    coeffs = np.zeros(basis_size(phi.m + phi.n, phi.m))
    np.add.at(coeffs, pos.ravel(), (sign * phi.coeffs).ravel())
    return KForm(phi.m + phi.n, phi.m, coeffs)


def graph_oracle(phi: MixedForm, a: np.ndarray, form: Optional[KForm] = None) -> float:
    """
    Evaluate Phi on the graph frame (e_i, A e_i), i = 1..m, by brute force.

    Args:
        phi: Mixed form
        a: n x m matrix
        form: Precomputed mixed_to_form(phi), if available

    Returns:
        Phi(e_1 + A e_1, ..., e_m + A e_m)
    """
    a = np.asarray(a, dtype=float)
    _check_shape(phi, a)
    big = mixed_to_form(phi) if form is None else form
    frame = np.vstack([np.eye(phi.m), a])
    return float(evaluate(big, frame))


def lemma41_constant(m: int, n: int, k: int) -> float:
    """k! C(m,k) C(n,k)."""
    return float(factorial(k, exact=True) * basis_size(m, k) * basis_size(n, k))


def lemma41_bound(phi: MixedForm, a: np.ndarray) -> Tuple[float, float]:
    """
    The loose sigma_k calibration bound for a bounded mixed form.

    Returns:
        (evaluate_mixed(Phi, A), k! C(m,k) C(n,k) |Phi| |A|_2^k)
    """
    lhs = evaluate_mixed(phi, a)
    frobenius = float(np.linalg.norm(np.asarray(a, dtype=float)))
    rhs = lemma41_constant(phi.m, phi.n, phi.k) * phi.sup_norm * frobenius ** phi.k
    return lhs, rhs
