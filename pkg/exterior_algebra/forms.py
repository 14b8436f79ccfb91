"""
Constant-coefficient k-forms on R^m and the operations on them: wedge,
interior product, metric inner product, Hodge star, pullback along a linear
map and evaluation on vectors.
"""

from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Any, Dict, Iterable, Mapping, Optional, Tuple, Union

import numpy as np

from exterior_algebra.basis import (
    DomainError,
    MultiIndex,
    basis_size,
    check_multi_index,
    complement,
    index_array,
    index_lookup,
    merge_sign,
    multi_index_basis,
)
from exterior_algebra.compound import compound_matrix, submatrix_dets
from utils import config


def validate_spd(matrix: Any, name: str = "metric") -> np.ndarray:
    """
    Check that a matrix is symmetric (1e-12 relative) and positive-definite.

    Args:
        matrix: Square array-like
        name: Label used in error messages

    Returns:
        The matrix as a float array, exactly symmetrized
    """
    mat = np.array(matrix, dtype=float)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise DomainError(f"{name} must be square, got shape {mat.shape}")
    if not np.all(np.isfinite(mat)):
        raise DomainError(f"{name} has non-finite entries")
    scale = max(float(np.max(np.abs(mat))) if mat.size else 0.0, np.finfo(float).tiny)
    asym = float(np.max(np.abs(mat - mat.T))) if mat.size else 0.0
    if asym > config.SPD_SYM_TOL * scale:
        raise DomainError(f"{name} is not symmetric (max asymmetry {asym:.3e})")
    mat = 0.5 * (mat + mat.T)
    if mat.size and float(np.min(np.linalg.eigvalsh(mat))) <= 0.0:
        raise DomainError(f"{name} is not positive-definite")
    return mat


@dataclass(frozen=True, eq=False)
class KForm:
    """Alternating k-form on R^m as a dense coefficient vector over the lexicographic basis."""
    m: int
    k: int
    coeffs: np.ndarray

    def __post_init__(self):
        if self.m < 0 or self.k < 0 or self.k > self.m:
            raise DomainError(f"no degree-{self.k} forms on R^{self.m}")
        coeffs = np.array(self.coeffs, dtype=float).reshape(-1)
        expected = basis_size(self.m, self.k)
        if coeffs.size != expected:
            raise DomainError(
                f"degree-{self.k} form on R^{self.m} needs {expected} coefficients, got {coeffs.size}"
            )
        coeffs.setflags(write=False)
        object.__setattr__(self, "coeffs", coeffs)

    @classmethod
    def zero(cls, m: int, k: int) -> "KForm":
        return cls(m, k, np.zeros(basis_size(m, k)))

    @classmethod
    def from_terms(cls, m: int, k: int, terms: Union[Mapping[MultiIndex, float], Iterable[Tuple[MultiIndex, float]]]) -> "KForm":
        """
        Build a form from (multi-index, coefficient) terms.

        Args:
            m: Ambient dimension
            k: Degree
            terms: Mapping or iterable of (increasing 1-based tuple, coefficient)

        Returns:
            KForm with the given terms summed
        """
        lookup = index_lookup(m, k)
        coeffs = np.zeros(basis_size(m, k))
        items = terms.items() if isinstance(terms, Mapping) else terms
        for index, value in items:
            index = check_multi_index(m, index)
            if len(index) != k:
                raise DomainError(f"multi-index {index} has degree {len(index)}, expected {k}")
            coeffs[lookup[index]] += float(value)
        return cls(m, k, coeffs)

    def terms(self, atol: float = 0.0) -> Dict[MultiIndex, float]:
        """Nonzero coefficients keyed by multi-index."""
        return {
            index: float(c)
            for index, c in zip(multi_index_basis(self.m, self.k), self.coeffs)
            if abs(c) > atol
        }

    def norm_sq(self) -> float:
        """Squared norm for the identity metric."""
        return float(self.coeffs @ self.coeffs)

    def allclose(self, other: "KForm", atol: float = 1e-10) -> bool:
        return (
            self.m == other.m
            and self.k == other.k
            and bool(np.allclose(self.coeffs, other.coeffs, rtol=0.0, atol=atol))
        )

    def _check_same(self, other: "KForm"):
        if not isinstance(other, KForm):
            raise TypeError(f"expected KForm, got {type(other).__name__}")
        if other.m != self.m or other.k != self.k:
            raise DomainError(
                f"cannot combine a degree-{self.k} form on R^{self.m} with a degree-{other.k} form on R^{other.m}"
            )

    def __add__(self, other: "KForm") -> "KForm":
        self._check_same(other)
        return KForm(self.m, self.k, self.coeffs + other.coeffs)

    def __sub__(self, other: "KForm") -> "KForm":
        self._check_same(other)
        return KForm(self.m, self.k, self.coeffs - other.coeffs)

    def __neg__(self) -> "KForm":
        return KForm(self.m, self.k, -self.coeffs)

    def __mul__(self, scalar: float) -> "KForm":
        return KForm(self.m, self.k, float(scalar) * self.coeffs)

    __rmul__ = __mul__

    def __truediv__(self, scalar: float) -> "KForm":
        return KForm(self.m, self.k, self.coeffs / float(scalar))

    def __repr__(self) -> str:
        return f"KForm(m={self.m}, k={self.k}, terms={self.terms(atol=0.0)})"


@dataclass(frozen=True, eq=False)
class MetricData:
    """Constant SPD metric on R^m with an orientation sign."""
    G: np.ndarray
    orientation: int = 1

    def __post_init__(self):
        G = validate_spd(self.G, "metric G")
        G.setflags(write=False)
        object.__setattr__(self, "G", G)
        if self.orientation not in (1, -1):
            raise DomainError(f"orientation must be +1 or -1, got {self.orientation}")

    @classmethod
    def identity(cls, m: int, orientation: int = 1) -> "MetricData":
        return cls(np.eye(m), orientation)

    @property
    def m(self) -> int:
        return self.G.shape[0]

    @cached_property
    def inverse(self) -> np.ndarray:
        return np.linalg.inv(self.G)

    @cached_property
    def sqrt_det(self) -> float:
        return float(np.sqrt(np.linalg.det(self.G)))

    @cached_property
    def is_identity(self) -> bool:
        return bool(np.array_equal(self.G, np.eye(self.m)))


def basis_form(m: int, index: MultiIndex, coeff: float = 1.0) -> KForm:
    """coeff * e_I on R^m."""
    index = check_multi_index(m, index)
    return KForm.from_terms(m, len(index), {index: coeff})


def volume_form(metric: MetricData) -> KForm:
    """orientation * sqrt(det G) * e^{1..m}."""
    return KForm(metric.m, metric.m, [metric.orientation * metric.sqrt_det])


def shift_form(alpha: KForm, ambient: int, offset: int) -> KForm:
    """
    Embed a form on R^m into R^ambient on the coordinates offset+1..offset+m.

    Args:
        alpha: Form on R^m
        ambient: Target dimension
        offset: Number of leading coordinates skipped

    Returns:
        Form of the same degree on R^ambient
    """
    if offset < 0 or offset + alpha.m > ambient:
        raise DomainError(f"cannot place R^{alpha.m} at offset {offset} inside R^{ambient}")
    terms = {tuple(i + offset for i in index): c for index, c in alpha.terms().items()}
    return KForm.from_terms(ambient, alpha.k, terms)


@lru_cache(maxsize=None)
def _wedge_table(m: int, k: int, l: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    lookup = index_lookup(m, k + l)
    left, right, out, sign = [], [], [], []
    for a, first in enumerate(multi_index_basis(m, k)):
        for b, second in enumerate(multi_index_basis(m, l)):
            s = merge_sign(first, second)
            if s:
                left.append(a)
                right.append(b)
                out.append(lookup[tuple(sorted(first + second))])
                sign.append(s)
    return (
        np.array(left, dtype=np.intp),
        np.array(right, dtype=np.intp),
        np.array(out, dtype=np.intp),
        np.array(sign, dtype=float),
    )


def wedge(alpha: KForm, beta: KForm) -> KForm:
    """
    Exterior product alpha ^ beta.

    Args:
        alpha: Degree-k form on R^m
        beta: Degree-l form on R^m

    Returns:
        Degree-(k+l) form
    """
    if alpha.m != beta.m:
        raise DomainError(f"wedge of forms on R^{alpha.m} and R^{beta.m}")
    m, k, l = alpha.m, alpha.k, beta.k
    if k + l > m:
        raise DomainError(f"degree {k}+{l} exceeds the dimension {m}")
    left, right, out, sign = _wedge_table(m, k, l)
    coeffs = np.zeros(basis_size(m, k + l))
    np.add.at(coeffs, out, sign * alpha.coeffs[left] * beta.coeffs[right])
    return KForm(m, k + l, coeffs)


@lru_cache(maxsize=None)
def _interior_table(m: int, k: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    lookup = index_lookup(m, k - 1)
    form_pos, vec_pos, out, sign = [], [], [], []
    for a, index in enumerate(multi_index_basis(m, k)):
        for r, i in enumerate(index):
            form_pos.append(a)
            vec_pos.append(i - 1)
            out.append(lookup[index[:r] + index[r + 1:]])
            sign.append(-1.0 if r % 2 else 1.0)
    return (
        np.array(form_pos, dtype=np.intp),
        np.array(vec_pos, dtype=np.intp),
        np.array(out, dtype=np.intp),
        np.array(sign, dtype=float),
    )


def interior_matrix(alpha: KForm) -> np.ndarray:
    """
    Matrix R with coeffs(iota_u alpha) = u @ R, shape (m, C(m, k-1)).

    Row i holds the coefficients of iota_{e_i} alpha.
    """
    if alpha.k == 0:
        raise DomainError("interior product of a 0-form")
    form_pos, vec_pos, out, sign = _interior_table(alpha.m, alpha.k)
    mat = np.zeros((alpha.m, basis_size(alpha.m, alpha.k - 1)))
    np.add.at(mat, (vec_pos, out), sign * alpha.coeffs[form_pos])
    return mat


def interior(u: Any, alpha: KForm) -> KForm:
    """
    Interior product iota_u alpha, so (iota_u alpha)(v2..vk) = alpha(u, v2..vk).

    Args:
        u: Vector of length m
        alpha: Form of degree k >= 1

    Returns:
        Degree-(k-1) form
    """
    u = np.asarray(u, dtype=float).reshape(-1)
    if alpha.k == 0:
        raise DomainError("interior product of a 0-form")
    if u.size != alpha.m:
        raise DomainError(f"vector of length {u.size} acting on forms over R^{alpha.m}")
    return KForm(alpha.m, alpha.k - 1, u @ interior_matrix(alpha))


def gram_matrix(m: int, k: int, metric: Optional[MetricData] = None) -> np.ndarray:
    """Gram matrix of the degree-k basis: the k-th compound of G^{-1}."""
    if metric is None or metric.is_identity:
        return np.eye(basis_size(m, k))
    if metric.m != m:
        raise DomainError(f"metric on R^{metric.m} used for forms on R^{m}")
    return compound_matrix(metric.inverse, k)


def inner(alpha: KForm, beta: KForm, metric: Optional[MetricData] = None) -> float:
    """
    Inner product on Lambda^k induced by the inverse metric.

    Args:
        alpha, beta: Forms of the same degree on R^m
        metric: Metric data (identity when omitted)

    Returns:
        <alpha, beta>_g
    """
    if alpha.m != beta.m or alpha.k != beta.k:
        raise DomainError(
            f"inner product of degree-{alpha.k} and degree-{beta.k} forms (dims {alpha.m}, {beta.m})"
        )
    return float(alpha.coeffs @ gram_matrix(alpha.m, alpha.k, metric) @ beta.coeffs)


@lru_cache(maxsize=None)
def _star_table(m: int, k: int) -> Tuple[np.ndarray, np.ndarray]:
    lookup = index_lookup(m, m - k)
    target, sign = [], []
    for index in multi_index_basis(m, k):
        rest = complement(m, index)
        target.append(lookup[rest])
        sign.append(float(merge_sign(index, rest)))
    return np.array(target, dtype=np.intp), np.array(sign, dtype=float)


def hodge_star(alpha: KForm, metric: Optional[MetricData] = None) -> KForm:
    """
    Hodge star, defined by beta ^ *alpha = <beta, alpha>_g vol_g.

    On the identity metric *e_I = sign(I, I^c) e_{I^c}; in general the
    coefficients are first raised with the compound of G^{-1}.

    Args:
        alpha: Degree-k form on R^m
        metric: Metric data (identity when omitted)

    Returns:
        Degree-(m-k) form
    """
    m, k = alpha.m, alpha.k
    if metric is not None and metric.m != m:
        raise DomainError(f"metric on R^{metric.m} used for forms on R^{m}")
    raised = gram_matrix(m, k, metric) @ alpha.coeffs
    target, sign = _star_table(m, k)
    coeffs = np.zeros(basis_size(m, m - k))
    coeffs[target] = sign * raised
    if metric is not None:
        coeffs *= metric.orientation * metric.sqrt_det
    return KForm(m, m - k, coeffs)


def pullback_coefficients(a: np.ndarray, beta: KForm) -> np.ndarray:
    """
    Coefficients of A^*beta for a single matrix or a stack (..., n, m).

    (A^*beta)_I = sum_J beta_J det(A[J, I]); only J in the support of beta
    are expanded.
    """
    a = np.asarray(a, dtype=float)
    n, m = a.shape[-2], a.shape[-1]
    k = beta.k
    if beta.m != n:
        raise DomainError(f"form on R^{beta.m} pulled back along a map into R^{n}")
    if k > m:
        raise DomainError(f"degree-{k} form pulled back to R^{m}")
    support = np.flatnonzero(beta.coeffs)
    cm = basis_size(m, k)
    if support.size == 0:
        return np.zeros(a.shape[:-2] + (cm,))
    row_sets = index_array(n, k)[support]
    col_sets = index_array(m, k)
    rows = np.repeat(row_sets, cm, axis=0)
    cols = np.tile(col_sets, (support.size, 1))
    dets = submatrix_dets(a, rows, cols).reshape(a.shape[:-2] + (support.size, cm))
    return np.einsum("s,...si->...i", beta.coeffs[support], dets)


def pullback(a: Any, beta: KForm) -> KForm:
    """
    Pullback of a form on R^n along the linear map A: R^m -> R^n.

    Args:
        a: n x m matrix
        beta: Degree-k form on R^n

    Returns:
        Degree-k form on R^m
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 2:
        raise DomainError(f"pullback needs a single matrix, got shape {a.shape}")
    return KForm(a.shape[1], beta.k, pullback_coefficients(a, beta))


def evaluate(alpha: KForm, vectors: Any) -> Union[float, np.ndarray]:
    """
    alpha(v_1, ..., v_k) = sum_I alpha_I det(V[I, :]).

    Args:
        alpha: Degree-k form on R^m
        vectors: m x k matrix whose columns are the arguments, or a stack (..., m, k)

    Returns:
        Scalar, or array over the stack axes
    """
    v = np.asarray(vectors, dtype=float)
    if v.ndim < 2 or v.shape[-2] != alpha.m or v.shape[-1] != alpha.k:
        raise DomainError(f"degree-{alpha.k} form on R^{alpha.m} evaluated on shape {v.shape}")
    support = np.flatnonzero(alpha.coeffs)
    if support.size == 0:
        values = np.zeros(v.shape[:-2])
    else:
        rows = index_array(alpha.m, alpha.k)[support]
        cols = np.tile(np.arange(alpha.k, dtype=np.intp), (support.size, 1))
        values = submatrix_dets(v, rows, cols) @ alpha.coeffs[support]
    if v.ndim == 2:
        return float(values)
    return values


def two_form_matrix(omega: KForm) -> np.ndarray:
    """Antisymmetric matrix W with W[i, j] = omega(e_i, e_j)."""
    if omega.k != 2:
        raise DomainError(f"expected a 2-form, got degree {omega.k}")
    mat = np.zeros((omega.m, omega.m))
    for (i, j), c in omega.terms().items():
        mat[i - 1, j - 1] = c
        mat[j - 1, i - 1] = -c
    return mat


def kform_to_json(alpha: KForm) -> Dict[str, Any]:
    """{"m", "k", "coeffs"} with coefficients in lexicographic order."""
    return {"m": alpha.m, "k": alpha.k, "coeffs": [float(c) for c in alpha.coeffs]}


def kform_from_json(payload: Mapping[str, Any]) -> KForm:
    """Inverse of kform_to_json; raises DomainError on malformed input."""
    try:
        m, k, coeffs = int(payload["m"]), int(payload["k"]), payload["coeffs"]
    except (KeyError, TypeError, ValueError) as e:
        raise DomainError(f"malformed KForm payload: {e}") from e
    return KForm(m, k, coeffs)
