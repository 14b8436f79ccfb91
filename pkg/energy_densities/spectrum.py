"""
Singular-value energy densities of a linear map between inner-product spaces.

The metric-weighted spectrum a_1 >= ... >= a_m is the eigenvalue list of
G^{-1} A^T H A, obtained from the symmetric matrix G^{-1/2} A^T H A G^{-1/2}.
"""

from dataclasses import dataclass
from functools import cached_property
from typing import Optional, Tuple

import numpy as np

from exterior_algebra import DomainError, validate_spd
from utils import config


class SpectrumError(ValueError):
    """Eigen-solver failure or a spectrum entry well below zero."""

    def __init__(self, message: str, condition: Optional[float] = None):
        super().__init__(message if condition is None else f"{message} (condition number {condition:.3e})")
        self.condition = condition


def spd_power(matrix: np.ndarray, power: float) -> np.ndarray:
    """matrix**power for an SPD matrix via its eigendecomposition."""
    eigenvalues, vectors = np.linalg.eigh(matrix)
    return (vectors * eigenvalues ** power) @ vectors.T


@dataclass(frozen=True, eq=False)
class LinearMapData:
    """df_x as an n x m matrix with source metric G (m x m) and target metric H (n x n)."""
    A: np.ndarray
    src_metric: Optional[np.ndarray] = None
    tgt_metric: Optional[np.ndarray] = None

    def __post_init__(self):
        a = np.array(self.A, dtype=float)
        if a.ndim != 2:
            raise DomainError(f"A must be a matrix, got shape {a.shape}")
        n, m = a.shape
        G = np.eye(m) if self.src_metric is None else validate_spd(self.src_metric, "source metric")
        H = np.eye(n) if self.tgt_metric is None else validate_spd(self.tgt_metric, "target metric")
        if G.shape != (m, m) or H.shape != (n, n):
            raise DomainError(f"metrics {G.shape}, {H.shape} do not fit a {n}x{m} map")
        object.__setattr__(self, "A", a)
        object.__setattr__(self, "src_metric", G)
        object.__setattr__(self, "tgt_metric", H)

    @classmethod
    def identity(cls, A) -> "LinearMapData":
        """Map data with identity metrics on both sides."""
        return cls(A)

    @property
    def m(self) -> int:
        return self.A.shape[1]

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @cached_property
    def whitened(self) -> np.ndarray:
        """H^{1/2} A G^{-1/2}: the same map written in orthonormal frames."""
        return metric_whiten(self.A, self.src_metric, self.tgt_metric)


@dataclass(frozen=True)
class SingularSpectrum:
    """Non-increasing, nonnegative eigenvalues a_i of the metric Gram operator."""
    values: Tuple[float, ...]

    def __iter__(self):
        return iter(self.values)

    def __len__(self):
        return len(self.values)

    def as_array(self) -> np.ndarray:
        return np.array(self.values, dtype=float)


def metric_whiten(a: np.ndarray, G: Optional[np.ndarray] = None, H: Optional[np.ndarray] = None) -> np.ndarray:
    """
    Rewrite an n x m map in orthonormal frames: H^{1/2} A G^{-1/2}.

    Args:
        a: n x m matrix (or stack)
        G: Source metric, identity if None
        H: Target metric, identity if None

    Returns:
        Whitened matrix of the same shape
    """
    out = np.asarray(a, dtype=float)
    if H is not None:
        out = spd_power(np.asarray(H, dtype=float), 0.5) @ out
    if G is not None:
        out = out @ spd_power(np.asarray(G, dtype=float), -0.5)
    return out


def singular_spectrum(L: LinearMapData) -> SingularSpectrum:
    """
    Eigenvalues of G^{-1} A^T H A, sorted non-increasing.

    Args:
        L: Linear map data

    Returns:
        SingularSpectrum of length m
    """
    b = L.whitened
    gram = b.T @ b
    try:
        eigenvalues = np.linalg.eigvalsh(0.5 * (gram + gram.T))
    except np.linalg.LinAlgError as e:
        raise SpectrumError(f"eigen-solver failed: {e}", float(np.linalg.cond(gram))) from e
    scale = max(1.0, float(np.max(np.abs(eigenvalues))) if eigenvalues.size else 1.0)
    if eigenvalues.size and float(eigenvalues.min()) < -config.CLAMP_TOL * scale:
        raise SpectrumError(
            f"spectrum entry {eigenvalues.min():.3e} is negative",
            float(np.linalg.cond(L.src_metric)),
        )
    eigenvalues = np.clip(eigenvalues, 0.0, None)[::-1]
    return SingularSpectrum(tuple(float(v) for v in eigenvalues))


def _check_exponent(p: float, name: str = "p"):
    if not p > 0:
        raise DomainError(f"{name} must be positive, got {p}")


def schatten_p(L: LinearMapData, p: float) -> float:
    """
    |A|_p = (sum a_i^{p/2})^{1/p}; the metric Frobenius norm for p = 2.

    Args:
        L: Linear map data
        p: Exponent, p > 0

    Returns:
        |A|_p
    """
    _check_exponent(p)
    a = singular_spectrum(L).as_array()
    return float(np.sum(a ** (p / 2.0)) ** (1.0 / p))


def sigma_pq(L: LinearMapData, p: float, q: float) -> float:
    """sigma_{p,q} = |A|_p^q; sigma_{2,p} is |df|^p."""
    _check_exponent(q, "q")
    return schatten_p(L, p) ** q


def tau_m(L: LinearMapData, src_volume_scale: float = 1.0) -> float:
    """
    m-dimensional volume distortion sqrt(det(G^{-1} A^T H A)) of an immersion,
    multiplied by src_volume_scale.

    Args:
        L: Map data with n >= m
        src_volume_scale: Factor from the metric frame to the chosen volume form

    Returns:
        tau_m(A)
    """
    if L.n < L.m:
        raise DomainError(f"tau_m needs n >= m, got n={L.n}, m={L.m}")
    if not src_volume_scale > 0:
        raise DomainError(f"volume scale must be positive, got {src_volume_scale}")
    singular = np.linalg.svd(L.whitened, compute_uv=False)
    return float(np.prod(singular) * src_volume_scale)


def tau_tilde(L: LinearMapData, tgt_volume_scale: float = 1.0) -> float:
    """
    Coarea factor sqrt(det(A G^{-1} A^T H)) = sqrt(det H) sqrt(det(A G^{-1} A^T))
    of a submersion, measured against the metric volume of H and multiplied by
    tgt_volume_scale. Zero when rank(A) < n.

    Args:
        L: Map data with m >= n
        tgt_volume_scale: Factor from the metric frame to the chosen volume form

    Returns:
        tau_tilde(A)
    """
    if L.m < L.n:
        raise DomainError(f"tau_tilde needs m >= n, got m={L.m}, n={L.n}")
    if not tgt_volume_scale > 0:
        raise DomainError(f"volume scale must be positive, got {tgt_volume_scale}")
    singular = np.linalg.svd(L.whitened, compute_uv=False)
    return float(np.prod(singular) * tgt_volume_scale)


def norm_comparison(L: LinearMapData, p: float, p_prime: float) -> Tuple[float, float]:
    """
    Power-mean comparison |A|_p <= m^{1/p - 1/p'} |A|_{p'} for p <= p'.

    Returns:
        (lhs, rhs)
    """
    _check_exponent(p)
    if p > p_prime:
        raise DomainError(f"norm comparison needs p <= p', got {p} > {p_prime}")
    lhs = schatten_p(L, p)
    rhs = L.m ** (1.0 / p - 1.0 / p_prime) * schatten_p(L, p_prime)
    return lhs, rhs


def holder_energy_bound(e_p: float, e_q: float, volume: float, p: float, q: float) -> Tuple[float, float]:
    """
    Integrated Hoelder comparison E_p <= vol^{1 - p/q} E_q^{p/q} for 1 <= p <= q.

    Returns:
        (E_p, bound)
    """
    _check_exponent(p)
    if p > q:
        raise DomainError(f"Hoelder comparison needs p <= q, got {p} > {q}")
    return float(e_p), float(volume ** (1.0 - p / q) * e_q ** (p / q))


def batch_singular_values(a: np.ndarray) -> np.ndarray:
    """Singular values of a stack of matrices in orthonormal frames, shape (..., min(n, m))."""
    return np.linalg.svd(np.asarray(a, dtype=float), compute_uv=False)


def batch_schatten(a: np.ndarray, p: float) -> np.ndarray:
    """|A|_p for a stack of matrices with identity metrics."""
    _check_exponent(p)
    s = batch_singular_values(a)
    return np.sum(s ** p, axis=-1) ** (1.0 / p)
