"""
Batched k x k minors and compound matrices.

Minors of order k <= 4 use closed-form cofactor expansions; larger orders go
through numpy's LU-based determinant.
"""

import numpy as np

from exterior_algebra.basis import DomainError, basis_size, index_array


def _det2(a: np.ndarray) -> np.ndarray:
    return a[..., 0, 0] * a[..., 1, 1] - a[..., 0, 1] * a[..., 1, 0]


def _det3(a: np.ndarray) -> np.ndarray:
    return (
        a[..., 0, 0] * (a[..., 1, 1] * a[..., 2, 2] - a[..., 1, 2] * a[..., 2, 1])
        - a[..., 0, 1] * (a[..., 1, 0] * a[..., 2, 2] - a[..., 1, 2] * a[..., 2, 0])
        + a[..., 0, 2] * (a[..., 1, 0] * a[..., 2, 1] - a[..., 1, 1] * a[..., 2, 0])
    )


def _det4(a: np.ndarray) -> np.ndarray:
    # Laplace expansion along the first two rows
    s0 = a[..., 0, 0] * a[..., 1, 1] - a[..., 1, 0] * a[..., 0, 1]
    s1 = a[..., 0, 0] * a[..., 1, 2] - a[..., 1, 0] * a[..., 0, 2]
    s2 = a[..., 0, 0] * a[..., 1, 3] - a[..., 1, 0] * a[..., 0, 3]
    s3 = a[..., 0, 1] * a[..., 1, 2] - a[..., 1, 1] * a[..., 0, 2]
    s4 = a[..., 0, 1] * a[..., 1, 3] - a[..., 1, 1] * a[..., 0, 3]
    s5 = a[..., 0, 2] * a[..., 1, 3] - a[..., 1, 2] * a[..., 0, 3]
    c5 = a[..., 2, 2] * a[..., 3, 3] - a[..., 3, 2] * a[..., 2, 3]
    c4 = a[..., 2, 1] * a[..., 3, 3] - a[..., 3, 1] * a[..., 2, 3]
    c3 = a[..., 2, 1] * a[..., 3, 2] - a[..., 3, 1] * a[..., 2, 2]
    c2 = a[..., 2, 0] * a[..., 3, 3] - a[..., 3, 0] * a[..., 2, 3]
    c1 = a[..., 2, 0] * a[..., 3, 2] - a[..., 3, 0] * a[..., 2, 2]
    c0 = a[..., 2, 0] * a[..., 3, 1] - a[..., 3, 0] * a[..., 2, 1]
    return s0 * c5 - s1 * c4 + s2 * c3 + s3 * c2 - s4 * c1 + s5 * c0


def small_det(a: np.ndarray) -> np.ndarray:
    """
    Determinants of a stack of square matrices, shape (..., k, k) -> (...).

    Args:
        a: Stack of k x k matrices

    Returns:
        Array of determinants
    """
    k = a.shape[-1]
    if a.shape[-2] != k:
        raise DomainError(f"expected square blocks, got {a.shape[-2:]}")
    if k == 0:
        return np.ones(a.shape[:-2])
    if k == 1:
        return a[..., 0, 0].copy()
    if k == 2:
        return _det2(a)
    if k == 3:
        return _det3(a)
    if k == 4:
        return _det4(a)
    return np.linalg.det(a)


def submatrix_dets(a: np.ndarray, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
    """
    det(a[rows[p], cols[p]]) for every pair p, batched over leading axes of a.

    Args:
        a: Array of shape (..., n, m)
        rows: (P, k) array of 0-based row positions
        cols: (P, k) array of 0-based column positions

    Returns:
        Array of shape (..., P)
    """
    rows = np.asarray(rows, dtype=np.intp)
    cols = np.asarray(cols, dtype=np.intp)
    if rows.shape != cols.shape:
        raise DomainError(f"row/column selections differ in shape: {rows.shape} vs {cols.shape}")
    if rows.shape[1] == 0:
        return np.ones(a.shape[:-2] + (rows.shape[0],))
    sub = a[..., rows[:, :, None], cols[:, None, :]]
    return small_det(sub)


def compound_matrix(a: np.ndarray, k: int) -> np.ndarray:
    """
    k-th compound matrix: entry (J, I) is the minor det(a[J, I]).

    Rows run over the lexicographic k-subsets of the n rows of a, columns over
    the k-subsets of its m columns. Supports stacked input (..., n, m).

    Args:
        a: Matrix or stack of matrices
        k: Minor order, 0 <= k <= min(n, m)

    Returns:
        Array of shape (..., C(n,k), C(m,k))
    """
    a = np.asarray(a, dtype=float)
    n, m = a.shape[-2], a.shape[-1]
    if k < 0 or k > min(n, m):
        raise DomainError(f"compound of order {k} undefined for a {n}x{m} matrix")
    row_sets = index_array(n, k)
    col_sets = index_array(m, k)
    cn, cm = basis_size(n, k), basis_size(m, k)
    rows = np.repeat(row_sets, cm, axis=0)
    cols = np.tile(col_sets, (cn, 1))
    dets = submatrix_dets(a, rows, cols)
    return dets.reshape(a.shape[:-2] + (cn, cm))
