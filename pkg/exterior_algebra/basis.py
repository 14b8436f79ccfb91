"""
Multi-index bookkeeping for the lexicographic basis e_I of Lambda^k(R^m)*.

Indices are 1-based: I = (i_1 < ... < i_k) with 1 <= i_1 and i_k <= m.
"""

from functools import lru_cache
from itertools import combinations
from typing import Dict, Sequence, Tuple

import numpy as np
from scipy.special import comb

MultiIndex = Tuple[int, ...]


class DomainError(ValueError):
    """An argument lies outside the domain of an exterior-algebra operation."""


def basis_size(m: int, k: int) -> int:
    """Number of degree-k basis elements on R^m, C(m, k)."""
    if k < 0 or k > m:
        return 0
    return int(comb(m, k, exact=True))


@lru_cache(maxsize=None)
def multi_index_basis(m: int, k: int) -> Tuple[MultiIndex, ...]:
    """
    All strictly increasing k-tuples from {1..m} in lexicographic order.

    Args:
        m: Ambient dimension
        k: Degree

    Returns:
        Tuple of C(m, k) multi-indices; (m, 0) gives ((),)
    """
    if m < 0 or k < 0 or k > m:
        raise DomainError(f"no degree-{k} basis on R^{m}")
    return tuple(combinations(range(1, m + 1), k))


@lru_cache(maxsize=None)
def index_lookup(m: int, k: int) -> Dict[MultiIndex, int]:
    """Position of each multi-index in the lexicographic basis."""
    return {index: pos for pos, index in enumerate(multi_index_basis(m, k))}


@lru_cache(maxsize=None)
def index_array(m: int, k: int) -> np.ndarray:
    """Basis as a (C(m,k), k) array of 0-based row/column positions."""
    arr = np.array(multi_index_basis(m, k), dtype=np.intp).reshape(basis_size(m, k), k)
    arr = arr - 1
    arr.setflags(write=False)
    return arr


def check_multi_index(m: int, index: Sequence[int]) -> MultiIndex:
    """Validate a multi-index against ambient dimension m and return it as a tuple."""
    index = tuple(int(i) for i in index)
    if any(i < 1 or i > m for i in index):
        raise DomainError(f"multi-index {index} has entries outside [1, {m}]")
    if any(a >= b for a, b in zip(index, index[1:])):
        raise DomainError(f"multi-index {index} is not strictly increasing")
    return index


def merge_sign(first: MultiIndex, second: MultiIndex) -> int:
    """
    Sign of e_first ^ e_second relative to the sorted basis element.

    Returns 0 when the two multi-indices overlap.
    """
    if set(first) & set(second):
        return 0
    inversions = sum(1 for a in first for b in second if a > b)
    return -1 if inversions % 2 else 1


def complement(m: int, index: MultiIndex) -> MultiIndex:
    """Sorted complement of a multi-index in {1..m}."""
    taken = set(index)
    return tuple(i for i in range(1, m + 1) if i not in taken)


def permutation_sign(sequence: Sequence[int]) -> int:
    """Parity of the permutation that sorts a sequence of distinct integers."""
    seq = list(sequence)
    inversions = sum(1 for a in range(len(seq)) for b in range(a + 1, len(seq)) if seq[a] > seq[b])
    return -1 if inversions % 2 else 1
