"""
Seeded substreams and the worker pool used by every randomized sweep.

A sweep of `total` samples is cut into fixed-size chunks. Chunk i always draws
from the i-th child of SeedSequence(seed), and partial results come back in
chunk order, so the outcome depends on (seed, total) and never on the number
of workers.
"""

from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable, List, Optional, Tuple

import numpy as np

from utils import config


def chunk_plan(total: int, chunk_size: Optional[int] = None) -> List[Tuple[int, int]]:
    """
    Split `total` samples into (offset, size) chunks.

    Args:
        total: Number of samples
        chunk_size: Samples per chunk (defaults to config.CHUNK_SIZE)

    Returns:
        List of (offset, size) pairs covering range(total) in order
    """
    size = chunk_size or config.CHUNK_SIZE
    if size <= 0:
        raise ValueError(f"chunk size must be positive, got {size}")
    plan = []
    offset = 0
    while offset < total:
        step = min(size, total - offset)
        plan.append((offset, step))
        offset += step
    return plan


def substreams(seed: int, count: int) -> List[np.random.Generator]:
    """Independent generators spawned from one root seed."""
    children = np.random.SeedSequence(seed).spawn(count)
    return [np.random.default_rng(child) for child in children]


def map_chunks(
    fn: Callable[[np.random.Generator, int, int], Any],
    total: int,
    seed: int,
    workers: int = 1,
    chunk_size: Optional[int] = None,
) -> List[Any]:
    """
    Run `fn(rng, size, chunk_index)` over every chunk of a sweep.

    Args:
        fn: Chunk worker; receives its own generator, the chunk size and index
        total: Number of samples in the sweep
        seed: Root seed
        workers: Thread count (results are identical for any value)
        chunk_size: Samples per chunk

    Returns:
        Chunk results in chunk order
    """
    plan = chunk_plan(total, chunk_size)
    rngs = substreams(seed, len(plan))
    jobs = [(rngs[i], size, i) for i, (_, size) in enumerate(plan)]

    if workers <= 1 or len(jobs) <= 1:
        return [fn(*job) for job in jobs]

    with ThreadPoolExecutor(max_workers=min(workers, len(jobs))) as executor:
        # map() yields in submission order
        return list(executor.map(lambda job: fn(*job), jobs))


def unit_vectors(rng: np.random.Generator, count: int, dim: int) -> np.ndarray:
    """Uniform samples on S^{dim-1} by Gaussian normalization, shape (count, dim)."""
    w = rng.standard_normal((count, dim))
    norms = np.linalg.norm(w, axis=1, keepdims=True)
    # a zero Gaussian draw has probability zero; redraw to stay safe
    while np.any(norms == 0.0):
        bad = (norms == 0.0).ravel()
        w[bad] = rng.standard_normal((int(bad.sum()), dim))
        norms = np.linalg.norm(w, axis=1, keepdims=True)
    return w / norms


def random_orthogonal(rng: np.random.Generator, dim: int, count: Optional[int] = None) -> np.ndarray:
    """
    Haar-random orthogonal matrices: QR of a Gaussian with sign-corrected R.

    Args:
        rng: Generator
        dim: Matrix size
        count: Batch size, or None for a single matrix

    Returns:
        (dim, dim) or (count, dim, dim) array
    """
    shape = (dim, dim) if count is None else (count, dim, dim)
    q, r = np.linalg.qr(rng.standard_normal(shape))
    signs = np.sign(np.diagonal(r, axis1=-2, axis2=-1))
    signs[signs == 0] = 1.0
    return q * signs[..., None, :]


def random_frames(rng: np.random.Generator, dim: int, k: int, count: int) -> np.ndarray:
    """Batch of orthonormal k-frames in R^dim, shape (count, dim, k)."""
    q, r = np.linalg.qr(rng.standard_normal((count, dim, k)))
    signs = np.sign(np.diagonal(r, axis1=-2, axis2=-1))
    signs[signs == 0] = 1.0
    return q * signs[..., None, :]


def random_spd(rng: np.random.Generator, dim: int, spread: float = 1.0) -> np.ndarray:
    """Random symmetric positive-definite matrix with eigenvalues in [0.5, 0.5 + 2*spread]."""
    basis = random_orthogonal(rng, dim)
    eigenvalues = 0.5 + 2.0 * spread * rng.random(dim)
    spd = (basis * eigenvalues) @ basis.T
    return 0.5 * (spd + spd.T)
