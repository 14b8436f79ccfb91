"""
Maps between flat tori T^m -> T^n: a linear lift x -> Qx plus a periodic
perturbation sampled on the cell centres of an N^m grid.
"""

import json
import os
from dataclasses import dataclass, replace
from functools import cached_property
from typing import Any, Callable, Dict, Mapping, Optional, Tuple, Union

import numpy as np

from exterior_algebra import DomainError, validate_spd
from utils import config
from utils.rng import random_spd
from utils.schema import SchemaViolation, load_json_file, validate_payload

TORUS_KEYS = ("m", "n", "G", "H", "Q")


class TorusSpecError(DomainError):
    """Invalid torus map data or experiment config."""

    def __init__(self, message: str, path: Optional[str] = None):
        super().__init__(message if path is None else f"{path}: {message}")
        self.path = path
        self.detail = message


@dataclass(frozen=True, eq=False)
class TorusMapSpec:
    """
    f(x) = Q x + u(x) mod Z^n with constant metrics G on T^m and H on T^n.

    The perturbation u has shape (n, N, ..., N) with m grid axes; None means u = 0.
    """
    G: np.ndarray
    H: np.ndarray
    Q: np.ndarray
    grid_n: int = config.DEFAULT_GRID_N
    perturbation: Optional[np.ndarray] = None

    def __post_init__(self):
        try:
            G = validate_spd(self.G, "source metric G")
            H = validate_spd(self.H, "target metric H")
        except DomainError as e:
            raise TorusSpecError(str(e)) from e
        Q = np.asarray(self.Q, dtype=float)
        m, n = G.shape[0], H.shape[0]
        if Q.shape != (n, m):
            raise TorusSpecError(f"Q must be {n}x{m} for G {G.shape} and H {H.shape}, got {Q.shape}")
        if not np.array_equal(Q, np.round(Q)):
            raise TorusSpecError("Q must have integer entries")
        if int(self.grid_n) < 4:
            raise TorusSpecError(f"gridN must be at least 4, got {self.grid_n}")
        for name, value in (("G", G), ("H", H), ("Q", Q)):
            value.setflags(write=False)
            object.__setattr__(self, name, value)
        object.__setattr__(self, "grid_n", int(self.grid_n))

        if self.perturbation is not None:
            u = np.array(self.perturbation, dtype=float)
            if u.shape != self.field_shape:
                raise TorusSpecError(f"perturbation must have shape {self.field_shape}, got {u.shape}")
            u.setflags(write=False)
            object.__setattr__(self, "perturbation", u)

    @property
    def m(self) -> int:
        return self.G.shape[0]

    @property
    def n(self) -> int:
        return self.H.shape[0]

    @property
    def P(self) -> np.ndarray:
        """m x n cohomology matrix, f^*[dy^j] = sum_i P_ij [dx^i]."""
        return self.Q.T

    @property
    def field_shape(self) -> Tuple[int, ...]:
        return (self.n,) + (self.grid_n,) * self.m

    @cached_property
    def G_inv(self) -> np.ndarray:
        return np.linalg.inv(self.G)

    @cached_property
    def sqrt_det_g(self) -> float:
        """vol_g(T^m) for the unit-cube fundamental domain."""
        return float(np.sqrt(np.linalg.det(self.G)))

    def field(self) -> np.ndarray:
        """The perturbation, or zeros when none is set."""
        return np.zeros(self.field_shape) if self.perturbation is None else self.perturbation

    def with_perturbation(self, u: Optional[np.ndarray]) -> "TorusMapSpec":
        return replace(self, perturbation=u)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "m": self.m,
            "n": self.n,
            "G": self.G.tolist(),
            "H": self.H.tolist(),
            "Q": [[int(v) for v in row] for row in self.Q],
            "gridN": self.grid_n,
        }


def grid_points(m: int, grid_n: int) -> np.ndarray:
    """Cell centres (i + 1/2) / N of the N^m grid, shape (m, N, ..., N)."""
    axis = (np.arange(grid_n) + 0.5) / grid_n
    return np.stack(np.meshgrid(*([axis] * m), indexing="ij"))


def sample_field(fn: Callable[[np.ndarray], np.ndarray], m: int, n: int, grid_n: int) -> np.ndarray:
    """
    Sample a periodic field on the grid.

    Args:
        fn: Maps coordinates of shape (m, N, ..., N) to values of shape (n, N, ..., N)
        m: Source dimension
        n: Target dimension
        grid_n: Points per dimension

    Returns:
        Field of shape (n, N, ..., N)
    """
    values = np.asarray(fn(grid_points(m, grid_n)), dtype=float)
    shape = (n,) + (grid_n,) * m
    if values.shape != shape:
        raise TorusSpecError(f"sampled field has shape {values.shape}, expected {shape}")
    return values


def synthesize_perturbation(
    m: int,
    n: int,
    grid_n: int,
    modes: int,
    amplitude: float,
    rng: np.random.Generator,
) -> np.ndarray:
    """
    Random smooth periodic field: a sum of Fourier modes with frequencies
    |k_i| <= gridN / 8, so the grid resolves every mode.

    Args:
        m: Source dimension
        n: Target dimension
        grid_n: Points per dimension
        modes: Number of Fourier modes
        amplitude: Largest coefficient of a single mode
        rng: Generator

    Returns:
        Field of shape (n, N, ..., N)
    """
    band = max(1, grid_n // 8)
    x = grid_points(m, grid_n)
    u = np.zeros((n,) + (grid_n,) * m)
    for _ in range(modes):
        freq = rng.integers(-band, band + 1, size=m)
        while not np.any(freq):
            freq = rng.integers(-band, band + 1, size=m)
        phase = 2.0 * np.pi * np.tensordot(freq, x, axes=1)
        coeffs = amplitude * rng.uniform(-1.0, 1.0, size=(n, 2))
        weights = coeffs.reshape((n, 2) + (1,) * m)
        u += weights[:, 0] * np.cos(phase) + weights[:, 1] * np.sin(phase)
    return u


def random_instance(
    m: int,
    n: int,
    rng: np.random.Generator,
    grid_n: int = config.DEFAULT_GRID_N,
    max_entry: int = 2,
) -> TorusMapSpec:
    """Random SPD metrics and a nonzero integer Q with entries in [-max_entry, max_entry]."""
    G, H = random_spd(rng, m), random_spd(rng, n)
    Q = rng.integers(-max_entry, max_entry + 1, size=(n, m))
    while not np.any(Q):
        Q = rng.integers(-max_entry, max_entry + 1, size=(n, m))
    return TorusMapSpec(G, H, Q, grid_n)


def load_torus_config(source: Union[str, Mapping[str, Any]]) -> Tuple[TorusMapSpec, Dict[str, Any]]:
    """
    Build a TorusMapSpec from a JSON config file or an already parsed dict.

    Args:
        source: Path of a JSON file, or a mapping

    Returns:
        (spec, params) where params holds the remaining config keys

    Raises:
        TorusSpecError: unreadable file, schema violation or inconsistent data
    """
    if isinstance(source, (str, os.PathLike)):
        try:
            payload = load_json_file(os.fspath(source))
        except (OSError, json.JSONDecodeError) as e:
            raise TorusSpecError(f"cannot read config {source}: {e}") from e
    else:
        payload = dict(source)

    try:
        validate_payload(payload, config.RUN_CONFIG_SCHEMA)
    except SchemaViolation as e:
        raise TorusSpecError(e.detail, e.path) from e
    missing = [key for key in TORUS_KEYS if key not in payload]
    if missing:
        raise TorusSpecError(f"missing required field(s) {', '.join(missing)}", "$")

    m, n = payload["m"], payload["n"]
    try:
        G, H, Q = (np.asarray(payload[key], dtype=float) for key in ("G", "H", "Q"))
    except ValueError as e:
        raise TorusSpecError(f"ragged matrix: {e}", "$") from e
    for key, value, shape in (("G", G, (m, m)), ("H", H, (n, n)), ("Q", Q, (n, m))):
        if value.shape != shape:
            raise TorusSpecError(f"expected shape {list(shape)}, got {list(value.shape)}", f"$.{key}")

    spec = TorusMapSpec(G, H, Q, payload.get("gridN", config.DEFAULT_GRID_N))
    params = {key: value for key, value in payload.items() if key not in TORUS_KEYS + ("gridN",)}
    return spec, params
