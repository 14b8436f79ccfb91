"""
Energy quadrature and descent over a homotopy class of torus maps.

A map is f(x) = Qx + u(x) with u sampled on the cell centres of an N^m grid.
Its differential at a grid point is Q + Du(x), with Du from centered periodic
differences, and E_{p,q}(f) is the midpoint rule for the integral of
sigma_{p,q}(df) vol_g over the unit cube.
"""

import sys
from dataclasses import dataclass, field as dataclass_field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from energy_densities import batch_schatten, holder_energy_bound, metric_whiten, spd_power
from torus_lab.calibration import p_norm_squared, pairing_batch, sigma1_batch
from torus_lab.spec import TorusMapSpec, TorusSpecError, sample_field, synthesize_perturbation
from utils import config
from utils.rng import map_chunks

ARMIJO_C = 1e-4
MIN_STEP = 1e-20
# rounding slack in the sufficient-decrease test, relative to max(1, |E|);
# an accepted step can raise the energy history by at most this much
ENERGY_SLACK = 1e-14


def finite_difference(u: np.ndarray) -> np.ndarray:
    """
    Centered periodic differences of a grid field.

    Args:
        u: Field of shape (n, N, ..., N) with m grid axes

    Returns:
        Du of shape (n, m, N, ..., N); Du[:, i] is the derivative along x_i
    """
    u = np.asarray(u, dtype=float)
    m, grid_n = u.ndim - 1, u.shape[1]
    half_inv_h = 0.5 * grid_n
    return np.stack(
        [(np.roll(u, -1, axis=1 + i) - np.roll(u, 1, axis=1 + i)) * half_inv_h for i in range(m)],
        axis=1,
    )


def finite_difference_adjoint(w: np.ndarray) -> np.ndarray:
    """Transpose of finite_difference: (n, m, N, ..., N) -> (n, N, ..., N)."""
    w = np.asarray(w, dtype=float)
    m, grid_n = w.shape[1], w.shape[2]
    half_inv_h = 0.5 * grid_n
    out = np.zeros((w.shape[0],) + w.shape[2:])
    for i in range(m):
        out += (np.roll(w[:, i], 1, axis=1 + i) - np.roll(w[:, i], -1, axis=1 + i)) * half_inv_h
    return out


def _check_field(spec: TorusMapSpec, u: Optional[np.ndarray]) -> np.ndarray:
    if u is None:
        return spec.field()
    u = np.asarray(u, dtype=float)
    if u.shape != spec.field_shape:
        raise TorusSpecError(f"field must have shape {spec.field_shape}, got {u.shape}")
    return u


def _check_exponents(p: float, q: float):
    if not (p > 0 and q > 0):
        raise TorusSpecError(f"exponents must be positive, got p={p}, q={q}")


def jacobian_field(spec: TorusMapSpec, u: np.ndarray) -> np.ndarray:
    """Q + Du(x) at every grid point, shape (N, ..., N, n, m)."""
    du = finite_difference(u)
    return np.moveaxis(du, (0, 1), (-2, -1)) + spec.Q


def density(spec: TorusMapSpec, a: np.ndarray, p: float, q: float) -> np.ndarray:
    """sigma_{p,q} of a stack of n x m differentials under (G, H)."""
    if p == 2.0:
        t = np.sum(a * (spec.H @ a @ spec.G_inv), axis=(-2, -1))
        return np.clip(t, 0.0, None) ** (0.5 * q)
    return batch_schatten(metric_whiten(a, spec.G, spec.H), p) ** q


def density_gradient(spec: TorusMapSpec, a: np.ndarray, p: float, q: float) -> np.ndarray:
    """
    d sigma_{p,q} / dA for a stack of differentials.

    For p = 2 this is q t^{q/2 - 1} H A G^{-1} with t = |A|_2^2. Otherwise the
    whitened B = H^{1/2} A G^{-1/2} has gradient q (sum s^p)^{q/p - 1} U s^{p-1} V^T,
    mapped back by H^{1/2} (.) G^{-1/2}. Points where the gradient is singular get 0.
    """
    if p == 2.0:
        hag = spec.H @ a @ spec.G_inv
        t = np.sum(a * hag, axis=(-2, -1))
        with np.errstate(divide="ignore", invalid="ignore"):
            coef = np.where(t > 0.0, q * np.abs(t) ** (0.5 * q - 1.0), 0.0)
        return coef[..., None, None] * hag

    b = metric_whiten(a, spec.G, spec.H)
    u, s, vh = np.linalg.svd(b, full_matrices=False)
    with np.errstate(divide="ignore", invalid="ignore"):
        total = np.sum(s ** p, axis=-1)
        outer = np.where(total > 0.0, q * total ** (q / p - 1.0), 0.0)
        scaled = np.where(s > 0.0, s ** (p - 1.0), 0.0)
    gb = (u * scaled[..., None, :]) @ vh * outer[..., None, None]
    return spd_power(spec.H, 0.5) @ gb @ spd_power(spec.G, -0.5)


def energy_quadrature(spec: TorusMapSpec, p: float, q: float, u: Optional[np.ndarray] = None) -> float:
    """
    E_{p,q}(f) by the midpoint rule.

    Args:
        spec: Torus map
        p: Schatten exponent
        q: Outer power
        u: Perturbation field; defaults to the one stored on spec

    Returns:
        mean over the grid of sigma_{p,q}(Q + Du) times sqrt(det G)
    """
    _check_exponents(p, q)
    u = _check_field(spec, u)
    if not np.any(u):
        # constant integrand
        return float(density(spec, spec.Q, p, q)) * spec.sqrt_det_g
    values = density(spec, jacobian_field(spec, u), p, q)
    return float(np.mean(values)) * spec.sqrt_det_g


def _energy_and_gradient(spec: TorusMapSpec, u: np.ndarray, p: float, q: float) -> Tuple[float, np.ndarray]:
    a = jacobian_field(spec, u)
    if np.any(u):
        energy = float(np.mean(density(spec, a, p, q))) * spec.sqrt_det_g
    else:
        energy = energy_quadrature(spec, p, q, u)
    dense = np.moveaxis(density_gradient(spec, a, p, q), (-2, -1), (0, 1))
    weight = spec.sqrt_det_g / spec.grid_n ** spec.m
    return energy, weight * finite_difference_adjoint(dense)


def energy_gradient(spec: TorusMapSpec, u: np.ndarray, p: float, q: float) -> np.ndarray:
    """Exact gradient of energy_quadrature with respect to the grid values of u."""
    _check_exponents(p, q)
    return _energy_and_gradient(spec, _check_field(spec, u), p, q)[1]


def sup_deviation(u: np.ndarray) -> float:
    """max |u_j(x) - mean(u_j)| over components and grid points."""
    u = np.asarray(u, dtype=float)
    if u.size == 0:
        return 0.0
    axes = tuple(range(1, u.ndim))
    return float(np.max(np.abs(u - u.mean(axis=axes, keepdims=True))))


@dataclass
class FlowTrace:
    """Descent run on the perturbation field."""
    iterations: int
    energy_history: List[float]
    final_energy: float
    target_energy: float
    converged: bool
    grad_norm: float
    sup_deviation: float
    field: Optional[np.ndarray] = dataclass_field(default=None, repr=False)

    @property
    def relative_gap(self) -> float:
        return (self.final_energy - self.target_energy) / max(abs(self.target_energy), 1e-300)

    def history_rows(self) -> List[Tuple[int, float]]:
        return list(enumerate(self.energy_history))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "iterations": self.iterations,
            "energyHistory": self.energy_history,
            "finalEnergy": self.final_energy,
            "targetEnergy": self.target_energy,
            "relativeGap": self.relative_gap,
            "converged": self.converged,
            "gradNorm": self.grad_norm,
            "supDeviation": self.sup_deviation,
        }


def minimize_energy(
    spec: TorusMapSpec,
    p: float = 2.0,
    q: float = 2.0,
    tol: float = config.FLOW_TOL,
    max_iter: int = config.FLOW_MAX_ITER,
    u0: Optional[np.ndarray] = None,
    debug: bool = False,
) -> FlowTrace:
    """
    Gradient descent on u with Barzilai-Borwein steps and Armijo backtracking.

    The search direction is the L^2 gradient N^m dE/du. The run stops when its
    mean-square norm drops below tol * (1 + targetEnergy), after max_iter steps,
    or when backtracking can no longer decrease the energy.

    energyHistory is non-increasing up to rounding: each accepted step satisfies
    E_next <= E + ENERGY_SLACK * max(1, |E|).

    Args:
        spec: Torus map; its perturbation is the starting field unless u0 is given
        p: Schatten exponent
        q: Outer power
        tol: Relative gradient tolerance
        max_iter: Iteration cap
        u0: Starting field
        debug: Print progress to stderr

    Returns:
        FlowTrace with the final field attached
    """
    _check_exponents(p, q)
    u = np.array(_check_field(spec, u0), dtype=float)
    target = energy_quadrature(spec, p, q, np.zeros(spec.field_shape))
    scale = float(spec.grid_n ** spec.m)
    threshold = tol * (1.0 + abs(target))

    energy, grad = _energy_and_gradient(spec, u, p, q)
    history = [energy]
    prev_u = prev_d = None
    converged = False
    grad_norm = float(np.sqrt(scale * np.vdot(grad, grad)))
    iterations = 0

    if debug:
        print(f"📡 flow: E0={energy:.6e} target={target:.6e} grid={spec.grid_n}^{spec.m}", file=sys.stderr)

    while True:
        if grad_norm <= threshold:
            converged = True
            break
        if iterations >= max_iter:
            break

        d = scale * grad
        step = 1.0
        if prev_u is not None:
            s, y = u - prev_u, d - prev_d
            sy, yy = float(np.vdot(s, y)), float(np.vdot(y, y))
            if sy > 0.0 and yy > 0.0:
                step = sy / yy
        decrease = float(np.vdot(grad, d))
        slack = ENERGY_SLACK * max(1.0, abs(energy))

        while step >= MIN_STEP:
            trial = u - step * d
            trial_energy = energy_quadrature(spec, p, q, trial)
            if trial_energy <= energy - ARMIJO_C * step * decrease + slack and trial_energy <= energy + slack:
                break
            step *= 0.5
        else:
            if debug:
                print(f"⚠️ flow: line search stalled at iteration {iterations}", file=sys.stderr)
            break

        prev_u, prev_d = u, d
        u = trial
        energy, grad = _energy_and_gradient(spec, u, p, q)
        grad_norm = float(np.sqrt(scale * np.vdot(grad, grad)))
        history.append(energy)
        iterations += 1

        if debug and iterations % 100 == 0:
            print(f"  iter {iterations}: E={energy:.12e} |grad|={grad_norm:.3e}", file=sys.stderr)

    if debug:
        status = "✅" if converged else "⚠️"
        print(f"{status} flow: {iterations} iterations, E={energy:.12e}", file=sys.stderr)

    return FlowTrace(
        iterations=iterations,
        energy_history=history,
        final_energy=energy,
        target_energy=target,
        converged=converged,
        grad_norm=grad_norm,
        sup_deviation=sup_deviation(u),
        field=u,
    )


@dataclass
class InvarianceReport:
    trials: int
    target: float
    min_value: float
    max_value: float
    max_deviation: float
    passed: bool

    @property
    def spread(self) -> float:
        return self.max_value - self.min_value

    def to_dict(self) -> Dict[str, Any]:
        return {
            "trials": self.trials,
            "target": self.target,
            "minValue": self.min_value,
            "maxValue": self.max_value,
            "spread": self.spread,
            "maxDeviation": self.max_deviation,
            "pass": self.passed,
        }


def graph_integral(spec: TorusMapSpec, u: Optional[np.ndarray] = None) -> float:
    """Quadrature of the integral of (1, f)^* Phi: sqrt(det G) times the mean of <P, Q + Du>."""
    u = _check_field(spec, u)
    return float(np.mean(pairing_batch(spec, jacobian_field(spec, u)))) * spec.sqrt_det_g


def homotopy_invariance_check(
    spec: TorusMapSpec,
    trials: int = config.INVARIANCE_TRIALS,
    seed: int = config.DEFAULT_SEED,
    workers: int = 1,
    modes: int = 6,
    amplitude: float = 0.05,
    tol: float = config.INVARIANCE_TOL,
    debug: bool = False,
) -> InvarianceReport:
    """
    The integral of (1, f)^* Phi over random perturbations of the linear lift.

    Each trial draws a bandlimited field from its own seeded substream. The
    unperturbed lift is always included.

    Args:
        spec: Torus map (its own perturbation is ignored)
        trials: Number of random perturbations
        seed: Root seed
        workers: Thread count
        modes: Fourier modes per perturbation
        amplitude: Mode coefficient bound
        tol: Allowed deviation from |P|^2 sqrt(det G)
        debug: Print progress to stderr

    Returns:
        InvarianceReport
    """
    target = p_norm_squared(spec) * spec.sqrt_det_g
    if debug:
        print(f"📡 invariance: {trials} perturbations on {spec.grid_n}^{spec.m}...", file=sys.stderr)

    def chunk(rng, _size, _index):
        u = synthesize_perturbation(spec.m, spec.n, spec.grid_n, modes, amplitude, rng)
        return graph_integral(spec, u)

    values = [graph_integral(spec, np.zeros(spec.field_shape))]
    values += map_chunks(chunk, trials, seed, workers, chunk_size=1)
    values = np.array(values)
    max_deviation = float(np.max(np.abs(values - target)))
    report = InvarianceReport(
        trials=trials,
        target=target,
        min_value=float(values.min()),
        max_value=float(values.max()),
        max_deviation=max_deviation,
        passed=max_deviation <= tol,
    )
    if debug:
        status = "✅" if report.passed else "❌"
        print(f"{status} invariance: maxDeviation={max_deviation:.3e}", file=sys.stderr)
    return report


def holder_check(spec: TorusMapSpec, p: float, q: float) -> Dict[str, Any]:
    """
    Integrated Hoelder comparison of E_p = E_{2,p} and E_q = E_{2,q} on the
    spec's current field, 1 <= p <= q.
    """
    e_p = energy_quadrature(spec, 2.0, p)
    e_q = energy_quadrature(spec, 2.0, q)
    e_p, bound = holder_energy_bound(e_p, e_q, spec.sqrt_det_g, p, q)
    return {
        "p": p,
        "q": q,
        "Ep": e_p,
        "Eq": e_q,
        "bound": bound,
        "pass": e_p <= bound * (1.0 + config.REL_TOL),
    }


def counterexample_1d(grid_n: int = config.COUNTEREXAMPLE_GRID_N, amplitude: float = 1.0) -> Dict[str, Any]:
    """
    The circle map f(x) = x + amplitude * sin(2 pi x) / (2 pi).

    At amplitude 1, f' = 1 + cos(2 pi x) >= 0, so <P, f'> = |f'| everywhere and
    f attains the sigma_1 bound although it is not affine. Its Dirichlet energy
    exceeds the linear one. Above 1, f' changes sign and the calibration fails.

    Args:
        grid_n: Grid points on the circle
        amplitude: Weight of the sine term

    Returns:
        Report with the sigma_1 energy, the pointwise calibration residuals
        sigma_1(df) - <P, df> / |P| on the finite-difference field, min f'
        and the E_2 energy
    """
    u = sample_field(lambda x: amplitude * np.sin(2.0 * np.pi * x) / (2.0 * np.pi), 1, 1, grid_n)
    spec = TorusMapSpec(np.eye(1), np.eye(1), np.eye(1), grid_n, perturbation=u)

    energy = energy_quadrature(spec, 1.0, 1.0)
    df = jacobian_field(spec, u)
    residuals = sigma1_batch(spec, df) - pairing_batch(spec, df) / np.sqrt(p_norm_squared(spec))
    max_residual = float(np.max(np.abs(residuals)))
    min_derivative = float(np.min(df))
    return {
        "gridN": grid_n,
        "amplitude": amplitude,
        "energy": energy,
        "target": 1.0,
        "maxResidual": max_residual,
        "minDerivative": min_derivative,
        "e2": energy_quadrature(spec, 2.0, 2.0),
        "supDeviation": sup_deviation(u),
        "pass": abs(energy - 1.0) <= config.REL_TOL and max_residual <= 1e-12 and min_derivative >= -1e-12,
    }
