"""Exact finite-N evolution in the Dicke basis, moments, ξ² and the Husimi function."""

import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import LinAlgError, eigh

from ..errors import DegenerateSqueezingError, InvalidParameterError, NumericError
from ..models import (
    AngularMomentumSet,
    BlochDirection,
    BlochGrid,
    ControlLaw,
    GridSpec,
    MomentState,
    SpinState,
    TwistingTensor,
)
from .analytic import minor_axis_angle, principal_variances
from .control import RotationController
from .grid_tools import direction_vectors, map_rows, sphere_quadrature
from .spin_algebra import angular_momentum_matrices, coherent_amplitudes

logger = logging.getLogger(__name__)

DEFAULT_CONTROL_STEP = 1e-3
POLE_FALLBACK = 1e-6


def build_hamiltonian(tensor: TwistingTensor, ops: AngularMomentumSet) -> np.ndarray:
    """
    H = ω_k J_k + χ_kl J_k J_l as a dense Hermitian matrix (f(N) dropped).

    Args:
        tensor: Twisting tensor and rotation vector.
        ops: Angular momentum matrices for the target N.

    Returns:
        (N+1)×(N+1) complex Hermitian matrix.
    """
    shapes = {op.shape for op in ops.operators}
    if shapes != {(ops.dimension, ops.dimension)}:
        raise InvalidParameterError(f"operator shapes {shapes} do not match N={ops.n_particles}")
    j = ops.operators
    hamiltonian = sum(tensor.omega[k] * j[k] for k in range(3))
    for k in range(3):
        for l in range(3):
            if tensor.chi[k, l] != 0.0:
                hamiltonian = hamiltonian + tensor.chi[k, l] * (j[k] @ j[l])
    hamiltonian = np.asarray(hamiltonian, dtype=complex)
    return 0.5 * (hamiltonian + hamiltonian.conj().T)


class StaticPropagator:
    """exp(−iHt) for a time-independent H from one eigendecomposition."""

    def __init__(self, hamiltonian: np.ndarray):
        try:
            self.energies, self.vectors = eigh(hamiltonian)
        except LinAlgError as exc:
            raise NumericError(f"eigendecomposition failed: {exc}") from exc
        if not (np.all(np.isfinite(self.energies)) and np.all(np.isfinite(self.vectors))):
            raise NumericError("eigendecomposition returned non-finite values")

    def apply(self, amplitudes: np.ndarray, t: float) -> np.ndarray:
        """ψ(t) = U e^{−iEt} U† ψ; any real t, negative included."""
        coefficients = self.vectors.conj().T @ amplitudes
        return self.vectors @ (np.exp(-1j * self.energies * t) * coefficients)


def _moment_arrays(amplitudes: np.ndarray, ops: Sequence[np.ndarray]) -> Tuple[np.ndarray, np.ndarray]:
    applied = [op @ amplitudes for op in ops]
    mean = np.array([np.vdot(amplitudes, a).real for a in applied])
    second = np.array([[np.vdot(a, b).real for b in applied] for a in applied])
    return mean, second - np.outer(mean, mean)


def moments(state: SpinState, ops: AngularMomentumSet) -> MomentState:
    """𝒥_k = ⟨J_k⟩ and the symmetrized covariance V_nl."""
    if state.n_particles != ops.n_particles:
        raise InvalidParameterError(
            f"state has N={state.n_particles} but operators have N={ops.n_particles}")
    mean, variance = _moment_arrays(state.amplitudes, ops.operators)
    return MomentState(j_mean=mean, variance=variance)


def coherent_moments(n_particles: int, direction: BlochDirection) -> MomentState:
    """Closed-form moments of a coherent state: 𝒥 = (N/2)n, V = (N/4)(1 − nnᵀ)."""
    n = direction.unit_vector
    return MomentState(j_mean=0.5 * n_particles * n,
                       variance=0.25 * n_particles * (np.eye(3) - np.outer(n, n)))


def transverse_frame(direction: np.ndarray) -> np.ndarray:
    """
    Rows e₁, e₂ spanning the plane perpendicular to `direction`.

    e₁ = ẑ × n normalized, or x̂ projected into the plane near the poles;
    e₂ = n × e₁.
    """
    n = direction / np.linalg.norm(direction)
    e1 = np.cross([0.0, 0.0, 1.0], n)
    if np.linalg.norm(e1) < POLE_FALLBACK:
        e1 = np.array([1.0, 0.0, 0.0]) - n[0] * n
    e1 = e1 / np.linalg.norm(e1)
    return np.array([e1, np.cross(n, e1)])


def squeezing_parameter(m: MomentState, n_particles: int) -> Tuple[float, float]:
    """
    Wineland-style ξ² = V₋/(N/4) and the minor-axis angle α.

    Args:
        m: Moments of the state.
        n_particles: Particle number N.

    Returns:
        (ξ², α) with α in [0, π) measured from e₁ towards −e₂.

    Raises:
        DegenerateSqueezingError: If |𝒥| < 1e-9·N/2.
    """
    length = m.spin_length
    if length < 1e-9 * n_particles / 2:
        raise DegenerateSqueezingError(f"mean spin length {length:.3e} too short for N={n_particles}")
    basis = transverse_frame(m.j_mean)
    block = basis @ m.variance @ basis.T
    _, v_minus = principal_variances(max(block[0, 0], 0.0), max(block[1, 1], 0.0), block[0, 1])
    alpha = minor_axis_angle(block[0, 0], block[1, 1], block[0, 1])
    return v_minus / (n_particles / 4), alpha


def _check_times(times: Sequence[float]) -> np.ndarray:
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size == 0:
        raise InvalidParameterError("sample times must be a non-empty sequence")
    if not np.all(np.isfinite(times)) or times[0] < 0 or np.any(np.diff(times) < 0):
        raise InvalidParameterError("sample times must be finite, non-negative and sorted")
    return times


def _checked_state(amplitudes: np.ndarray, n_particles: int, step: int) -> SpinState:
    if not np.all(np.isfinite(amplitudes)):
        raise NumericError(f"non-finite amplitudes at sample {step}")
    return SpinState(n_particles=n_particles, amplitudes=amplitudes)


def exact_trajectory(state: SpinState, tensor: TwistingTensor, times: Sequence[float],
                     control: Optional[ControlLaw] = None,
                     dt: Optional[float] = None) -> List[SpinState]:
    """
    Exact Schrödinger evolution sampled at physical `times`.

    Static ω (control none or fixed) uses one eigendecomposition. The pole
    lock holds ω constant over steps no longer than `dt` (default 1e-3/N) and
    recomputes it from the moments at the start of each step.

    Args:
        state: Initial state.
        tensor: Twisting tensor; its ω is used only under control none.
        times: Sorted non-negative sample times.
        control: Rotation control law.
        dt: Maximum control step in physical time.

    Returns:
        One SpinState per sample time.
    """
    times = _check_times(times)
    n = state.n_particles
    ops = angular_momentum_matrices(n)
    controller = RotationController(control, tensor)
    logger.info("Exact evolution N=%d, %d samples, control=%s", n, times.size,
                controller.control.mode.value)

    if controller.is_static:
        propagator = StaticPropagator(build_hamiltonian(tensor.with_omega(controller.omega()), ops))
        return [_checked_state(propagator.apply(state.amplitudes, t), n, i)
                for i, t in enumerate(times)]

    dt = dt or DEFAULT_CONTROL_STEP / n
    if dt <= 0:
        raise InvalidParameterError(f"control step must be positive, got {dt}")
    quadratic = build_hamiltonian(tensor.with_omega(np.zeros(3)), ops)
    psi = np.array(state.amplitudes)
    now = 0.0
    samples = []
    for i, target in enumerate(times):
        interval = target - now
        n_steps = int(np.ceil(interval / dt - 1e-9)) if interval > 0 else 0
        for _ in range(n_steps):
            mean, variance = _moment_arrays(psi, ops.operators)
            omega = controller.omega(mean, variance)
            linear = sum(omega[k] * ops.operators[k] for k in range(3))
            psi = StaticPropagator(quadratic + linear).apply(psi, interval / n_steps)
        now = target
        samples.append(_checked_state(psi, n, i))
        logger.debug("Sample %d at t=%g, norm drift %.2e", i, target, samples[-1].norm_drift)
    return samples


def evolve_exact(state: SpinState, tensor: TwistingTensor, duration: float,
                 control: Optional[ControlLaw] = None, dt: Optional[float] = None) -> SpinState:
    """State after `duration` (physical time)."""
    if duration < 0:
        raise InvalidParameterError(f"duration must be non-negative, got {duration}")
    return exact_trajectory(state, tensor, [duration], control, dt)[-1]


def husimi(state: SpinState, grid: GridSpec, workers: Optional[int] = None) -> BlochGrid:
    """Q(θ, φ) = (N+1)/(4π)·|⟨θ, φ|ψ⟩|², normalized to ∫ Q dΩ = 1."""
    n = state.n_particles
    thetas, phis = grid.thetas(), grid.phis()
    phases = np.exp(-1j * np.outer(phis, np.arange(n + 1)))
    prefactor = (n + 1) / (4 * np.pi)

    def row(theta: float) -> np.ndarray:
        magnitudes = coherent_amplitudes(n, theta, 0.0).real
        return prefactor * np.abs(phases @ (magnitudes * state.amplitudes)) ** 2

    values = np.array(map_rows(row, thetas, workers))
    return BlochGrid(label="husimi", theta=thetas, phi=phis, values=values)


def husimi_quadrature(grid: BlochGrid) -> float:
    """Integral of a Husimi grid over the sphere (≈ 1)."""
    return sphere_quadrature(grid)


def husimi_bend_index(grid: BlochGrid) -> float:
    """
    Scale-free S-shape measure of a density on the sphere.

    Points of the hemisphere around the mean direction are projected onto
    its tangent plane and centered. With s along the major axis of the
    weighted covariance and r across it, the index is
    |⟨r s³⟩| / (⟨s⁴⟩^{3/4} ⟨r²⟩^{1/2}). It vanishes for any density
    symmetric about its major axis, ellipses included.
    """
    vectors = direction_vectors(grid.theta, grid.phi)
    weights = grid.values * np.sin(grid.theta)[:, None]
    mean = np.einsum("tp,tpk->k", weights, vectors)
    if np.linalg.norm(mean) == 0.0:
        raise DegenerateSqueezingError("density has no mean direction")
    mean = mean / np.linalg.norm(mean)
    front = (vectors @ mean) > 0
    w = weights[front]
    coords = vectors[front] @ transverse_frame(mean).T
    w = w / w.sum()
    coords = coords - w @ coords
    covariance = np.einsum("p,pa,pb->ab", w, coords, coords)
    _, axes = eigh(covariance)
    s = coords @ axes[:, 1]
    r = coords @ axes[:, 0]
    cubic = abs(float(w @ (r * s ** 3)))
    scale = float(w @ s ** 4) ** 0.75 * float(w @ r ** 2) ** 0.5
    return cubic / scale if scale > 0 else 0.0
