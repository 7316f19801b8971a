"""Gaussian-closure moment equations: the full 9-variable system and the scaled pole system."""

import logging
from typing import Callable, List, Optional, Tuple

import numpy as np

from ..errors import IntegrationError, InvalidParameterError
from ..models import (
    BlochDirection,
    ControlLaw,
    MomentState,
    ScaledMomentState,
    SqueezingRecord,
    TwistingTensor,
)
from .analytic import minor_axis_angle, principal_variances, rate_for_tensor, squeezing_rate
from .control import RotationController, optimal_omega_tilde, pole_lock_frequency, twisting_torque
from .exact_engine import squeezing_parameter, transverse_frame
from .spin_algebra import LEVI_CIVITA

logger = logging.getLogger(__name__)

__all__ = [
    "RK4",
    "moment_derivatives",
    "integrate_full",
    "integrate_scaled",
    "scaled_record",
    "pole_lock_frequency",
]

DETERMINANT_FLOOR = -1e-6


class RK4:
    """
    Classical 4th-order Runge-Kutta stepping of dy/dt = rhs(t, y).

    Args:
        rhs: Right-hand side taking (t, y) and returning an array shaped like y.
    """

    def __init__(self, rhs: Callable[[float, np.ndarray], np.ndarray]):
        self.rhs = rhs

    def step(self, t: float, y: np.ndarray, dt: float) -> np.ndarray:
        k1 = self.rhs(t, y)
        k2 = self.rhs(t + dt / 2, y + dt / 2 * k1)
        k3 = self.rhs(t + dt / 2, y + dt / 2 * k2)
        k4 = self.rhs(t + dt, y + dt * k3)
        return y + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def _derivatives(j_mean: np.ndarray, variance: np.ndarray, chi: np.ndarray,
                 omega: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    d_mean = np.cross(omega, j_mean) + twisting_torque(j_mean, variance, chi)
    effective = omega + 2.0 * chi @ j_mean
    rotation = np.einsum("j,plj,pk->kl", effective, LEVI_CIVITA, variance)
    shear = 2.0 * np.einsum("js,p,plj,sk->kl", chi, j_mean, LEVI_CIVITA, variance)
    d_variance = rotation + rotation.T + shear + shear.T
    return d_mean, d_variance


def moment_derivatives(m: MomentState, tensor: TwistingTensor,
                       omega: Optional[np.ndarray] = None) -> Tuple[np.ndarray, np.ndarray]:
    """
    d𝒥/dt and dV/dt of the Gaussian closure.

    d𝒥_j/dt = ε_jkl[ω_k 𝒥_l + 2χ_kn(𝒥_n 𝒥_l + V_nl)], and dV/dt follows from
    factorizing third moments into first and second ones. Adding c·1 to χ
    leaves both unchanged.

    Args:
        m: Current moments.
        tensor: Twisting tensor.
        omega: Rotation vector overriding `tensor.omega`.

    Returns:
        (d𝒥/dt, dV/dt) with dV/dt symmetric.
    """
    omega = tensor.omega if omega is None else np.asarray(omega, dtype=float)
    return _derivatives(m.j_mean, m.variance, tensor.chi, omega)


def _pack(j_mean: np.ndarray, variance: np.ndarray) -> np.ndarray:
    return np.concatenate([j_mean, variance.ravel()])


def _unpack(y: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    return y[:3], y[3:].reshape(3, 3)


def _step_count(tau_max: float, dtau: float) -> Tuple[int, float]:
    if dtau <= 0 or not np.isfinite(dtau):
        raise InvalidParameterError(f"dtau must be positive, got {dtau}")
    if tau_max < 0 or not np.isfinite(tau_max):
        raise InvalidParameterError(f"tau_max must be non-negative, got {tau_max}")
    n_steps = int(round(tau_max / dtau))
    if n_steps == 0:
        return 0, 0.0
    return n_steps, tau_max / n_steps


def _check_stride(stride: int) -> None:
    if stride < 1:
        raise InvalidParameterError(f"stride must be at least 1, got {stride}")


def integrate_full(m0: MomentState, tensor: TwistingTensor, n_particles: int, tau_max: float,
                   dtau: float = 1e-4, control: Optional[ControlLaw] = None,
                   stride: int = 1) -> List[SqueezingRecord]:
    """
    RK4 integration of the 9 moment equations in scaled time τ = N·t.

    The control is evaluated at every Runge-Kutta stage. Records carry
    moments in spin units, ξ² and α from the transverse block, and Q in
    rate units.

    Args:
        m0: Initial moments.
        tensor: Twisting tensor in the lab frame.
        n_particles: Particle number N.
        tau_max: Final scaled time.
        dtau: Scaled step.
        control: Rotation control law.
        stride: Keep every `stride`-th step (plus the last).

    Returns:
        SqueezingRecord list starting at τ = 0.

    Raises:
        IntegrationError: On non-finite values or a negative transverse determinant.
    """
    if n_particles < 1:
        raise InvalidParameterError(f"particle number must be positive, got {n_particles}")
    _check_stride(stride)
    n_steps, h_tau = _step_count(tau_max, dtau)
    controller = RotationController(control, tensor)
    chi = tensor.chi
    quarter = n_particles / 4
    logger.info("Full Gaussian run N=%d, tau_max=%g, %d steps, control=%s",
                n_particles, tau_max, n_steps, controller.control.mode.value)

    def rhs(t: float, y: np.ndarray) -> np.ndarray:
        j_mean, variance = _unpack(y)
        d_mean, d_variance = _derivatives(j_mean, variance, chi, controller.omega(j_mean, variance))
        return _pack(d_mean, d_variance)

    def record(step: int, y: np.ndarray) -> SqueezingRecord:
        j_mean, variance = _unpack(y)
        moments = MomentState(j_mean=j_mean, variance=variance)
        xi2, alpha = squeezing_parameter(moments, n_particles)
        return SqueezingRecord(tau=step * h_tau, j_mean=j_mean, variance=moments.variance,
                               xi2=xi2, alpha=alpha, rate=rate_for_tensor(tensor, j_mean))

    def check(step: int, y: np.ndarray) -> None:
        if not np.all(np.isfinite(y)):
            raise IntegrationError("non-finite moments", step)
        j_mean, variance = _unpack(y)
        if np.linalg.norm(j_mean) == 0.0:
            return
        basis = transverse_frame(j_mean)
        determinant = np.linalg.det(basis @ variance @ basis.T) / quarter ** 2
        if determinant < DETERMINANT_FLOOR:
            raise IntegrationError(f"transverse determinant {determinant:.3e} below floor", step)

    stepper = RK4(rhs)
    y = _pack(m0.j_mean, m0.variance)
    h = h_tau / n_particles
    records = [record(0, y)]
    for step in range(1, n_steps + 1):
        y = stepper.step((step - 1) * h, y, h)
        check(step, y)
        if step % stride == 0 or step == n_steps:
            records.append(record(step, y))
    return records


def _scaled_rhs(chi_eigs: Tuple[float, float, float], omega_tilde: float,
                n_particles: Optional[int], pole_lock: bool) -> Callable[[float, np.ndarray], np.ndarray]:
    chi_x, chi_y, chi_z = chi_eigs
    inverse_n = 0.0 if n_particles is None else 1.0 / n_particles

    def rhs(tau: float, y: np.ndarray) -> np.ndarray:
        v_xx, v_yy, v_xy, j = y
        w = optimal_omega_tilde(chi_eigs, j) if pole_lock else omega_tilde
        return np.array([
            2.0 * (-w + (chi_y - chi_z) * j) * v_xy,
            2.0 * (w - (chi_x - chi_z) * j) * v_xy,
            w * (v_xx - v_yy) + j * ((chi_z - chi_x) * v_xx - (chi_z - chi_y) * v_yy),
            inverse_n * (chi_x - chi_y) * v_xy,
        ])

    return rhs


def scaled_record(tau: float, y: np.ndarray, chi_eigs: Tuple[float, float, float]) -> SqueezingRecord:
    v_xx, v_yy, v_xy, j = (float(value) for value in y)
    _, v_minus = principal_variances(v_xx, v_yy, v_xy)
    # The transverse chart at the south pole is (x̂, −ŷ)
    alpha = minor_axis_angle(v_xx, v_yy, v_xy if j >= 0 else -v_xy)
    pole = BlochDirection(theta=0.0 if j >= 0 else np.pi)
    rate, _ = squeezing_rate(chi_eigs, pole, 0.5 * abs(j))
    variance = np.array([[v_xx, v_xy, 0.0], [v_xy, v_yy, 0.0], [0.0, 0.0, 0.0]])
    return SqueezingRecord(tau=tau, j_mean=np.array([0.0, 0.0, j]), variance=variance,
                           xi2=v_minus, alpha=alpha, rate=rate)


def integrate_scaled(s0: ScaledMomentState, chi_eigs: Tuple[float, float, float],
                     omega_tilde: float = 0.0, n_particles: Optional[int] = None,
                     tau_max: float = 3.0, dtau: float = 1e-4, pole_lock: bool = False,
                     stride: int = 1) -> List[SqueezingRecord]:
    """
    RK4 integration of the scaled pole-frame equations for v_xx, v_yy, v_xy and j.

    Records carry j in `j_mean[2]`, the scaled variances in `variance`
    and Q per unit τ.

    Args:
        s0: Initial scaled state.
        chi_eigs: Diagonal-frame eigenvalues (χ_x, χ_y, χ_z).
        omega_tilde: Fixed scaled rotation rate ω̃.
        n_particles: Particle number, None for N → ∞ (then j is constant).
        tau_max: Final scaled time.
        dtau: Scaled step.
        pole_lock: Recompute ω̃ = j((χ_x + χ_y)/2 − χ_z) at every stage.
        stride: Keep every `stride`-th step (plus the last).

    Returns:
        SqueezingRecord list starting at s0.tau.
    """
    chi_eigs = tuple(float(value) for value in chi_eigs)
    if len(chi_eigs) != 3 or not all(np.isfinite(chi_eigs)):
        raise InvalidParameterError("chi_eigs must be three finite numbers")
    if pole_lock and omega_tilde != 0.0:
        raise InvalidParameterError("pole lock computes omega_tilde itself; do not pass both")
    if n_particles is not None and n_particles < 1:
        raise InvalidParameterError(f"particle number must be positive, got {n_particles}")
    _check_stride(stride)
    n_steps, h = _step_count(tau_max, dtau)
    logger.info("Scaled Gaussian run eigs=%s, N=%s, tau_max=%g, %d steps, pole_lock=%s",
                chi_eigs, n_particles or "inf", tau_max, n_steps, pole_lock)

    stepper = RK4(_scaled_rhs(chi_eigs, omega_tilde, n_particles, pole_lock))
    y = np.array([s0.v_xx, s0.v_yy, s0.v_xy, s0.j])
    records = [scaled_record(s0.tau, y, chi_eigs)]
    for step in range(1, n_steps + 1):
        y = stepper.step(s0.tau + (step - 1) * h, y, h)
        if not np.all(np.isfinite(y)):
            raise IntegrationError("non-finite scaled variables", step)
        if y[0] * y[1] - y[2] ** 2 < DETERMINANT_FLOOR:
            raise IntegrationError("scaled determinant below floor", step)
        if y[0] <= 0 or y[1] <= 0:
            raise IntegrationError("scaled variance became non-positive", step)
        if step % stride == 0 or step == n_steps:
            records.append(scaled_record(s0.tau + step * h, y, chi_eigs))
    return records
