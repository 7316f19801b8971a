"""Rotation control: fixed ω and the pole lock that holds the state at a pole."""

import logging
from typing import Optional, Tuple

import numpy as np

from ..errors import ControlError
from ..models import CanonicalForm, ControlLaw, ControlMode, MomentState, TwistingTensor
from .spin_algebra import LEVI_CIVITA, canonicalize_tensor

logger = logging.getLogger(__name__)

OFF_POLE_WARNING = 0.1


def twisting_torque(j_mean: np.ndarray, variance: np.ndarray, chi: np.ndarray) -> np.ndarray:
    """Quadratic part of d𝒥/dt: 2 ε_jkl χ_kn (𝒥_n 𝒥_l + V_nl)."""
    second = np.outer(j_mean, j_mean) + variance
    return 2.0 * np.einsum("jkl,kn,nl->j", LEVI_CIVITA, chi, second)


def optimal_omega_tilde(chi_eigs: Tuple[float, float, float], j: float) -> float:
    """Scaled rotation rate ω̃ = j((χ_x + χ_y)/2 − χ_z) for eigenvalues (χ_x, χ_y, χ_z)."""
    chi_x, chi_y, chi_z = chi_eigs
    return j * (0.5 * (chi_x + chi_y) - chi_z)


def _pole_lock(j_mean: np.ndarray, variance: np.ndarray, chi: np.ndarray, form: CanonicalForm,
               rotate: bool, compensate_backreaction: bool) -> Tuple[np.ndarray, float]:
    frame = form.frame
    j = frame @ j_mean
    v = frame @ variance @ frame.T
    chi_d = frame @ chi @ frame.T
    length = np.linalg.norm(j)
    if length == 0.0 or abs(j[2]) <= 1e-12 * length:
        raise ControlError("pole lock needs a non-zero mean spin along the canonical z axis")
    tilt = float(np.hypot(j[0], j[1]) / length)

    omega = np.zeros(3)
    if rotate:
        omega[2] = 2.0 * j[2] * (0.5 * (chi_d[0, 0] + chi_d[1, 1]) - chi_d[2, 2])
    if compensate_backreaction:
        # Zero the transverse components of ω×𝒥 + torque
        g = twisting_torque(j, v, chi_d)
        omega[0] = (omega[2] * j[0] + g[1]) / j[2]
        omega[1] = (omega[2] * j[1] - g[0]) / j[2]
    return frame.T @ omega, tilt


def _warn_off_pole(tilt: float) -> None:
    logger.warning("State is %.3f off the canonical pole; pole lock may be inaccurate", tilt)


def pole_lock_frequency(moments: MomentState, tensor: TwistingTensor, rotate: bool = True,
                        compensate_backreaction: bool = True) -> np.ndarray:
    """
    Lab-frame rotation vector that keeps the ellipse at 45° and the state at the pole.

    In the canonical frame ω_z = 2𝒥_z((χ_x + χ_y)/2 − χ_z), which is N·ω̃ of the
    scaled equations. ω_x and ω_y cancel the transverse drift of 𝒥 caused by
    the twisting torque (Bogoliubov backreaction). The tensor's own ω is ignored.

    Args:
        moments: Current first and second moments.
        tensor: Twisting tensor in the lab frame.
        rotate: Include the optimal rotation about the canonical z axis.
        compensate_backreaction: Include the transverse compensation.

    Returns:
        ω as a lab-frame 3-vector.

    Raises:
        ControlError: If 𝒥_z vanishes in the canonical frame.
    """
    form = canonicalize_tensor(tensor)
    omega, tilt = _pole_lock(moments.j_mean, moments.variance, tensor.chi, form,
                             rotate, compensate_backreaction)
    if tilt > OFF_POLE_WARNING:
        _warn_off_pole(tilt)
    return omega


class RotationController:
    """
    Resolves the rotation vector of a ControlLaw, caching the canonical frame.

    The off-pole warning of the pole lock is logged once per controller.
    """

    def __init__(self, control: Optional[ControlLaw], tensor: TwistingTensor):
        self.control = control or ControlLaw.none()
        self.tensor = tensor
        self.form = canonicalize_tensor(tensor) if self.control.mode == ControlMode.POLE_LOCK else None
        self.warned_off_pole = False

    @property
    def is_static(self) -> bool:
        return self.control.is_static

    def omega(self, j_mean: Optional[np.ndarray] = None,
              variance: Optional[np.ndarray] = None) -> np.ndarray:
        if self.control.mode == ControlMode.NONE:
            return np.array(self.tensor.omega)
        if self.control.mode == ControlMode.FIXED:
            return np.array(self.control.omega, dtype=float)
        if j_mean is None or variance is None:
            raise ControlError("pole lock needs the current moments")
        omega, tilt = _pole_lock(j_mean, variance, self.tensor.chi, self.form,
                                 self.control.rotate, self.control.compensate_backreaction)
        if tilt > OFF_POLE_WARNING and not self.warned_off_pole:
            _warn_off_pole(tilt)
            self.warned_off_pole = True
        return omega


def control_omega(control: ControlLaw, tensor: TwistingTensor,
                  moments: Optional[MomentState] = None) -> np.ndarray:
    """The ω in effect for `control` at the given moments."""
    controller = RotationController(control, tensor)
    if moments is None:
        return controller.omega()
    return controller.omega(moments.j_mean, moments.variance)
