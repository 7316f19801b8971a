"""Dicke-basis angular momentum, spin coherent states and tensor rotations."""

import logging
from typing import Any

import numpy as np
from scipy.linalg import eigh
from scipy.spatial.transform import Rotation
from scipy.special import gammaln, xlogy

from ..errors import InvalidParameterError
from ..models import (
    AngularMomentumSet,
    BlochDirection,
    CanonicalForm,
    SpinState,
    TensorClass,
    TwistingTensor,
)

logger = logging.getLogger(__name__)

LEVI_CIVITA = np.zeros((3, 3, 3))
for _i, _j, _k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
    LEVI_CIVITA[_i, _j, _k] = 1.0
    LEVI_CIVITA[_i, _k, _j] = -1.0
LEVI_CIVITA.setflags(write=False)

ROTATION_TOLERANCE = 1e-10
CLASS_TOLERANCE = 1e-9


def _check_particle_number(n_particles: Any) -> int:
    if isinstance(n_particles, bool) or not isinstance(n_particles, (int, np.integer)):
        raise InvalidParameterError(f"particle number must be an integer, got {n_particles!r}")
    if n_particles < 1:
        raise InvalidParameterError(f"particle number must be positive, got {n_particles}")
    return int(n_particles)


def magnetic_numbers(n_particles: int) -> np.ndarray:
    """m = j, j-1, ..., -j for j = N/2."""
    return n_particles / 2 - np.arange(n_particles + 1)


def angular_momentum_matrices(n_particles: int) -> AngularMomentumSet:
    """
    Build Jx, Jy, Jz for the j = N/2 representation.

    The basis runs m = j, j-1, ..., -j so index 0 is the +z pole. J+ has the
    positive elements sqrt(j(j+1) - m(m+1)) on the first superdiagonal.

    Args:
        n_particles: Particle number N >= 1.

    Returns:
        AngularMomentumSet with dense complex matrices of size N+1.
    """
    n = _check_particle_number(n_particles)
    j = n / 2
    m = magnetic_numbers(n)
    j_plus = np.diag(np.sqrt(j * (j + 1) - m[1:] * (m[1:] + 1)), 1).astype(complex)
    j_minus = j_plus.T.copy()
    jx = (j_plus + j_minus) / 2
    jy = (j_plus - j_minus) / 2j
    jz = np.diag(m).astype(complex)
    for matrix in (jx, jy, jz):
        matrix.setflags(write=False)
    return AngularMomentumSet(n_particles=n, jx=jx, jy=jy, jz=jz)


def coherent_amplitudes(n_particles: int, theta: float, phi: float) -> np.ndarray:
    """Normalized coherent-state amplitudes, binomials taken in log space."""
    k = n_particles - np.arange(n_particles + 1)  # j + m
    l = np.arange(n_particles + 1)  # j - m
    log_binom = 0.5 * (gammaln(n_particles + 1) - gammaln(k + 1) - gammaln(l + 1))
    log_mag = log_binom + xlogy(k, np.cos(theta / 2)) + xlogy(l, np.sin(theta / 2))
    amplitudes = np.exp(log_mag - log_mag.max()) * np.exp(1j * l * phi)
    return amplitudes / np.linalg.norm(amplitudes)


def coherent_state(n_particles: int, direction: BlochDirection) -> SpinState:
    """
    Spin coherent state pointing along `direction`.

    c_m = sqrt(C(N, j+m)) cos^(j+m)(θ/2) sin^(j-m)(θ/2) exp(+i(j-m)φ), so
    the mean spin points along (sinθ cosφ, sinθ sinφ, cosθ).
    """
    n = _check_particle_number(n_particles)
    amplitudes = coherent_amplitudes(n, direction.theta, direction.phi)
    return SpinState(n_particles=n, amplitudes=amplitudes)


def rotation_matrix(axis: Any, angle: float) -> np.ndarray:
    """Proper rotation by `angle` about `axis` (right-handed)."""
    axis = np.asarray(axis, dtype=float)
    norm = np.linalg.norm(axis)
    if axis.shape != (3,) or norm == 0:
        raise InvalidParameterError("rotation axis must be a non-zero 3-vector")
    return Rotation.from_rotvec(axis / norm * angle).as_matrix()


def _check_rotation(r: Any) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    if r.shape != (3, 3) or not np.all(np.isfinite(r)):
        raise InvalidParameterError("rotation must be a finite 3x3 matrix")
    if np.abs(r @ r.T - np.eye(3)).max() > ROTATION_TOLERANCE:
        raise InvalidParameterError("rotation matrix is not orthogonal")
    if abs(np.linalg.det(r) - 1.0) > ROTATION_TOLERANCE:
        raise InvalidParameterError("rotation matrix must have determinant +1")
    return r


def rotate_tensor(tensor: TwistingTensor, r: Any) -> TwistingTensor:
    """χ' = R χ Rᵀ and ω' = R ω."""
    r = _check_rotation(r)
    return TwistingTensor(chi=r @ tensor.chi @ r.T, omega=r @ tensor.omega)


def _classify(chi_y: float, chi_z: float, chi_x: float) -> TensorClass:
    spread = chi_x - chi_y
    scale = max(abs(chi_x), abs(chi_y), abs(chi_z))
    if spread <= 64 * np.finfo(float).eps * scale:
        return TensorClass.FREE
    tolerance = CLASS_TOLERANCE * spread
    if chi_x - chi_z <= tolerance or chi_z - chi_y <= tolerance:
        return TensorClass.OAT
    if abs(chi_z - 0.5 * (chi_x + chi_y)) <= tolerance:
        return TensorClass.TACT
    return TensorClass.GENERAL


def canonicalize_tensor(tensor: TwistingTensor) -> CanonicalForm:
    """
    Diagonalize χ and classify the squeezing scenario.

    Frame rows are the canonical x (largest eigenvalue), y (smallest) and
    z (middle) axes. An already diagonal χ keeps lab axes, ties broken by
    axis order.

    Args:
        tensor: Twisting tensor in any frame.

    Returns:
        CanonicalForm with eigenvalues (χ_y, χ_z, χ_x) ascending.
    """
    chi = tensor.chi
    if tensor.is_diagonal:
        diagonal = np.diag(chi)
        order = np.argsort(diagonal, kind="stable")
        eigenvalues = diagonal[order]
        vectors = np.eye(3)[:, order]
    else:
        eigenvalues, vectors = eigh(chi)
        residual = np.abs(chi @ vectors - vectors * eigenvalues).max()
        if residual > 1e-12 * max(1.0, float(np.abs(chi).max())):
            logger.warning("Diagonalizer residual %.3e exceeds tolerance", residual)
    frame = np.array([vectors[:, 2], vectors[:, 0], vectors[:, 1]])
    if np.linalg.det(frame) < 0:
        frame[2] *= -1
    chi_y, chi_z, chi_x = (float(e) for e in eigenvalues)
    tensor_class = _classify(chi_y, chi_z, chi_x)
    logger.debug("Canonical eigenvalues (%g, %g, %g): %s", chi_y, chi_z, chi_x, tensor_class.value)
    frame.setflags(write=False)
    return CanonicalForm(eigenvalues=(chi_y, chi_z, chi_x), frame=frame, tensor_class=tensor_class)


def canonical_tensor(tensor: TwistingTensor) -> TwistingTensor:
    """The tensor expressed in its canonical diagonal frame."""
    return rotate_tensor(tensor, canonicalize_tensor(tensor).frame)
