"""Closed forms: principal variances, squeezing rate landscape and the ω̃ = 0 solutions."""

import logging
from typing import Optional, Tuple

import numpy as np

from ..errors import InvalidParameterError
from ..models import BlochDirection, BlochGrid, ChiGaps, GridSpec, TwistingTensor
from .grid_tools import direction_vectors, map_rows, vector_angles
from .spin_algebra import canonicalize_tensor

logger = logging.getLogger(__name__)

SERIES_THRESHOLD = 1e-6
TACT_TOLERANCE = 1e-12

Eigenvalues = Tuple[float, float, float]


def principal_variances(v_xx: float, v_yy: float, v_xy: float) -> Tuple[float, float]:
    """
    Principal variances of a 2×2 transverse block.

    Args:
        v_xx: Variance along the first transverse axis.
        v_yy: Variance along the second transverse axis.
        v_xy: Covariance.

    Returns:
        (V_+, V_-) with V_+ >= V_-.
    """
    if v_xx < 0 or v_yy < 0:
        raise InvalidParameterError(f"variances must be non-negative, got ({v_xx}, {v_yy})")
    mean = 0.5 * (v_xx + v_yy)
    radius = float(np.hypot(v_xy, 0.5 * (v_xx - v_yy)))
    return mean + radius, mean - radius


def minor_axis_angle(b11: float, b22: float, b12: float) -> float:
    """Minor-axis angle in [0, π), measured from e₁ towards −e₂."""
    major = 0.5 * np.arctan2(2.0 * b12, b11 - b22)
    return float(np.mod(-(major + 0.5 * np.pi), np.pi))


def _rate_terms(chi_eigs: Eigenvalues, theta, phi):
    chi_x, chi_y, chi_z = chi_eigs
    c2 = np.cos(theta) ** 2
    s2p = np.sin(phi) ** 2
    c2p = np.cos(phi) ** 2
    bracket = (chi_x * (c2 * c2p - s2p) + chi_y * (c2 * s2p - c2p)
               + chi_z * np.sin(theta) ** 2)
    skew = (chi_x - chi_y) * np.cos(theta) * np.sin(2 * phi)
    return bracket, skew


def squeezing_rate(chi_eigs: Eigenvalues, direction: BlochDirection,
                   j_norm: float) -> Tuple[float, float]:
    """
    Optimal squeezing rate Q and ellipse angle α of a state centered at `direction`.

    The direction is given in the diagonal frame of χ with eigenvalues
    (χ_x, χ_y, χ_z), in any order. α is measured in the local chart (θ̂, φ̂),
    using φ = 0 at the poles, and labels the minor axis.

    Args:
        chi_eigs: Diagonal elements (χ_x, χ_y, χ_z).
        direction: Center of the state.
        j_norm: Mean spin length |𝒥|.

    Returns:
        (Q, α)
    """
    if j_norm < 0:
        raise InvalidParameterError(f"spin length must be non-negative, got {j_norm}")
    phi = 0.0 if direction.is_pole else direction.phi
    bracket, skew = _rate_terms(chi_eigs, direction.theta, phi)
    rate = 2.0 * j_norm * float(np.hypot(bracket, skew))
    alpha = float(np.mod(0.5 * np.arctan2(-bracket, skew), np.pi))
    return rate, alpha


def squeezing_rate_in_frame(chi: np.ndarray, direction: BlochDirection,
                            j_norm: float) -> Tuple[float, float]:
    """Rate from χ rotated into the chart (θ̂, φ̂) of `direction`: Q = 2|𝒥|√((χ'₁₁−χ'₂₂)² + 4χ'₁₂²)."""
    chi = np.asarray(chi, dtype=float)
    theta = direction.theta
    phi = 0.0 if direction.is_pole else direction.phi
    e1 = np.array([np.cos(theta) * np.cos(phi), np.cos(theta) * np.sin(phi), -np.sin(theta)])
    e2 = np.array([-np.sin(phi), np.cos(phi), 0.0])
    b11, b22, b12 = e1 @ chi @ e1, e2 @ chi @ e2, e1 @ chi @ e2
    rate = 2.0 * j_norm * float(np.hypot(b11 - b22, 2.0 * b12))
    alpha = float(np.mod(0.5 * np.arctan2(-(b11 - b22), -2.0 * b12), np.pi))
    return rate, alpha


def rate_for_tensor(tensor: TwistingTensor, j_mean: np.ndarray) -> float:
    """Q of a state with mean spin `j_mean` (lab frame) under `tensor`."""
    length = float(np.linalg.norm(j_mean))
    if length == 0.0:
        return 0.0
    form = canonicalize_tensor(tensor)
    direction = BlochDirection.from_vector(form.frame @ j_mean)
    return squeezing_rate(form.diagonal, direction, length)[0]


def _sinhc(x: float) -> float:
    if abs(x) < SERIES_THRESHOLD:
        return 1.0 + x * x / 6.0
    return float(np.sinh(x) / x)


def _check_tau(tau: float) -> None:
    if not np.isfinite(tau) or tau < 0:
        raise InvalidParameterError(f"tau must be finite and non-negative, got {tau}")


def variance_closed_form(gaps: ChiGaps, tau: float, j: float = -1.0) -> Tuple[float, float, float]:
    """
    Scaled variances for ω̃ = 0 and N → ∞, starting from a coherent state.

    The hyperbolic expressions are rewritten with sinh(x)/x so the one-axis
    limits (a vanishing gap) are exact. The printed closed forms belong to the
    j = −1 pole; j = +1 flips the sign of v_xy.

    Args:
        gaps: Eigenvalue gaps Δχ_x, Δχ_y.
        tau: Scaled time.
        j: Pole polarization, only its sign is used.

    Returns:
        (v_xx, v_yy, v_xy)
    """
    _check_tau(tau)
    spread = gaps.spread
    if spread == 0.0:
        logger.debug("Both gaps vanish: free dynamics")
        return 1.0, 1.0, 0.0
    half = _sinhc(0.5 * gaps.d_chi * tau) ** 2 * tau * tau
    v_xx = 1.0 + spread * gaps.d_chi_y * half
    v_yy = 1.0 + spread * gaps.d_chi_x * half
    sign = 1.0 if j >= 0 else -1.0
    v_xy = -sign * spread * tau * _sinhc(gaps.d_chi * tau)
    return v_xx, v_yy, v_xy


def xi2_closed_form(gaps: ChiGaps, tau: float) -> float:
    """ξ² for ω̃ = 0 and N → ∞, with dedicated TACT and OAT branches."""
    _check_tau(tau)
    spread = gaps.spread
    if spread == 0.0:
        return 1.0
    if abs(gaps.d_chi_x - gaps.d_chi_y) <= TACT_TOLERANCE * spread:
        return float(np.exp(-spread * tau))
    if gaps.d_chi_x == 0.0 or gaps.d_chi_y == 0.0:
        x = spread * tau
        return float(1.0 / (1.0 + 0.5 * x * x + x * np.sqrt(1.0 + 0.25 * x * x)))
    c = spread * tau * _sinhc(0.5 * gaps.d_chi * tau)
    a_minus_one = 0.5 * c * c
    a = 1.0 + a_minus_one
    return float(1.0 / (a + np.sqrt(a_minus_one * (a + 1.0))))


def pole_locked_closed_form(chi_eigs: Eigenvalues, tau: float,
                            j: float = 1.0) -> Tuple[float, float, float, float]:
    """(v_xx, v_yy, v_xy, ξ²) under the optimal rotation: ξ² = exp(−|j|(χ_x − χ_y)τ)."""
    _check_tau(tau)
    chi_x, chi_y, _ = chi_eigs
    x = abs(j) * (chi_x - chi_y) * tau
    sign = 1.0 if j >= 0 else -1.0
    v = float(np.cosh(x))
    return v, v, -sign * float(np.sinh(x)), float(np.exp(-abs(x)))


def landscape(tensor: TwistingTensor, n_particles: int, grid: GridSpec,
              workers: Optional[int] = None) -> Tuple[BlochGrid, BlochGrid]:
    """
    ⟨H⟩ and Q of spin coherent states over the sphere.

    The energy uses coherent moments 𝒥 = (N/2)n and V = (N/4)(1 − nnᵀ);
    the rate maps each direction into the canonical frame of χ and uses
    |𝒥| = N/2.

    Args:
        tensor: Twisting tensor in the lab frame.
        n_particles: Particle number N.
        grid: θ×φ lattice.
        workers: Thread count for the row map.

    Returns:
        (energy, rate) grids.
    """
    if n_particles < 1:
        raise InvalidParameterError(f"particle number must be positive, got {n_particles}")
    thetas, phis = grid.thetas(), grid.phis()
    form = canonicalize_tensor(tensor)
    chi, omega = tensor.chi, tensor.omega
    trace = float(np.trace(chi))
    half, quarter = n_particles / 2, n_particles / 4
    logger.info("Landscape for %s tensor, N=%d on %dx%d grid", form.tensor_class.value,
                n_particles, grid.n_theta, grid.n_phi)

    def row(theta: float) -> Tuple[np.ndarray, np.ndarray]:
        n = direction_vectors(np.array([theta]), phis)[0]
        quad = np.einsum("pk,kl,pl->p", n, chi, n)
        energy = half * (n @ omega) + half * half * quad + quarter * (trace - quad)
        theta_c, phi_c = vector_angles(n @ form.frame.T)
        bracket, skew = _rate_terms(form.diagonal, theta_c, phi_c)
        return energy, 2.0 * half * np.hypot(bracket, skew)

    rows = map_rows(row, thetas, workers)
    energy = np.array([r[0] for r in rows])
    rate = np.array([r[1] for r in rows])
    return (BlochGrid(label="energy", theta=thetas, phi=phis, values=energy),
            BlochGrid(label="rate", theta=thetas, phi=phis, values=rate))
