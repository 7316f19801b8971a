"""Maps device parameters (Kerr interferometer, LMG model) onto twisting tensors."""

import logging
from typing import Iterable, Tuple, Union

import numpy as np

from ..errors import InvalidParameterError
from ..models import ChainedStage, KerrStage, LmgParameters, TwistingTensor
from .spin_algebra import rotate_tensor, rotation_matrix

logger = logging.getLogger(__name__)

StageWithRotation = Union[ChainedStage, Tuple[KerrStage, np.ndarray]]


def interferometer_to_tensor(stage: KerrStage) -> TwistingTensor:
    """
    Tensor of one crossed-resonator pass with a balanced beam splitter.

    χ_zz = (γ_a + γ_b)/Δt, χ_xx = (γ_c + γ_d)/Δt, ω_z = (N−1)(γ_a − γ_b)/Δt
    and ω_x = (N−1)(γ_c − γ_d)/Δt. The particle-number term is a global phase.
    """
    if stage.roundtrip_dt <= 0:
        raise InvalidParameterError(f"round-trip duration must be positive, got {stage.roundtrip_dt}")
    dt = stage.roundtrip_dt
    n_minus_one = stage.n_particles - 1
    chi = np.diag([(stage.gamma_c + stage.gamma_d) / dt, 0.0, (stage.gamma_a + stage.gamma_b) / dt])
    omega = [n_minus_one * (stage.gamma_c - stage.gamma_d) / dt, 0.0,
             n_minus_one * (stage.gamma_a - stage.gamma_b) / dt]
    return TwistingTensor(chi=chi, omega=omega)


def _as_pair(item: StageWithRotation) -> Tuple[KerrStage, np.ndarray]:
    if isinstance(item, ChainedStage):
        return item.stage, rotation_matrix(item.axis, item.angle)
    stage, rotation = item
    return stage, np.asarray(rotation, dtype=float)


def chain_stages(stages: Iterable[StageWithRotation]) -> TwistingTensor:
    """
    Sum of rotated per-pass tensors for a chain of mixers and Kerr zones.

    Each item is a ChainedStage or a (KerrStage, rotation matrix) pair.
    Contributions add as commuting short-Δt terms.
    """
    chi = np.zeros((3, 3))
    omega = np.zeros(3)
    count = 0
    for item in stages:
        stage, rotation = _as_pair(item)
        contribution = rotate_tensor(interferometer_to_tensor(stage), rotation)
        chi += contribution.chi
        omega += contribution.omega
        count += 1
    if count == 0:
        raise InvalidParameterError("at least one stage is required")
    logger.debug("Chained %d stages", count)
    return TwistingTensor(chi=0.5 * (chi + chi.T), omega=omega)


def lmg_to_tensor(p: LmgParameters) -> TwistingTensor:
    """ω_z = Ω, χ_xx = V + W, χ_yy = V − W, everything else zero."""
    return TwistingTensor.diagonal(p.v_param + p.w_param, p.v_param - p.w_param, 0.0,
                                   omega=(0.0, 0.0, p.omega_big))


def lmg_to_stage(p: LmgParameters, n_particles: int, roundtrip_dt: float = 1.0) -> KerrStage:
    """
    Interferometer pass realizing an LMG model.

    γ_c = γ_d = W and γ_{a,b} = (W − V)/2 ± Ω/(2(N−1)), in units of Δt. The
    resulting tensor equals the LMG one minus (V − W)·1.
    """
    if n_particles < 2:
        raise InvalidParameterError("the LMG realization needs at least two particles")
    if roundtrip_dt <= 0:
        raise InvalidParameterError(f"round-trip duration must be positive, got {roundtrip_dt}")
    split = p.omega_big / (2 * (n_particles - 1))
    base = 0.5 * (p.w_param - p.v_param)
    return KerrStage(
        gamma_a=(base + split) * roundtrip_dt,
        gamma_b=(base - split) * roundtrip_dt,
        gamma_c=p.w_param * roundtrip_dt,
        gamma_d=p.w_param * roundtrip_dt,
        roundtrip_dt=roundtrip_dt,
        n_particles=n_particles,
    )
