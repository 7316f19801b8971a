"""Time-series commands: `evolve` (one engine) and `compare` (finite N against N → ∞)."""

import logging
from typing import List, Tuple

import numpy as np
import pandas as pd

from ..errors import ConfigError, NumericError
from ..models import (
    ChiGaps,
    CommandResult,
    ControlMode,
    Engine,
    RunConfig,
    ScaledMomentState,
    SqueezingRecord,
    TwistingTensor,
)
from ..tools.analytic import pole_locked_closed_form, rate_for_tensor, variance_closed_form
from ..tools.config_tools import require_diagonal, require_output, require_particles, resolve_tensor
from ..tools.exact_engine import coherent_moments, exact_trajectory, moments, squeezing_parameter
from ..tools.gaussian_engine import integrate_full, integrate_scaled, scaled_record
from ..tools.grid_tools import map_rows
from ..tools.output_tools import check_writable, records_to_frame, write_csv
from ..tools.spin_algebra import angular_momentum_matrices, canonicalize_tensor, coherent_state
from .base import guarded

logger = logging.getLogger(__name__)


def sample_taus(config: RunConfig) -> np.ndarray:
    """τ of every kept step: each `stride`-th RK step plus the last."""
    n_steps = int(round(config.tau_max / config.dtau))
    if n_steps == 0:
        return np.zeros(1)
    steps = list(range(0, n_steps + 1, config.stride))
    if steps[-1] != n_steps:
        steps.append(n_steps)
    return np.array(steps) * (config.tau_max / n_steps)


def _pole_sign(config: RunConfig) -> float:
    return 1.0 if config.theta0 < 0.5 * np.pi else -1.0


def _exact_records(config: RunConfig, tensor: TwistingTensor, n_particles: int,
                   taus: np.ndarray) -> List[SqueezingRecord]:
    state = coherent_state(n_particles, config.initial_direction)
    states = exact_trajectory(state, tensor, taus / n_particles, config.control_law(),
                              dt=config.dt_control)
    ops = angular_momentum_matrices(n_particles)
    records = []
    for row, (tau, psi) in enumerate(zip(taus, states)):
        m = moments(psi, ops)
        try:
            xi2, alpha = squeezing_parameter(m, n_particles)
        except NumericError as exc:
            raise NumericError(f"row {row} (tau={tau:g}): {exc}") from exc
        records.append(SqueezingRecord(tau=tau, j_mean=m.j_mean, variance=m.variance, xi2=xi2,
                                       alpha=alpha, rate=rate_for_tensor(tensor, m.j_mean)))
    return records


def _check_scaled(config: RunConfig, tensor: TwistingTensor, engine: str) -> Tuple[float, float, float]:
    eigs = require_diagonal(tensor, engine)
    if any(tensor.omega):
        raise ConfigError(f"{engine} takes a scaled rotation via omega_tilde, not omega")
    if config.control == ControlMode.FIXED:
        raise ConfigError(f"{engine} supports control none or pole-lock")
    if config.control == ControlMode.POLE_LOCK and config.omega_tilde != 0.0:
        raise ConfigError("pole-lock sets omega_tilde itself; leave omega_tilde at 0")
    return tuple(float(value) for value in eigs)


def _analytic_plan(config: RunConfig, tensor: TwistingTensor) -> Tuple[Tuple[float, float, float], float]:
    """Canonical eigenvalues (χ_x, χ_y, χ_z) and the starting pole in that frame."""
    _check_scaled(config, tensor, "analytic")
    if config.omega_tilde != 0.0:
        raise ConfigError("closed forms exist only for omega_tilde = 0 or pole-lock")
    form = canonicalize_tensor(tensor)
    if abs(abs(form.frame[2, 2]) - 1.0) > 1e-12:
        raise ConfigError("closed forms need the middle eigenvalue of chi on the z axis")
    return form.diagonal, _pole_sign(config) * float(np.sign(form.frame[2, 2]))


def analytic_variances(chi_eigs: Tuple[float, float, float], tau: float, j: float,
                       pole_lock: bool) -> Tuple[float, float, float]:
    if pole_lock:
        return pole_locked_closed_form(chi_eigs, tau, j)[:3]
    gaps = ChiGaps.from_eigenvalues(*chi_eigs)
    return variance_closed_form(gaps, tau, j)


def _analytic_records(config: RunConfig, tensor: TwistingTensor,
                      taus: np.ndarray) -> List[SqueezingRecord]:
    chi_eigs, j = _analytic_plan(config, tensor)
    pole_lock = config.control == ControlMode.POLE_LOCK
    return [scaled_record(tau, np.array([*analytic_variances(chi_eigs, tau, j, pole_lock), j]), chi_eigs)
            for tau in taus]


@guarded("evolve")
def cmd_evolve(config: RunConfig) -> CommandResult:
    """
    Integrate one engine and write the squeezing time series as CSV.

    Rows are (tau, jx, jy, jz, vxx, vyy, vzz, vxy, vxz, vyz, xi2, alpha, Q).
    Exact and full Gaussian rows are in spin units; scaled and analytic rows
    carry j and the scaled variances.
    """
    out = require_output(config)
    check_writable([out])
    tensor = resolve_tensor(config)
    engine = config.engine
    taus = sample_taus(config)

    if engine == Engine.EXACT:
        n = require_particles(config, "engine exact")
        records = _exact_records(config, tensor, n, taus)
    elif engine == Engine.GAUSSIAN_FULL:
        n = require_particles(config, "engine gaussian-full")
        m0 = coherent_moments(n, config.initial_direction)
        records = integrate_full(m0, tensor, n, config.tau_max, config.dtau,
                                 config.control_law(), config.stride)
    elif engine == Engine.GAUSSIAN_SCALED:
        eigs = _check_scaled(config, tensor, "gaussian-scaled")
        s0 = ScaledMomentState.coherent(_pole_sign(config))
        records = integrate_scaled(s0, eigs, config.omega_tilde, config.n_particles,
                                   config.tau_max, config.dtau,
                                   pole_lock=config.control == ControlMode.POLE_LOCK,
                                   stride=config.stride)
    else:
        records = _analytic_records(config, tensor, taus)

    frame = records_to_frame(records, config.n_particles if config.physical_time else None)
    path = write_csv(frame, out)
    xi2 = frame["xi2"].to_numpy()
    return CommandResult(
        command="evolve",
        success=True,
        output_paths=[path],
        rows=len(frame),
        summary={"engine": engine.value, "final_xi2": float(xi2[-1]), "min_xi2": float(xi2.min())},
    )


def _exact_xi2(config: RunConfig, tensor: TwistingTensor, n_particles: int,
               taus: np.ndarray) -> np.ndarray:
    return np.array([r.xi2 for r in _exact_records(config, tensor, n_particles, taus)])


@guarded("compare")
def cmd_compare(config: RunConfig) -> CommandResult:
    """One exact ξ² column per N in `n_list` next to the N → ∞ closed form."""
    out = require_output(config)
    check_writable([out])
    if not config.n_list:
        raise ConfigError("compare needs at least one particle number in n_list (--n-list)")
    if config.physical_time:
        raise ConfigError("compare reports scaled time only")
    if not config.starts_at_pole:
        raise ConfigError("compare needs a pole start (theta0 = 0 or pi)")
    tensor = resolve_tensor(config)
    chi_eigs, j = _analytic_plan(config, tensor)
    pole_lock = config.control == ControlMode.POLE_LOCK
    taus = sample_taus(config)
    logger.info("Comparing N=%s over %d samples", config.n_list, taus.size)

    columns = {"tau": taus}
    finite = map_rows(lambda n: _exact_xi2(config, tensor, n, taus), config.n_list)
    for n, xi2 in zip(config.n_list, finite):
        columns[f"xi2_N{n}"] = xi2
    columns["xi2_inf"] = np.array([
        scaled_record(tau, np.array([*analytic_variances(chi_eigs, tau, j, pole_lock), j]), chi_eigs).xi2
        for tau in taus
    ])
    frame = pd.DataFrame(columns)
    path = write_csv(frame, out)
    return CommandResult(command="compare", success=True, output_paths=[path], rows=len(frame),
                         summary={"n_list": list(config.n_list),
                                  "final_xi2": {k: float(v[-1]) for k, v in columns.items() if k != "tau"}})
