"""Bloch-sphere commands: coherent-state landscapes and Husimi snapshots."""

import logging

import numpy as np

from ..errors import ConfigError
from ..models import BlochGrid, CommandResult, Engine, RunConfig
from ..tools.analytic import landscape
from ..tools.config_tools import require_output, require_particles, resolve_tensor
from ..tools.exact_engine import evolve_exact, husimi, husimi_bend_index, husimi_quadrature
from ..tools.output_tools import check_writable, render_csv, render_json, sibling_path, write_outputs
from ..tools.spin_algebra import canonicalize_tensor, coherent_state
from .base import guarded

logger = logging.getLogger(__name__)


def _peak(grid: BlochGrid) -> dict:
    i, k = np.unravel_index(int(np.argmax(grid.values)), grid.values.shape)
    return {"max": float(grid.values[i, k]), "theta": float(grid.theta[i]), "phi": float(grid.phi[k])}


@guarded("landscape")
def cmd_landscape(config: RunConfig) -> CommandResult:
    """Write `<stem>_energy.csv`, `<stem>_rate.csv` and a JSON summary."""
    out = require_output(config)
    targets = [sibling_path(out, suffix, ext) for suffix, ext in
               (("_energy", ".csv"), ("_rate", ".csv"), ("_summary", ".json"))]
    check_writable(targets)
    n = require_particles(config, "landscape")
    tensor = resolve_tensor(config)
    energy, rate = landscape(tensor, n, config.grid)

    form = canonicalize_tensor(tensor)
    summary = {
        "tensor_class": form.tensor_class.value,
        "eigenvalues": list(form.eigenvalues),
        "pole_rate": float(rate.values[0, 0]),
        "rate_max": float(rate.values.max()),
        "rate_min": float(rate.values.min()),
        "energy_max": float(energy.values.max()),
        "energy_min": float(energy.values.min()),
    }
    paths = write_outputs(list(zip(targets, [render_csv(energy.to_frame("value")),
                                             render_csv(rate.to_frame("value")),
                                             render_json(summary)])))
    return CommandResult(command="landscape", success=True, output_paths=paths,
                         rows=2 * energy.values.size, summary=summary)


@guarded("husimi")
def cmd_husimi(config: RunConfig) -> CommandResult:
    """Evolve a coherent state exactly to tau_max and write its Husimi grid (theta, phi, q)."""
    out = require_output(config)
    if config.engine != Engine.EXACT:
        raise ConfigError("husimi needs engine exact")
    summary_path = sibling_path(out, "_summary", ".json")
    check_writable([out, summary_path])
    n = require_particles(config, "husimi")
    tensor = resolve_tensor(config)
    state = coherent_state(n, config.initial_direction)
    final = evolve_exact(state, tensor, config.tau_max / n, config.control_law(), config.dt_control)
    grid = husimi(final, config.grid)

    summary = {
        "tau": config.tau_max,
        "quadrature": husimi_quadrature(grid),
        "bend_index": husimi_bend_index(grid),
        **_peak(grid),
    }
    paths = write_outputs([(out, render_csv(grid.to_frame("q"))), (summary_path, render_json(summary))])
    logger.info("Husimi quadrature %.6f, bend index %.4f", summary["quadrature"], summary["bend_index"])
    return CommandResult(command="husimi", success=True, output_paths=paths,
                         rows=grid.values.size, summary=summary)
