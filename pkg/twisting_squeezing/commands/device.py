"""`device` command: report the twisting tensor of an interferometer chain or LMG model."""

import logging

from ..errors import ConfigError
from ..models import ChiGaps, CommandResult, DeviceReport, RunConfig, TwistingTensor
from ..tools.config_tools import resolve_tensor
from ..tools.output_tools import check_writable, write_json
from ..tools.spin_algebra import canonicalize_tensor
from .base import guarded

logger = logging.getLogger(__name__)


def device_report(tensor: TwistingTensor) -> DeviceReport:
    form = canonicalize_tensor(tensor)
    gaps = ChiGaps.from_eigenvalues(*form.diagonal)
    return DeviceReport(
        chi=tensor.chi.tolist(),
        omega=tensor.omega.tolist(),
        eigenvalues=list(form.eigenvalues),
        frame=form.frame.tolist(),
        tensor_class=form.tensor_class,
        gaps={"d_chi_x": gaps.d_chi_x, "d_chi_y": gaps.d_chi_y, "d_chi": gaps.d_chi},
    )


@guarded("device")
def cmd_device(config: RunConfig) -> CommandResult:
    """Map `stages` or `lmg` to (χ, ω) and write the report as JSON when --out is set."""
    if config.stages is None and config.lmg is None:
        raise ConfigError("device needs stages or lmg in the config")
    if config.out:
        check_writable([config.out])
    report = device_report(resolve_tensor(config))
    logger.info("Device tensor class %s, eigenvalues %s", report.tensor_class.value, report.eigenvalues)
    paths = [write_json(report, config.out)] if config.out else []
    return CommandResult(command="device", success=True, output_paths=paths, rows=1,
                         summary=report.model_dump(mode="json"))
