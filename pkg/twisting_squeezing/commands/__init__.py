from .device import cmd_device
from .evolve import cmd_compare, cmd_evolve
from .grids import cmd_husimi, cmd_landscape

COMMANDS = {
    "evolve": cmd_evolve,
    "compare": cmd_compare,
    "landscape": cmd_landscape,
    "husimi": cmd_husimi,
    "device": cmd_device,
}
