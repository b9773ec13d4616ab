"""EH-MEC rate maximizer version information."""

__title__ = "ehmec"
__version__ = "1.0.0"
__description__ = "Offline weighted computation-rate maximization for energy-harvesting MEC"
__author__ = "Borys Nosatiuk"
__author_email__ = "b.nosatiuk@soton.ac.uk"
__license__ = "MIT"


SUPPORTED_SCHEMES = [
    "proposed",
    "equal_energy",
    "local_only",
    "full_offload",
]
