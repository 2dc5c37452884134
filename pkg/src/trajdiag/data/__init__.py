"""Bundled example circuits."""

from importlib import resources
from pathlib import Path


def biquad_path() -> Path:
    """Filesystem path of the bundled lowpass biquad netlist."""
    return Path(str(resources.files(__name__).joinpath("biquad.cir")))
