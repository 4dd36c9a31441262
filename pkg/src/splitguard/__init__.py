"""Split-manufacturing protection by netlist randomization, with the attacks that test it."""

__version__ = "0.1.0"
