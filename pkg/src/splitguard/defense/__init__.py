"""Netlist randomization, correction cells, lifting and BEOL restoration."""

from ..physical.extract import extract_netlist
from .cells import (DEFAULT_LIFT_LAYER, CellPlacementError, LiftPlan, attach_correction_cells,
                    naive_lift, restore)
from .flow import SWAP_PULL, Protection, build_protected, protect, protected_placement
from .randomize import LedgerEntry, SwapLedger, randomize, undo_swaps

__all__ = ["extract_netlist", "DEFAULT_LIFT_LAYER", "CellPlacementError", "LiftPlan",
           "attach_correction_cells", "naive_lift", "restore", "SWAP_PULL", "Protection",
           "build_protected", "protect", "protected_placement", "LedgerEntry", "SwapLedger",
           "randomize", "undo_swaps"]
