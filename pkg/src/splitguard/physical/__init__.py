"""Placement, routing, layer accounting and FEOL/BEOL splitting."""

from .layout import (CorrectionCell, LayoutError, Pad, PlacedCell, RoutedLayout, Segment, Via,
                     Wire, check_layout, read_layout, write_layout)
from .place import Placement, PlacementError, place
from .route import RoutingError, route
from .split import (BeolPart, Fragment, SplitTruth, SplitView, VPin, beol_part, merge, split,
                    split_with_truth)
from .stats import DistanceStats, LayerStats, distance_stats, layer_stats

__all__ = ["CorrectionCell", "LayoutError", "Pad", "PlacedCell", "RoutedLayout", "Segment", "Via",
           "Wire", "check_layout", "read_layout", "write_layout", "Placement", "PlacementError",
           "place", "RoutingError", "route", "BeolPart", "Fragment", "SplitTruth", "SplitView",
           "VPin", "beol_part", "merge", "split", "split_with_truth", "DistanceStats",
           "LayerStats", "distance_stats", "layer_stats"]
