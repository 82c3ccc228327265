"""Exact computations with countably Markov set-valued interval functions."""

from .conjugacy import HomeoChain, PiecewiseHomeo, apply_H, build_chain, lift_h, verify_commuting
from .functions import (
    Box,
    FiniteGraph,
    GeneratedFn,
    GraphSegment,
    SegmentFamily,
    closed_graph_check,
    evaluate,
    surjective_graph_check,
)
from .invlimit import DepthNApprox, approximate, hausdorff_distance, membership_check, transport_test
from .io import FunctionDocument, load_document, load_fixture, parse_document, serialize
from .limits import lim_down, lim_sampling_oracle, lim_up
from .markov import MarkovReport, verify_cmif
from .partition import MarkovPartition, validate_partition
from .pattern import PatternMap, check_same_pattern, find_pattern_map, identity_map, tau_apply
from .render import render_svg
from .sets import ClosedSet1D, hausdorff_1d

__version__ = "0.1.0"

__all__ = [
    "Box",
    "ClosedSet1D",
    "DepthNApprox",
    "FiniteGraph",
    "FunctionDocument",
    "GeneratedFn",
    "GraphSegment",
    "HomeoChain",
    "MarkovPartition",
    "MarkovReport",
    "PatternMap",
    "PiecewiseHomeo",
    "SegmentFamily",
    "apply_H",
    "approximate",
    "build_chain",
    "check_same_pattern",
    "closed_graph_check",
    "evaluate",
    "find_pattern_map",
    "hausdorff_1d",
    "hausdorff_distance",
    "identity_map",
    "lift_h",
    "lim_down",
    "lim_sampling_oracle",
    "lim_up",
    "load_document",
    "load_fixture",
    "membership_check",
    "parse_document",
    "render_svg",
    "serialize",
    "surjective_graph_check",
    "tau_apply",
    "transport_test",
    "validate_partition",
    "verify_cmif",
]
