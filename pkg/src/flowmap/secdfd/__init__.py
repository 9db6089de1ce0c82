from .labels import LabelAssignment, LeakFinding, check_design_leaks, propagate_labels, trace_asset_origin
from .model import (
    Asset,
    AttackerZone,
    ContractKind,
    DfdFlow,
    DfdNode,
    Label,
    ModelError,
    NodeKind,
    ProcessContract,
    SecDfd,
    flow_member,
    validate,
)
from .parser import SecDfdParseError, parse_secdfd, print_secdfd

__all__ = [
    "Asset",
    "AttackerZone",
    "ContractKind",
    "DfdFlow",
    "DfdNode",
    "Label",
    "LabelAssignment",
    "LeakFinding",
    "ModelError",
    "NodeKind",
    "ProcessContract",
    "SecDfd",
    "SecDfdParseError",
    "check_design_leaks",
    "flow_member",
    "parse_secdfd",
    "print_secdfd",
    "propagate_labels",
    "trace_asset_origin",
    "validate",
]
