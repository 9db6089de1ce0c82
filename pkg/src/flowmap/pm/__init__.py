from .extract import CorpusParseError, extract_pm
from .io import load_pm, save_pm
from .model import (
    VOID,
    CallEdge,
    DataFlowEdge,
    FieldDecl,
    FlowKind,
    MethodDefinition,
    MethodSignature,
    ProgramModel,
    PmError,
    SourceLocation,
    TypeDecl,
    endpoint_def,
    field_endpoint,
    local_endpoint,
    param_endpoint,
    return_endpoint,
    validate_pm,
)
from .queries import communicated_type, in_flows, out_flows, reachable_bwd

__all__ = [
    "VOID",
    "CallEdge",
    "CorpusParseError",
    "DataFlowEdge",
    "FieldDecl",
    "FlowKind",
    "MethodDefinition",
    "MethodSignature",
    "PmError",
    "ProgramModel",
    "SourceLocation",
    "TypeDecl",
    "communicated_type",
    "endpoint_def",
    "extract_pm",
    "field_endpoint",
    "in_flows",
    "load_pm",
    "local_endpoint",
    "out_flows",
    "param_endpoint",
    "reachable_bwd",
    "return_endpoint",
    "save_pm",
    "validate_pm",
]
