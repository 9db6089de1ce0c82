"""Implementation-level program model (PM).

A code graph of type declarations, method names, signatures, definitions,
fields, call edges and data-flow edges. Flow endpoints are encoded as
strings so they can travel through the JSON interchange format unchanged:

    param:<defId>:<k>   k-th parameter of a definition
    return:<defId>      return value of a definition
    field:<fieldId>     a field (shared, flow-insensitive)
    local:<defId>:<n>   n-th local slot of a definition
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

VOID = "void"


class FlowKind(Enum):
    PARAM_PASS = "PARAM_PASS"
    RETURN_FLOW = "RETURN_FLOW"
    INTRA = "INTRA"


class PmError(ValueError):
    pass


def param_endpoint(def_id: str, index: int) -> str:
    return f"param:{def_id}:{index}"


def return_endpoint(def_id: str) -> str:
    return f"return:{def_id}"


def field_endpoint(field_id: str) -> str:
    return f"field:{field_id}"


def local_endpoint(def_id: str, ordinal: int) -> str:
    return f"local:{def_id}:{ordinal}"


def endpoint_def(endpoint: str) -> str | None:
    """Definition owning an endpoint; None for field endpoints."""
    kind, _, rest = endpoint.partition(":")
    if kind == "field":
        return None
    if kind in ("param", "local"):
        return rest.rsplit(":", 1)[0]
    if kind == "return":
        return rest
    raise PmError(f"malformed endpoint '{endpoint}'")


@dataclass(frozen=True)
class TypeDecl:
    id: str
    qualified_name: str
    member_fields: tuple[str, ...] = ()
    member_defs: tuple[str, ...] = ()

    @property
    def simple_name(self) -> str:
        return self.qualified_name.rsplit(".", 1)[-1]


@dataclass(frozen=True)
class FieldDecl:
    id: str
    name: str
    declaring_type: str
    value_type: str


@dataclass(frozen=True)
class MethodSignature:
    id: str
    name: str
    param_types: tuple[str, ...]
    return_type: str  # type id or VOID


@dataclass(frozen=True)
class SourceLocation:
    file: str
    line_start: int
    line_end: int


@dataclass(frozen=True)
class MethodDefinition:
    id: str
    signature: str
    declaring_type: str
    location: SourceLocation


@dataclass(frozen=True)
class CallEdge:
    caller: str
    callee: str
    site: int  # ordinal of the call site within the caller


@dataclass(frozen=True)
class DataFlowEdge:
    id: str
    kind: FlowKind
    source: str  # endpoint
    target: str  # endpoint
    communicated_type: str


@dataclass(frozen=True)
class ProgramModel:
    type_decls: tuple[TypeDecl, ...] = ()
    method_names: tuple[str, ...] = ()
    signatures: tuple[MethodSignature, ...] = ()
    definitions: tuple[MethodDefinition, ...] = ()
    fields: tuple[FieldDecl, ...] = ()
    calls: tuple[CallEdge, ...] = ()
    flows: tuple[DataFlowEdge, ...] = ()

    def type_by_id(self, type_id: str) -> TypeDecl:
        return self._types()[type_id]

    def signature_by_id(self, sig_id: str) -> MethodSignature:
        return self._sigs()[sig_id]

    def definition_by_id(self, def_id: str) -> MethodDefinition:
        return self._defs()[def_id]

    def field_by_id(self, field_id: str) -> FieldDecl:
        return self._fields()[field_id]

    def definitions_of_signature(self, sig_id: str) -> list[MethodDefinition]:
        return [d for d in self.definitions if d.signature == sig_id]

    def signatures_named(self, name: str) -> list[MethodSignature]:
        return [s for s in self.signatures if s.name == name]

    def render_definition(self, def_id: str) -> str:
        """Human-readable signature string: Type.method(P1,P2):R."""
        d = self.definition_by_id(def_id)
        return self.render_signature(d.signature, self.type_by_id(d.declaring_type).qualified_name)

    def render_signature(self, sig_id: str, type_prefix: str | None = None) -> str:
        s = self.signature_by_id(sig_id)
        params = ",".join(self._type_name(t) for t in s.param_types)
        ret = self._type_name(s.return_type)
        prefix = f"{type_prefix}." if type_prefix else ""
        return f"{prefix}{s.name}({params}):{ret}"

    def _type_name(self, type_id: str) -> str:
        if type_id == VOID:
            return VOID
        return self.type_by_id(type_id).qualified_name

    # Lookup tables are rebuilt lazily; the model itself is immutable.
    def _types(self) -> dict[str, TypeDecl]:
        return {t.id: t for t in self.type_decls}

    def _sigs(self) -> dict[str, MethodSignature]:
        return {s.id: s for s in self.signatures}

    def _defs(self) -> dict[str, MethodDefinition]:
        return {d.id: d for d in self.definitions}

    def _fields(self) -> dict[str, FieldDecl]:
        return {f.id: f for f in self.fields}


def validate_pm(pm: ProgramModel) -> None:
    type_ids = {t.id for t in pm.type_decls}
    sig_ids = {s.id for s in pm.signatures}
    def_ids = {d.id for d in pm.definitions}
    field_ids = {f.id for f in pm.fields}
    names = set(pm.method_names)

    qnames = [t.qualified_name for t in pm.type_decls]
    if len(set(qnames)) != len(qnames):
        raise PmError("duplicate qualified type name")

    for s in pm.signatures:
        if s.name not in names:
            raise PmError(f"signature {s.id} references unknown method name '{s.name}'")
        for t in s.param_types:
            if t not in type_ids:
                raise PmError(f"signature {s.id} references unknown type '{t}'")
        if s.return_type != VOID and s.return_type not in type_ids:
            raise PmError(f"signature {s.id} has unknown return type '{s.return_type}'")
    sig_keys = [(s.name, s.param_types, s.return_type) for s in pm.signatures]
    if len(set(sig_keys)) != len(sig_keys):
        raise PmError("duplicate signature (name, params, return)")

    for d in pm.definitions:
        if d.signature not in sig_ids:
            raise PmError(f"definition {d.id} references unknown signature '{d.signature}'")
        if d.declaring_type not in type_ids:
            raise PmError(f"definition {d.id} has unknown declaring type '{d.declaring_type}'")
    def_keys = [(d.signature, d.declaring_type) for d in pm.definitions]
    if len(set(def_keys)) != len(def_keys):
        raise PmError("duplicate definition (signature, declaringType)")

    for f in pm.fields:
        if f.declaring_type not in type_ids or f.value_type not in type_ids:
            raise PmError(f"field {f.id} references unknown type")

    for c in pm.calls:
        if c.caller not in def_ids or c.callee not in def_ids:
            raise PmError("call edge endpoint does not resolve")

    for e in pm.flows:
        for ep in (e.source, e.target):
            _check_endpoint(ep, def_ids, field_ids)
        if e.communicated_type == VOID or e.communicated_type not in type_ids:
            raise PmError(f"flow {e.id} has invalid communicated type '{e.communicated_type}'")
        if e.kind is FlowKind.PARAM_PASS and not e.target.startswith("param:"):
            raise PmError(f"PARAM_PASS flow {e.id} must target a parameter endpoint")
        if e.kind is FlowKind.RETURN_FLOW and not e.source.startswith("return:"):
            raise PmError(f"RETURN_FLOW flow {e.id} must originate at a return endpoint")
    flow_ids = [e.id for e in pm.flows]
    if len(set(flow_ids)) != len(flow_ids):
        raise PmError("duplicate flow id")


def _check_endpoint(endpoint: str, def_ids: set[str], field_ids: set[str]) -> None:
    kind = endpoint.split(":", 1)[0]
    if kind == "field":
        if endpoint.split(":", 1)[1] not in field_ids:
            raise PmError(f"endpoint '{endpoint}' references unknown field")
        return
    owner = endpoint_def(endpoint)
    if owner not in def_ids:
        raise PmError(f"endpoint '{endpoint}' references unknown definition")
