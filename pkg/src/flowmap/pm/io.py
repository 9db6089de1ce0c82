"""Canonical JSON interchange for program models (.pm.json).

Serialization is canonical: arrays sorted by id, keys sorted, two-space
indent. save(load(bytes)) is byte-identical for canonical input and
load(save(pm)) is structurally the identity.
"""

from __future__ import annotations

import json

from .model import (
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
    validate_pm,
)


def save_pm(pm: ProgramModel) -> bytes:
    doc = {
        "types": [
            {
                "id": t.id,
                "qualifiedName": t.qualified_name,
                "memberFields": sorted(t.member_fields),
                "memberDefs": sorted(t.member_defs),
            }
            for t in sorted(pm.type_decls, key=lambda t: t.id)
        ],
        "methodNames": sorted(pm.method_names),
        "signatures": [
            {"id": s.id, "name": s.name, "params": list(s.param_types), "return": s.return_type}
            for s in sorted(pm.signatures, key=lambda s: s.id)
        ],
        "definitions": [
            {
                "id": d.id,
                "signature": d.signature,
                "declaringType": d.declaring_type,
                "loc": {
                    "file": d.location.file,
                    "lineStart": d.location.line_start,
                    "lineEnd": d.location.line_end,
                },
            }
            for d in sorted(pm.definitions, key=lambda d: d.id)
        ],
        "fields": [
            {"id": f.id, "name": f.name, "declaringType": f.declaring_type, "type": f.value_type}
            for f in sorted(pm.fields, key=lambda f: f.id)
        ],
        "calls": [
            {"caller": c.caller, "callee": c.callee, "site": c.site}
            for c in sorted(pm.calls, key=lambda c: (c.caller, c.site))
        ],
        "flows": [
            {
                "id": e.id,
                "kind": e.kind.value,
                "from": e.source,
                "to": e.target,
                "type": e.communicated_type,
            }
            for e in sorted(pm.flows, key=lambda e: e.id)
        ],
    }
    return (json.dumps(doc, indent=2, sort_keys=True) + "\n").encode("utf-8")


def load_pm(data: bytes) -> ProgramModel:
    try:
        doc = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as err:
        raise PmError(f"not a valid PM document: {err}") from None
    try:
        pm = ProgramModel(
            type_decls=tuple(
                TypeDecl(
                    id=t["id"],
                    qualified_name=t["qualifiedName"],
                    member_fields=tuple(t.get("memberFields", [])),
                    member_defs=tuple(t.get("memberDefs", [])),
                )
                for t in doc["types"]
            ),
            method_names=tuple(doc["methodNames"]),
            signatures=tuple(
                MethodSignature(
                    id=s["id"],
                    name=s["name"],
                    param_types=tuple(s["params"]),
                    return_type=s["return"],
                )
                for s in doc["signatures"]
            ),
            definitions=tuple(
                MethodDefinition(
                    id=d["id"],
                    signature=d["signature"],
                    declaring_type=d["declaringType"],
                    location=SourceLocation(
                        file=d["loc"]["file"],
                        line_start=d["loc"]["lineStart"],
                        line_end=d["loc"]["lineEnd"],
                    ),
                )
                for d in doc["definitions"]
            ),
            fields=tuple(
                FieldDecl(
                    id=f["id"],
                    name=f["name"],
                    declaring_type=f["declaringType"],
                    value_type=f["type"],
                )
                for f in doc["fields"]
            ),
            calls=tuple(
                CallEdge(caller=c["caller"], callee=c["callee"], site=c["site"])
                for c in doc["calls"]
            ),
            flows=tuple(
                DataFlowEdge(
                    id=e["id"],
                    kind=FlowKind(e["kind"]),
                    source=e["from"],
                    target=e["to"],
                    communicated_type=e["type"],
                )
                for e in doc["flows"]
            ),
        )
    except (KeyError, TypeError, ValueError) as err:
        raise PmError(f"schema violation: {err}") from None
    validate_pm(pm)
    return pm
