"""Textual DSL for diagrams (.secdfd files).

One declaration per line, keyword first:

    model Storage
    external Plugin
    process Get_Value
    store Cache
    asset secret : String high from Decrypt_Data to Plugin
    flow 1 : Plugin -> Get_Value carrying request
    contract Decrypt_Data decrypt in encrData,password out secret
    zone Outside { Plugin, flow:5 }

`#` starts a comment. Trust boundaries (`boundary ...`) are accepted and
ignored by all analyses.
"""

from __future__ import annotations

import re

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
    validate,
)

_IDENT = r"[A-Za-z_][A-Za-z0-9_.]*"

_ASSET_RE = re.compile(
    rf"^asset\s+({_IDENT})\s*:\s*({_IDENT})\s+(high|low)\s+from\s+({_IDENT})\s+to\s+(.+)$"
)
_FLOW_RE = re.compile(
    rf"^flow\s+(\d+)\s*:\s*({_IDENT})\s*->\s*({_IDENT})\s+carrying\s+(.+)$"
)
_CONTRACT_RE = re.compile(
    rf"^contract\s+({_IDENT})\s+(encrypt|hash|decrypt|forward|join)\s+in\s+(\S+)\s+out\s+(\S+)$"
)
_ZONE_RE = re.compile(rf"^zone\s+({_IDENT})\s*\{{(.*)\}}$")

_CONTRACT_KINDS = {
    "encrypt": ContractKind.ENCRYPT_OR_HASH,
    "hash": ContractKind.ENCRYPT_OR_HASH,
    "decrypt": ContractKind.DECRYPT,
    "forward": ContractKind.FORWARD,
    "join": ContractKind.JOIN,
}


class SecDfdParseError(ModelError):
    pass


def _split_list(text: str) -> tuple[str, ...]:
    return tuple(part.strip() for part in text.split(",") if part.strip())


def parse_secdfd(text: str) -> SecDfd:
    """Parse and validate a diagram; raises SecDfdParseError with a line number."""
    name = ""
    nodes: dict[str, NodeKind] = {}
    contracts: dict[str, list[ProcessContract]] = {}
    flows: list[DfdFlow] = []
    assets: list[Asset] = []
    zones: list[AttackerZone] = []

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        keyword = line.split(None, 1)[0]
        try:
            if keyword == "model":
                name = _require_ident(line, "model")
            elif keyword in ("process", "external", "store"):
                ident = _require_ident(line, keyword)
                if ident in nodes:
                    raise SecDfdParseError(f"duplicate node identifier '{ident}'")
                nodes[ident] = {
                    "process": NodeKind.PROCESS,
                    "external": NodeKind.EXTERNAL_ENTITY,
                    "store": NodeKind.DATA_STORE,
                }[keyword]
            elif keyword == "asset":
                m = _ASSET_RE.match(line)
                if not m:
                    raise SecDfdParseError("malformed asset declaration")
                assets.append(
                    Asset(
                        name=m.group(1),
                        value_type=m.group(2),
                        label=Label.HIGH if m.group(3) == "high" else Label.LOW,
                        source_element=m.group(4),
                        target_elements=_split_list(m.group(5)),
                    )
                )
            elif keyword == "flow":
                m = _FLOW_RE.match(line)
                if not m:
                    raise SecDfdParseError("malformed flow declaration")
                flows.append(
                    DfdFlow(
                        index=int(m.group(1)),
                        source=m.group(2),
                        target=m.group(3),
                        assets=_split_list(m.group(4)),
                    )
                )
            elif keyword == "contract":
                m = _CONTRACT_RE.match(line)
                if not m:
                    raise SecDfdParseError("malformed contract declaration")
                contracts.setdefault(m.group(1), []).append(
                    ProcessContract(
                        kind=_CONTRACT_KINDS[m.group(2)],
                        in_assets=_split_list(m.group(3)),
                        out_assets=_split_list(m.group(4)),
                    )
                )
            elif keyword == "zone":
                m = _ZONE_RE.match(line)
                if not m:
                    raise SecDfdParseError("malformed zone declaration")
                zones.append(AttackerZone(name=m.group(1), members=_split_list(m.group(2))))
            elif keyword == "boundary":
                pass  # parsed for compatibility, unused by every analysis
            else:
                raise SecDfdParseError(f"unknown keyword '{keyword}'")
        except ModelError as err:
            raise SecDfdParseError(err.message, line=lineno) from None

    for owner in contracts:
        if owner not in nodes:
            raise SecDfdParseError(f"contract on unknown process '{owner}'")

    model = SecDfd(
        name=name,
        nodes=tuple(
            DfdNode(id=i, kind=k, contracts=tuple(contracts.get(i, [])))
            for i, k in nodes.items()
        ),
        flows=tuple(flows),
        assets=tuple(assets),
        zones=tuple(zones),
    )
    try:
        validate(model)
    except ModelError as err:
        raise SecDfdParseError(err.message) from None
    return model


def _require_ident(line: str, keyword: str) -> str:
    m = re.match(rf"^{keyword}\s+({_IDENT})$", line)
    if not m:
        raise SecDfdParseError(f"malformed {keyword} declaration")
    return m.group(1)


def print_secdfd(model: SecDfd) -> str:
    """Render a diagram back to DSL text. parse(print(m)) == m structurally."""
    out: list[str] = [f"model {model.name}"]
    kind_kw = {
        NodeKind.PROCESS: "process",
        NodeKind.EXTERNAL_ENTITY: "external",
        NodeKind.DATA_STORE: "store",
    }
    for n in model.nodes:
        out.append(f"{kind_kw[n.kind]} {n.id}")
    for a in model.assets:
        targets = ",".join(a.target_elements)
        out.append(
            f"asset {a.name} : {a.value_type} {a.label.value} from {a.source_element} to {targets}"
        )
    for f in model.flows:
        out.append(f"flow {f.index} : {f.source} -> {f.target} carrying {','.join(f.assets)}")
    for n in model.nodes:
        for c in n.contracts:
            out.append(
                f"contract {n.id} {c.kind.value} in {','.join(c.in_assets)}"
                f" out {','.join(c.out_assets)}"
            )
    for z in model.zones:
        out.append(f"zone {z.name} {{ {', '.join(z.members)} }}")
    return "\n".join(out) + "\n"
