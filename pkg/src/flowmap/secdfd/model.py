"""Design-level model: security-annotated data flow diagrams.

A diagram is a directed graph of processes, external entities and data
stores connected by ordered, asset-carrying flows. Processes may declare
contracts describing how confidentiality labels transform; attacker zones
mark the elements an attacker can observe.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum


class NodeKind(Enum):
    PROCESS = "process"
    EXTERNAL_ENTITY = "external"
    DATA_STORE = "store"


class Label(Enum):
    HIGH = "high"
    LOW = "low"

    def join(self, other: "Label") -> "Label":
        """Most restrictive of the two labels."""
        return Label.HIGH if Label.HIGH in (self, other) else Label.LOW


class ContractKind(Enum):
    ENCRYPT_OR_HASH = "encrypt"
    DECRYPT = "decrypt"
    JOIN = "join"
    FORWARD = "forward"


class ModelError(ValueError):
    """Structural validation failure in a diagram."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        super().__init__(message)
        self.message = message
        self.line = line
        self.column = column

    def __str__(self) -> str:
        if self.line is not None:
            return f"line {self.line}: {self.message}"
        return self.message


@dataclass(frozen=True)
class ProcessContract:
    kind: ContractKind
    in_assets: tuple[str, ...]
    out_assets: tuple[str, ...]


@dataclass(frozen=True)
class DfdNode:
    id: str
    kind: NodeKind
    contracts: tuple[ProcessContract, ...] = ()


@dataclass(frozen=True)
class DfdFlow:
    index: int
    source: str
    target: str
    assets: tuple[str, ...]


@dataclass(frozen=True)
class Asset:
    name: str
    value_type: str
    label: Label
    source_element: str
    target_elements: tuple[str, ...]


@dataclass(frozen=True)
class AttackerZone:
    name: str
    # Members are node ids or flow indices rendered as strings ("flow:3").
    members: tuple[str, ...]


FLOW_MEMBER_PREFIX = "flow:"


def flow_member(index: int) -> str:
    return f"{FLOW_MEMBER_PREFIX}{index}"


@dataclass(frozen=True)
class SecDfd:
    name: str
    nodes: tuple[DfdNode, ...] = ()
    flows: tuple[DfdFlow, ...] = ()
    assets: tuple[Asset, ...] = ()
    zones: tuple[AttackerZone, ...] = ()

    def node(self, node_id: str) -> DfdNode:
        for n in self.nodes:
            if n.id == node_id:
                return n
        raise KeyError(node_id)

    def asset(self, name: str) -> Asset:
        for a in self.assets:
            if a.name == name:
                return a
        raise KeyError(name)

    def flow(self, index: int) -> DfdFlow:
        for f in self.flows:
            if f.index == index:
                return f
        raise KeyError(index)

    def flows_from(self, node_id: str) -> list[DfdFlow]:
        return sorted((f for f in self.flows if f.source == node_id), key=lambda f: f.index)

    def flows_to(self, node_id: str) -> list[DfdFlow]:
        return sorted((f for f in self.flows if f.target == node_id), key=lambda f: f.index)

    def processes(self) -> list[DfdNode]:
        return [n for n in self.nodes if n.kind is NodeKind.PROCESS]

    def stores(self) -> list[DfdNode]:
        return [n for n in self.nodes if n.kind is NodeKind.DATA_STORE]

    def externals(self) -> list[DfdNode]:
        return [n for n in self.nodes if n.kind is NodeKind.EXTERNAL_ENTITY]

    def in_assets(self, node_id: str) -> list[str]:
        """Assets arriving at a node over its incoming flows, in flow order."""
        seen: list[str] = []
        for f in self.flows_to(node_id):
            for a in f.assets:
                if a not in seen:
                    seen.append(a)
        return seen

    def out_assets(self, node_id: str) -> list[str]:
        seen: list[str] = []
        for f in self.flows_from(node_id):
            for a in f.assets:
                if a not in seen:
                    seen.append(a)
        return seen


def validate(model: SecDfd) -> None:
    """Check referential integrity; raises ModelError on the first problem."""
    node_ids = [n.id for n in model.nodes]
    if len(set(node_ids)) != len(node_ids):
        dup = next(i for i in node_ids if node_ids.count(i) > 1)
        raise ModelError(f"duplicate node identifier '{dup}'")
    asset_names = [a.name for a in model.assets]
    if len(set(asset_names)) != len(asset_names):
        dup = next(a for a in asset_names if asset_names.count(a) > 1)
        raise ModelError(f"duplicate asset name '{dup}'")
    ids = set(node_ids)
    assets = set(asset_names)
    flow_indices = [f.index for f in model.flows]
    if len(set(flow_indices)) != len(flow_indices):
        raise ModelError("duplicate flow index")

    for f in model.flows:
        for ref in (f.source, f.target):
            if ref not in ids:
                raise ModelError(f"flow {f.index} references unknown node '{ref}'")
        if not f.assets:
            raise ModelError(f"flow {f.index} carries no assets")
        for a in f.assets:
            if a not in assets:
                raise ModelError(f"flow {f.index} carries undeclared asset '{a}'")

    for a in model.assets:
        if a.source_element not in ids:
            raise ModelError(f"asset '{a.name}' has unknown source '{a.source_element}'")
        if not a.target_elements:
            raise ModelError(f"asset '{a.name}' has no target elements")
        for t in a.target_elements:
            if t not in ids:
                raise ModelError(f"asset '{a.name}' has unknown target '{t}'")

    for n in model.nodes:
        if n.contracts and n.kind is not NodeKind.PROCESS:
            raise ModelError(f"node '{n.id}' is not a process but has contracts")
        carried = set(model.in_assets(n.id)) | set(model.out_assets(n.id))
        for c in n.contracts:
            _check_contract_arity(n.id, c)
            for ref in (*c.in_assets, *c.out_assets):
                if ref not in assets:
                    raise ModelError(f"contract on '{n.id}' references unknown asset '{ref}'")
                if ref not in carried:
                    raise ModelError(
                        f"contract asset '{ref}' is not carried by any flow touching '{n.id}'"
                    )

    for z in model.zones:
        for m in z.members:
            if m.startswith(FLOW_MEMBER_PREFIX):
                idx = int(m[len(FLOW_MEMBER_PREFIX):])
                if idx not in set(flow_indices):
                    raise ModelError(f"zone '{z.name}' references unknown flow {idx}")
            elif m not in ids:
                raise ModelError(f"zone '{z.name}' references unknown member '{m}'")


def _check_contract_arity(owner: str, c: ProcessContract) -> None:
    n_in, n_out = len(c.in_assets), len(c.out_assets)
    if c.kind is ContractKind.FORWARD and (n_in != 1 or n_out != 1):
        raise ModelError(f"forward contract on '{owner}' must have exactly 1 in and 1 out asset")
    if c.kind is ContractKind.JOIN and (n_in < 2 or n_out != 1):
        raise ModelError(f"join contract on '{owner}' needs >=2 in assets and exactly 1 out asset")
    if c.kind in (ContractKind.ENCRYPT_OR_HASH, ContractKind.DECRYPT) and (n_in < 1 or n_out < 1):
        raise ModelError(f"{c.kind.value} contract on '{owner}' needs >=1 in and >=1 out asset")
