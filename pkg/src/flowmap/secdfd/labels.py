"""Label propagation and attacker-zone leak checking.

Labels travel from each asset's source element along the flows that carry
it. Process contracts transform labels on the way: encrypt/hash always
emits LOW, decrypt and forward copy, join emits the most restrictive input
label. Propagation is a monotone fixpoint (labels only move LOW -> HIGH
for a given flow/asset pair, except the constant LOW of encryption), so it
terminates on cyclic graphs.
"""

from __future__ import annotations

from dataclasses import dataclass

from .model import (
    Asset,
    ContractKind,
    DfdNode,
    FLOW_MEMBER_PREFIX,
    Label,
    NodeKind,
    ProcessContract,
    SecDfd,
)


@dataclass(frozen=True)
class LabelAssignment:
    """Label per (flow index, asset name) for every pair where the flow carries the asset."""

    entries: dict[tuple[int, str], Label]

    def label(self, flow_index: int, asset: str) -> Label:
        return self.entries[(flow_index, asset)]


@dataclass(frozen=True)
class LeakFinding:
    asset: str
    zone: str
    element: str  # node id or "flow:<index>"


def _matching_contract(node: DfdNode, asset: str) -> ProcessContract | None:
    """First contract in document order whose inputs include the arriving asset."""
    for c in node.contracts:
        if asset in c.in_assets:
            return c
    return None


def propagate_labels(model: SecDfd) -> LabelAssignment:
    # Start every carried pair at LOW; the asset's declared label enters at
    # its source element and upgrades pairs along the way.
    entries: dict[tuple[int, str], Label] = {
        (f.index, a): Label.LOW for f in model.flows for a in f.assets
    }
    # Highest label seen arriving at (node, asset); inputs to joins read this.
    arrived: dict[tuple[str, str], Label] = {}
    emitted: set[tuple[int, str]] = set()
    queue: list[tuple[str, str]] = []

    def arrive(node_id: str, asset: str, label: Label) -> None:
        key = (node_id, asset)
        merged = label if key not in arrived else arrived[key].join(label)
        if key not in arrived or merged is not arrived[key]:
            arrived[key] = merged
            queue.append(key)

    def emit(node_id: str, asset: str, label: Label) -> None:
        """Send an asset out of a node along every flow that carries it."""
        for f in model.flows_from(node_id):
            if asset not in f.assets:
                continue
            key = (f.index, asset)
            merged = entries[key].join(label)
            if key not in emitted or merged is not entries[key]:
                entries[key] = merged
                emitted.add(key)
                arrive(f.target, asset, merged)

    # Seed: origins emit directly, without running the origin's own contracts
    # on the asset being created there.
    for a in model.assets:
        emit(a.source_element, a.name, a.label)

    while queue:
        node_id, asset = queue.pop()
        label = arrived[(node_id, asset)]
        node = model.node(node_id)
        contract = _matching_contract(node, asset) if node.kind is NodeKind.PROCESS else None
        if contract is None:
            emit(node_id, asset, label)
            continue
        out_label = _transform(contract, arrived, node_id)
        for out_asset in contract.out_assets:
            emit(node_id, out_asset, out_label)

    return LabelAssignment(entries=entries)


def _transform(contract: ProcessContract, arrived: dict[tuple[str, str], Label], node_id: str) -> Label:
    if contract.kind is ContractKind.ENCRYPT_OR_HASH:
        return Label.LOW
    # Forward copies its single input; decrypt and join take the most
    # restrictive label among the inputs seen so far (monotone: unseen
    # inputs count as LOW and can only raise the result later).
    label = Label.LOW
    for a in contract.in_assets:
        label = label.join(arrived.get((node_id, a), Label.LOW))
    return label


def check_design_leaks(model: SecDfd, labels: LabelAssignment) -> list[LeakFinding]:
    """HIGH-labeled asset occurrences observable inside an attacker zone.

    A node member observes the assets on all flows incident to it; a flow
    member observes only the assets traversing that edge.
    """
    findings: list[LeakFinding] = []
    seen: set[tuple[str, str, str]] = set()
    for zone in model.zones:
        for member in zone.members:
            if member.startswith(FLOW_MEMBER_PREFIX):
                flows = [model.flow(int(member[len(FLOW_MEMBER_PREFIX):]))]
            else:
                flows = [f for f in model.flows if member in (f.source, f.target)]
            for f in flows:
                for asset in f.assets:
                    if labels.label(f.index, asset) is Label.HIGH:
                        key = (asset, zone.name, member)
                        if key not in seen:
                            seen.add(key)
                            findings.append(LeakFinding(asset=asset, zone=zone.name, element=member))
    return findings


def trace_asset_origin(model: SecDfd, asset: Asset) -> set[str]:
    """Walk an asset back to the elements it ultimately originates from.

    Stops at external entities, data stores, and processes with no contract
    producing the traced asset.
    """
    result: set[str] = set()
    visited: set[str] = set()

    def walk(asset_name: str) -> None:
        if asset_name in visited:
            return
        visited.add(asset_name)
        a = model.asset(asset_name)
        node = model.node(a.source_element)
        if node.kind is not NodeKind.PROCESS:
            result.add(node.id)
            return
        producing = next((c for c in node.contracts if asset_name in c.out_assets), None)
        if producing is None:
            result.add(node.id)
            return
        for in_asset in producing.in_assets:
            walk(in_asset)

    walk(asset.name)
    return result
