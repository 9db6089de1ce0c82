"""Derivation of per-asset taint sources, sinks, and allowed sinks.

The mapped diagram knows where each confidential asset enters the system,
where it may legitimately leave it, and which elements an attacker can
observe. These functions translate that knowledge into method signature
sets for the taint engine.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from ..mapping.engine import EntryKind, MappingState, PINNED_STATES, dfd_ref
from ..secdfd.labels import trace_asset_origin
from ..secdfd.model import Asset, FLOW_MEMBER_PREFIX, NodeKind, SecDfd


class TaintMode(Enum):
    PLAIN = "PLAIN"
    PARTLY_OPT = "PARTLY_OPT"
    FULLY_OPT = "FULLY_OPT"


@dataclass
class AssetTaintSpec:
    sources: set[str] = field(default_factory=set)  # signature ids
    sinks: set[str] = field(default_factory=set)
    allowed_sinks: set[str] = field(default_factory=set)


@dataclass
class TaintConfig:
    mode: TaintMode
    per_asset: dict[str, AssetTaintSpec] = field(default_factory=dict)
    default_sources: set[str] = field(default_factory=set)
    default_sinks: set[str] = field(default_factory=set)


def _mapped_def_signatures(state: MappingState, ref: str) -> set[str]:
    """Signatures of the definitions mapped (and confirmed) to a DFD element."""
    sigs: set[str] = set()
    for e in state.entries.values():
        if (e.dfd_ref == ref and e.kind is EntryKind.PROCESS_DEFINITION
                and e.state in PINNED_STATES):
            sigs.add(state.pm.definition_by_id(e.pm_ref).signature)
    return sigs


def _element_signatures(state: MappingState, model: SecDfd, element_id: str) -> set[str]:
    """Definition-level signatures mapped to a node of any kind.

    Stores carry their signatures via store-method entries; processes via
    definition entries.
    """
    ref = dfd_ref(model, element_id)
    sigs = _mapped_def_signatures(state, ref)
    for e in state.entries.values():
        if e.dfd_ref != ref:
            continue
        if e.kind is EntryKind.STORE_METHOD and e.state in PINNED_STATES:
            name = e.pm_ref.removeprefix("N:")
            sigs.update(s.id for s in state.pm.signatures_named(name))
    return sigs


def _store_typed_getters(state: MappingState, model: SecDfd, store_id: str,
                         asset: Asset) -> set[str]:
    """Signatures of a mapped store type's definitions returning the asset's
    mapped type."""
    ref = dfd_ref(model, store_id)
    store_types = {
        e.pm_ref for e in state.entries.values()
        if e.dfd_ref == ref and e.kind is EntryKind.STORE_TYPE
        and e.state in PINNED_STATES
    }
    asset_types = {tid for tid, _ in state.asset_types(model, asset.name, pinned_only=True)}
    sigs: set[str] = set()
    for d in state.pm.definitions:
        if d.declaring_type not in store_types:
            continue
        sig = state.pm.signature_by_id(d.signature)
        if sig.return_type in asset_types:
            sigs.add(sig.id)
    return sigs


def derive_sources(model: SecDfd, state: MappingState, asset: Asset) -> set[str]:
    """Signatures through which an asset enters the implementation."""
    sources: set[str] = set()
    visited: set[str] = set()

    def from_element(element_id: str) -> None:
        if element_id in visited:
            return
        visited.add(element_id)
        node = model.node(element_id)
        if node.kind is NodeKind.EXTERNAL_ENTITY:
            mapped = _element_signatures(state, model, element_id)
            if mapped:
                sources.update(mapped)
            else:
                # Unmapped entity: fall back to the processes reading from it.
                for f in model.flows_from(element_id):
                    reader = model.node(f.target)
                    if reader.kind is NodeKind.PROCESS:
                        sources.update(
                            _mapped_def_signatures(state, dfd_ref(model, f.target))
                        )
        elif node.kind is NodeKind.DATA_STORE:
            sources.update(_element_signatures(state, model, element_id))
            sources.update(_store_typed_getters(state, model, element_id, asset))
        else:
            producing = any(asset.name in c.out_assets for c in node.contracts)
            if producing:
                for origin in trace_asset_origin(model, asset):
                    if origin != element_id:
                        from_element(origin)
                if not trace_asset_origin(model, asset) - {element_id}:
                    sources.update(_mapped_def_signatures(state, dfd_ref(model, element_id)))
            else:
                sources.update(_mapped_def_signatures(state, dfd_ref(model, element_id)))

    from_element(asset.source_element)
    return sources


def derive_allowed_sinks(model: SecDfd, state: MappingState, asset: Asset) -> set[str]:
    """Signatures where an asset may legitimately exit the implementation."""
    allowed: set[str] = set()
    for target_id in asset.target_elements:
        node = model.node(target_id)
        mapped = _element_signatures(state, model, target_id)
        if mapped:
            allowed.update(mapped)
        elif node.kind is NodeKind.EXTERNAL_ENTITY:
            # Unmapped exit point: substitute the last mapped process feeding it.
            for f in model.flows_to(target_id):
                feeder = model.node(f.source)
                if feeder.kind is NodeKind.PROCESS:
                    allowed.update(
                        _mapped_def_signatures(state, dfd_ref(model, f.source))
                    )
    return allowed


def derive_zone_sinks(model: SecDfd, state: MappingState, asset: Asset) -> set[str]:
    """Signatures mapped to elements an attacker zone can observe."""
    sinks: set[str] = set()
    for zone in model.zones:
        for member in zone.members:
            if member.startswith(FLOW_MEMBER_PREFIX):
                index = int(member.removeprefix(FLOW_MEMBER_PREFIX))
                flow = model.flow(index)
                endpoints = (flow.source, flow.target)
            else:
                endpoints = (member,)
            for el in endpoints:
                sinks.update(_element_signatures(state, model, el))
    return sinks


def build_config(
    mode: TaintMode,
    model: SecDfd,
    state: MappingState,
    default_sources: set[str],
    default_sinks: set[str],
) -> TaintConfig:
    """Assemble the source/sink sets for one analysis mode."""
    config = TaintConfig(
        mode=mode,
        default_sources=set(default_sources),
        default_sinks=set(default_sinks),
    )
    if mode is TaintMode.PLAIN:
        return config

    for asset in model.assets:
        spec = AssetTaintSpec(sources=derive_sources(model, state, asset))
        if mode is TaintMode.PARTLY_OPT:
            spec.sinks = set(default_sinks)
        else:
            spec.allowed_sinks = derive_allowed_sinks(model, state, asset)
            zone_sinks = derive_zone_sinks(model, state, asset)
            spec.allowed_sinks -= zone_sinks
            spec.sinks = (set(default_sinks) - spec.allowed_sinks) | zone_sinks
        config.per_asset[asset.name] = spec
    return config
