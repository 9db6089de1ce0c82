"""Iterative heuristic mapping between diagram elements and code elements.

The pipeline per iteration: name matching creates root entries, signature
extension follows asset types into parameter/return positions, definition
discovery walks inter-process data flows and intra-process call coupling,
and a certainty score with a per-element median cut-off picks what gets
suggested. User decisions (accept / reject / tolerate / manual mapping)
steer the next iteration.
"""

from __future__ import annotations

import statistics
from collections import deque
from dataclasses import dataclass, field
from enum import Enum

from ..pm.model import ProgramModel, endpoint_def
from ..secdfd.model import NodeKind, SecDfd
from .names import names_correspond

ACCEPT_COUPLING_BONUS = 0.5
SUGGEST_COUPLING_BONUS = 0.25


class EntryKind(Enum):
    ASSET_TYPE = "ASSET_TYPE"
    STORE_TYPE = "STORE_TYPE"
    STORE_METHOD = "STORE_METHOD"
    PROCESS_NAME = "PROCESS_NAME"
    PROCESS_SIGNATURE = "PROCESS_SIGNATURE"
    PROCESS_DEFINITION = "PROCESS_DEFINITION"


class EntryState(Enum):
    SUGGESTED = "SUGGESTED"
    ACCEPTED = "ACCEPTED"
    REJECTED = "REJECTED"
    TOLERATED = "TOLERATED"
    USER_DEFINED = "USER_DEFINED"


PINNED_STATES = (EntryState.ACCEPTED, EntryState.USER_DEFINED)


class MappingError(ValueError):
    pass


@dataclass
class MappingEntry:
    id: str
    dfd_ref: str  # "<modelId>/<elementId>"
    pm_ref: str  # "T:...", "N:...", "S:...", "D:..."
    kind: EntryKind
    state: EntryState
    quality: float  # quality of the name match at the derivation root
    derived_from: tuple[str, ...] = ()


def entry_id(dfd_ref: str, pm_ref: str) -> str:
    return f"{dfd_ref}::{pm_ref}"


def dfd_ref(model: SecDfd, element_id: str) -> str:
    return f"{model.name}/{element_id}"


@dataclass
class MappingState:
    models: dict[str, SecDfd]
    pm: ProgramModel
    entries: dict[str, MappingEntry] = field(default_factory=dict)
    rejected_pairs: set[tuple[str, str]] = field(default_factory=set)
    iteration: int = 0

    def entry(self, eid: str) -> MappingEntry:
        if eid not in self.entries:
            raise MappingError(f"unknown mapping entry '{eid}'")
        return self.entries[eid]

    def entries_for(self, dfd_ref_: str) -> list[MappingEntry]:
        return [e for e in self.entries.values() if e.dfd_ref == dfd_ref_]

    def closure(self, eid: str) -> set[str]:
        """Transitive derived-from closure, excluding the entry itself."""
        seen: set[str] = set()
        queue = deque(self.entries[eid].derived_from)
        while queue:
            cur = queue.popleft()
            if cur in seen or cur not in self.entries:
                continue
            seen.add(cur)
            queue.extend(self.entries[cur].derived_from)
        return seen

    def score(self, eid: str) -> float:
        e = self.entries[eid]
        accepted = suggested = 0
        for other in self.closure(eid):
            state = self.entries[other].state
            if state in PINNED_STATES:
                accepted += 1
            elif state is EntryState.SUGGESTED:
                suggested += 1
        return e.quality + ACCEPT_COUPLING_BONUS * accepted + SUGGEST_COUPLING_BONUS * suggested

    # -- structural helpers ---------------------------------------------------

    def process_refs(self) -> list[tuple[str, SecDfd, str]]:
        return [
            (dfd_ref(m, n.id), m, n.id)
            for m in self.models.values()
            for n in m.processes()
        ]

    def mapped_pm_elements(
        self, dfd_ref_: str, kind: EntryKind, pinned_only: bool = False
    ) -> list[str]:
        """pm refs mapped to a DFD element with entries that are still alive.

        The checks run on the confirmed mapping only (pinned_only); the
        iteration pipeline also expands through suggestions.
        """
        return sorted(
            e.pm_ref
            for e in self.entries.values()
            if e.dfd_ref == dfd_ref_ and e.kind is kind
            and (not pinned_only or e.state in PINNED_STATES)
        )

    def asset_types(
        self, model: SecDfd, asset_name: str, pinned_only: bool = False
    ) -> list[tuple[str, str]]:
        """(type id, entry id) pairs the asset is mapped to."""
        ref = dfd_ref(model, asset_name)
        return sorted(
            (e.pm_ref, e.id)
            for e in self.entries.values()
            if e.dfd_ref == ref and e.kind is EntryKind.ASSET_TYPE
            and (not pinned_only or e.state in PINNED_STATES)
        )

    def types_to_assets(self, model: SecDfd, pinned_only: bool = False) -> dict[str, set[str]]:
        """Inverse asset-type mapping: type id -> asset names (one model)."""
        result: dict[str, set[str]] = {}
        for a in model.assets:
            for tid, _ in self.asset_types(model, a.name, pinned_only):
                result.setdefault(tid, set()).add(a.name)
        return result

    def process_definitions(self, dfd_ref_: str, pinned_only: bool = False) -> set[str]:
        return {
            e.pm_ref
            for e in self.entries.values()
            if e.dfd_ref == dfd_ref_ and e.kind is EntryKind.PROCESS_DEFINITION
            and (not pinned_only or e.state in PINNED_STATES)
        }


def _add_entry(
    state: MappingState,
    dfd_ref_: str,
    pm_ref: str,
    kind: EntryKind,
    quality: float,
    derived_from: tuple[str, ...] = (),
    entry_state: EntryState = EntryState.SUGGESTED,
) -> MappingEntry | None:
    if (dfd_ref_, pm_ref) in state.rejected_pairs:
        return None
    eid = entry_id(dfd_ref_, pm_ref)
    existing = state.entries.get(eid)
    if existing is not None:
        # Rediscovery may bring better provenance; merge derivations, keep
        # the user-visible state untouched.
        merged = tuple(sorted(set(existing.derived_from) | set(derived_from)))
        existing.derived_from = merged
        existing.quality = max(existing.quality, quality)
        return existing
    entry = MappingEntry(
        id=eid,
        dfd_ref=dfd_ref_,
        pm_ref=pm_ref,
        kind=kind,
        state=entry_state,
        quality=quality,
        derived_from=tuple(sorted(set(derived_from))),
    )
    state.entries[eid] = entry
    return entry


# -- pipeline stages ----------------------------------------------------------

def match_names(state: MappingState) -> list[MappingEntry]:
    """Root entries from fuzzy name matching, per the correspondence table."""
    created: list[MappingEntry] = []
    pm = state.pm
    for model in state.models.values():
        for proc in model.processes():
            for name in pm.method_names:
                q = names_correspond(proc.id, name)
                if q is not None:
                    e = _add_entry(state, dfd_ref(model, proc.id), f"N:{name}",
                                   EntryKind.PROCESS_NAME, q)
                    if e:
                        created.append(e)
        for asset in model.assets:
            for t in pm.type_decls:
                qualities = [
                    q for q in (
                        names_correspond(asset.name, t.simple_name),
                        names_correspond(asset.value_type, t.simple_name),
                    )
                    if q is not None
                ]
                if qualities:
                    e = _add_entry(state, dfd_ref(model, asset.name), t.id,
                                   EntryKind.ASSET_TYPE, max(qualities))
                    if e:
                        created.append(e)
        for store in model.stores():
            for t in pm.type_decls:
                q = names_correspond(store.id, t.simple_name)
                if q is not None:
                    e = _add_entry(state, dfd_ref(model, store.id), t.id,
                                   EntryKind.STORE_TYPE, q)
                    if e:
                        created.append(e)
            for name in pm.method_names:
                q = names_correspond(store.id, name)
                if q is not None:
                    e = _add_entry(state, dfd_ref(model, store.id), f"N:{name}",
                                   EntryKind.STORE_METHOD, q)
                    if e:
                        created.append(e)
    return created


def extend_to_signatures(state: MappingState) -> list[MappingEntry]:
    """Follow mapped asset types into parameter/return slots of signatures."""
    created: list[MappingEntry] = []
    pm = state.pm
    for proc_ref, model, proc_id in state.process_refs():
        name_entries = [
            e for e in state.entries_for(proc_ref) if e.kind is EntryKind.PROCESS_NAME
        ]
        in_assets = model.in_assets(proc_id)
        out_assets = model.out_assets(proc_id)
        for name_entry in name_entries:
            method_name = name_entry.pm_ref.removeprefix("N:")
            for sig in pm.signatures_named(method_name):
                used: list[str] = []
                for a in in_assets:
                    for tid, aid in state.asset_types(model, a):
                        if tid in sig.param_types:
                            used.append(aid)
                for a in out_assets:
                    for tid, aid in state.asset_types(model, a):
                        if tid == sig.return_type:
                            used.append(aid)
                if not used:
                    continue
                e = _add_entry(
                    state, proc_ref, sig.id, EntryKind.PROCESS_SIGNATURE,
                    name_entry.quality,
                    derived_from=(name_entry.id, *used),
                )
                if e:
                    created.append(e)
    return created


def _forward_reachable(pm: ProgramModel, start_def: str) -> set[str]:
    """Definitions reachable from the endpoints of start_def over data flows."""
    adjacency: dict[str, list[str]] = {}
    for e in pm.flows:
        adjacency.setdefault(e.source, []).append(e.target)
    visited_eps: set[str] = set()
    reached: set[str] = set()
    queue = deque(
        ep for e in pm.flows for ep in (e.source,) if endpoint_def(ep) == start_def
    )
    while queue:
        ep = queue.popleft()
        if ep in visited_eps:
            continue
        visited_eps.add(ep)
        owner = endpoint_def(ep)
        if owner is not None:
            reached.add(owner)
        queue.extend(adjacency.get(ep, ()))
    return reached


def discover_definitions(state: MappingState) -> list[MappingEntry]:
    """Concrete definitions implementing mapped signatures.

    Two routes: data flows along diagram flows between two mapped processes
    (parameter passes and return flows, possibly through intermediate
    forwarding definitions), and call coupling between definitions of
    signatures mapped to the same process.
    """
    created: list[MappingEntry] = []
    pm = state.pm

    def sig_entries(proc_ref: str) -> list[MappingEntry]:
        return [
            e for e in state.entries_for(proc_ref)
            if e.kind is EntryKind.PROCESS_SIGNATURE
        ]

    def defs_of(entry: MappingEntry) -> list[str]:
        return [d.id for d in pm.definitions_of_signature(entry.pm_ref)]

    reach_cache: dict[str, set[str]] = {}

    def reachable(def_id: str) -> set[str]:
        if def_id not in reach_cache:
            reach_cache[def_id] = _forward_reachable(pm, def_id)
        return reach_cache[def_id]

    for model in state.models.values():
        for flow in model.flows:
            src_ref = dfd_ref(model, flow.source)
            tgt_ref = dfd_ref(model, flow.target)
            for src_entry in sig_entries(src_ref):
                for tgt_entry in sig_entries(tgt_ref):
                    for d1 in defs_of(src_entry):
                        for d2 in defs_of(tgt_entry):
                            if d1 == d2 or d2 not in reachable(d1):
                                continue
                            e1 = _add_entry(
                                state, src_ref, d1, EntryKind.PROCESS_DEFINITION,
                                src_entry.quality, derived_from=(src_entry.id,),
                            )
                            e2 = _add_entry(
                                state, tgt_ref, d2, EntryKind.PROCESS_DEFINITION,
                                tgt_entry.quality, derived_from=(tgt_entry.id,),
                            )
                            created.extend(e for e in (e1, e2) if e)

    calls = {(c.caller, c.callee) for c in pm.calls}
    for proc_ref, _, _ in state.process_refs():
        entries = sig_entries(proc_ref)
        for i, s1 in enumerate(entries):
            for s2 in entries[i + 1:]:
                for d1 in defs_of(s1):
                    for d2 in defs_of(s2):
                        if (d1, d2) in calls or (d2, d1) in calls:
                            e1 = _add_entry(
                                state, proc_ref, d1, EntryKind.PROCESS_DEFINITION,
                                s1.quality, derived_from=(s1.id, s2.id),
                            )
                            e2 = _add_entry(
                                state, proc_ref, d2, EntryKind.PROCESS_DEFINITION,
                                s2.quality, derived_from=(s1.id, s2.id),
                            )
                            created.extend(e for e in (e1, e2) if e)
    return created


def score_and_filter(state: MappingState) -> list[MappingEntry]:
    """Per DFD element, keep entries scoring at or above the element median.

    Accepted and user-defined entries always survive. Filtered-out entries
    stay in the state and may resurface once couplings raise their score.
    """
    by_element: dict[str, list[MappingEntry]] = {}
    for e in state.entries.values():
        by_element.setdefault(e.dfd_ref, []).append(e)

    emitted: list[MappingEntry] = []
    for element in sorted(by_element):
        entries = by_element[element]
        scores = {e.id: state.score(e.id) for e in entries}
        median = statistics.median(scores.values())
        for e in entries:
            if e.state in PINNED_STATES or scores[e.id] >= median:
                emitted.append(e)

    emitted.sort(key=lambda e: (e.dfd_ref, -state.score(e.id), e.pm_ref))
    return emitted


def run_iteration(state: MappingState) -> list[MappingEntry]:
    match_names(state)
    extend_to_signatures(state)
    discover_definitions(state)
    state.iteration += 1
    return score_and_filter(state)


# -- user decisions -----------------------------------------------------------

class Decision(Enum):
    ACCEPT = "accept"
    REJECT = "reject"
    TOLERATE = "tolerate"


def decide(state: MappingState, eid: str, decision: Decision) -> None:
    entry = state.entry(eid)
    if decision is Decision.ACCEPT:
        entry.state = EntryState.ACCEPTED
    elif decision is Decision.TOLERATE:
        # Stays suggested; it will be proposed again next iteration.
        entry.state = EntryState.SUGGESTED
    elif decision is Decision.REJECT:
        state.rejected_pairs.add((entry.dfd_ref, entry.pm_ref))
        # Entries extended from the rejected one go too, but remain
        # eligible for rediscovery through other derivations.
        dependents = [other.id for other in state.entries.values()
                      if eid in state.closure(other.id)]
        del state.entries[eid]
        for oid in dependents:
            state.entries.pop(oid, None)


_LEGAL_KINDS: dict[tuple[NodeKind | str, str], EntryKind] = {
    ("asset", "T"): EntryKind.ASSET_TYPE,
    (NodeKind.DATA_STORE, "T"): EntryKind.STORE_TYPE,
    (NodeKind.DATA_STORE, "N"): EntryKind.STORE_METHOD,
    (NodeKind.PROCESS, "N"): EntryKind.PROCESS_NAME,
    (NodeKind.PROCESS, "S"): EntryKind.PROCESS_SIGNATURE,
    (NodeKind.PROCESS, "D"): EntryKind.PROCESS_DEFINITION,
}


def map_manually(state: MappingState, dfd_ref_: str, pm_ref: str) -> MappingEntry:
    model_id, _, element_id = dfd_ref_.partition("/")
    model = state.models.get(model_id)
    if model is None or not element_id:
        raise MappingError(f"unknown DFD element '{dfd_ref_}'")
    element: NodeKind | str
    if any(a.name == element_id for a in model.assets):
        element = "asset"
    else:
        try:
            element = model.node(element_id).kind
        except KeyError:
            raise MappingError(f"unknown DFD element '{dfd_ref_}'") from None

    prefix = pm_ref.split(":", 1)[0]
    kind = _LEGAL_KINDS.get((element, prefix))
    if kind is None:
        raise MappingError(
            f"illegal correspondence: {element_id} ({element}) cannot map to '{pm_ref}'"
        )
    _validate_pm_ref(state.pm, pm_ref)

    state.rejected_pairs.discard((dfd_ref_, pm_ref))
    existing = state.entries.get(entry_id(dfd_ref_, pm_ref))
    if existing is not None:
        existing.state = EntryState.USER_DEFINED
        return existing
    entry = _add_entry(
        state, dfd_ref_, pm_ref, kind, quality=1.0, entry_state=EntryState.USER_DEFINED
    )
    assert entry is not None
    return entry


def _validate_pm_ref(pm: ProgramModel, pm_ref: str) -> None:
    prefix = pm_ref.split(":", 1)[0]
    pools = {
        "T": {t.id for t in pm.type_decls},
        "N": {f"N:{n}" for n in pm.method_names},
        "S": {s.id for s in pm.signatures},
        "D": {d.id for d in pm.definitions},
    }
    if pm_ref not in pools.get(prefix, set()):
        raise MappingError(f"unknown PM element '{pm_ref}'")
