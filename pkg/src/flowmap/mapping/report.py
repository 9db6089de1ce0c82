"""Mapping compliance report and ground-truth evaluation."""

from __future__ import annotations

from dataclasses import dataclass

from ..pm.model import endpoint_def
from ..secdfd.model import SecDfd
from .engine import EntryKind, MappingEntry, MappingState, PINNED_STATES, dfd_ref

UNDEFINED = "undefined"


@dataclass(frozen=True)
class GroundTruth:
    pairs: frozenset[tuple[str, str]]  # (dfd ref, pm ref)

    @staticmethod
    def from_records(records: list[dict]) -> "GroundTruth":
        return GroundTruth(frozenset((r["dfd"], r["pm"]) for r in records))


def compliance_report(state: MappingState) -> dict:
    """Convergences, absences, and divergences of the current mapping.

    Convergence: pinned (accepted or user-defined) entries. Absence: a DFD
    element that nothing in the code was pinned to. Divergence: a dataflow
    edge leaving a process's mapped definitions toward a definition mapped
    elsewhere or nowhere, without a diagram flow licensing it.
    """
    convergences = sorted(
        e.id for e in state.entries.values() if e.state in PINNED_STATES
    )

    pinned_refs = {e.dfd_ref for e in state.entries.values() if e.state in PINNED_STATES}
    absences = []
    for model in state.models.values():
        elements = [n.id for n in model.nodes] + [a.name for a in model.assets]
        for el in elements:
            ref = dfd_ref(model, el)
            if ref not in pinned_refs:
                absences.append(ref)
    absences.sort()

    # def id -> owning process refs, via pinned definition entries
    def_owner: dict[str, set[str]] = {}
    for e in state.entries.values():
        if e.state in PINNED_STATES and e.kind is EntryKind.PROCESS_DEFINITION:
            def_owner.setdefault(e.pm_ref, set()).add(e.dfd_ref)

    dfd_flows: set[tuple[str, str]] = set()
    for model in state.models.values():
        for f in model.flows:
            dfd_flows.add((dfd_ref(model, f.source), dfd_ref(model, f.target)))

    divergences = set()
    for edge in state.pm.flows:
        src_def = endpoint_def(edge.source)
        tgt_def = endpoint_def(edge.target)
        if src_def is None or tgt_def is None or src_def == tgt_def:
            continue
        src_procs = def_owner.get(src_def, set())
        tgt_procs = def_owner.get(tgt_def, set())
        if not src_procs:
            continue
        if not tgt_procs:
            divergences.add((edge.id, src_def, tgt_def))
            continue
        if src_procs & tgt_procs:
            continue
        if not any((p, q) in dfd_flows for p in src_procs for q in tgt_procs):
            divergences.add((edge.id, src_def, tgt_def))

    return {
        "convergences": convergences,
        "absences": absences,
        "divergences": [
            {"flow": fid, "from": s, "to": t} for fid, s, t in sorted(divergences)
        ],
    }


def evaluate_against_ground_truth(
    state: MappingState,
    gt: GroundTruth,
    suggested: list[MappingEntry] | None = None,
) -> dict:
    """Precision/recall of the suggestion set against known-good pairs.

    By default every live entry counts as suggested; pass an explicit list
    to evaluate a single iteration's output instead.
    """
    entries = suggested if suggested is not None else list(state.entries.values())
    proposed = {(e.dfd_ref, e.pm_ref) for e in entries}
    tp = proposed & gt.pairs
    fp = proposed - gt.pairs
    fn = gt.pairs - proposed
    precision = len(tp) / (len(tp) + len(fp)) if tp or fp else UNDEFINED
    recall = len(tp) / (len(tp) + len(fn)) if tp or fn else UNDEFINED
    return {
        "tp": len(tp),
        "fp": len(fp),
        "fn": len(fn),
        "precision": precision,
        "recall": recall,
    }
