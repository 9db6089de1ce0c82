"""Flow-query primitives over a program model.

These are the building blocks of the implemented-flow extraction: which
data-flow edges enter or leave a set of method definitions, and which
incoming edges can reach a given outgoing edge through the definitions'
bodies.
"""

from __future__ import annotations

from collections import defaultdict, deque

from .model import DataFlowEdge, FlowKind, ProgramModel, PmError, endpoint_def


def _check_defs(pm: ProgramModel, defs: set[str]) -> None:
    known = {d.id for d in pm.definitions}
    for ref in defs:
        if ref not in known:
            raise PmError(f"unknown definition ref '{ref}'")


def in_flows(pm: ProgramModel, defs: set[str]) -> set[DataFlowEdge]:
    """Edges entering a set of definitions from outside it.

    Parameter passes into the definitions' parameters plus return flows of
    called definitions landing inside them; edges internal to the set are
    excluded.
    """
    _check_defs(pm, defs)
    result: set[DataFlowEdge] = set()
    for e in pm.flows:
        src_def, tgt_def = endpoint_def(e.source), endpoint_def(e.target)
        if src_def in defs:
            continue
        if e.kind is FlowKind.PARAM_PASS and tgt_def in defs:
            result.add(e)
        elif e.kind is FlowKind.RETURN_FLOW and tgt_def in defs:
            result.add(e)
    return result


def out_flows(pm: ProgramModel, defs: set[str]) -> set[DataFlowEdge]:
    """Edges leaving a set of definitions: own return flows and parameter
    passes into outside callees."""
    _check_defs(pm, defs)
    result: set[DataFlowEdge] = set()
    for e in pm.flows:
        src_def, tgt_def = endpoint_def(e.source), endpoint_def(e.target)
        if tgt_def in defs:
            continue
        if e.kind is FlowKind.RETURN_FLOW and src_def in defs:
            result.add(e)
        elif e.kind is FlowKind.PARAM_PASS and src_def in defs:
            result.add(e)
    return result


def reachable_bwd(
    pm: ProgramModel,
    target: DataFlowEdge,
    candidates: set[DataFlowEdge],
    defs: set[str],
) -> set[DataFlowEdge]:
    """Candidate edges from which `target` is reachable going backward.

    Traversal walks the data-flow graph against edge direction, restricted
    to endpoints owned by `defs` (field endpoints are shared and always
    traversable). A candidate is reachable if its target endpoint lies on
    some backward path from the source endpoint of `target`.
    """
    incoming: dict[str, list[DataFlowEdge]] = defaultdict(list)
    for e in pm.flows:
        incoming[e.target].append(e)

    def inside(endpoint: str) -> bool:
        owner = endpoint_def(endpoint)
        return owner is None or owner in defs

    visited: set[str] = set()
    queue: deque[str] = deque([target.source])
    while queue:
        ep = queue.popleft()
        if ep in visited or not inside(ep):
            continue
        visited.add(ep)
        for e in incoming[ep]:
            if e in candidates:
                continue  # stop at the boundary; the candidate itself matched
            queue.append(e.source)

    return {c for c in candidates if c.target in visited}


def communicated_type(edge: DataFlowEdge) -> str:
    return edge.communicated_type
