"""Explicit-flow taint propagation over the program model.

Taint starts at the results of source-signature calls and at the parameters
of source-signature definitions, spreads forward over intra-procedural
flows, parameter passes, and return flows to a fixpoint, and raises an
alarm whenever a tainted value is passed into a sink-signature definition.
Field endpoints are shared, so a tainted write to a field taints all reads.
"""

from __future__ import annotations

from collections import defaultdict, deque
from dataclasses import dataclass

from ..pm.model import FlowKind, ProgramModel, endpoint_def

ALARM_CAP = 100


@dataclass(frozen=True)
class TaintAlarm:
    source_signature: str
    sink_signature: str
    asset: str | None = None
    witness: tuple[str, ...] = ()  # ordered edge ids from seed to sink

    def to_dict(self) -> dict:
        return {
            "asset": self.asset,
            "source": self.source_signature,
            "sink": self.sink_signature,
            "witness": list(self.witness),
        }


def _resolve_signatures(pm: ProgramModel, sigs: set[str]) -> tuple[set[str], list[str]]:
    known = {s.id for s in pm.signatures}
    unresolved = sorted(s for s in sigs if s not in known)
    return sigs & known, unresolved


def _propagate(
    pm: ProgramModel,
    source_sig: str,
    sink_sigs: set[str],
) -> list[tuple[str, tuple[str, ...]]]:
    """Alarms from one source signature: (sink signature, witness edges)."""
    sig_of_def = {d.id: d.signature for d in pm.definitions}
    outgoing: dict[str, list] = defaultdict(list)
    for e in pm.flows:
        outgoing[e.source].append(e)

    # Seed endpoints: call results of the source and its own parameters.
    seeds: set[str] = set()
    for e in pm.flows:
        if e.kind is FlowKind.RETURN_FLOW:
            owner = endpoint_def(e.source)
            if owner is not None and sig_of_def.get(owner) == source_sig:
                seeds.add(e.target)
    for e in pm.flows:
        for ep in (e.source, e.target):
            if ep.startswith("param:"):
                owner = endpoint_def(ep)
                if owner is not None and sig_of_def.get(owner) == source_sig:
                    seeds.add(ep)

    parent: dict[str, tuple[str, str] | None] = {ep: None for ep in seeds}
    queue = deque(seeds)
    while queue:
        ep = queue.popleft()
        for e in outgoing[ep]:
            if e.target not in parent:
                parent[e.target] = (ep, e.id)
                queue.append(e.target)

    def witness(endpoint: str, last_edge: str | None) -> tuple[str, ...]:
        edges: list[str] = [] if last_edge is None else [last_edge]
        cur = endpoint
        while parent.get(cur) is not None:
            prev, eid = parent[cur]
            edges.append(eid)
            cur = prev
        return tuple(reversed(edges))

    alarms: list[tuple[str, tuple[str, ...]]] = []
    seen_sinks: set[str] = set()
    for e in sorted(pm.flows, key=lambda e: e.id):
        if e.kind is not FlowKind.PARAM_PASS or e.source not in parent:
            continue
        owner = endpoint_def(e.target)
        if owner is None:
            continue
        sink_sig = sig_of_def.get(owner)
        if sink_sig in sink_sigs and sink_sig not in seen_sinks:
            seen_sinks.add(sink_sig)
            alarms.append((sink_sig, witness(e.source, e.id)))
    return alarms


def run_taint(pm: ProgramModel, config, cap: int = ALARM_CAP) -> list[TaintAlarm]:
    """All alarms for a config; deduplicated on (source, sink), capped.

    Plain mode runs the default lists once; the optimized modes run each
    asset independently with its derived sets.
    """
    from .derive import TaintMode

    alarms: list[TaintAlarm] = []
    seen: set[tuple[str | None, str, str]] = set()
    unresolved: list[str] = []

    def run_one(asset: str | None, sources: set[str], sinks: set[str]) -> None:
        srcs, bad_s = _resolve_signatures(pm, sources)
        snks, bad_k = _resolve_signatures(pm, sinks)
        unresolved.extend(bad_s + bad_k)
        for source_sig in sorted(srcs):
            if len(alarms) >= cap:
                return
            for sink_sig, wit in _propagate(pm, source_sig, snks):
                key = (asset, source_sig, sink_sig)
                if key in seen or len(alarms) >= cap:
                    continue
                seen.add(key)
                alarms.append(TaintAlarm(source_sig, sink_sig, asset, wit))

    if config.mode is TaintMode.PLAIN:
        run_one(None, config.default_sources, config.default_sinks)
    else:
        for asset in sorted(config.per_asset):
            spec = config.per_asset[asset]
            run_one(asset, spec.sources, spec.sinks)

    if unresolved:
        # Report once; analysis proceeds on what resolves.
        import logging
        logging.getLogger(__name__).warning(
            "skipped unresolvable signatures: %s", ", ".join(sorted(set(unresolved)))
        )
    return alarms


def compare_configs(pm: ProgramModel, configs: list) -> dict:
    """Per-mode alarm counts with percentage deltas against the first mode."""
    rows = []
    base_count: int | None = None
    for config in configs:
        alarms = run_taint(pm, config)
        count = len(alarms)
        if base_count is None:
            base_count = count
            delta = None
        elif base_count == 0:
            delta = None
        else:
            pct = round(100 * (count - base_count) / base_count)
            if pct < 0:
                delta = f"↓ {-pct}%"
            elif pct > 0:
                delta = f"↑ {pct}%"
            else:
                delta = "0%"
        rows.append({
            "mode": config.mode.value,
            "count": count,
            "delta": delta,
            "alarms": [a.to_dict() for a in alarms],
        })
    return {"modes": rows}
