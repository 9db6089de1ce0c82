"""Verification of process contracts against the mapped implementation.

Two families of checks. Cryptographic contracts (encrypt-or-hash, decrypt)
are rule based: some mapped definition must call a function on the known
cryptographic signature list with the right capability. Data-processing
contracts (forward, join) are checked by extracting the implemented flows
of each process and searching for a biunique assignment of specified flows
to implemented ones.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from ..mapping.engine import EntryKind, MappingState, dfd_ref
from ..pm.model import DataFlowEdge
from ..pm.queries import in_flows, out_flows, reachable_bwd
from ..secdfd.model import ContractKind, ProcessContract, SecDfd
from .cryptolist import CryptoCapability, CryptoSignatureList

CRYPTO_KINDS = (ContractKind.ENCRYPT_OR_HASH, ContractKind.DECRYPT)
PROCESSING_KINDS = (ContractKind.FORWARD, ContractKind.JOIN)

_CAPABILITY_FOR = {
    ContractKind.ENCRYPT_OR_HASH: CryptoCapability.ENCRYPT,
    ContractKind.DECRYPT: CryptoCapability.DECRYPT,
}


class ViolationKind(Enum):
    CRYPTO_ABSENCE = "CRYPTO_ABSENCE"
    ABSENCE_NOT_IMPLEMENTED = "ABSENCE_NOT_IMPLEMENTED"
    DIVERGENCE_NO_BIUNIQUE = "DIVERGENCE_NO_BIUNIQUE"
    DIVERGENCE_NOT_IN_DFD = "DIVERGENCE_NOT_IN_DFD"


@dataclass(frozen=True)
class IFlow:
    sources: frozenset[str]  # DataFlowEdge ids into the process
    target: str  # DataFlowEdge id out of the process

    def __post_init__(self) -> None:
        if not self.sources:
            raise ValueError("an implemented flow needs at least one source")

    @property
    def key(self) -> tuple[tuple[str, ...], str]:
        return (tuple(sorted(self.sources)), self.target)


@dataclass(frozen=True)
class ComplianceViolation:
    kind: ViolationKind
    process: str  # dfd ref
    contract: str | None = None  # rendered contract description
    out_asset: str | None = None
    evidence: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "process": self.process,
            "contract": self.contract,
            "outAsset": self.out_asset,
            "evidence": list(self.evidence),
        }


@dataclass
class CheckResult:
    violations: list[ComplianceViolation] = field(default_factory=list)
    convergences: list[str] = field(default_factory=list)


def render_contract(contract: ProcessContract) -> str:
    ins = ",".join(contract.in_assets)
    outs = ",".join(contract.out_assets)
    return f"{contract.kind.value}({ins} -> {outs})"


def _process_defs(state: MappingState, model: SecDfd, process_id: str) -> set[str]:
    return state.process_definitions(dfd_ref(model, process_id), pinned_only=True)


# -- cryptographic contracts ----------------------------------------------------

def check_crypto(state: MappingState, crypto_list: CryptoSignatureList) -> CheckResult:
    """Each crypto contract needs a call from a mapped definition to a
    listed capable function."""
    result = CheckResult()
    pm = state.pm
    callees_of: dict[str, set[str]] = {}
    for c in pm.calls:
        callees_of.setdefault(c.caller, set()).add(c.callee)

    for model in state.models.values():
        for proc in model.processes():
            for contract in proc.contracts:
                if contract.kind not in CRYPTO_KINDS:
                    continue
                capability = _CAPABILITY_FOR[contract.kind]
                defs = _process_defs(state, model, proc.id)
                witnesses = []
                for d in sorted(defs):
                    for callee in sorted(callees_of.get(d, ())):
                        rendered = pm.render_definition(callee)
                        if crypto_list.capable(rendered, capability):
                            witnesses.append((d, callee))
                if witnesses:
                    result.convergences.append(
                        f"{dfd_ref(model, proc.id)}::{render_contract(contract)}"
                    )
                else:
                    result.violations.append(ComplianceViolation(
                        kind=ViolationKind.CRYPTO_ABSENCE,
                        process=dfd_ref(model, proc.id),
                        contract=render_contract(contract),
                        evidence=tuple(sorted(defs)),
                    ))
    return result


# -- implemented-flow extraction ------------------------------------------------

def extract_iflows(state: MappingState, model: SecDfd, process_id: str) -> set[IFlow]:
    """Implemented flows of a process: for each asset-typed outgoing edge,
    the asset-typed incoming edges it is backward-reachable from."""
    defs = _process_defs(state, model, process_id)
    if not defs:
        raise ValueError(f"process '{process_id}' has no mapped definitions")
    pm = state.pm
    asset_types = set(state.types_to_assets(model, pinned_only=True))

    ins = {e for e in in_flows(pm, defs) if e.communicated_type in asset_types}
    outs = {e for e in out_flows(pm, defs) if e.communicated_type in asset_types}

    iflows: set[IFlow] = set()
    for target in outs:
        sources = reachable_bwd(pm, target, ins, defs)
        if sources:
            iflows.add(IFlow(frozenset(e.id for e in sources), target.id))
    return iflows


# -- biunique matching ----------------------------------------------------------

def find_biunique(
    matches: dict[tuple[str, str], set[IFlow]],
) -> dict[tuple[str, str], IFlow] | None:
    """Injective assignment of one candidate implemented flow to every
    specified flow, by backtracking; smallest candidate sets first."""
    keys = sorted(matches, key=lambda k: (len(matches[k]), k))
    assignment: dict[tuple[str, str], IFlow] = {}
    used: set[IFlow] = set()

    def assign(i: int) -> bool:
        if i == len(keys):
            return True
        key = keys[i]
        for cand in sorted(matches[key], key=lambda f: f.key):
            if cand in used:
                continue
            assignment[key] = cand
            used.add(cand)
            if assign(i + 1):
                return True
            del assignment[key]
            used.remove(cand)
        return False

    return assignment if assign(0) else None


def _candidates_for(
    state: MappingState,
    model: SecDfd,
    contract: ProcessContract,
    out_asset: str,
    iflows: set[IFlow],
    edge_by_id: dict[str, DataFlowEdge],
) -> set[IFlow]:
    types_to_assets = state.types_to_assets(model, pinned_only=True)
    in_assets = set(contract.in_assets)
    result: set[IFlow] = set()
    for f in iflows:
        target_assets = types_to_assets.get(edge_by_id[f.target].communicated_type, set())
        if out_asset not in target_assets:
            continue
        if all(
            types_to_assets.get(edge_by_id[s].communicated_type, set()) & in_assets
            for s in f.sources
        ):
            result.add(f)
    return result


def check_processing_contracts(
    state: MappingState,
    model: SecDfd,
    process_id: str,
    iflows: set[IFlow] | None = None,
) -> CheckResult:
    """Forward/join contracts of one process against its implemented flows.

    A contract with several outgoing assets is checked once per out-asset.
    Candidate implemented flows outside the biunique solution are reported
    as flows the diagram does not specify.
    """
    result = CheckResult()
    proc = model.node(process_id)
    contracts = [c for c in proc.contracts if c.kind in PROCESSING_KINDS]
    if not contracts:
        return result
    if iflows is None:
        iflows = extract_iflows(state, model, process_id)

    edge_by_id = {e.id: e for e in state.pm.flows}
    proc_ref = dfd_ref(model, process_id)

    matches: dict[tuple[str, str], set[IFlow]] = {}
    for contract in contracts:
        for out_asset in contract.out_assets:
            key = (render_contract(contract), out_asset)
            cands = _candidates_for(state, model, contract, out_asset, iflows, edge_by_id)
            if not cands:
                result.violations.append(ComplianceViolation(
                    kind=ViolationKind.ABSENCE_NOT_IMPLEMENTED,
                    process=proc_ref,
                    contract=render_contract(contract),
                    out_asset=out_asset,
                ))
            else:
                matches[key] = cands

    solution = find_biunique(matches)
    if solution is None:
        result.violations.append(ComplianceViolation(
            kind=ViolationKind.DIVERGENCE_NO_BIUNIQUE,
            process=proc_ref,
            evidence=tuple(sorted(k[0] for k in matches)),
        ))
        return result

    for key, iflow in sorted(solution.items()):
        result.convergences.append(f"{proc_ref}::{key[0]}::{key[1]}")
    assigned = set(solution.values())
    leftovers = {f for cands in matches.values() for f in cands} - assigned
    for f in sorted(leftovers, key=lambda f: f.key):
        result.violations.append(ComplianceViolation(
            kind=ViolationKind.DIVERGENCE_NOT_IN_DFD,
            process=proc_ref,
            evidence=(*sorted(f.sources), f.target),
        ))
    return result


def check_all(
    state: MappingState,
    crypto_list: CryptoSignatureList,
) -> CheckResult:
    """Crypto plus processing checks over every process of every model."""
    result = check_crypto(state, crypto_list)
    for model in state.models.values():
        for proc in model.processes():
            if not any(c.kind in PROCESSING_KINDS for c in proc.contracts):
                continue
            sub = check_processing_contracts(state, model, proc.id)
            result.violations.extend(sub.violations)
            result.convergences.extend(sub.convergences)
    return result
