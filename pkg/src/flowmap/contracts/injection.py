"""Contract-injection evaluation harness.

Starting from a fully compliant pairing of diagram and code, each
syntactically valid but unimplemented contract is injected one at a time.
A correct checker must flag every injected contract as an absence without
disturbing the violations and convergences of the clean baseline.
"""

from __future__ import annotations

from dataclasses import replace
from itertools import combinations

from ..mapping.engine import MappingState
from ..secdfd.model import ContractKind, DfdNode, ProcessContract, SecDfd
from .checker import (
    CRYPTO_KINDS,
    CheckResult,
    CryptoSignatureList,
    ViolationKind,
    check_all,
    render_contract,
)

ALL_KINDS = tuple(ContractKind)


def enumerate_injectable_contracts(
    model: SecDfd,
    process_id: str,
    kinds: tuple[ContractKind, ...] = ALL_KINDS,
) -> list[ProcessContract]:
    """Contracts that could be added to a process but are not present.

    Crypto kinds inject once per process lacking that kind. Forward injects
    every in/out asset pair, join every in-asset subset of size two or more
    crossed with each out asset. Combinations equal to an existing contract
    are omitted.
    """
    proc = model.node(process_id)
    existing = {(c.kind, frozenset(c.in_assets), frozenset(c.out_assets))
                for c in proc.contracts}
    in_assets = sorted(set(model.in_assets(process_id)))
    out_assets = sorted(set(model.out_assets(process_id)))

    result: list[ProcessContract] = []

    def propose(kind: ContractKind, ins: tuple[str, ...], outs: tuple[str, ...]) -> None:
        if (kind, frozenset(ins), frozenset(outs)) not in existing:
            result.append(ProcessContract(kind=kind, in_assets=ins, out_assets=outs))

    for kind in CRYPTO_KINDS:
        if kind not in kinds:
            continue
        if any(c.kind is kind for c in proc.contracts):
            continue
        if in_assets and out_assets:
            propose(kind, tuple(in_assets), tuple(out_assets))

    if ContractKind.FORWARD in kinds:
        for a in in_assets:
            for b in out_assets:
                propose(ContractKind.FORWARD, (a,), (b,))

    if ContractKind.JOIN in kinds:
        for size in range(2, len(in_assets) + 1):
            for subset in combinations(in_assets, size):
                for b in out_assets:
                    propose(ContractKind.JOIN, subset, (b,))

    return result


def _with_contract(model: SecDfd, process_id: str, contract: ProcessContract) -> SecDfd:
    nodes = tuple(
        replace(n, contracts=(*n.contracts, contract)) if n.id == process_id else n
        for n in model.nodes
    )
    return replace(model, nodes=nodes)


def _expected_absence(contract: ProcessContract) -> ViolationKind:
    if contract.kind in CRYPTO_KINDS:
        return ViolationKind.CRYPTO_ABSENCE
    return ViolationKind.ABSENCE_NOT_IMPLEMENTED


def run_injection_experiment(
    state: MappingState,
    crypto_list: CryptoSignatureList,
    kinds: tuple[ContractKind, ...] = ALL_KINDS,
) -> dict:
    """Inject every enumerable contract, one at a time, and score detection.

    A detected injected absence is a true positive, a missed one a false
    negative. Any violation the clean baseline did not have, other than the
    expected absence, and any baseline convergence that disappears, counts
    as a false positive.
    """
    baseline = check_all(state, crypto_list)
    if baseline.violations:
        raise ValueError(
            "injection experiment needs a violation-free baseline; found "
            + ", ".join(v.kind.value for v in baseline.violations)
        )
    baseline_convergences = set(baseline.convergences)

    tp = fp = fn = 0
    records: list[dict] = []
    for model_name in sorted(state.models):
        model = state.models[model_name]
        for proc in model.processes():
            for contract in enumerate_injectable_contracts(model, proc.id, kinds):
                injected = _with_contract(model, proc.id, contract)
                state.models[model_name] = injected
                try:
                    result: CheckResult = check_all(state, crypto_list)
                finally:
                    state.models[model_name] = model

                proc_ref = f"{model.name}/{proc.id}"
                rendered = render_contract(contract)
                expected = _expected_absence(contract)
                detected = any(
                    v.kind is expected and v.process == proc_ref
                    and v.contract == rendered
                    for v in result.violations
                )
                unexpected = [
                    v for v in result.violations
                    if not (v.kind is expected and v.process == proc_ref
                            and v.contract == rendered)
                ]
                lost = baseline_convergences - set(result.convergences)

                tp += 1 if detected else 0
                fn += 0 if detected else 1
                fp += len(unexpected) + len(lost)
                records.append({
                    "process": proc_ref,
                    "contract": rendered,
                    "detected": detected,
                    "unexpectedViolations": [v.to_dict() for v in unexpected],
                    "lostConvergences": sorted(lost),
                })

    precision = tp / (tp + fp) if tp + fp else "undefined"
    recall = tp / (tp + fn) if tp + fn else "undefined"
    return {
        "tp": tp,
        "fp": fp,
        "fn": fn,
        "precision": precision,
        "recall": recall,
        "injections": records,
    }
