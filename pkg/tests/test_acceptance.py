"""End-to-end acceptance gate: one test per headline guarantee.

Each test exercises a complete behavior of the workbench against the
bundled corpus or a randomized model family, so `pytest -v
tests/test_acceptance.py` prints one pass/fail line per guarantee.
"""

import itertools
import json
import random
import time

import pytest

from conftest import CORPUS, expected_manifest, gt_records, load_fixture, pinned_state
from flowmap.contracts import (
    IFlow,
    enumerate_injectable_contracts,
    extract_iflows,
    find_biunique,
    parse_crypto_list,
    run_injection_experiment,
)
from flowmap.mapping import (
    EntryKind,
    EntryState,
    GroundTruth,
    MappingState,
    evaluate_against_ground_truth,
    map_manually,
    run_iteration,
)
from flowmap.mapping.engine import MappingEntry, entry_id
from flowmap.pm.extract import extract_pm
from flowmap.pm.queries import in_flows, out_flows
from flowmap.secdfd.model import ContractKind, Label
from flowmap.secdfd.parser import parse_secdfd
from flowmap.service.session import create_session, load_session
from flowmap.taint import TaintMode, build_config, run_taint
from oracles import all_backward_sources, exhaustive_biunique, taint_reachable_pairs


def test_name_matching_reproduces_reference_example():
    """Get_Value ↔ {get, getPassword} and Get_Passwords_External ↔ {getPassword}."""
    start = time.monotonic()
    model, pm = load_fixture("securestore")
    state = MappingState(models={model.name: model}, pm=pm)
    run_iteration(state)
    names = {}
    for e in state.entries.values():
        if e.kind is EntryKind.PROCESS_NAME:
            names.setdefault(e.dfd_ref, set()).add(e.pm_ref)
    expected = expected_manifest("securestore")["processNames"]
    for dfd_ref, pm_refs in expected.items():
        assert names.get(dfd_ref, set()) == set(pm_refs), dfd_ref
    assert time.monotonic() - start < 1.0


def test_signature_extension_requires_asset_typed_slot():
    """secret↔String admits get(String,String):String; a signature without
    the asset type in any slot gets no entry."""
    dfd = parse_secdfd("""
model m
external User
process Get_Value
store S
asset secret : String high from User to S
flow 1 : User -> Get_Value carrying secret
flow 2 : Get_Value -> S carrying secret
""")
    pm = extract_pm({"app.mini": """
type String { }
type PasswordExt { }
type Store {
  def get(user: String, key: String): String {
    return key;
  }
  def get(ext: PasswordExt): PasswordExt {
    return ext;
  }
}
"""})
    state = MappingState(models={dfd.name: dfd}, pm=pm)
    map_manually(state, "m/secret", "T:String")
    run_iteration(state)
    sigs = {e.pm_ref for e in state.entries.values()
            if e.kind is EntryKind.PROCESS_SIGNATURE}
    assert "S:get(String,String):String" in sigs
    assert "S:get(PasswordExt):PasswordExt" not in sigs


def test_label_propagation_randomized():
    """≥200 random contract models: encrypt→LOW, join = OR of HIGH inputs,
    forward/decrypt = identity, propagation idempotent. Exact labels."""
    from flowmap.secdfd.labels import propagate_labels

    rng = random.Random(1789)
    cases = 0
    for _ in range(220):
        kind = rng.choice(["encrypt", "hash", "decrypt", "forward", "join"])
        l1, l2 = rng.choice(["high", "low"]), rng.choice(["high", "low"])
        ins = "a1,a2" if kind == "join" else "a1"
        text = "\n".join([
            "model rnd",
            "external E1",
            "external E2",
            "process P",
            "store S",
            f"asset a1 : T1 {l1} from E1 to S",
            f"asset a2 : T2 {l2} from E2 to S",
            "asset a3 : T3 low from P to S",
            "flow 1 : E1 -> P carrying a1",
            "flow 2 : E2 -> P carrying a2",
            "flow 3 : P -> S carrying a3",
            f"contract P {kind} in {ins} out a3",
        ]) + "\n"
        model = parse_secdfd(text)
        labels = propagate_labels(model)
        out = labels.label(3, "a3")
        lab1 = Label.HIGH if l1 == "high" else Label.LOW
        lab2 = Label.HIGH if l2 == "high" else Label.LOW
        if kind in ("encrypt", "hash"):
            assert out is Label.LOW
        elif kind == "join":
            assert out is (Label.HIGH if Label.HIGH in (lab1, lab2) else Label.LOW)
        else:
            assert out is lab1
        assert labels.label(1, "a1") is lab1
        assert labels.label(2, "a2") is lab2
        assert propagate_labels(model).entries == labels.entries
        cases += 1
    assert cases >= 200


def test_fully_compliant_baseline_has_zero_violations():
    """Crypto + processing checks on the pinned compliant corpus: no findings."""
    from flowmap.contracts import check_all

    state = pinned_state("pipeline")
    crypto = parse_crypto_list((CORPUS / "pipeline" / "pipeline.crypto").read_text())
    result = check_all(state, crypto)
    assert result.violations == []
    manifest = expected_manifest("pipeline")["baseline"]
    assert sorted(result.convergences) == sorted(manifest["convergences"])


def test_injection_enumeration_two_in_two_out_yields_six():
    """A contract-free process with 2 in- and 2 out-assets admits exactly
    6 forward/join injections (4 forwards + 2 joins)."""
    model = parse_secdfd("""
model e
external A
process P
store S
asset w : W high from A to S
asset x : X high from A to S
asset y : Y low from A to S
asset z : Z low from A to S
flow 1 : A -> P carrying w
flow 2 : A -> P carrying x
flow 3 : P -> S carrying y
flow 4 : P -> S carrying z
""")
    injectable = enumerate_injectable_contracts(
        model, "P", kinds=(ContractKind.FORWARD, ContractKind.JOIN))
    assert len(injectable) == 6
    assert sum(c.kind is ContractKind.FORWARD for c in injectable) == 4
    assert sum(c.kind is ContractKind.JOIN for c in injectable) == 2


def test_injection_experiment_matches_frozen_manifest():
    """Full crypto list: 100% precision and recall. Dual-capability list:
    exactly the predicted misses. Under 30 seconds."""
    start = time.monotonic()
    manifest = expected_manifest("pipeline")

    for list_name, block, flag in (
        ("pipeline.crypto", "single", "detectedSingle"),
        ("pipeline_dual.crypto", "dual", "detectedDual"),
    ):
        state = pinned_state("pipeline")
        crypto = parse_crypto_list((CORPUS / "pipeline" / list_name).read_text())
        result = run_injection_experiment(state, crypto)
        expected = manifest[block]
        assert (result["tp"], result["fp"], result["fn"]) == (
            expected["tp"], expected["fp"], expected["fn"])
        assert result["precision"] == expected["precision"]
        assert result["recall"] == expected["recall"]
        detected = {(r["process"], r["contract"]): r["detected"]
                    for r in result["injections"]}
        for rec in manifest["injections"]:
            assert detected[(rec["process"], rec["contract"])] == rec[flag]
    assert time.monotonic() - start < 30.0


def test_iflow_and_biunique_match_bruteforce_oracles():
    """extract_iflows equals exhaustive backward path search on every
    fixture; find_biunique equals exhaustive assignment search."""
    for name in ("pipeline", "securestore"):
        state = pinned_state(name)
        model = state.models[name]
        pm = state.pm
        assert len(pm.flows) <= 200
        asset_types = set(state.types_to_assets(model, pinned_only=True))
        for proc in model.processes():
            defs = state.process_definitions(f"{name}/{proc.id}", pinned_only=True)
            if not defs:
                continue
            ins = {e for e in in_flows(pm, defs) if e.communicated_type in asset_types}
            outs = {e for e in out_flows(pm, defs) if e.communicated_type in asset_types}
            expected = set()
            for target in outs:
                sources = all_backward_sources(pm, target, ins, defs)
                if sources:
                    expected.add(IFlow(frozenset(e.id for e in sources), target.id))
            assert extract_iflows(state, model, proc.id) == expected, proc.id

    flows = [IFlow(frozenset({f"s{i}"}), "t") for i in range(3)]
    for n_contracts in (1, 2, 3):
        for bits in itertools.product([0, 1], repeat=n_contracts * 3):
            matches = {
                (f"c{c}", "t"): {flows[f] for f in range(3) if bits[c * 3 + f]}
                for c in range(n_contracts)
            }
            fast = find_biunique(matches)
            assert (fast is not None) == exhaustive_biunique(matches)
            if fast is not None:
                assert len(set(fast.values())) == len(fast)
                assert all(v in matches[k] for k, v in fast.items())


def test_taint_matches_oracle_and_optimization_reduces_alarms():
    """run_taint equals the reachability oracle; FULLY_OPT ⊆ PARTLY_OPT for
    equal sources; PLAIN → FULLY_OPT reduction strictly positive."""
    from flowmap.taint import TaintConfig

    state = pinned_state("securestore")
    for dfd, pm_ref in [
        ("securestore/Get_Value", "D:Service.get(Key):Secret"),
        ("securestore/Get_Value", "D:Service.getPassword(Key):Secret"),
        ("securestore/Get_Passwords_External", "D:PluginGateway.sendToPlugin(Secret):Eff"),
        ("securestore/Log_It", "D:Logger.log(Secret):Eff"),
    ]:
        map_manually(state, dfd, pm_ref)
    model = state.models["securestore"]
    sources = {"S:get(Key):Secret", "S:getPassword(Key):Secret"}
    sinks = {"S:log(Secret):Eff", "S:sendToPlugin(Secret):Eff"}

    plain = run_taint(state.pm, TaintConfig(
        mode=TaintMode.PLAIN, default_sources=sources, default_sinks=sinks))
    assert {(a.source_signature, a.sink_signature) for a in plain} == \
        taint_reachable_pairs(state.pm, sources, sinks)

    partly = build_config(TaintMode.PARTLY_OPT, model, state, sources, sinks)
    fully = build_config(TaintMode.FULLY_OPT, model, state, sources, sinks)
    for asset in fully.per_asset:
        assert fully.per_asset[asset].sources == partly.per_asset[asset].sources
    partly_pairs = {(a.source_signature, a.sink_signature)
                    for a in run_taint(state.pm, partly)}
    fully_pairs = {(a.source_signature, a.sink_signature)
                   for a in run_taint(state.pm, fully)}
    assert fully_pairs <= partly_pairs

    manifest = expected_manifest("securestore")["taint"]
    counts = {
        TaintMode.PLAIN: len(plain),
        TaintMode.PARTLY_OPT: len(partly_pairs),
        TaintMode.FULLY_OPT: len(fully_pairs),
    }
    for mode, count in counts.items():
        assert count == manifest[mode.value]
    assert counts[TaintMode.FULLY_OPT] < counts[TaintMode.PLAIN]


def test_evaluation_identities_hold_on_randomized_pairs():
    """TP + FN = |GT| and TP + FP = |suggestions| on 100 random pairs."""
    rng = random.Random(42)
    pool = [(f"m/E{i}", f"N:n{j}") for i in range(8) for j in range(8)]
    pm = extract_pm({"x.mini": "type A { }"})
    fake = MappingState(models={}, pm=pm)
    for _ in range(100):
        suggested = set(rng.sample(pool, rng.randint(0, 20)))
        gt_pairs = frozenset(rng.sample(pool, rng.randint(0, 20)))
        entries = [
            MappingEntry(id=entry_id(d, p), dfd_ref=d, pm_ref=p,
                         kind=EntryKind.PROCESS_NAME,
                         state=EntryState.SUGGESTED, quality=1.0)
            for d, p in suggested
        ]
        result = evaluate_against_ground_truth(fake, GroundTruth(gt_pairs), entries)
        assert result["tp"] + result["fn"] == len(gt_pairs)
        assert result["tp"] + result["fp"] == len(suggested)


def test_two_independent_runs_serialize_identically(tmp_path, monkeypatch):
    """The full pipeline is deterministic: two fresh sessions over the same
    inputs persist byte-identical artifacts."""
    corpus = CORPUS / "securestore"
    model = corpus / "securestore.secdfd"
    payloads = []
    for run in ("one", "two"):
        home = tmp_path / run
        monkeypatch.setenv("FLOWMAP_HOME", str(home))
        session = create_session(str(corpus), [str(model)], session_id="run")
        session.iterate()
        first = session.suggestions()[0]
        session.apply_decision(first.id, "accept")
        session.iterate()
        session.persist()
        reloaded = load_session("run")
        reloaded.persist()
        root = home / "run"
        payloads.append({
            str(p.relative_to(root)): p.read_bytes()
            for p in sorted(root.rglob("*")) if p.is_file() and p.name != "session.json"
        })
    assert payloads[0] == payloads[1]
