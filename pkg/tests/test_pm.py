import pytest

from flowmap.pm.extract import CorpusParseError, extract_pm
from flowmap.pm.io import load_pm, save_pm
from flowmap.pm.model import FlowKind, endpoint_def, validate_pm
from flowmap.pm.queries import in_flows, out_flows, reachable_bwd

SMALL = """
type A { }
type B {
  def make(a: A): A {
    return a;
  }
}
type C {
  field kept: A;
  def use(a: A): A {
    let b = new B();
    let x = b.make(a);
    this.kept = x;
    return this.kept;
  }
}
"""


@pytest.fixture
def small_pm():
    return extract_pm({"small.mini": SMALL})


def test_extract_ids_and_structure(small_pm):
    pm = small_pm
    assert "T:A" in {t.id for t in pm.type_decls}
    assert "S:make(A):A" in {s.id for s in pm.signatures}
    assert "D:B.make(A):A" in {d.id for d in pm.definitions}
    assert "F:C.kept" in {f.id for f in pm.fields}
    assert ("D:C.use(A):A", "D:B.make(A):A") in {(c.caller, c.callee) for c in pm.calls}
    validate_pm(pm)


def test_extract_flow_kinds(small_pm):
    pm = small_pm
    kinds = {(e.kind, endpoint_def(e.source), endpoint_def(e.target)) for e in pm.flows}
    assert (FlowKind.PARAM_PASS, "D:C.use(A):A", "D:B.make(A):A") in kinds
    assert (FlowKind.RETURN_FLOW, "D:B.make(A):A", "D:C.use(A):A") in kinds


def test_field_flows_are_shared_endpoints(small_pm):
    pm = small_pm
    assert any(e.target == "field:F:C.kept" for e in pm.flows)
    assert any(e.source == "field:F:C.kept" for e in pm.flows)


def test_extract_is_deterministic(small_pm):
    again = extract_pm({"small.mini": SMALL})
    assert save_pm(small_pm) == save_pm(again)


def test_save_load_round_trip(small_pm):
    data = save_pm(small_pm)
    loaded = load_pm(data)
    assert save_pm(loaded) == data
    assert loaded == small_pm


@pytest.mark.parametrize("bad", [
    "type A { def f(",
    "type A { def f(): B { return unknownVar; } }",
    "type A { def f(): A { let x = y.call(); return x; } }",
])
def test_extract_rejects_malformed(bad):
    with pytest.raises(CorpusParseError):
        extract_pm({"bad.mini": bad})


def test_in_out_flows_exclude_internal_edges(small_pm):
    pm = small_pm
    defs = {"D:C.use(A):A"}
    ins = in_flows(pm, defs)
    outs = out_flows(pm, defs)
    assert all(endpoint_def(e.source) not in defs for e in ins)
    assert all(endpoint_def(e.target) not in defs for e in outs)
    assert any(e.kind is FlowKind.RETURN_FLOW for e in ins)  # result of b.make
    assert any(e.kind is FlowKind.PARAM_PASS for e in outs)  # arg into b.make


def test_reachable_bwd_matches_path_oracle(small_pm, pipeline, securestore):
    from oracles import all_backward_sources
    for pm in (small_pm, pipeline[1], securestore[1]):
        def_ids = {d.id for d in pm.definitions}
        # every definition alone, and every pair, as the candidate def set
        singletons = [{d} for d in sorted(def_ids)]
        for defs in singletons:
            ins = in_flows(pm, defs)
            for target in out_flows(pm, defs):
                got = reachable_bwd(pm, target, ins, defs)
                want = all_backward_sources(pm, target, ins, defs)
                assert got == want, (defs, target.id)


def test_corpus_flow_counts_are_stable(pipeline, securestore):
    # frozen counts guard against silent extractor drift
    assert len(pipeline[1].flows) == 43
    assert len(pipeline[1].definitions) == 8
    assert len(securestore[1].flows) == 29
    assert len(securestore[1].definitions) == 7
