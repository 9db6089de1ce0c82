import json
from pathlib import Path

import pytest

from flowmap.mapping import MappingState, map_manually
from flowmap.pm.extract import extract_pm
from flowmap.secdfd.parser import parse_secdfd

CORPUS = Path(__file__).resolve().parent.parent / "corpus"


def load_fixture(name: str):
    d = CORPUS / name
    model = parse_secdfd((d / f"{name}.secdfd").read_text())
    pm = extract_pm({p.name: p.read_text() for p in sorted(d.glob("*.mini"))})
    return model, pm


def gt_records(name: str) -> list[dict]:
    return json.loads((CORPUS / name / f"{name}.gt.json").read_text())


def expected_manifest(name: str) -> dict:
    return json.loads((CORPUS / name / f"{name}.expected.json").read_text())


def pinned_state(name: str) -> MappingState:
    """Fresh mapping state with the fixture's ground truth pinned manually."""
    model, pm = load_fixture(name)
    state = MappingState(models={model.name: model}, pm=pm)
    for rec in gt_records(name):
        map_manually(state, rec["dfd"], rec["pm"])
    return state


@pytest.fixture
def securestore():
    return load_fixture("securestore")


@pytest.fixture
def pipeline():
    return load_fixture("pipeline")


@pytest.fixture
def pipeline_state():
    return pinned_state("pipeline")


@pytest.fixture
def securestore_state():
    return pinned_state("securestore")
