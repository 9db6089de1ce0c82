"""Session lifecycle and on-disk persistence.

A session is a directory of canonical JSON artifacts under the session
root (environment variable FLOWMAP_HOME, default ~/.flowmap): the
extracted program model, the parsed design models, the mapping state, the
cryptographic signature list, and the latest suggestion and violation
reports. Canonical form means sorted keys and two-space indentation, so a
serialize-deserialize-serialize round trip is byte identical.
"""

from __future__ import annotations

import json
import os
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path

from ..contracts.checker import check_all
from ..contracts.cryptolist import (
    CryptoSignatureList,
    parse_crypto_list,
    print_crypto_list,
)
from ..contracts.injection import run_injection_experiment
from ..mapping.engine import (
    Decision,
    EntryKind,
    EntryState,
    MappingEntry,
    MappingState,
    decide,
    map_manually,
    run_iteration,
)
from ..mapping.report import GroundTruth, evaluate_against_ground_truth
from ..pm.extract import extract_pm
from ..pm.io import load_pm, save_pm
from ..pm.model import ProgramModel
from ..secdfd.labels import check_design_leaks, propagate_labels
from ..secdfd.model import ContractKind, SecDfd
from ..secdfd.parser import parse_secdfd
from ..taint.derive import TaintMode, build_config
from ..taint.engine import compare_configs, run_taint

CORPUS_SUFFIX = ".mini"
MODEL_SUFFIX = ".secdfd"

_TAINT_MODES = {
    "plain": TaintMode.PLAIN,
    "partly": TaintMode.PARTLY_OPT,
    "fully": TaintMode.FULLY_OPT,
}

_INJECTION_KINDS = {
    "enc": ContractKind.ENCRYPT_OR_HASH,
    "dec": ContractKind.DECRYPT,
    "fwd": ContractKind.FORWARD,
    "join": ContractKind.JOIN,
}


class SessionError(ValueError):
    pass


def session_root() -> Path:
    return Path(os.environ.get("FLOWMAP_HOME", str(Path.home() / ".flowmap")))


def canonical_dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


# -- mapping state (de)serialization -------------------------------------------

def serialize_state(state: MappingState, suggestions: list[MappingEntry]) -> dict:
    suggested_ids = [e.id for e in suggestions]
    return {
        "iteration": state.iteration,
        "entries": [
            {
                "id": e.id,
                "dfd": e.dfd_ref,
                "pm": e.pm_ref,
                "kind": e.kind.value,
                "state": e.state.value,
                "quality": e.quality,
                "score": state.score(e.id),
                "derivedFrom": list(e.derived_from),
            }
            for e in sorted(state.entries.values(), key=lambda e: e.id)
        ],
        "rejectedPairs": sorted([d, p] for d, p in state.rejected_pairs),
        "suggested": suggested_ids,
    }


def deserialize_state(
    data: dict, models: dict[str, SecDfd], pm: ProgramModel
) -> tuple[MappingState, list[str]]:
    state = MappingState(models=models, pm=pm, iteration=data.get("iteration", 0))
    for rec in data.get("entries", []):
        state.entries[rec["id"]] = MappingEntry(
            id=rec["id"],
            dfd_ref=rec["dfd"],
            pm_ref=rec["pm"],
            kind=EntryKind(rec["kind"]),
            state=EntryState(rec["state"]),
            quality=rec["quality"],
            derived_from=tuple(rec.get("derivedFrom", [])),
        )
    state.rejected_pairs = {(d, p) for d, p in data.get("rejectedPairs", [])}
    return state, list(data.get("suggested", []))


@dataclass
class Session:
    id: str
    path: Path
    corpus_path: str
    pm: ProgramModel
    models: dict[str, SecDfd]
    state: MappingState
    crypto_list: CryptoSignatureList
    suggested_ids: list[str] = field(default_factory=list)
    default_sources: set[str] = field(default_factory=set)
    default_sinks: set[str] = field(default_factory=set)
    created_at: float = 0.0
    updated_at: float = 0.0

    # -- persistence -----------------------------------------------------------

    def persist(self) -> None:
        self.updated_at = time.time()
        self.path.mkdir(parents=True, exist_ok=True)
        (self.path / "pm.json").write_bytes(save_pm(self.pm))
        models_dir = self.path / "models"
        models_dir.mkdir(exist_ok=True)
        from ..secdfd.parser import print_secdfd
        for name, model in self.models.items():
            (models_dir / f"{name}{MODEL_SUFFIX}").write_text(print_secdfd(model))
        (self.path / "mapping.json").write_text(
            canonical_dumps(serialize_state(self.state, self.suggestions()))
        )
        (self.path / "crypto.crypto").write_text(print_crypto_list(self.crypto_list))
        meta = {
            "id": self.id,
            "corpus": self.corpus_path,
            "models": sorted(self.models),
            "createdAt": self.created_at,
            "updatedAt": self.updated_at,
            "defaultSources": sorted(self.default_sources),
            "defaultSinks": sorted(self.default_sinks),
        }
        (self.path / "session.json").write_text(canonical_dumps(meta))

    def suggestions(self) -> list[MappingEntry]:
        return [self.state.entries[i] for i in self.suggested_ids
                if i in self.state.entries]

    def suggestion_view(self) -> list[dict]:
        return [
            {
                "id": e.id,
                "dfd": e.dfd_ref,
                "pm": e.pm_ref,
                "pmLabel": _pm_label(self.pm, e.pm_ref),
                "kind": e.kind.value,
                "state": e.state.value,
                "score": self.state.score(e.id),
                "location": _pm_location(self.pm, e.pm_ref),
            }
            for e in self.suggestions()
        ]

    # -- mutations ---------------------------------------------------------------

    def apply_decision(self, entry_id: str, decision: str) -> None:
        try:
            d = Decision(decision)
        except ValueError:
            raise SessionError(f"unknown decision '{decision}'") from None
        decide(self.state, entry_id, d)
        self.suggested_ids = [i for i in self.suggested_ids if i in self.state.entries]
        self.persist()

    def apply_manual(self, dfd_ref: str, pm_ref: str) -> MappingEntry:
        entry = map_manually(self.state, dfd_ref, pm_ref)
        if entry.id not in self.suggested_ids:
            self.suggested_ids.append(entry.id)
        self.persist()
        return entry

    def iterate(self) -> list[MappingEntry]:
        out = run_iteration(self.state)
        self.suggested_ids = [e.id for e in out]
        self.persist()
        return out

    def set_crypto_list(self, text: str) -> None:
        self.crypto_list = parse_crypto_list(text)
        self.persist()

    # -- checks ------------------------------------------------------------------

    def run_check(self, kind: str, mode: str | None = None) -> dict:
        if kind == "crypto" or kind == "contracts":
            if kind == "crypto":
                from ..contracts.checker import check_crypto
                result = check_crypto(self.state, self.crypto_list)
            else:
                result = check_all(self.state, self.crypto_list)
            report = {
                "kind": kind,
                "violations": [v.to_dict() for v in result.violations],
                "convergences": result.convergences,
            }
        elif kind == "design":
            violations = []
            for model in self.models.values():
                labels = propagate_labels(model)
                for leak in check_design_leaks(model, labels):
                    violations.append({
                        "kind": "DESIGN_LEAK",
                        "asset": leak.asset,
                        "zone": leak.zone,
                        "element": leak.element,
                        "model": model.name,
                    })
            report = {"kind": "design", "violations": violations}
        elif kind == "taint":
            taint_mode = _TAINT_MODES.get(mode or "fully")
            if taint_mode is None:
                raise SessionError(f"unknown taint mode '{mode}'")
            model = next(iter(self.models.values()))
            config = build_config(taint_mode, model, self.state,
                                  self.default_sources, self.default_sinks)
            alarms = run_taint(self.pm, config)
            report = {
                "kind": "taint",
                "mode": taint_mode.value,
                "violations": [a.to_dict() for a in alarms],
            }
        else:
            raise SessionError(f"unknown check kind '{kind}'")
        (self.path / "violations.json").write_text(canonical_dumps(report))
        self.persist()
        return report

    def run_taint_comparison(self) -> dict:
        model = next(iter(self.models.values()))
        configs = [
            build_config(m, model, self.state, self.default_sources, self.default_sinks)
            for m in (TaintMode.PLAIN, TaintMode.PARTLY_OPT, TaintMode.FULLY_OPT)
        ]
        return compare_configs(self.pm, configs)

    def run_injection(self, kinds: list[str] | None = None) -> dict:
        contract_kinds = tuple(
            _INJECTION_KINDS[k] for k in (kinds or list(_INJECTION_KINDS))
        )
        return run_injection_experiment(self.state, self.crypto_list, contract_kinds)

    def evaluate(self, gt_records: list[dict]) -> dict:
        gt = GroundTruth.from_records(gt_records)
        return evaluate_against_ground_truth(self.state, gt)


def _pm_label(pm: ProgramModel, pm_ref: str) -> str:
    prefix = pm_ref.split(":", 1)[0]
    if prefix == "S":
        return pm.render_signature(pm_ref)
    if prefix == "D":
        return pm.render_definition(pm_ref)
    return pm_ref.split(":", 1)[1]


def _pm_location(pm: ProgramModel, pm_ref: str) -> dict | None:
    if not pm_ref.startswith("D:"):
        return None
    d = pm.definition_by_id(pm_ref)
    return {"file": d.location.file, "line": d.location.line_start}


# -- corpus loading -------------------------------------------------------------

def load_corpus(corpus_path: str | Path) -> ProgramModel:
    path = Path(corpus_path)
    if path.is_file():
        sources = {path.name: path.read_text()}
    elif path.is_dir():
        sources = {
            p.name: p.read_text() for p in sorted(path.glob(f"*{CORPUS_SUFFIX}"))
        }
        if not sources:
            raise SessionError(f"no {CORPUS_SUFFIX} files in '{path}'")
    else:
        raise SessionError(f"corpus path '{path}' does not exist")
    return extract_pm(sources)


def _signature_patterns(pm: ProgramModel, patterns: list[str]) -> set[str]:
    """Resolve rendered-signature glob patterns to signature ids."""
    from fnmatch import fnmatchcase
    result: set[str] = set()
    for s in pm.signatures:
        rendered = pm.render_signature(s.id)
        if any(fnmatchcase(rendered, p) for p in patterns):
            result.add(s.id)
    return result


def create_session(
    corpus_path: str,
    secdfd_paths: list[str],
    crypto_path: str | None = None,
    sources_path: str | None = None,
    sinks_path: str | None = None,
    session_id: str | None = None,
) -> Session:
    pm = load_corpus(corpus_path)
    models: dict[str, SecDfd] = {}
    errors: list[str] = []
    for p in secdfd_paths:
        try:
            model = parse_secdfd(Path(p).read_text())
            models[model.name] = model
        except (OSError, ValueError) as exc:
            errors.append(f"{p}: {exc}")
    if errors:
        raise SessionError("; ".join(errors))
    if not models:
        raise SessionError("at least one design model is required")

    corpus = Path(corpus_path)
    corpus_dir = corpus if corpus.is_dir() else corpus.parent

    def read_lines(explicit: str | None, suffix: str) -> list[str]:
        if explicit:
            text = Path(explicit).read_text()
        else:
            candidates = sorted(corpus_dir.glob(f"*{suffix}"))
            if not candidates:
                return []
            text = candidates[0].read_text()
        return [
            line.strip() for line in text.splitlines()
            if line.strip() and not line.strip().startswith("#")
        ]

    if crypto_path:
        crypto = parse_crypto_list(Path(crypto_path).read_text())
    else:
        candidates = sorted(corpus_dir.glob("*.crypto"))
        crypto = (parse_crypto_list(candidates[0].read_text())
                  if candidates else CryptoSignatureList([]))

    sid = session_id or uuid.uuid4().hex[:12]
    session = Session(
        id=sid,
        path=session_root() / sid,
        corpus_path=str(corpus_path),
        pm=pm,
        models=models,
        state=MappingState(models=models, pm=pm),
        crypto_list=crypto,
        default_sources=_signature_patterns(pm, read_lines(sources_path, ".sources")),
        default_sinks=_signature_patterns(pm, read_lines(sinks_path, ".sinks")),
        created_at=time.time(),
    )
    session.iterate()
    return session


def load_session(session_id: str) -> Session:
    path = session_root() / session_id
    if not (path / "session.json").exists():
        raise SessionError(f"unknown session '{session_id}'")
    meta = json.loads((path / "session.json").read_text())
    pm = load_pm((path / "pm.json").read_bytes())
    models: dict[str, SecDfd] = {}
    for model_file in sorted((path / "models").glob(f"*{MODEL_SUFFIX}")):
        model = parse_secdfd(model_file.read_text())
        models[model.name] = model
    state, suggested = deserialize_state(
        json.loads((path / "mapping.json").read_text()), models, pm
    )
    crypto = parse_crypto_list((path / "crypto.crypto").read_text())
    return Session(
        id=meta["id"],
        path=path,
        corpus_path=meta["corpus"],
        pm=pm,
        models=models,
        state=state,
        crypto_list=crypto,
        suggested_ids=suggested,
        default_sources=set(meta.get("defaultSources", [])),
        default_sinks=set(meta.get("defaultSinks", [])),
        created_at=meta.get("createdAt", 0.0),
        updated_at=meta.get("updatedAt", 0.0),
    )


def list_sessions() -> list[str]:
    root = session_root()
    if not root.exists():
        return []
    return sorted(
        p.name for p in root.iterdir() if (p / "session.json").exists()
    )
