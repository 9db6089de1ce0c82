"""Parsing and matching of the known cryptographic signature list."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fnmatch import fnmatchcase


class CryptoCapability(Enum):
    ENCRYPT = "enc"
    DECRYPT = "dec"
    BOTH = "both"

    def covers(self, other: "CryptoCapability") -> bool:
        return self is CryptoCapability.BOTH or self is other


class CryptoListError(ValueError):
    pass


@dataclass(frozen=True)
class CryptoEntry:
    capability: CryptoCapability
    pattern: str  # glob over "Type.method(P1,P2):R"

    def matches(self, rendered_signature: str) -> bool:
        return fnmatchcase(rendered_signature, self.pattern)


@dataclass
class CryptoSignatureList:
    entries: list[CryptoEntry]

    def add(self, capability: CryptoCapability, pattern: str) -> None:
        entry = CryptoEntry(capability, pattern)
        if entry not in self.entries:
            self.entries.append(entry)

    def capable(self, rendered_signature: str, capability: CryptoCapability) -> bool:
        return any(
            e.capability.covers(capability) and e.matches(rendered_signature)
            for e in self.entries
        )


def parse_crypto_list(text: str) -> CryptoSignatureList:
    """One `capability<TAB>pattern` per line; # comments and blanks skipped."""
    entries: list[CryptoEntry] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        cap_str, sep, pattern = line.partition("\t")
        if not sep or not pattern.strip():
            raise CryptoListError(f"line {lineno}: expected 'capability<TAB>pattern'")
        try:
            cap = CryptoCapability(cap_str.strip())
        except ValueError:
            raise CryptoListError(
                f"line {lineno}: unknown capability '{cap_str.strip()}'"
            ) from None
        entries.append(CryptoEntry(cap, pattern.strip()))
    return CryptoSignatureList(entries)


def print_crypto_list(clist: CryptoSignatureList) -> str:
    return "".join(f"{e.capability.value}\t{e.pattern}\n" for e in clist.entries)
