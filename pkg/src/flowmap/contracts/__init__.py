"""Contract verification: crypto rules, implemented-flow matching, injection."""

from .checker import (
    CheckResult,
    ComplianceViolation,
    IFlow,
    ViolationKind,
    check_all,
    check_crypto,
    check_processing_contracts,
    extract_iflows,
    find_biunique,
    render_contract,
)
from .cryptolist import (
    CryptoCapability,
    CryptoEntry,
    CryptoListError,
    CryptoSignatureList,
    parse_crypto_list,
    print_crypto_list,
)
from .injection import enumerate_injectable_contracts, run_injection_experiment

__all__ = [
    "CheckResult",
    "ComplianceViolation",
    "CryptoCapability",
    "CryptoEntry",
    "CryptoListError",
    "CryptoSignatureList",
    "IFlow",
    "ViolationKind",
    "check_all",
    "check_crypto",
    "check_processing_contracts",
    "enumerate_injectable_contracts",
    "extract_iflows",
    "find_biunique",
    "parse_crypto_list",
    "print_crypto_list",
    "render_contract",
]
