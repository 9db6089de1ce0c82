"""Design-guided taint analysis."""

from .derive import (
    AssetTaintSpec,
    TaintConfig,
    TaintMode,
    build_config,
    derive_allowed_sinks,
    derive_sources,
    derive_zone_sinks,
)
from .engine import ALARM_CAP, TaintAlarm, compare_configs, run_taint

__all__ = [
    "ALARM_CAP",
    "AssetTaintSpec",
    "TaintAlarm",
    "TaintConfig",
    "TaintMode",
    "build_config",
    "compare_configs",
    "derive_allowed_sinks",
    "derive_sources",
    "derive_zone_sinks",
    "run_taint",
]
