"""Session management, CLI, and HTTP API."""

from .session import (
    Session,
    SessionError,
    canonical_dumps,
    create_session,
    list_sessions,
    load_corpus,
    load_session,
    session_root,
)

__all__ = [
    "Session",
    "SessionError",
    "canonical_dumps",
    "create_session",
    "list_sessions",
    "load_corpus",
    "load_session",
    "session_root",
]
