"""Candidate-program runner speaking the line-delimited protocol, version 1."""

from .server import (
    CANDIDATE_FILE,
    PROTOCOL_VERSION,
    LoadedProgram,
    execute_entry,
    format_trace,
    load_program,
    serve,
)

__version__ = "0.1.0"

__all__ = [
    "CANDIDATE_FILE",
    "PROTOCOL_VERSION",
    "LoadedProgram",
    "execute_entry",
    "format_trace",
    "load_program",
    "serve",
]
