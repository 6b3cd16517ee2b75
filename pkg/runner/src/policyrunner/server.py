"""Protocol-v1 runner: loads candidate source, serves act/generate requests.

The runner owns no timing; the supervising harness kills it on timeout. Its
contract is strict stdout discipline (protocol lines only; candidate print
output goes to stderr), structured diagnostics with a stable format, and a
fresh namespace per load so candidates cannot observe each other.

Wire protocol (one JSON object per line over stdio):

    out  {"type":"ready","protocol":1}
    in   {"type":"load","program_id":...,"source":...,"entry":...}
    out  {"type":"loaded","ok":true} | {"type":"loaded","ok":false,"error":...}
    in   {"type":"act","step":N,"state":...}
    out  {"type":"action","value":...} | {"type":"error","stage":"runtime","trace":...}
    in   {"type":"generate","params":...}
    out  {"type":"artifact","grid":...} | {"type":"error","stage":"runtime","trace":...}
    in   {"type":"shutdown"}

Anything unparseable or unknown is answered with a protocol-stage error and
the loop continues.
"""

from __future__ import annotations

import contextlib
import json
import sys

PROTOCOL_VERSION = 1
CANDIDATE_FILE = "<candidate>"


class LoadedProgram:
    """One loaded candidate: an isolated namespace plus its entry callable."""

    def __init__(self, program_id: str, entry_name: str, namespace: dict, entry):
        self.program_id = program_id
        self.entry_name = entry_name
        self.namespace = namespace
        self.entry = entry


def format_trace(exc: BaseException) -> str:
    """Stable traceback rendering: candidate frames only, then the exception.

    Deliberately avoids traceback.format_exc so the text is byte-stable
    across interpreter versions (no source-caret lines, no absolute paths).
    """
    lines = []
    tb = exc.__traceback__
    while tb is not None:
        code = tb.tb_frame.f_code
        if code.co_filename == CANDIDATE_FILE:
            lines.append(f"  line {tb.tb_lineno}, in {code.co_name}")
        tb = tb.tb_next
    lines.append(f"{type(exc).__name__}: {exc}")
    return "\n".join(lines)


def load_program(program_id: str, source: str, entry_name: str):
    """Execute the source in a fresh namespace and resolve the entry.

    Returns (LoadedProgram, None) or (None, diagnostic). The previous
    program's namespace is untouched and simply dropped by the caller, so a
    global set by one candidate is invisible to the next.
    """
    namespace: dict = {"__name__": "__candidate__"}
    try:
        code = compile(source, CANDIDATE_FILE, "exec")
    except SyntaxError as e:
        return None, f"SyntaxError: {e.msg} (line {e.lineno})"
    try:
        with contextlib.redirect_stdout(sys.stderr):
            exec(code, namespace)
    except BaseException as e:
        return None, format_trace(e)
    entry = namespace.get(entry_name)
    if not callable(entry):
        return None, f"entry {entry_name!r} not found"
    return LoadedProgram(program_id, entry_name, namespace, entry), None


def execute_entry(program: LoadedProgram, payload):
    """Call the entry with the decoded payload; the raw return value goes
    back for the harness to validate. Returns (value, trace|None)."""
    try:
        with contextlib.redirect_stdout(sys.stderr):
            return program.entry(payload), None
    except BaseException as e:
        return None, format_trace(e)


class _Emitter:
    def __init__(self, stream):
        self.stream = stream

    def send(self, obj: dict) -> None:
        self.stream.write(json.dumps(obj, separators=(",", ":")) + "\n")
        self.stream.flush()

    def error(self, stage: str, trace: str) -> None:
        self.send({"type": "error", "stage": stage, "trace": trace})


def serve(stdin=None, stdout=None) -> int:
    """Process messages until shutdown or EOF; always exits 0."""
    stdin = stdin if stdin is not None else sys.stdin
    out = _Emitter(stdout if stdout is not None else sys.stdout)
    out.send({"type": "ready", "protocol": PROTOCOL_VERSION})
    program: LoadedProgram | None = None
    for raw in stdin:
        line = raw.strip()
        if not line:
            continue
        try:
            msg = json.loads(line)
        except json.JSONDecodeError:
            out.error("protocol", "unparseable request")
            continue
        if not isinstance(msg, dict):
            out.error("protocol", "request is not an object")
            continue
        kind = msg.get("type")
        if kind == "shutdown":
            break
        elif kind == "load":
            program, diagnostic = load_program(
                str(msg.get("program_id", "")),
                str(msg.get("source", "")),
                str(msg.get("entry", "policy")),
            )
            if program is None:
                out.send({"type": "loaded", "ok": False, "error": diagnostic})
            else:
                out.send({"type": "loaded", "ok": True})
        elif kind in ("act", "generate"):
            if program is None:
                out.error("protocol", "no program loaded")
                continue
            payload = msg.get("state") if kind == "act" else msg.get("params")
            value, trace = execute_entry(program, payload)
            if trace is not None:
                out.error("runtime", trace)
                continue
            reply = ({"type": "action", "value": value} if kind == "act"
                     else {"type": "artifact", "grid": value})
            try:
                out.send(reply)
            except (TypeError, ValueError):
                out.error("protocol", "result is not JSON-serializable")
        else:
            out.error("protocol", f"unknown type {kind!r}")
    return 0


def main() -> int:
    return serve()
