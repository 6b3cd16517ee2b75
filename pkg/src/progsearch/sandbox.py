"""Supervision of the runner child process over the line-delimited protocol.

The harness owns all timing: every request carries a wall-clock budget, and a
child that blows it is killed (grace period 500 ms) and the request comes
back classified as Timeout. A crashed child is respawned and the current
program reloaded, at most `max_restart_attempts` times per load, so one bad
candidate can never wedge a trial.

Wire protocol, version 1 (one JSON object per line, UTF-8, child stdio):

    runner -> harness   {"type":"ready","protocol":1}
    harness -> runner   {"type":"load","program_id":"<hex sha-256>","source":"...","entry":"<name>"}
    runner -> harness   {"type":"loaded","ok":true} | {"type":"loaded","ok":false,"error":"..."}
    harness -> runner   {"type":"act","step":N,"state":{...}}
    runner -> harness   {"type":"action","value":"TOKEN"} | {"type":"error","stage":"runtime","trace":"..."}
    harness -> runner   {"type":"generate","params":{"width":W,"height":H,"seed":S}}
    runner -> harness   {"type":"artifact","grid":[[0,1,...],...]}
    harness -> runner   {"type":"shutdown"}

Anything else coming back is a protocol error. The child's stderr is drained
to a bounded buffer for diagnostics and never parsed.
"""

from __future__ import annotations

import atexit
import json
import queue
import subprocess
import sys
import threading
import weakref
from dataclasses import dataclass, field
from enum import Enum

from .errors import (
    HandshakeTimeoutError,
    ProtocolVersionMismatchError,
    SandboxProtocolError,
    SpawnFailureError,
)

PROTOCOL_VERSION = 1
KILL_GRACE_S = 0.5


class ExecStatus(Enum):
    EXECUTABLE = "Executable"
    SYNTAX_ERROR = "SyntaxError"
    RUNTIME_ERROR = "RuntimeError"
    INVALID_OUTPUT = "InvalidOutput"
    TIMEOUT = "Timeout"
    CRASH = "Crash"
    PROTOCOL_ERROR = "ProtocolError"


def default_runner_command() -> list[str]:
    return [sys.executable, "-m", "progsearch.stubrunner"]


@dataclass
class SandboxConfig:
    runner_command: list[str] = field(default_factory=default_runner_command)
    load_timeout_ms: int = 10_000
    call_timeout_ms: int = 2_000
    max_restart_attempts: int = 1

    def __post_init__(self):
        if self.load_timeout_ms <= 0 or self.call_timeout_ms <= 0:
            raise ValueError("timeouts must be positive")


@dataclass
class LoadOutcome:
    status: ExecStatus  # EXECUTABLE (loaded ok) or a failure classification
    diagnostic: str = ""

    @property
    def ok(self) -> bool:
        return self.status is ExecStatus.EXECUTABLE


@dataclass
class ActionOutcome:
    status: ExecStatus
    value: str | None = None
    detail: str = ""


@dataclass
class ArtifactOutcome:
    status: ExecStatus
    grid: list[list[int]] | None = None
    detail: str = ""


_LIVE_HANDLES: "weakref.WeakSet[SandboxHandle]" = weakref.WeakSet()


def _cleanup_orphans() -> None:
    for handle in list(_LIVE_HANDLES):
        try:
            handle.shutdown()
        except Exception:
            pass


atexit.register(_cleanup_orphans)


class SandboxHandle:
    """Single-owner supervisor for one runner process."""

    def __init__(self, config: SandboxConfig):
        self.config = config
        self.protocol_version: int | None = None
        self.request_log: list[tuple[str, str]] = []
        self.stderr_tail: list[str] = []
        self._proc: subprocess.Popen | None = None
        self._lines: queue.Queue | None = None
        # last successfully loaded program; never a source whose load failed,
        # so a respawn cannot re-trigger a load-time hang
        self._last_good_load: tuple[str, str, str] | None = None
        self._restarts_since_load = 0
        self._closed = False
        self._spawn()
        _LIVE_HANDLES.add(self)

    # -- process lifecycle ------------------------------------------------

    def _spawn(self) -> None:
        try:
            self._proc = subprocess.Popen(
                self.config.runner_command,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=subprocess.PIPE,
                text=True,
                encoding="utf-8",
                bufsize=1,
            )
        except OSError as e:
            raise SpawnFailureError(f"cannot start runner {self.config.runner_command}: {e}") from e
        self._lines = queue.Queue()
        threading.Thread(target=self._read_stdout, args=(self._proc, self._lines),
                         daemon=True).start()
        threading.Thread(target=self._read_stderr, args=(self._proc,),
                         daemon=True).start()
        line = self._next_line(self.config.load_timeout_ms)
        if line is None:
            self._kill()
            raise HandshakeTimeoutError("runner sent no ready message")
        try:
            msg = json.loads(line)
        except json.JSONDecodeError:
            self._kill()
            raise SandboxProtocolError(f"handshake is not JSON: {line[:200]!r}") from None
        if not isinstance(msg, dict) or msg.get("type") != "ready":
            self._kill()
            raise SandboxProtocolError(f"expected ready message, got {line[:200]!r}")
        if msg.get("protocol") != PROTOCOL_VERSION:
            self._kill()
            raise ProtocolVersionMismatchError(f"runner protocol {msg.get('protocol')!r}")
        self.protocol_version = PROTOCOL_VERSION

    @staticmethod
    def _read_stdout(proc: subprocess.Popen, sink: queue.Queue) -> None:
        try:
            for line in proc.stdout:
                sink.put(("line", line))
        except ValueError:
            pass  # pipe closed under us during shutdown
        sink.put(("eof", None))

    def _read_stderr(self, proc: subprocess.Popen) -> None:
        try:
            for line in proc.stderr:
                self.stderr_tail.append(line.rstrip("\n"))
                del self.stderr_tail[:-200]
        except ValueError:
            pass

    def _next_line(self, timeout_ms: int) -> str | None:
        """One stdout line, or None on timeout/EOF ('' means EOF)."""
        try:
            kind, payload = self._lines.get(timeout=timeout_ms / 1000.0)
        except queue.Empty:
            return None
        if kind == "eof":
            return ""
        return payload

    def alive(self) -> bool:
        return self._proc is not None and self._proc.poll() is None

    def _kill(self) -> None:
        proc = self._proc
        if proc is None:
            return
        if proc.poll() is None:
            proc.terminate()
            try:
                proc.wait(timeout=KILL_GRACE_S)
            except subprocess.TimeoutExpired:
                proc.kill()
                proc.wait()
        else:
            proc.wait()
        for stream in (proc.stdin, proc.stdout, proc.stderr):
            if stream:
                try:
                    stream.close()
                except OSError:
                    pass

    def _respawn_and_reload(self) -> bool:
        """Fresh process plus reload of the last program; False if that fails."""
        self._kill()
        try:
            self._spawn()
        except (SpawnFailureError, HandshakeTimeoutError, SandboxProtocolError,
                ProtocolVersionMismatchError):
            return False
        if self._last_good_load is not None:
            program_id, source, entry = self._last_good_load
            outcome = self._do_load(program_id, source, entry)
            return outcome.ok
        return True

    def _after_death(self) -> None:
        if self._restarts_since_load < self.config.max_restart_attempts:
            self._restarts_since_load += 1
            self._respawn_and_reload()

    # -- request plumbing --------------------------------------------------

    def _request(self, message: dict, timeout_ms: int) -> tuple[ExecStatus, dict | None, str]:
        """Send one message, classify exactly one reply."""
        if not self.alive():
            return ExecStatus.CRASH, None, "runner process is not alive"
        try:
            self._proc.stdin.write(json.dumps(message, separators=(",", ":")) + "\n")
            self._proc.stdin.flush()
        except (BrokenPipeError, OSError):
            self._kill()
            return ExecStatus.CRASH, None, "runner pipe closed"
        line = self._next_line(timeout_ms)
        if line is None:
            self._kill()
            return ExecStatus.TIMEOUT, None, f"no reply within {timeout_ms} ms"
        if line == "":
            self._kill()
            return ExecStatus.CRASH, None, self._crash_detail()
        try:
            msg = json.loads(line)
        except json.JSONDecodeError:
            return ExecStatus.PROTOCOL_ERROR, None, f"unparseable reply: {line[:200]!r}"
        if not isinstance(msg, dict) or "type" not in msg:
            return ExecStatus.PROTOCOL_ERROR, None, f"malformed reply: {line[:200]!r}"
        return ExecStatus.EXECUTABLE, msg, ""

    def _crash_detail(self) -> str:
        code = self._proc.poll() if self._proc else None
        tail = "\n".join(self.stderr_tail[-5:])
        return f"runner exited with code {code}" + (f"; stderr: {tail}" if tail else "")

    def _classified(self, request_type: str, status: ExecStatus):
        self.request_log.append((request_type, status.value))
        return status

    # -- operations ---------------------------------------------------------

    def load_program(self, source: str, program_id: str, entry: str = "policy") -> LoadOutcome:
        """Install a candidate; failure diagnostics come back verbatim."""
        if not self.alive():
            self._kill()
            try:
                self._spawn()
            except (SpawnFailureError, HandshakeTimeoutError, SandboxProtocolError,
                    ProtocolVersionMismatchError) as e:
                self.request_log.append(("load", ExecStatus.CRASH.value))
                return LoadOutcome(ExecStatus.CRASH, f"respawn failed: {e}")
        self._restarts_since_load = 0
        return self._do_load(program_id, source, entry)

    def _do_load(self, program_id: str, source: str, entry: str) -> LoadOutcome:
        status, msg, detail = self._request(
            {"type": "load", "program_id": program_id, "source": source, "entry": entry},
            self.config.load_timeout_ms,
        )
        if status is not ExecStatus.EXECUTABLE:
            if status in (ExecStatus.TIMEOUT, ExecStatus.CRASH):
                self._after_death()
            self._classified("load", status)
            return LoadOutcome(status, detail)
        if msg.get("type") != "loaded":
            self._classified("load", ExecStatus.PROTOCOL_ERROR)
            return LoadOutcome(ExecStatus.PROTOCOL_ERROR, f"unexpected reply type {msg.get('type')!r}")
        if msg.get("ok") is True:
            self._last_good_load = (program_id, source, entry)
            self._classified("load", ExecStatus.EXECUTABLE)
            return LoadOutcome(ExecStatus.EXECUTABLE)
        self._classified("load", ExecStatus.SYNTAX_ERROR)
        return LoadOutcome(ExecStatus.SYNTAX_ERROR, str(msg.get("error", "")))

    def request_action(self, state: dict, step: int) -> ActionOutcome:
        status, msg, detail = self._request(
            {"type": "act", "step": step, "state": state},
            self.config.call_timeout_ms,
        )
        if status is not ExecStatus.EXECUTABLE:
            if status in (ExecStatus.TIMEOUT, ExecStatus.CRASH):
                self._after_death()
            self._classified("act", status)
            return ActionOutcome(status, detail=detail)
        kind = msg.get("type")
        if kind == "action":
            value = msg.get("value")
            if not isinstance(value, str):
                self._classified("act", ExecStatus.INVALID_OUTPUT)
                return ActionOutcome(ExecStatus.INVALID_OUTPUT,
                                     detail=f"action value {value!r} is not text")
            self._classified("act", ExecStatus.EXECUTABLE)
            return ActionOutcome(ExecStatus.EXECUTABLE, value=value)
        if kind == "error":
            if msg.get("stage") == "runtime":
                self._classified("act", ExecStatus.RUNTIME_ERROR)
                return ActionOutcome(ExecStatus.RUNTIME_ERROR, detail=str(msg.get("trace", "")))
            self._classified("act", ExecStatus.PROTOCOL_ERROR)
            return ActionOutcome(ExecStatus.PROTOCOL_ERROR, detail=str(msg.get("trace", "")))
        self._classified("act", ExecStatus.PROTOCOL_ERROR)
        return ActionOutcome(ExecStatus.PROTOCOL_ERROR, detail=f"unknown reply type {kind!r}")

    def request_artifact(self, params: dict) -> ArtifactOutcome:
        status, msg, detail = self._request(
            {"type": "generate", "params": params},
            self.config.call_timeout_ms,
        )
        if status is not ExecStatus.EXECUTABLE:
            if status in (ExecStatus.TIMEOUT, ExecStatus.CRASH):
                self._after_death()
            self._classified("generate", status)
            return ArtifactOutcome(status, detail=detail)
        kind = msg.get("type")
        if kind == "artifact":
            grid, problem = _validate_grid(msg.get("grid"))
            if problem:
                self._classified("generate", ExecStatus.INVALID_OUTPUT)
                return ArtifactOutcome(ExecStatus.INVALID_OUTPUT, detail=problem)
            self._classified("generate", ExecStatus.EXECUTABLE)
            return ArtifactOutcome(ExecStatus.EXECUTABLE, grid=grid)
        if kind == "error":
            if msg.get("stage") == "runtime":
                self._classified("generate", ExecStatus.RUNTIME_ERROR)
                return ArtifactOutcome(ExecStatus.RUNTIME_ERROR, detail=str(msg.get("trace", "")))
            self._classified("generate", ExecStatus.PROTOCOL_ERROR)
            return ArtifactOutcome(ExecStatus.PROTOCOL_ERROR, detail=str(msg.get("trace", "")))
        self._classified("generate", ExecStatus.PROTOCOL_ERROR)
        return ArtifactOutcome(ExecStatus.PROTOCOL_ERROR, detail=f"unknown reply type {kind!r}")

    def shutdown(self) -> None:
        """Polite shutdown, then the kill path; safe to call twice."""
        if self._closed:
            return
        self._closed = True
        proc = self._proc
        if proc is not None and proc.poll() is None:
            try:
                proc.stdin.write('{"type":"shutdown"}\n')
                proc.stdin.flush()
            except (BrokenPipeError, OSError):
                pass
            try:
                proc.wait(timeout=1.0)
            except subprocess.TimeoutExpired:
                pass
        self._kill()
        _LIVE_HANDLES.discard(self)

    @property
    def exit_code(self) -> int | None:
        return self._proc.poll() if self._proc else None


def _validate_grid(grid) -> tuple[list[list[int]] | None, str]:
    if not isinstance(grid, list) or not grid or not all(isinstance(r, list) for r in grid):
        return None, "artifact grid is not a list of rows"
    width = len(grid[0])
    if width == 0:
        return None, "artifact grid has empty rows"
    out: list[list[int]] = []
    for row in grid:
        if len(row) != width:
            return None, "artifact grid has ragged rows"
        clean = []
        for v in row:
            if isinstance(v, bool):
                v = int(v)
            if not isinstance(v, int) or v not in (0, 1):
                return None, f"artifact cell {v!r} is not 0/1"
            clean.append(v)
        out.append(clean)
    return out, ""


def spawn(config: SandboxConfig | None = None) -> SandboxHandle:
    """Start a runner process and complete the ready handshake."""
    return SandboxHandle(config or SandboxConfig())
