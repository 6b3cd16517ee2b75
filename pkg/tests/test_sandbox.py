"""Sandbox supervision: spawn, classification taxonomy, timeouts, recovery."""

import sys
import time

import pytest

from conftest import (
    BROKEN_SYNTAX,
    CRASHING_POLICY,
    INFINITE_LOOP_POLICY,
    LEFT_POLICY,
    NUMBER_POLICY,
    RUNTIME_ERROR_POLICY,
    SLEEPY_IMPORT,
    load,
)
from progsearch.errors import SandboxProtocolError, SpawnFailureError
from progsearch.sandbox import ExecStatus, SandboxConfig, spawn

GARBAGE_RUNNER = [sys.executable, "-c", "print('hello world'); import time; time.sleep(5)"]
SILENT_RUNNER = [sys.executable, "-c", "import time; time.sleep(5)"]
WRONG_VERSION_RUNNER = [
    sys.executable, "-c",
    "print('{\"type\":\"ready\",\"protocol\":99}', flush=True); import time; time.sleep(5)",
]


class TestSpawn:
    def test_conformant_runner_handshakes(self):
        handle = spawn(SandboxConfig())
        assert handle.protocol_version == 1
        handle.shutdown()

    def test_garbage_runner_is_protocol_error(self):
        with pytest.raises(SandboxProtocolError):
            spawn(SandboxConfig(runner_command=GARBAGE_RUNNER))

    def test_missing_executable_is_spawn_failure(self):
        with pytest.raises(SpawnFailureError):
            spawn(SandboxConfig(runner_command=["/nonexistent/runner"]))

    def test_version_mismatch_rejected(self):
        from progsearch.errors import ProtocolVersionMismatchError
        with pytest.raises(ProtocolVersionMismatchError):
            spawn(SandboxConfig(runner_command=WRONG_VERSION_RUNNER))

    def test_silent_runner_times_out(self):
        from progsearch.errors import HandshakeTimeoutError
        with pytest.raises(HandshakeTimeoutError):
            spawn(SandboxConfig(runner_command=SILENT_RUNNER, load_timeout_ms=400))


class TestLoad:
    def test_valid_source(self, sandbox):
        assert load(sandbox, LEFT_POLICY).ok

    def test_syntax_error_carries_diagnostic(self, sandbox):
        outcome = load(sandbox, BROKEN_SYNTAX)
        assert outcome.status is ExecStatus.SYNTAX_ERROR
        assert "SyntaxError" in outcome.diagnostic

    def test_missing_entry_fails_load(self, sandbox):
        outcome = load(sandbox, "def other():\n    pass\n")
        assert outcome.status is ExecStatus.SYNTAX_ERROR
        assert "not found" in outcome.diagnostic

    def test_sleeping_import_times_out_and_kills(self):
        handle = spawn(SandboxConfig(load_timeout_ms=600))
        started = time.monotonic()
        outcome = load(handle, SLEEPY_IMPORT)
        elapsed = time.monotonic() - started
        assert outcome.status is ExecStatus.TIMEOUT
        assert elapsed < 0.6 + 0.5 + 1.0  # timeout + grace + spawn slack
        handle.shutdown()


class TestAct:
    def test_constant_policy(self, sandbox):
        load(sandbox, LEFT_POLICY)
        outcome = sandbox.request_action({"grid": [["empty"]]}, step=0)
        assert outcome.status is ExecStatus.EXECUTABLE and outcome.value == "LEFT"

    def test_runtime_error_carries_traceback(self, sandbox):
        load(sandbox, RUNTIME_ERROR_POLICY)
        outcome = sandbox.request_action({}, step=0)
        assert outcome.status is ExecStatus.RUNTIME_ERROR
        assert "ZeroDivisionError" in outcome.detail

    def test_number_return_is_invalid_output(self, sandbox):
        load(sandbox, NUMBER_POLICY)
        outcome = sandbox.request_action({}, step=0)
        assert outcome.status is ExecStatus.INVALID_OUTPUT

    def test_infinite_loop_times_out_within_grace(self):
        handle = spawn(SandboxConfig(call_timeout_ms=500))
        load(handle, INFINITE_LOOP_POLICY)
        started = time.monotonic()
        outcome = handle.request_action({}, step=0)
        elapsed = time.monotonic() - started
        assert outcome.status is ExecStatus.TIMEOUT
        assert elapsed < 0.5 + 0.5  # killed within callTimeout + grace
        handle.shutdown()

    def test_crash_classified_and_recovered(self, sandbox):
        load(sandbox, CRASHING_POLICY)
        outcome = sandbox.request_action({}, step=0)
        assert outcome.status is ExecStatus.CRASH
        # the supervisor restarted and reloaded; the next request works
        after = sandbox.request_action({}, step=1)
        assert after.status is ExecStatus.CRASH  # same program crashes again
        assert load(sandbox, LEFT_POLICY).ok
        assert sandbox.request_action({}, step=2).value == "LEFT"


class TestArtifact:
    def test_zero_grid(self, sandbox):
        load(sandbox, "def generate(params):\n"
                      "    return [[0] * params['width'] for _ in range(params['height'])]\n",
             entry="generate")
        outcome = sandbox.request_artifact({"width": 10, "height": 10, "seed": 0})
        assert outcome.status is ExecStatus.EXECUTABLE
        assert outcome.grid == [[0] * 10 for _ in range(10)]

    def test_ragged_rows_invalid(self, sandbox):
        load(sandbox, "def generate(params):\n    return [[0, 0, 0], [0, 0]]\n",
             entry="generate")
        outcome = sandbox.request_artifact({"width": 3, "height": 2, "seed": 0})
        assert outcome.status is ExecStatus.INVALID_OUTPUT

    def test_non_binary_cells_invalid(self, sandbox):
        load(sandbox, "def generate(params):\n    return [[0, 2], [0, 0]]\n",
             entry="generate")
        outcome = sandbox.request_artifact({"width": 2, "height": 2, "seed": 0})
        assert outcome.status is ExecStatus.INVALID_OUTPUT

    def test_generator_loop_times_out(self):
        handle = spawn(SandboxConfig(call_timeout_ms=500))
        load(handle, "def generate(params):\n    while True:\n        pass\n",
             entry="generate")
        outcome = handle.request_artifact({"width": 4, "height": 4, "seed": 0})
        assert outcome.status is ExecStatus.TIMEOUT
        handle.shutdown()


class TestShutdown:
    def test_normal_session_exits_zero(self):
        handle = spawn(SandboxConfig())
        load(handle, LEFT_POLICY)
        handle.shutdown()
        assert handle.exit_code == 0

    def test_no_zombie_after_timeout_kill(self):
        handle = spawn(SandboxConfig(call_timeout_ms=400))
        load(handle, INFINITE_LOOP_POLICY)
        handle.request_action({}, step=0)
        handle.shutdown()
        assert handle.exit_code is not None  # reaped

    def test_double_shutdown_is_noop(self):
        handle = spawn(SandboxConfig())
        handle.shutdown()
        handle.shutdown()


def test_every_request_is_classified(sandbox):
    load(sandbox, LEFT_POLICY)
    sandbox.request_action({}, 0)
    load(sandbox, BROKEN_SYNTAX)
    sandbox.request_action({}, 1)
    kinds = [k for k, _ in sandbox.request_log]
    assert len(sandbox.request_log) >= 4
    assert all(status in {s.value for s in ExecStatus} for _, status in sandbox.request_log)
    assert kinds.count("load") >= 2 and kinds.count("act") >= 2
