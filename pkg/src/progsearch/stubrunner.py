"""Minimal protocol-v1 runner used for tests and as the default child.

This is a deliberately small stand-in for the production policy runner: it
loads candidate source with exec() into a fresh namespace, answers act and
generate requests, and reports structured errors. Candidate print output is
pushed to stderr so stdout stays protocol-only.
"""

from __future__ import annotations

import contextlib
import json
import sys
import traceback


def _send(obj: dict) -> None:
    sys.stdout.write(json.dumps(obj, separators=(",", ":")) + "\n")
    sys.stdout.flush()


def main() -> int:
    _send({"type": "ready", "protocol": 1})
    namespace: dict = {}
    entry = None
    for line in sys.stdin:
        line = line.strip()
        if not line:
            continue
        try:
            msg = json.loads(line)
        except json.JSONDecodeError:
            _send({"type": "error", "stage": "protocol", "trace": "unparseable request"})
            continue
        kind = msg.get("type")
        if kind == "shutdown":
            break
        if kind == "load":
            namespace = {}
            entry = None
            try:
                with contextlib.redirect_stdout(sys.stderr):
                    exec(compile(msg.get("source", ""), "<candidate>", "exec"), namespace)
                entry = namespace.get(msg.get("entry", "policy"))
                if not callable(entry):
                    _send({"type": "loaded", "ok": False,
                           "error": f"entry {msg.get('entry')!r} not found"})
                    entry = None
                else:
                    _send({"type": "loaded", "ok": True})
            except BaseException:
                _send({"type": "loaded", "ok": False, "error": traceback.format_exc(limit=3)})
        elif kind in ("act", "generate"):
            if entry is None:
                _send({"type": "error", "stage": "protocol", "trace": "no program loaded"})
                continue
            arg = msg.get("state") if kind == "act" else msg.get("params")
            try:
                with contextlib.redirect_stdout(sys.stderr):
                    result = entry(arg)
            except BaseException:
                _send({"type": "error", "stage": "runtime",
                       "trace": traceback.format_exc(limit=5)})
                continue
            reply = ({"type": "action", "value": result} if kind == "act"
                     else {"type": "artifact", "grid": result})
            try:
                _send(reply)
            except (TypeError, ValueError):
                _send({"type": "error", "stage": "protocol",
                       "trace": "result is not JSON-serializable"})
        else:
            _send({"type": "error", "stage": "protocol", "trace": f"unknown type {kind!r}"})
    return 0


if __name__ == "__main__":
    sys.exit(main())
