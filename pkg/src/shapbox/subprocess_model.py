"""Batch-prediction adapter speaking newline-delimited JSON to a child process.

Protocol (UTF-8, one JSON document per line):

    request  {"id": 1, "rows": [[3.0, 4.0], ...]}
    response {"id": 1, "preds": [2.5, ...]}

The child must answer requests in order.  One child serves many batches; a
lock keeps a single batch in flight at a time, so callers wanting parallelism
spawn multiple adapters.
"""

from __future__ import annotations

import json
import queue
import shlex
import subprocess
import threading

import numpy as np

from .errors import SubprocessAdapterError

_EOF = object()


def encode_request(request_id: int, rows) -> str:
    """Canonical wire encoding for one batch request (without the newline)."""
    payload = {
        "id": request_id,
        "rows": [[float(v) for v in row] for row in rows],
    }
    return json.dumps(payload, separators=(",", ":"))


class SubprocessModel:
    """Runs ``command`` once and marshals prediction batches over its pipes."""

    def __init__(self, command: str, timeout: float = 10.0):
        self.command = command
        self.timeout = timeout
        self.n_features = None  # unknown; the child owns its own contract
        try:
            self._proc = subprocess.Popen(
                shlex.split(command),
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                text=True,
                encoding="utf-8",
                bufsize=1,
            )
        except OSError as exc:
            raise SubprocessAdapterError(f"failed to launch {command!r}: {exc}") from exc
        self._lock = threading.Lock()
        self._lines: queue.Queue = queue.Queue()
        self._next_id = 0
        reader = threading.Thread(target=self._pump, daemon=True)
        reader.start()

    def _pump(self):
        for line in self._proc.stdout:
            self._lines.put(line)
        self._lines.put(_EOF)

    def __call__(self, rows) -> np.ndarray:
        rows = np.asarray(rows, dtype=float)
        with self._lock:
            self._next_id += 1
            request_id = self._next_id
            try:
                self._proc.stdin.write(encode_request(request_id, rows) + "\n")
                self._proc.stdin.flush()
            except (BrokenPipeError, OSError) as exc:
                raise SubprocessAdapterError(
                    f"broken pipe writing to child ({exc})"
                ) from exc
            try:
                line = self._lines.get(timeout=self.timeout)
            except queue.Empty:
                raise SubprocessAdapterError(
                    f"child did not respond within {self.timeout}s (request id {request_id})"
                ) from None
            if line is _EOF:
                raise SubprocessAdapterError(
                    f"child exited before answering request id {request_id}"
                )
        try:
            doc = json.loads(line)
        except json.JSONDecodeError as exc:
            raise SubprocessAdapterError(f"unparseable response line: {exc}") from exc
        if not isinstance(doc, dict) or doc.get("id") != request_id:
            raise SubprocessAdapterError(
                f"response id {doc.get('id') if isinstance(doc, dict) else None} "
                f"does not match request id {request_id}"
            )
        preds = doc.get("preds")
        if not isinstance(preds, list) or len(preds) != rows.shape[0]:
            raise SubprocessAdapterError(
                f"expected {rows.shape[0]} predictions, got "
                f"{len(preds) if isinstance(preds, list) else preds!r}"
            )
        for i, p in enumerate(preds):
            if not isinstance(p, (int, float)) or isinstance(p, bool):
                raise SubprocessAdapterError(f"non-numeric prediction at index {i}: {p!r}")
        out = np.asarray(preds, dtype=float)
        if not np.all(np.isfinite(out)):
            raise SubprocessAdapterError("child returned non-finite predictions")
        return out

    def close(self):
        if self._proc.poll() is None:
            try:
                self._proc.stdin.close()
            except OSError:
                pass
            try:
                self._proc.wait(timeout=2.0)
            except subprocess.TimeoutExpired:
                self._proc.kill()
                self._proc.wait()

    def __enter__(self):
        return self

    def __exit__(self, *exc_info):
        self.close()
