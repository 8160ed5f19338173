"""Client for external taggers speaking the line-oriented JSON protocol (v1)."""

from __future__ import annotations

import json
import os
import select
import shlex
import subprocess
import time
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import requests

from .errors import ProtocolError, RemoteError, Timeout, TransportError
from .types import Label, Separator, Task, Token, label_set_for

PROTOCOL_VERSION = 1


class Transport(Enum):
    CHILD_PROCESS_STDIO = "stdio"
    HTTP_URL = "http"


@dataclass(frozen=True, slots=True)
class RemoteEndpoint:
    transport: Transport
    address: str  # command line (stdio) or base URL (http)
    timeout_ms: int = 30000
    max_inflight: int = 1

    def __post_init__(self) -> None:
        if self.timeout_ms <= 0:
            raise ValueError("timeout_ms must be positive")
        if self.max_inflight < 1:
            raise ValueError("max_inflight must be positive")


def endpoint_for(address: str, timeout_ms: int = 30000) -> RemoteEndpoint:
    """Build an endpoint from a CLI-style spec: a URL or a command line."""
    transport = (
        Transport.HTTP_URL
        if address.startswith(("http://", "https://"))
        else Transport.CHILD_PROCESS_STDIO
    )
    return RemoteEndpoint(transport, address, timeout_ms)


@dataclass(frozen=True, slots=True)
class ServerInfo:
    name: str
    tasks: tuple[Task, ...]
    protocol_version: int


def _parse_hello(obj: object) -> ServerInfo:
    if not isinstance(obj, dict):
        raise ProtocolError("hello is not an object")
    proto = obj.get("proto")
    if proto != PROTOCOL_VERSION:
        raise ProtocolError(f"unsupported protocol version {proto!r}")
    name = obj.get("name")
    if not isinstance(name, str):
        raise ProtocolError("hello has no server name")
    raw_tasks = obj.get("tasks")
    if not isinstance(raw_tasks, list):
        raise ProtocolError("hello has no task list")
    try:
        tasks = tuple(Task.from_wire(t) for t in raw_tasks)
    except ValueError as exc:
        raise ProtocolError(str(exc)) from None
    return ServerInfo(name, tasks, proto)


def _parse_response(obj: object, req_id: int, task: Task, n_tokens: int) -> list[Label]:
    if not isinstance(obj, dict):
        raise ProtocolError("response is not an object")
    if obj.get("id") != req_id:
        raise ProtocolError(f"id mismatch: sent {req_id}, got {obj.get('id')!r}")
    if "error" in obj:
        raise RemoteError(str(obj["error"]))
    labels = obj.get("labels")
    if not isinstance(labels, list):
        raise ProtocolError("response has no label list")
    if len(labels) != n_tokens:
        raise ProtocolError(f"length mismatch: sent {n_tokens} tokens, got {len(labels)} labels")
    label_set = label_set_for(task)
    out: list[Label] = []
    for value in labels:
        if value not in label_set:
            raise ProtocolError(f"unknown class value {value!r} for task {task.value}")
        out.append(Label(task, value))
    return out


class RemoteTagger:
    """One protocol-v1 connection; requests go out one at a time, ids increasing.

    A connection belongs to one logical requester; pipeline workers wanting
    parallelism each open their own.
    """

    def __init__(self, endpoint: RemoteEndpoint, task: Task | None = None) -> None:
        self.endpoint = endpoint
        self.task = task
        self._proc: subprocess.Popen | None = None
        self._buf = b""
        self._next_id = 1
        self._hello: ServerInfo | None = None

    # -- stdio transport --

    def _deadline(self) -> float:
        return time.monotonic() + self.endpoint.timeout_ms / 1000.0

    def _ensure_proc(self) -> subprocess.Popen:
        if self._proc is None:
            try:
                self._proc = subprocess.Popen(
                    shlex.split(self.endpoint.address),
                    stdin=subprocess.PIPE,
                    stdout=subprocess.PIPE,
                )
            except OSError as exc:
                raise TransportError(f"cannot launch {self.endpoint.address!r}: {exc}") from None
            hello_line = self._read_line(self._deadline())
            self._hello = _parse_hello(_loads(hello_line, "hello"))
        return self._proc

    def _read_line(self, deadline: float) -> str:
        proc = self._proc
        assert proc is not None and proc.stdout is not None
        fd = proc.stdout.fileno()
        while b"\n" not in self._buf:
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                raise Timeout(f"no response within {self.endpoint.timeout_ms} ms")
            ready, _, _ = select.select([fd], [], [], remaining)
            if not ready:
                raise Timeout(f"no response within {self.endpoint.timeout_ms} ms")
            chunk = os.read(fd, 65536)
            if not chunk:
                raise TransportError("server closed the connection")
            self._buf += chunk
        line, _, self._buf = self._buf.partition(b"\n")
        return line.decode("utf-8", errors="replace")

    def _write_line(self, obj: dict) -> None:
        proc = self._ensure_proc()
        assert proc.stdin is not None
        try:
            proc.stdin.write((json.dumps(obj, ensure_ascii=False) + "\n").encode("utf-8"))
            proc.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            raise TransportError(f"server pipe broke: {exc}") from None

    # -- http transport --

    def _http(self, method: str, path: str, body: dict | None = None) -> object:
        url = self.endpoint.address.rstrip("/") + path
        timeout_s = self.endpoint.timeout_ms / 1000.0
        try:
            if method == "GET":
                resp = requests.get(url, timeout=timeout_s)
            else:
                resp = requests.post(url, json=body, timeout=timeout_s)
        except requests.Timeout:
            raise Timeout(f"no response within {self.endpoint.timeout_ms} ms") from None
        except requests.RequestException as exc:
            raise TransportError(str(exc)) from None
        try:
            obj = resp.json()
        except ValueError:
            raise ProtocolError(f"non-JSON response (HTTP {resp.status_code})") from None
        if resp.status_code != 200 and not (isinstance(obj, dict) and "error" in obj):
            raise TransportError(f"HTTP {resp.status_code}")
        return obj

    # -- public surface --

    def healthcheck(self) -> ServerInfo:
        if self.endpoint.transport is Transport.HTTP_URL:
            return _parse_hello(self._http("GET", "/v1/health"))
        self._ensure_proc()
        assert self._hello is not None
        return self._hello

    def tag(self, task: Task, tokens: Sequence[Token]) -> list[Label]:
        if not tokens:
            raise ValueError("tokens must be non-empty")
        req_id = self._next_id
        self._next_id += 1
        request = {
            "id": req_id,
            "task": task.value,
            "tokens": [t.surface for t in tokens],
            "seps": [t.sep_after.value for t in tokens],
        }
        if self.endpoint.transport is Transport.HTTP_URL:
            obj = self._http("POST", "/v1/tag", request)
        else:
            self._write_line(request)
            obj = _loads(self._read_line(self._deadline()), "response")
        return _parse_response(obj, req_id, task, len(tokens))

    def predict(self, tokens: Sequence[Token]) -> list[Label]:
        if self.task is None:
            raise ValueError("RemoteTagger has no bound task; use tag()")
        return self.tag(self.task, tokens)

    def close(self) -> None:
        proc, self._proc = self._proc, None
        self._buf = b""
        self._hello = None
        if proc is None:
            return
        if proc.stdin is not None:
            try:
                proc.stdin.close()
            except OSError:
                pass
        try:
            proc.wait(timeout=2)
        except subprocess.TimeoutExpired:
            proc.kill()
            proc.wait()

    def __enter__(self) -> "RemoteTagger":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()


def _loads(line: str, what: str) -> object:
    try:
        return json.loads(line)
    except json.JSONDecodeError:
        raise ProtocolError(f"malformed {what} line: {line[:200]!r}") from None


def tag_remote(endpoint: RemoteEndpoint, task: Task, tokens: Sequence[Token]) -> list[Label]:
    """One-shot request against an endpoint (opens and closes a connection)."""
    with RemoteTagger(endpoint, task) as client:
        return client.tag(task, tokens)


def healthcheck(endpoint: RemoteEndpoint) -> ServerInfo:
    """Fetch and validate the server's hello message."""
    with RemoteTagger(endpoint) as client:
        return client.healthcheck()
