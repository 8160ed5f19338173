"""Remote tagger client: stdio and HTTP transports against stub servers."""

from __future__ import annotations

import json
import sys
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

import pytest

from pertext import (
    RemoteEndpoint,
    RemoteTagger,
    Separator,
    Task,
    Token,
    Transport,
    healthcheck,
    tag_remote,
)
from pertext.errors import ProtocolError, RemoteError, Timeout, TransportError
from pertext.remote import endpoint_for

STUB = Path(__file__).parent / "stub_server.py"


def stub_endpoint(mode: str, timeout_ms: int = 10000, extra: str = "") -> RemoteEndpoint:
    cmd = f"{sys.executable} {STUB} {mode} {extra}".strip()
    return RemoteEndpoint(Transport.CHILD_PROCESS_STDIO, cmd, timeout_ms=timeout_ms)


def words(*surfaces: str) -> list[Token]:
    return [Token(s, Separator.SPACE) for s in surfaces]


class TestEndpoint:
    def test_validation(self):
        with pytest.raises(ValueError):
            RemoteEndpoint(Transport.HTTP_URL, "http://x", timeout_ms=0)
        with pytest.raises(ValueError):
            RemoteEndpoint(Transport.HTTP_URL, "http://x", max_inflight=0)

    def test_endpoint_for_dispatch(self):
        assert endpoint_for("http://localhost:1").transport is Transport.HTTP_URL
        assert endpoint_for("https://host/x").transport is Transport.HTTP_URL
        assert endpoint_for("python server.py").transport is Transport.CHILD_PROCESS_STDIO


class TestStdioClient:
    def test_all_unk(self):
        labels = tag_remote(stub_endpoint("unk"), Task.PUNCTUATION, words("الف", "ب", "پ"))
        assert [l.value for l in labels] == ["UNK", "UNK", "UNK"]

    def test_binary_task(self):
        labels = tag_remote(stub_endpoint("unk"), Task.ZWNJ, words("الف", "ب"))
        assert [l.value for l in labels] == ["0", "0"]

    def test_length_mismatch(self):
        with pytest.raises(ProtocolError, match="length mismatch"):
            tag_remote(stub_endpoint("short"), Task.ZWNJ, words("a", "b", "c"))

    def test_id_mismatch(self):
        with pytest.raises(ProtocolError, match="id mismatch"):
            tag_remote(stub_endpoint("wrong-id"), Task.ZWNJ, words("a"))

    def test_out_of_set_label(self):
        with pytest.raises(ProtocolError, match="unknown class"):
            tag_remote(stub_endpoint("bad-label"), Task.ZWNJ, words("a"))

    def test_remote_error(self):
        with pytest.raises(RemoteError, match="stub exploded"):
            tag_remote(stub_endpoint("error"), Task.ZWNJ, words("a"))

    def test_timeout(self):
        with pytest.raises(Timeout):
            tag_remote(stub_endpoint("slow", timeout_ms=300, extra="5"), Task.ZWNJ, words("a"))

    def test_bad_hello(self):
        with pytest.raises(ProtocolError):
            healthcheck(stub_endpoint("bad-hello"))

    def test_dead_server(self):
        with pytest.raises(TransportError):
            healthcheck(stub_endpoint("dead"))

    def test_unlaunchable_command(self):
        endpoint = RemoteEndpoint(
            Transport.CHILD_PROCESS_STDIO, "/does/not/exist-xyz", timeout_ms=1000
        )
        with pytest.raises(TransportError):
            healthcheck(endpoint)

    def test_healthcheck_info(self):
        info = healthcheck(stub_endpoint("unk"))
        assert info.protocol_version == 1
        assert info.name == "stub-unk"
        assert set(info.tasks) == {Task.PUNCTUATION, Task.ZWNJ, Task.EZAFE}

    def test_empty_tokens_rejected_client_side(self):
        with RemoteTagger(stub_endpoint("unk"), Task.ZWNJ) as client:
            with pytest.raises(ValueError):
                client.tag(Task.ZWNJ, [])

    def test_ids_increase_within_connection(self):
        with RemoteTagger(stub_endpoint("unk"), Task.ZWNJ) as client:
            for expected_id in (1, 2, 3, 4):
                client.tag(Task.ZWNJ, words("a", "b"))
                assert client._next_id == expected_id + 1

    def test_predict_uses_bound_task(self):
        with RemoteTagger(stub_endpoint("unk"), Task.EZAFE) as client:
            labels = client.predict(words("الف"))
            assert labels[0].task is Task.EZAFE

    def test_reuse_after_close_respawns(self):
        client = RemoteTagger(stub_endpoint("unk"), Task.ZWNJ)
        assert client.tag(Task.ZWNJ, words("a"))[0].value == "0"
        client.close()
        assert client.tag(Task.ZWNJ, words("b"))[0].value == "0"
        client.close()


class _Handler(BaseHTTPRequestHandler):
    hello = {"proto": 1, "name": "http-stub", "tasks": ["zwnj"]}

    def log_message(self, *args):
        pass

    def do_GET(self):
        if self.path == "/v1/health":
            self._send(200, self.hello)
        else:
            self._send(404, {"error": "not found"})

    def do_POST(self):
        if self.path != "/v1/tag":
            self._send(404, {"error": "not found"})
            return
        length = int(self.headers["Content-Length"])
        req = json.loads(self.rfile.read(length))
        if req["task"] != "zwnj":
            self._send(200, {"id": req["id"], "error": "unsupported task"})
            return
        self._send(200, {"id": req["id"], "labels": ["0"] * len(req["tokens"])})

    def _send(self, status: int, obj: dict):
        body = json.dumps(obj).encode()
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)


@pytest.fixture(scope="module")
def http_server():
    server = ThreadingHTTPServer(("127.0.0.1", 0), _Handler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield f"http://127.0.0.1:{server.server_port}"
    server.shutdown()


class TestHttpClient:
    def test_tag(self, http_server):
        endpoint = endpoint_for(http_server)
        labels = tag_remote(endpoint, Task.ZWNJ, words("الف", "ب"))
        assert [l.value for l in labels] == ["0", "0"]

    def test_healthcheck(self, http_server):
        info = healthcheck(endpoint_for(http_server))
        assert info.name == "http-stub"
        assert info.tasks == (Task.ZWNJ,)

    def test_remote_error(self, http_server):
        with pytest.raises(RemoteError, match="unsupported task"):
            tag_remote(endpoint_for(http_server), Task.EZAFE, words("x"))

    def test_unreachable(self):
        endpoint = RemoteEndpoint(
            Transport.HTTP_URL, "http://127.0.0.1:1", timeout_ms=1500
        )
        with pytest.raises(TransportError):
            healthcheck(endpoint)
