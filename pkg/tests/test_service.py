"""Embedding-service client behavior against a local HTTP stub."""

import json
import threading
from http.server import BaseHTTPRequestHandler, HTTPServer

import numpy as np
import pytest

from pageorder.corpus import AuthError, DimensionMismatchError, TransportError, fetch_embeddings


class _StubHandler(BaseHTTPRequestHandler):
    script = []  # list of status codes to emit before succeeding
    dim = 4
    requests_seen = []

    def do_POST(self):
        body = json.loads(self.rfile.read(int(self.headers["Content-Length"])))
        type(self).requests_seen.append({"path": self.path, "texts": body["texts"], "auth": self.headers.get("Authorization")})
        if self.script:
            status = self.script.pop(0)
            self.send_response(status)
            self.end_headers()
            return
        payload = {"embeddings": [[float(len(t))] * self.dim for t in body["texts"]]}
        data = json.dumps(payload).encode()
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)

    def log_message(self, *args):
        pass


@pytest.fixture
def stub_server():
    server = HTTPServer(("127.0.0.1", 0), _StubHandler)
    _StubHandler.script = []
    _StubHandler.requests_seen = []
    _StubHandler.dim = 4
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield f"http://127.0.0.1:{server.server_port}"
    server.shutdown()


class TestFetchEmbeddings:
    def test_empty_input_no_network_call(self, stub_server):
        assert fetch_embeddings([], stub_server) == []
        assert _StubHandler.requests_seen == []

    def test_happy_path(self, stub_server):
        out = fetch_embeddings(["ab", "cdef"], stub_server, credentials="k")
        assert len(out) == 2
        assert np.allclose(out[0], [2.0] * 4)
        assert _StubHandler.requests_seen[0]["auth"] == "Bearer k"
        assert _StubHandler.requests_seen[0]["path"] == "/embed"

    def test_wrong_dimension_rejected(self, stub_server):
        with pytest.raises(DimensionMismatchError):
            fetch_embeddings(["x"], stub_server, expected_dim=7)

    def test_transient_failure_then_success(self, stub_server):
        _StubHandler.script = [503]
        out = fetch_embeddings(["hello"], stub_server, backoff=0.01)
        assert len(out) == 1
        assert len(_StubHandler.requests_seen) == 2  # one retry

    def test_persistent_failure_raises_transport(self, stub_server):
        _StubHandler.script = [500] * 10
        with pytest.raises(TransportError):
            fetch_embeddings(["hello"], stub_server, max_retries=2, backoff=0.01)

    def test_auth_failure_not_retried(self, stub_server):
        _StubHandler.script = [401]
        with pytest.raises(AuthError):
            fetch_embeddings(["hello"], stub_server, backoff=0.01)
        assert len(_StubHandler.requests_seen) == 1

    def test_unreachable_endpoint(self):
        with pytest.raises(TransportError):
            fetch_embeddings(["x"], "http://127.0.0.1:9", max_retries=0, backoff=0.01, timeout=0.2)

    def test_batching_splits_requests(self, stub_server):
        texts = [f"t{i}" for i in range(5)]
        out = fetch_embeddings(texts, stub_server, batch_size=2)
        assert len(out) == 5
        assert len(_StubHandler.requests_seen) == 3
