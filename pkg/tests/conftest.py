"""Shared test fixtures and helpers.

Keeps three things in one place: hypothesis settings, small factories for
documents/vocabularies/scorers used across test modules, and a loopback HTTP
stub for exercising the remote provider/scorer clients without any real
service. Also collects the acceptance suite's PASS/FAIL lines and prints
them in the terminal summary.
"""

from __future__ import annotations

import json
import random
import threading
from contextlib import contextmanager
from http.server import BaseHTTPRequestHandler, HTTPServer
from typing import Callable, Iterator, Mapping, Sequence

from hypothesis import HealthCheck, settings

from topicseg import NO_TOPIC, Document, TopicVocabulary

settings.register_profile(
    "default", deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

# (line, ok) pairs appended by the acceptance tests, echoed at session end
ACCEPTANCE_LINES: list[tuple[str, bool]] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line, ok in ACCEPTANCE_LINES:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}: {line}")


# ---------------------------------------------------------------------------
# factories


def make_doc(
    n: int = 6,
    doc_id: str = "doc",
    ref_boundaries: Sequence[int] | None = None,
    ref_topics: Sequence[str] | None = None,
    tokens_per_sentence: int = 2,
) -> Document:
    """A document of n distinct sentences; sentence i is 's<i> ...' tokens."""
    sentences = [
        " ".join(f"s{i:02d}t{j}" for j in range(tokens_per_sentence)) for i in range(n)
    ]
    return Document.build(
        id=doc_id,
        sentences=sentences,
        ref_boundaries=ref_boundaries,
        ref_topics=ref_topics,
    )


def vocab_of(n_topics: int) -> TopicVocabulary:
    """n_topics labels total, the reserved no-topic label always last."""
    if n_topics < 1:
        raise ValueError("need at least one label")
    return TopicVocabulary(
        tuple(f"T{i:02d}" for i in range(n_topics - 1)) + (NO_TOPIC,)
    )


class SpanScorer:
    """Test scorer serving (start, end)-keyed vectors; position bin ignored."""

    def __init__(
        self, vocab: TopicVocabulary, table: Mapping[tuple[int, int], Sequence[float]]
    ):
        self.vocab = vocab
        self.table = dict(table)
        self.calls: list[tuple[int, int, int]] = []

    def logprobs(self, doc: Document, start: int, end: int, position_bin: int) -> list[float]:
        self.calls.append((start, end, position_bin))
        return list(self.table[(start, end)])


def dyadic_costs(n: int, rng: random.Random) -> dict[int, float]:
    """Boundary costs on the exact grid {-2, -1.875, ..., 2}: multiples of 1/8.

    Together with alpha on quarter steps and L a power of two, every objective
    term and sum in the tests is exactly representable, so DP-vs-enumeration
    comparisons and tie-breaks need no tolerance at all.
    """
    return {b: rng.randrange(-16, 17) / 8.0 for b in range(1, n)}


def random_span_scores(
    n: int, n_topics: int, rng: random.Random, spread: float = 3.0
) -> dict[tuple[int, int], list[float]]:
    """Normalized log-prob vectors for every span 0 <= s < e <= n."""
    from oracles import log_softmax

    return {
        (s, e): log_softmax([rng.uniform(-spread, spread) for _ in range(n_topics)])
        for s in range(n)
        for e in range(s + 1, n + 1)
    }


# ---------------------------------------------------------------------------
# loopback HTTP stub

Handler = Callable[[dict], tuple[int, dict]]


@contextmanager
def http_stub(routes: Mapping[str, Handler]) -> Iterator[str]:
    """Serve canned JSON handlers on 127.0.0.1; yields the base URL."""

    class _Stub(BaseHTTPRequestHandler):
        def do_POST(self):
            length = int(self.headers.get("Content-Length", 0))
            payload = json.loads(self.rfile.read(length) or b"{}")
            handler = routes.get(self.path)
            if handler is None:
                self.send_error(404)
                return
            status, body = handler(payload)
            data = json.dumps(body).encode("utf-8")
            self.send_response(status)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(data)))
            self.end_headers()
            self.wfile.write(data)

        def log_message(self, *args):
            pass

    server = HTTPServer(("127.0.0.1", 0), _Stub)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    try:
        yield f"http://127.0.0.1:{server.server_port}"
    finally:
        server.shutdown()
        thread.join()
