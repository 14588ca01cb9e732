"""Shared fixtures: one set of tiny checkpoints for the whole session.

Building and loading models dominates test time, so checkpoints are
written once to a session temp dir and the loaded bundles are shared.
Every inference path is deterministic, which makes sharing safe. Also
collects the acceptance suite's PASS/FAIL lines for the terminal
summary.
"""

from __future__ import annotations

import random

import pytest

from lm_sidecar.config import Settings
from lm_sidecar.fixtures import build_fixtures
from lm_sidecar.models import ModelBundle

WORDS = tuple(f"w{i:02d}x{j:02d}" for i in range(4) for j in range(5))
LABELS = ("T00", "T01", "NO-TOPIC")

# (line, ok) pairs appended by the acceptance tests, echoed at session end
ACCEPTANCE_LINES: list[tuple[str, bool]] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line, ok in ACCEPTANCE_LINES:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}: {line}")


def make_sentences(rng: random.Random, n: int, lo: int = 3, hi: int = 6) -> list[str]:
    """n sentences of in-vocabulary words, lengths drawn from [lo, hi]."""
    return [
        " ".join(rng.choice(WORDS) for _ in range(rng.randint(lo, hi)))
        for _ in range(n)
    ]


@pytest.fixture(scope="session")
def checkpoints(tmp_path_factory):
    out = tmp_path_factory.mktemp("checkpoints")
    return build_fixtures(out, WORDS, LABELS, seed=0)


@pytest.fixture(scope="session")
def settings(checkpoints) -> Settings:
    return Settings(
        lm_path=checkpoints["lm"],
        nsp_path=checkpoints["nsp"],
        classifier_path=checkpoints["classifier"],
        vocab_path=checkpoints["vocab"],
        max_batch=4,
    )


@pytest.fixture(scope="session")
def bundle(settings) -> ModelBundle:
    b = ModelBundle(settings)
    b.load()
    return b


@pytest.fixture(scope="session")
def lm_only_bundle(checkpoints) -> ModelBundle:
    b = ModelBundle(Settings(lm_path=checkpoints["lm"], max_batch=4))
    b.load()
    return b


@pytest.fixture(scope="session")
def client(bundle):
    from fastapi.testclient import TestClient

    from lm_sidecar.service import create_app

    return TestClient(create_app(bundle))
