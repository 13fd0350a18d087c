import numpy as np
import pytest

from sqbench.experiment.pipeline import prepare_reference
from sqbench.synth import speech_like, write_corpus


@pytest.fixture(scope="session")
def speech_22k():
    return speech_like(5.0, 22050, seed=11, gender="male")


@pytest.fixture(scope="session")
def reference_8k(speech_22k):
    """A prepared channel-rate reference (trimmed, 8 kHz, IRS, -26 dBFS)."""
    return prepare_reference(speech_22k)


@pytest.fixture(scope="session")
def babble_pool_8k():
    return [prepare_reference(speech_like(5.0, 22050, seed=500 + i, gender=("male", "female")[i % 2]))
            for i in range(6)]


@pytest.fixture(scope="session")
def small_corpus(tmp_path_factory):
    """Two samples per language plus a six-talker babble pool."""
    return write_corpus(tmp_path_factory.mktemp("small"), per_language=2, babble_pool=6, seed=3)


@pytest.fixture(scope="session")
def full_corpus(tmp_path_factory):
    """48 test excerpts (16 per language, gender-balanced) plus the babble pool."""
    return write_corpus(tmp_path_factory.mktemp("full"), per_language=16, babble_pool=6, seed=0)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
