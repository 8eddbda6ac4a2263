import numpy as np
import pytest

from sagecs.corpus import AlignedUtterance, LanguageTag, WordAlignment
from sagecs.synthetic import make_pool, write_corpus


def utterance(words, duration, language=LanguageTag.ARABIC, uid="u", path=""):
    """Build an AlignedUtterance from ``(word, start, end)`` triples."""
    return AlignedUtterance(uid, path, language, duration, tuple(WordAlignment(*w) for w in words))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def small_corpus(tmp_path_factory):
    """40 Arabic + 40 English synthetic utterances written to disk."""
    root = tmp_path_factory.mktemp("corpus")
    items = make_pool(LanguageTag.ARABIC, 40, 11) + make_pool(LanguageTag.ENGLISH, 40, 11)
    utts = write_corpus(root, items)
    ar = [u for u in utts if u.language is LanguageTag.ARABIC]
    en = [u for u in utts if u.language is LanguageTag.ENGLISH]
    return root, ar, en


@pytest.fixture(scope="session")
def memory_pools():
    """In-memory pools plus a loader, for fast splicing without disk I/O."""
    items = make_pool(LanguageTag.ARABIC, 30, 5) + make_pool(LanguageTag.ENGLISH, 30, 5)
    audio = {u.utterance_id: a for u, a in items}
    ar = [u for u, _ in items if u.language is LanguageTag.ARABIC]
    en = [u for u, _ in items if u.language is LanguageTag.ENGLISH]
    return ar, en, lambda u: audio[u.utterance_id]


def pytest_configure(config):
    config.acceptance_lines = []


def pytest_terminal_summary(terminalreporter, config):
    if config.acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(config.acceptance_lines, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
