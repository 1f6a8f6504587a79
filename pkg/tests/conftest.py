import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

import corpusgen
from phishkit.features import load_alexa
from phishkit.snapshot import load_snapshot
from phishkit.target_id import FixtureSearchClient
from phishkit.urlparts import bundled_suffix_path, load_suffix_list

DATA_DIR = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def suffixes():
    return load_suffix_list(bundled_suffix_path())


@pytest.fixture(scope="session")
def corpus_dir(tmp_path_factory):
    return corpusgen.write_corpus(tmp_path_factory.mktemp("corpus"))


@pytest.fixture(scope="session")
def alexa_path(tmp_path_factory):
    return corpusgen.write_alexa(tmp_path_factory.mktemp("alexa") / "ranks.csv")


@pytest.fixture(scope="session")
def alexa(alexa_path):
    return load_alexa(alexa_path)


@pytest.fixture(scope="session")
def search_index_path(tmp_path_factory):
    return corpusgen.write_search_index(
        tmp_path_factory.mktemp("index") / "search_index.json"
    )


@pytest.fixture(scope="session")
def search_client():
    return FixtureSearchClient(corpusgen.SEARCH_INDEX)


@pytest.fixture(scope="session")
def snapshots(corpus_dir, suffixes):
    """All fixture snapshots, keyed by page name."""
    return {
        path.stem: load_snapshot(path, suffixes)
        for path in sorted(corpus_dir.glob("*.json"))
    }


class CountingClient:
    """Search-client wrapper recording every query issued."""

    def __init__(self, inner):
        self.inner = inner
        self.queries = []

    def query(self, text, max_results):
        self.queries.append(text)
        return self.inner.query(text, max_results)


class EmptyClient:
    def query(self, text, max_results):
        return []


@pytest.fixture
def counting_client(search_client):
    return CountingClient(search_client)
