import pathlib

import pytest

DATA_DIR = pathlib.Path(__file__).parent / "data"


@pytest.fixture
def tiny_corpus_path():
    return DATA_DIR / "tiny_corpus.json"
