import sys
from pathlib import Path

import pytest

FIXTURES = Path(__file__).parent / "fixtures"
sys.path.insert(0, str(Path(__file__).parent))


@pytest.fixture(scope="session")
def fixture_paths() -> dict[str, Path]:
    return {
        "corpus": FIXTURES / "corpus.jsonl",
        "evidence": FIXTURES / "evidence.jsonl",
        "topics": FIXTURES / "topics.jsonl",
        "qrels": FIXTURES / "qrels.txt",
    }
