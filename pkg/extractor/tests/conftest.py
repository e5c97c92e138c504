import json
from pathlib import Path

import pytest

from literalis_extractor import BackendConfig

from fixture_data import PARSED_LPS, TEN_PAIRS


@pytest.fixture
def write_bitext(tmp_path):
    def _write(rows, name="bitext.jsonl") -> Path:
        path = tmp_path / name
        with open(path, "w", encoding="utf-8") as handle:
            for row in rows:
                handle.write(json.dumps(row, ensure_ascii=False) + "\n")
        return path
    return _write


@pytest.fixture
def bitext_path(write_bitext) -> Path:
    return write_bitext(TEN_PAIRS)


@pytest.fixture
def parsed_config() -> BackendConfig:
    return BackendConfig(pos_lps=PARSED_LPS)
