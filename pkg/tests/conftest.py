"""Pytest configuration and fixtures."""

import csv
import os
from collections.abc import Callable
from pathlib import Path

# Keep developer .env files and POLICHANGE_* variables out of the tests
for _key in [k for k in os.environ if k.upper().startswith("POLICHANGE_")]:
    del os.environ[_key]

import numpy as np
import pytest

from polichange.ingest import KeywordDictionary, default_keyword_dictionary
from polichange.synthetic import SyntheticFixture, generator, write_fixture


@pytest.fixture(autouse=True)
def _isolated_cwd(tmp_path: Path, monkeypatch: pytest.MonkeyPatch) -> None:
    """Run every test in its own directory so no stray .env is picked up."""
    monkeypatch.chdir(tmp_path)


@pytest.fixture
def write_csv(tmp_path: Path) -> Callable[[str, list[str], list[list]], Path]:
    """Factory writing a CSV file under tmp_path."""

    def _write(name: str, header: list[str], rows: list[list]) -> Path:
        path = tmp_path / name
        with open(path, "w", encoding="utf-8", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(header)
            writer.writerows(rows)
        return path

    return _write


@pytest.fixture
def csv_bytes() -> Callable[[list[str], list[list]], bytes]:
    """Factory returning CSV content as bytes, for the stream parsers."""

    def _encode(header: list[str], rows: list[list]) -> bytes:
        lines = [",".join(header)] + [",".join(str(v) for v in row) for row in rows]
        return ("\n".join(lines) + "\n").encode("utf-8")

    return _encode


@pytest.fixture(scope="session")
def keyword_dictionary() -> KeywordDictionary:
    """The bundled keyword dictionary."""
    return default_keyword_dictionary()


@pytest.fixture(scope="session")
def synthetic_fixture(
    tmp_path_factory: pytest.TempPathFactory, keyword_dictionary: KeywordDictionary
) -> SyntheticFixture:
    """Synthetic requests, bills and dictionary written once per session (seed 0)."""
    directory = tmp_path_factory.mktemp("fixture")
    return write_fixture(directory, keyword_dictionary, seed=0)


@pytest.fixture
def rng() -> np.random.Generator:
    """Seeded generator for test data."""
    return generator(12345)
