# ── stdlib
import json

# ── third-party
import pytest

# ── local
from fairdiv.core import Instance, Kind


def make(rows, kind=None, **names) -> Instance:
    """Instance from literal rows; kind follows the signs unless given."""
    if kind is None:
        kind = Kind.CHORES if any(x < 0 for r in rows for x in r) else Kind.GOODS
    return Instance(kind, tuple(tuple(r) for r in rows), **names)


@pytest.fixture(autouse=True)
def _isolated_env(monkeypatch, tmp_path):
    for key in ("FAIRDIV_ORACLE_BUDGET", "FAIRDIV_VERBOSE"):
        monkeypatch.delenv(key, raising=False)
    monkeypatch.setenv("FAIRDIV_TRACE_DIR", str(tmp_path / "traces"))


@pytest.fixture
def write_json(tmp_path):
    def _write(name: str, doc: dict):
        path = tmp_path / name
        path.write_text(json.dumps(doc), encoding="utf-8")
        return str(path)
    return _write
