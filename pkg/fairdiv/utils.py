"""
fairdiv/utils.py
Runtime settings read from the environment (a local .env is honoured), the
stderr progress log and the line-delimited trace writer.

Settings
────────
  FAIRDIV_ORACLE_BUDGET   max n^m the brute-force oracle will enumerate (2^22)
  FAIRDIV_VERBOSE         1/true → library progress lines on stderr
  FAIRDIV_TRACE_DIR       where bare --trace file names land (outputs/traces)
"""

# ── stdlib
import json, os, sys
from fractions import Fraction
from pathlib import Path

# ── third-party
from dotenv import load_dotenv

# ── local
from fairdiv.core import ConfigError

load_dotenv()

DEFAULT_ORACLE_BUDGET = 2 ** 22
DEFAULT_TRACE_DIR     = "outputs/traces"

log = lambda m: print(m, file=sys.stderr, flush=True)


# ── settings ────────────────────────────────────────────────────────────
def verbose() -> bool:
    return os.getenv("FAIRDIV_VERBOSE", "0").strip().lower() in ("1", "true", "yes", "on")


def vlog(m: str):
    if verbose():
        log(m)


def oracle_budget() -> int:
    raw = os.getenv("FAIRDIV_ORACLE_BUDGET", "").strip()
    if not raw:
        return DEFAULT_ORACLE_BUDGET
    try:
        val = int(raw)
    except ValueError:
        raise ConfigError(f"FAIRDIV_ORACLE_BUDGET={raw!r} is not an integer") from None
    if val <= 0:
        raise ConfigError(f"FAIRDIV_ORACLE_BUDGET must be positive, got {val}")
    return val


# ── trace files ─────────────────────────────────────────────────────────
def jsonable(x):
    """Fractions become ints when integral and 'a/b' strings otherwise."""
    if isinstance(x, Fraction):
        return x.numerator if x.denominator == 1 else str(x)
    if isinstance(x, dict):
        return {k: jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if isinstance(x, (set, frozenset)):
        return sorted(jsonable(v) for v in x)
    return x


def trace_path(arg: str) -> Path:
    p = Path(arg)
    if not p.is_absolute() and p.parent == Path("."):
        p = Path(os.getenv("FAIRDIV_TRACE_DIR", DEFAULT_TRACE_DIR)) / p
    p.parent.mkdir(parents=True, exist_ok=True)
    return p


def write_trace(path: Path, records) -> Path:
    """Replace the file at path with one JSON record per line."""
    path = Path(path)
    with path.open("w", encoding="utf-8") as f:
        f.writelines(json.dumps(jsonable(rec)) + "\n" for rec in records)
    return path
