import logging
import os
import sys
from pathlib import Path

LOG_FORMAT = "%(asctime)s - %(levelname)s - %(name)s - %(message)s"
THREADS_ENV = "F2FACTOR_THREADS"
LOG_LEVEL_ENV = "F2FACTOR_LOG_LEVEL"


def configure_logging(verbosity: int = 0) -> None:
    if verbosity >= 2:
        level = logging.DEBUG
    elif verbosity == 1:
        level = logging.INFO
    else:
        level = os.environ.get(LOG_LEVEL_ENV, "WARNING").upper()
    logging.basicConfig(level=level, format=LOG_FORMAT, stream=sys.stderr, force=True)


def thread_cap() -> int | None:
    """Worker cap from F2FACTOR_THREADS, None when unset."""
    raw = os.environ.get(THREADS_ENV)
    if raw is None or raw.strip() == "":
        return None
    try:
        value = int(raw)
    except ValueError:
        raise ValueError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
    if value < 1:
        raise ValueError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
    return value


def worker_count(requested: int) -> int:
    cap = thread_cap()
    return max(1, min(requested, cap) if cap is not None else requested)


def ensure_recursion_limit(depth: int) -> None:
    # each IsEqual level costs a couple of interpreter frames
    needed = 4 * depth + 200
    if sys.getrecursionlimit() < needed:
        sys.setrecursionlimit(needed)


def read_text_input(source: str) -> str:
    if source == "-":
        return sys.stdin.read()
    return Path(source).read_text(encoding="utf-8")


def strip_comment_lines(text: str) -> str:
    """Drop `#` header lines written by `gen`."""
    return "\n".join(
        line for line in text.splitlines() if not line.lstrip().startswith("#")
    )
