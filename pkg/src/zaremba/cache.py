"""Tab-separated store of search results, one row per q, kept sorted by q."""
from __future__ import annotations

import os
import tempfile
from pathlib import Path

from .korobov import SearchResult

HEADER = "q\ta\tm_min\tstrategy\telapsed_ms"
FIELDS = HEADER.split("\t")


class CacheError(ValueError):
    pass


def read_cache(path) -> dict[int, SearchResult]:
    path = Path(path)
    if not path.exists() or path.stat().st_size == 0:
        return {}
    with open(path, encoding="utf-8", newline="") as fh:
        lines = fh.read().split("\n")
    if lines[0] != HEADER:
        raise CacheError(f"{path}: unexpected header {lines[0]!r}")
    rows = {}
    for lineno, line in enumerate(lines[1:], start=2):
        if not line:
            continue
        parts = line.split("\t")
        if len(parts) != len(FIELDS):
            raise CacheError(f"{path}:{lineno}: expected {len(FIELDS)} columns")
        try:
            q, a, m, ms = int(parts[0]), int(parts[1]), int(parts[2]), int(parts[4])
        except ValueError as e:
            raise CacheError(f"{path}:{lineno}: {e}") from None
        rows[q] = SearchResult(q, a, m, parts[3], ms)
    return rows


def cache_upsert(path, rows) -> int:
    """Add rows whose q is not stored yet; returns how many were written."""
    rows = list(rows)
    if len({r.q for r in rows}) != len(rows):
        raise ValueError("rows must have distinct q")
    have = read_cache(path)
    new = [r for r in rows if r.q not in have]
    if not new:
        if not Path(path).exists():
            Path(path).write_text(HEADER + "\n", encoding="utf-8")
        return 0
    for r in new:
        have[r.q] = r
    body = [HEADER] + [f"{r.q}\t{r.a}\t{r.m_min}\t{r.strategy}\t{r.elapsed_ms}"
                       for r in sorted(have.values(), key=lambda r: r.q)]
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=path.name, suffix=".tmp")
    with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(body) + "\n")
    os.replace(tmp, path)
    return len(new)
