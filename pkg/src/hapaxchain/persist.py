"""File formats and atomic persistence for the pipeline artifacts.

All writers go through a temp-file-plus-rename so a crashed run never
leaves a half-written artifact, and all formats are locale-independent
(comma-delimited CSV, dot decimals, UTF-8 JSON with sorted keys) so
reruns with identical inputs are byte-identical.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .corpus import HapaxEntry, HapaxTable, RankSequence
from .ranksize import TargetDistribution

__all__ = [
    "atomic_write_text",
    "sha256_file",
    "config_hash",
    "write_json",
    "read_json",
    "write_hapax_table",
    "read_hapax_table",
    "write_rank_sequence",
    "read_rank_sequence",
    "write_target_distribution",
    "write_csv",
    "read_rank_size_csv",
]

FLOAT_FMT = "{:.17g}"


def atomic_write_text(path: str | Path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp_name, path)
    except BaseException:
        try:
            os.unlink(tmp_name)
        except OSError:
            pass
        raise
    return path


def sha256_file(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def config_hash(config: dict) -> str:
    """Stable hash of a JSON-serializable configuration mapping."""
    canonical = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def write_json(path: str | Path, payload: dict) -> Path:
    return atomic_write_text(path, json.dumps(payload, sort_keys=True, indent=2) + "\n")


def read_json(path: str | Path) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))


def _fmt(value) -> str:
    if isinstance(value, (float, np.floating)):
        return FLOAT_FMT.format(float(value))
    return str(value)


def write_csv(path: str | Path, header: list[str], rows) -> Path:
    lines = [",".join(header)]
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    return atomic_write_text(path, "\n".join(lines) + "\n")


def write_hapax_table(path: str | Path, table: HapaxTable) -> Path:
    return write_csv(
        path,
        ["word", "frequency", "dense_rank", "ordinal_rank"],
        ((e.word, e.frequency, e.dense_rank, e.ordinal_rank) for e in table.entries),
    )


def read_hapax_table(path: str | Path) -> HapaxTable:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or lines[0] != "word,frequency,dense_rank,ordinal_rank":
        raise ValueError(f"{path} is not a hapax table file")
    entries = []
    for ln in lines[1:]:
        if not ln:
            continue
        word, freq, dense, ordinal = ln.split(",")
        entries.append(HapaxEntry(word, int(freq), int(dense), int(ordinal)))
    return HapaxTable(
        entries=tuple(entries),
        total_occurrences=sum(e.frequency for e in entries),
        alphabet_size=max(e.dense_rank for e in entries),
    )


def write_rank_sequence(path: str | Path, seq: RankSequence) -> Path:
    body = "\n".join(str(int(v)) for v in np.asarray(seq.values))
    return atomic_write_text(path, (body + "\n") if body else "")


def read_rank_sequence(path: str | Path) -> RankSequence:
    values = np.array(
        [int(ln) for ln in Path(path).read_text(encoding="utf-8").split() if ln],
        dtype=np.int64,
    )
    if values.size == 0:
        raise ValueError(f"{path} contains no rank values")
    return RankSequence(values=values, alphabet_size=int(values.max()))


def write_target_distribution(path: str | Path, target: TargetDistribution) -> Path:
    return write_csv(
        path,
        ["rank", "prob"],
        ((r + 1, p) for r, p in enumerate(target.probs)),
    )


def read_rank_size_csv(path: str | Path) -> list[tuple[int, float]]:
    """Read fit input: either a rank,size CSV or a hapax table, whose
    ordinal ranks and frequencies then serve as the points."""
    lines = [ln for ln in Path(path).read_text(encoding="utf-8").splitlines() if ln]
    if not lines:
        raise ValueError(f"{path} is empty")
    header = lines[0]
    if header == "word,frequency,dense_rank,ordinal_rank":
        table = read_hapax_table(path)
        return sorted((e.ordinal_rank, float(e.frequency)) for e in table.entries)
    if header.replace(" ", "") != "rank,size":
        raise ValueError(f"{path}: expected a 'rank,size' header, got {header!r}")
    points = []
    for ln in lines[1:]:
        rank_s, size_s = ln.split(",")
        points.append((int(rank_s), float(size_s)))
    return points
