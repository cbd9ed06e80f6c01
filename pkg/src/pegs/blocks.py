"""Per-feature hash-keyed count tables and their perturbed conditionals.

Disintegration walks the dataset once per feature, hashing each row's
condition and counting which category the feature took under that key. A
conditional query smooths the stored counts with a uniform Dirichlet prior
of strength alpha:

    p_j = (n_j + alpha) / (N_key + C * alpha)

Keys that were never observed are semantically all-zero count rows and are
not materialized; with alpha > 0 they yield the uniform distribution.

The on-disk artifact is a single binary container: a JSON header (schema,
hash specs, format version) followed by one length-prefixed, CRC-checksummed
count section per feature. Synthesis needs only this artifact, never the
original data.
"""

from __future__ import annotations

import json
import os
import struct
import zlib
from dataclasses import dataclass, field

import numpy as np

from pegs.errors import BlocksFormatError, DataError, PrivacyError
from pegs.hashing import HashSpec, build_hash_spec, hash_keys
from pegs.schema import Dataset, Schema

_MAGIC = b"PEGSBLK\x01"
_FORMAT_VERSION = 1


@dataclass(frozen=True)
class CountRow:
    """Category counts observed under one hash key."""

    counts: np.ndarray
    total: int = field(init=False)

    def __post_init__(self) -> None:
        arr = np.asarray(self.counts, dtype=np.int64)
        if arr.ndim != 1 or np.any(arr < 0):
            raise DataError("counts must be a non-negative 1-D vector")
        arr.flags.writeable = False
        object.__setattr__(self, "counts", arr)
        object.__setattr__(self, "total", int(arr.sum()))


@dataclass(frozen=True)
class FeatureTable:
    """One feature's hash spec plus its key -> CountRow map."""

    hash_spec: HashSpec
    rows: dict[int, CountRow]


@dataclass(frozen=True)
class BuildingBlocks:
    """Everything synthesis needs: schema, hash specs, and count tables."""

    schema: Schema
    tables: tuple[FeatureTable, ...]
    n_rows: int
    m: int

    def table(self, i: int) -> FeatureTable:
        return self.tables[i]


def smoothed_probabilities(counts: np.ndarray, alpha: float, n_categories: int) -> np.ndarray:
    """Dirichlet-smoothed probability vector (n_j + alpha) / (N + C*alpha)."""
    if alpha < 0:
        raise PrivacyError(f"alpha must be >= 0, got {alpha}")
    counts = np.asarray(counts, dtype=np.float64)
    total = counts.sum()
    if alpha == 0.0 and total <= 0:
        raise PrivacyError("alpha=0 with an empty count row: distribution undefined")
    return (counts + alpha) / (total + n_categories * alpha)


def conditional(blocks: BuildingBlocks, i: int, key: int, alpha: float) -> np.ndarray:
    """Perturbed conditional of feature i under one hash key.

    Absent keys behave as all-zero rows: uniform for alpha > 0, an error for
    alpha = 0.
    """
    c = blocks.schema.features[i].n_categories
    row = blocks.tables[i].rows.get(int(key))
    if row is None:
        if alpha == 0.0:
            raise PrivacyError(
                f"alpha=0 at unseen key {key} for feature {i}: distribution undefined"
            )
        if alpha < 0:
            raise PrivacyError(f"alpha must be >= 0, got {alpha}")
        return np.full(c, 1.0 / c)
    return smoothed_probabilities(row.counts, alpha, c)


def counts_at(blocks: BuildingBlocks, i: int, key: int) -> CountRow:
    """CountRow at a key, materializing the all-zero row for absent keys."""
    row = blocks.tables[i].rows.get(int(key))
    if row is None:
        return CountRow(np.zeros(blocks.schema.features[i].n_categories, dtype=np.int64))
    return row


def disintegrate(
    dataset: Dataset, m: int, *, hash_specs: list[HashSpec] | None = None
) -> BuildingBlocks:
    """Break a dataset into per-feature hash-keyed count tables.

    Hash specs are built from the dataset's own mutual-information ordering
    unless prebuilt ones are supplied (the DP verification oracle passes a
    shared set so two neighboring datasets are counted under one hash
    function).
    """
    if dataset.n_rows < 1:
        raise DataError("disintegrate needs at least one row")
    schema = dataset.schema
    tables = []
    for i, feat in enumerate(schema.features):
        spec = hash_specs[i] if hash_specs is not None else build_hash_spec(dataset, i, m)
        if spec.target != i:
            raise DataError(f"hash spec at position {i} targets feature {spec.target}")
        tables.append(FeatureTable(hash_spec=spec, rows=_count_table(dataset, i, spec)))
    eff_m = tables[0].hash_spec.m if hash_specs is not None else min(m, schema.n_features - 1)
    return BuildingBlocks(schema=schema, tables=tuple(tables), n_rows=dataset.n_rows, m=eff_m)


def _count_table(dataset: Dataset, i: int, spec: HashSpec) -> dict[int, CountRow]:
    c = dataset.schema.features[i].n_categories
    keys = hash_keys(dataset.rows, spec)
    combined = keys * c + dataset.rows[:, i]
    uniq, cnt = np.unique(combined, return_counts=True)
    rows: dict[int, CountRow] = {}
    key_of = uniq // c
    cat_of = uniq % c
    start = 0
    while start < len(uniq):
        stop = start
        k = key_of[start]
        while stop < len(uniq) and key_of[stop] == k:
            stop += 1
        counts = np.zeros(c, dtype=np.int64)
        counts[cat_of[start:stop]] = cnt[start:stop]
        rows[int(k)] = CountRow(counts)
        start = stop
    return rows


# ---------------------------------------------------------------------------
# Artifact serialization
# ---------------------------------------------------------------------------


def save_blocks(blocks: BuildingBlocks, path: str | os.PathLike) -> None:
    header = {
        "format_version": _FORMAT_VERSION,
        "n_rows": blocks.n_rows,
        "m": blocks.m,
        "schema": blocks.schema.to_json_obj(),
        "features": [
            {"hash_spec": t.hash_spec.to_json_obj(), "n_keys": len(t.rows)}
            for t in blocks.tables
        ],
    }
    header_bytes = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<Q", len(header_bytes)))
        fh.write(header_bytes)
        fh.write(struct.pack("<I", zlib.crc32(header_bytes)))
        for i, t in enumerate(blocks.tables):
            c = blocks.schema.features[i].n_categories
            keys = np.array(sorted(t.rows), dtype=np.int64)
            if len(keys):
                counts = np.stack([t.rows[int(k)].counts for k in keys], axis=0)
            else:
                counts = np.zeros((0, c), dtype=np.int64)
            payload = keys.astype("<i8").tobytes() + counts.astype("<i8").tobytes()
            fh.write(struct.pack("<Q", len(payload)))
            fh.write(payload)
            fh.write(struct.pack("<I", zlib.crc32(payload)))


def load_blocks(path: str | os.PathLike) -> BuildingBlocks:
    with open(path, "rb") as fh:
        blob = fh.read()
    view = memoryview(blob)
    if len(view) < len(_MAGIC) or bytes(view[: len(_MAGIC)]) != _MAGIC:
        raise BlocksFormatError(f"{path}: not a blocks artifact (bad magic)")
    off = len(_MAGIC)
    header_bytes, off = _read_section(view, off, path, "header")
    header = json.loads(header_bytes.decode("utf-8"))
    if header.get("format_version") != _FORMAT_VERSION:
        raise BlocksFormatError(
            f"{path}: format version {header.get('format_version')} "
            f"(this build reads version {_FORMAT_VERSION})"
        )
    schema = Schema.from_json_obj(header["schema"])
    tables = []
    for i, feat_entry in enumerate(header["features"]):
        spec = HashSpec.from_json_obj(feat_entry["hash_spec"])
        n_keys = int(feat_entry["n_keys"])
        c = schema.features[i].n_categories
        payload, off = _read_section(view, off, path, f"feature {i}")
        expected = n_keys * 8 + n_keys * c * 8
        if len(payload) != expected:
            raise BlocksFormatError(
                f"{path}: feature {i} section is {len(payload)} bytes, expected {expected}"
            )
        keys = np.frombuffer(payload, dtype="<i8", count=n_keys)
        counts = np.frombuffer(payload, dtype="<i8", offset=n_keys * 8).reshape(n_keys, c)
        rows = {int(k): CountRow(counts[r]) for r, k in enumerate(keys)}
        tables.append(FeatureTable(hash_spec=spec, rows=rows))
    if off != len(view):
        raise BlocksFormatError(f"{path}: {len(view) - off} trailing bytes")
    return BuildingBlocks(
        schema=schema, tables=tuple(tables), n_rows=int(header["n_rows"]), m=int(header["m"])
    )


def _read_section(view: memoryview, off: int, path, what: str) -> tuple[bytes, int]:
    if off + 8 > len(view):
        raise BlocksFormatError(f"{path}: truncated before {what} length")
    (length,) = struct.unpack_from("<Q", view, off)
    off += 8
    if off + length + 4 > len(view):
        raise BlocksFormatError(f"{path}: truncated inside {what}")
    payload = bytes(view[off : off + length])
    off += length
    (crc,) = struct.unpack_from("<I", view, off)
    off += 4
    if zlib.crc32(payload) != crc:
        raise BlocksFormatError(f"{path}: checksum mismatch in {what}")
    return payload, off
