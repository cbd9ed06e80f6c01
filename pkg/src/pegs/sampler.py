"""Sequential synthesis from perturbed conditionals, single-pass and block.

A single pass starts from a seed record and visits features in schema
order; step i draws feature i from its perturbed conditional given the
freshly drawn prefix and the seed's suffix. Block synthesis chains passes
(each seeded by the previous output) and, after every pass, resets all
visited (feature, key) conditionals to uniform so the whole block costs a
single privacy budget. Resets live in a per-block overlay; the shared count
tables are never mutated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

from pegs.blocks import BuildingBlocks, conditional, counts_at
from pegs.errors import DataError, PrivacyError
from pegs.hashing import hash_condition
from pegs.privacy import DP_BLOCK, DP_SAMPLE, L_DIVERSITY, PrivacySpec, alpha_for_ldiversity
from pegs.rng import PURPOSE_POOL, PURPOSE_VALUES, master_key, substream
from pegs.schema import Dataset, Schema

AlphaResolver = Callable[[int, int], float]


@dataclass(frozen=True)
class SeedPool:
    """Complete records synthesis may start from; drawn uniformly with replacement."""

    records: np.ndarray

    def __post_init__(self) -> None:
        arr = np.array(self.records, dtype=np.int64, copy=True, order="C")
        if arr.ndim != 2 or arr.shape[0] < 1:
            raise DataError("seed pool must contain at least one record")
        arr.flags.writeable = False
        object.__setattr__(self, "records", arr)

    @classmethod
    def from_dataset(cls, dataset: Dataset) -> "SeedPool":
        return cls(records=dataset.rows)

    def draw(self, rng: np.random.Generator) -> np.ndarray:
        idx = int(rng.integers(self.records.shape[0]))
        return self.records[idx].copy()


class ResetOverlay:
    """Set of (feature, key) pairs whose conditionals read as uniform.

    Grows monotonically within one block and is discarded afterwards; it
    never touches the underlying count tables.
    """

    __slots__ = ("_marked",)

    def __init__(self) -> None:
        self._marked: set[tuple[int, int]] = set()

    def is_reset(self, feature: int, key: int) -> bool:
        return (feature, key) in self._marked

    def mark(self, pairs: Iterable[tuple[int, int]]) -> None:
        self._marked.update((int(f), int(k)) for f, k in pairs)

    def __len__(self) -> int:
        return len(self._marked)

    def pairs(self) -> frozenset[tuple[int, int]]:
        return frozenset(self._marked)


@dataclass(frozen=True)
class TraceStep:
    feature: int
    key: int
    value: int
    changed: bool


@dataclass(frozen=True)
class SynthesisTrace:
    """Seed, per-step draws, and the finished record of one pass."""

    seed: tuple[int, ...]
    steps: tuple[TraceStep, ...]
    final: tuple[int, ...]

    def replay(self) -> tuple[int, ...]:
        record = list(self.seed)
        for step in self.steps:
            record[step.feature] = step.value
        return tuple(record)

    def to_json_obj(self, schema: Schema) -> dict:
        feats = schema.features
        return {
            "seed": [feats[i].categories[v] for i, v in enumerate(self.seed)],
            "steps": [
                {
                    "feature": feats[s.feature].name,
                    "key": s.key,
                    "value": feats[s.feature].categories[s.value],
                    "changed": s.changed,
                }
                for s in self.steps
            ],
            "final": [feats[i].categories[v] for i, v in enumerate(self.final)],
        }


def overlay_conditional(
    blocks: BuildingBlocks,
    i: int,
    key: int,
    alpha: float,
    overlay: ResetOverlay | None,
) -> np.ndarray:
    """Conditional for feature i at a key, honoring any reset overlay."""
    if overlay is not None and overlay.is_reset(i, key):
        c = blocks.schema.features[i].n_categories
        return np.full(c, 1.0 / c)
    return conditional(blocks, i, key, alpha)


def _draw(vec: np.ndarray, rng: np.random.Generator) -> int:
    # Inverse CDF with a single uniform variate keeps draws reproducible
    # from the stream position alone.
    cdf = np.cumsum(vec)
    idx = int(np.searchsorted(cdf, rng.random(), side="right"))
    return min(idx, len(vec) - 1)


def _check_seed(seed, schema: Schema) -> list[int]:
    record = [int(v) for v in seed]
    if len(record) != schema.n_features:
        raise DataError(f"seed has {len(record)} values, schema has {schema.n_features}")
    for i, v in enumerate(record):
        if not 0 <= v < schema.features[i].n_categories:
            raise DataError(f"seed value {v} out of range for feature {i}")
    return record


def pegs_sample(
    blocks: BuildingBlocks,
    seed,
    alpha: float,
    rng: np.random.Generator,
    *,
    overlay: ResetOverlay | None = None,
    alpha_resolver: AlphaResolver | None = None,
) -> tuple[np.ndarray, SynthesisTrace]:
    """One synthesis pass: resample every feature in schema order.

    At step i the condition is the record with feature i removed, i.e. the
    already-resampled prefix and the seed's untouched suffix. With an
    ``alpha_resolver`` the prior strength is looked up per (feature, key)
    instead of being constant (the l-diversity path).
    """
    schema = blocks.schema
    record = _check_seed(seed, schema)
    seed_tuple = tuple(record)
    steps = []
    for i in range(schema.n_features):
        cvec = record[:i] + record[i + 1 :]
        key = hash_condition(cvec, blocks.tables[i].hash_spec)
        a = alpha if alpha_resolver is None else alpha_resolver(i, key)
        vec = overlay_conditional(blocks, i, key, a, overlay)
        val = _draw(vec, rng)
        steps.append(TraceStep(feature=i, key=key, value=val, changed=val != record[i]))
        record[i] = val
    final = tuple(record)
    trace = SynthesisTrace(seed=seed_tuple, steps=tuple(steps), final=final)
    return np.asarray(final, dtype=np.int64), trace


def pegs_rs_block(
    blocks: BuildingBlocks,
    seed,
    alpha: float,
    block_size: int,
    rng: np.random.Generator,
    *,
    overlay: ResetOverlay | None = None,
    trace_sink: list | None = None,
) -> list[np.ndarray]:
    """A block of chained passes with reset.

    Pass b is seeded by the output of pass b-1 (the block seed starts the
    chain) and reads conditionals through the overlay; after each pass all
    M visited (feature, key) pairs are marked reset. Pass an empty overlay
    to inspect the visited set afterwards.
    """
    if block_size < 1:
        raise PrivacyError(f"block_size must be >= 1, got {block_size}")
    if not alpha > 0:
        raise PrivacyError("block synthesis requires alpha > 0")
    if overlay is None:
        overlay = ResetOverlay()
    current = seed
    records = []
    for _ in range(block_size):
        rec, trace = pegs_sample(blocks, current, alpha, rng, overlay=overlay)
        overlay.mark((s.feature, s.key) for s in trace.steps)
        if trace_sink is not None:
            trace_sink.append(trace)
        records.append(rec)
        current = rec
    return records


def ldiversity_resolver(blocks: BuildingBlocks, l: float) -> AlphaResolver:
    """Per-(feature, key) prior strengths meeting the entropy target, cached."""
    cache: dict[tuple[int, int], float] = {}

    def resolve(i: int, key: int) -> float:
        hit = cache.get((i, key))
        if hit is None:
            c = blocks.schema.features[i].n_categories
            hit = alpha_for_ldiversity(counts_at(blocks, i, key), l, c)
            cache[(i, key)] = hit
        return hit

    return resolve


def synthesize(
    blocks: BuildingBlocks,
    privacy: PrivacySpec,
    pool: SeedPool,
    n_samples: int,
    n_datasets: int,
    rng_seed: int,
    *,
    trace_sink: list | None = None,
) -> list[Dataset]:
    """Generate ``n_datasets`` independent synthetic datasets of ``n_samples``.

    Every (dataset, item) work unit owns a counter-based substream, so output
    is bitwise reproducible from ``rng_seed`` and units could run in any
    order. Per criterion: "dp" draws each sample from a fresh pool seed;
    "dp-block" chains blocks with reset, discarding the overlay between
    blocks; "ldiv" resolves the prior strength per visited count row.
    """
    if n_samples < 1:
        raise DataError(f"n_samples must be >= 1, got {n_samples}")
    if n_datasets < 1:
        raise DataError(f"n_datasets must be >= 1, got {n_datasets}")
    if privacy.n_features != blocks.schema.n_features:
        raise PrivacyError(
            f"privacy spec sized for {privacy.n_features} features, "
            f"blocks have {blocks.schema.n_features}"
        )
    key = master_key(rng_seed)
    resolver = None
    alpha = None
    if privacy.criterion == L_DIVERSITY:
        resolver = ldiversity_resolver(blocks, privacy.l)
    else:
        alpha = privacy.alpha

    datasets = []
    for k in range(n_datasets):
        if privacy.criterion == DP_BLOCK:
            rows = _synthesize_blocks(blocks, alpha, privacy.block_size, pool,
                                      n_samples, key, k, trace_sink)
        else:
            rows = _synthesize_independent(blocks, alpha, resolver, pool,
                                           n_samples, key, k, trace_sink)
        datasets.append(Dataset(schema=blocks.schema, rows=np.vstack(rows)))
    return datasets


def _synthesize_independent(blocks, alpha, resolver, pool, n_samples, key, k, trace_sink):
    rows = []
    for n in range(n_samples):
        seed = pool.draw(substream(key, PURPOSE_POOL, k, n))
        rec, trace = pegs_sample(
            blocks, seed, alpha, substream(key, PURPOSE_VALUES, k, n),
            alpha_resolver=resolver,
        )
        if trace_sink is not None:
            trace_sink.append(trace)
        rows.append(rec)
    return rows


def _synthesize_blocks(blocks, alpha, block_size, pool, n_samples, key, k, trace_sink):
    rows = []
    n_blocks = math.ceil(n_samples / block_size)
    for j in range(n_blocks):
        seed = pool.draw(substream(key, PURPOSE_POOL, k, j))
        recs = pegs_rs_block(
            blocks, seed, alpha, block_size, substream(key, PURPOSE_VALUES, k, j),
            trace_sink=trace_sink,
        )
        rows.extend(recs)
    return rows[:n_samples]
