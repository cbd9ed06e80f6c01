"""Compress a conditioning vector to a small integer key.

The condition on feature i (all other features) is ordered by descending
mutual information with i, split into a head of the m most informative
features and a tail of the rest. The head is encoded exactly in mixed radix;
the tail is folded into a single bit. The resulting key space is at most
2 * prod(head cardinalities), far below the full product of cardinalities.

The tail bit comes from a pinned 64-bit mixer (the splitmix64 finalizer
constants) folded over (position, value) pairs, so keys are stable across
runs, platforms, and the scalar/vectorized code paths.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from pegs.errors import SchemaError
from pegs.schema import Dataset

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB

_U_GOLDEN = np.uint64(_GOLDEN)
_U_MIX1 = np.uint64(_MIX1)
_U_MIX2 = np.uint64(_MIX2)
_U1, _U2 = np.uint64(1), np.uint64(2)
_U27, _U30, _U31, _U32 = np.uint64(27), np.uint64(30), np.uint64(31), np.uint64(32)

# Keys must stay exact in both int64 and the wrapping uint64 vector path.
_MAX_KEY_SPACE = 1 << 62


def _mix64(z: int) -> int:
    z &= _MASK64
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK64
    return z ^ (z >> 31)


def _mix64_u64(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> _U30)) * _U_MIX1
    z = (z ^ (z >> _U27)) * _U_MIX2
    return z ^ (z >> _U31)


def one_bit_tail(values: Iterable[int]) -> int:
    """Fold a sequence of category indices into one stable bit.

    Each (position, value) pair is absorbed as mix64((h + GOLDEN) ^
    (position << 32 | value)); the result is the low bit of the final state.
    An empty sequence yields 0.
    """
    h = 0
    for pos, v in enumerate(values):
        h = _mix64(((h + _GOLDEN) & _MASK64) ^ ((pos << 32) | int(v)))
    return h & 1


def _tail_bits(columns: Sequence[np.ndarray]) -> np.ndarray:
    """Vectorized one_bit_tail over per-position column arrays."""
    n = columns[0].shape[0] if columns else 0
    h = np.zeros(n, dtype=np.uint64)
    for pos, col in enumerate(columns):
        tok = (np.uint64(pos) << _U32) | col.astype(np.uint64)
        h = _mix64_u64((h + _U_GOLDEN) ^ tok)
    return h & _U1


@dataclass(frozen=True)
class HashSpec:
    """Frozen recipe for hashing the condition on one target feature.

    ``ordering`` is a permutation of the other feature indices, sorted by
    descending mutual information with the target (ties broken by ascending
    index). The first ``m`` ordered features form the exact mixed-radix head
    with per-feature radices ``radices``; any remaining features feed the
    one-bit tail.
    """

    target: int
    ordering: tuple[int, ...]
    m: int
    radices: tuple[int, ...]
    key_space: int
    _head_slots: tuple[int, ...] = field(init=False, repr=False, compare=False)
    _tail_slots: tuple[int, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "ordering", tuple(int(f) for f in self.ordering))
        object.__setattr__(self, "radices", tuple(int(c) for c in self.radices))
        if not 1 <= self.m <= len(self.ordering):
            raise SchemaError(f"m={self.m} out of range for {len(self.ordering)} features")
        if len(self.radices) != self.m:
            raise SchemaError("radices must cover exactly the head features")
        if self.key_space > _MAX_KEY_SPACE:
            raise SchemaError(f"key space {self.key_space} too large (max {_MAX_KEY_SPACE})")
        # Slot of feature f inside the length M-1 condition vector x_{-target}.
        slots = tuple((f if f < self.target else f - 1) for f in self.ordering)
        object.__setattr__(self, "_head_slots", slots[: self.m])
        object.__setattr__(self, "_tail_slots", slots[self.m :])

    @property
    def has_tail(self) -> bool:
        return self.m < len(self.ordering)

    def to_json_obj(self) -> dict:
        return {
            "target": self.target,
            "ordering": list(self.ordering),
            "m": self.m,
            "radices": list(self.radices),
            "key_space": self.key_space,
        }

    @classmethod
    def from_json_obj(cls, obj: dict) -> "HashSpec":
        return cls(
            target=int(obj["target"]),
            ordering=tuple(obj["ordering"]),
            m=int(obj["m"]),
            radices=tuple(obj["radices"]),
            key_space=int(obj["key_space"]),
        )


def mutual_information(dataset: Dataset, i: int, j: int) -> float:
    """Plug-in mutual information (nats) between two features' empirical laws."""
    if i == j:
        raise ValueError("mutual information requires two distinct features")
    if dataset.n_rows < 1:
        raise ValueError("mutual information needs at least one row")
    ci = dataset.schema.features[i].n_categories
    cj = dataset.schema.features[j].n_categories
    joint = np.bincount(dataset.rows[:, i] * cj + dataset.rows[:, j], minlength=ci * cj)
    joint = joint.reshape(ci, cj).astype(np.float64)
    pxy = joint / joint.sum()
    px = pxy.sum(axis=1, keepdims=True)
    py = pxy.sum(axis=0, keepdims=True)
    mask = pxy > 0
    ratio = pxy[mask] / (px @ py)[mask]
    return float(np.sum(pxy[mask] * np.log(ratio)))


def build_hash_spec(dataset: Dataset, i: int, m: int) -> HashSpec:
    """Order the other features by MI with feature i and fix the head size.

    ``m`` is clamped to M-1 (a two-feature schema always hashes its single
    conditioning feature exactly); m < 1 is an error.
    """
    n_feat = dataset.schema.n_features
    if m < 1:
        raise SchemaError(f"m must be >= 1, got {m}")
    m_eff = min(m, n_feat - 1)
    others = [j for j in range(n_feat) if j != i]
    scored = sorted(others, key=lambda j: (-mutual_information(dataset, i, j), j))
    radices = tuple(dataset.schema.features[f].n_categories for f in scored[:m_eff])
    space = int(np.prod(radices, dtype=object))
    if m_eff < len(scored):
        space *= 2
    return HashSpec(target=i, ordering=tuple(scored), m=m_eff, radices=radices, key_space=space)


def hash_condition(x_minus_i: Sequence[int], spec: HashSpec) -> int:
    """Hash one condition vector (the record with the target removed) to a key."""
    key = 0
    for s, c in zip(spec._head_slots, spec.radices):
        key = key * c + int(x_minus_i[s])
    if spec.has_tail:
        key = key * 2 + one_bit_tail(int(x_minus_i[s]) for s in spec._tail_slots)
    return key


def hash_keys(rows: np.ndarray, spec: HashSpec) -> np.ndarray:
    """Hash every full row's condition on the target feature, vectorized.

    Takes complete rows (N x M); the target column is simply skipped, which
    matches dropping it from each condition vector.
    """
    n = rows.shape[0]
    key = np.zeros(n, dtype=np.uint64)
    for f, c in zip(spec.ordering[: spec.m], spec.radices):
        key = key * np.uint64(c) + rows[:, f].astype(np.uint64)
    if spec.has_tail:
        bits = _tail_bits([rows[:, f] for f in spec.ordering[spec.m :]])
        key = key * _U2 + bits
    return key.astype(np.int64)
