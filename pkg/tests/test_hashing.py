import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pegs.errors import SchemaError
from pegs.hashing import (
    HashSpec,
    build_hash_spec,
    hash_condition,
    hash_keys,
    mutual_information,
    one_bit_tail,
)
from pegs.schema import Dataset, FeatureSpec, Schema
from tests.conftest import random_dataset


def reference_tail_bit(values):
    """Independent splitmix64-based re-implementation pinning the tail contract."""
    mask = (1 << 64) - 1

    def mix(z):
        z &= mask
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & mask
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & mask
        return z ^ (z >> 31)

    h = 0
    for pos, v in enumerate(values):
        h = mix(((h + 0x9E3779B97F4A7C15) & mask) ^ ((pos << 32) | v))
    return h & 1


class TestMutualInformation:
    def test_copy_feature_gives_entropy(self, tiny_schema):
        col = np.array([0, 0, 1, 1, 1, 0])
        rows = np.column_stack([col, col, np.zeros(6, dtype=int)])
        ds = Dataset(schema=tiny_schema, rows=rows)
        p = np.bincount(col) / 6
        entropy = -np.sum(p * np.log(p))
        assert mutual_information(ds, 0, 1) == pytest.approx(entropy, abs=1e-12)

    def test_exact_product_dataset_gives_zero(self, tiny_schema):
        rows = [[a, b, 0] for a in range(2) for b in range(3)]
        ds = Dataset(schema=tiny_schema, rows=np.array(rows))
        assert mutual_information(ds, 0, 1) == pytest.approx(0.0, abs=1e-14)

    def test_2x2_counts_against_exact_fraction_oracle(self):
        # Joint counts [[2, 1], [1, 2]] over 6 rows; expected value computed
        # by direct summation over the four joint cells with exact fractions.
        schema = Schema(
            features=(
                FeatureSpec(name="a", categories=("0", "1")),
                FeatureSpec(name="b", categories=("0", "1")),
            )
        )
        rows = [[0, 0]] * 2 + [[0, 1]] + [[1, 0]] + [[1, 1]] * 2
        ds = Dataset(schema=schema, rows=np.array(rows))
        joint = [[Fraction(2, 6), Fraction(1, 6)], [Fraction(1, 6), Fraction(2, 6)]]
        expected = 0.0
        for a in range(2):
            for b in range(2):
                pab = joint[a][b]
                pa = joint[a][0] + joint[a][1]
                pb = joint[0][b] + joint[1][b]
                expected += float(pab) * math.log(float(pab) / float(pa * pb))
        assert mutual_information(ds, 0, 1) == pytest.approx(expected, abs=1e-12)

    def test_symmetry(self, tiny_schema):
        for seed in range(5):
            ds = random_dataset(tiny_schema, 30, seed)
            assert mutual_information(ds, 0, 2) == pytest.approx(
                mutual_information(ds, 2, 0), abs=1e-12
            )

    def test_requires_distinct_features(self, tiny_dataset):
        with pytest.raises(ValueError):
            mutual_information(tiny_dataset, 1, 1)


class TestBuildHashSpec:
    def test_two_features_forces_m_one(self):
        schema = Schema(
            features=(
                FeatureSpec(name="a", categories=("0", "1")),
                FeatureSpec(name="b", categories=("x", "y", "z")),
            )
        )
        ds = random_dataset(schema, 10, 0)
        spec = build_hash_spec(ds, 0, m=5)
        assert spec.m == 1
        assert spec.ordering == (1,)
        assert not spec.has_tail
        assert spec.key_space == 3

    def test_ordering_follows_mutual_information(self, tiny_schema):
        # Feature 2 copies feature 0; feature 1 is noise, so MI(0,2) > MI(0,1)
        # and the ordering must put feature 2 first.
        rng = np.random.default_rng(3)
        col = rng.integers(0, 2, 60)
        rows = np.column_stack([col, rng.integers(0, 3, 60), col])
        ds = Dataset(schema=tiny_schema, rows=rows)
        assert mutual_information(ds, 0, 2) > mutual_information(ds, 0, 1)
        spec = build_hash_spec(ds, 0, m=1)
        assert spec.ordering == (2, 1)

    def test_constant_dataset_breaks_ties_ascending(self, tiny_schema):
        ds = Dataset(schema=tiny_schema, rows=np.zeros((4, 3), dtype=int))
        spec = build_hash_spec(ds, 1, m=1)
        assert spec.ordering == (0, 2)

    def test_m_zero_rejected(self, tiny_dataset):
        with pytest.raises(SchemaError):
            build_hash_spec(tiny_dataset, 0, m=0)


class TestOneBitTail:
    def test_empty_vector_is_zero(self):
        assert one_bit_tail([]) == 0

    def test_deterministic(self):
        assert one_bit_tail([3, 1, 4]) == one_bit_tail([3, 1, 4])

    def test_pinned_value_matches_reference(self):
        # The mixing function is pinned; an independent re-implementation
        # must agree on arbitrary sequences.
        assert one_bit_tail([3, 1, 4]) == reference_tail_bit([3, 1, 4])
        assert one_bit_tail([3, 1, 4]) == 0  # frozen once, stays forever
        assert one_bit_tail([7, 7, 7]) == reference_tail_bit([7, 7, 7]) == 1

    @given(st.lists(st.integers(0, 30), max_size=8))
    def test_matches_reference_everywhere(self, values):
        assert one_bit_tail(values) == reference_tail_bit(values)


class TestHashCondition:
    def test_zero_vector_no_tail_gives_zero(self, tiny_dataset):
        spec = build_hash_spec(tiny_dataset, 0, m=2)  # m = M-1, no tail
        assert not spec.has_tail
        assert hash_condition([0, 0], spec) == 0

    def test_equal_inputs_equal_keys(self, tiny_dataset):
        spec = build_hash_spec(tiny_dataset, 0, m=1)
        assert hash_condition([2, 1], spec) == hash_condition([2, 1], spec)

    def test_key_space_bound_paper_sizes(self):
        # Two head features of 25 categories each: key space is at most
        # 2 * 25^2 = 1250.
        schema = Schema(
            features=tuple(
                FeatureSpec(name=f"f{i}", categories=tuple(str(c) for c in range(25)))
                for i in range(4)
            )
        )
        ds = random_dataset(schema, 100, 1)
        spec = build_hash_spec(ds, 0, m=2)
        assert spec.has_tail
        assert spec.key_space <= 2 * 25**2

    def test_tail_change_flips_at_most_low_bit(self, tiny_schema):
        ds = random_dataset(tiny_schema, 50, 2)
        spec = build_hash_spec(ds, 0, m=1)
        assert spec.has_tail
        tail_slot = spec._tail_slots[0]
        base = [1, 1]
        other = list(base)
        other[tail_slot] = 0
        k1, k2 = hash_condition(base, spec), hash_condition(other, spec)
        assert k1 >> 1 == k2 >> 1

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.integers(1, 3), st.integers(1, 60))
    def test_keys_in_range_and_match_vectorized(self, seed, m, n):
        schema = Schema(
            features=(
                FeatureSpec(name="a", categories=("0", "1", "2")),
                FeatureSpec(name="b", categories=("0", "1")),
                FeatureSpec(name="c", categories=("0", "1", "2", "3")),
                FeatureSpec(name="d", categories=("0", "1")),
            )
        )
        ds = random_dataset(schema, n, seed)
        for target in range(4):
            spec = build_hash_spec(ds, target, m)
            vector_keys = hash_keys(ds.rows, spec)
            for r in range(ds.n_rows):
                row = ds.rows[r]
                cvec = np.delete(row, target)
                key = hash_condition(cvec, spec)
                assert 0 <= key < spec.key_space
                assert key == vector_keys[r]


class TestHashSpecSerialization:
    def test_round_trip(self, tiny_dataset):
        spec = build_hash_spec(tiny_dataset, 1, m=1)
        again = HashSpec.from_json_obj(spec.to_json_obj())
        assert again == spec
