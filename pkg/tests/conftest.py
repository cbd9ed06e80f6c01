import numpy as np
import pytest

from pegs.schema import Dataset, FeatureSpec, Schema


@pytest.fixture
def tiny_schema() -> Schema:
    """Three features with cardinalities (2, 3, 2)."""
    return Schema(
        features=(
            FeatureSpec(name="color", categories=("red", "blue")),
            FeatureSpec(name="size", categories=("S", "M", "L")),
            FeatureSpec(name="flag", categories=("no", "yes")),
        )
    )


@pytest.fixture
def tiny_dataset(tiny_schema) -> Dataset:
    rows = np.array(
        [
            [0, 0, 0],
            [0, 1, 1],
            [1, 2, 0],
            [1, 0, 1],
            [0, 0, 0],
            [1, 1, 1],
        ]
    )
    return Dataset(schema=tiny_schema, rows=rows)


@pytest.fixture
def binary3_schema() -> Schema:
    """Three binary features; the DP oracle's enumeration playground."""
    return Schema(
        features=(
            FeatureSpec(name="a", categories=("0", "1")),
            FeatureSpec(name="b", categories=("0", "1")),
            FeatureSpec(name="c", categories=("0", "1")),
        )
    )


def random_dataset(schema: Schema, n: int, seed: int) -> Dataset:
    rng = np.random.default_rng(seed)
    cols = [
        rng.integers(0, f.n_categories, size=n) for f in schema.features
    ]
    return Dataset(schema=schema, rows=np.column_stack(cols))


@pytest.fixture
def make_random_dataset():
    return random_dataset
