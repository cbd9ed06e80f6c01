import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pegs.errors import DataError, SchemaError
from pegs.schema import (
    Dataset,
    FeatureSpec,
    Schema,
    bin_numeric,
    load_csv,
    save_csv,
    validate,
)


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


class TestFeatureSpec:
    def test_rejects_empty_categories(self):
        with pytest.raises(SchemaError):
            FeatureSpec(name="x", categories=())

    def test_rejects_duplicate_labels(self):
        with pytest.raises(SchemaError):
            FeatureSpec(name="x", categories=("a", "a"))

    def test_binned_requires_matching_bins(self):
        with pytest.raises(SchemaError):
            FeatureSpec(
                name="x", categories=("a", "b"), kind="binned-numeric",
                bin_edges=(0.0, 1.0),  # 2 edges need 3 categories
            )

    def test_default_representatives_are_lower_edges(self):
        spec = FeatureSpec(
            name="x", categories=("lo", "a", "b", "hi"), kind="binned-numeric",
            bin_edges=(0.0, 10.0, 20.0),
        )
        assert spec.numeric_representatives == (-10.0, 0.0, 10.0, 20.0)

    def test_representative_length_checked(self):
        with pytest.raises(SchemaError):
            FeatureSpec(name="x", categories=("a", "b"), numeric_representatives=(1.0,))


class TestSchema:
    def test_requires_two_features(self):
        with pytest.raises(SchemaError):
            Schema(features=(FeatureSpec(name="only", categories=("a", "b")),))

    def test_rejects_duplicate_names(self, tiny_schema):
        with pytest.raises(SchemaError):
            Schema(features=(tiny_schema.features[0], tiny_schema.features[0]))

    def test_json_round_trip(self, tmp_path, tiny_schema):
        path = tmp_path / "schema.json"
        tiny_schema.save(path)
        assert Schema.load(path) == tiny_schema

    def test_c_max(self, tiny_schema):
        assert tiny_schema.c_max == 3
        assert tiny_schema.cardinalities == (2, 3, 2)


class TestBinNumeric:
    age_spec = FeatureSpec(
        name="age",
        categories=tuple(f"b{k}" for k in range(18)),
        kind="binned-numeric",
        bin_edges=tuple(float(e) for e in range(0, 85, 5)),
    )

    def test_five_year_bins_representative(self):
        # 57 lands in [55, 60); the default representative is the lower edge.
        k = bin_numeric(57, self.age_spec)
        assert self.age_spec.numeric_representatives[k] == 55.0

    def test_value_on_edge_goes_to_higher_bin(self):
        spec = FeatureSpec(
            name="x", categories=("lo", "mid", "hi"), kind="binned-numeric",
            bin_edges=(0.0, 10.0),
        )
        assert bin_numeric(10.0, spec) == 2
        assert bin_numeric(0.0, spec) == 1

    def test_below_first_edge_clamps_to_zero(self):
        assert bin_numeric(-1, self.age_spec) == 0

    def test_above_last_edge_clamps_to_top(self):
        assert bin_numeric(1e9, self.age_spec) == 17

    def test_nan_rejected(self):
        with pytest.raises(DataError):
            bin_numeric(float("nan"), self.age_spec)

    @given(st.floats(min_value=-50, max_value=150), st.floats(min_value=-50, max_value=150))
    def test_monotone(self, a, b):
        lo, hi = sorted((a, b))
        assert bin_numeric(lo, self.age_spec) <= bin_numeric(hi, self.age_spec)


class TestValidate:
    def test_ok_dataset(self, tiny_dataset):
        assert validate(tiny_dataset) == []

    def test_out_of_range_cell_named(self, tiny_schema):
        ds = Dataset(schema=tiny_schema, rows=np.array([[0, 3, 0]]))
        violations = validate(ds)
        assert len(violations) == 1
        assert "row 0" in violations[0] and "size" in violations[0]

    def test_empty_dataset_valid(self, tiny_schema):
        ds = Dataset(schema=tiny_schema, rows=np.zeros((0, 3), dtype=np.int64))
        assert validate(ds) == []


class TestLoadCsv:
    def test_labels_map_to_indices(self, tmp_path, tiny_schema):
        path = write(
            tmp_path, "d.csv",
            "color,size,flag\nred,S,no\nblue,L,yes\nred,M,no\n",
        )
        ds = load_csv(path, tiny_schema)
        assert ds.rows.tolist() == [[0, 0, 0], [1, 2, 1], [0, 1, 0]]

    def test_header_only_gives_empty_dataset(self, tmp_path, tiny_schema):
        ds = load_csv(write(tmp_path, "d.csv", "color,size,flag\n"), tiny_schema)
        assert ds.n_rows == 0
        assert validate(ds) == []

    def test_unknown_label_names_row_and_column(self, tmp_path, tiny_schema):
        path = write(tmp_path, "d.csv", "color,size,flag\nred,S,no\nPurple,S,no\n")
        with pytest.raises(DataError, match=r"row 1.*color.*Purple"):
            load_csv(path, tiny_schema)

    def test_missing_column_reported(self, tmp_path, tiny_schema):
        path = write(tmp_path, "d.csv", "color,size\nred,S\n")
        with pytest.raises(DataError, match="flag"):
            load_csv(path, tiny_schema)

    def test_missing_token_maps_to_na_category(self, tmp_path):
        schema = Schema(
            features=(
                FeatureSpec(name="x", categories=("a", "NA")),
                FeatureSpec(name="y", categories=("u", "v")),
            )
        )
        ds = load_csv(write(tmp_path, "d.csv", "x,y\n,u\na,v\n"), schema)
        assert ds.rows.tolist() == [[1, 0], [0, 1]]

    def test_missing_token_without_na_category_fails(self, tmp_path, tiny_schema):
        path = write(tmp_path, "d.csv", "color,size,flag\n,S,no\n")
        with pytest.raises(DataError, match="NA"):
            load_csv(path, tiny_schema)

    def test_numeric_fallback_for_binned_feature(self, tmp_path):
        schema = Schema(
            features=(
                FeatureSpec(
                    name="age", categories=("young", "old"), kind="binned-numeric",
                    bin_edges=(40.0,),
                ),
                FeatureSpec(name="y", categories=("u", "v")),
            )
        )
        ds = load_csv(write(tmp_path, "d.csv", "age,y\n17,u\nold,v\n63,u\n"), schema)
        assert ds.rows[:, 0].tolist() == [0, 1, 1]

    def test_alternate_delimiter(self, tmp_path, tiny_schema):
        path = write(tmp_path, "d.csv", "color;size;flag\nred;S;no\n")
        ds = load_csv(path, tiny_schema, delimiter=";")
        assert ds.rows.tolist() == [[0, 0, 0]]

    def test_headerless(self, tmp_path, tiny_schema):
        path = write(tmp_path, "d.csv", "red,S,no\nblue,M,yes\n")
        ds = load_csv(path, tiny_schema, header=False)
        assert ds.rows.tolist() == [[0, 0, 0], [1, 1, 1]]

    def test_loaded_dataset_always_validates(self, tmp_path, tiny_schema):
        path = write(tmp_path, "d.csv", "color,size,flag\nblue,L,yes\n")
        assert validate(load_csv(path, tiny_schema)) == []


class TestRoundTrip:
    def test_save_then_load_identical(self, tmp_path, tiny_dataset):
        path = tmp_path / "out.csv"
        save_csv(tiny_dataset, path)
        again = load_csv(path, tiny_dataset.schema)
        assert np.array_equal(again.rows, tiny_dataset.rows)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 40), st.integers(0, 2**32 - 1))
    def test_round_trip_random(self, n, seed):
        import tempfile

        from tests.conftest import random_dataset

        schema = Schema(
            features=(
                FeatureSpec(name="a", categories=("x", "y", "z")),
                FeatureSpec(name="b", categories=("0", "1")),
            )
        )
        ds = random_dataset(schema, n, seed)
        with tempfile.TemporaryDirectory() as td:
            path = f"{td}/d.csv"
            save_csv(ds, path)
            assert np.array_equal(load_csv(path, schema).rows, ds.rows)


class TestDataset:
    def test_rows_read_only(self, tiny_dataset):
        with pytest.raises(ValueError):
            tiny_dataset.rows[0, 0] = 1

    def test_shape_checked(self, tiny_schema):
        with pytest.raises(DataError):
            Dataset(schema=tiny_schema, rows=np.zeros((2, 2), dtype=np.int64))
