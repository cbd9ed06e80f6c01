"""Dataset schema, CSV ingestion, numeric binning, and validation.

A Schema is an ordered list of features; every feature has a fixed category
vocabulary. A Dataset stores rows as a dense integer matrix of category
indices against its schema. Both are immutable after construction and safe
for concurrent reads.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from pegs.errors import DataError, SchemaError

KIND_CATEGORICAL = "categorical"
KIND_BINNED = "binned-numeric"
MISSING_CATEGORY = "NA"


@dataclass(frozen=True)
class FeatureSpec:
    """One column: its label vocabulary and optional numeric structure.

    For kind="binned-numeric", ``bin_edges`` are ascending cut points and the
    number of categories must equal ``len(bin_edges) + 1`` (one bin below the
    first edge, one at/above the last). ``numeric_representatives`` maps each
    category to a real value so downstream consumers can treat the feature
    as numeric; it defaults to bin lower edges (the below-first-edge bin gets
    the first edge minus one bin width). Categorical features may also carry
    representatives when something numeric (a regression, an attack) needs
    them.
    """

    name: str
    categories: tuple[str, ...]
    kind: str = KIND_CATEGORICAL
    bin_edges: tuple[float, ...] | None = None
    numeric_representatives: tuple[float, ...] | None = None
    _index: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if not self.categories:
            raise SchemaError(f"feature {self.name!r}: categories must be non-empty")
        if len(set(self.categories)) != len(self.categories):
            raise SchemaError(f"feature {self.name!r}: duplicate category labels")
        if self.kind not in (KIND_CATEGORICAL, KIND_BINNED):
            raise SchemaError(f"feature {self.name!r}: unknown kind {self.kind!r}")
        object.__setattr__(self, "categories", tuple(str(c) for c in self.categories))
        if self.kind == KIND_BINNED:
            if not self.bin_edges:
                raise SchemaError(f"feature {self.name!r}: binned-numeric requires bin_edges")
            edges = tuple(float(e) for e in self.bin_edges)
            if any(b <= a for a, b in zip(edges, edges[1:])):
                raise SchemaError(f"feature {self.name!r}: bin_edges must be strictly ascending")
            if len(self.categories) != len(edges) + 1:
                raise SchemaError(
                    f"feature {self.name!r}: {len(self.categories)} categories but "
                    f"{len(edges)} edges (need len(bin_edges)+1 categories)"
                )
            object.__setattr__(self, "bin_edges", edges)
            if self.numeric_representatives is None:
                object.__setattr__(self, "numeric_representatives", _default_representatives(edges))
        elif self.bin_edges is not None:
            raise SchemaError(f"feature {self.name!r}: bin_edges only valid for binned-numeric")
        if self.numeric_representatives is not None:
            reps = tuple(float(r) for r in self.numeric_representatives)
            if len(reps) != len(self.categories):
                raise SchemaError(
                    f"feature {self.name!r}: numeric_representatives length "
                    f"{len(reps)} != {len(self.categories)} categories"
                )
            object.__setattr__(self, "numeric_representatives", reps)
        object.__setattr__(self, "_index", {c: k for k, c in enumerate(self.categories)})

    @property
    def n_categories(self) -> int:
        return len(self.categories)

    def index_of(self, label: str) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise DataError(f"feature {self.name!r}: unknown category label {label!r}") from None


def _default_representatives(edges: tuple[float, ...]) -> tuple[float, ...]:
    # Bin k >= 1 is [edges[k-1], edges[k]); its representative is the lower
    # edge. The clamp-low bin has no lower edge, so step one bin width down.
    if len(edges) >= 2:
        below = edges[0] - (edges[1] - edges[0])
    else:
        below = edges[0] - 1.0
    return (below,) + edges


@dataclass(frozen=True)
class Schema:
    """Ordered feature list; the column contract for every dataset."""

    features: tuple[FeatureSpec, ...]
    _by_name: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "features", tuple(self.features))
        names = [f.name for f in self.features]
        if len(set(names)) != len(names):
            raise SchemaError("feature names must be unique")
        if len(names) < 2:
            raise SchemaError("a schema needs at least 2 features")
        object.__setattr__(self, "_by_name", {n: i for i, n in enumerate(names)})

    @property
    def n_features(self) -> int:
        return len(self.features)

    @property
    def cardinalities(self) -> tuple[int, ...]:
        return tuple(f.n_categories for f in self.features)

    @property
    def c_max(self) -> int:
        return max(self.cardinalities)

    def feature_index(self, name: str) -> int:
        try:
            return self._by_name[name]
        except KeyError:
            raise SchemaError(f"no feature named {name!r}") from None

    def to_json_obj(self) -> dict:
        out = []
        for f in self.features:
            entry: dict = {"name": f.name, "kind": f.kind, "categories": list(f.categories)}
            if f.bin_edges is not None:
                entry["bin_edges"] = list(f.bin_edges)
            if f.numeric_representatives is not None:
                entry["numeric_representatives"] = list(f.numeric_representatives)
            out.append(entry)
        return {"features": out}

    @classmethod
    def from_json_obj(cls, obj: dict) -> "Schema":
        if not isinstance(obj, dict) or "features" not in obj:
            raise SchemaError("schema JSON must have a top-level 'features' array")
        feats = []
        for entry in obj["features"]:
            try:
                feats.append(
                    FeatureSpec(
                        name=entry["name"],
                        categories=tuple(entry["categories"]),
                        kind=entry.get("kind", KIND_CATEGORICAL),
                        bin_edges=tuple(entry["bin_edges"]) if entry.get("bin_edges") else None,
                        numeric_representatives=(
                            tuple(entry["numeric_representatives"])
                            if entry.get("numeric_representatives")
                            else None
                        ),
                    )
                )
            except KeyError as exc:
                raise SchemaError(f"schema feature entry missing field {exc}") from None
        return cls(features=tuple(feats))

    def save(self, path: str | os.PathLike) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json_obj(), fh, indent=2)
            fh.write("\n")

    @classmethod
    def load(cls, path: str | os.PathLike) -> "Schema":
        with open(path, "r", encoding="utf-8") as fh:
            try:
                obj = json.load(fh)
            except json.JSONDecodeError as exc:
                raise SchemaError(f"schema file {path}: invalid JSON ({exc})") from None
        return cls.from_json_obj(obj)


@dataclass(frozen=True)
class Dataset:
    """An N x M matrix of category indices tied to a schema.

    The row matrix is made read-only at construction; treat datasets as
    immutable values.
    """

    schema: Schema
    rows: np.ndarray

    def __post_init__(self) -> None:
        arr = np.array(self.rows, dtype=np.int64, copy=True, order="C")
        if arr.ndim != 2 or arr.shape[1] != self.schema.n_features:
            raise DataError(
                f"rows must be N x {self.schema.n_features}, got shape {arr.shape}"
            )
        arr.flags.writeable = False
        object.__setattr__(self, "rows", arr)

    @property
    def n_rows(self) -> int:
        return int(self.rows.shape[0])

    def column(self, i: int) -> np.ndarray:
        return self.rows[:, i]


def bin_numeric(value: float, spec: FeatureSpec) -> int:
    """Map a real value to its bin index under half-open [lo, hi) intervals.

    Values below the first edge clamp to bin 0; values at or above the last
    edge clamp to the top bin. A value exactly on an edge belongs to the
    higher bin.
    """
    if spec.kind != KIND_BINNED:
        raise SchemaError(f"feature {spec.name!r} is not binned-numeric")
    v = float(value)
    if math.isnan(v):
        raise DataError(f"feature {spec.name!r}: cannot bin NaN")
    # edges e_1..e_E partition the line into E+1 bins; searchsorted with
    # side='right' sends a value equal to an edge into the higher bin.
    return int(np.searchsorted(np.asarray(spec.bin_edges), v, side="right"))


def validate(dataset: Dataset) -> list[str]:
    """Return human-readable invariant violations; empty list means valid."""
    violations: list[str] = []
    rows = dataset.rows
    for i, feat in enumerate(dataset.schema.features):
        col = rows[:, i]
        bad = np.nonzero((col < 0) | (col >= feat.n_categories))[0]
        for r in bad[:100]:
            violations.append(
                f"row {int(r)}, column {feat.name!r}: index {int(col[r])} "
                f"outside [0, {feat.n_categories})"
            )
        if bad.size > 100:
            violations.append(f"column {feat.name!r}: {bad.size - 100} further violations")
    return violations


def load_csv(
    path: str | os.PathLike,
    schema: Schema,
    *,
    delimiter: str = ",",
    header: bool = True,
    missing_token: str = "",
) -> Dataset:
    """Read a delimited text file into a Dataset of category indices.

    With a header row, columns are matched by name and extra columns are
    ignored; without one, the file must have exactly the schema's columns in
    schema order. Cells equal to ``missing_token`` map to the feature's "NA"
    category when it declares one, and are an error otherwise. Cells of
    binned-numeric features may be either category labels or raw numbers;
    raw numbers are binned.
    """
    try:
        frame = pd.read_csv(
            path,
            sep=delimiter,
            header=0 if header else None,
            dtype=str,
            keep_default_na=False,
            skip_blank_lines=True,
        )
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as exc:
        raise DataError(f"{path}: cannot parse as delimited text ({exc})") from None

    if header:
        missing_cols = [f.name for f in schema.features if f.name not in frame.columns]
        if missing_cols:
            raise DataError(f"{path}: columns missing from CSV: {missing_cols}")
        columns = [frame[f.name] for f in schema.features]
    else:
        if frame.shape[1] != schema.n_features:
            raise DataError(
                f"{path}: expected {schema.n_features} columns, found {frame.shape[1]}"
            )
        columns = [frame.iloc[:, i] for i in range(schema.n_features)]

    n = len(frame)
    out = np.empty((n, schema.n_features), dtype=np.int64)
    for i, feat in enumerate(schema.features):
        raw = columns[i].to_numpy(dtype=object)
        mapped = _map_column(raw, feat, missing_token, path)
        out[:, i] = mapped
    return Dataset(schema=schema, rows=out)


def _map_column(raw: np.ndarray, feat: FeatureSpec, missing_token: str, path) -> np.ndarray:
    lut = feat._index
    na_index = lut.get(MISSING_CATEGORY)
    mapped = np.empty(raw.shape[0], dtype=np.int64)
    for r, cell in enumerate(raw):
        label = str(cell)
        idx = lut.get(label)
        if idx is None:
            if label == missing_token:
                if na_index is None:
                    raise DataError(
                        f"{path}: row {r}, column {feat.name!r}: missing value but "
                        f"no {MISSING_CATEGORY!r} category declared"
                    )
                idx = na_index
            elif feat.kind == KIND_BINNED:
                try:
                    idx = bin_numeric(float(label), feat)
                except (ValueError, DataError):
                    raise DataError(
                        f"{path}: row {r}, column {feat.name!r}: "
                        f"unknown category label {label!r}"
                    ) from None
            else:
                raise DataError(
                    f"{path}: row {r}, column {feat.name!r}: unknown category label {label!r}"
                )
        mapped[r] = idx
    return mapped


def save_csv(dataset: Dataset, path: str | os.PathLike, *, delimiter: str = ",") -> None:
    """Write a Dataset back to labels, one header row then one row per record."""
    data = {}
    for i, feat in enumerate(dataset.schema.features):
        labels = np.asarray(feat.categories, dtype=object)
        data[feat.name] = labels[dataset.rows[:, i]]
    frame = pd.DataFrame(data, columns=[f.name for f in dataset.schema.features])
    frame.to_csv(path, sep=delimiter, index=False, lineterminator="\n")
