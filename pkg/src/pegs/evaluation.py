"""Utility distances, multi-dataset combining rules, and simulated attacks.

Utility compares a synthetic dataset to the original: squared differences
of marginal and conditional category frequencies, and relative deviations
of regression coefficients fitted on both. Risk is probed from the other
side: modal/mean inference attacks conditioned on quasi-identifiers, and
population uniqueness. Results are collected per (algorithm, epsilon) into
reports that flatten to a long-format risk-utility table.
"""

from __future__ import annotations

import csv
import json
import math
import os
import warnings
from dataclasses import dataclass, field

import numpy as np

from pegs.errors import DataError
from pegs.schema import Dataset, FeatureSpec

_NEAR_ZERO = 1e-12


def empirical_marginal(dataset: Dataset, i: int) -> np.ndarray:
    if dataset.n_rows == 0:
        raise DataError("empty dataset has no marginal")
    c = dataset.schema.features[i].n_categories
    return np.bincount(dataset.rows[:, i], minlength=c) / dataset.n_rows


def marginal_distance(orig: Dataset, synth: Dataset, i: int) -> float:
    """Sum of squared marginal frequency differences for one feature."""
    _check_pair(orig, synth)
    diff = empirical_marginal(synth, i) - empirical_marginal(orig, i)
    return float(np.sum(diff * diff))


def conditional_distance(orig: Dataset, synth: Dataset, i: int, j: int) -> float:
    """Squared conditional-law differences of feature i given feature j.

    Conditioning categories unseen in either dataset contribute 0, keeping
    the metric finite and comparable across perturbation levels.
    """
    _check_pair(orig, synth)
    if i == j:
        raise DataError("conditional distance needs distinct features")
    ci = orig.schema.features[i].n_categories
    cj = orig.schema.features[j].n_categories
    joint_o = _joint_counts(orig, i, j, ci, cj)
    joint_s = _joint_counts(synth, i, j, ci, cj)
    tot_o = joint_o.sum(axis=0)
    tot_s = joint_s.sum(axis=0)
    seen = (tot_o > 0) & (tot_s > 0)
    if not np.any(seen):
        return 0.0
    cond_o = joint_o[:, seen] / tot_o[seen]
    cond_s = joint_s[:, seen] / tot_s[seen]
    return float(np.sum((cond_s - cond_o) ** 2))


def _joint_counts(dataset: Dataset, i: int, j: int, ci: int, cj: int) -> np.ndarray:
    flat = np.bincount(dataset.rows[:, i] * cj + dataset.rows[:, j], minlength=ci * cj)
    return flat.reshape(ci, cj).astype(np.float64)


def _check_pair(orig: Dataset, synth: Dataset) -> None:
    if orig.n_rows == 0 or synth.n_rows == 0:
        raise DataError("distances need non-empty datasets")
    if orig.schema.cardinalities != synth.schema.cardinalities:
        raise DataError("datasets must share a schema")


# ---------------------------------------------------------------------------
# Regression comparison
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RegressionSpec:
    """A model fitted on both datasets so coefficients can be compared.

    Predictors are (feature name, as_numeric) pairs: numeric predictors map
    categories through their representatives, categorical ones one-hot with
    the first category dropped. Linear targets use the target feature's
    representatives; logistic targets are the indicator rep(target) >
    threshold (or the raw 0/1 index of a binary feature when no threshold
    is given).
    """

    kind: str
    target: str
    predictors: tuple[tuple[str, bool], ...]
    threshold: float | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("linear", "logistic"):
            raise DataError(f"unknown regression kind {self.kind!r}")
        object.__setattr__(
            self, "predictors", tuple((str(n), bool(a)) for n, a in self.predictors)
        )

    def label(self) -> str:
        return f"{self.kind}:{self.target}"

    def to_json_obj(self) -> dict:
        return {
            "kind": self.kind,
            "target": self.target,
            "threshold": self.threshold,
            "predictors": [[n, a] for n, a in self.predictors],
        }

    @classmethod
    def from_json_obj(cls, obj: dict) -> "RegressionSpec":
        return cls(
            kind=obj["kind"],
            target=obj["target"],
            predictors=tuple((n, bool(a)) for n, a in obj["predictors"]),
            threshold=obj.get("threshold"),
        )


def _representatives(feat: FeatureSpec) -> np.ndarray:
    if feat.numeric_representatives is None:
        raise DataError(f"feature {feat.name!r} has no numeric representatives")
    return np.asarray(feat.numeric_representatives, dtype=np.float64)


def design_matrix(dataset: Dataset, spec: RegressionSpec) -> tuple[np.ndarray, np.ndarray]:
    """Intercept-first design matrix and target vector for a regression spec."""
    schema = dataset.schema
    cols = [np.ones(dataset.n_rows)]
    for name, as_numeric in spec.predictors:
        f = schema.feature_index(name)
        feat = schema.features[f]
        if name == spec.target:
            raise DataError("target cannot be one of the predictors")
        values = dataset.rows[:, f]
        if as_numeric:
            cols.append(_representatives(feat)[values])
        else:
            for cat in range(1, feat.n_categories):
                cols.append((values == cat).astype(np.float64))
    x = np.column_stack(cols)
    t = schema.feature_index(spec.target)
    t_feat = schema.features[t]
    t_values = dataset.rows[:, t]
    if spec.kind == "linear":
        y = _representatives(t_feat)[t_values]
    elif spec.threshold is not None:
        y = (_representatives(t_feat)[t_values] > spec.threshold).astype(np.float64)
    else:
        if t_feat.n_categories != 2:
            raise DataError("logistic target without threshold must be binary")
        y = t_values.astype(np.float64)
    return x, y


_JITTER = 1e-8


def fit_regression(dataset: Dataset, spec: RegressionSpec) -> np.ndarray:
    """Least squares (linear) or ridge-jittered Newton (logistic) coefficients."""
    x, y = design_matrix(dataset, spec)
    if spec.kind == "linear":
        xtx = x.T @ x + _JITTER * np.eye(x.shape[1])
        return np.linalg.solve(xtx, x.T @ y)
    return _fit_logistic(x, y)


def _fit_logistic(x: np.ndarray, y: np.ndarray, tol: float = 1e-8,
                  max_iter: int = 100) -> np.ndarray:
    n, d = x.shape
    beta = np.zeros(d)
    eye = np.eye(d)

    def loglik(b):
        z = x @ b
        return float(np.sum(y * z - np.logaddexp(0.0, z)) / n - 0.5 * _JITTER * b @ b)

    best = beta
    for _ in range(max_iter):
        z = x @ beta
        p = 1.0 / (1.0 + np.exp(-z))
        grad = x.T @ (y - p) / n - _JITTER * beta
        if np.linalg.norm(grad) <= tol:
            return beta
        w = p * (1.0 - p)
        hess = (x * w[:, None]).T @ x / n + _JITTER * eye
        step = np.linalg.solve(hess, grad)
        ll0 = loglik(beta)
        scale = 1.0
        while scale > 1e-8 and loglik(beta + scale * step) < ll0:
            scale *= 0.5
        beta = beta + scale * step
        best = beta
    warnings.warn(
        "logistic fit did not reach the gradient tolerance "
        "(possible separation); returning best iterate",
        stacklevel=2,
    )
    return best


def regression_distance(beta_synth: np.ndarray, beta_orig: np.ndarray) -> float:
    """Sum of absolute relative coefficient deviations.

    Terms whose original coefficient is within 1e-12 of zero are skipped
    with a warning (the relative deviation is undefined there).
    """
    beta_synth = np.asarray(beta_synth, dtype=np.float64)
    beta_orig = np.asarray(beta_orig, dtype=np.float64)
    if beta_synth.shape != beta_orig.shape:
        raise DataError(
            f"coefficient layouts differ: {beta_synth.shape} vs {beta_orig.shape}"
        )
    usable = np.abs(beta_orig) > _NEAR_ZERO
    if not np.all(usable):
        warnings.warn(
            f"skipping {int((~usable).sum())} coefficient(s) with near-zero "
            "original value",
            stacklevel=2,
        )
    if not np.any(usable):
        return 0.0
    rel = (beta_synth[usable] - beta_orig[usable]) / beta_orig[usable]
    return float(np.sum(np.abs(rel)))


def combine_estimates(q, v) -> tuple[float, float]:
    """Point estimate and variance estimator across K synthetic analyses.

    Returns (mean of the q_i, (1 + 1/K) * between-variance - mean of the
    v_i). The variance estimator can come out negative; it is reported
    as-is with a warning.
    """
    q = np.asarray(q, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if q.shape != v.shape or q.ndim != 1:
        raise DataError("q and v must be equal-length vectors")
    k = q.shape[0]
    if k < 2:
        raise DataError("combining rules need at least 2 synthetic datasets")
    q_bar = float(q.mean())
    b_k = float(np.sum((q - q_bar) ** 2) / (k - 1))
    v_bar = float(v.mean())
    t_s = (1.0 + 1.0 / k) * b_k - v_bar
    if t_s < 0:
        warnings.warn(f"variance estimate is negative ({t_s:.6g})", stacklevel=2)
    return q_bar, t_s


# ---------------------------------------------------------------------------
# Risk metrics
# ---------------------------------------------------------------------------


def population_uniqueness(dataset: Dataset, quasi_identifiers) -> tuple[int, float]:
    """Count and fraction of rows whose QI combination occurs exactly once."""
    qi = [int(f) for f in quasi_identifiers]
    if not qi:
        raise DataError("need at least one quasi-identifier")
    if dataset.n_rows == 0:
        return 0, 0.0
    proj = dataset.rows[:, qi]
    _, inverse, counts = np.unique(proj, axis=0, return_inverse=True, return_counts=True)
    unique = int(np.sum(counts[inverse] == 1))
    return unique, unique / dataset.n_rows


def _condition_keys(rows: np.ndarray, conditioning: list[int], cards: list[int]) -> np.ndarray:
    keys = np.zeros(rows.shape[0], dtype=np.int64)
    for f, c in zip(conditioning, cards):
        keys = keys * c + rows[:, f]
    return keys


def attack_categorical(
    orig: Dataset, synth: Dataset, target: int, conditioning
) -> float:
    """Misclassification rate of modal inference from matching synthetic rows.

    For each original record, the attacker looks up synthetic rows sharing
    its conditioning projection and guesses the most frequent target value
    (ties to the lowest category index; no matches fall back to the global
    synthetic mode). Returns the fraction of wrong guesses.
    """
    cond = [int(f) for f in conditioning]
    if not cond:
        raise DataError("need at least one conditioning feature")
    if synth.n_rows == 0:
        raise DataError("empty synthetic dataset")
    schema = orig.schema
    cards = [schema.features[f].n_categories for f in cond]
    ct = schema.features[target].n_categories
    synth_keys = _condition_keys(synth.rows, cond, cards)
    synth_target = synth.rows[:, target]
    table: dict[int, np.ndarray] = {}
    for k, t in zip(synth_keys.tolist(), synth_target.tolist()):
        row = table.get(k)
        if row is None:
            row = np.zeros(ct, dtype=np.int64)
            table[k] = row
        row[t] += 1
    global_mode = int(np.argmax(np.bincount(synth_target, minlength=ct)))
    modal = {k: int(np.argmax(v)) for k, v in table.items()}
    orig_keys = _condition_keys(orig.rows, cond, cards)
    wrong = 0
    for k, actual in zip(orig_keys.tolist(), orig.rows[:, target].tolist()):
        guess = modal.get(k, global_mode)
        wrong += guess != actual
    return wrong / orig.n_rows


def attack_numeric(
    orig: Dataset, synth: Dataset, target: int, conditioning
) -> float:
    """Mean absolute error of mean-value inference, in representative units.

    The attacker's guess for each original record is the mean representative
    value of the target among matching synthetic rows (global synthetic mean
    when nothing matches).
    """
    cond = [int(f) for f in conditioning]
    if not cond:
        raise DataError("need at least one conditioning feature")
    if synth.n_rows == 0:
        raise DataError("empty synthetic dataset")
    schema = orig.schema
    reps = _representatives(schema.features[target])
    cards = [schema.features[f].n_categories for f in cond]
    synth_keys = _condition_keys(synth.rows, cond, cards)
    synth_values = reps[synth.rows[:, target]]
    sums: dict[int, float] = {}
    counts: dict[int, int] = {}
    for k, val in zip(synth_keys.tolist(), synth_values.tolist()):
        sums[k] = sums.get(k, 0.0) + val
        counts[k] = counts.get(k, 0) + 1
    global_mean = float(synth_values.mean())
    means = {k: sums[k] / counts[k] for k in sums}
    orig_keys = _condition_keys(orig.rows, cond, cards)
    orig_values = reps[orig.rows[:, target]]
    err = 0.0
    for k, val in zip(orig_keys.tolist(), orig_values.tolist()):
        err += abs(val - means.get(k, global_mean))
    return err / orig.n_rows


def bootstrap_dataset(dataset: Dataset, n: int, rng: np.random.Generator) -> Dataset:
    """Independent per-feature resample; a marginals-only comparison baseline."""
    if dataset.n_rows == 0:
        raise DataError("cannot bootstrap an empty dataset")
    cols = [
        dataset.rows[rng.integers(0, dataset.n_rows, size=n), i]
        for i in range(dataset.schema.n_features)
    ]
    return Dataset(schema=dataset.schema, rows=np.column_stack(cols))


# ---------------------------------------------------------------------------
# Reports and the risk-utility table
# ---------------------------------------------------------------------------


@dataclass
class EvalReport:
    """All metric values for one (algorithm, epsilon) evaluation run."""

    algorithm: str
    epsilon: float | None
    metrics: dict[str, float] = field(default_factory=dict)
    seed: int | None = None
    extra: dict = field(default_factory=dict)

    def to_json_obj(self) -> dict:
        return {
            "algorithm": self.algorithm,
            "epsilon": self.epsilon,
            "seed": self.seed,
            "metrics": self.metrics,
            "extra": self.extra,
        }

    @classmethod
    def from_json_obj(cls, obj: dict) -> "EvalReport":
        return cls(
            algorithm=obj["algorithm"],
            epsilon=obj.get("epsilon"),
            metrics=dict(obj.get("metrics", {})),
            seed=obj.get("seed"),
            extra=dict(obj.get("extra", {})),
        )

    def save(self, path: str | os.PathLike) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json_obj(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, path: str | os.PathLike) -> "EvalReport":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_json_obj(json.load(fh))


def ru_rows(reports) -> list[tuple[str, float | None, str, float]]:
    """Flatten reports to (algorithm, epsilon, metric_name, value) rows.

    Rows are appended in input order; duplicate (algorithm, epsilon) pairs
    stay as separate rows.
    """
    rows = []
    for rep in reports:
        for name in rep.metrics:
            rows.append((rep.algorithm, rep.epsilon, name, rep.metrics[name]))
    return rows


def write_ru_csv(reports, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["algorithm", "epsilon", "metric_name", "value"])
        for algo, eps, name, value in ru_rows(reports):
            writer.writerow([algo, "" if eps is None else repr(float(eps)), name,
                             repr(float(value))])
