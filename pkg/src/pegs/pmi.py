"""Perturbed multiple imputation: GLM conditionals with output-level smoothing.

Each feature gets a ridge-penalized multinomial logistic regression on the
one-hot encoding of all other features. At synthesis time the model's
normalized response g is perturbed exactly like a count row with one
observation:

    g_j -> (g_j + alpha) / (1 + C * alpha)

which shares the alpha = 1/(exp(epsilon/M) - 1) calibration with the count
table path. With alpha = 0 this is plain multiple imputation.
"""

from __future__ import annotations

import json
import os
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.optimize
import scipy.sparse

from pegs.errors import DataError, PegsError, PrivacyError
from pegs.privacy import (
    DP_BLOCK,
    DP_SAMPLE,
    L_DIVERSITY,
    PrivacySpec,
    alpha_for_ldiversity,
)
from pegs.rng import PURPOSE_POOL, PURPOSE_VALUES, master_key, substream
from pegs.sampler import SeedPool
from pegs.schema import Dataset, Schema

_GRAD_TOL = 1e-6
_MAX_ITER = 500


@dataclass(frozen=True)
class GlmConditional:
    """Multinomial logistic conditional for one target feature.

    ``weights`` has one row per target category over the concatenated
    one-hot blocks of the other features (no reference category dropped;
    the ridge absorbs the collinearity). ``offsets`` locate each other
    feature's block inside that encoding.
    """

    target: int
    intercepts: np.ndarray
    weights: np.ndarray
    offsets: tuple[int, ...]
    ridge: float
    converged: bool
    grad_norm: float

    def __post_init__(self) -> None:
        for name in ("intercepts", "weights"):
            arr = np.asarray(getattr(self, name), dtype=np.float64)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "offsets", tuple(int(o) for o in self.offsets))

    @property
    def n_categories(self) -> int:
        return self.intercepts.shape[0]

    def scores(self, x_minus_i) -> np.ndarray:
        hot = np.asarray(self.offsets, dtype=np.int64) + np.asarray(x_minus_i, dtype=np.int64)
        return self.intercepts + self.weights[:, hot].sum(axis=1)


def condition_offsets(schema: Schema, i: int) -> tuple[int, ...]:
    """Start offset of each non-target feature's one-hot block, in slot order."""
    offsets = []
    pos = 0
    for f, feat in enumerate(schema.features):
        if f == i:
            continue
        offsets.append(pos)
        pos += feat.n_categories
    return tuple(offsets)


def _design_matrix(dataset: Dataset, i: int) -> scipy.sparse.csr_matrix:
    schema = dataset.schema
    offsets = condition_offsets(schema, i)
    others = [f for f in range(schema.n_features) if f != i]
    width = sum(schema.features[f].n_categories for f in others)
    n = dataset.n_rows
    cols = np.empty((n, len(others)), dtype=np.int64)
    for slot, f in enumerate(others):
        cols[:, slot] = offsets[slot] + dataset.rows[:, f]
    indptr = np.arange(0, n * len(others) + 1, len(others))
    data = np.ones(n * len(others), dtype=np.float64)
    return scipy.sparse.csr_matrix((data, cols.ravel(), indptr), shape=(n, width))


def fit_glm_conditional(dataset: Dataset, i: int, ridge: float = 1e-3,
                        max_iter: int = _MAX_ITER) -> GlmConditional:
    """Fit the penalized multinomial logistic conditional for feature i.

    Maximizes the mean log-likelihood minus (ridge/2)*||weights||^2 (the
    intercepts are unpenalized) from a zero start, so the fit is
    deterministic. A non-convergence warning is raised when the gradient
    norm stays above 1e-6 after the iteration cap; the best iterate is
    still returned with ``converged=False``.
    """
    if ridge < 0:
        raise DataError(f"ridge must be >= 0, got {ridge}")
    schema = dataset.schema
    c = schema.features[i].n_categories
    n = dataset.n_rows
    if n < c:
        raise DataError(
            f"feature {i}: {n} rows < {c} categories, conditional underdetermined"
        )
    x = _design_matrix(dataset, i)
    y = dataset.rows[:, i]
    d = x.shape[1]
    row_idx = np.arange(n)

    def objective(params: np.ndarray):
        intercepts = params[:c]
        weights = params[c:].reshape(c, d)
        scores = x @ weights.T + intercepts
        scores -= scores.max(axis=1, keepdims=True)
        log_z = np.log(np.exp(scores).sum(axis=1))
        loglik = (scores[row_idx, y] - log_z).mean()
        obj = -loglik + 0.5 * ridge * float((weights * weights).sum())
        resid = np.exp(scores - log_z[:, None])
        resid[row_idx, y] -= 1.0
        resid /= n
        grad_w = (x.T @ resid).T + ridge * weights
        grad_b = resid.sum(axis=0)
        return obj, np.concatenate([grad_b, grad_w.ravel()])

    x0 = np.zeros(c + c * d)
    res = scipy.optimize.minimize(
        objective, x0, jac=True, method="L-BFGS-B",
        options={"maxiter": max_iter, "maxfun": 4 * max_iter, "gtol": 1e-9, "ftol": 0.0},
    )
    _, grad = objective(res.x)
    grad_norm = float(np.linalg.norm(grad))
    converged = grad_norm <= _GRAD_TOL
    if not converged:
        warnings.warn(
            f"feature {i}: conditional fit stopped at gradient norm {grad_norm:.2e}",
            stacklevel=2,
        )
    return GlmConditional(
        target=i,
        intercepts=res.x[:c],
        weights=res.x[c:].reshape(c, d),
        offsets=condition_offsets(schema, i),
        ridge=ridge,
        converged=converged,
        grad_norm=grad_norm,
    )


def glm_response(model: GlmConditional, x_minus_i) -> np.ndarray:
    """Normalized softmax response of the fitted conditional."""
    s = model.scores(x_minus_i)
    s = s - s.max()
    g = np.exp(s)
    g /= g.sum()
    return g


def pmi_probability(model: GlmConditional, x_minus_i, alpha: float) -> np.ndarray:
    """Dirichlet-style perturbation of the normalized response."""
    if alpha < 0:
        raise PrivacyError(f"alpha must be >= 0, got {alpha}")
    g = glm_response(model, x_minus_i)
    total = g.sum()
    if abs(total - 1.0) > 1e-9:
        raise PegsError(f"response sums to {total}, expected a normalized measure")
    c = model.n_categories
    return (g + alpha) / (1.0 + c * alpha)


@dataclass(frozen=True)
class PmiModels:
    """One fitted conditional per feature, bound to their schema."""

    schema: Schema
    models: tuple[GlmConditional, ...]

    def __post_init__(self) -> None:
        if len(self.models) != self.schema.n_features:
            raise DataError("need exactly one model per schema feature")
        object.__setattr__(self, "models", tuple(self.models))


def fit_all_conditionals(dataset: Dataset, ridge: float = 1e-3,
                         max_iter: int = _MAX_ITER) -> PmiModels:
    models = [
        fit_glm_conditional(dataset, i, ridge=ridge, max_iter=max_iter)
        for i in range(dataset.schema.n_features)
    ]
    return PmiModels(schema=dataset.schema, models=tuple(models))


def pmi_synthesize(
    models: PmiModels,
    privacy: PrivacySpec,
    pool: SeedPool,
    n_samples: int,
    n_datasets: int,
    rng_seed: int,
) -> list[Dataset]:
    """Mirror of the count-table synthesizer with GLM responses.

    Supports the per-sample DP criterion and l-diversity (solved on the
    response vector). Block budgets are rejected: without the reset
    mechanism a shared block budget would overstate the guarantee.
    """
    if n_samples < 1 or n_datasets < 1:
        raise DataError("n_samples and n_datasets must be >= 1")
    if privacy.criterion == DP_BLOCK:
        raise PrivacyError("block budgets require reset; not available for the GLM path")
    schema = models.schema
    if privacy.n_features != schema.n_features:
        raise PrivacyError("privacy spec feature count does not match the models")
    alpha = privacy.alpha if privacy.criterion == DP_SAMPLE else None
    ldiv_cache: dict[tuple[int, tuple[int, ...]], float] = {}
    key = master_key(rng_seed)
    datasets = []
    for k in range(n_datasets):
        rows = []
        for n in range(n_samples):
            seed = pool.draw(substream(key, PURPOSE_POOL, k, n))
            rng = substream(key, PURPOSE_VALUES, k, n)
            record = [int(v) for v in seed]
            if len(record) != schema.n_features:
                raise DataError("seed length does not match the schema")
            for i in range(schema.n_features):
                cvec = tuple(record[:i] + record[i + 1 :])
                model = models.models[i]
                if privacy.criterion == L_DIVERSITY:
                    a = ldiv_cache.get((i, cvec))
                    if a is None:
                        g = glm_response(model, cvec)
                        a = alpha_for_ldiversity(g, privacy.l, model.n_categories)
                        ldiv_cache[(i, cvec)] = a
                else:
                    a = alpha
                vec = pmi_probability(model, cvec, a)
                cdf = np.cumsum(vec)
                record[i] = min(
                    int(np.searchsorted(cdf, rng.random(), side="right")), len(vec) - 1
                )
            rows.append(record)
        datasets.append(Dataset(schema=schema, rows=np.asarray(rows, dtype=np.int64)))
    return datasets


# ---------------------------------------------------------------------------
# Model file I/O
# ---------------------------------------------------------------------------


def save_models(models: PmiModels, path: str | os.PathLike) -> None:
    payload: dict[str, np.ndarray] = {
        "schema_json": np.frombuffer(
            json.dumps(models.schema.to_json_obj(), sort_keys=True).encode("utf-8"),
            dtype=np.uint8,
        )
    }
    for i, m in enumerate(models.models):
        payload[f"intercepts_{i}"] = m.intercepts
        payload[f"weights_{i}"] = m.weights
        payload[f"meta_{i}"] = np.array(
            [m.ridge, 1.0 if m.converged else 0.0, m.grad_norm], dtype=np.float64
        )
    with open(path, "wb") as fh:
        np.savez(fh, **payload)


def load_models(path: str | os.PathLike) -> PmiModels:
    with np.load(path) as data:
        try:
            schema = Schema.from_json_obj(
                json.loads(bytes(data["schema_json"]).decode("utf-8"))
            )
            models = []
            for i in range(schema.n_features):
                meta = data[f"meta_{i}"]
                models.append(
                    GlmConditional(
                        target=i,
                        intercepts=data[f"intercepts_{i}"],
                        weights=data[f"weights_{i}"],
                        offsets=condition_offsets(schema, i),
                        ridge=float(meta[0]),
                        converged=bool(meta[1]),
                        grad_norm=float(meta[2]),
                    )
                )
        except KeyError as exc:
            raise DataError(f"{path}: not a complete model file (missing {exc})") from None
    return PmiModels(schema=schema, models=tuple(models))
