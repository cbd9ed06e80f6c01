"""Calibrate the Dirichlet perturbation strength from a privacy criterion.

For epsilon-differential privacy, each of the M per-feature sampling steps
can shift its conditional by at most a factor 1 + 1/alpha between two
datasets differing in one row, so a full record costs M*log(1 + 1/alpha).
Solving at equality gives the minimal-noise setting

    alpha = 1 / (exp(epsilon / M) - 1).

Block sampling with reset amortizes one budget over a whole block: the same
closed form applies with epsilon read as the total block budget, so the cost
per sample drops by the block size.

For entropy l-diversity the prior strength is solved per count row: the
smoothed distribution's Shannon entropy is monotonically increasing in
alpha, so bisection finds the minimal alpha whose entropy reaches log l.

``dp_ratio_oracle`` is an independent verifier: it enumerates every possible
output record on a tiny schema and measures the worst-case log-ratio of the
two synthesis distributions directly.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass

import numpy as np

from pegs import blocks as blocks_mod
from pegs.errors import DataError, PegsError, PrivacyError
from pegs.hashing import build_hash_spec, hash_condition
from pegs.schema import Dataset

DP_SAMPLE = "dp"
DP_BLOCK = "dp-block"
L_DIVERSITY = "ldiv"

_LDIV_RESIDUAL = 1e-10
_ALPHA_CAP = float(2**60)


def alpha_for_epsilon(epsilon: float, n_features: int) -> float:
    """Minimal prior strength meeting an epsilon budget over n_features steps."""
    if not epsilon > 0:
        raise PrivacyError(f"epsilon must be > 0, got {epsilon}")
    if n_features < 1:
        raise PrivacyError(f"n_features must be >= 1, got {n_features}")
    return 1.0 / math.expm1(epsilon / n_features)


def alpha_for_block(epsilon: float, n_features: int, block_size: int) -> float:
    """Prior strength for a whole block sharing one total budget.

    ``epsilon`` is the budget for the entire block of ``block_size`` samples;
    the per-sample cost is epsilon / block_size. The closed form is the same
    as the single-sample case because reset makes the block cost one budget.
    """
    if block_size < 1:
        raise PrivacyError(f"block_size must be >= 1, got {block_size}")
    return alpha_for_epsilon(epsilon, n_features)


def per_sample_epsilon(epsilon: float, block_size: int) -> float:
    """Budget attributed to each sample of a block."""
    if block_size < 1:
        raise PrivacyError(f"block_size must be >= 1, got {block_size}")
    return epsilon / block_size


def shannon_entropy(p: np.ndarray) -> float:
    """Entropy in nats with the 0*log(0) = 0 convention."""
    p = np.asarray(p, dtype=np.float64)
    nz = p[p > 0]
    return float(-np.sum(nz * np.log(nz)))


def alpha_for_ldiversity(counts, l: float, n_categories: int) -> float:
    """Minimal alpha whose smoothed distribution has entropy >= log l.

    ``counts`` may be a CountRow or any non-negative vector (the perturbed
    multiple-imputation path reuses this on fractional pseudo-counts).
    Returns 0 when the unperturbed distribution already meets the target.
    An all-zero row is uniform under every positive alpha, so 1.0 is
    returned as a fixed convention (the value does not affect the result).
    """
    if isinstance(counts, blocks_mod.CountRow):
        counts = counts.counts
    counts = np.asarray(counts, dtype=np.float64)
    c = int(n_categories)
    if counts.shape != (c,):
        raise DataError(f"counts has shape {counts.shape}, expected ({c},)")
    if np.any(counts < 0):
        raise DataError("counts must be non-negative")
    if not 1 <= l:
        raise PrivacyError(f"l must be >= 1, got {l}")
    log_l = math.log(l)
    if l > c:
        raise PrivacyError(f"l={l} > {c} categories: entropy can never reach log l")
    total = counts.sum()
    if total == 0:
        return 1.0
    h0 = shannon_entropy(counts / total)
    if h0 >= log_l - 1e-12:
        return 0.0
    if l >= c:
        raise PrivacyError(
            f"l={l} equals the category count with non-uniform counts: "
            "the entropy target is only reached asymptotically"
        )

    def residual(alpha: float) -> float:
        return shannon_entropy(blocks_mod.smoothed_probabilities(counts, alpha, c)) - log_l

    hi = 1.0
    while residual(hi) < 0:
        hi *= 2.0
        if hi > _ALPHA_CAP:
            raise PrivacyError("entropy target not reachable below the alpha cap")
    lo = 0.0
    mid = hi
    for _ in range(500):
        mid = 0.5 * (lo + hi)
        r = residual(mid)
        if abs(r) <= _LDIV_RESIDUAL:
            return mid
        if r < 0:
            lo = mid
        else:
            hi = mid
    return mid


@dataclass(frozen=True)
class PrivacySpec:
    """A requested privacy criterion and the feature count it applies to.

    ``epsilon`` is the total budget: per sample for the "dp" criterion, per
    block for "dp-block". For "ldiv" the prior strength is data dependent
    and solved per count row at sampling time, so no single alpha exists.
    """

    criterion: str
    n_features: int
    epsilon: float | None = None
    block_size: int = 1
    l: float | None = None

    def __post_init__(self) -> None:
        if self.criterion not in (DP_SAMPLE, DP_BLOCK, L_DIVERSITY):
            raise PrivacyError(f"unknown privacy criterion {self.criterion!r}")
        if self.n_features < 1:
            raise PrivacyError("n_features must be >= 1")
        if self.criterion in (DP_SAMPLE, DP_BLOCK):
            if self.epsilon is None or not self.epsilon > 0:
                raise PrivacyError(f"epsilon must be > 0, got {self.epsilon}")
        if self.criterion == DP_BLOCK and self.block_size < 1:
            raise PrivacyError(f"block_size must be >= 1, got {self.block_size}")
        if self.criterion == L_DIVERSITY:
            if self.l is None or not self.l >= 1:
                raise PrivacyError(f"l must be >= 1, got {self.l}")

    @property
    def alpha(self) -> float:
        if self.criterion == DP_SAMPLE:
            return alpha_for_epsilon(self.epsilon, self.n_features)
        if self.criterion == DP_BLOCK:
            return alpha_for_block(self.epsilon, self.n_features, self.block_size)
        raise PrivacyError("l-diversity has no single alpha; it is solved per count row")

    @property
    def epsilon_per_sample(self) -> float | None:
        if self.criterion == DP_SAMPLE:
            return self.epsilon
        if self.criterion == DP_BLOCK:
            return per_sample_epsilon(self.epsilon, self.block_size)
        return None

    def to_json_obj(self) -> dict:
        return {
            "criterion": self.criterion,
            "n_features": self.n_features,
            "epsilon": self.epsilon,
            "block_size": self.block_size,
            "l": self.l,
        }

    @classmethod
    def from_json_obj(cls, obj: dict) -> "PrivacySpec":
        return cls(
            criterion=obj["criterion"],
            n_features=int(obj["n_features"]),
            epsilon=obj.get("epsilon"),
            block_size=int(obj.get("block_size", 1)),
            l=obj.get("l"),
        )


# ---------------------------------------------------------------------------
# Brute-force differential-privacy verifier
# ---------------------------------------------------------------------------

_DOMAIN_GUARD = 10**6


def sampling_distribution(
    blocks: blocks_mod.BuildingBlocks, seed, alpha: float
) -> np.ndarray:
    """Exact output distribution of one synthesis pass from a fixed seed.

    Enumerates every record in lexicographic category order and multiplies
    the per-step conditionals (step i conditions on the newly drawn prefix
    and the seed's suffix). The result sums to 1 by construction.
    """
    schema = blocks.schema
    cards = schema.cardinalities
    if int(np.prod(cards, dtype=object)) > _DOMAIN_GUARD:
        raise DataError(f"joint domain exceeds {_DOMAIN_GUARD}; oracle refuses")
    seed = [int(v) for v in seed]
    if len(seed) != schema.n_features:
        raise DataError("seed length does not match the schema")
    m_feat = schema.n_features
    cond_cache: dict[tuple[int, int], np.ndarray] = {}
    out: list[float] = []

    def descend(i: int, prefix: list[int], p: float) -> None:
        if i == m_feat:
            out.append(p)
            return
        cvec = prefix + seed[i + 1 :]
        key = hash_condition(cvec, blocks.tables[i].hash_spec)
        vec = cond_cache.get((i, key))
        if vec is None:
            vec = blocks_mod.conditional(blocks, i, key, alpha)
            cond_cache[(i, key)] = vec
        for cat in range(cards[i]):
            descend(i + 1, prefix + [cat], p * float(vec[cat]))

    descend(0, [], 1.0)
    return np.asarray(out)


def _check_neighbors(d1: Dataset, d2: Dataset) -> None:
    c1 = Counter(map(tuple, d1.rows))
    c2 = Counter(map(tuple, d2.rows))
    extra = sum((c1 - c2).values()) + sum((c2 - c1).values())
    if extra > 1:
        raise DataError(f"datasets differ by {extra} rows; at most one allowed")


def _paired_blocks(
    dataset1: Dataset, dataset2: Dataset, m: int
) -> tuple[blocks_mod.BuildingBlocks, blocks_mod.BuildingBlocks]:
    """Disintegrate a neighboring pair under one shared hash function.

    The hash is built from the larger dataset; the privacy statement treats
    it as fixed, so both sides must count under the same function.
    """
    if dataset1.schema.cardinalities != dataset2.schema.cardinalities:
        raise DataError("datasets must share a schema")
    _check_neighbors(dataset1, dataset2)
    larger = dataset1 if dataset1.n_rows >= dataset2.n_rows else dataset2
    specs = [build_hash_spec(larger, i, m) for i in range(larger.schema.n_features)]
    b1 = blocks_mod.disintegrate(dataset1, m, hash_specs=specs)
    b2 = blocks_mod.disintegrate(dataset2, m, hash_specs=specs)
    return b1, b2


def _max_log_ratio(p1: np.ndarray, p2: np.ndarray) -> float:
    for name, p in (("first", p1), ("second", p2)):
        if abs(p.sum() - 1.0) > 1e-9:
            raise PegsError(f"{name} distribution sums to {p.sum():.12f}, not 1")
    worst = 0.0
    for a, b in zip(p1, p2):
        if a == 0.0 and b == 0.0:
            continue
        if a == 0.0 or b == 0.0:
            return math.inf
        worst = max(worst, abs(math.log(a / b)))
    return worst


def dp_ratio_oracle(
    dataset1: Dataset, dataset2: Dataset, seed, alpha: float, m: int
) -> float:
    """Worst-case |log-ratio| of the two synthesis distributions, by enumeration.

    Outputs unreachable from both datasets are skipped; an output reachable
    from only one yields +inf.
    """
    b1, b2 = _paired_blocks(dataset1, dataset2, m)
    return _max_log_ratio(
        sampling_distribution(b1, seed, alpha), sampling_distribution(b2, seed, alpha)
    )


def dp_max_ratio_over_seeds(
    dataset1: Dataset, dataset2: Dataset, alpha: float, m: int
) -> float:
    """dp_ratio_oracle maximized over every possible seed record.

    Shares one disintegration across seeds, which makes sweeping the full
    seed domain on tiny schemas affordable.
    """
    b1, b2 = _paired_blocks(dataset1, dataset2, m)
    cards = dataset1.schema.cardinalities
    worst = 0.0
    for seed in itertools.product(*(range(c) for c in cards)):
        ratio = _max_log_ratio(
            sampling_distribution(b1, seed, alpha),
            sampling_distribution(b2, seed, alpha),
        )
        worst = max(worst, ratio)
        if worst == math.inf:
            break
    return worst
