"""Bundled hospital-discharge-like dataset generator.

Real discharge data cannot be redistributed, so the evaluation harness runs
against a synthetic stand-in: 13 features with the cardinalities of a
typical discharge extract (care type, age bins, sex, ethnicity, race, ZIP
region, length of stay, disposition, payer, charge bins, diagnostic
category, severity, medical/surgical flag), drawn from a fixed-seed
structured model. Dependencies are deliberate: diagnostic mix shifts with
age and care type, severity drives length of stay, and charges follow
stay length, severity, and surgery, so conditional structure, regressions,
and attack lookups all have real signal.
"""

from __future__ import annotations

import numpy as np

from pegs.schema import Dataset, FeatureSpec, Schema

DEFAULT_ROWS = 20000
DEFAULT_SEED = 7

_AGE_LABELS = tuple(str(a) for a in range(0, 85, 5)) + ("NA",)
_AGE_REPS = tuple(float(a) for a in range(0, 85, 5)) + (40.0,)
_LOS_LABELS = tuple(str(d) for d in range(10)) + ("10-30", "30-50", "50-70", "70-90", "90+", "NA")
_LOS_REPS = tuple(float(d) for d in range(10)) + (20.0, 40.0, 60.0, 80.0, 95.0, 4.0)
_CHARGE_LABELS = (
    ("0", "2K", "4K", "6K", "8K", "10K")
    + tuple(f"{k}K" for k in range(15, 100, 5))
    + ("100K+", "NA")
)
_CHARGE_REPS = (
    (0.0, 2000.0, 4000.0, 6000.0, 8000.0, 10000.0)
    + tuple(float(k * 1000) for k in range(15, 100, 5))
    + (100000.0, 20000.0)
)
_ZIP_LABELS = (
    "900xx", "902xx", "903xx", "905xx", "906xx", "907xx", "908xx", "910xx",
    "912xx", "913xx", "915xx", "917xx", "918xx", "926xx", "928xx", "935xx",
)
_DISP_LABELS = (
    "Routine", "AcuteCare", "SNF", "Psychiatric", "Rehab", "HomeHealth",
    "AMA", "Died", "Hospice", "OtherCare", "Jail", "ChildCare", "Other",
)
_PAY_LABELS = (
    "Medicare", "MediCal", "Private", "SelfPay", "Workers", "County",
    "Other", "None", "NA",
)


def hospital_schema() -> Schema:
    return Schema(
        features=(
            FeatureSpec(
                name="typ",
                categories=(
                    "AcuteCare", "SkilledNursing", "Psychiatric",
                    "Rehabilitation", "LongTermCare", "Other",
                ),
            ),
            FeatureSpec(name="age.yrs", categories=_AGE_LABELS,
                        numeric_representatives=_AGE_REPS),
            FeatureSpec(name="sex", categories=("Male", "Female", "NA")),
            FeatureSpec(name="ethncty",
                        categories=("Hispanic", "NonHispanic", "Unknown", "NA")),
            FeatureSpec(
                name="race",
                categories=("White", "Black", "NativeAmerican", "Asian",
                            "PacificIslander", "Other", "NA"),
            ),
            FeatureSpec(name="patzip", categories=_ZIP_LABELS),
            FeatureSpec(name="los", categories=_LOS_LABELS,
                        numeric_representatives=_LOS_REPS),
            FeatureSpec(name="disp", categories=_DISP_LABELS),
            FeatureSpec(name="pay", categories=_PAY_LABELS),
            FeatureSpec(name="charge", categories=_CHARGE_LABELS,
                        numeric_representatives=_CHARGE_REPS),
            FeatureSpec(name="MDC",
                        categories=tuple(f"MDC{i:02d}" for i in range(1, 26))),
            FeatureSpec(name="sev", categories=("0", "1", "2"),
                        numeric_representatives=(0.0, 1.0, 2.0)),
            FeatureSpec(name="cat", categories=("Medical", "Surgical")),
        )
    )


def _softmax(logits: np.ndarray, axis: int = -1) -> np.ndarray:
    z = logits - logits.max(axis=axis, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=axis, keepdims=True)


def _draw(rng: np.random.Generator, probs: np.ndarray) -> np.ndarray:
    """Row-wise categorical draws from an (N, C) probability matrix."""
    cdf = probs.cumsum(axis=1)
    u = rng.random(probs.shape[0])
    idx = (cdf < u[:, None]).sum(axis=1)
    return np.minimum(idx, probs.shape[1] - 1).astype(np.int64)


def _with_na(probs: np.ndarray, na_rate: float) -> np.ndarray:
    """Append an NA column eating na_rate of the mass."""
    scaled = probs * (1.0 - na_rate)
    na = np.full(probs.shape[:-1] + (1,), na_rate)
    return np.concatenate([scaled, na], axis=-1)


def generate_hospital_dataset(n: int = DEFAULT_ROWS, seed: int = DEFAULT_SEED) -> Dataset:
    """Draw a dataset from the fixed structured model; deterministic per seed."""
    schema = hospital_schema()
    rng = np.random.default_rng(seed)

    # Age: bimodal over the 17 real bins (young adults and the elderly),
    # a newborn bump, then a thin NA slice.
    bins = np.arange(17, dtype=np.float64)
    age_w = (
        0.9 * np.exp(-0.5 * ((bins - 5.5) / 3.0) ** 2)
        + 1.1 * np.exp(-0.5 * ((bins - 13.0) / 2.6) ** 2)
        + 0.12
    )
    age_w[0] += 0.35
    age_p = _with_na(age_w / age_w.sum(), 0.004)
    age = _draw(rng, np.broadcast_to(age_p, (n, 18)))
    age_f = np.where(age == 17, 8.0, age) / 16.0  # NA acts mid-aged

    # ZIP region: fixed non-uniform weights.
    zip_w = 1.0 / (1.0 + 0.35 * np.arange(16)) + 0.25 * rng.random(16)
    zip_p = zip_w / zip_w.sum()
    patzip = _draw(rng, np.broadcast_to(zip_p, (n, 16)))

    # Sex tilts female with age; tiny NA slice.
    p_female = 0.47 + 0.10 * age_f
    sex_p = _with_na(np.stack([1.0 - p_female, p_female], axis=1), 0.002)
    sex = _draw(rng, sex_p)

    # Ethnicity share varies by ZIP; race depends on ethnicity and ZIP.
    hisp_share = np.clip(0.22 + 0.55 * rng.random(16), 0.0, 0.9)
    eth_table = np.stack(
        [hisp_share, 1.0 - hisp_share - 0.04, np.full(16, 0.03), np.full(16, 0.01)],
        axis=1,
    )
    ethncty = _draw(rng, eth_table[patzip])
    race_table = np.array(
        [
            [0.52, 0.08, 0.02, 0.05, 0.01, 0.30, 0.02],  # Hispanic
            [0.55, 0.18, 0.01, 0.16, 0.02, 0.06, 0.02],  # NonHispanic
            [0.30, 0.10, 0.02, 0.10, 0.02, 0.40, 0.06],  # Unknown
            [0.25, 0.10, 0.02, 0.08, 0.02, 0.33, 0.20],  # NA
        ]
    )
    zip_tilt = 0.12 * rng.standard_normal((16, 7))
    race_p = _softmax(np.log(race_table[ethncty] + 1e-9) + zip_tilt[patzip])
    race = _draw(rng, race_p)

    # Care type: skilled nursing and long-term care grow with age,
    # psychiatric peaks mid-life.
    typ_base = np.log(np.array([0.70, 0.07, 0.07, 0.06, 0.04, 0.06]))
    typ_logit = (
        typ_base
        + np.stack(
            [
                -0.2 * age_f,
                1.8 * age_f,
                1.2 * np.exp(-0.5 * ((age_f - 0.45) / 0.18) ** 2),
                0.8 * age_f,
                1.5 * age_f,
                np.zeros(n),
            ],
            axis=1,
        )
    )
    typ = _draw(rng, _softmax(typ_logit))

    # Diagnostic category: smooth age trends per category plus care-type
    # offsets (psychiatric care concentrates its own categories).
    mdc_base = 0.6 * rng.standard_normal(25)
    mdc_slope = 1.4 * rng.standard_normal(25)
    typ_eff = 0.5 * rng.standard_normal((6, 25))
    typ_eff[2, 18] += 3.0  # psychiatric care -> mental-health category
    typ_eff[2, 19] += 2.0
    mdc_logit = mdc_base + mdc_slope * age_f[:, None] + typ_eff[typ]
    mdc = _draw(rng, _softmax(mdc_logit))

    # Severity rises with age and is category dependent.
    sev_weight = 0.8 * rng.standard_normal(25)
    s1 = -0.3 + 1.2 * age_f + 0.6 * sev_weight[mdc]
    s2 = -1.6 + 2.4 * age_f + 1.0 * sev_weight[mdc]
    sev_logit = np.stack([np.zeros(n), s1, s2], axis=1)
    sev = _draw(rng, _softmax(sev_logit))

    # Surgical share is a per-category rate.
    surg_rate = 1.0 / (1.0 + np.exp(-(0.9 * rng.standard_normal(25) - 0.6)))
    cat = (rng.random(n) < surg_rate[mdc]).astype(np.int64)

    # Length of stay: geometric-ish decay stretched by severity and care
    # type (skilled nursing / long-term care keep patients longer).
    los_scale = 1.0 + 1.3 * sev + 2.0 * np.isin(typ, (1, 4)).astype(float)
    los_support = np.array([0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 20, 40, 60, 80, 95], dtype=float)
    los_logit = -los_support[None, :] / (2.2 * los_scale[:, None])
    los_real = _softmax(los_logit)
    los = _draw(rng, _with_na(los_real, 0.003))
    los_val = np.where(los == 15, 4.0, los_support[np.minimum(los, 14)])

    # Charge bin follows stay length, severity, and surgery with noise.
    mu = 3.0 + 0.55 * np.minimum(los_val, 40.0) + 2.2 * sev + 3.5 * cat
    grid = np.arange(24, dtype=np.float64)
    charge_logit = -0.5 * ((grid[None, :] - mu[:, None]) / 2.1) ** 2
    charge = _draw(rng, _with_na(_softmax(charge_logit), 0.003))

    # Disposition: routine shrinks (and death/hospice grow) with severity
    # and age.
    disp_base = np.log(
        np.array([0.58, 0.05, 0.08, 0.02, 0.03, 0.10, 0.02, 0.03, 0.02,
                  0.03, 0.005, 0.005, 0.03])
    )
    hard = sev / 2.0 + 0.8 * age_f
    disp_shift = np.array(
        [-1.0, 0.6, 1.0, 0.1, 0.4, 0.3, -0.3, 1.6, 1.2, 0.2, -0.2, -0.6, 0.0]
    )
    disp = _draw(rng, _softmax(disp_base + disp_shift * hard[:, None]))

    # Payer: Medicare dominates past retirement, public coverage before.
    elderly = (age_f > 0.78).astype(float)
    pay_base = np.log(
        np.array([0.12, 0.30, 0.32, 0.08, 0.03, 0.05, 0.05, 0.04, 0.01])
    )
    pay_shift = np.array([3.2, -0.8, -0.9, -0.6, -1.0, -0.5, -0.2, -0.5, 0.0])
    pay = _draw(rng, _softmax(pay_base + pay_shift * elderly[:, None]))

    rows = np.column_stack(
        [typ, age, sex, ethncty, race, patzip, los, disp, pay, charge, mdc, sev, cat]
    )
    return Dataset(schema=schema, rows=rows)
