"""Give Me Some Credit CSV ingestion, preprocessing, and stratified splits.

The public training file has one label column and ten feature columns; the
loader matches columns by header name (any order, optional unnamed index
column first) and rejects anything malformed with the offending row number.

Preprocessing policy: impute missing MonthlyIncome with the training
median and missing NumberOfDependents with 0, winsorize every column at
the 1st/99th percentiles (the file contains utilization ratios above 50000
that would otherwise flatten the spline grid), then scale each column
affinely onto [-1, 1] to match the network's grid domain.  A Dataset keeps
its raw column matrix so that a later split can refit the scaler on the
training rows only.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "RawRecord",
    "PreprocessPolicy",
    "Scaler",
    "Dataset",
    "FEATURE_NAMES",
    "LABEL_NAME",
    "load_gmsc_csv",
    "preprocess",
    "split",
    "dataset_from_arrays",
    "write_dataset_csv",
    "write_scaler_text",
]

LABEL_NAME = "SeriousDlqin2yrs"

# (csv column, record attribute, parse kind, may be missing, must be >= 0)
_COLUMNS = [
    (LABEL_NAME, "serious_dlqin_2yrs", "label", False, True),
    ("RevolvingUtilizationOfUnsecuredLines", "revolving_utilization", "float", False, True),
    ("age", "age", "int", False, False),
    ("NumberOfTime30-59DaysPastDueNotWorse", "past_due_30_59", "int", False, True),
    ("DebtRatio", "debt_ratio", "float", False, True),
    ("MonthlyIncome", "monthly_income", "float", True, True),
    ("NumberOfOpenCreditLinesAndLoans", "open_credit_lines", "int", False, True),
    ("NumberOfTimes90DaysLate", "past_due_90", "int", False, True),
    ("NumberRealEstateLoansOrLines", "real_estate_loans", "int", False, True),
    ("NumberOfTime60-89DaysPastDueNotWorse", "past_due_60_89", "int", False, True),
    ("NumberOfDependents", "dependents", "int", True, True),
]

FEATURE_NAMES = tuple(name for name, *_ in _COLUMNS[1:])

_MISSING_TOKENS = {"", "na", "nan", "null"}


@dataclass(frozen=True)
class RawRecord:
    serious_dlqin_2yrs: int
    revolving_utilization: float
    age: int
    past_due_30_59: int
    debt_ratio: float
    monthly_income: float | None
    open_credit_lines: int
    past_due_90: int
    real_estate_loans: int
    past_due_60_89: int
    dependents: int | None


@dataclass(frozen=True)
class PreprocessPolicy:
    lower_quantile: float = 0.01
    upper_quantile: float = 0.99

    def __post_init__(self):
        if not 0.0 <= self.lower_quantile < self.upper_quantile <= 1.0:
            raise ValueError(
                f"invalid-policy: need 0 <= lower < upper <= 1, got "
                f"({self.lower_quantile}, {self.upper_quantile})"
            )


@dataclass(frozen=True)
class Scaler:
    """Per-column imputation value plus winsorized [lo, hi] scaling bounds."""

    impute: np.ndarray
    lo: np.ndarray
    hi: np.ndarray

    @classmethod
    def fit(cls, raw: np.ndarray, policy: PreprocessPolicy) -> "Scaler":
        n_cols = raw.shape[1]
        impute = np.zeros(n_cols)
        income_col = FEATURE_NAMES.index("MonthlyIncome")
        observed = raw[:, income_col]
        observed = observed[~np.isnan(observed)]
        impute[income_col] = float(np.median(observed)) if observed.size else 0.0
        filled = np.where(np.isnan(raw), impute[None, :], raw)
        lo = np.quantile(filled, policy.lower_quantile, axis=0)
        hi = np.quantile(filled, policy.upper_quantile, axis=0)
        return cls(impute=impute, lo=lo, hi=hi)

    def transform(self, raw: np.ndarray) -> np.ndarray:
        filled = np.where(np.isnan(raw), self.impute[None, :], raw)
        clipped = np.clip(filled, self.lo[None, :], self.hi[None, :])
        span = self.hi - self.lo
        with np.errstate(invalid="ignore", divide="ignore"):
            scaled = -1.0 + 2.0 * (clipped - self.lo[None, :]) / span[None, :]
        return np.where(span[None, :] > 0, scaled, 0.0)


@dataclass
class Dataset:
    features: np.ndarray
    labels: np.ndarray
    feature_names: tuple
    scaler: Scaler | None = None
    raw: np.ndarray | None = field(default=None, repr=False)
    policy: PreprocessPolicy | None = None

    def __len__(self) -> int:
        return self.labels.shape[0]


def _parse_cell(cell: str, kind: str, optional: bool, nonneg: bool, where: str):
    text = cell.strip()
    if text.lower() in _MISSING_TOKENS:
        if optional:
            return None
        raise ValueError(f"parse-error({where}): missing value in required column")
    try:
        value = float(text)
    except ValueError:
        raise ValueError(f"parse-error({where}): not a number: {text!r}") from None
    if math.isnan(value) or math.isinf(value):
        raise ValueError(f"parse-error({where}): non-finite value: {text!r}")
    if nonneg and value < 0:
        raise ValueError(f"parse-error({where}): negative value: {text!r}")
    if kind == "label":
        if value not in (0.0, 1.0):
            raise ValueError(f"parse-error({where}): label must be 0 or 1: {text!r}")
        return int(value)
    if kind == "int":
        if value != int(value):
            raise ValueError(f"parse-error({where}): expected an integer: {text!r}")
        return int(value)
    return value


def load_gmsc_csv(path) -> list:
    """Parse the GMSC training CSV into RawRecord objects, strictly."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError("header-mismatch: file is empty") from None
        offset = 1 if header and header[0].strip() == "" else 0
        names = [h.strip() for h in header[offset:]]
        wanted = {name for name, *_ in _COLUMNS}
        if set(names) != wanted or len(names) != len(wanted):
            missing = sorted(wanted - set(names))
            extra = sorted(set(names) - wanted)
            raise ValueError(
                f"header-mismatch: missing columns {missing}, unexpected {extra}"
            )
        col_index = {name: offset + i for i, name in enumerate(names)}

        records = []
        for row in reader:
            if not row:
                continue
            where = f"row {reader.line_num}"
            if len(row) != len(header):
                raise ValueError(
                    f"parse-error({where}): expected {len(header)} cells, got {len(row)}"
                )
            kwargs = {}
            for name, attr, kind, optional, nonneg in _COLUMNS:
                kwargs[attr] = _parse_cell(row[col_index[name]], kind, optional, nonneg, where)
            records.append(RawRecord(**kwargs))
    return records


def _raw_matrix(records) -> tuple[np.ndarray, np.ndarray]:
    n = len(records)
    raw = np.empty((n, len(FEATURE_NAMES)))
    labels = np.empty(n, dtype=np.int64)
    attrs = [attr for _, attr, *_ in _COLUMNS[1:]]
    for i, rec in enumerate(records):
        labels[i] = rec.serious_dlqin_2yrs
        for j, attr in enumerate(attrs):
            value = getattr(rec, attr)
            raw[i, j] = np.nan if value is None else float(value)
    return raw, labels


def preprocess(records, policy: PreprocessPolicy | None = None) -> Dataset:
    """Records -> normalized Dataset; keeps the raw matrix for later refits."""
    if not records:
        raise ValueError("empty-input: no records to preprocess")
    policy = policy or PreprocessPolicy()
    raw, labels = _raw_matrix(records)
    scaler = Scaler.fit(raw, policy)
    return Dataset(
        features=scaler.transform(raw),
        labels=labels,
        feature_names=FEATURE_NAMES,
        scaler=scaler,
        raw=raw,
        policy=policy,
    )


def split(dataset: Dataset, test_fraction: float, seed: int):
    """Stratified train/test split; the scaler is refit on training rows only.

    Datasets without a raw matrix (built directly from arrays) are split by
    indexing the features as-is.
    """
    if not 0.0 < test_fraction < 1.0:
        raise ValueError(f"invalid-fraction: need 0 < fraction < 1, got {test_fraction}")
    labels = dataset.labels
    rng = np.random.default_rng(seed)
    test_idx = []
    for cls in (0, 1):
        members = np.flatnonzero(labels == cls)
        if members.size and members.size < 2:
            raise ValueError(f"class-too-small: class {cls} has {members.size} member")
        members = members[rng.permutation(members.size)]
        n_test = int(round(members.size * test_fraction))
        test_idx.append(members[:n_test])
    test_idx = np.sort(np.concatenate(test_idx))
    mask = np.zeros(len(dataset), dtype=bool)
    mask[test_idx] = True
    train_idx = np.flatnonzero(~mask)

    if dataset.raw is not None:
        policy = dataset.policy or PreprocessPolicy()
        scaler = Scaler.fit(dataset.raw[train_idx], policy)
        make = lambda idx: Dataset(
            features=scaler.transform(dataset.raw[idx]),
            labels=labels[idx],
            feature_names=dataset.feature_names,
            scaler=scaler,
            raw=dataset.raw[idx],
            policy=policy,
        )
    else:
        make = lambda idx: Dataset(
            features=dataset.features[idx],
            labels=labels[idx],
            feature_names=dataset.feature_names,
            scaler=dataset.scaler,
        )
    return make(train_idx), make(test_idx)


def dataset_from_arrays(features, labels, feature_names=None) -> Dataset:
    """Wrap plain arrays as a Dataset (no scaler, no raw matrix)."""
    features = np.asarray(features, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    if features.ndim != 2 or labels.shape != (features.shape[0],):
        raise ValueError(
            f"dimension-mismatch: features {features.shape} vs labels {labels.shape}"
        )
    if feature_names is None:
        feature_names = tuple(f"x{i}" for i in range(features.shape[1]))
    return Dataset(features=features, labels=labels, feature_names=tuple(feature_names))


def write_dataset_csv(dataset: Dataset, path) -> None:
    """Audit dump: label plus normalized feature columns."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["label", *dataset.feature_names])
        for y, row in zip(dataset.labels, dataset.features):
            writer.writerow([int(y), *[repr(float(v)) for v in row]])


def write_scaler_text(scaler: Scaler, feature_names, path) -> None:
    """Scaler sidecar as key=value lines, one triple per column."""
    lines = []
    for j, name in enumerate(feature_names):
        lines.append(f"{name}.impute={scaler.impute[j]!r}")
        lines.append(f"{name}.lo={scaler.lo[j]!r}")
        lines.append(f"{name}.hi={scaler.hi[j]!r}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
