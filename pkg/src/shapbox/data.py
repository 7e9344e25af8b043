"""Tabular dataset ingestion and background-set summarization.

Datasets arrive as CSV with a header row, optionally accompanied by a JSON
sidecar declaring display names, categorical code-to-label maps, and the
label column.  Categorical features are integer-coded upstream; the explainer
only ever sees numbers.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import DatasetError


@dataclass
class TabularDataset:
    feature_names: list[str]
    rows: np.ndarray
    labels: Optional[np.ndarray] = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(set(self.feature_names)) != len(self.feature_names):
            raise DatasetError("feature names must be unique")
        if self.rows.ndim != 2 or self.rows.shape[1] != len(self.feature_names):
            raise DatasetError(
                f"rows shape {self.rows.shape} inconsistent with "
                f"{len(self.feature_names)} feature names"
            )

    @property
    def n_rows(self) -> int:
        return self.rows.shape[0]

    @property
    def n_features(self) -> int:
        return self.rows.shape[1]


def load_dataset(csv_path, sidecar_path=None) -> TabularDataset:
    """Read a header-row CSV, honoring an optional metadata sidecar.

    The sidecar may declare ``label_column`` (excluded from features),
    ``display_names`` and ``categorical`` maps; all are carried through in
    ``metadata`` for presentation layers.
    """
    metadata: dict = {}
    if sidecar_path is not None:
        with open(sidecar_path, "r", encoding="utf-8") as fh:
            metadata = json.load(fh)
    else:
        implicit = Path(csv_path).with_suffix(".meta.json")
        if implicit.exists():
            with open(implicit, "r", encoding="utf-8") as fh:
                metadata = json.load(fh)

    with open(csv_path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DatasetError(f"{csv_path}: empty file") from None
        records = list(reader)
    if not records:
        raise DatasetError(f"{csv_path}: no data rows")

    width = len(header)
    for i, record in enumerate(records):
        if len(record) != width:
            raise DatasetError(
                f"{csv_path}: row {i + 1} has {len(record)} fields, expected {width}"
            )
    try:
        values = np.array(records, dtype=float)
    except ValueError as exc:
        raise DatasetError(f"{csv_path}: non-numeric cell ({exc})") from None

    label_column = metadata.get("label_column")
    labels = None
    if label_column is not None:
        if label_column not in header:
            raise DatasetError(f"label column {label_column!r} not in header")
        idx = header.index(label_column)
        labels = values[:, idx]
        values = np.delete(values, idx, axis=1)
        header = header[:idx] + header[idx + 1 :]

    return TabularDataset(
        feature_names=header, rows=values, labels=labels, metadata=metadata
    )


def summarize_background(dataset: TabularDataset, mode: str = "median",
                         k: int = 1, seed: int = 0) -> np.ndarray:
    """Condense a dataset into a background matrix.

    ``median`` yields a single row of per-column medians (even counts average
    the two central values); ``sample`` draws ``k`` rows without replacement,
    deterministically per seed; ``all`` passes the rows through.
    """
    if dataset.n_rows < 1:
        raise DatasetError("cannot summarize an empty dataset")
    if mode == "median":
        return np.median(dataset.rows, axis=0)[None, :]
    if mode == "sample":
        if not 1 <= k <= dataset.n_rows:
            raise DatasetError(f"sample size {k} outside [1, {dataset.n_rows}]")
        rng = np.random.default_rng(seed)
        picked = rng.choice(dataset.n_rows, size=k, replace=False)
        return dataset.rows[np.sort(picked)]
    if mode == "all":
        return dataset.rows.copy()
    raise DatasetError(f"unknown background mode {mode!r}")
