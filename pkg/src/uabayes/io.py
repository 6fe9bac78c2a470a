"""CSV and JSON readers/writers for datasets, trajectories and run outputs.

All CSVs are UTF-8 with a header row and LF line endings.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .classify import LabeledDataset
from .exceptions import DatasetParseError


def read_dataset_csv(path, n_classes: Optional[int] = None) -> LabeledDataset:
    """Read a dataset whose last column is the integer label.

    Raises
    ------
    DatasetParseError
        Naming the 1-based data row and column of the first bad cell.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or len(header) < 2:
            raise DatasetParseError("need a header with at least one feature and a label column")
        width = len(header)
        rows, labels = [], []
        for r, row in enumerate(reader, start=1):
            if not row:
                continue
            if len(row) != width:
                raise DatasetParseError(f"expected {width} fields, found {len(row)}", row=r)
            feats = []
            for c, cell in enumerate(row[:-1], start=1):
                try:
                    v = float(cell)
                except ValueError:
                    raise DatasetParseError(f"not a number: {cell!r}", row=r, column=c) from None
                if not math.isfinite(v):
                    raise DatasetParseError(f"not finite: {cell!r}", row=r, column=c)
                feats.append(v)
            try:
                label = int(row[-1])
            except ValueError:
                raise DatasetParseError(f"label is not an integer: {row[-1]!r}", row=r, column=width) from None
            if label < 0:
                raise DatasetParseError("label must be non-negative", row=r, column=width)
            rows.append(feats)
            labels.append(label)
    X = np.array(rows, dtype=float).reshape(len(rows), width - 1)
    return LabeledDataset(X, np.array(labels, dtype=int), n_classes)


def write_dataset_csv(path, data: LabeledDataset, feature_names: Optional[Sequence[str]] = None):
    names = list(feature_names) if feature_names else [f"f{i}" for i in range(data.n_features)]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(names + ["label"])
        for x, y in zip(data.features, data.labels):
            w.writerow([repr(float(v)) for v in x] + [int(y)])


def write_table_csv(path, header: Sequence[str], rows):
    """Write rows under a header; floats keep full precision."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(list(header))
        for row in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])


def read_table_csv(path):
    """Return ``(header, rows)`` with every cell as a string."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        return header, [row for row in reader if row]


def write_trajectory_csv(path, truth, measurements, estimates, mode_probs=None):
    """Columns ``k``, truth components, measurement components, estimate components
    and optionally one probability column per filter mode."""
    truth = np.asarray(truth, dtype=float).reshape(len(truth), -1)
    ys = np.asarray(measurements, dtype=float).reshape(len(truth), -1)
    est = np.asarray(estimates, dtype=float).reshape(len(truth), -1)
    header = ["k"]
    header += [f"truth_{i}" for i in range(truth.shape[1])]
    header += [f"measurement_{i}" for i in range(ys.shape[1])]
    header += [f"estimate_{i}" for i in range(est.shape[1])]
    parts = [truth, ys, est]
    if mode_probs is not None:
        probs = np.asarray(mode_probs, dtype=float)
        header += [f"mode_prob_{j}" for j in range(probs.shape[1])]
        parts.append(probs)
    body = np.hstack(parts)
    write_table_csv(path, header, ([k + 1] + row.tolist() for k, row in enumerate(body)))


def write_json(path, obj):
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def read_json(path):
    return json.loads(Path(path).read_text(encoding="utf-8"))
