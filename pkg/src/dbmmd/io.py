"""Feature file formats and atomic writes.

Two formats, both storing one sample per row (the in-memory convention is
columns-as-samples, so loaders transpose):

  csv   header row f0,f1,...  plus an optional trailing "label" column.
        Floats are written with repr, which round-trips doubles exactly.
  raw   little-endian float64, row-major, alongside a JSON sidecar
        {"rows": samples, "cols": dims, "labels": [...]?} at the same
        path with a .json suffix.

Labels may be arbitrary integers on disk; loading remaps them onto dense
0..C-1 (sorted by original value) and keeps the original values on the
returned domain for reporting.

All writers go through a temp-file-then-rename so readers never observe a
half-written file.
"""
from __future__ import annotations

import csv
import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .datamodel import LabeledDomain, UnlabeledDomain, remap_labels
from .errors import FormatError

FORMATS = ("csv", "raw")


def atomic_write_text(path: str | Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_bytes(path: str | Path, blob: bytes) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(blob)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _infer_format(path: Path, fmt: str | None) -> str:
    if fmt is not None:
        if fmt not in FORMATS:
            raise FormatError(f"format must be one of {FORMATS}, got {fmt!r}")
        return fmt
    if path.suffix == ".csv":
        return "csv"
    if path.suffix == ".f64":
        return "raw"
    raise FormatError(f"cannot infer format from suffix {path.suffix!r}; pass fmt")


def _sidecar_path(path: Path) -> Path:
    return path.with_suffix(".json")


def save_features(path: str | Path, features, labels=None, fmt: str | None = None) -> None:
    """Write a (dim, m) feature matrix, optionally with one label per sample."""
    path = Path(path)
    fmt = _infer_format(path, fmt)
    x = np.asarray(features, dtype=float)
    if x.ndim != 2:
        raise FormatError(f"features must be 2-D (dim, samples), got shape {x.shape}")
    if labels is not None:
        labels = np.asarray(labels)
        if labels.shape != (x.shape[1],):
            raise FormatError("need exactly one label per sample")
    rows = x.T
    if fmt == "csv":
        lines = []
        header = [f"f{i}" for i in range(x.shape[0])]
        if labels is not None:
            header.append("label")
        lines.append(",".join(header))
        for i, row in enumerate(rows):
            cells = [repr(float(v)) for v in row]
            if labels is not None:
                cells.append(str(int(labels[i])))
            lines.append(",".join(cells))
        atomic_write_text(path, "\n".join(lines) + "\n")
        return
    blob = np.ascontiguousarray(rows, dtype="<f8").tobytes()
    sidecar = {"rows": int(x.shape[1]), "cols": int(x.shape[0])}
    if labels is not None:
        sidecar["labels"] = [int(v) for v in labels]
    atomic_write_bytes(path, blob)
    atomic_write_text(_sidecar_path(path), json.dumps(sidecar, indent=2) + "\n")


def _finish_domain(x_rows: np.ndarray, labels: np.ndarray | None, name: str):
    if not np.isfinite(x_rows).all():
        raise FormatError(f"{name}: non-finite feature value")
    features = x_rows.T
    if labels is None:
        return UnlabeledDomain(features, name=name)
    dense, values = remap_labels(labels)
    return LabeledDomain(features, dense, name=name, label_values=values)


def _load_csv(path: Path):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise FormatError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        label_col = None
        if "label" in header:
            label_col = header.index("label")
        n_cols = len(header)
        feat_cols = [i for i in range(n_cols) if i != label_col]
        if not feat_cols:
            raise FormatError(f"{path}: no feature columns")
        rows, labels = [], []
        for lineno, cells in enumerate(reader, start=2):
            if not cells:
                continue
            if len(cells) != n_cols:
                raise FormatError(
                    f"{path}:{lineno}: expected {n_cols} columns, got {len(cells)}"
                )
            try:
                rows.append([float(cells[i]) for i in feat_cols])
            except ValueError as exc:
                raise FormatError(f"{path}:{lineno}: malformed feature value") from exc
            if label_col is not None:
                try:
                    labels.append(int(cells[label_col]))
                except ValueError as exc:
                    raise FormatError(f"{path}:{lineno}: malformed label") from exc
    if not rows:
        raise FormatError(f"{path}: no samples")
    x = np.asarray(rows, dtype=float)
    y = np.asarray(labels, dtype=np.int64) if label_col is not None else None
    return x, y


def _load_raw(path: Path):
    sidecar_path = _sidecar_path(path)
    if not sidecar_path.exists():
        raise FormatError(f"{path}: missing sidecar {sidecar_path.name}")
    try:
        sidecar = json.loads(sidecar_path.read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"{sidecar_path}: malformed JSON sidecar") from exc
    try:
        rows, cols = int(sidecar["rows"]), int(sidecar["cols"])
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"{sidecar_path}: sidecar needs integer rows and cols") from exc
    if rows < 1 or cols < 1:
        raise FormatError(f"{sidecar_path}: rows and cols must be positive")
    blob = path.read_bytes()
    expected = rows * cols * 8
    if len(blob) != expected:
        raise FormatError(
            f"{path}: size {len(blob)} bytes does not match sidecar ({expected} bytes)"
        )
    x = np.frombuffer(blob, dtype="<f8").reshape(rows, cols).astype(float)
    y = None
    if "labels" in sidecar and sidecar["labels"] is not None:
        labels = sidecar["labels"]
        if len(labels) != rows:
            raise FormatError(f"{sidecar_path}: {len(labels)} labels for {rows} rows")
        try:
            y = np.asarray([int(v) for v in labels], dtype=np.int64)
        except (TypeError, ValueError) as exc:
            raise FormatError(f"{sidecar_path}: malformed label") from exc
    return x, y


def load_features(path: str | Path, fmt: str | None = None):
    """Load a feature file into a labeled or unlabeled domain.

    Returns LabeledDomain when a label column (csv) or labels list (raw
    sidecar) is present, UnlabeledDomain otherwise.
    """
    path = Path(path)
    fmt = _infer_format(path, fmt)
    if not path.exists():
        raise FormatError(f"{path}: no such file")
    if fmt == "csv":
        x, y = _load_csv(path)
    else:
        x, y = _load_raw(path)
    return _finish_domain(x, y, name=path.stem)
