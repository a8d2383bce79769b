"""Deterministic readers and writers for sequences, labels, and couplings.

All numeric output uses 17 significant decimal digits, which round-trips
64-bit floats exactly; all readers reject NaN/Inf and report the offending
line and column.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .types import AlignmentOutcome, LabeledSet, Sequence

__all__ = [
    "DatasetHandle",
    "read_ucr_tsv",
    "write_ucr_tsv",
    "read_csv_sequence",
    "write_csv_sequence",
    "read_csv_matrix",
    "write_coupling",
    "fmt",
]


def fmt(x: float) -> str:
    return format(float(x), ".17g")


@dataclass
class DatasetHandle:
    items: LabeledSet
    source: str
    format: str


def _parse_token(token: str, path, line_no: int, col_no: int) -> float:
    try:
        value = float(token)
    except ValueError:
        raise ValueError(
            f"{path}: line {line_no}, column {col_no}: non-numeric token {token!r}"
        ) from None
    if not np.isfinite(value):
        raise ValueError(
            f"{path}: line {line_no}, column {col_no}: non-finite value {token!r}"
        )
    return value


def read_ucr_tsv(path: str | Path) -> DatasetHandle:
    """Archive convention: one series per line, integer label first, tab-separated."""
    path = Path(path)
    items: list[tuple[Sequence, int]] = []
    with path.open() as fh:
        for line_no, raw in enumerate(fh, start=1):
            if not raw.strip() or raw.lstrip().startswith("#"):
                continue
            tokens = raw.rstrip("\n").split("\t")
            if len(tokens) < 2:
                raise ValueError(
                    f"{path}: line {line_no}: need a label and at least one value"
                )
            values = []
            for col_no, token in enumerate(tokens, start=1):
                if token.strip() == "":
                    raise ValueError(
                        f"{path}: line {line_no}, column {col_no}: missing value"
                    )
                values.append(_parse_token(token, path, line_no, col_no))
            label = values[0]
            if label != int(label):
                raise ValueError(
                    f"{path}: line {line_no}: label {tokens[0]!r} is not an integer"
                )
            items.append((Sequence(np.asarray(values[1:])), int(label)))
    if not items:
        raise ValueError(f"{path}: no data lines")
    return DatasetHandle(items=LabeledSet(items), source=str(path), format="ucr_tsv")


def write_ucr_tsv(
    dataset: LabeledSet, path: str | Path, header_lines: list[str] | None = None
) -> None:
    lines = [f"# {h}" for h in header_lines or []]
    for seq, label in dataset.items:
        if seq.dim != 1:
            raise ValueError("the tsv format stores scalar (d=1) series only")
        lines.append("\t".join([str(int(label))] + [fmt(v) for v in seq.values[0]]))
    Path(path).write_text("\n".join(lines) + "\n")


def read_csv_matrix(path: str | Path) -> np.ndarray:
    """Rectangular comma-separated numeric grid."""
    path = Path(path)
    rows = []
    with path.open() as fh:
        for line_no, raw in enumerate(fh, start=1):
            if not raw.strip():
                continue
            if raw.lstrip().startswith("#"):
                continue
            tokens = raw.rstrip("\n").split(",")
            row = [
                _parse_token(token, path, line_no, col_no)
                for col_no, token in enumerate(tokens, start=1)
            ]
            rows.append(row)
    if not rows:
        raise ValueError(f"{path}: no data lines")
    widths = {len(r) for r in rows}
    if len(widths) != 1:
        raise ValueError(f"{path}: ragged rows (widths {sorted(widths)})")
    return np.asarray(rows, dtype=np.float64)


def read_csv_sequence(path: str | Path) -> Sequence:
    """Rows are feature dimensions, columns are timesteps."""
    return Sequence(read_csv_matrix(path))


def write_csv_sequence(
    seq: Sequence, path: str | Path, header_lines: list[str] | None = None
) -> None:
    lines = [f"# {h}" for h in header_lines or []]
    for row in seq.values:
        lines.append(",".join(fmt(v) for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


def write_coupling(
    outcome: AlignmentOutcome,
    path: str | Path,
    fmt_name: str = "csv",
    power_normalize: bool = False,
    header_lines: list[str] | None = None,
) -> None:
    """Coupling matrix as full-precision csv or 8-bit grayscale pgm.

    The pgm writer maps entry v to round(255 * v ** 0.1) when power
    normalization is on (enhances faint cells), else round(255 * v).
    """
    path = Path(path)
    coupling = outcome.coupling
    if fmt_name == "csv":
        lines = [f"# {h}" for h in header_lines or []]
        for row in coupling:
            lines.append(",".join(fmt(v) for v in row))
        path.write_text("\n".join(lines) + "\n")
    elif fmt_name == "pgm":
        scaled = coupling ** 0.1 if power_normalize else coupling
        pixels = np.clip(np.rint(255.0 * scaled), 0, 255).astype(int)
        t, tp = pixels.shape
        lines = ["P2"]
        lines += [f"# {h}" for h in header_lines or []]
        lines.append(f"{tp} {t}")
        lines.append("255")
        for row in pixels:
            lines.append(" ".join(str(v) for v in row))
        path.write_text("\n".join(lines) + "\n")
    else:
        raise ValueError(f"unknown coupling format {fmt_name!r}")
