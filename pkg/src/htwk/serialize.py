"""Stable on-disk formats: JSON reports, CSV curves, columnar cycles.

Everything here is byte-deterministic for identical inputs: JSON is
sorted and indented with a trailing newline, CSV uses 12-significant-
digit floats with LF endings, and the cycle file is a little-endian
columnar layout with a magic header.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .errors import SpecValidationError

MAGIC = b"HTWK1"


def dumps_stable(obj) -> str:
    """Canonical JSON text: sorted keys, two-space indent, LF newline."""
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False,
                      allow_nan=False) + "\n"


def write_json(path, obj) -> None:
    Path(path).write_text(dumps_stable(obj), encoding="utf-8", newline="\n")


def _csv_cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.12g" % float(v)
    s = str(v)
    if "," in s or "\n" in s:
        raise ValueError(f"cell {s!r} needs quoting; not supported")
    return s


def write_curve_csv(path, header, rows) -> None:
    """Comma-separated, header row, LF endings, 12 significant digits."""
    lines = [",".join(str(h) for h in header)]
    lines.extend(",".join(_csv_cell(v) for v in row) for row in rows)
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8",
                          newline="\n")


def write_cycles(path, seed: int, tau, m_tau, chi) -> None:
    """Columnar cycle file: magic, u64 count, u64 seed, then three
    float64 little-endian columns (tau, m_tau, chi)."""
    tau = np.asarray(tau, dtype=np.float64)
    m_tau = np.asarray(m_tau, dtype=np.float64)
    chi = np.asarray(chi, dtype=np.float64)
    if not tau.size == m_tau.size == chi.size:
        raise ValueError("columns must have equal length")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<QQ", tau.size, seed))
        fh.write(tau.astype("<f8").tobytes())
        fh.write(m_tau.astype("<f8").tobytes())
        fh.write(chi.astype("<f8").tobytes())


def read_cycles(path):
    """Inverse of write_cycles; returns (seed, tau, m_tau, chi)."""
    raw = Path(path).read_bytes()
    if raw[:5] != MAGIC:
        raise SpecValidationError(f"{path}: bad magic {raw[:5]!r}")
    count, seed = struct.unpack_from("<QQ", raw, 5)
    need = 5 + 16 + 3 * 8 * count
    if len(raw) != need:
        raise SpecValidationError(
            f"{path}: expected {need} bytes for {count} cycles, got {len(raw)}")
    cols = np.frombuffer(raw, dtype="<f8", count=3 * count, offset=21)
    tau = cols[:count].copy()
    m_tau = cols[count:2 * count].copy()
    chi = cols[2 * count:].copy()
    return int(seed), tau, m_tau, chi
