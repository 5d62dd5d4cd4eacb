"""On-disk format for grid functions.

A grid function is written as two files sharing a stem:

``<stem>.json``
    header ``{"dim", "L", "N", "space_tag", "format", "count"}``
``<stem>.csv`` or ``<stem>.bin``
    either CSV rows ``index,re,im`` (flat C-order index) or raw little-endian
    complex128 values in the same order.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .errors import InputError
from .spectral import GridFunction, SpectralGrid

HEADER_FIELDS = ("dim", "L", "N", "space_tag", "format", "count")


def save_gridfunction(f: GridFunction, stem: str | Path, fmt: str = "csv") -> tuple[Path, Path]:
    stem = Path(stem)
    if fmt not in ("csv", "bin"):
        raise InputError(f"unknown grid function format {fmt!r}")
    header = {
        "dim": f.grid.dim,
        "L": f.grid.extent,
        "N": f.grid.points,
        "space_tag": f.space,
        "format": fmt,
        "count": f.grid.size,
    }
    head_path = stem.with_suffix(".json")
    data_path = stem.with_suffix("." + fmt)
    head_path.write_text(json.dumps(header, indent=2, sort_keys=True) + "\n")
    flat = f.values.ravel()
    if fmt == "csv":
        with open(data_path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["index", "re", "im"])
            for i, v in enumerate(flat):
                w.writerow([i, repr(float(v.real)), repr(float(v.imag))])
    else:
        flat.astype("<c16").tofile(data_path)
    return head_path, data_path


def load_gridfunction(stem: str | Path) -> GridFunction:
    stem = Path(stem)
    header = json.loads(stem.with_suffix(".json").read_text())
    missing = set(HEADER_FIELDS) - set(header)
    if missing:
        raise InputError(f"grid function header lacks {sorted(missing)}")
    grid = SpectralGrid(int(header["dim"]), float(header["L"]), int(header["N"]))
    count = int(header["count"])
    if header["format"] == "csv":
        vals = np.zeros(count, dtype=complex)
        with open(stem.with_suffix(".csv"), newline="") as fh:
            rows = csv.reader(fh)
            next(rows)
            for idx, re, im in rows:
                vals[int(idx)] = complex(float(re), float(im))
    elif header["format"] == "bin":
        vals = np.fromfile(stem.with_suffix(".bin"), dtype="<c16")
    else:
        raise InputError(f"unknown grid function format {header['format']!r}")
    if vals.size != count:
        raise InputError(f"expected {count} values, found {vals.size}")
    return GridFunction(grid, vals, header["space_tag"])
