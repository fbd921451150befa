"""CSV and JSON writers for run artifacts."""

import csv
import json
from pathlib import Path

import numpy as np


def _fmt(x):
    return format(float(x), ".17g")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": float(obj.real), "im": float(obj.imag)}
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, Path):
        return str(obj)
    if isinstance(obj, float) and not np.isfinite(obj):
        return str(obj)
    return obj


def write_json(path, obj):
    Path(path).write_text(json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n", encoding="utf-8", newline="\n")


def write_rows(path, header, rows):
    """CSV with '.' decimals, 17 significant digits for floats and LF line endings."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])


def write_spectrum_csv(path, spectrum):
    rows = (
        (float(z.real), float(z.imag), lab, float(rho))
        for z, lab, rho in zip(spectrum.eigenvalues, spectrum.labels, spectrum.divergence_ratios)
    )
    write_rows(path, ["re", "im", "label", "div_ratio"], rows)


def read_spectrum_csv(path):
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        return [
            (complex(float(r["re"]), float(r["im"])), r["label"], float(r["div_ratio"]))
            for r in reader
        ]
