"""CSV and JSON writers shared by the solvers and the CLI."""
from __future__ import annotations

import csv
import hashlib
import json
import math
from pathlib import Path
from typing import Dict, Iterable, Mapping, Optional

import numpy as np


def write_trace_csv(path, t: np.ndarray, columns: Mapping[str, np.ndarray],
                    time_label: str = "t_us") -> Path:
    """Headered CSV: time column then ``<name>_re, <name>_im`` per complex column.

    Real-valued columns get a single ``<name>`` column.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = [time_label]
    data = [np.asarray(t, dtype=float)]
    for name, values in columns.items():
        values = np.asarray(values)
        if np.iscomplexobj(values):
            header += [f"{name}_re", f"{name}_im"]
            data += [values.real, values.imag]
        else:
            header.append(name)
            data.append(values.astype(float))
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in zip(*data):
            w.writerow([repr(float(v)) for v in row])
    return path


def read_trace_csv(path) -> Dict[str, np.ndarray]:
    """Inverse of :func:`write_trace_csv`; re/im pairs are merged back into complex arrays."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], np.array(rows[1:], dtype=float).reshape(-1, len(rows[0]))
    out: Dict[str, np.ndarray] = {}
    i = 0
    while i < len(header):
        name = header[i]
        if name.endswith("_re") and i + 1 < len(header) and header[i + 1] == name[:-3] + "_im":
            out[name[:-3]] = body[:, i] + 1j * body[:, i + 1]
            i += 2
        else:
            out[name] = body[:, i]
            i += 1
    return out


def write_field_map_csv(path, z: np.ndarray, t: np.ndarray, values: np.ndarray, name: str) -> Path:
    """Long-format dump of a [z, t] complex array: columns z, t_us, name_re, name_im."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    zz, tt = np.meshgrid(z, t, indexing="ij")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["z", "t_us", f"{name}_re", f"{name}_im"])
        for a, b, v in zip(zz.ravel(), tt.ravel(), values.ravel()):
            w.writerow([repr(float(a)), repr(float(b)), repr(float(v.real)), repr(float(v.imag))])
    return path


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": float(obj.real), "im": float(obj.imag)}
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def write_json(path, payload) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(_jsonable(payload), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(out_dir, files: Iterable, parameters: Mapping,
                   extra: Optional[Mapping] = None) -> Path:
    """manifest.json listing every emitted file (relative path, size, sha256)."""
    out_dir = Path(out_dir)
    entries = []
    for f in sorted({Path(f).resolve() for f in files}):
        entries.append({
            "path": str(f.relative_to(out_dir.resolve())),
            "bytes": f.stat().st_size,
            "sha256": sha256(f),
        })
    payload = {"files": entries, "parameters": dict(parameters)}
    if extra:
        payload.update(extra)
    return write_json(out_dir / "manifest.json", payload)
