"""Deterministic JSON/CSV writers and the field-export format read by ``verify``."""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .densities import FieldFrame, FrameKind, PhysParams
from .errors import ConfigError, ShapeError

__all__ = ["dumps", "write_json", "write_rows", "write_field_export", "read_field_export"]


def _default(o):
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (tuple, set)):
        return list(o)
    if hasattr(o, "value"):
        return o.value
    raise TypeError(f"cannot serialise {type(o).__name__}")


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=_default) + "\n"


def write_json(path, obj) -> None:
    Path(path).write_text(dumps(obj))


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_rows(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_cell(v) for v in row])


_AXES = ("x", "y", "z")


def write_field_export(path, frame: FieldFrame) -> Path:
    """CSV of psi and phi on every (t, x...) node plus a JSON sidecar with the grid."""
    path = Path(path)
    nd = frame.dim
    mesh = np.meshgrid(*[frame.times()] + [frame.axis(k) for k in range(1, nd + 1)], indexing="ij")
    header = ["t", *_AXES[:nd], "re_psi", "im_psi", "phi"]
    cols = [m.ravel() for m in mesh] + [frame.psi.real.ravel(), frame.psi.imag.ravel(), frame.phi.ravel()]
    data = np.column_stack(cols)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in data:
            w.writerow([repr(float(v)) for v in row])
    pp = frame.params
    meta = {
        "shape": list(frame.psi.shape),
        "spacing": [float(h) for h in frame.spacing],
        "origin": [float(o) for o in frame.origin],
        "frame": frame.frame.value,
        "params": {"m": pp.m, "c": pp.c, "q": pp.q, "chi": pp.chi, "a": pp.a},
    }
    meta_path = path.with_suffix(".json")
    write_json(meta_path, meta)
    return meta_path


def read_field_export(path) -> FieldFrame:
    """Inverse of write_field_export; rows must be in C order of (t, x...)."""
    path = Path(path)
    meta_path = path.with_suffix(".json")
    try:
        meta = json.loads(meta_path.read_text())
        arr = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read field export {path}: {exc}") from exc
    shape = tuple(int(n) for n in meta["shape"])
    nd = len(shape) - 1
    if arr.shape != (int(np.prod(shape)), nd + 4):
        raise ShapeError(f"field export has {arr.shape} values, sidecar declares grid {shape}")
    spacing = tuple(float(h) for h in meta["spacing"])
    origin = tuple(float(o) for o in meta["origin"])
    mesh = np.meshgrid(*[origin[k] + spacing[k] * np.arange(shape[k]) for k in range(nd + 1)], indexing="ij")
    for k in range(nd + 1):
        if not np.allclose(arr[:, k], mesh[k].ravel(), rtol=1e-9, atol=1e-12 * max(1.0, abs(spacing[k]))):
            raise ShapeError(f"column {k} of the field export does not match the declared grid")
    psi = (arr[:, nd + 1] + 1j * arr[:, nd + 2]).reshape(shape)
    phi = arr[:, nd + 3].reshape(shape)
    return FieldFrame(
        psi=psi,
        phi=phi,
        spacing=spacing,
        origin=origin,
        params=PhysParams(**meta["params"]),
        frame=FrameKind(meta.get("frame", "lab")),
    )
