"""Nodal fields and their on-disk formats.

Two formats, both ordered like ``grid.index`` (row-major by integer index):

* CSV with columns ``i, j, x, y, value`` (``j`` and ``y`` are 0 in 1-D);
* a JSON header ``<name>.json`` next to a raw block ``<name>.bin`` of
  little-endian float64 values.
"""

from dataclasses import dataclass
import json
import os
from pathlib import Path
import tempfile

import numpy as np

from .errors import GridMismatch, MissingField
from .geometry import DomainSpec, Grid

__all__ = ["ScalarField", "write_atomic", "write_csv", "write_binary", "read_binary", "read_csv"]


@dataclass(frozen=True, eq=False)
class ScalarField:
    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.grid.size,):
            raise ValueError(f"expected {self.grid.size} values, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("field has non-finite values")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def constant(cls, grid, c):
        return cls(grid, np.full(grid.size, float(c)))

    def check_grid(self, other):
        if not self.grid.same_as(other.grid):
            raise GridMismatch("fields live on different grids")

    def sup(self):
        return float(np.max(np.abs(self.values), initial=0.0))


def write_atomic(path, data):
    """Write bytes or text to ``path`` via a temporary file and rename."""
    path = Path(path)
    mode = "wb" if isinstance(data, (bytes, bytearray)) else "w"
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, mode, **({} if mode == "wb" else {"newline": ""})) as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _csv_text(field):
    g = field.grid
    lines = ["i,j,x,y,value"]
    for k in range(g.size):
        i = int(g.index[k, 0])
        j = int(g.index[k, 1]) if g.dim == 2 else 0
        x = float(g.coords[k, 0])
        y = float(g.coords[k, 1]) if g.dim == 2 else 0.0
        lines.append(f"{i},{j},{x!r},{y!r},{float(field.values[k])!r}")
    return "\n".join(lines) + "\n"


def write_csv(field, path):
    write_atomic(path, _csv_text(field))


def read_csv(path, grid):
    path = Path(path)
    if not path.exists():
        raise MissingField(str(path))
    data = np.genfromtxt(path, delimiter=",", names=True)
    idx = np.column_stack([data["i"], data["j"]]).astype(np.int64)[:, : grid.dim]
    if len(idx) != grid.size or np.any(idx != grid.index):
        raise GridMismatch(f"{path} does not match the grid")
    return ScalarField(grid, np.asarray(data["value"], dtype=float))


def write_binary(field, directory, name):
    directory = Path(directory)
    g = field.grid
    header = {
        "schema": "v1",
        "name": name,
        "domain": g.spec.to_dict(),
        "h": g.h,
        "count": g.size,
        "dtype": "<f8",
        "order": "row-major by integer index",
        "data": f"{name}.bin",
    }
    write_atomic(directory / f"{name}.bin", np.asarray(field.values, dtype="<f8").tobytes())
    write_atomic(directory / f"{name}.json", json.dumps(header, indent=2, sort_keys=True) + "\n")


def read_binary(directory, name, grid):
    directory = Path(directory)
    hpath = directory / f"{name}.json"
    if not hpath.exists():
        raise MissingField(str(hpath))
    header = json.loads(hpath.read_text())
    spec = DomainSpec.from_dict(header["domain"])
    if spec != grid.spec or float(header["h"]) != grid.h or header["count"] != grid.size:
        raise GridMismatch(f"{hpath} was written for a different grid")
    bpath = directory / header["data"]
    if not bpath.exists():
        raise MissingField(str(bpath))
    values = np.frombuffer(bpath.read_bytes(), dtype="<f8")
    if values.size != grid.size:
        raise GridMismatch(f"{bpath} holds {values.size} values, expected {grid.size}")
    return ScalarField(grid, values.astype(float))
