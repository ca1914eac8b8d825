"""Serialization: SLF1 binary field snapshots, CSV series/field/trajectory
tables, canonical JSON reports.

SLF1 layout (little-endian):
    magic   4 bytes  b"SLF1"
    dim     uint32
    n       uint32   points per axis
    L       float64  length per axis
    t       float64  snapshot time
    payload float64  interleaved Re, Im over grid points in C order
"""

from __future__ import annotations

import csv
import hashlib
import json
import struct
from pathlib import Path

import numpy as np

from .grid_field import Grid, PhysicalParams, Wavefunction, polar_decompose, \
    quantum_potential

MAGIC = b"SLF1"


class FormatError(ValueError):
    pass


def write_slf1(psi: Wavefunction, path) -> None:
    grid = psi.grid
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<II", grid.dim, grid.npoints))
        fh.write(struct.pack("<dd", grid.length, float(psi.t)))
        inter = np.empty(grid.size * 2)
        flat = psi.values.ravel()
        inter[0::2] = flat.real
        inter[1::2] = flat.imag
        fh.write(inter.astype("<f8").tobytes())


def read_slf1(path) -> Wavefunction:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != MAGIC:
            raise FormatError(f"bad magic {magic!r}, expected {MAGIC!r}")
        dim, n = struct.unpack("<II", fh.read(8))
        length, t = struct.unpack("<dd", fh.read(16))
        grid = Grid(dim=dim, length=length, npoints=n)
        inter = np.frombuffer(fh.read(grid.size * 16), dtype="<f8")
        if inter.size != grid.size * 2:
            raise FormatError("truncated SLF1 payload")
    values = (inter[0::2] + 1j * inter[1::2]).reshape(grid.shape)
    return Wavefunction(grid, values, t)


def write_field_csv(psi: Wavefunction, path,
                    params: PhysicalParams | None = None) -> None:
    """One row per grid point: coordinates, Re psi, Im psi, R, S, Q."""
    grid = psi.grid
    polar = polar_decompose(psi)
    q = quantum_potential(polar, params or PhysicalParams.quantum())
    coords = grid.meshgrid()
    header = (["x", "y"][: grid.dim]) + ["re_psi", "im_psi", "R", "S", "Q"]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        flat = [c.ravel() for c in coords]
        vals = psi.values.ravel()
        for i in range(grid.size):
            row = [repr(float(c[i])) for c in flat]
            row += [repr(float(vals[i].real)), repr(float(vals[i].imag)),
                    repr(float(polar.R.ravel()[i])), repr(float(polar.S.ravel()[i])),
                    repr(float(q.ravel()[i]))]
            writer.writerow(row)


def write_series_csv(rows, header, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(float(v)) if isinstance(v, (int, float, np.floating))
                             else str(v) for v in row])


def write_trajectories_csv(ensemble, path, stride: int = 1) -> None:
    """Columns: traj_id, t, x[, y]."""
    dim = ensemble.positions.shape[2]
    header = ["traj_id", "t", "x"] + (["y"] if dim == 2 else [])
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for i in range(ensemble.n_trajectories):
            for j in range(0, len(ensemble.times), stride):
                row = [i, repr(float(ensemble.times[j]))]
                row += [repr(float(v)) for v in ensemble.positions[i, j]]
                writer.writerow(row)


def ensemble_manifest(ensemble, extra: dict | None = None) -> dict:
    doc = {
        "kind": ensemble.kind,
        "n_trajectories": int(ensemble.n_trajectories),
        "seeds": [int(s) for s in np.unique(ensemble.seeds)],
        "t_start": float(ensemble.times[0]),
        "t_end": float(ensemble.times[-1]),
        "flagged_node_region": int(ensemble.node_flags.sum()),
    }
    if extra:
        doc.update(extra)
    return doc


def canonical_json(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=True, default=_json_default)


def _json_default(obj):
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialize {type(obj)}")


def write_json(doc, path) -> None:
    Path(path).write_text(canonical_json(doc) + "\n")


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()
