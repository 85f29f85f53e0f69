"""File formats: scatter CSV, text voxel grids, PLY/OBJ meshes and reports.

Every writer takes a ``provenance`` mapping (tool version, config hash, seed)
that is written as comment lines at the top of the file.

Grid file layout (text, one token group per line)::

    # ergoscope grid v1
    # <provenance comments>
    origin <x> <y> <z>
    r <voxel size>
    dims <ni> <nj> <nk>
    values
    <value>            # ni*nj*nk lines, k varies fastest, then j, then i

``origin`` is the center of voxel (0, 0, 0) in file (0-based) indexing.
Floats are written with ``repr`` so a grid round-trips exactly.
"""
import csv

import numpy as np

from . import __version__
from .workspace import TriangleMesh, VoxelGrid

GRID_MAGIC = "# ergoscope grid v1"


def provenance(config_hash, seed):
    return {"tool": f"ergoscope {__version__}", "config_hash": config_hash, "seed": seed}


def _comments(prov, prefix="# "):
    return [f"{prefix}{k}: {v}" for k, v in (prov or {}).items()]


def write_scatter_csv(path, field, prov=None):
    with open(path, "w", newline="") as fh:
        for line in _comments(prov):
            fh.write(line + "\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "y", "z", "dex_raw", "dex_norm"])
        cols = np.column_stack([field.positions, field.dex_raw, field.dex_norm])
        for row in cols:
            w.writerow([f"{v:.9g}" for v in row])


def read_scatter_csv(path):
    """Returns ``(positions, dex_raw, dex_norm)`` arrays."""
    with open(path) as fh:
        rows = [line for line in fh if not line.startswith("#")]
    reader = csv.reader(rows)
    header = next(reader)
    if header != ["x", "y", "z", "dex_raw", "dex_norm"]:
        raise ValueError(f"unexpected scatter header {header}")
    data = np.array([[float(v) for v in row] for row in reader]).reshape(-1, 5)
    return data[:, :3], data[:, 3], data[:, 4]


def write_grid(path, grid, prov=None):
    lines = [GRID_MAGIC, *_comments(prov),
             "origin " + " ".join(repr(float(v)) for v in grid.origin),
             f"r {float(grid.r)!r}",
             "dims " + " ".join(str(n) for n in grid.dims),
             "values"]
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
        fh.write("\n".join(map(repr, grid.values.ravel(order="C").tolist())))
        fh.write("\n")


def read_grid(path):
    with open(path) as fh:
        first = fh.readline().rstrip("\n")
        if first != GRID_MAGIC:
            raise ValueError(f"{path}: not an ergoscope grid file")
        header = {}
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if line == "values":
                break
            key, _, rest = line.partition(" ")
            header[key] = rest.split()
        values = np.array([float(v) for v in fh.read().split()])
    dims = tuple(int(n) for n in header["dims"])
    if values.size != int(np.prod(dims)):
        raise ValueError(f"{path}: expected {np.prod(dims)} values, found {values.size}")
    return VoxelGrid(np.array([float(v) for v in header["origin"]]), float(header["r"][0]),
                     values.reshape(dims))


def write_ply(path, mesh, prov=None):
    head = ["ply", "format ascii 1.0", *_comments(prov, "comment "),
            f"element vertex {len(mesh.vertices)}",
            "property float x", "property float y", "property float z",
            f"element face {len(mesh.triangles)}",
            "property list uchar int vertex_indices", "end_header"]
    with open(path, "w") as fh:
        fh.write("\n".join(head) + "\n")
        for v in mesh.vertices:
            fh.write(f"{v[0]:.9g} {v[1]:.9g} {v[2]:.9g}\n")
        for t in mesh.triangles:
            fh.write(f"3 {t[0]} {t[1]} {t[2]}\n")


def read_ply(path):
    with open(path) as fh:
        lines = fh.read().splitlines()
    n_vert = n_face = 0
    body = 0
    for i, line in enumerate(lines):
        if line.startswith("element vertex"):
            n_vert = int(line.split()[-1])
        elif line.startswith("element face"):
            n_face = int(line.split()[-1])
        elif line == "end_header":
            body = i + 1
            break
    verts = np.array([[float(x) for x in l.split()] for l in lines[body:body + n_vert]]).reshape(-1, 3)
    faces = np.array([[int(x) for x in l.split()[1:4]] for l in lines[body + n_vert:body + n_vert + n_face]],
                     dtype=np.int64).reshape(-1, 3)
    return TriangleMesh(verts, faces)


def write_obj(path, mesh, prov=None):
    with open(path, "w") as fh:
        for line in _comments(prov):
            fh.write(line + "\n")
        for v in mesh.vertices:
            fh.write(f"v {v[0]:.9g} {v[1]:.9g} {v[2]:.9g}\n")
        for t in mesh.triangles:
            fh.write(f"f {t[0] + 1} {t[1] + 1} {t[2] + 1}\n")


def read_obj(path):
    verts, faces = [], []
    with open(path) as fh:
        for line in fh:
            parts = line.split()
            if not parts or parts[0].startswith("#"):
                continue
            if parts[0] == "v":
                verts.append([float(x) for x in parts[1:4]])
            elif parts[0] == "f":
                faces.append([int(x.split("/")[0]) - 1 for x in parts[1:4]])
    return TriangleMesh(np.array(verts).reshape(-1, 3), np.array(faces, dtype=np.int64).reshape(-1, 3))


def format_evaluate_report(design, result, params, prov=None):
    """Key/value report for one design (valid YAML once comments are stripped)."""
    lines = ["# ergoscope evaluate report", *_comments(prov),
             "design:",
             f"  a3: {design.a3!r}",
             f"  a4: {design.a4!r}",
             f"  D: {design.D!r}",
             f"F: {result.F!r}",
             f"V_I: {result.V_I!r}",
             f"V_R: {result.V_R!r}",
             f"score: {result.score!r}",
             "counts:"]
    lines += [f"  {k}: {v!r}" for k, v in result.counts.items()]
    lines.append("parameters:")
    lines += [f"  {k}: {v!r}" for k, v in params.items()]
    return "\n".join(lines) + "\n"


def format_dh_table(model):
    """Link table in the layout: one row per parameter, one column per joint."""
    cols = range(1, len(model.links) + 1)
    rows = [("", [str(j) for j in cols]),
            ("alpha", [f"{l.alpha:.6g}" for l in model.links]),
            ("a", [f"{l.a:.6g}" for l in model.links]),
            ("d", [f"{l.d:.6g}" for l in model.links]),
            ("theta", [f"theta_{j}" for j in cols])]
    return "\n".join(f"{name:<6}" + "".join(f"{c:>12}" for c in cells) for name, cells in rows)


def format_optimize_report(result, model, strategy, budget, prov=None):
    lines = ["# ergoscope optimize report", *_comments(prov),
             f"strategy: {strategy}",
             f"budget: {budget}",
             f"evaluations: {result.evaluations}",
             f"truncated: {str(result.truncated).lower()}",
             f"best: {{a3: {result.best.a3!r}, a4: {result.best.a4!r}, D: {result.best.D!r}}}",
             f"best_F: {result.best_F!r}",
             "",
             "history:",
             f"{'eval':>6} {'a3':>14} {'a4':>14} {'D':>14} {'F':>22} {'best_F':>22}"]
    running = -np.inf
    for i, (p, F) in enumerate(result.history, 1):
        running = max(running, F)
        lines.append(f"{i:>6} {p.a3:>14.9g} {p.a4:>14.9g} {p.D:>14.9g} {F!r:>22} {running!r:>22}")
    lines += ["", "dh_table:", format_dh_table(model.with_lengths(result.best.a3, result.best.a4)),
              f"D = {result.best.D!r}"]
    return "\n".join(lines) + "\n"
