"""Mesh tessellation and OBJ / PLY / CSV / JSON writers."""

from __future__ import annotations

import io
import json
from dataclasses import dataclass

import numpy as np

from .sampling import SurfaceGrid

CSV_COLUMNS = (
    "u1", "u2", "x", "y", "z", "nx", "ny", "nz",
    "H", "K", "psi", "Lambda",
    "ss_residual", "ss_residual_fd", "midsphere_residual", "support_residual", "masked",
)


@dataclass(frozen=True)
class Mesh:
    vertices: np.ndarray   # (n, 3)
    normals: np.ndarray    # (n, 3)
    faces: np.ndarray      # (m, 3) int, counterclockwise seen from the normal side


def tessellate(sg: SurfaceGrid) -> Mesh:
    """Split each grid quad with four regular corners into two triangles.

    Vertices are the regular grid points in row-major order.  When the grid
    wraps in its second axis the last column connects back to the first.
    """
    X, N, regular = sg.closed.X, sg.closed.N, sg.regular
    n1, n2 = regular.shape
    index = -np.ones(regular.shape, dtype=np.int64)
    index[regular] = np.arange(int(regular.sum()))
    cols = n2 if sg.grid.wraps else n2 - 1
    faces = []
    for i in range(n1 - 1):
        for j in range(cols):
            jn = (j + 1) % n2
            quad = (index[i, j], index[i + 1, j], index[i + 1, jn], index[i, jn])
            if min(quad) < 0:
                continue
            a, b, c, d = quad
            for tri in ((a, b, c), (a, c, d)):
                faces.append(tri)
    faces = np.array(faces, dtype=np.int64).reshape(-1, 3)
    verts, norms = X[regular], N[regular]
    if len(faces):
        p0, p1, p2 = verts[faces[:, 0]], verts[faces[:, 1]], verts[faces[:, 2]]
        face_n = np.cross(p1 - p0, p2 - p0)
        mean_n = norms[faces].sum(axis=1)
        flip = np.sum(face_n * mean_n, axis=-1) < 0
        faces[flip] = faces[flip][:, [0, 2, 1]]
    return Mesh(verts, norms, faces)


def _g(x: float) -> str:
    return format(float(x), ".12g")


def write_obj(mesh: Mesh, path, header: dict | None = None) -> None:
    buf = io.StringIO()
    for k, v in (header or {}).items():
        buf.write(f"# {k}: {v}\n")
    for v in mesh.vertices:
        buf.write(f"v {_g(v[0])} {_g(v[1])} {_g(v[2])}\n")
    for n in mesh.normals:
        buf.write(f"vn {_g(n[0])} {_g(n[1])} {_g(n[2])}\n")
    for a, b, c in mesh.faces + 1:
        buf.write(f"f {a}//{a} {b}//{b} {c}//{c}\n")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(buf.getvalue())


def write_ply(mesh: Mesh, path, header: dict | None = None) -> None:
    nv, nf = len(mesh.vertices), len(mesh.faces)
    lines = ["ply", "format binary_little_endian 1.0"]
    lines += [f"comment {k}: {v}" for k, v in (header or {}).items()]
    lines += [
        f"element vertex {nv}",
        "property double x", "property double y", "property double z",
        "property double nx", "property double ny", "property double nz",
        f"element face {nf}",
        "property list uchar int vertex_indices",
        "end_header",
    ]
    vdata = np.empty(nv, dtype=[(k, "<f8") for k in ("x", "y", "z", "nx", "ny", "nz")])
    for i, k in enumerate(("x", "y", "z")):
        vdata[k] = mesh.vertices[:, i]
        vdata["n" + k] = mesh.normals[:, i]
    fdata = np.empty(nf, dtype=[("n", "u1"), ("idx", "<i4", (3,))])
    fdata["n"] = 3
    fdata["idx"] = mesh.faces
    with open(path, "wb") as fh:
        fh.write(("\n".join(lines) + "\n").encode("ascii"))
        fh.write(vdata.tobytes())
        fh.write(fdata.tobytes())


def read_ply(path) -> Mesh:
    with open(path, "rb") as fh:
        data = fh.read()
    end = data.index(b"end_header\n") + len(b"end_header\n")
    header = data[:end].decode("ascii").splitlines()
    nv = int(next(l for l in header if l.startswith("element vertex")).split()[-1])
    nf = int(next(l for l in header if l.startswith("element face")).split()[-1])
    v = np.frombuffer(data, dtype="<f8", count=6 * nv, offset=end).reshape(nv, 6)
    f = np.frombuffer(data, dtype=[("n", "u1"), ("idx", "<i4", (3,))], count=nf, offset=end + 48 * nv)
    return Mesh(v[:, :3].copy(), v[:, 3:].copy(), f["idx"].astype(np.int64))


def csv_rows(sg: SurfaceGrid) -> np.ndarray:
    s = sg.closed
    from .core import normalized_ss_residual

    ss_fd = (normalized_ss_residual(sg.fd.psi, sg.fd.lam, sg.fd.H, sg.fd.K)
             if sg.fd is not None else np.full(sg.grid.shape, np.nan))
    cols = [
        sg.grid.u1, sg.grid.u2,
        s.X[..., 0], s.X[..., 1], s.X[..., 2],
        s.N[..., 0], s.N[..., 1], s.N[..., 2],
        s.H, s.K, s.psi, s.lam,
        s.ss_residual, ss_fd, s.midsphere_residual, np.abs(s.psi - s.h) / s.h,
        sg.mask.astype(float),
    ]
    return np.stack([np.ravel(c) for c in cols], axis=-1)


def write_csv(sg: SurfaceGrid, path) -> None:
    rows = csv_rows(sg)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(CSV_COLUMNS) + "\n")
        for r in rows:
            vals = [_g(x) for x in r[:-1]] + [str(int(r[-1]))]
            fh.write(",".join(vals) + "\n")


def dumps_report(report_dict: dict) -> str:
    return json.dumps(report_dict, indent=2, allow_nan=False) + "\n"
