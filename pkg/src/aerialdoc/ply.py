"""ASCII PLY reading and writing for point clouds.

Only the vertex element is honored: float properties x, y, z are read,
optional uchar r/g/b columns are skipped, everything else is rejected.
Writing always emits the minimal x/y/z layout.
"""

from __future__ import annotations

import os

import numpy as np

from .errors import SchemaError
from .geometry import PointCloud

_FLOAT_TYPES = {"float", "float32", "double", "float64"}
_SKIP_TYPES = {"uchar", "uint8", "char", "int8"}


def read_ply(path, frame_label: str = "map") -> PointCloud:
    with open(path, "r", encoding="utf-8") as fh:
        line = fh.readline().strip()
        if line != "ply":
            raise SchemaError(f"{path}: not a PLY file (missing 'ply' magic)")
        vertex_count = None
        properties = []  # (name, type) in file order, for the vertex element
        in_vertex = False
        while True:
            line = fh.readline()
            if not line:
                raise SchemaError(f"{path}: unexpected EOF in header")
            parts = line.strip().split()
            if not parts:
                continue
            if parts[0] == "format":
                if parts[1] != "ascii":
                    raise SchemaError(f"{path}: only ascii PLY is supported")
            elif parts[0] == "element":
                in_vertex = parts[1] == "vertex"
                if in_vertex:
                    vertex_count = int(parts[2])
                elif int(parts[2]) != 0:
                    raise SchemaError(f"{path}: unsupported element '{parts[1]}'")
            elif parts[0] == "property" and in_vertex:
                properties.append((parts[2], parts[1]))
            elif parts[0] == "end_header":
                break
        if vertex_count is None:
            raise SchemaError(f"{path}: no vertex element")
        columns = {}
        for idx, (name, typ) in enumerate(properties):
            if name in ("x", "y", "z"):
                if typ not in _FLOAT_TYPES:
                    raise SchemaError(f"{path}: property {name} must be float")
                columns[name] = idx
            elif typ not in _FLOAT_TYPES and typ not in _SKIP_TYPES:
                raise SchemaError(f"{path}: unsupported property type '{typ}'")
        if set(columns) != {"x", "y", "z"}:
            raise SchemaError(f"{path}: vertex element lacks x/y/z properties")
        data = np.loadtxt(fh, max_rows=vertex_count, ndmin=2) if vertex_count else np.zeros((0, len(properties)))
        if data.shape[0] != vertex_count:
            raise SchemaError(
                f"{path}: expected {vertex_count} vertices, found {data.shape[0]}"
            )
        pts = data[:, [columns["x"], columns["y"], columns["z"]]]
    return PointCloud(pts, frame_label)


def write_ply(path, cloud: PointCloud) -> None:
    pts = cloud.points
    tmp = f"{path}.tmp{os.getpid()}"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write("ply\nformat ascii 1.0\n")
        fh.write(f"element vertex {len(cloud)}\n")
        fh.write("property double x\nproperty double y\nproperty double z\n")
        fh.write("end_header\n")
        for p in pts:
            fh.write(f"{float(p[0])!r} {float(p[1])!r} {float(p[2])!r}\n")
    os.replace(tmp, path)
