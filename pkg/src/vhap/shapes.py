"""Synthetic test geometry.

The bundled scenarios and benchmarks use procedurally generated parts
(boxes, icospheres, slotted plates) rather than production CAD. All
generators emit outward-wound triangles so pointshell normals come out
inward.
"""

from __future__ import annotations

import numpy as np

from vhap.geometry import TriangleMesh

_BOX_FACES = np.array(
    [
        [0, 2, 1], [0, 3, 2],  # z-
        [4, 5, 6], [4, 6, 7],  # z+
        [0, 1, 5], [0, 5, 4],  # y-
        [2, 3, 7], [2, 7, 6],  # y+
        [1, 2, 6], [1, 6, 5],  # x+
        [0, 4, 7], [0, 7, 3],  # x-
    ],
    dtype=np.int32,
)


def box_mesh(size=(1.0, 1.0, 1.0), center=(0.0, 0.0, 0.0)) -> TriangleMesh:
    """Closed axis-aligned box, 12 outward-wound triangles."""
    hx, hy, hz = (s / 2.0 for s in size)
    cx, cy, cz = center
    verts = np.array(
        [
            [cx - hx, cy - hy, cz - hz],
            [cx + hx, cy - hy, cz - hz],
            [cx + hx, cy + hy, cz - hz],
            [cx - hx, cy + hy, cz - hz],
            [cx - hx, cy - hy, cz + hz],
            [cx + hx, cy - hy, cz + hz],
            [cx + hx, cy + hy, cz + hz],
            [cx - hx, cy + hy, cz + hz],
        ]
    )
    return TriangleMesh(verts, _BOX_FACES.copy())


def merge_meshes(*meshes: TriangleMesh) -> TriangleMesh:
    """Concatenate meshes into one (indices re-offset, no welding)."""
    verts = []
    faces = []
    offset = 0
    for m in meshes:
        verts.append(m.vertices)
        faces.append(m.triangles + offset)
        offset += m.vertices.shape[0]
    return TriangleMesh(np.concatenate(verts), np.concatenate(faces))


def icosphere(radius: float = 1.0, subdivisions: int = 1, center=(0.0, 0.0, 0.0)) -> TriangleMesh:
    """Subdivided icosahedron projected onto a sphere."""
    phi = (1.0 + np.sqrt(5.0)) / 2.0
    verts = np.array(
        [
            [-1, phi, 0], [1, phi, 0], [-1, -phi, 0], [1, -phi, 0],
            [0, -1, phi], [0, 1, phi], [0, -1, -phi], [0, 1, -phi],
            [phi, 0, -1], [phi, 0, 1], [-phi, 0, -1], [-phi, 0, 1],
        ],
        dtype=np.float64,
    )
    verts /= np.linalg.norm(verts, axis=1, keepdims=True)
    faces = [
        (0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
        (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
        (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
        (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1),
    ]
    verts = list(verts)
    for _ in range(subdivisions):
        cache: dict[tuple[int, int], int] = {}

        def midpoint(i, j):
            key = (min(i, j), max(i, j))
            if key not in cache:
                m = verts[i] + verts[j]
                verts.append(m / np.linalg.norm(m))
                cache[key] = len(verts) - 1
            return cache[key]

        new_faces = []
        for a, b, c in faces:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            new_faces += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        faces = new_faces
    v = np.asarray(verts) * radius + np.asarray(center, dtype=np.float64)
    f = np.asarray(faces, dtype=np.int32)
    # enforce outward winding (convex, centered body)
    corners = v[f]
    n = np.cross(corners[:, 1] - corners[:, 0], corners[:, 2] - corners[:, 0])
    centroid = corners.mean(axis=1) - np.asarray(center, dtype=np.float64)
    flip = np.einsum("ij,ij->i", n, centroid) < 0
    f[flip] = f[flip][:, ::-1]
    return TriangleMesh(v, f)


def plate_with_slot(
    outer=(0.4, 0.4, 0.05), slot=(0.12, 0.12), center=(0.0, 0.0, 0.0)
) -> TriangleMesh:
    """Plate with a rectangular through-slot, built from four closed boxes."""
    sx, sy, sz = outer
    wx, wy = slot
    if wx >= sx or wy >= sy:
        raise ValueError("slot must be smaller than the plate")
    cx, cy, cz = center
    side_w = (sx - wx) / 2.0
    strip_d = (sy - wy) / 2.0
    left = box_mesh((side_w, sy, sz), (cx - (wx + side_w) / 2.0, cy, cz))
    right = box_mesh((side_w, sy, sz), (cx + (wx + side_w) / 2.0, cy, cz))
    front = box_mesh((wx, strip_d, sz), (cx, cy - (wy + strip_d) / 2.0, cz))
    back = box_mesh((wx, strip_d, sz), (cx, cy + (wy + strip_d) / 2.0, cz))
    return merge_meshes(left, right, front, back)


def bracket_mesh(
    base=(0.2, 0.12, 0.02), wall=(0.02, 0.12, 0.1), center=(0.0, 0.0, 0.0)
) -> TriangleMesh:
    """L-bracket: a base plate with a vertical wall along one edge."""
    bx, by, bz = base
    wxs, wys, wzs = wall
    cx, cy, cz = center
    plate = box_mesh(base, (cx, cy, cz))
    upright = box_mesh(wall, (cx - bx / 2.0 + wxs / 2.0, cy, cz + bz / 2.0 + wzs / 2.0))
    return merge_meshes(plate, upright)
