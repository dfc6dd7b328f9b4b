"""Numpy lane of the hot-path kernels.

Functions here mirror ``vhap._native`` exactly. The triangle/box predicate
is the 13-axis separating-axis test for a triangle against an axis-aligned
cube; touching counts as intersecting (separation requires a strict
inequality). Projections are computed as ``a.v - a.c`` (project first,
subtract the projected center) in fixed left-to-right order so that both
lanes round identically.

Voxel cells are half-open boxes [origin + i*s, origin + (i+1)*s) for point
membership; the surface predicate uses the closed cell cube.
"""

from __future__ import annotations

import numpy as np

EMPTY = 0
PROXIMITY = 1
SURFACE = 2
INTERIOR = 3


def _axis_tests(v0, v1, v2, h):
    """Per-triangle scalars for the 13 SAT axes.

    Returns (lo, hi, a) lists where each axis contributes the triangle's
    projection interval [lo, hi], the box radius r, and the projection
    coefficients onto the cell-center coordinates. Axis k's test is
    separated iff lo - m > r or hi - m < -r with m = sum(a * center).
    """
    tests = []
    # box axes: project onto x, y, z
    for k in range(3):
        p0, p1, p2 = v0[k], v1[k], v2[k]
        lo = min(min(p0, p1), p2)
        hi = max(max(p0, p1), p2)
        coeff = [0.0, 0.0, 0.0]
        coeff[k] = 1.0
        tests.append((lo, hi, h, coeff))
    # triangle plane
    e0 = (v1[0] - v0[0], v1[1] - v0[1], v1[2] - v0[2])
    e1 = (v2[0] - v0[0], v2[1] - v0[1], v2[2] - v0[2])
    nx = e0[1] * e1[2] - e0[2] * e1[1]
    ny = e0[2] * e1[0] - e0[0] * e1[2]
    nz = e0[0] * e1[1] - e0[1] * e1[0]
    d = nx * v0[0] + ny * v0[1] + nz * v0[2]
    rn = h * (abs(nx) + abs(ny) + abs(nz))
    tests.append((d, d, rn, [nx, ny, nz]))
    # edge cross box-axis: 9 axes, written with their structural zero dropped
    f0 = (v1[0] - v0[0], v1[1] - v0[1], v1[2] - v0[2])
    f1 = (v2[0] - v1[0], v2[1] - v1[1], v2[2] - v1[2])
    f2 = (v0[0] - v2[0], v0[1] - v2[1], v0[2] - v2[2])
    for ex, ey, ez in (f0, f1, f2):
        for coeff in ([0.0, -ez, ey], [ez, 0.0, -ex], [-ey, ex, 0.0]):
            ax, ay, az = coeff
            p0 = ax * v0[0] + ay * v0[1] + az * v0[2]
            p1 = ax * v1[0] + ay * v1[1] + az * v1[2]
            p2 = ax * v2[0] + ay * v2[1] + az * v2[2]
            lo = min(min(p0, p1), p2)
            hi = max(max(p0, p1), p2)
            r = h * (abs(ax) + abs(ay) + abs(az))
            tests.append((lo, hi, r, coeff))
    return tests


def _candidate_range(corners, origin, s, dims):
    """Inclusive index range of cells a triangle could touch (AABB +- 1)."""
    lo_idx = []
    hi_idx = []
    for k in range(3):
        cmin = float(corners[:, k].min())
        cmax = float(corners[:, k].max())
        i0 = int(np.floor((cmin - origin[k]) / s)) - 1
        i1 = int(np.floor((cmax - origin[k]) / s)) + 1
        lo_idx.append(max(0, i0))
        hi_idx.append(min(int(dims[k]) - 1, i1))
    return lo_idx, hi_idx


def _hit_mask(tri, origin, s, lo_idx, hi_idx):
    """Boolean (bz, by, bx) intersection mask over a candidate cell block."""
    h = 0.5 * s
    v0 = (float(tri[0, 0]), float(tri[0, 1]), float(tri[0, 2]))
    v1 = (float(tri[1, 0]), float(tri[1, 1]), float(tri[1, 2]))
    v2 = (float(tri[2, 0]), float(tri[2, 1]), float(tri[2, 2]))
    cx = origin[0] + (np.arange(lo_idx[0], hi_idx[0] + 1, dtype=np.float64) + 0.5) * s
    cy = origin[1] + (np.arange(lo_idx[1], hi_idx[1] + 1, dtype=np.float64) + 0.5) * s
    cz = origin[2] + (np.arange(lo_idx[2], hi_idx[2] + 1, dtype=np.float64) + 0.5) * s
    cx = cx[None, None, :]
    cy = cy[None, :, None]
    cz = cz[:, None, None]
    shape = (cz.shape[0], cy.shape[1], cx.shape[2])
    separated = np.zeros(shape, dtype=bool)
    for lo, hi, r, (ax, ay, az) in _axis_tests(v0, v1, v2, h):
        m = ax * cx + ay * cy + az * cz
        separated |= (lo - m > r) | (hi - m < -r)
    return ~separated


def mark_surface(tri_corners, origin, voxel_size, dims, states):
    """Set SURFACE on every cell whose cube intersects some triangle."""
    origin = [float(origin[0]), float(origin[1]), float(origin[2])]
    s = float(voxel_size)
    nx, ny = int(dims[0]), int(dims[1])
    states3 = states.reshape(int(dims[2]), ny, nx)
    for tri in tri_corners:
        lo_idx, hi_idx = _candidate_range(tri, origin, s, dims)
        if any(lo_idx[k] > hi_idx[k] for k in range(3)):
            continue
        hit = _hit_mask(tri, origin, s, lo_idx, hi_idx)
        block = states3[
            lo_idx[2] : hi_idx[2] + 1, lo_idx[1] : hi_idx[1] + 1, lo_idx[0] : hi_idx[0] + 1
        ]
        block[hit] = SURFACE


def accumulate_normals(tri_corners, origin, voxel_size, dims, states, aux, accum, fallback):
    """Accumulate area-weighted triangle normals into surface-cell slots.

    accum[aux[cell]] receives cross(v1-v0, v2-v0) (twice-area-weighted) from
    every intersecting triangle, in triangle order. fallback[aux[cell]] keeps
    the last intersecting triangle's unit normal for cells whose weighted sum
    cancels to zero.
    """
    origin = [float(origin[0]), float(origin[1]), float(origin[2])]
    s = float(voxel_size)
    nx, ny = int(dims[0]), int(dims[1])
    for tri in tri_corners:
        lo_idx, hi_idx = _candidate_range(tri, origin, s, dims)
        if any(lo_idx[k] > hi_idx[k] for k in range(3)):
            continue
        hit = _hit_mask(tri, origin, s, lo_idx, hi_idx)
        if not hit.any():
            continue
        bz, by, bx = np.nonzero(hit)
        flat = (bx + lo_idx[0]) + nx * ((by + lo_idx[1]) + ny * (bz + lo_idx[2]))
        slots = aux[flat]
        e0 = tri[1] - tri[0]
        e1 = tri[2] - tri[0]
        wn = np.array(
            [
                e0[1] * e1[2] - e0[2] * e1[1],
                e0[2] * e1[0] - e0[0] * e1[2],
                e0[0] * e1[1] - e0[1] * e1[0],
            ]
        )
        np.add.at(accum, slots, wn[None, :])
        norm = float(np.sqrt(wn[0] * wn[0] + wn[1] * wn[1] + wn[2] * wn[2]))
        if norm > 0.0:
            fallback[slots] = wn / norm


def detect_contacts(points, rot, trans, states, aux, surface_normals, origin, voxel_size, dims):
    """Voxel lookups for every shell point at a tool pose.

    Returns (index, world, normal, depth, deep, lookups): per-contact arrays
    in ascending point order, a deep-penetration flag (any point in an
    INTERIOR cell) and the number of lookups performed (= len(points)).
    Depth is the distance below the tangent plane through the contacted
    cell's center, clamped to [0, voxel_size].
    """
    pts = np.asarray(points, dtype=np.float64)
    s = float(voxel_size)
    ox, oy, oz = float(origin[0]), float(origin[1]), float(origin[2])
    nx, ny, nz = int(dims[0]), int(dims[1]), int(dims[2])

    wx = pts[:, 0] * rot[0, 0] + pts[:, 1] * rot[0, 1] + pts[:, 2] * rot[0, 2] + trans[0]
    wy = pts[:, 0] * rot[1, 0] + pts[:, 1] * rot[1, 1] + pts[:, 2] * rot[1, 2] + trans[1]
    wz = pts[:, 0] * rot[2, 0] + pts[:, 1] * rot[2, 1] + pts[:, 2] * rot[2, 2] + trans[2]

    nonneg = (wx >= ox) & (wy >= oy) & (wz >= oz)
    gxf = (wx - ox) / s
    gyf = (wy - oy) / s
    gzf = (wz - oz) / s
    inside = nonneg & (gxf < nx) & (gyf < ny) & (gzf < nz)
    gx = np.where(inside, gxf, 0.0).astype(np.int64)
    gy = np.where(inside, gyf, 0.0).astype(np.int64)
    gz = np.where(inside, gzf, 0.0).astype(np.int64)

    flat = np.where(inside, gx + nx * (gy + ny * gz), 0)
    st = np.where(inside, states[flat], EMPTY)

    deep = bool(np.any(st == INTERIOR))
    hit = np.flatnonzero(st == SURFACE)
    slots = aux[flat[hit]]
    n = surface_normals[slots]
    cxs = ox + (gx[hit].astype(np.float64) + 0.5) * s
    cys = oy + (gy[hit].astype(np.float64) + 0.5) * s
    czs = oz + (gz[hit].astype(np.float64) + 0.5) * s
    depth = -(
        n[:, 0] * (wx[hit] - cxs) + n[:, 1] * (wy[hit] - cys) + n[:, 2] * (wz[hit] - czs)
    )
    np.clip(depth, 0.0, s, out=depth)

    world = np.column_stack([wx[hit], wy[hit], wz[hit]])
    return hit.astype(np.int32), world, n.copy(), depth, deep, pts.shape[0]
