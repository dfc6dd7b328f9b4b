"""Volumetric haptic representations: voxmaps and pointshells.

The static/already-assembled side of a scene becomes a ``VoxMap``: a dense
grid classifying space as Empty, Proximity (narrow band around the surface,
with distance-to-surface values), Surface (cells the mesh passes through,
carrying an area-weighted surface normal) or Interior. The manipulated part
becomes a ``PointShell``: points sampled on its surface with inward normals.

``cook_voxmaps`` merges several posed parts into one voxmap, which is how an
assembly state advances between steps: everything already mounted gets
re-voxelized as a single static map.

Cell addressing is x-fastest: ``flat = ix + nx * (iy + ny * iz)``. A point
belongs to cell i on an axis iff ``origin + i*s <= x < origin + (i+1)*s``
(half-open); the surface predicate uses the closed cell cube, so a triangle
touching a cell face marks both neighbors only when it actually reaches
into each closed cube. Triangles are canonically sorted before rasterizing,
which makes multi-part cooking independent of part order bit-for-bit.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy import ndimage

from vhap import _kernels
from vhap._reference import EMPTY, INTERIOR, PROXIMITY, SURFACE
from vhap.geometry import Aabb, RigidPose, TriangleMesh, _readonly

DEFAULT_CELL_BUDGET = 2**27
DEFAULT_POINT_BUDGET = 10**6

_STATE_CHARS = {EMPTY: ".", PROXIMITY: "p", SURFACE: "s", INTERIOR: "i"}


class VolumetricError(ValueError):
    pass


class CellBudgetError(VolumetricError):
    """Grid would exceed the configured cell budget."""


class PointBudgetError(VolumetricError):
    """Sampler would exceed the configured point budget."""


@dataclass(frozen=True)
class VoxelState:
    """State of one cell: kind plus the payload that kind carries."""

    kind: int
    distance: float | None = None
    normal: np.ndarray | None = None

    @property
    def is_empty(self) -> bool:
        return self.kind == EMPTY

    @property
    def is_surface(self) -> bool:
        return self.kind == SURFACE


EMPTY_STATE = VoxelState(EMPTY)
INTERIOR_STATE = VoxelState(INTERIOR)


@dataclass(frozen=True)
class VoxMap:
    """Dense voxel classification of the static scene.

    cells: (nx*ny*nz,) uint8 of state tags, x-fastest. aux maps a Surface
    cell to its row in surface_normals and a Proximity cell to its slot in
    proximity_distances (-1 elsewhere).
    """

    origin: np.ndarray
    voxel_size: float
    dims: tuple[int, int, int]
    cells: np.ndarray
    aux: np.ndarray
    surface_normals: np.ndarray
    proximity_distances: np.ndarray
    band_width: float
    surface_count: int

    def __post_init__(self):
        object.__setattr__(self, "origin", _readonly(np.asarray(self.origin, np.float64)))
        object.__setattr__(self, "cells", _readonly(np.asarray(self.cells, np.uint8)))
        object.__setattr__(self, "aux", _readonly(np.asarray(self.aux, np.int32)))
        object.__setattr__(
            self, "surface_normals", _readonly(np.asarray(self.surface_normals, np.float64))
        )
        object.__setattr__(
            self,
            "proximity_distances",
            _readonly(np.asarray(self.proximity_distances, np.float64)),
        )
        nx, ny, nz = self.dims
        if self.cells.shape != (nx * ny * nz,):
            raise VolumetricError("cells length does not match dims")

    @property
    def num_cells(self) -> int:
        nx, ny, nz = self.dims
        return nx * ny * nz

    def flat_index(self, ix: int, iy: int, iz: int) -> int:
        nx, ny, _ = self.dims
        return ix + nx * (iy + ny * iz)

    def cell_center(self, ix: int, iy: int, iz: int) -> np.ndarray:
        return self.origin + (np.array([ix, iy, iz], dtype=np.float64) + 0.5) * self.voxel_size

    def point_to_index(self, p) -> tuple[int, int, int] | None:
        """Grid index of the half-open cell containing p, None if outside."""
        p = np.asarray(p, dtype=np.float64)
        g = (p - self.origin) / self.voxel_size
        if np.any(p < self.origin) or np.any(g >= np.asarray(self.dims, dtype=np.float64)):
            return None
        ix, iy, iz = (int(g[0]), int(g[1]), int(g[2]))
        return ix, iy, iz

    def state_at_index(self, ix: int, iy: int, iz: int) -> VoxelState:
        flat = self.flat_index(ix, iy, iz)
        tag = int(self.cells[flat])
        if tag == SURFACE:
            return VoxelState(SURFACE, normal=self.surface_normals[self.aux[flat]])
        if tag == PROXIMITY:
            return VoxelState(PROXIMITY, distance=float(self.proximity_distances[self.aux[flat]]))
        if tag == INTERIOR:
            return INTERIOR_STATE
        return EMPTY_STATE

    def grid(self) -> np.ndarray:
        """Cells as a (nz, ny, nx) view (x fastest in memory)."""
        nx, ny, nz = self.dims
        return self.cells.reshape(nz, ny, nx)

    def validate(self) -> None:
        """Full invariant scan; test/debug helper, not on the hot path."""
        if int(np.count_nonzero(self.cells == SURFACE)) != self.surface_count:
            raise VolumetricError("surface_count does not match cells")
        if self.surface_normals.shape != (self.surface_count, 3):
            raise VolumetricError("surface_normals shape mismatch")
        norms = np.linalg.norm(self.surface_normals, axis=1)
        if self.surface_count and np.abs(norms - 1.0).max() > 1e-9:
            raise VolumetricError("non-unit surface normal")
        if self.proximity_distances.size:
            if self.proximity_distances.min() < 0 or (
                self.proximity_distances.max() > self.band_width + 1e-12
            ):
                raise VolumetricError("proximity distance outside [0, band_width]")


@dataclass(frozen=True)
class PointShell:
    """Surface samples of the manipulated part, tool-local frame.

    normals point INTO the body (outward triangle normal negated); that is
    the direction a penalty force pushes the tool out of a contact.
    """

    points: np.ndarray
    normals: np.ndarray
    spacing: float

    def __post_init__(self):
        p = np.asarray(self.points, dtype=np.float64).reshape(-1, 3)
        n = np.asarray(self.normals, dtype=np.float64).reshape(-1, 3)
        if p.shape != n.shape:
            raise VolumetricError("points/normals length mismatch")
        if p.shape[0] == 0:
            raise VolumetricError("empty pointshell")
        lens = np.linalg.norm(n, axis=1)
        if np.abs(lens - 1.0).max() > 1e-9:
            raise VolumetricError("non-unit pointshell normal")
        object.__setattr__(self, "points", _readonly(p))
        object.__setattr__(self, "normals", _readonly(n))

    def __len__(self) -> int:
        return int(self.points.shape[0])


def _canonical_soup(corners: np.ndarray) -> np.ndarray:
    """Triangles sorted by their 9 coordinates; stable under any input order."""
    flat = corners.reshape(-1, 9)
    order = np.lexsort(tuple(flat[:, k] for k in range(8, -1, -1)))
    return np.ascontiguousarray(corners[order])


def _grid_for_bounds(lo, hi, voxel_size: float, band_width: float, cell_budget: int):
    pad = band_width + voxel_size
    origin = lo - pad
    extent = (hi + pad) - origin
    dims = tuple(int(max(1.0, np.ceil(e / voxel_size))) for e in extent)
    ncells = dims[0] * dims[1] * dims[2]
    if ncells > cell_budget:
        raise CellBudgetError(
            f"grid {dims[0]}x{dims[1]}x{dims[2]} = {ncells} cells exceeds budget {cell_budget}; "
            f"increase voxel_size (currently {voxel_size})"
        )
    return origin, dims


def _classify_interior(states: np.ndarray, dims) -> None:
    """Mark non-surface cells unreachable from the grid boundary as INTERIOR.

    6-connected flood fill: every connected component of non-surface cells
    that never touches a grid boundary face is enclosed by surface.
    """
    nx, ny, nz = dims
    grid = states.reshape(nz, ny, nx)
    open_mask = grid != SURFACE
    if not open_mask.any():
        return
    structure = ndimage.generate_binary_structure(3, 1)
    labels, _ = ndimage.label(open_mask, structure=structure)
    boundary = np.unique(
        np.concatenate(
            [
                labels[0].ravel(),
                labels[-1].ravel(),
                labels[:, 0].ravel(),
                labels[:, -1].ravel(),
                labels[:, :, 0].ravel(),
                labels[:, :, -1].ravel(),
            ]
        )
    )
    outside = np.isin(labels, boundary[boundary != 0])
    grid[open_mask & ~outside] = INTERIOR


def _voxelize_soup(
    corners: np.ndarray,
    voxel_size: float,
    band_width: float,
    cell_budget: int,
    backend,
) -> VoxMap:
    if voxel_size <= 0:
        raise ValueError(f"voxel_size must be positive, got {voxel_size}")
    if band_width < 0:
        raise ValueError(f"band_width must be nonnegative, got {band_width}")
    if corners.shape[0] == 0:
        raise VolumetricError("nothing to voxelize")
    soup = _canonical_soup(corners)
    lo = soup.reshape(-1, 3).min(axis=0)
    hi = soup.reshape(-1, 3).max(axis=0)
    origin, dims = _grid_for_bounds(lo, hi, voxel_size, band_width, cell_budget)
    ncells = dims[0] * dims[1] * dims[2]

    states = np.zeros(ncells, dtype=np.uint8)
    backend.mark_surface(soup, origin, voxel_size, dims, states)

    surf_flat = np.flatnonzero(states == SURFACE)
    surface_count = int(surf_flat.size)
    aux = np.full(ncells, -1, dtype=np.int32)
    aux[surf_flat] = np.arange(surface_count, dtype=np.int32)

    accum = np.zeros((surface_count, 3), dtype=np.float64)
    fallback = np.zeros((surface_count, 3), dtype=np.float64)
    backend.accumulate_normals(soup, origin, voxel_size, dims, states, aux, accum, fallback)
    norms = np.linalg.norm(accum, axis=1)
    degenerate = norms <= 1e-20
    safe = np.where(degenerate, 1.0, norms)
    normals = accum / safe[:, None]
    if degenerate.any():
        fb_ok = np.linalg.norm(fallback[degenerate], axis=1) > 0
        repl = np.where(fb_ok[:, None], fallback[degenerate], np.array([[0.0, 0.0, 1.0]]))
        normals[degenerate] = repl

    _classify_interior(states, dims)

    if band_width > 0:
        nx, ny, nz = dims
        dist = ndimage.distance_transform_edt(
            (states != SURFACE).reshape(nz, ny, nx), sampling=voxel_size
        ).ravel()
        prox_flat = np.flatnonzero((states == EMPTY) & (dist > 0) & (dist <= band_width))
        aux[prox_flat] = np.arange(prox_flat.size, dtype=np.int32)
        states[prox_flat] = PROXIMITY
        prox_dist = dist[prox_flat]
    else:
        prox_dist = np.empty(0, dtype=np.float64)

    return VoxMap(
        origin=origin,
        voxel_size=float(voxel_size),
        dims=dims,
        cells=states,
        aux=aux,
        surface_normals=normals,
        proximity_distances=prox_dist,
        band_width=float(band_width),
        surface_count=surface_count,
    )


def voxelize_surface(
    mesh: TriangleMesh,
    voxel_size: float,
    band_width: float = 0.0,
    *,
    cell_budget: int = DEFAULT_CELL_BUDGET,
    backend: str = "auto",
) -> VoxMap:
    """Voxelize one mesh: surface shell + proximity band + interior fill.

    The grid covers the mesh bounds padded by band_width + one voxel. A cell
    is Surface iff some triangle intersects its (closed) cube; its normal is
    the normalized area-weighted mean of the intersecting triangles' normals.
    Non-surface cells enclosed by the shell become Interior; empty cells
    whose center lies within band_width of a surface-cell center become
    Proximity and store that center-to-center distance.
    """
    return _voxelize_soup(
        mesh.triangle_corners(), voxel_size, band_width, cell_budget, _kernels.get_backend(backend)
    )


def cook_voxmaps(
    parts: Sequence[tuple[TriangleMesh, RigidPose]],
    voxel_size: float,
    band_width: float = 0.0,
    *,
    cell_budget: int = DEFAULT_CELL_BUDGET,
    backend: str = "auto",
) -> VoxMap:
    """Voxelize the union of posed meshes as a single static map.

    Equivalent to voxelize_surface on the merged surface soup; the part
    order does not matter (triangles are canonically sorted internally).
    """
    parts = list(parts)
    if not parts:
        raise ValueError("cook_voxmaps needs at least one part")
    soups = []
    for mesh, pose in parts:
        corners = mesh.triangle_corners()
        posed = corners @ pose.rotation.T + pose.position
        soups.append(posed)
    merged = np.concatenate(soups, axis=0)
    return _voxelize_soup(merged, voxel_size, band_width, cell_budget, _kernels.get_backend(backend))


def build_pointshell(
    mesh: TriangleMesh,
    spacing: float,
    *,
    point_budget: int = DEFAULT_POINT_BUDGET,
) -> PointShell:
    """Sample the mesh surface at roughly ``spacing``, normals inward.

    Each triangle gets a uniform barycentric grid (subdivision count set by
    its longest edge) plus its corners; samples closer than spacing/4 are
    deduplicated, first occurrence wins. Points lie exactly on their source
    triangle; normals are the triangle plane normal flipped inward, assuming
    outward-wound (counter-clockwise seen from outside) faces.
    """
    if spacing <= 0:
        raise ValueError(f"spacing must be positive, got {spacing}")
    corners = mesh.triangle_corners()
    all_pts: list[np.ndarray] = []
    all_nrm: list[np.ndarray] = []
    total = 0
    for tri in corners:
        a, b, c = tri
        e0 = b - a
        e1 = c - a
        cross = np.cross(e0, e1)
        area2 = float(np.linalg.norm(cross))
        if area2 <= 0.0:
            continue
        inward = -cross / area2
        max_edge = max(
            float(np.linalg.norm(e0)),
            float(np.linalg.norm(e1)),
            float(np.linalg.norm(c - b)),
        )
        n = max(1, int(np.ceil(max_edge / spacing)))
        i, j = np.meshgrid(np.arange(n + 1), np.arange(n + 1), indexing="ij")
        keep = (i + j) <= n
        u = i[keep] / n
        v = j[keep] / n
        pts = a[None, :] + u[:, None] * e0[None, :] + v[:, None] * e1[None, :]
        total += pts.shape[0]
        if total > point_budget:
            raise PointBudgetError(
                f"pointshell would exceed {point_budget} points before deduplication; "
                f"increase spacing (currently {spacing})"
            )
        all_pts.append(pts)
        all_nrm.append(np.broadcast_to(inward, pts.shape))
    if not all_pts:
        raise VolumetricError("mesh has no non-degenerate triangles to sample")
    pts = np.concatenate(all_pts, axis=0)
    nrm = np.concatenate(all_nrm, axis=0)

    # dedup: quantize to spacing/4 boxes, keep the first sample in each box
    q = spacing / 4.0
    lo = pts.min(axis=0)
    keys = np.floor((pts - lo) / q).astype(np.int64)
    packed = (keys[:, 0] << 42) ^ (keys[:, 1] << 21) ^ keys[:, 2]
    _, first = np.unique(packed, return_index=True)
    first.sort()
    return PointShell(pts[first], nrm[first], float(spacing))


def dump_voxmap(voxmap: VoxMap, path=None) -> str:
    """Debug dump: header line, then one char per cell, one z-slice per paragraph."""
    nx, ny, nz = voxmap.dims
    o = voxmap.origin
    lines = [f"voxmap {nx} {ny} {nz} {voxmap.voxel_size!r} {o[0]!r} {o[1]!r} {o[2]!r}"]
    table = np.array([_STATE_CHARS[k] for k in (EMPTY, PROXIMITY, SURFACE, INTERIOR)])
    grid = voxmap.grid()
    for iz in range(nz):
        for iy in range(ny):
            lines.append("".join(table[grid[iz, iy]]))
        lines.append("")
    text = "\n".join(lines)
    if path is not None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    return text
