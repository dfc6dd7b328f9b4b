import numpy as np
import pytest
from scipy.spatial import cKDTree

from vhap import volumetric as vol
from vhap.geometry import RigidPose, TriangleMesh
from vhap.shapes import box_mesh, icosphere

from oracles import (
    interior_oracle,
    point_mesh_distance,
    voxel_surface_oracle,
)


def random_soup_mesh(rng, n_tris, scale=1.0):
    """Triangle soup with vertices in a [0, scale] box."""
    verts = rng.uniform(0, scale, size=(3 * n_tris, 3))
    tris = np.arange(3 * n_tris, dtype=np.int32).reshape(-1, 3)
    return TriangleMesh(verts, tris)


def assert_matches_oracle(mesh, voxel_size, band=0.0):
    vm = vol.voxelize_surface(mesh, voxel_size, band)
    expect = voxel_surface_oracle(
        mesh.triangle_corners(), vm.origin, vm.voxel_size, vm.dims
    )
    got = vm.cells == vol.SURFACE
    assert np.array_equal(got, expect), (
        f"surface set mismatch: {got.sum()} vs oracle {expect.sum()}"
    )
    return vm


def test_single_triangle_inside_one_cell():
    # triangle strictly inside the cube spanned by one voxel
    verts = np.array([[0.1, 0.1, 0.15], [0.3, 0.1, 0.15], [0.1, 0.3, 0.15]])
    mesh = TriangleMesh(verts, np.array([[0, 1, 2]], dtype=np.int32))
    vm = vol.voxelize_surface(mesh, 0.5, 0.0)
    assert vm.surface_count == 1
    idx = vm.point_to_index([0.15, 0.15, 0.15])
    state = vm.state_at_index(*idx)
    assert state.is_surface
    np.testing.assert_allclose(state.normal, [0, 0, 1], atol=1e-15)


def test_unit_cube_half_meter_voxels_matches_oracle():
    # Grid-aligned faces: every padded-grid cell touches the cube surface,
    # so the oracle yields 4x4x4 = 64 surface cells (touching counts).
    mesh = box_mesh((1, 1, 1), (0.5, 0.5, 0.5))
    vm = assert_matches_oracle(mesh, 0.5)
    assert vm.dims == (4, 4, 4)
    assert vm.surface_count == 64


def test_unaligned_cube_matches_oracle():
    mesh = box_mesh((1, 1, 1), (0.5, 0.5, 0.5))
    vm = assert_matches_oracle(mesh, 0.4)
    assert vm.surface_count == 56


def test_small_cube_fine_voxels_count_matches_oracle():
    mesh = box_mesh((0.1, 0.1, 0.1), (0.05, 0.05, 0.05))
    vm = assert_matches_oracle(mesh, 0.005)


def test_random_soups_match_oracle(rng):
    for _ in range(6):
        mesh = random_soup_mesh(rng, int(rng.integers(1, 40)))
        voxel = float(rng.uniform(0.04, 0.2))
        assert_matches_oracle(mesh, voxel)


def test_every_triangle_hits_some_surface_voxel(rng):
    mesh = random_soup_mesh(rng, 25)
    vm = vol.voxelize_surface(mesh, 0.07, 0.0)
    surf = vm.cells == vol.SURFACE
    for tri in mesh.triangle_corners():
        mask = voxel_surface_oracle(tri[None], vm.origin, vm.voxel_size, vm.dims)
        assert (mask & surf).any()


def test_interior_matches_bfs_oracle():
    mesh = box_mesh((0.3, 0.3, 0.3), (0.15, 0.15, 0.15))
    vm = vol.voxelize_surface(mesh, 0.021, 0.0)
    surf = vm.cells == vol.SURFACE
    expect = interior_oracle(surf, vm.dims)
    got = vm.cells == vol.INTERIOR
    assert expect.any(), "fixture should enclose interior cells"
    assert np.array_equal(got, expect)


def test_proximity_band_distances():
    mesh = box_mesh((0.2, 0.2, 0.2), (0.1, 0.1, 0.1))
    band = 0.06
    s = 0.019
    vm = vol.voxelize_surface(mesh, s, band)
    vm.validate()
    grid = vm.grid()
    nx, ny, nz = vm.dims
    surf_idx = np.argwhere(grid == vol.SURFACE)  # (k, 3) in z,y,x order
    prox_idx = np.argwhere(grid == vol.PROXIMITY)
    assert len(prox_idx) > 0
    tree = cKDTree(surf_idx * s)
    for iz, iy, ix in prox_idx[:: max(1, len(prox_idx) // 200)]:
        state = vm.state_at_index(int(ix), int(iy), int(iz))
        d_expect, _ = tree.query([iz * s, iy * s, ix * s])
        assert abs(state.distance - d_expect) < 1e-9
        assert 0 < state.distance <= band + 1e-12


def test_proximity_adjacent_to_surface_is_close():
    mesh = box_mesh((0.2, 0.2, 0.2), (0.1, 0.1, 0.1))
    s = 0.019
    vm = vol.voxelize_surface(mesh, s, 0.06)
    grid = vm.grid()
    nz, ny, nx = grid.shape
    limit = s * np.sqrt(3) + 1e-12
    prox = np.argwhere(grid == vol.PROXIMITY)
    checked = 0
    for iz, iy, ix in prox:
        adjacent = False
        for dz, dy, dx in ((1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1)):
            jz, jy, jx = iz + dz, iy + dy, ix + dx
            if 0 <= jz < nz and 0 <= jy < ny and 0 <= jx < nx:
                if grid[jz, jy, jx] == vol.SURFACE:
                    adjacent = True
                    break
        if adjacent:
            checked += 1
            assert vm.state_at_index(int(ix), int(iy), int(iz)).distance <= limit
    assert checked > 0


def test_voxelize_cell_budget():
    mesh = box_mesh((1, 1, 1))
    with pytest.raises(vol.CellBudgetError):
        vol.voxelize_surface(mesh, 0.01, 0.0, cell_budget=1000)


def test_voxelize_rejects_bad_args():
    mesh = box_mesh((1, 1, 1))
    with pytest.raises(ValueError):
        vol.voxelize_surface(mesh, 0.0)
    with pytest.raises(ValueError):
        vol.voxelize_surface(mesh, 0.1, -0.1)


# -- pointshell ---------------------------------------------------------------


def test_pointshell_cube_points_on_faces():
    mesh = box_mesh((1, 1, 1), (0.5, 0.5, 0.5))
    shell = vol.build_pointshell(mesh, 0.5)
    center = np.array([0.5, 0.5, 0.5])
    for p, n in zip(shell.points, shell.normals):
        assert point_mesh_distance(p, mesh) < 1e-9
        assert float(n @ (p - center)) < 0  # inward
    # spacing: neighbors neither bunched past dedup nor sparse
    tree = cKDTree(shell.points)
    d, _ = tree.query(shell.points, k=2)
    nn = d[:, 1]
    assert nn.min() > 0.25 * shell.spacing / 2
    assert nn.max() < 2.0 * shell.spacing


def test_pointshell_icosphere_normals_inward():
    mesh = icosphere(0.2, 2)
    shell = vol.build_pointshell(mesh, 0.03)
    centroid = shell.points.mean(axis=0)
    dots = np.einsum("ij,ij->i", shell.normals, shell.points - centroid)
    assert (dots < 0).all()


def test_pointshell_interior_sample_spacing():
    mesh = box_mesh((1, 1, 1), (0.5, 0.5, 0.5))
    spacing = 0.2
    shell = vol.build_pointshell(mesh, spacing)
    # samples away from all cube edges are interior-of-triangle samples
    inner = []
    for p in shell.points:
        per_axis = np.minimum(np.abs(p - 0.0), np.abs(p - 1.0))
        if np.sort(per_axis)[1] > 0.25 * spacing:
            inner.append(p)
    inner = np.asarray(inner)
    assert len(inner) > 10
    tree = cKDTree(shell.points)
    d, _ = tree.query(inner, k=2)
    nn = d[:, 1]
    assert (nn >= 0.5 * spacing - 1e-12).all()
    assert (nn <= 2.0 * spacing + 1e-12).all()


def test_pointshell_rejects_bad_spacing():
    with pytest.raises(ValueError):
        vol.build_pointshell(box_mesh(), -1.0)


def test_pointshell_budget():
    with pytest.raises(vol.PointBudgetError):
        vol.build_pointshell(box_mesh(), 0.01, point_budget=100)


# -- cooking ------------------------------------------------------------------


def test_cook_single_part_identity_matches_voxelize():
    mesh = box_mesh((0.4, 0.3, 0.2), (0.2, 0.15, 0.1))
    direct = vol.voxelize_surface(mesh, 0.03, 0.05)
    cooked = vol.cook_voxmaps([(mesh, RigidPose.identity())], 0.03, 0.05)
    assert np.array_equal(direct.cells, cooked.cells)
    assert np.array_equal(direct.surface_normals, cooked.surface_normals)
    assert np.array_equal(direct.proximity_distances, cooked.proximity_distances)


def test_cook_disjoint_parts_counts_add():
    s = 0.125
    a = box_mesh((0.5, 0.5, 0.5), (0.25, 0.25, 0.25))
    b = box_mesh((0.5, 0.5, 0.5), (0.25, 0.25, 0.25))
    shift = RigidPose([1.0, 0.0, 0.0], np.eye(3))  # exact multiple of s: grids stay in phase
    va = vol.voxelize_surface(a, s)
    vb = vol.cook_voxmaps([(b, shift)], s)
    assert vb.surface_count == va.surface_count
    union = vol.cook_voxmaps([(a, RigidPose.identity()), (b, shift)], s)
    assert union.surface_count == va.surface_count + vb.surface_count


def test_cook_overlapping_parts_share_cells():
    s = 0.125
    a = box_mesh((0.5, 0.5, 0.5), (0.25, 0.25, 0.25))
    shift = RigidPose([0.25, 0.0, 0.0], np.eye(3))
    single = vol.voxelize_surface(a, s).surface_count
    union = vol.cook_voxmaps([(a, RigidPose.identity()), (a, shift)], s)
    assert union.surface_count < 2 * single


def test_cook_order_independent_bitwise(rng):
    parts = []
    for k in range(3):
        mesh = box_mesh((0.3, 0.2, 0.25), (0, 0, 0))
        pose = RigidPose(rng.uniform(-0.4, 0.4, size=3), np.eye(3))
        parts.append((mesh, pose))
    forward = vol.cook_voxmaps(parts, 0.04, 0.05)
    backward = vol.cook_voxmaps(parts[::-1], 0.04, 0.05)
    assert np.array_equal(forward.cells, backward.cells)
    assert np.array_equal(forward.surface_normals, backward.surface_normals)
    assert np.array_equal(forward.proximity_distances, backward.proximity_distances)


def test_cook_requires_parts():
    with pytest.raises(ValueError):
        vol.cook_voxmaps([], 0.1)


# -- dump format ---------------------------------------------------------------


def test_dump_voxmap_layout():
    verts = np.array([[0.1, 0.1, 0.15], [0.3, 0.1, 0.15], [0.1, 0.3, 0.15]])
    mesh = TriangleMesh(verts, np.array([[0, 1, 2]], dtype=np.int32))
    vm = vol.voxelize_surface(mesh, 0.5, 0.0)
    text = vol.dump_voxmap(vm)
    lines = text.splitlines()
    nx, ny, nz = vm.dims
    assert lines[0].startswith(f"voxmap {nx} {ny} {nz} ")
    body = lines[1:]
    # one paragraph (ny lines + blank) per z-slice
    assert len(body) == nz * (ny + 1)
    assert all(len(body[i]) == nx for i in range(ny))
    assert text.count("s") == vm.surface_count
