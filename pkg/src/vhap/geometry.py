"""Triangle-mesh ingestion and rigid-transform algebra.

Everything downstream (voxelizer, pointshell sampler, render loop, device
model) works in SI units: meters, newtons, seconds. Unit conversion happens
once, at mesh load time, through ``unit_scale``.

Meshes come from a minimal plain-text indexed-triangle format::

    # comment
    v 0.0 0.0 0.0
    v 1.0 0.0 0.0
    v 0.0 1.0 0.0
    f 1 2 3

``v`` lines are vertex coordinates (meters before scaling), ``f`` lines are
1-based vertex indices. Any other leading token is an error. CAD exports
(Inventor/VRML/STEP) are expected to be converted to this format externally.

Rotations are stored as 3x3 matrices throughout; quaternions exist only at
the wire/file boundaries (see the converters at the bottom).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

ORTHONORMALITY_TOL = 1e-9


class MeshError(ValueError):
    """Raised for malformed or out-of-contract mesh files."""


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class Aabb:
    """Axis-aligned box, min <= max componentwise."""

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "lo", _readonly(np.asarray(self.lo, dtype=np.float64)))
        object.__setattr__(self, "hi", _readonly(np.asarray(self.hi, dtype=np.float64)))
        if self.lo.shape != (3,) or self.hi.shape != (3,):
            raise ValueError("Aabb corners must be 3-vectors")
        if np.any(self.lo > self.hi):
            raise ValueError(f"Aabb min {self.lo} exceeds max {self.hi}")

    @property
    def extent(self) -> np.ndarray:
        return self.hi - self.lo

    def contains(self, p) -> bool:
        p = np.asarray(p, dtype=np.float64)
        return bool(np.all(p >= self.lo) and np.all(p <= self.hi))


@dataclass(frozen=True)
class TriangleMesh:
    """Indexed triangle surface.

    vertices: (n, 3) float64, meters. triangles: (m, 3) int32, 0-based.
    scale_applied records the unit_scale used at load time.
    """

    vertices: np.ndarray
    triangles: np.ndarray
    scale_applied: float = 1.0

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=np.float64).reshape(-1, 3)
        t = np.asarray(self.triangles, dtype=np.int32).reshape(-1, 3)
        if t.shape[0] < 1:
            raise MeshError("mesh has no triangles")
        if not np.all(np.isfinite(v)):
            raise MeshError("mesh has non-finite vertex coordinates")
        if t.min(initial=0) < 0 or t.max(initial=-1) >= len(v):
            raise MeshError("triangle references a vertex index out of range")
        if np.any((t[:, 0] == t[:, 1]) | (t[:, 1] == t[:, 2]) | (t[:, 0] == t[:, 2])):
            raise MeshError("triangle repeats a vertex index")
        object.__setattr__(self, "vertices", _readonly(v))
        object.__setattr__(self, "triangles", _readonly(t))

    @property
    def num_triangles(self) -> int:
        return int(self.triangles.shape[0])

    def triangle_corners(self) -> np.ndarray:
        """(m, 3, 3) array of triangle corner coordinates."""
        return self.vertices[self.triangles]

    def transformed(self, pose: "RigidPose") -> "TriangleMesh":
        """Mesh with every vertex mapped through ``pose``."""
        v = self.vertices @ pose.rotation.T + pose.position
        return TriangleMesh(v, self.triangles, self.scale_applied)


def load_mesh(path, unit_scale: float = 1.0) -> TriangleMesh:
    """Parse the plain-text mesh format, scaling all vertices by unit_scale.

    unit_scale converts the file's length unit to meters (0.001 for
    millimeter exports). Raises MeshError on any format violation and
    OSError if the file cannot be read.
    """
    if not unit_scale > 0:
        raise ValueError(f"unit_scale must be positive, got {unit_scale}")
    vertices: list[tuple[float, float, float]] = []
    faces: list[tuple[int, int, int]] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            tag, args = parts[0], parts[1:]
            if tag == "v":
                if len(args) != 3:
                    raise MeshError(f"{path}:{lineno}: vertex line needs 3 coordinates")
                try:
                    vertices.append(tuple(float(x) for x in args))
                except ValueError as exc:
                    raise MeshError(f"{path}:{lineno}: bad vertex coordinate: {exc}") from None
            elif tag == "f":
                if len(args) != 3:
                    raise MeshError(f"{path}:{lineno}: face line needs 3 indices")
                try:
                    i, j, k = (int(x) for x in args)
                except ValueError as exc:
                    raise MeshError(f"{path}:{lineno}: bad face index: {exc}") from None
                for idx in (i, j, k):
                    if idx < 1 or idx > len(vertices):
                        raise MeshError(
                            f"{path}:{lineno}: face index {idx} out of range "
                            f"(file has {len(vertices)} vertices so far)"
                        )
                faces.append((i - 1, j - 1, k - 1))
            else:
                raise MeshError(f"{path}:{lineno}: unknown directive {tag!r}")
    if not faces:
        raise MeshError(f"{path}: no triangles")
    verts = np.asarray(vertices, dtype=np.float64) * float(unit_scale)
    try:
        return TriangleMesh(verts, np.asarray(faces, dtype=np.int32), float(unit_scale))
    except MeshError as exc:
        raise MeshError(f"{path}: {exc}") from None


def save_mesh(mesh: TriangleMesh, path) -> None:
    """Write a mesh back out in the plain-text format (1-based faces)."""
    with open(path, "w", encoding="utf-8") as fh:
        for v in mesh.vertices:
            fh.write(f"v {float(v[0])!r} {float(v[1])!r} {float(v[2])!r}\n")
        for t in mesh.triangles:
            fh.write(f"f {t[0] + 1} {t[1] + 1} {t[2] + 1}\n")


def mesh_bounds(mesh: TriangleMesh) -> Aabb:
    """Tight axis-aligned bounds over all vertices."""
    return Aabb(mesh.vertices.min(axis=0), mesh.vertices.max(axis=0))


@dataclass(frozen=True)
class RigidPose:
    """Position + proper rotation. Validated at construction."""

    position: np.ndarray = field(default_factory=lambda: np.zeros(3))
    rotation: np.ndarray = field(default_factory=lambda: np.eye(3))

    def __post_init__(self):
        p = np.asarray(self.position, dtype=np.float64).reshape(3)
        r = np.asarray(self.rotation, dtype=np.float64).reshape(3, 3)
        if not (np.all(np.isfinite(p)) and np.all(np.isfinite(r))):
            raise ValueError("pose has non-finite entries")
        err = np.abs(r.T @ r - np.eye(3)).max()
        if err > ORTHONORMALITY_TOL:
            raise ValueError(f"rotation not orthonormal (max deviation {err:.3e})")
        det = float(np.linalg.det(r))
        if abs(det - 1.0) > ORTHONORMALITY_TOL:
            raise ValueError(f"rotation determinant {det} != +1")
        object.__setattr__(self, "position", _readonly(p))
        object.__setattr__(self, "rotation", _readonly(r))

    @staticmethod
    def identity() -> "RigidPose":
        return RigidPose()


def pose_compose(a: RigidPose, b: RigidPose) -> RigidPose:
    """a then b reading right-to-left: (a*b)(p) = a(b(p))."""
    return RigidPose(a.rotation @ b.position + a.position, a.rotation @ b.rotation)


def pose_inverse(a: RigidPose) -> RigidPose:
    rt = a.rotation.T
    return RigidPose(-(rt @ a.position), rt)


def pose_apply(a: RigidPose, p) -> np.ndarray:
    """Rotate then translate a point (or an (n,3) batch of points)."""
    p = np.asarray(p, dtype=np.float64)
    if p.ndim == 1:
        return a.rotation @ p + a.position
    return p @ a.rotation.T + a.position


def rotation_about_axis(axis, angle: float) -> np.ndarray:
    """Rodrigues rotation matrix for a (not necessarily unit) axis."""
    axis = np.asarray(axis, dtype=np.float64)
    n = np.linalg.norm(axis)
    if n == 0.0:
        raise ValueError("zero rotation axis")
    x, y, z = axis / n
    c, s = math.cos(angle), math.sin(angle)
    one_c = 1.0 - c
    return np.array(
        [
            [c + x * x * one_c, x * y * one_c - z * s, x * z * one_c + y * s],
            [y * x * one_c + z * s, c + y * y * one_c, y * z * one_c - x * s],
            [z * x * one_c - y * s, z * y * one_c + x * s, c + z * z * one_c],
        ]
    )


def rotation_log(r: np.ndarray) -> np.ndarray:
    """Axis-angle vector (axis * angle) of a proper rotation matrix."""
    r = np.asarray(r, dtype=np.float64)
    cos_theta = min(1.0, max(-1.0, (float(np.trace(r)) - 1.0) * 0.5))
    theta = math.acos(cos_theta)
    if theta < 1e-12:
        return np.zeros(3)
    w = np.array([r[2, 1] - r[1, 2], r[0, 2] - r[2, 0], r[1, 0] - r[0, 1]])
    s = 2.0 * math.sin(theta)
    if s > 1e-9:
        return w * (theta / s)
    # theta near pi: extract axis from the symmetric part
    a = np.sqrt(np.maximum(0.0, (np.diag(r) + 1.0) * 0.5))
    k = int(np.argmax(a))
    axis = np.empty(3)
    axis[k] = a[k]
    for i in range(3):
        if i != k:
            axis[i] = (r[i, k] + r[k, i]) / (4.0 * a[k])
    axis /= np.linalg.norm(axis)
    if np.dot(axis, w) < 0:
        axis = -axis
    return axis * theta


def orthonormalize(r: np.ndarray) -> np.ndarray:
    """Nearest-ish proper rotation via Gram-Schmidt; cheap drift repair."""
    x = r[:, 0] / np.linalg.norm(r[:, 0])
    y = r[:, 1] - x * np.dot(x, r[:, 1])
    y /= np.linalg.norm(y)
    z = np.cross(x, y)
    return np.column_stack([x, y, z])


# -- quaternion boundary converters (wire format and scenario files) --------


def rotation_to_quaternion(r: np.ndarray) -> np.ndarray:
    """(w, x, y, z) unit quaternion, w >= 0, from a proper rotation matrix."""
    r = np.asarray(r, dtype=np.float64)
    t = float(np.trace(r))
    if t > 0:
        s = math.sqrt(t + 1.0) * 2.0
        q = np.array(
            [0.25 * s, (r[2, 1] - r[1, 2]) / s, (r[0, 2] - r[2, 0]) / s, (r[1, 0] - r[0, 1]) / s]
        )
    else:
        i = int(np.argmax(np.diag(r)))
        j, k = (i + 1) % 3, (i + 2) % 3
        s = math.sqrt(max(0.0, 1.0 + r[i, i] - r[j, j] - r[k, k])) * 2.0
        q = np.empty(4)
        q[0] = (r[k, j] - r[j, k]) / s
        q[1 + i] = 0.25 * s
        q[1 + j] = (r[j, i] + r[i, j]) / s
        q[1 + k] = (r[k, i] + r[i, k]) / s
    if q[0] < 0:
        q = -q
    return q / np.linalg.norm(q)


def quaternion_to_rotation(q) -> np.ndarray:
    """Rotation matrix from a (w, x, y, z) quaternion (normalized here)."""
    q = np.asarray(q, dtype=np.float64).reshape(4)
    n = np.linalg.norm(q)
    if n == 0.0:
        raise ValueError("zero quaternion")
    w, x, y, z = q / n
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)],
            [2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)],
            [2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)],
        ]
    )


def quaternion_slerp(q0, q1, u: float) -> np.ndarray:
    """Shortest-arc spherical interpolation between two unit quaternions."""
    q0 = np.asarray(q0, dtype=np.float64)
    q1 = np.asarray(q1, dtype=np.float64)
    dot = float(np.dot(q0, q1))
    if dot < 0.0:
        q1, dot = -q1, -dot
    if dot > 1.0 - 1e-12:
        out = q0 + u * (q1 - q0)
        return out / np.linalg.norm(out)
    theta = math.acos(min(1.0, dot))
    s = math.sin(theta)
    out = (math.sin((1.0 - u) * theta) / s) * q0 + (math.sin(u * theta) / s) * q1
    return out / np.linalg.norm(out)
