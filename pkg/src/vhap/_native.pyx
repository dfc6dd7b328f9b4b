# cython: language_level=3
"""Compiled lane of the hot-path kernels.

Keep this file in lockstep with vhap._reference: same functions, same
arithmetic in the same order, so both lanes produce bit-identical output.
Built with -ffp-contract=off (no FMA contraction) for that reason.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport floor, fabs, sqrt

cnp.import_array()

cdef int EMPTY = 0
cdef int PROXIMITY = 1
cdef int SURFACE = 2
cdef int INTERIOR = 3


cdef inline double _min3(double a, double b, double c) nogil:
    cdef double m = a
    if b < m:
        m = b
    if c < m:
        m = c
    return m


cdef inline double _max3(double a, double b, double c) nogil:
    cdef double m = a
    if b > m:
        m = b
    if c > m:
        m = c
    return m


cdef void _build_axes(const double* v0, const double* v1, const double* v2, double h,
                      double* lo, double* hi, double* r, double* ax, double* ay,
                      double* az) nogil:
    """Precompute the 13 separating-axis tests for one triangle.

    Mirrors vhap._reference._axis_tests: axis i separates iff
    lo[i] - m > r[i] or hi[i] - m < -r[i], m = ax*cx + ay*cy + az*cz.
    """
    cdef double e0x, e0y, e0z, e1x, e1y, e1z
    cdef double nx, ny, nz, d
    cdef double fx, fy, fz, cax, cay, caz, p0, p1, p2
    cdef int k, i, j

    # box axes
    for k in range(3):
        lo[k] = _min3(v0[k], v1[k], v2[k])
        hi[k] = _max3(v0[k], v1[k], v2[k])
        r[k] = h
        ax[k] = 1.0 if k == 0 else 0.0
        ay[k] = 1.0 if k == 1 else 0.0
        az[k] = 1.0 if k == 2 else 0.0

    # triangle plane
    e0x = v1[0] - v0[0]; e0y = v1[1] - v0[1]; e0z = v1[2] - v0[2]
    e1x = v2[0] - v0[0]; e1y = v2[1] - v0[1]; e1z = v2[2] - v0[2]
    nx = e0y * e1z - e0z * e1y
    ny = e0z * e1x - e0x * e1z
    nz = e0x * e1y - e0y * e1x
    d = nx * v0[0] + ny * v0[1] + nz * v0[2]
    lo[3] = d; hi[3] = d
    r[3] = h * (fabs(nx) + fabs(ny) + fabs(nz))
    ax[3] = nx; ay[3] = ny; az[3] = nz

    # 9 edge-cross-box-axis tests, edges f0 = v1-v0, f1 = v2-v1, f2 = v0-v2
    i = 4
    for j in range(3):
        if j == 0:
            fx = v1[0] - v0[0]; fy = v1[1] - v0[1]; fz = v1[2] - v0[2]
        elif j == 1:
            fx = v2[0] - v1[0]; fy = v2[1] - v1[1]; fz = v2[2] - v1[2]
        else:
            fx = v0[0] - v2[0]; fy = v0[1] - v2[1]; fz = v0[2] - v2[2]
        for k in range(3):
            if k == 0:
                cax = 0.0; cay = -fz; caz = fy
            elif k == 1:
                cax = fz; cay = 0.0; caz = -fx
            else:
                cax = -fy; cay = fx; caz = 0.0
            p0 = cax * v0[0] + cay * v0[1] + caz * v0[2]
            p1 = cax * v1[0] + cay * v1[1] + caz * v1[2]
            p2 = cax * v2[0] + cay * v2[1] + caz * v2[2]
            lo[i] = _min3(p0, p1, p2)
            hi[i] = _max3(p0, p1, p2)
            r[i] = h * (fabs(cax) + fabs(cay) + fabs(caz))
            ax[i] = cax; ay[i] = cay; az[i] = caz
            i += 1


cdef inline bint _cell_hit(double cx, double cy, double cz, const double* lo,
                           const double* hi, const double* r, const double* ax,
                           const double* ay, const double* az) nogil:
    cdef double m
    cdef int i
    for i in range(13):
        m = ax[i] * cx + ay[i] * cy + az[i] * cz
        if lo[i] - m > r[i] or hi[i] - m < -r[i]:
            return False
    return True


def mark_surface(double[:, :, ::1] tri_corners, origin, double voxel_size, dims,
                 cnp.uint8_t[::1] states):
    """Set SURFACE on every cell whose cube intersects some triangle."""
    cdef double ox = origin[0], oy = origin[1], oz = origin[2]
    cdef double s = voxel_size, h = 0.5 * voxel_size
    cdef Py_ssize_t nx = dims[0], ny = dims[1], nz = dims[2]
    cdef Py_ssize_t ntri = tri_corners.shape[0]
    cdef double lo[13], hi[13], r[13], ax[13], ay[13], az[13]
    cdef double v0[3], v1[3], v2[3]
    cdef double cmin, cmax, cx, cy, cz
    cdef Py_ssize_t t, k, ix, iy, iz
    cdef Py_ssize_t ilo[3], ihi[3]
    cdef Py_ssize_t i0, i1

    with nogil:
        for t in range(ntri):
            for k in range(3):
                v0[k] = tri_corners[t, 0, k]
                v1[k] = tri_corners[t, 1, k]
                v2[k] = tri_corners[t, 2, k]
            for k in range(3):
                cmin = _min3(v0[k], v1[k], v2[k])
                cmax = _max3(v0[k], v1[k], v2[k])
                if k == 0:
                    i0 = <Py_ssize_t>floor((cmin - ox) / s) - 1
                    i1 = <Py_ssize_t>floor((cmax - ox) / s) + 1
                elif k == 1:
                    i0 = <Py_ssize_t>floor((cmin - oy) / s) - 1
                    i1 = <Py_ssize_t>floor((cmax - oy) / s) + 1
                else:
                    i0 = <Py_ssize_t>floor((cmin - oz) / s) - 1
                    i1 = <Py_ssize_t>floor((cmax - oz) / s) + 1
                ilo[k] = i0 if i0 > 0 else 0
                if k == 0:
                    ihi[k] = i1 if i1 < nx - 1 else nx - 1
                elif k == 1:
                    ihi[k] = i1 if i1 < ny - 1 else ny - 1
                else:
                    ihi[k] = i1 if i1 < nz - 1 else nz - 1
            if ilo[0] > ihi[0] or ilo[1] > ihi[1] or ilo[2] > ihi[2]:
                continue
            _build_axes(v0, v1, v2, h, lo, hi, r, ax, ay, az)
            for iz in range(ilo[2], ihi[2] + 1):
                cz = oz + (<double>iz + 0.5) * s
                for iy in range(ilo[1], ihi[1] + 1):
                    cy = oy + (<double>iy + 0.5) * s
                    for ix in range(ilo[0], ihi[0] + 1):
                        cx = ox + (<double>ix + 0.5) * s
                        if _cell_hit(cx, cy, cz, lo, hi, r, ax, ay, az):
                            states[ix + nx * (iy + ny * iz)] = SURFACE


def accumulate_normals(double[:, :, ::1] tri_corners, origin, double voxel_size, dims,
                       cnp.uint8_t[::1] states, cnp.int32_t[::1] aux,
                       double[:, ::1] accum, double[:, ::1] fallback):
    """Accumulate area-weighted normals into surface-cell slots (see reference)."""
    cdef double ox = origin[0], oy = origin[1], oz = origin[2]
    cdef double s = voxel_size, h = 0.5 * voxel_size
    cdef Py_ssize_t nx = dims[0], ny = dims[1], nz = dims[2]
    cdef Py_ssize_t ntri = tri_corners.shape[0]
    cdef double lo[13], hi[13], r[13], ax[13], ay[13], az[13]
    cdef double v0[3], v1[3], v2[3]
    cdef double e0x, e0y, e0z, e1x, e1y, e1z, wnx, wny, wnz, norm
    cdef double cmin, cmax, cx, cy, cz
    cdef Py_ssize_t t, k, ix, iy, iz, flat
    cdef cnp.int32_t slot
    cdef Py_ssize_t ilo[3], ihi[3]
    cdef Py_ssize_t i0, i1

    with nogil:
        for t in range(ntri):
            for k in range(3):
                v0[k] = tri_corners[t, 0, k]
                v1[k] = tri_corners[t, 1, k]
                v2[k] = tri_corners[t, 2, k]
            for k in range(3):
                cmin = _min3(v0[k], v1[k], v2[k])
                cmax = _max3(v0[k], v1[k], v2[k])
                if k == 0:
                    i0 = <Py_ssize_t>floor((cmin - ox) / s) - 1
                    i1 = <Py_ssize_t>floor((cmax - ox) / s) + 1
                elif k == 1:
                    i0 = <Py_ssize_t>floor((cmin - oy) / s) - 1
                    i1 = <Py_ssize_t>floor((cmax - oy) / s) + 1
                else:
                    i0 = <Py_ssize_t>floor((cmin - oz) / s) - 1
                    i1 = <Py_ssize_t>floor((cmax - oz) / s) + 1
                ilo[k] = i0 if i0 > 0 else 0
                if k == 0:
                    ihi[k] = i1 if i1 < nx - 1 else nx - 1
                elif k == 1:
                    ihi[k] = i1 if i1 < ny - 1 else ny - 1
                else:
                    ihi[k] = i1 if i1 < nz - 1 else nz - 1
            if ilo[0] > ihi[0] or ilo[1] > ihi[1] or ilo[2] > ihi[2]:
                continue
            _build_axes(v0, v1, v2, h, lo, hi, r, ax, ay, az)
            e0x = v1[0] - v0[0]; e0y = v1[1] - v0[1]; e0z = v1[2] - v0[2]
            e1x = v2[0] - v0[0]; e1y = v2[1] - v0[1]; e1z = v2[2] - v0[2]
            wnx = e0y * e1z - e0z * e1y
            wny = e0z * e1x - e0x * e1z
            wnz = e0x * e1y - e0y * e1x
            norm = sqrt(wnx * wnx + wny * wny + wnz * wnz)
            for iz in range(ilo[2], ihi[2] + 1):
                cz = oz + (<double>iz + 0.5) * s
                for iy in range(ilo[1], ihi[1] + 1):
                    cy = oy + (<double>iy + 0.5) * s
                    for ix in range(ilo[0], ihi[0] + 1):
                        cx = ox + (<double>ix + 0.5) * s
                        if _cell_hit(cx, cy, cz, lo, hi, r, ax, ay, az):
                            flat = ix + nx * (iy + ny * iz)
                            slot = aux[flat]
                            accum[slot, 0] += wnx
                            accum[slot, 1] += wny
                            accum[slot, 2] += wnz
                            if norm > 0.0:
                                fallback[slot, 0] = wnx / norm
                                fallback[slot, 1] = wny / norm
                                fallback[slot, 2] = wnz / norm


def detect_contacts(double[:, ::1] points, double[:, ::1] rot, double[::1] trans,
                    cnp.uint8_t[::1] states, cnp.int32_t[::1] aux,
                    double[:, ::1] surface_normals, origin, double voxel_size, dims):
    """Voxel lookups for every shell point at a tool pose (see reference)."""
    cdef double ox = origin[0], oy = origin[1], oz = origin[2]
    cdef double s = voxel_size
    cdef Py_ssize_t nx = dims[0], ny = dims[1], nz = dims[2]
    cdef Py_ssize_t n = points.shape[0]
    cdef double r00 = rot[0, 0], r01 = rot[0, 1], r02 = rot[0, 2]
    cdef double r10 = rot[1, 0], r11 = rot[1, 1], r12 = rot[1, 2]
    cdef double r20 = rot[2, 0], r21 = rot[2, 1], r22 = rot[2, 2]
    cdef double tx = trans[0], ty = trans[1], tz = trans[2]

    out_index_arr = np.empty(n, dtype=np.int32)
    out_world_arr = np.empty((n, 3), dtype=np.float64)
    out_normal_arr = np.empty((n, 3), dtype=np.float64)
    out_depth_arr = np.empty(n, dtype=np.float64)
    cdef cnp.int32_t[::1] out_index = out_index_arr
    cdef double[:, ::1] out_world = out_world_arr
    cdef double[:, ::1] out_normal = out_normal_arr
    cdef double[::1] out_depth = out_depth_arr

    cdef Py_ssize_t i, ix, iy, iz, flat, count = 0
    cdef int deep = 0
    cdef double px, py, pz, wx, wy, wz, gxf, gyf, gzf
    cdef double cnx, cny, cnz, ccx, ccy, ccz, depth
    cdef unsigned char st
    cdef cnp.int32_t slot

    with nogil:
        for i in range(n):
            px = points[i, 0]; py = points[i, 1]; pz = points[i, 2]
            wx = px * r00 + py * r01 + pz * r02 + tx
            wy = px * r10 + py * r11 + pz * r12 + ty
            wz = px * r20 + py * r21 + pz * r22 + tz
            if wx < ox or wy < oy or wz < oz:
                continue
            gxf = (wx - ox) / s
            gyf = (wy - oy) / s
            gzf = (wz - oz) / s
            if gxf >= <double>nx or gyf >= <double>ny or gzf >= <double>nz:
                continue
            ix = <Py_ssize_t>gxf
            iy = <Py_ssize_t>gyf
            iz = <Py_ssize_t>gzf
            flat = ix + nx * (iy + ny * iz)
            st = states[flat]
            if st == SURFACE:
                slot = aux[flat]
                cnx = surface_normals[slot, 0]
                cny = surface_normals[slot, 1]
                cnz = surface_normals[slot, 2]
                ccx = ox + (<double>ix + 0.5) * s
                ccy = oy + (<double>iy + 0.5) * s
                ccz = oz + (<double>iz + 0.5) * s
                depth = -(cnx * (wx - ccx) + cny * (wy - ccy) + cnz * (wz - ccz))
                if depth < 0.0:
                    depth = 0.0
                elif depth > s:
                    depth = s
                out_index[count] = <cnp.int32_t>i
                out_world[count, 0] = wx
                out_world[count, 1] = wy
                out_world[count, 2] = wz
                out_normal[count, 0] = cnx
                out_normal[count, 1] = cny
                out_normal[count, 2] = cnz
                out_depth[count] = depth
                count += 1
            elif st == INTERIOR:
                deep = 1

    return (out_index_arr[:count], out_world_arr[:count], out_normal_arr[:count],
            out_depth_arr[:count], bool(deep), n)
