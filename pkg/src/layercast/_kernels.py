"""Numba kernels for ray marching.

Kept separate so the rest of the package stays plain numpy.  All kernels are
single-threaded and release the GIL; parallelism happens at the frame level.
"""

from __future__ import annotations

import numba
import numpy as np


@numba.njit(cache=True, inline="always")
def _sample(tsdf, wsum, nx, ny, nz, x, y, z):
    """Trilinear field value at grid coordinates; (value, observed_flag).

    Coordinates are in voxel units relative to voxel (0,0,0)'s center.
    """
    if x < 0.0 or y < 0.0 or z < 0.0 or x > nx - 1.0 or y > ny - 1.0 or z > nz - 1.0:
        return 0.0, False
    i = int(np.floor(x))
    j = int(np.floor(y))
    k = int(np.floor(z))
    if i > nx - 2:
        i = nx - 2
    if j > ny - 2:
        j = ny - 2
    if k > nz - 2:
        k = nz - 2
    fx = x - i
    fy = y - j
    fz = z - k

    if (
        wsum[i, j, k] == 0.0
        or wsum[i + 1, j, k] == 0.0
        or wsum[i, j + 1, k] == 0.0
        or wsum[i + 1, j + 1, k] == 0.0
        or wsum[i, j, k + 1] == 0.0
        or wsum[i + 1, j, k + 1] == 0.0
        or wsum[i, j + 1, k + 1] == 0.0
        or wsum[i + 1, j + 1, k + 1] == 0.0
    ):
        return 0.0, False

    c00 = tsdf[i, j, k] * (1.0 - fx) + tsdf[i + 1, j, k] * fx
    c10 = tsdf[i, j + 1, k] * (1.0 - fx) + tsdf[i + 1, j + 1, k] * fx
    c01 = tsdf[i, j, k + 1] * (1.0 - fx) + tsdf[i + 1, j, k + 1] * fx
    c11 = tsdf[i, j + 1, k + 1] * (1.0 - fx) + tsdf[i + 1, j + 1, k + 1] * fx
    c0 = c00 * (1.0 - fy) + c10 * fy
    c1 = c01 * (1.0 - fy) + c11 * fy
    return c0 * (1.0 - fz) + c1 * fz, True


@numba.njit(cache=True, nogil=True)
def march_rays(
    tsdf,
    wsum,
    min_center,
    inv_voxel,
    origin,
    directions,
    t_start,
    t_end,
    active,
    coarse_step,
    refine_iters,
    hit_t,
):
    """March every active ray and bisect the first positive-to-negative crossing.

    Rays are ``origin + t * directions[r]`` with unit directions, marched from
    ``t_start[r]`` to ``t_end[r]`` in ``coarse_step`` increments.  A crossing
    needs a genuine sign change: the bracket opens at the latest strictly
    positive observed sample and closes at the next strictly negative one, so
    an exact-zero plateau with positive field on both sides (two cameras
    disagreeing about occluded space cancel to 0 there) is passed through
    rather than reported as a surface.  An unobserved sample invalidates the
    open bracket.  The bracket is bisected ``refine_iters`` times (an
    unobserved midpoint moves the lower end).  ``hit_t[r]`` receives the
    crossing distance, or 0.0 for a miss.
    """
    nx, ny, nz = tsdf.shape[0], tsdf.shape[1], tsdf.shape[2]
    n_rays = directions.shape[0]
    for r in range(n_rays):
        hit_t[r] = 0.0
        if not active[r]:
            continue
        t0 = t_start[r]
        t1 = t_end[r]
        if not (t1 >= t0):
            continue
        dx = directions[r, 0]
        dy = directions[r, 1]
        dz = directions[r, 2]

        pos_t = 0.0
        have_pos = False
        n_steps = int((t1 - t0) / coarse_step) + 1
        for step in range(n_steps + 1):
            t = t0 + step * coarse_step
            if t > t1:
                t = t1
            gx = (origin[0] + t * dx - min_center[0]) * inv_voxel
            gy = (origin[1] + t * dy - min_center[1]) * inv_voxel
            gz = (origin[2] + t * dz - min_center[2]) * inv_voxel
            v, observed = _sample(tsdf, wsum, nx, ny, nz, gx, gy, gz)
            if not observed:
                have_pos = False
            else:
                if have_pos and v < 0.0:
                    a = pos_t
                    b = t
                    for _ in range(refine_iters):
                        m = 0.5 * (a + b)
                        gx = (origin[0] + m * dx - min_center[0]) * inv_voxel
                        gy = (origin[1] + m * dy - min_center[1]) * inv_voxel
                        gz = (origin[2] + m * dz - min_center[2]) * inv_voxel
                        vm, obs_m = _sample(tsdf, wsum, nx, ny, nz, gx, gy, gz)
                        if obs_m and vm <= 0.0:
                            b = m
                        else:
                            a = m
                    hit_t[r] = 0.5 * (a + b)
                    break
                if v > 0.0:
                    have_pos = True
                    pos_t = t
            if t >= t1:
                break


@numba.njit(cache=True, inline="always")
def _vote(depth, color, rxz, ryz, rzz, tx, ty, tz, cz,
          xc_xy, yc_xy, zc_xy, q_xy, fx, fy, cx, cy, tol, trunc, inverted, z):
    """One camera's (weight, value, r, g, b) vote for a world point.

    The caller hoists the x/y contributions of the world-to-camera transform
    (``xc_xy`` .. ``zc_xy`` = ``R[:,0]*x + R[:,1]*y``) and of the squared
    distance to the optical center (``q_xy`` = ``dx*dx + dy*dy``); only the z
    terms are added here, in the same association order as the unhoisted
    expressions so results stay bit-identical.
    """
    zc = (zc_xy + rzz * z) + tz
    if zc <= 0.0:
        return 0.0, 0.0, 0.0, 0.0, 0.0
    xc = (xc_xy + rxz * z) + tx
    yc = (yc_xy + ryz * z) + ty
    u = fx * xc / zc + cx
    v = fy * yc / zc + cy
    col = int(np.floor(u + 0.5))
    row = int(np.floor(v + 0.5))
    if col < 0 or col >= depth.shape[1] or row < 0 or row >= depth.shape[0]:
        return 0.0, 0.0, 0.0, 0.0, 0.0
    d = depth[row, col]
    if d <= 0.0:
        return 0.0, 0.0, 0.0, 0.0, 0.0
    dz = z - cz
    s = d - np.sqrt(q_xy + dz * dz)
    if inverted:
        if not (s < -tol):
            return 0.0, 0.0, 0.0, 0.0, 0.0
    elif not (s > -tol):
        return 0.0, 0.0, 0.0, 0.0, 0.0
    val = s / trunc
    if val > 1.0:
        val = 1.0
    elif val < -1.0:
        val = -1.0
    return (1.0, val, np.float64(color[row, col, 0]),
            np.float64(color[row, col, 1]), np.float64(color[row, col, 2]))


@numba.njit(cache=True, nogil=True)
def fuse_grid(depth_a, color_a, rot_a, trans_a, center_a, fx_a, fy_a, cx_a, cy_a,
              depth_b, color_b, rot_b, trans_b, center_b, fx_b, fy_b, cx_b, cy_b,
              min_center, voxel_size, tol, trunc, inverted,
              tsdf, wsum, color):
    """Fill a voxel grid with the weight-averaged votes of two cameras.

    Voxels with no vote keep value 1.0, weight 0.0 and black color.  The
    combination is exactly commutative in the camera order.
    """
    nx, ny, nz = tsdf.shape[0], tsdf.shape[1], tsdf.shape[2]
    rxz_a, ryz_a, rzz_a = rot_a[0, 2], rot_a[1, 2], rot_a[2, 2]
    rxz_b, ryz_b, rzz_b = rot_b[0, 2], rot_b[1, 2], rot_b[2, 2]
    tx_a, ty_a, tz_a = trans_a[0], trans_a[1], trans_a[2]
    tx_b, ty_b, tz_b = trans_b[0], trans_b[1], trans_b[2]
    for i in range(nx):
        x = min_center[0] + i * voxel_size
        xr0_a = rot_a[0, 0] * x
        xr1_a = rot_a[1, 0] * x
        xr2_a = rot_a[2, 0] * x
        xr0_b = rot_b[0, 0] * x
        xr1_b = rot_b[1, 0] * x
        xr2_b = rot_b[2, 0] * x
        dx_a = x - center_a[0]
        dx_b = x - center_b[0]
        qx_a = dx_a * dx_a
        qx_b = dx_b * dx_b
        for j in range(ny):
            y = min_center[1] + j * voxel_size
            xc_xy_a = xr0_a + rot_a[0, 1] * y
            yc_xy_a = xr1_a + rot_a[1, 1] * y
            zc_xy_a = xr2_a + rot_a[2, 1] * y
            xc_xy_b = xr0_b + rot_b[0, 1] * y
            yc_xy_b = xr1_b + rot_b[1, 1] * y
            zc_xy_b = xr2_b + rot_b[2, 1] * y
            dy_a = y - center_a[1]
            dy_b = y - center_b[1]
            q_a = qx_a + dy_a * dy_a
            q_b = qx_b + dy_b * dy_b
            for k in range(nz):
                z = min_center[2] + k * voxel_size
                wa, va, ra, ga, ba = _vote(
                    depth_a, color_a, rxz_a, ryz_a, rzz_a, tx_a, ty_a, tz_a,
                    center_a[2], xc_xy_a, yc_xy_a, zc_xy_a, q_a,
                    fx_a, fy_a, cx_a, cy_a, tol, trunc, inverted, z)
                wb, vb, rb, gb, bb = _vote(
                    depth_b, color_b, rxz_b, ryz_b, rzz_b, tx_b, ty_b, tz_b,
                    center_b[2], xc_xy_b, yc_xy_b, zc_xy_b, q_b,
                    fx_b, fy_b, cx_b, cy_b, tol, trunc, inverted, z)
                w = wa + wb
                if w > 0.0:
                    tsdf[i, j, k] = (wa * va + wb * vb) / w
                    wsum[i, j, k] = w
                    cr = (wa * ra + wb * rb) / w
                    cg = (wa * ga + wb * gb) / w
                    cb = (wa * ba + wb * bb) / w
                    color[i, j, k, 0] = np.uint8(np.floor(cr + 0.5))
                    color[i, j, k, 1] = np.uint8(np.floor(cg + 0.5))
                    color[i, j, k, 2] = np.uint8(np.floor(cb + 0.5))
                else:
                    tsdf[i, j, k] = 1.0
                    wsum[i, j, k] = 0.0
                    color[i, j, k, 0] = 0
                    color[i, j, k, 1] = 0
                    color[i, j, k, 2] = 0
