"""Hot geometry kernels with two interchangeable backends.

The module exposes one set of public names (``polygon_area``, ``clip_convex``,
``steiner_chords``, ...).  At import time the backend is chosen from the
``STEINERLAB_BACKEND`` environment variable:

* ``numba`` (default when numba is importable): loop kernels compiled with
  ``@njit(cache=True)``.
* ``numpy``: pure numpy / python reference implementations.

Both backends implement the same contracts and agree to ~1e-12; they are not
bit-identical (summation order differs), so reproducibility guarantees hold
per backend.  ``bench/bench_kernels.py`` compares the two.

All 2-D polygons are (V, 2) float64 arrays in counter-clockwise order.
"""

from __future__ import annotations

import math
import os
import warnings

import numpy as np

_BACKEND_ENV = "STEINERLAB_BACKEND"


def _resolve_backend() -> str:
    req = os.environ.get(_BACKEND_ENV, "").strip().lower()
    if req in ("numpy", "python"):
        return "numpy"
    if req in ("", "numba"):
        try:
            import numba  # noqa: F401

            return "numba"
        except ImportError:
            if req == "numba":
                warnings.warn("numba requested but not importable; using numpy backend")
            return "numpy"
    raise ValueError(f"unknown {_BACKEND_ENV}={req!r} (expected 'numba' or 'numpy')")


# ---------------------------------------------------------------------------
# Loop-style implementations.  These are the numba kernels; they are also
# valid (slow) python, which keeps the two backends trivially in sync for the
# algorithmically irregular routines.
# ---------------------------------------------------------------------------


def _polygon_area_loop(poly):
    n = poly.shape[0]
    s = 0.0
    for i in range(n):
        j = i + 1
        if j == n:
            j = 0
        s += poly[i, 0] * poly[j, 1] - poly[j, 0] * poly[i, 1]
    return 0.5 * s


def _polygon_perimeter_loop(poly):
    n = poly.shape[0]
    s = 0.0
    for i in range(n):
        j = i + 1
        if j == n:
            j = 0
        s += math.hypot(poly[j, 0] - poly[i, 0], poly[j, 1] - poly[i, 1])
    return s


def _polygon_centroid_loop(poly):
    # Shoelace moments; falls back to the vertex mean for degenerate area.
    n = poly.shape[0]
    a = 0.0
    cx = 0.0
    cy = 0.0
    for i in range(n):
        j = i + 1
        if j == n:
            j = 0
        w = poly[i, 0] * poly[j, 1] - poly[j, 0] * poly[i, 1]
        a += w
        cx += (poly[i, 0] + poly[j, 0]) * w
        cy += (poly[i, 1] + poly[j, 1]) * w
    out = np.empty(2, dtype=np.float64)
    if abs(a) < 1e-300:
        out[0] = poly[:, 0].mean()
        out[1] = poly[:, 1].mean()
        return out
    out[0] = cx / (3.0 * a)
    out[1] = cy / (3.0 * a)
    return out


def _hull_2d_loop(pts):
    """Monotone-chain hull indices, CCW, starting at the lexicographic min.

    Collinear and duplicate points are dropped (cross <= 0 pops).
    """
    n = pts.shape[0]
    # stable lexicographic order: sort by y, then stable-sort by x
    by_y = np.argsort(pts[:, 1], kind="mergesort")
    xs = np.empty(n, dtype=np.float64)
    for i in range(n):
        xs[i] = pts[by_y[i], 0]
    by_x = np.argsort(xs, kind="mergesort")
    order = np.empty(n, dtype=np.int64)
    for i in range(n):
        order[i] = by_y[by_x[i]]

    hull = np.empty(2 * n + 1, dtype=np.int64)
    k = 0
    for ii in range(n):  # lower chain
        p = order[ii]
        while k >= 2:
            o = hull[k - 2]
            a = hull[k - 1]
            cr = (pts[a, 0] - pts[o, 0]) * (pts[p, 1] - pts[o, 1]) - (
                pts[a, 1] - pts[o, 1]
            ) * (pts[p, 0] - pts[o, 0])
            if cr <= 0.0:
                k -= 1
            else:
                break
        hull[k] = p
        k += 1
    lower = k
    for ii in range(n - 2, -1, -1):  # upper chain
        p = order[ii]
        while k > lower:
            o = hull[k - 2]
            a = hull[k - 1]
            cr = (pts[a, 0] - pts[o, 0]) * (pts[p, 1] - pts[o, 1]) - (
                pts[a, 1] - pts[o, 1]
            ) * (pts[p, 0] - pts[o, 0])
            if cr <= 0.0:
                k -= 1
            else:
                break
        hull[k] = p
        k += 1
    if k > 1:
        k -= 1  # last point repeats the first
    return hull[:k].copy()


def _points_in_polygon_loop(pts, poly, tol):
    n = pts.shape[0]
    m = poly.shape[0]
    out = np.empty(n, dtype=np.bool_)
    for i in range(n):
        x = pts[i, 0]
        y = pts[i, 1]
        inside = True
        for j in range(m):
            k = j + 1
            if k == m:
                k = 0
            ex = poly[k, 0] - poly[j, 0]
            ey = poly[k, 1] - poly[j, 1]
            cr = ex * (y - poly[j, 1]) - ey * (x - poly[j, 0])
            if cr < -tol:
                inside = False
                break
        out[i] = inside
    return out


def _points_in_halfspaces_loop(pts, normals, offsets, tol):
    n = pts.shape[0]
    f = normals.shape[0]
    d = normals.shape[1]
    out = np.empty(n, dtype=np.bool_)
    for i in range(n):
        inside = True
        for j in range(f):
            s = 0.0
            for k in range(d):
                s += normals[j, k] * pts[i, k]
            if s > offsets[j] + tol:
                inside = False
                break
        out[i] = inside
    return out


def _clip_convex_loop(subject, clip):
    """Sutherland-Hodgman clip of convex `subject` by convex `clip` (both CCW)."""
    cap = subject.shape[0] + clip.shape[0] + 8
    cur = np.empty((cap, 2), dtype=np.float64)
    nxt = np.empty((cap, 2), dtype=np.float64)
    ncur = subject.shape[0]
    for i in range(ncur):
        cur[i, 0] = subject[i, 0]
        cur[i, 1] = subject[i, 1]
    m = clip.shape[0]
    for j in range(m):
        if ncur == 0:
            break
        ax = clip[j, 0]
        ay = clip[j, 1]
        k = j + 1
        if k == m:
            k = 0
        ex = clip[k, 0] - ax
        ey = clip[k, 1] - ay
        nn = 0
        px = cur[ncur - 1, 0]
        py = cur[ncur - 1, 1]
        dp = ex * (py - ay) - ey * (px - ax)
        for ii in range(ncur):
            qx = cur[ii, 0]
            qy = cur[ii, 1]
            dq = ex * (qy - ay) - ey * (qx - ax)
            if dp >= 0.0:
                if dq >= 0.0:
                    nxt[nn, 0] = qx
                    nxt[nn, 1] = qy
                    nn += 1
                else:
                    t = dp / (dp - dq)
                    nxt[nn, 0] = px + t * (qx - px)
                    nxt[nn, 1] = py + t * (qy - py)
                    nn += 1
            else:
                if dq >= 0.0:
                    t = dp / (dp - dq)
                    nxt[nn, 0] = px + t * (qx - px)
                    nxt[nn, 1] = py + t * (qy - py)
                    nn += 1
                    nxt[nn, 0] = qx
                    nxt[nn, 1] = qy
                    nn += 1
            px = qx
            py = qy
            dp = dq
        tmp = cur
        cur = nxt
        nxt = tmp
        ncur = nn
    return cur[:ncur].copy()


def _steiner_chords_loop(poly):
    """Chord table of a CCW convex polygon against the horizontal axis.

    Returns (s, lo, hi): the sorted union of vertex abscissas and, at each,
    the lower/upper boundary heights.  The chord through abscissa s has
    endpoints lo(s), hi(s); both are piecewise linear with exactly these
    breakpoints.
    """
    n = poly.shape[0]
    imin = 0
    imax = 0
    for i in range(1, n):
        if poly[i, 0] < poly[imin, 0] or (
            poly[i, 0] == poly[imin, 0] and poly[i, 1] < poly[imin, 1]
        ):
            imin = i
        if poly[i, 0] > poly[imax, 0] or (
            poly[i, 0] == poly[imax, 0] and poly[i, 1] > poly[imax, 1]
        ):
            imax = i

    # lower chain: CCW walk imin -> imax; upper chain: imax -> imin reversed.
    nlow = (imax - imin) % n + 1
    nup = (imin - imax) % n + 1
    ls = np.empty(nlow, dtype=np.float64)
    lt = np.empty(nlow, dtype=np.float64)
    for i in range(nlow):
        j = (imin + i) % n
        ls[i] = poly[j, 0]
        lt[i] = poly[j, 1]
    us = np.empty(nup, dtype=np.float64)
    ut = np.empty(nup, dtype=np.float64)
    for i in range(nup):
        j = (imin - i) % n  # reversed: increasing abscissa
        us[i] = poly[j, 0]
        ut[i] = poly[j, 1]

    # drop exact duplicate abscissas: lower keeps the first (bottom of a
    # vertical edge), upper keeps the last (top of a vertical edge)
    kl = 0
    for i in range(nlow):
        if kl > 0 and ls[i] == ls[kl - 1]:
            continue
        ls[kl] = ls[i]
        lt[kl] = lt[i]
        kl += 1
    ku = 0
    for i in range(nup):
        if ku > 0 and us[i] == us[ku - 1]:
            ut[ku - 1] = ut[i]
            continue
        us[ku] = us[i]
        ut[ku] = ut[i]
        ku += 1

    merged = np.empty(kl + ku, dtype=np.float64)
    a = 0
    b = 0
    k = 0
    while a < kl or b < ku:
        if b >= ku or (a < kl and ls[a] <= us[b]):
            v = ls[a]
            a += 1
        else:
            v = us[b]
            b += 1
        if k > 0 and merged[k - 1] == v:
            continue
        merged[k] = v
        k += 1
    sb = merged[:k]
    lo = np.interp(sb, ls[:kl], lt[:kl])
    hi = np.interp(sb, us[:ku], ut[:ku])
    for i in range(k):
        if hi[i] < lo[i]:
            mid = 0.5 * (hi[i] + lo[i])
            hi[i] = mid
            lo[i] = mid
    return sb, lo, hi


def _abs_linear_integral(h, fa, fb):
    # integral of |linear| over an interval of width h
    if h <= 0.0:
        return 0.0
    if fa * fb >= 0.0:
        return 0.5 * (abs(fa) + abs(fb)) * h
    return 0.5 * h * (fa * fa + fb * fb) / (abs(fa) + abs(fb))


def _min_abs_linear_integral(h, fa, fb, ga, gb):
    # integral of min(|f|, g) over width h, f and g linear, g >= 0
    if h <= 0.0:
        return 0.0
    total = 0.0
    # split at the zero of f
    if fa * fb < 0.0:
        t0 = h * fa / (fa - fb)
        pieces = ((0.0, t0, abs(fa), 0.0), (t0, h, 0.0, abs(fb)))
    else:
        pieces = ((0.0, h, abs(fa), abs(fb)),)
    for (a, b, pa, pb) in pieces:
        w = b - a
        if w <= 0.0:
            continue
        qa = ga + (gb - ga) * (a / h)
        qb = ga + (gb - ga) * (b / h)
        da = pa - qa
        db = pb - qb
        if da * db < 0.0:
            tc = w * da / (da - db)
            pm = pa + (pb - pa) * (tc / w)
            if da < 0.0:  # |f| below g first
                total += 0.5 * (pa + pm) * tc + 0.5 * (qa + (qb - qa) * ((a + tc) / h - a / h) * 0.0 + pm + qb) * 0.0
                # fall through handled below for clarity
                total -= 0.5 * (pa + pm) * tc  # undo, recompute cleanly
                qm = qa + (qb - qa) * (tc / w)
                total += 0.5 * (pa + pm) * tc + 0.5 * (qm + qb) * (w - tc)
            else:
                qm = qa + (qb - qa) * (tc / w)
                total += 0.5 * (qa + qm) * tc + 0.5 * (pm + pb) * (w - tc)
        else:
            if da + db <= 0.0:
                total += 0.5 * (pa + pb) * w
            else:
                total += 0.5 * (qa + qb) * w
    return total


def _chord_symdiff_loop(sb, lo, hi):
    """Canonical shift and centered symmetric difference of a chord table.

    Shifts the body along the chord axis so that the fiber-midpoint function
    m has zero mean against rho(s) = dist(s, boundary of the projection),
    then returns (shift, integral of 2*min(|m - shift|, length)).  The
    integral equals the area of the symmetric difference between the shifted
    body and its chord-centered counterpart.
    """
    n = sb.shape[0]
    s0 = sb[0]
    s1 = sb[n - 1]
    width = s1 - s0
    if width <= 0.0:
        return 0.0, 0.0
    mid = 0.5 * (s0 + s1)
    den = 0.25 * width * width  # integral of rho
    num = 0.0
    for i in range(n - 1):
        a = sb[i]
        b = sb[i + 1]
        if b <= a:
            continue
        ma = 0.5 * (lo[i] + hi[i])
        mb = 0.5 * (lo[i + 1] + hi[i + 1])
        # split at the rho kink
        if a < mid < b:
            splits = (a, mid, b)
        else:
            splits = (a, b)
        for j in range(len(splits) - 1):
            xa = splits[j]
            xb = splits[j + 1]
            h = xb - xa
            xm = 0.5 * (xa + xb)
            fa = (ma + (mb - ma) * (xa - a) / (b - a)) * min(xa - s0, s1 - xa)
            fm = (ma + (mb - ma) * (xm - a) / (b - a)) * min(xm - s0, s1 - xm)
            fb2 = (ma + (mb - ma) * (xb - a) / (b - a)) * min(xb - s0, s1 - xb)
            num += h * (fa + 4.0 * fm + fb2) / 6.0
    c = num / den
    total = 0.0
    for i in range(n - 1):
        h = sb[i + 1] - sb[i]
        if h <= 0.0:
            continue
        fa = 0.5 * (lo[i] + hi[i]) - c
        fb = 0.5 * (lo[i + 1] + hi[i + 1]) - c
        ga = hi[i] - lo[i]
        gb = hi[i + 1] - lo[i + 1]
        total += 2.0 * _min_abs_linear_integral(h, fa, fb, ga, gb)
    return c, total


def _chords_symmetral_perimeter_loop(sb, lo, hi):
    n = sb.shape[0]
    p = 0.0
    for i in range(n - 1):
        ds = sb[i + 1] - sb[i]
        dl = 0.5 * ((hi[i + 1] - lo[i + 1]) - (hi[i] - lo[i]))
        p += 2.0 * math.hypot(ds, dl)
    p += (hi[0] - lo[0]) + (hi[n - 1] - lo[n - 1])
    return p


def _polygon_boundary_dist_loop(pts, poly):
    """Unsigned euclidean distance from each point to the polygon boundary."""
    n = pts.shape[0]
    m = poly.shape[0]
    out = np.empty(n, dtype=np.float64)
    for i in range(n):
        x = pts[i, 0]
        y = pts[i, 1]
        best = np.inf
        for j in range(m):
            k = j + 1
            if k == m:
                k = 0
            ax = poly[j, 0]
            ay = poly[j, 1]
            bx = poly[k, 0]
            by = poly[k, 1]
            ex = bx - ax
            ey = by - ay
            ee = ex * ex + ey * ey
            if ee > 0.0:
                t = ((x - ax) * ex + (y - ay) * ey) / ee
                if t < 0.0:
                    t = 0.0
                elif t > 1.0:
                    t = 1.0
            else:
                t = 0.0
            dx = x - (ax + t * ex)
            dy = y - (ay + t * ey)
            d = math.hypot(dx, dy)
            if d < best:
                best = d
        out[i] = best
    return out


def _support_batch_loop(verts, dirs):
    v = verts.shape[0]
    m = dirs.shape[0]
    d = dirs.shape[1]
    out = np.empty(m, dtype=np.float64)
    for i in range(m):
        best = -np.inf
        for j in range(v):
            s = 0.0
            for k in range(d):
                s += verts[j, k] * dirs[i, k]
            if s > best:
                best = s
        out[i] = best
    return out


# ---------------------------------------------------------------------------
# numpy backend: vectorized where it pays, otherwise the loop code as-is
# ---------------------------------------------------------------------------


def _polygon_area_np(poly):
    x = poly[:, 0]
    y = poly[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def _polygon_perimeter_np(poly):
    d = np.roll(poly, -1, axis=0) - poly
    return float(np.hypot(d[:, 0], d[:, 1]).sum())


def _points_in_polygon_np(pts, poly, tol):
    edge = np.roll(poly, -1, axis=0) - poly
    rel0 = pts[:, None, 0] - poly[None, :, 0]
    rel1 = pts[:, None, 1] - poly[None, :, 1]
    cross = edge[None, :, 0] * rel1 - edge[None, :, 1] * rel0
    return np.all(cross >= -tol, axis=1)


def _points_in_halfspaces_np(pts, normals, offsets, tol):
    return np.all(pts @ normals.T <= offsets[None, :] + tol, axis=1)


def _support_batch_np(verts, dirs):
    return np.asarray(dirs @ verts.T).max(axis=1)


def _polygon_boundary_dist_np(pts, poly):
    a = poly
    b = np.roll(poly, -1, axis=0)
    e = b - a
    ee = np.maximum((e * e).sum(axis=1), 1e-300)
    rel = pts[:, None, :] - a[None, :, :]
    t = np.clip((rel * e[None, :, :]).sum(axis=2) / ee[None, :], 0.0, 1.0)
    proj = a[None, :, :] + t[:, :, None] * e[None, :, :]
    d = np.linalg.norm(pts[:, None, :] - proj, axis=2)
    return d.min(axis=1)


_LOOP_IMPLS = {
    "polygon_area": _polygon_area_loop,
    "polygon_perimeter": _polygon_perimeter_loop,
    "polygon_centroid": _polygon_centroid_loop,
    "hull_2d": _hull_2d_loop,
    "points_in_polygon": _points_in_polygon_loop,
    "points_in_halfspaces": _points_in_halfspaces_loop,
    "clip_convex": _clip_convex_loop,
    "steiner_chords": _steiner_chords_loop,
    "chord_symdiff": _chord_symdiff_loop,
    "chords_symmetral_perimeter": _chords_symmetral_perimeter_loop,
    "polygon_boundary_dist": _polygon_boundary_dist_loop,
    "support_batch": _support_batch_loop,
}

_NUMPY_IMPLS = dict(_LOOP_IMPLS)
_NUMPY_IMPLS.update(
    {
        "polygon_area": _polygon_area_np,
        "polygon_perimeter": _polygon_perimeter_np,
        "points_in_polygon": _points_in_polygon_np,
        "points_in_halfspaces": _points_in_halfspaces_np,
        "polygon_boundary_dist": _polygon_boundary_dist_np,
        "support_batch": _support_batch_np,
    }
)

_numba_cache: dict[str, object] = {}


def numba_impls():
    """Compile (once) and return the numba variants of every kernel."""
    if _numba_cache:
        return _numba_cache
    from numba import njit

    helpers = {}
    jit = lambda f: njit(f, cache=True)  # noqa: E731
    abs_lin = jit(_abs_linear_integral)
    min_lin = jit(_min_abs_linear_integral)
    helpers["_abs_linear_integral"] = abs_lin
    helpers["_min_abs_linear_integral"] = min_lin

    import steinerlab.kernels as _self

    saved = (_self._abs_linear_integral, _self._min_abs_linear_integral)
    _self._abs_linear_integral = abs_lin
    _self._min_abs_linear_integral = min_lin
    try:
        for name, fn in _LOOP_IMPLS.items():
            _numba_cache[name] = jit(fn)
    finally:
        _self._abs_linear_integral, _self._min_abs_linear_integral = saved
    return _numba_cache


def numpy_impls():
    return dict(_NUMPY_IMPLS)


BACKEND = _resolve_backend()

_active = numba_impls() if BACKEND == "numba" else numpy_impls()

polygon_area = _active["polygon_area"]
polygon_perimeter = _active["polygon_perimeter"]
polygon_centroid = _active["polygon_centroid"]
hull_2d = _active["hull_2d"]
points_in_polygon = _active["points_in_polygon"]
points_in_halfspaces = _active["points_in_halfspaces"]
clip_convex = _active["clip_convex"]
steiner_chords = _active["steiner_chords"]
chord_symdiff = _active["chord_symdiff"]
chords_symmetral_perimeter = _active["chords_symmetral_perimeter"]
polygon_boundary_dist = _active["polygon_boundary_dist"]
support_batch = _active["support_batch"]
