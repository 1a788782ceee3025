# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of the kernels in ``_pykernels``; results are bit-identical."""

import numpy as np

from libc.math cimport asin, cos, fabs, log10, nearbyint, sin, sqrt
from libc.stdio cimport snprintf

cdef double EARTH_RADIUS_KM = 6371.0088
# same constant CPython's math.radians multiplies by
cdef double DEG2RAD = 3.141592653589793 / 180.0


cdef inline double _haversine(double lon1, double lat1, double lon2, double lat2) nogil:
    cdef double dlat = (lat2 - lat1) * DEG2RAD
    cdef double dlon = (lon2 - lon1) * DEG2RAD
    cdef double s1 = sin(dlat / 2)
    cdef double s2 = sin(dlon / 2)
    cdef double a = s1 * s1 + cos(lat1 * DEG2RAD) * cos(lat2 * DEG2RAD) * (s2 * s2)
    cdef double r = sqrt(a)
    if r > 1.0:
        r = 1.0
    return 2 * EARTH_RADIUS_KM * asin(r)


def haversine(double lon1, double lat1, double lon2, double lat2):
    return _haversine(lon1, lat1, lon2, lat2)


def haversine_many(double lon0, double lat0, lons, lats):
    cdef const double[::1] xs = np.ascontiguousarray(lons, dtype=np.float64)
    cdef const double[::1] ys = np.ascontiguousarray(lats, dtype=np.float64)
    cdef Py_ssize_t n = xs.shape[0], i
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    with nogil:
        for i in range(n):
            o[i] = _haversine(lon0, lat0, xs[i], ys[i])
    return out


cdef inline double _unit(double d, double lo, double hi) nogil:
    if lo == hi:
        return 0.5
    cdef double v = (log10(1.0 + d) - lo) / (hi - lo)
    if v < 0.0:
        return 0.0
    if v > 1.0:
        return 1.0
    return v


def unit_value(double d, double lo, double hi):
    return _unit(d, lo, hi)


def unit_values(densities, double lo, double hi):
    cdef const double[::1] ds = np.ascontiguousarray(densities, dtype=np.float64)
    cdef Py_ssize_t n = ds.shape[0], i
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    with nogil:
        for i in range(n):
            o[i] = _unit(ds[i], lo, hi)
    return out


cdef inline double _clamp(double v) nogil:
    if v < 0.0:
        return 0.0
    if v > 1.0:
        return 1.0
    return v


cdef int _rgb(int scheme, double u, double blend, double* r, double* g, double* b) nogil:
    cdef double keep, gray
    if scheme == 0:
        r[0] = _clamp(1.5 - fabs(4.0 * u - 3.0))
        g[0] = _clamp(1.5 - fabs(4.0 * u - 2.0))
        b[0] = _clamp(1.5 - fabs(4.0 * u - 1.0))
    elif scheme == 1:
        r[0] = u; g[0] = 0.0; b[0] = 1.0 - u
    elif scheme == 2:
        r[0] = u; g[0] = 1.0 - u; b[0] = 0.0
    elif scheme == 3:
        keep = 1.0 - blend
        gray = 0.5 * blend
        r[0] = u * keep + gray
        g[0] = (1.0 - u) * keep + gray
        b[0] = 0.0 * keep + gray
    else:
        return -1
    return 0


def rgb(int scheme, double u, double blend):
    cdef double r, g, b
    if _rgb(scheme, u, blend, &r, &g, &b) < 0:
        raise ValueError(f"unknown scheme code {scheme}")
    return (r, g, b)


def kml_hex(double r, double g, double b, int alpha):
    return "%02x%02x%02x%02x" % (
        alpha, <int>nearbyint(b * 255.0), <int>nearbyint(g * 255.0), <int>nearbyint(r * 255.0))


def kml_colors(us, int scheme, int alpha, double blend):
    cdef const double[::1] uv = np.ascontiguousarray(us, dtype=np.float64)
    cdef Py_ssize_t n = uv.shape[0], i
    cdef double r, g, b
    cdef char buf[16]
    out = []
    for i in range(n):
        if _rgb(scheme, uv[i], blend, &r, &g, &b) < 0:
            raise ValueError(f"unknown scheme code {scheme}")
        snprintf(buf, 16, "%02x%02x%02x%02x", alpha,
                 <int>nearbyint(b * 255.0), <int>nearbyint(g * 255.0), <int>nearbyint(r * 255.0))
        out.append(buf[:8].decode("ascii"))
    return out


def format_ring(xs, ys):
    cdef const double[::1] x = np.ascontiguousarray(xs, dtype=np.float64)
    cdef const double[::1] y = np.ascontiguousarray(ys, dtype=np.float64)
    cdef Py_ssize_t n = x.shape[0], i
    cdef char buf[96]
    cdef int k
    parts = []
    for i in range(n):
        k = snprintf(buf, 96, "%.7f,%.7f,0", x[i], y[i])
        parts.append(buf[:k].decode("ascii"))
    return " ".join(parts)
