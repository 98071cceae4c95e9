# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled flow step kernel.

Same system as ``_kernels_py.assemble``.  Assembly and a banded Gaussian
elimination with partial pivoting run in C; for the narrow band used here
this avoids the per-column BLAS call overhead of the LAPACK banded driver.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs

cnp.import_array()

cdef enum:
    KL = 3
    KU = 3
    KUF = 6           # upper bandwidth after pivoting fill-in (KL + KU)
    LD = 10           # 2 * KL + KU + 1 rows of band storage


cdef inline Py_ssize_t _at(Py_ssize_t r, Py_ssize_t c) nogil:
    # column-major band storage, entry A(r, c) with -KL <= r - c <= KUF
    return c * LD + (KUF + r - c)


cdef int _banded_solve(double* ab, double* b, Py_ssize_t m) nogil:
    """In-place LU with partial pivoting and solve; returns 0 or failing column + 1."""
    cdef Py_ssize_t j, i, c, p, km, ju = 0, cend
    cdef double piv, amax, l, tmp
    for j in range(m):
        km = KL if j + KL < m else m - 1 - j
        p = 0
        amax = fabs(ab[_at(j, j)])
        for i in range(1, km + 1):
            if fabs(ab[_at(j + i, j)]) > amax:
                amax = fabs(ab[_at(j + i, j)])
                p = i
        if amax == 0.0:
            return <int>(j + 1)
        cend = j + KU + p
        if cend > m - 1:
            cend = m - 1
        if cend > ju:
            ju = cend
        if p != 0:
            for c in range(j, ju + 1):
                tmp = ab[_at(j, c)]
                ab[_at(j, c)] = ab[_at(j + p, c)]
                ab[_at(j + p, c)] = tmp
            tmp = b[j]
            b[j] = b[j + p]
            b[j + p] = tmp
        piv = ab[_at(j, j)]
        for i in range(1, km + 1):
            l = ab[_at(j + i, j)] / piv
            ab[_at(j + i, j)] = l
            if l != 0.0:
                for c in range(j + 1, ju + 1):
                    ab[_at(j + i, c)] -= l * ab[_at(j, c)]
                b[j + i] -= l * b[j]
    for j in range(m - 1, -1, -1):
        tmp = b[j]
        cend = j + KUF
        if cend > m - 1:
            cend = m - 1
        for c in range(j + 1, cend + 1):
            tmp -= ab[_at(j, c)] * b[c]
        b[j] = tmp / ab[_at(j, j)]
    return 0


def implicit_step(points, double dt, double cos_alpha):
    """Solve one linearly implicit step.

    Parameters
    ----------
    points : ndarray, shape (N+1, 2)
    dt : float
    cos_alpha : float

    Returns
    -------
    new_points : ndarray, shape (N+1, 2)
    kappa : ndarray, shape (N+1,)
    """
    cdef const double[:, ::1] X = np.ascontiguousarray(points, dtype=np.float64)
    cdef Py_ssize_t npts = X.shape[0]
    cdef Py_ssize_t m = 3 * npts
    cdef Py_ssize_t i, k, r, c, a, bb
    cdef double sx, sy, h, inv, nx, ny
    ab_arr = np.zeros(LD * m, dtype=np.float64)
    rhs_arr = np.zeros(m, dtype=np.float64)
    omega_arr = np.zeros(2 * npts, dtype=np.float64)
    cdef double[::1] abv = ab_arr
    cdef double[::1] rhsv = rhs_arr
    cdef double[::1] omv = omega_arr
    cdef double* ab = &abv[0]
    cdef double* rhs = &rhsv[0]
    cdef double* om = &omv[0]
    cdef int info

    with nogil:
        for i in range(npts - 1):
            sx = X[i + 1, 0] - X[i, 0]
            sy = X[i + 1, 1] - X[i, 1]
            h = sqrt(sx * sx + sy * sy)
            inv = 1.0 / h
            nx = -0.5 * sy
            ny = 0.5 * sx
            om[2 * i] += nx
            om[2 * i + 1] += ny
            om[2 * i + 2] += nx
            om[2 * i + 3] += ny
            a = 3 * i
            bb = 3 * i + 3
            for k in range(2):
                ab[_at(a + k, a + k)] += inv
                ab[_at(bb + k, bb + k)] += inv
                ab[_at(a + k, bb + k)] -= inv
                ab[_at(bb + k, a + k)] -= inv
            # minus the stiffness applied to the old positions (unit chords)
            rhs[a] += sx * inv
            rhs[a + 1] += sy * inv
            rhs[bb] -= sx * inv
            rhs[bb + 1] -= sy * inv
            ab[_at(a + 2, a + 2)] -= dt * inv
            ab[_at(bb + 2, bb + 2)] -= dt * inv
            ab[_at(a + 2, bb + 2)] += dt * inv
            ab[_at(bb + 2, a + 2)] += dt * inv
        for i in range(npts):
            a = 3 * i
            ab[_at(a, a + 2)] += om[2 * i]
            ab[_at(a + 1, a + 2)] += om[2 * i + 1]
            ab[_at(a + 2, a)] += om[2 * i]
            ab[_at(a + 2, a + 1)] += om[2 * i + 1]
        rhs[0] -= cos_alpha
        rhs[3 * (npts - 1)] += cos_alpha
        for k in range(2):
            r = 1 if k == 0 else 3 * (npts - 1) + 1
            for c in range(r - KL, r + KU + 1):
                if 0 <= c < m:
                    ab[_at(r, c)] = 0.0
            ab[_at(r, r)] = 1.0
            rhs[r] = -X[0 if k == 0 else npts - 1, 1]
        info = _banded_solve(ab, rhs, m)
    if info != 0:
        raise np.linalg.LinAlgError(f"singular pivot in column {info - 1}")
    sol = rhs_arr.reshape(-1, 3)
    return np.asarray(X) + sol[:, :2], np.ascontiguousarray(sol[:, 2])
