# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels.

Same interface as ``relent._core.fallback``: Hermitian eigensolves via LAPACK
zheevd, the relative-entropy-style objective against a fixed eigensystem, and
a golden-section line search along matrix segments.  The payoff is in the line
search, where each probe costs one small eigendecomposition and the Python
dispatch overhead would otherwise dominate.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport INFINITY, log, sqrt
from libc.stdlib cimport free, malloc
from libc.string cimport memcpy
from scipy.linalg.cython_blas cimport zgemm
from scipy.linalg.cython_lapack cimport zheevd

cnp.import_array()

ctypedef double complex zcomplex

cdef double GOLDEN = (sqrt(5.0) - 1.0) / 2.0


cdef struct Work:
    int n
    zcomplex * a        # n*n eigh buffer (input/eigenvectors)
    zcomplex * mix      # n*n segment point
    zcomplex * m        # n*n gemm output
    double * w          # n eigenvalues
    double * leak       # n kernel-overlap accumulator
    zcomplex * work
    double * rwork
    int * iwork
    int lwork
    int lrwork
    int liwork


cdef int work_alloc(Work * wk, int n) nogil:
    wk.n = n
    wk.lwork = 2 * n + n * n + 16
    wk.lrwork = 1 + 5 * n + 2 * n * n + 16
    wk.liwork = 3 + 5 * n + 16
    wk.a = <zcomplex *> malloc(n * n * sizeof(zcomplex))
    wk.mix = <zcomplex *> malloc(n * n * sizeof(zcomplex))
    wk.m = <zcomplex *> malloc(n * n * sizeof(zcomplex))
    wk.w = <double *> malloc(n * sizeof(double))
    wk.leak = <double *> malloc(n * sizeof(double))
    wk.work = <zcomplex *> malloc(wk.lwork * sizeof(zcomplex))
    wk.rwork = <double *> malloc(wk.lrwork * sizeof(double))
    wk.iwork = <int *> malloc(wk.liwork * sizeof(int))
    if (wk.a == NULL or wk.mix == NULL or wk.m == NULL or wk.w == NULL or
            wk.leak == NULL or wk.work == NULL or wk.rwork == NULL or wk.iwork == NULL):
        return -1
    return 0


cdef void work_free(Work * wk) nogil:
    free(wk.a); free(wk.mix); free(wk.m); free(wk.w); free(wk.leak)
    free(wk.work); free(wk.rwork); free(wk.iwork)


cdef int eigh_buf(Work * wk, zcomplex * src) nogil:
    # src: n*n C-order Hermitian matrix; the column-major view LAPACK sees is
    # its conjugate, which has the same eigenvalues and conjugated
    # eigenvectors.  On return wk.a holds those column-major eigenvectors.
    cdef int n = wk.n, info = 0
    cdef char jobz = b'V', uplo = b'L'
    memcpy(wk.a, src, n * n * sizeof(zcomplex))
    zheevd(&jobz, &uplo, &n, wk.a, &n, wk.w, wk.work, &wk.lwork,
           wk.rwork, &wk.lrwork, wk.iwork, &wk.liwork, &info)
    return info


cdef double objective_buf(Work * wk, double * p, zcomplex * up, double plogp,
                          double trp, zcomplex * sigma, double rel_cutoff,
                          double support_tol, double trace_coeff) nogil:
    # Objective of relent_fixed; sigma is n*n C-order.  up is the C-order
    # eigenvector matrix of the fixed argument; |up^dag V| is obtained from a
    # single plain zgemm because both stored buffers are the conjugates of
    # the matrices in that product.
    cdef int n = wk.n
    cdef int i, j, info
    cdef double pmax = 0.0, smax, scut, pcut, sj, lsj, cross = 0.0, trace = 0.0
    cdef double ov, has_leak = 0.0
    cdef zcomplex one = 1.0, zero = 0.0
    cdef char nn = b'N'

    info = eigh_buf(wk, sigma)
    if info != 0:
        return INFINITY

    zgemm(&nn, &nn, &n, &n, &n, &one, up, &n, wk.a, &n, &zero, wk.m, &n)

    for i in range(n):
        if p[i] > pmax:
            pmax = p[i]
        wk.leak[i] = 0.0
    pcut = pmax * rel_cutoff
    smax = wk.w[n - 1]
    if smax < 0.0:
        smax = 0.0
    scut = smax * rel_cutoff

    for j in range(n):
        sj = wk.w[j]
        trace += sj
        if sj > scut:
            lsj = log(sj)
            for i in range(n):
                if p[i] > pcut:
                    ov = (wk.m[i + j * n].real * wk.m[i + j * n].real +
                          wk.m[i + j * n].imag * wk.m[i + j * n].imag)
                    cross += ov * p[i] * lsj
        else:
            for i in range(n):
                if p[i] > pcut:
                    wk.leak[i] += (wk.m[i + j * n].real * wk.m[i + j * n].real +
                                   wk.m[i + j * n].imag * wk.m[i + j * n].imag)

    for i in range(n):
        if wk.leak[i] > support_tol:
            return INFINITY

    return plogp - cross + trace_coeff * (trace - trp)


cdef double segment_objective(Work * wk, double * p, zcomplex * up, double plogp,
                              double trp, zcomplex * base, zcomplex * direction,
                              double g, double rel_cutoff, double support_tol,
                              double trace_coeff) nogil:
    cdef int k, nn2 = wk.n * wk.n
    for k in range(nn2):
        wk.mix[k] = base[k] + g * direction[k]
    return objective_buf(wk, p, up, plogp, trp, wk.mix, rel_cutoff,
                         support_tol, trace_coeff)


def eigh(cnp.ndarray[zcomplex, ndim=2, mode="c"] a not None):
    """Eigendecomposition of a Hermitian matrix, eigenvalues ascending."""
    cdef int n = a.shape[0]
    if a.shape[1] != n:
        raise ValueError("matrix must be square")
    cdef Work wk
    if work_alloc(&wk, n) != 0:
        raise MemoryError
    cdef cnp.ndarray[double, ndim=1] w = np.empty(n, dtype=np.float64)
    cdef cnp.ndarray[zcomplex, ndim=2] v = np.empty((n, n), dtype=np.complex128)
    cdef int info, i, j
    try:
        info = eigh_buf(&wk, <zcomplex *> a.data)
        if info != 0:
            raise np.linalg.LinAlgError(f"zheevd failed with info={info}")
        for i in range(n):
            w[i] = wk.w[i]
            for j in range(n):
                v[i, j] = wk.a[i + j * n].real - 1j * wk.a[i + j * n].imag
    finally:
        work_free(&wk)
    return w, v


def relent_fixed(cnp.ndarray[double, ndim=1, mode="c"] p not None,
                 cnp.ndarray[zcomplex, ndim=2, mode="c"] up not None,
                 double plogp, double trp,
                 cnp.ndarray[zcomplex, ndim=2, mode="c"] sigma not None,
                 double rel_cutoff=1e-12, double support_tol=1e-10,
                 double trace_coeff=1.0):
    """See ``relent._core.fallback.relent_fixed``."""
    cdef int n = p.shape[0]
    cdef Work wk
    if work_alloc(&wk, n) != 0:
        raise MemoryError
    cdef double val
    try:
        val = objective_buf(&wk, <double *> p.data, <zcomplex *> up.data, plogp,
                            trp, <zcomplex *> sigma.data, rel_cutoff,
                            support_tol, trace_coeff)
    finally:
        work_free(&wk)
    return val


def line_search_dir(cnp.ndarray[double, ndim=1, mode="c"] p not None,
                    cnp.ndarray[zcomplex, ndim=2, mode="c"] up not None,
                    double plogp, double trp,
                    cnp.ndarray[zcomplex, ndim=2, mode="c"] base not None,
                    cnp.ndarray[zcomplex, ndim=2, mode="c"] direction not None,
                    double gmax, double xtol=1e-8, double rel_cutoff=1e-12,
                    double support_tol=1e-10, double trace_coeff=1.0):
    """See ``relent._core.fallback.line_search_dir``."""
    cdef int n = p.shape[0]
    cdef Work wk
    if work_alloc(&wk, n) != 0:
        raise MemoryError
    cdef double * pp = <double *> p.data
    cdef zcomplex * upp = <zcomplex *> up.data
    cdef zcomplex * bp = <zcomplex *> base.data
    cdef zcomplex * dp = <zcomplex *> direction.data
    cdef double a = 0.0, b = gmax, c, d, fc, fd, fb, best_g, best_f, tol
    try:
        with nogil:
            best_g = a
            best_f = segment_objective(&wk, pp, upp, plogp, trp, bp, dp, a,
                                       rel_cutoff, support_tol, trace_coeff)
            fb = segment_objective(&wk, pp, upp, plogp, trp, bp, dp, b,
                                   rel_cutoff, support_tol, trace_coeff)
            if fb < best_f:
                best_g = b
                best_f = fb
            c = b - GOLDEN * (b - a)
            d = a + GOLDEN * (b - a)
            fc = segment_objective(&wk, pp, upp, plogp, trp, bp, dp, c,
                                   rel_cutoff, support_tol, trace_coeff)
            fd = segment_objective(&wk, pp, upp, plogp, trp, bp, dp, d,
                                   rel_cutoff, support_tol, trace_coeff)
            tol = xtol * (gmax if gmax > 1.0 else 1.0)
            while b - a > tol:
                if fc < fd:
                    b = d
                    d = c
                    fd = fc
                    c = b - GOLDEN * (b - a)
                    fc = segment_objective(&wk, pp, upp, plogp, trp, bp, dp, c,
                                           rel_cutoff, support_tol, trace_coeff)
                    if fc < best_f:
                        best_g = c
                        best_f = fc
                else:
                    a = c
                    c = d
                    fc = fd
                    d = a + GOLDEN * (b - a)
                    fd = segment_objective(&wk, pp, upp, plogp, trp, bp, dp, d,
                                           rel_cutoff, support_tol, trace_coeff)
                    if fd < best_f:
                        best_g = d
                        best_f = fd
    finally:
        work_free(&wk)
    return best_g, best_f
