# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled lane of the hot kernels.

Mirrors heislab._kernels.pyback operation for operation: the expression VM,
the lockstep fixed-point control of the implicit midpoint integrator and the
greedy covering sweep all follow the exact same scalar sequences, so the two
lanes agree to floating rounding (covering counts agree exactly for equal
inputs).
"""

from libc.math cimport sin, cos, exp, sqrt, fabs
from libc.stdlib cimport malloc, free

import numpy as np

LANE = "compiled"

DEF OP_CONST = 0
DEF OP_T = 1
DEF OP_X = 2
DEF OP_NEG = 3
DEF OP_SIN = 4
DEF OP_COS = 5
DEF OP_EXP = 6
DEF OP_SQRT = 7
DEF OP_ABS = 8
DEF OP_ADD = 9
DEF OP_SUB = 10
DEF OP_MUL = 11
DEF OP_DIV = 12
DEF OP_POWI = 13
DEF OP_CUTEXP = 14


cdef inline double _powi(double v, int k) nogil:
    cdef double out = 1.0
    cdef int i
    if k < 0:
        return 1.0 / _powi(v, -k)
    for i in range(k):
        out *= v
    return out


cdef inline double _cutexp(double w, int k) nogil:
    cdef double g, p
    cdef int i
    if w <= 0.0:
        return 0.0
    g = exp(-1.0 / w)
    if g == 0.0:
        return 0.0
    p = 1.0
    for i in range(k):
        p *= w
    return g / p


cdef double _eval_one(const int[:, ::1] code, Py_ssize_t lo, Py_ssize_t hi,
                      const double[::1] consts, Py_ssize_t clo,
                      double t, const double* x, double* stack) nogil:
    cdef Py_ssize_t j, sp = 0
    cdef int op, arg
    cdef double b
    for j in range(lo, hi):
        op = code[j, 0]
        arg = code[j, 1]
        if op == OP_CONST:
            stack[sp] = consts[clo + arg]
            sp += 1
        elif op == OP_T:
            stack[sp] = t
            sp += 1
        elif op == OP_X:
            stack[sp] = x[arg]
            sp += 1
        elif op == OP_NEG:
            stack[sp - 1] = -stack[sp - 1]
        elif op == OP_SIN:
            stack[sp - 1] = sin(stack[sp - 1])
        elif op == OP_COS:
            stack[sp - 1] = cos(stack[sp - 1])
        elif op == OP_EXP:
            stack[sp - 1] = exp(stack[sp - 1])
        elif op == OP_SQRT:
            stack[sp - 1] = sqrt(stack[sp - 1])
        elif op == OP_ABS:
            stack[sp - 1] = fabs(stack[sp - 1])
        elif op == OP_ADD:
            sp -= 1
            stack[sp - 1] = stack[sp - 1] + stack[sp]
        elif op == OP_SUB:
            sp -= 1
            stack[sp - 1] = stack[sp - 1] - stack[sp]
        elif op == OP_MUL:
            sp -= 1
            stack[sp - 1] = stack[sp - 1] * stack[sp]
        elif op == OP_DIV:
            sp -= 1
            stack[sp - 1] = stack[sp - 1] / stack[sp]
        elif op == OP_POWI:
            stack[sp - 1] = _powi(stack[sp - 1], arg)
        elif op == OP_CUTEXP:
            stack[sp - 1] = _cutexp(stack[sp - 1], arg)
    return stack[0]


def eval_bank(code, code_offsets, consts, const_offsets, int stack_need,
              int idx, double t, X):
    """Evaluate one program over the rows of X; returns (S,)."""
    cdef const int[:, ::1] code_v = np.ascontiguousarray(code, dtype=np.int32)
    cdef const int[::1] coff = np.ascontiguousarray(code_offsets, dtype=np.int32)
    cdef const double[::1] consts_v = np.ascontiguousarray(consts, dtype=np.float64)
    cdef const int[::1] koff = np.ascontiguousarray(const_offsets, dtype=np.int32)
    cdef double[:, ::1] X_v = np.ascontiguousarray(X, dtype=np.float64)
    cdef Py_ssize_t S = X_v.shape[0]
    out_arr = np.empty(S, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef double* stack = <double*> malloc(stack_need * sizeof(double))
    if stack == NULL:
        raise MemoryError()
    cdef Py_ssize_t s
    cdef Py_ssize_t lo = coff[idx], hi = coff[idx + 1], clo = koff[idx]
    with nogil:
        for s in range(S):
            out[s] = _eval_one(code_v, lo, hi, consts_v, clo, t, &X_v[s, 0], stack)
    free(stack)
    return out_arr


cdef int _solve_inplace(double* A, double* b, double* out, int d) nogil:
    """Solve A out = b (row-major d x d) by Gauss elimination with partial
    pivoting; A and b are clobbered.  Returns 0 on success."""
    cdef int i, j, k, piv
    cdef double amax, tmp, factor
    for k in range(d):
        piv = k
        amax = fabs(A[k * d + k])
        for i in range(k + 1, d):
            if fabs(A[i * d + k]) > amax:
                amax = fabs(A[i * d + k])
                piv = i
        if amax == 0.0:
            return 1
        if piv != k:
            for j in range(d):
                tmp = A[k * d + j]
                A[k * d + j] = A[piv * d + j]
                A[piv * d + j] = tmp
            tmp = b[k]
            b[k] = b[piv]
            b[piv] = tmp
        for i in range(k + 1, d):
            factor = A[i * d + k] / A[k * d + k]
            for j in range(k, d):
                A[i * d + j] -= factor * A[k * d + j]
            b[i] -= factor * b[k]
    for i in range(d - 1, -1, -1):
        tmp = b[i]
        for j in range(i + 1, d):
            tmp -= A[i * d + j] * out[j]
        out[i] = tmp / A[i * d + i]
    return 0


def integrate_midpoint(code, code_offsets, consts, const_offsets, int stack_need,
                       x0s, double t0, double dt, int nsteps,
                       double tol, int maxit,
                       jcode=None, jcode_offsets=None, jconsts=None,
                       jconst_offsets=None, int jstack_need=0):
    """Batch implicit-midpoint integration; see pyback.integrate_midpoint."""
    cdef const int[:, ::1] code_v = np.ascontiguousarray(code, dtype=np.int32)
    cdef const int[::1] coff = np.ascontiguousarray(code_offsets, dtype=np.int32)
    cdef const double[::1] consts_v = np.ascontiguousarray(consts, dtype=np.float64)
    cdef const int[::1] koff = np.ascontiguousarray(const_offsets, dtype=np.int32)

    x0_arr = np.ascontiguousarray(np.atleast_2d(x0s), dtype=np.float64)
    cdef Py_ssize_t S = x0_arr.shape[0]
    cdef int d = x0_arr.shape[1]

    cdef bint want_jac = jcode is not None
    cdef const int[:, ::1] jcode_v
    cdef const int[::1] jcoff
    cdef const double[::1] jconsts_v
    cdef const int[::1] jkoff
    jacs_arr = None
    cdef double[:, :, :, ::1] jacs
    if want_jac:
        jcode_v = np.ascontiguousarray(jcode, dtype=np.int32)
        jcoff = np.ascontiguousarray(jcode_offsets, dtype=np.int32)
        jconsts_v = np.ascontiguousarray(jconsts, dtype=np.float64)
        jkoff = np.ascontiguousarray(jconst_offsets, dtype=np.int32)
        jacs_arr = np.empty((S, nsteps + 1, d, d), dtype=np.float64)
        jacs = jacs_arr
        for s0 in range(S):
            jacs_arr[s0, 0] = np.eye(d)

    xs_arr = np.empty((S, nsteps + 1, d), dtype=np.float64)
    cdef double[:, :, ::1] xs = xs_arr
    cdef double[:, ::1] x0v = x0_arr

    cdef int need = stack_need if stack_need > jstack_need else jstack_need
    # work buffers: x, m, f per seed plus VM stack and solver scratch
    cdef double* stack = <double*> malloc(need * sizeof(double))
    cdef double* xbuf = <double*> malloc(S * d * sizeof(double))
    cdef double* mbuf = <double*> malloc(S * d * sizeof(double))
    cdef double* fbuf = <double*> malloc(S * d * sizeof(double))
    cdef double* Df = <double*> malloc(d * d * sizeof(double))
    cdef double* Amat = <double*> malloc(d * d * sizeof(double))
    cdef double* Bcol = <double*> malloc(d * sizeof(double))
    cdef double* Mcol = <double*> malloc(d * sizeof(double))
    if (stack == NULL or xbuf == NULL or mbuf == NULL or fbuf == NULL
            or Df == NULL or Amat == NULL or Bcol == NULL or Mcol == NULL):
        raise MemoryError()

    cdef Py_ssize_t s, k, it, i, j, col
    cdef double t_mid, delta, diff, mn, half_dt = 0.5 * dt
    cdef long total_iter = 0
    cdef int fail_step = -1
    cdef double fail_resid = 0.0
    cdef bint failed = False

    with nogil:
        for s in range(S):
            for i in range(d):
                xbuf[s * d + i] = x0v[s, i]
                xs[s, 0, i] = x0v[s, i]
        for k in range(nsteps):
            t_mid = t0 + (k + 0.5) * dt
            for s in range(S):
                for i in range(d):
                    mbuf[s * d + i] = xbuf[s * d + i]
            delta = 1e308
            for it in range(maxit):
                delta = 0.0
                for s in range(S):
                    for i in range(d):
                        fbuf[s * d + i] = _eval_one(code_v, coff[i], coff[i + 1],
                                                    consts_v, koff[i], t_mid,
                                                    &mbuf[s * d], stack)
                for s in range(S):
                    for i in range(d):
                        mn = xbuf[s * d + i] + half_dt * fbuf[s * d + i]
                        diff = fabs(mn - mbuf[s * d + i])
                        if diff > delta:
                            delta = diff
                        mbuf[s * d + i] = mn
                total_iter += 1
                if delta <= tol:
                    break
            if delta > tol:
                failed = True
                fail_step = <int> k
                fail_resid = delta
                break
            for s in range(S):
                for i in range(d):
                    xbuf[s * d + i] = 2.0 * mbuf[s * d + i] - xbuf[s * d + i]
                    xs[s, k + 1, i] = xbuf[s * d + i]
            if want_jac:
                for s in range(S):
                    for i in range(d):
                        for j in range(d):
                            Df[i * d + j] = _eval_one(jcode_v, jcoff[i * d + j],
                                                      jcoff[i * d + j + 1],
                                                      jconsts_v, jkoff[i * d + j],
                                                      t_mid, &mbuf[s * d], stack)
                    # columns of M_{k+1} solve (I - h/2 Df) col = (I + h/2 Df) Mcol_k
                    for col in range(d):
                        for i in range(d):
                            Bcol[i] = jacs[s, k, i, col]
                        for i in range(d):
                            mn = Bcol[i]
                            for j in range(d):
                                mn += half_dt * Df[i * d + j] * jacs[s, k, j, col]
                            Mcol[i] = mn
                        for i in range(d):
                            for j in range(d):
                                Amat[i * d + j] = (1.0 if i == j else 0.0) - half_dt * Df[i * d + j]
                        _solve_inplace(Amat, Mcol, Bcol, d)
                        for i in range(d):
                            jacs[s, k + 1, i, col] = Bcol[i]

    free(stack); free(xbuf); free(mbuf); free(fbuf)
    free(Df); free(Amat); free(Bcol); free(Mcol)

    if failed:
        return xs_arr[:, :fail_step + 1], None, total_iter, fail_step, fail_resid
    return xs_arr, jacs_arr, total_iter, -1, 0.0


def greedy_cover(xs, vs, double eps):
    """Greedy ball-box covering count; see pyback.greedy_cover."""
    cdef const double[:, ::1] X = np.ascontiguousarray(xs, dtype=np.float64)
    cdef const double[::1] V = np.ascontiguousarray(vs, dtype=np.float64)
    cdef Py_ssize_t N = X.shape[0]
    cdef int d = X.shape[1]
    cdef int n = d // 2
    cdef double eps2 = eps * eps
    if N == 0:
        return 0
    alive_arr = np.arange(N, dtype=np.int64)
    cdef long long[::1] alive = alive_arr
    cdef Py_ssize_t size = N, new_size, ii
    cdef long long c, j
    cdef long count = 0
    cdef int kk
    cdef double om, dmax, diff
    cdef bint covered
    with nogil:
        while size > 0:
            c = alive[0]
            count += 1
            new_size = 0
            for ii in range(1, size):
                j = alive[ii]
                dmax = 0.0
                for kk in range(d):
                    diff = fabs(X[j, kk] - X[c, kk])
                    if diff > dmax:
                        dmax = diff
                covered = dmax <= eps
                if covered:
                    om = 0.0
                    for kk in range(n):
                        om += X[c, kk] * X[j, n + kk]
                    for kk in range(n):
                        om -= X[c, n + kk] * X[j, kk]
                    covered = fabs(V[j] - V[c] - 0.5 * om) <= eps2
                if not covered:
                    alive[new_size] = j
                    new_size += 1
            size = new_size
    return count
