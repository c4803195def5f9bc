# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled Runge-Kutta steppers for phased sparse generators.

Mirrors ``_integrate_py`` step for step; see that module for the contract.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport cos, sin, sqrt, fabs, fmin, fmax, pow, INFINITY

cnp.import_array()

cdef double[7] C_ = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0]
cdef double[7][6] A_ = [
    [0, 0, 0, 0, 0, 0],
    [0.2, 0, 0, 0, 0, 0],
    [3.0 / 40, 9.0 / 40, 0, 0, 0, 0],
    [44.0 / 45, -56.0 / 15, 32.0 / 9, 0, 0, 0],
    [19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729, 0, 0],
    [9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656, 0],
    [35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84],
]
cdef double[7] E_ = [71.0 / 57600, 0.0, -71.0 / 16695, 71.0 / 1920,
                     -17253.0 / 339200, 22.0 / 525, -1.0 / 40]

cdef double SAFETY = 0.9
cdef double MIN_FACTOR = 0.2
cdef double MAX_FACTOR = 5.0


cdef void _matvec(const double[::1] freqs, const cnp.int64_t[:, ::1] indptr,
                  const cnp.int64_t[::1] indices, const double complex[::1] data,
                  double t, const double complex[::1] y, double complex[::1] out) nogil:
    cdef Py_ssize_t n = y.shape[0]
    cdef Py_ssize_t nterms = freqs.shape[0]
    cdef Py_ssize_t k, i
    cdef cnp.int64_t p
    cdef double complex acc, ph
    for i in range(n):
        out[i] = 0
    for k in range(nterms):
        if freqs[k] == 0.0:
            ph = 1.0
        else:
            ph = cos(freqs[k] * t) + 1j * sin(freqs[k] * t)
        for i in range(n):
            acc = 0
            for p in range(indptr[k, i], indptr[k, i + 1]):
                acc = acc + data[p] * y[indices[p]]
            if acc != 0:
                out[i] = out[i] + ph * acc


cdef void _hermitize(double complex[::1] y, Py_ssize_t dim) nogil:
    cdef Py_ssize_t i, j
    cdef double complex a, b, m
    for i in range(dim):
        y[i * dim + i] = y[i * dim + i].real
        for j in range(i + 1, dim):
            a = y[i * dim + j]
            b = y[j * dim + i]
            m = 0.5 * (a + b.conjugate())
            y[i * dim + j] = m
            y[j * dim + i] = m.conjugate()


cdef inline double _cabs(double complex z) nogil:
    return sqrt(z.real * z.real + z.imag * z.imag)


def dopri5_advance(gen, double complex[::1] y, double t0, double t1, double h,
                   double rtol, double atol, double hmin, long long max_steps,
                   Py_ssize_t dim, long long herm_every, long long step_count):
    cdef const double[::1] freqs = gen.freqs
    cdef const cnp.int64_t[:, ::1] indptr = gen.indptr
    cdef const cnp.int64_t[::1] indices = gen.indices
    cdef const double complex[::1] data = gen.data
    cdef Py_ssize_t n = y.shape[0]
    cdef double complex[:, ::1] k = np.zeros((7, n), dtype=complex)
    cdef double complex[::1] tmp = np.zeros(n, dtype=complex)
    cdef double complex[::1] ynew = np.zeros(n, dtype=complex)
    cdef double t = t0, h_try, h_next = h, err, scale, ymax, nmax, factor = MAX_FACTOR, v
    cdef double smallest = INFINITY
    cdef long long n_acc = 0, n_rej = 0
    cdef int s, j, status = 0
    cdef bint last
    cdef Py_ssize_t i
    cdef double complex acc

    with nogil:
        _matvec(freqs, indptr, indices, data, t, y, k[0])
        while t < t1:
            if n_acc + n_rej >= max_steps:
                status = 2
                break
            h_try = fmin(h_next, t1 - t)
            last = h_try >= t1 - t
            while True:
                if h_try < hmin:
                    status = 1
                    smallest = h_try
                    break
                for s in range(1, 7):
                    for i in range(n):
                        acc = y[i]
                        for j in range(s):
                            if A_[s][j] != 0.0:
                                acc = acc + (h_try * A_[s][j]) * k[j, i]
                        tmp[i] = acc
                    if s == 6:
                        for i in range(n):
                            ynew[i] = tmp[i]
                    _matvec(freqs, indptr, indices, data, t + C_[s] * h_try, tmp, k[s])
                err = 0.0
                ymax = 0.0
                nmax = 0.0
                for i in range(n):
                    acc = E_[0] * k[0, i]
                    for j in range(2, 7):
                        acc = acc + E_[j] * k[j, i]
                    v = h_try * _cabs(acc)
                    if v > err:
                        err = v
                    v = _cabs(y[i])
                    if v > ymax:
                        ymax = v
                    v = _cabs(ynew[i])
                    if v > nmax:
                        nmax = v
                scale = atol + rtol * fmax(ymax, nmax)
                err = err / scale
                if err <= 1.0:
                    if err == 0.0:
                        factor = MAX_FACTOR
                    else:
                        factor = fmin(MAX_FACTOR, fmax(MIN_FACTOR, SAFETY * pow(err, -0.2)))
                    break
                n_rej += 1
                h_try = h_try * fmax(MIN_FACTOR, SAFETY * pow(err, -0.2))
                last = False
            if status != 0:
                break
            if last:
                t = t1
            else:
                t = t + h_try
            for i in range(n):
                y[i] = ynew[i]
                k[0, i] = k[6, i]
            n_acc += 1
            step_count += 1
            if h_try < smallest:
                smallest = h_try
            if herm_every > 0 and step_count % herm_every == 0:
                _hermitize(y, dim)
                _matvec(freqs, indptr, indices, data, t, y, k[0])
            if last:
                h_next = fmax(h_next, h_try * factor)
            else:
                h_next = h_try * factor
    return h_next, step_count, n_acc, n_rej, smallest, status


def rk4_advance(gen, double complex[::1] y, double t0, double t1, double dt,
                Py_ssize_t dim, long long herm_every, long long step_count):
    cdef const double[::1] freqs = gen.freqs
    cdef const cnp.int64_t[:, ::1] indptr = gen.indptr
    cdef const cnp.int64_t[::1] indices = gen.indices
    cdef const double complex[::1] data = gen.data
    cdef Py_ssize_t n = y.shape[0]
    cdef double complex[:, ::1] k = np.zeros((4, n), dtype=complex)
    cdef double complex[::1] tmp = np.zeros(n, dtype=complex)
    cdef double t = t0, h
    cdef Py_ssize_t i
    with nogil:
        while t < t1:
            h = fmin(dt, t1 - t)
            if t1 - (t + h) < 1e-12 * dt:
                h = t1 - t
            _matvec(freqs, indptr, indices, data, t, y, k[0])
            for i in range(n):
                tmp[i] = y[i] + (h / 2) * k[0, i]
            _matvec(freqs, indptr, indices, data, t + h / 2, tmp, k[1])
            for i in range(n):
                tmp[i] = y[i] + (h / 2) * k[1, i]
            _matvec(freqs, indptr, indices, data, t + h / 2, tmp, k[2])
            for i in range(n):
                tmp[i] = y[i] + h * k[2, i]
            _matvec(freqs, indptr, indices, data, t + h, tmp, k[3])
            for i in range(n):
                y[i] = y[i] + (h / 6) * (k[0, i] + 2 * k[1, i] + 2 * k[2, i] + k[3, i])
            if h == t1 - t:
                t = t1
            else:
                t = t + h
            step_count += 1
            if herm_every > 0 and step_count % herm_every == 0:
                _hermitize(y, dim)
    return step_count
