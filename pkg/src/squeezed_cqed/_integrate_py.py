"""Pure-Python Runge-Kutta steppers; reference implementation of ``_kernels``.

Both backends expose the same two functions and mutate ``y`` in place.
Status codes: 0 ok, 1 step-size underflow, 2 step budget exhausted.
"""
import numpy as np

# Dormand-Prince 5(4) tableau
C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
E = (71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40)

SAFETY, MIN_FACTOR, MAX_FACTOR = 0.9, 0.2, 5.0


def hermitize(y, dim):
    m = y.reshape(dim, dim)
    m[...] = 0.5 * (m + m.conj().T)


def _rhs_of(gen):
    if callable(gen):
        return gen
    return gen.apply


def dopri5_advance(gen, y, t0, t1, h, rtol, atol, hmin, max_steps, dim,
                   herm_every, step_count):
    """Advance y from t0 to t1 with adaptive Dormand-Prince steps.

    Returns (h_next, step_count, n_accepted, n_rejected, smallest_h, status).
    """
    f = _rhs_of(gen)
    t = t0
    n_acc = n_rej = 0
    smallest = np.inf
    k = [None] * 7
    k[0] = f(t, y)
    h_next = h
    while t < t1:
        if n_acc + n_rej >= max_steps:
            return h_next, step_count, n_acc, n_rej, smallest, 2
        h_try = min(h_next, t1 - t)
        last = h_try >= t1 - t
        while True:
            if h_try < hmin:
                return h_next, step_count, n_acc, n_rej, h_try, 1
            for s in range(1, 7):
                acc = y.copy()
                for j, a in enumerate(A[s]):
                    if a != 0.0:
                        acc += (h_try * a) * k[j]
                if s == 6:
                    y_new = acc
                k[s] = f(t + C[s] * h_try, acc)
            err_vec = E[0] * k[0]
            for j in range(2, 7):
                err_vec += E[j] * k[j]
            err_vec *= h_try
            scale = atol + rtol * max(np.max(np.abs(y)), np.max(np.abs(y_new)))
            err = np.max(np.abs(err_vec)) / scale
            if err <= 1.0:
                factor = MAX_FACTOR if err == 0.0 else min(MAX_FACTOR, max(MIN_FACTOR, SAFETY * err ** -0.2))
                break
            n_rej += 1
            h_try *= max(MIN_FACTOR, SAFETY * err ** -0.2)
            last = False
        t = t1 if last else t + h_try
        y[:] = y_new
        k[0] = k[6]
        n_acc += 1
        step_count += 1
        smallest = min(smallest, h_try)
        if herm_every > 0 and step_count % herm_every == 0:
            hermitize(y, dim)
            k[0] = f(t, y)
        # a truncated final step should not shrink the next segment's step
        h_next = max(h_next, h_try * factor) if last else h_try * factor
    return h_next, step_count, n_acc, n_rej, smallest, 0


def rk4_advance(gen, y, t0, t1, dt, dim, herm_every, step_count):
    """Classical RK4 with fixed step ``dt``; the last step lands on t1."""
    f = _rhs_of(gen)
    t = t0
    while t < t1:
        h = min(dt, t1 - t)
        if t1 - (t + h) < 1e-12 * dt:
            h = t1 - t
        k1 = f(t, y)
        k2 = f(t + h / 2, y + (h / 2) * k1)
        k3 = f(t + h / 2, y + (h / 2) * k2)
        k4 = f(t + h, y + h * k3)
        y += (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
        t = t1 if h == t1 - t else t + h
        step_count += 1
        if herm_every > 0 and step_count % herm_every == 0:
            hermitize(y, dim)
    return step_count
