# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled Euler walker (hot path of the simulator).

Semantics and floating-point behaviour must stay bit-identical to
``_pathkernel_py.euler_walk``; compiled with -ffp-contract=off so the
``b*dt + a*w`` association matches the interpreter exactly.
"""

from libc.math cimport cos, sin, sqrt


def euler_walk(double[::1] dt, double[::1] z, long[::1] obs_at, long[::1] jump_at, double x0,
               int drift_code, double drift_p0, double drift_p1,
               int diff_code, double diff_p0, double diff_p1,
               int jump_code, double jump_eps,
               double[::1] marks, double[::1] obs, double[::1] x_pre, double[::1] x_post,
               double[::1] jumps):
    cdef Py_ssize_t j, m = dt.shape[0]
    cdef long i, k
    cdef double x = x0
    cdef double h, w, b, a, incr, theta, c
    for j in range(m):
        h = dt[j]
        w = sqrt(h) * z[j]
        if drift_code == 0:
            b = drift_p0
        else:
            b = drift_p0 + drift_p1 * sin(x)
        if diff_code == 0:
            a = diff_p0
        else:
            a = diff_p0 + diff_p1 * sin(x)
        incr = b * h + a * w
        x = x + incr
        i = obs_at[j]
        if i >= 0:
            obs[i] = x
        k = jump_at[j]
        if k >= 0:
            theta = marks[k]
            if jump_code == 0:
                c = theta
            else:
                c = theta * (1.0 + jump_eps * cos(x))
            x_pre[k] = x
            jumps[k] = c
            x = x + c
            x_post[k] = x
    return x
