"""Pure-Python Euler walker, the fallback for the compiled extension.

Must stay bit-identical to ``_pathkernel.pyx``: both walk the same micro-step
sequence, compute ``incr = b*dt + a*(sqrt(dt)*z)`` with the same association,
and call the same libm sin/cos/sqrt.  Change one only together with the other.
"""

import math


def euler_walk(dt, z, obs_at, jump_at, x0,
               drift_code, drift_p0, drift_p1,
               diff_code, diff_p0, diff_p1,
               jump_code, jump_eps,
               marks, obs, x_pre, x_post, jumps):
    """Walk the micro grid, recording observations and applying jumps.

    dt, z          per-step lengths and standard normal draws (length M)
    obs_at[j]      observation index written after step j, or -1
    jump_at[j]     jump ordinal applied after step j (post observation), or -1
    codes          0 = constant, 1 = bounded sine (p0 + p1*sin(x)); jumps:
                   0 = additive (c = theta), 1 = modulated (c = theta*(1+eps*cos x))
    obs, x_pre, x_post, jumps   output arrays written in place
    """
    dt_l = dt.tolist()
    z_l = z.tolist()
    obs_l = obs_at.tolist()
    jump_l = jump_at.tolist()
    marks_l = marks.tolist()
    sqrt = math.sqrt
    sin = math.sin
    cos = math.cos

    x = x0
    for j in range(len(dt_l)):
        h = dt_l[j]
        w = sqrt(h) * z_l[j]
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
        i = obs_l[j]
        if i >= 0:
            obs[i] = x
        k = jump_l[j]
        if k >= 0:
            theta = marks_l[k]
            if jump_code == 0:
                c = theta
            else:
                c = theta * (1.0 + jump_eps * cos(x))
            x_pre[k] = x
            jumps[k] = c
            x = x + c
            x_post[k] = x
    return x
