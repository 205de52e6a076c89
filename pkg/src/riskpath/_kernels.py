"""Compiled inner solver shared by every penalty."""
import numpy as np
from numba import njit


@njit(cache=True)
def block_descent(H, r, theta, starts, members, gamma, thresh, ridge, tol, max_sweeps):
    """Minimise ``r0'(t - t0) + 1/2 (t - t0)' H (t - t0) + penalty(t)`` in place.

    ``r`` holds the gradient of the quadratic at the current ``theta`` and is
    kept up to date. Block ``g`` spans ``members[starts[g]:starts[g + 1]]``
    and carries the penalty ``thresh[g] * ||t_g|| + ridge[g] / 2 * ||t_g||^2``.
    Each block step minimises a majoriser with curvature ``gamma[g]`` (the
    largest eigenvalue of the block of ``H``), which is the exact coordinate
    minimiser when the block is a single column.

    Returns the number of sweeps used.
    """
    n_blocks = starts.shape[0] - 1
    p = theta.shape[0]
    u = np.empty(p)
    delta = np.empty(p)
    for sweep in range(max_sweeps):
        biggest = 0.0
        for g in range(n_blocks):
            a = starts[g]
            b = starts[g + 1]
            gam = gamma[g]
            if gam <= 0.0:
                continue
            norm2 = 0.0
            for k in range(a, b):
                j = members[k]
                u[k - a] = gam * theta[j] - r[j]
                norm2 += u[k - a] * u[k - a]
            norm = np.sqrt(norm2)
            if norm <= thresh[g]:
                shrink = 0.0
            else:
                shrink = (1.0 - thresh[g] / norm) / (gam + ridge[g])
            changed = False
            for k in range(a, b):
                j = members[k]
                new = shrink * u[k - a]
                d = new - theta[j]
                delta[k - a] = d
                if d != 0.0:
                    changed = True
                    if abs(d) > biggest:
                        biggest = abs(d)
                theta[j] = new
            if changed:
                for k in range(a, b):
                    d = delta[k - a]
                    if d != 0.0:
                        j = members[k]
                        for i in range(p):
                            r[i] += H[i, j] * d
        if biggest < tol:
            return sweep + 1
    return max_sweeps
