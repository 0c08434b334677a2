# Discrete Brownian motion perturbed at extrema.
from weights.kernels import njit


@njit
def solve_path(increments, theta_plus, theta_minus, brownian, values, run_max, run_min):
    """Fill B, W, S, I on the grid; index 0 holds the zero start.

    A step that would cross the running max (min) is resolved by solving the
    fixed point with the extremum moving along with W.
    """
    b = 0.0
    s = 0.0
    i = 0.0
    n = increments.shape[0]
    brownian[0] = 0.0
    values[0] = 0.0
    run_max[0] = 0.0
    run_min[0] = 0.0
    for k in range(n):
        b += increments[k]
        cand = b + (theta_plus * s + theta_minus * i)
        if cand > s:
            w = (b + theta_minus * i) / (1.0 - theta_plus)
            s = w
        elif cand < i:
            w = (b + theta_plus * s) / (1.0 - theta_minus)
            i = w
        else:
            w = cand
        brownian[k + 1] = b
        values[k + 1] = w
        run_max[k + 1] = s
        run_min[k + 1] = i
