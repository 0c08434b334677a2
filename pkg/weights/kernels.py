# Shared numba kernels for weight lookups.
# Everything here stays inside the numba nopython subset; without numba the
# decorator is the identity and the same code runs as plain Python.
try:
    from numba import njit
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]

        def wrap(fn):
            return fn
        return wrap


SIGN_NEGATIVE = -1
SIGN_ZERO = 0
SIGN_POSITIVE = 1


@njit
def w_lookup(n, memo, power, p, coef):
    """w(n) from the memo, falling back to the closed form past its end."""
    if n < memo.shape[0]:
        return memo[n]
    if power:
        return 1.0 / (1.0 + coef * (n + 1.0) ** (-p))
    return 1.0


@njit
def urn_pair(sign, blue, red, memo, power, p, coef):
    """(b(blue), r(red)) for an urn at a site of the given sign."""
    if sign > 0:
        b = w_lookup(2 * blue + 1, memo, power, p, coef)
        r = w_lookup(2 * red, memo, power, p, coef)
    elif sign < 0:
        b = w_lookup(2 * blue, memo, power, p, coef)
        r = w_lookup(2 * red + 1, memo, power, p, coef)
    else:
        b = w_lookup(2 * blue, memo, power, p, coef)
        r = w_lookup(2 * red, memo, power, p, coef)
    return b, r
