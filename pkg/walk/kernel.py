# Inner loop of the self-interacting walk.
#
# State lives in flat arrays so the loop compiles under numba:
#   ints   = [pos, smax, imin, step]
#   floats = [gamma_sum, kahan_comp, qv_sum, sup_dev, gamma_value]
# up[i] / down[i] count jumps i->i+1 / i->i-1 at site i - offset.
from weights.kernels import njit, w_lookup


@njit
def advance_walk(uniforms, up, down, visits, site_drift, offset, ints, floats,
                 memo, power, p, coef, positions, increments, out0,
                 record_pos, record_inc, stop_site, stop_count):
    """Consume uniforms one step each; stop early near the array edge.

    Also stops right after the step that brings the visit count of stop_site
    to stop_count (stop_count <= 0 disables this). Returns the number of
    uniforms used; the caller grows the arrays and calls again with the
    remainder when the edge was hit.
    """
    pos = ints[0]
    smax = ints[1]
    imin = ints[2]
    k = ints[3]
    g = floats[0]
    comp = floats[1]
    qv = floats[2]
    sup_dev = floats[3]
    gam = floats[4]
    size = up.shape[0]
    n = uniforms.shape[0]

    j = 0
    while j < n:
        idx = pos + offset
        if idx < 1 or idx > size - 2:
            break
        l = down[idx] + up[idx - 1]
        r = up[idx] + down[idx + 1]
        wl = w_lookup(l, memo, power, p, coef)
        wr = w_lookup(r, memo, power, p, coef)
        tot = wl + wr
        d = (wr - wl) / tot

        # Kahan
        y = d - comp
        t = g + y
        comp = (t - g) - y
        g = t
        qv += d * d
        site_drift[idx] += d
        if record_inc:
            increments[out0 + j] = d

        if uniforms[j] < wr / tot:
            up[idx] += 1
            pos += 1
        else:
            down[idx] += 1
            pos -= 1
        visits[pos + offset] += 1
        if pos > smax:
            smax = pos
        elif pos < imin:
            imin = pos
        dev = abs(g - gam * (smax + imin))
        if dev > sup_dev:
            sup_dev = dev
        if record_pos:
            positions[out0 + j + 1] = pos
        j += 1
        k += 1
        if stop_count > 0 and pos == stop_site and visits[pos + offset] >= stop_count:
            break

    ints[0] = pos
    ints[1] = smax
    ints[2] = imin
    ints[3] = k
    floats[0] = g
    floats[1] = comp
    floats[2] = qv
    floats[3] = sup_dev
    return j
