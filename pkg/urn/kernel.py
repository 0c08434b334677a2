# Urn kernels: draw loop and the dynamic-programming sweep over (blue, red).
from weights.kernels import njit, urn_pair


@njit
def run_urn(uniforms, counts, target, stop_on_blue, sign, memo, power, p, coef,
            colors, out0, record):
    """Draw until the blue (or red) count reaches `target` or uniforms run out.

    counts = [blue, red] is updated in place. colors[out0 + j] = 1 marks a
    blue j-th draw of this call when `record` is set. Returns draws made.
    """
    blue = counts[0]
    red = counts[1]
    n = uniforms.shape[0]
    j = 0
    while j < n:
        if stop_on_blue:
            if blue >= target:
                break
        elif red >= target:
            break
        b, r = urn_pair(sign, blue, red, memo, power, p, coef)
        if uniforms[j] < b / (b + r):
            blue += 1
            if record:
                colors[out0 + j] = 1
        else:
            red += 1
        j += 1
    counts[0] = blue
    counts[1] = red
    return j


@njit
def dp_sweep(m, cap, sign, memo, power, p, coef, row_means, escaped, final):
    """Exact law of the red count at tau_k^B for k = 0..m, reds capped at `cap`.

    row_means[k] = sum_j P(R = j at tau_k^B, no escape) * j
    escaped[i]   = mass that drew its (cap+1)-th red while holding i blues
    final[j]     = P(R = j at tau_m^B, no escape)
    """
    size = cap + 1
    entering = final
    for j in range(size):
        entering[j] = 0.0
    entering[0] = 1.0
    row_means[0] = 0.0
    nxt = entering.copy()
    for i in range(m):
        carry = 0.0
        mean = 0.0
        for j in range(size):
            carry += entering[j]
            b, r = urn_pair(sign, i, j, memo, power, p, coef)
            tot = b + r
            out = carry * (b / tot)
            nxt[j] = out
            mean += out * j
            carry *= r / tot
        escaped[i] = carry
        row_means[i + 1] = mean
        for j in range(size):
            entering[j] = nxt[j]
