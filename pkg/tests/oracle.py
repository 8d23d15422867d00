"""Independent high-precision references built directly on mpmath.

Nothing here imports the package's numerics: sequences are re-derived from
their recurrences and f is summed factor by factor in extended precision.
"""
import mpmath as mp

DPS = 220            # enough to difference log-moduli of size 1e120 exactly
exact = mp.workdps(DPS)


@exact
def mp_theorem4(log_c_p, N, r1, k_max):
    """log r_k for r_{k+1} = P_k r_k^N prod_{j<=k} (1 + r_k/r_j), P given by log_c_p(k)."""
    r = [mp.mpf(r1)]
    for k in range(1, k_max):
        rk = r[-1]
        prod = mp.mpf(1)
        for rj in r:
            prod *= 1 + rk / rj
        r.append(mp.exp(log_c_p(k)) * rk ** N * prod)
    return [mp.log(x) for x in r]


@exact
def mp_baker1988(c, r1, k0, k_max):
    r = [mp.mpf(r1) * 2 ** i for i in range(k0)]
    for _ in range(k0, k_max):
        rk = r[-1]
        prod = mp.mpf(1)
        for rj in r:
            prod *= (1 + rk / rj) ** 2
        r.append(mp.mpf(c) ** 2 * prod)
    return [mp.log(x) for x in r]


@exact
def mp_theorem2(q0, n):
    q = [q0]
    while len(q) < n + 1:
        q.append(3 * q[-1] ** 2 // 2)
    log_r = [mp.mpf(q0) / 2] + [mp.mpf(q[i]) for i in range(n - 1)]
    return log_r, q[:n]


def _log_one_minus_exp(d):
    """Principal log(1 - e^d) up to a multiple of 2 pi i, safe for huge |Re d|."""
    if mp.re(d) > 600:          # e^-d is below the working precision
        return d + mp.mpc(0, mp.pi)
    if mp.re(d) > 40:
        return d + mp.log(mp.exp(-d) - 1)
    return mp.log(-mp.expm1(d))


@exact
def mp_log_f(log_r, theta, mult, log_c, arg_c, N, log_z):
    """log f(z) (imaginary part only mod 2 pi) for f = C z^N prod (1 - z/a_j)^{m_j}."""
    log_z = mp.mpc(log_z)
    s = mp.mpc(log_c, arg_c) + N * log_z
    for L, th, m in zip(log_r, theta, mult):
        d = log_z - mp.mpc(L, th)
        if mp.re(d) < -mp.mpf(300):
            break
        s += m * _log_one_minus_exp(d)
    return s


@exact
def mp_logderiv(log_r, theta, mult, N, log_z):
    """z f'(z)/f(z) = N - sum m t/(1 - t), t = z/a_j."""
    log_z = mp.mpc(log_z)
    g = mp.mpc(N)
    for L, th, m in zip(log_r, theta, mult):
        d = log_z - mp.mpc(L, th)
        if mp.re(d) < -mp.mpf(300):
            break
        if mp.re(d) > 600:
            g += m
        elif mp.re(d) > 40:
            e = mp.exp(-d)
            g -= m * (-1 - e / (1 - e))
        else:
            t = mp.exp(d)
            g -= m * t / (1 - t)
    return g


@exact
def mp_zeros(seq):
    """(log_r, theta, mult) with log_r re-derived in extended precision.

    The floats in ``seq.log_r`` are rounded representatives; the product is
    defined by the recurrence, so the reference uses the exact recurrence.
    """
    spec = seq.family
    n = len(seq.log_r)
    if spec.kind in ("theorem4", "baker1976"):
        L = mp_theorem4(lambda k: spec.p_rule.log_value(k), spec.N, spec.r1, n)
    elif spec.kind == "baker1988":
        L = mp_baker1988(mp.exp(spec.C.log_mod), spec.r1, seq.k0, n)
    else:
        L, _ = mp_theorem2(spec.q0, n)
    return L, [mp.mpf(float(t)) for t in seq.theta], list(seq.mult)


_zeros = {}


@exact
def zeros(seq):
    if id(seq) not in _zeros:
        _zeros[id(seq)] = mp_zeros(seq)
    return _zeros[id(seq)]


@exact
def mp_phi_rel(seq, base, log_w):
    """(log|f(w a_base)| - log r_{base+1}, arg f mod 2 pi) in extended precision."""
    L, th, m = zeros(seq)
    p = seq.pos(base)
    lz = mp.mpc(L[p], th[p]) + mp.mpc(log_w)
    v = mp_log_f(L, th, m, seq.constant.log_mod, seq.constant.arg, seq.origin_mult, lz)
    return mp.re(v) - L[p + 1], mp.im(v)


@exact
def mp_log_abs_f(seq, log_radius, arg):
    """log|f| at an absolute point (moderate radii only)."""
    L, th, m = zeros(seq)
    v = mp_log_f(L, th, m, seq.constant.log_mod, seq.constant.arg, seq.origin_mult,
                 mp.mpc(log_radius, arg))
    return mp.re(v)


@exact
def mp_critical(seq, k, w0):
    """Root of z f'/f near w0 a_k, returned as w."""
    L, th, m = zeros(seq)
    p = seq.pos(k)
    ak = mp.mpc(L[p], th[p])
    fn = lambda w: mp_logderiv(L, th, m, seq.origin_mult, ak + mp.log(w))
    return mp.findroot(fn, mp.mpc(w0), tol=mp.mpf(10) ** -60)
