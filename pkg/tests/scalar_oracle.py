"""Independent scalar reference for chain values on 1x1 instances.

Everything here is plain float arithmetic on python callables; nothing is
imported from the package under test, so these values can stand as an
oracle for the matrix path.
"""

import math


def kf(f, m, M):
    return f((m + M) / 2.0) ** 2 / (f(m) * f(M))


def tent(t, m, M):
    return 0.5 - abs(t - (m + M) / 2.0) / (M - m)


def geom(f, m, M):
    k = kf(f, m, M)

    def g(t):
        w = (t - m) / (M - m)
        return k ** tent(t, m, M) * f(m) ** (1.0 - w) * f(M) ** w

    return g


def chord(f, m, M):
    def ell(t):
        return (M - t) / (M - m) * f(m) + (t - m) / (M - m) * f(M)

    return ell


def penalty(f, m, M):
    def h(t):
        return ((M - t) * f(t - m) + (t - m) * f(M - t)) / (M - m)

    return h


def lc_quad_terms(f, a, b, c, d, m, M):
    g = geom(f, m, M)
    ell = chord(f, m, M)
    return [
        f(b) + f(c),
        g(b) + g(c),
        ell(b) + ell(c),
        g(a) + g(d),
        f(a) + f(d),
    ]


def lc_mid_terms(f, a, d, m, M):
    g = geom(f, m, M)
    ell = chord(f, m, M)
    w = (a + d) / 2.0
    return [f(w), g(w), ell(w), (g(a) + g(d)) / 2.0, (f(a) + f(d)) / 2.0]


def lc_mercer_terms(f, bs, ws, m, M):
    g = geom(f, m, M)
    bbar = sum(w * b for w, b in zip(ws, bs))
    big_w = M + m - bbar
    return [
        sum(w * f(b) for w, b in zip(ws, bs)) + f(big_w),
        sum(w * g(b) for w, b in zip(ws, bs)) + g(big_w),
        f(m) + f(M),
    ]


def lc_multi_terms(f, quads, ws, m, M):
    g = geom(f, m, M)
    ell = chord(f, m, M)
    abar = sum(w * q[0] for w, q in zip(ws, quads))
    bbar = sum(w * q[1] for w, q in zip(ws, quads))
    cbar = sum(w * q[2] for w, q in zip(ws, quads))
    dbar = sum(w * q[3] for w, q in zip(ws, quads))
    return [
        sum(w * f(q[1]) for w, q in zip(ws, quads)) + f(cbar),
        sum(w * g(q[1]) for w, q in zip(ws, quads)) + g(cbar),
        ell(bbar) + ell(cbar),
        g(abar) + sum(w * g(q[3]) for w, q in zip(ws, quads)),
        f(abar) + sum(w * f(q[3]) for w, q in zip(ws, quads)),
    ]


def jm_base_terms(f, bs, ws, m, M):
    bbar = sum(w * b for w, b in zip(ws, bs))
    return [f(M + m - bbar), f(m) + f(M) - sum(w * f(b) for w, b in zip(ws, bs))]


def mos_base_terms(f, a, b, c, d):
    return [f(b) + f(c), f(a) + f(d)]


def sq_outer(f, a, d, m, M):
    gap = f(M - m) / (M - m)
    return f(m - a) + gap * (m - a) + f(d - M) + gap * (d - M)


def sq_quad_terms(f, a, b, c, d, m, M):
    h = penalty(f, m, M)
    lhs = f(b) + f(c) + h(b) + h(c)
    rhs = f(a) + f(d) - sq_outer(f, a, d, m, M)
    return [lhs, rhs]


def sq_map_terms(f, a, b, c, d, m, M):
    # map variants keep every correction on the right side; with a 1x1
    # (identity-acting) map all three placements coincide
    h = penalty(f, m, M)
    lhs = f(b) + f(c)
    rhs = f(a) + f(d) - h(b) - h(c) - sq_outer(f, a, d, m, M)
    return [lhs, rhs]


def sq_mid_terms(f, a, d, m, M):
    h = penalty(f, m, M)
    w = (a + d) / 2.0
    lhs = f(w) + h(w)
    rhs = 0.5 * (f(a) + f(d) - sq_outer(f, a, d, m, M))
    return [lhs, rhs]


def sq_multi_a_terms(f, quads, ws, m, M):
    h = penalty(f, m, M)
    gap = f(M - m) / (M - m)
    abar = sum(w * q[0] for w, q in zip(ws, quads))
    bbar = sum(w * q[1] for w, q in zip(ws, quads))
    cbar = sum(w * q[2] for w, q in zip(ws, quads))
    dbar = sum(w * q[3] for w, q in zip(ws, quads))
    lhs = f(bbar) + f(cbar) + h(bbar) + h(cbar)
    rhs = (
        sum(w * (f(q[0]) + f(q[3])) for w, q in zip(ws, quads))
        - sum(w * f(m - q[0]) for w, q in zip(ws, quads))
        - gap * (m - abar)
        - sum(w * f(q[3] - M) for w, q in zip(ws, quads))
        - gap * (dbar - M)
    )
    return [lhs, rhs]


def sq_multi_b_terms(f, quads, ws, m, M):
    h = penalty(f, m, M)
    gap = f(M - m) / (M - m)
    abar = sum(w * q[0] for w, q in zip(ws, quads))
    cbar = sum(w * q[2] for w, q in zip(ws, quads))
    dbar = sum(w * q[3] for w, q in zip(ws, quads))
    lhs = (
        sum(w * f(q[1]) for w, q in zip(ws, quads))
        + f(cbar)
        + sum(w * h(q[1]) for w, q in zip(ws, quads))
        + h(cbar)
    )
    rhs = (
        f(abar)
        + sum(w * f(q[3]) for w, q in zip(ws, quads))
        - f(m - abar)
        - gap * (m - abar)
        - sum(w * f(q[3] - M) for w, q in zip(ws, quads))
        - gap * (dbar - M)
    )
    return [lhs, rhs]


def sq_mercer_terms(f, bs, ws, m, M):
    h = penalty(f, m, M)
    bbar = sum(w * b for w, b in zip(ws, bs))
    big_w = M + m - bbar
    lhs = f(big_w) + sum(w * h(b) for w, b in zip(ws, bs)) + h(big_w)
    rhs = f(m) + f(M) - 2.0 * f(0.0) - sum(w * f(b) for w, b in zip(ws, bs))
    return [lhs, rhs]


EXP = math.exp
SQUARE = lambda t: t * t
CUBE = lambda t: t ** 3
RECIP = lambda t: 1.0 / t
