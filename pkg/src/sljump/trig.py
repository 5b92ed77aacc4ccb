"""Closed-form trigonometric integrals on [0, d] and quadrature exact for
piecewise-linear integrands.  All functions broadcast over numpy arrays and
are parity-exact in the frequency argument by construction.
"""

import numpy as np


def _D(u, d):
    """sin(u d) / u, continued through u = 0."""
    return d * np.sinc(np.asarray(u) * d / np.pi)


def _E(u, d):
    """(1 - cos(u d)) / u = 2 sin^2(u d / 2) / u, continued through u = 0."""
    u = np.asarray(u, dtype=float)
    return 0.5 * d * d * u * np.sinc(u * d / (2.0 * np.pi)) ** 2


def int_sin_sin(a, b, d):
    """integral_0^d sin(a x) sin(b x) dx."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return 0.5 * (_D(a - b, d) - _D(a + b, d))


def int_cos_cos(a, b, d):
    """integral_0^d cos(a x) cos(b x) dx."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return 0.5 * (_D(a - b, d) + _D(a + b, d))


def int_sin_cos(a, b, d):
    """integral_0^d sin(a x) cos(b x) dx."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return 0.5 * (_E(a + b, d) + _E(a - b, d))


def pl_moment(x, f, k):
    """integral f(x) x^k dx for the piecewise-linear interpolant of (x, f)."""
    x = np.asarray(x, dtype=float)
    f = np.asarray(f, dtype=float)
    a, b = x[:-1], x[1:]
    fa = f[:-1]
    s = np.diff(f) / np.diff(x)
    p1 = (b ** (k + 1) - a ** (k + 1)) / (k + 1)
    p2 = (b ** (k + 2) - a ** (k + 2)) / (k + 2)
    return float(np.sum(fa * p1 + s * (p2 - a * p1)))


def _filon_small(x, f, lam, odd):
    # Taylor expansion in lam; adequate below the |lam|*L threshold
    lam = np.asarray(lam, dtype=float)
    if odd:
        m1 = pl_moment(x, f, 1)
        m3 = pl_moment(x, f, 3)
        m5 = pl_moment(x, f, 5)
        return lam * m1 - lam**3 * m3 / 6.0 + lam**5 * m5 / 120.0
    m0 = pl_moment(x, f, 0)
    m2 = pl_moment(x, f, 2)
    m4 = pl_moment(x, f, 4)
    return m0 - lam**2 * m2 / 2.0 + lam**4 * m4 / 24.0


def filon_sin(x, f, lam):
    """integral_0^L f(x) sin(lam x) dx, exact for piecewise-linear f.

    `lam` may be a scalar or an array; odd in lam exactly.
    """
    x = np.asarray(x, dtype=float)
    f = np.asarray(f, dtype=float)
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    L = x[-1]
    out = np.empty_like(lam)
    small = np.abs(lam) * L < 0.05
    if np.any(small):
        out[small] = _filon_small(x, f, lam[small], odd=True)
    big = ~small
    if np.any(big):
        lb = lam[big]
        s = np.diff(f) / np.diff(x)
        sin_all = np.sin(np.outer(lb, x))
        boundary = (f[0] * 1.0 - f[-1] * np.cos(lb * L)) / lb
        interior = (sin_all[:, 1:] - sin_all[:, :-1]) @ s / lb**2
        out[big] = boundary + interior
    return out if out.size > 1 else float(out[0])


def filon_cos(x, f, lam):
    """integral_0^L f(x) cos(lam x) dx, exact for piecewise-linear f; even in lam."""
    x = np.asarray(x, dtype=float)
    f = np.asarray(f, dtype=float)
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    L = x[-1]
    out = np.empty_like(lam)
    small = np.abs(lam) * L < 0.05
    if np.any(small):
        out[small] = _filon_small(x, f, lam[small], odd=False)
    big = ~small
    if np.any(big):
        lb = lam[big]
        s = np.diff(f) / np.diff(x)
        cos_all = np.cos(np.outer(lb, x))
        boundary = f[-1] * np.sin(lb * L) / lb
        interior = (cos_all[:, 1:] - cos_all[:, :-1]) @ s / lb**2
        out[big] = boundary + interior
    return out if out.size > 1 else float(out[0])
