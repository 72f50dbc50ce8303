import math

import numpy as np

INVPHI = (math.sqrt(5.0) - 1.0) / 2.0

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)


def golden_section(f, a, b, tol=1e-10, max_iter=200):
    """Minimise a unimodal ``f`` on ``[a, b]``; returns ``(x, f(x))``."""
    if b < a:
        a, b = b, a
    c = b - INVPHI * (b - a)
    d = a + INVPHI * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if b - a <= tol:
            break
        # `<=` keeps the left point on ties so the smallest abscissa wins
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INVPHI * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    fx = f(x)
    best = min((fx, x), (fc, c), (fd, d))
    return best[1], best[0]


def gauss_legendre(f, a, b, panels=1):
    """Composite 16-point Gauss-Legendre quadrature of a vectorised ``f``."""
    if b == a:
        return 0.0
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    x = mid[:, None] + half[:, None] * _GL_NODES[None, :]
    return float(np.sum(half[:, None] * _GL_WEIGHTS[None, :] * f(x)))


def bisect_root(f, a, b, tol=1e-10, max_iter=200):
    """Root of ``f`` on a sign-changing bracket ``[a, b]``."""
    fa = f(a)
    if fa == 0.0:
        return a
    for _ in range(max_iter):
        if b - a <= tol:
            break
        m = 0.5 * (a + b)
        fm = f(m)
        if fm == 0.0:
            return m
        if (fm < 0.0) == (fa < 0.0):
            a, fa = m, fm
        else:
            b = m
    return 0.5 * (a + b)
