"""Closed-form double integrals of four sines against |x - y| weights.

Every integral here has the form

    I = int_0^pi int_0^pi |x-y|^m exp(c |x-y|) sin(a x) sin(b x) sin(p y) sin(q y) dx dy

with integer frequencies and complex ``c``.  Products of sines are reduced to
cosines, each triangle ``x > y`` / ``x < y`` is integrated in the variable
``r = |x - y|`` exactly, and what remains are the one-dimensional moments

    F_m(w) = int_0^pi r^m exp(w r) dr.

All functions broadcast over their integer arguments, which is what makes
it cheap to assemble whole Galerkin matrices for hundreds of channels.
The Gauss-Legendre code in :mod:`tiltwire.quadrature` is the independent
check on everything in this module.
"""

import numpy as np

PI = np.pi

# |w| * pi below this uses the power series for F_m
_SERIES_RADIUS = 4.0
_SERIES_TERMS = 48


def moment(m, w):
    """Return ``F_m(w) = int_0^pi r^m exp(w r) dr`` for complex ``w``."""
    w = np.asarray(w, dtype=complex)
    out = np.empty(w.shape, dtype=complex)
    wp = w * PI
    small = np.abs(wp) <= _SERIES_RADIUS

    if np.any(small):
        ws = wp[small]
        acc = np.zeros(ws.shape, dtype=complex)
        term = np.ones(ws.shape, dtype=complex)
        for j in range(_SERIES_TERMS):
            acc += term / (m + j + 1)
            term = term * ws / (j + 1)
        out[small] = acc * PI ** (m + 1)

    big = ~small
    if np.any(big):
        wb = w[big]
        e = np.exp(wb * PI)
        f = (e - 1.0) / wb
        for i in range(1, m + 1):
            f = (PI**i * e - i * f) / wb
        out[big] = f
    return out


def _half(m, c, u, v):
    """Integral over the triangle x > y of r^m e^{c r} cos(u x) cos(v y)."""
    total = 0.0
    for s1 in (1, -1):
        for s2 in (1, -1):
            omega = s1 * u + s2 * v
            w1 = c - 1j * s2 * v
            f1 = moment(m, w1)
            flat = omega == 0
            safe = np.where(flat, 1, omega)
            sign = np.where(omega % 2 == 0, 1.0, -1.0)
            edge = PI * f1 - moment(m + 1, w1)
            bulk = (sign * f1 - moment(m, c + 1j * s1 * u)) / (1j * safe)
            total = total + np.where(flat, edge, bulk)
    return 0.25 * total


def cosine_pair(m, c, u, v):
    """Square integral of |x-y|^m e^{c|x-y|} cos(u x) cos(v y)."""
    return _half(m, c, u, v) + _half(m, c, v, u)


def sine4(m, c, a, b, p, q):
    """Square integral of |x-y|^m e^{c|x-y|} sin(ax) sin(bx) sin(py) sin(qy).

    Parameters
    ----------
    m : int
        Power of ``|x - y|`` (0 for the pure exponential kernel).
    c : complex or array
        Exponent coefficient; ``c = 0`` gives the polynomial moments.
    a, b, p, q : int or integer arrays
        Sine frequencies, broadcast against each other and against ``c``.

    Returns
    -------
    ndarray of complex
    """
    a, b, p, q = (np.asarray(t, dtype=np.int64) for t in (a, b, p, q))
    c = np.asarray(c, dtype=complex)
    u1, u2 = np.abs(a - b), a + b
    v1, v2 = np.abs(p - q), p + q
    return 0.25 * (
        cosine_pair(m, c, u1, v1)
        - cosine_pair(m, c, u1, v2)
        - cosine_pair(m, c, u2, v1)
        + cosine_pair(m, c, u2, v2)
    )


def sine4_poly(m, a, b, p, q):
    """Real polynomial moment: ``sine4`` at ``c = 0``."""
    return np.real(sine4(m, 0.0, a, b, p, q))


def n_closed_true(k, n):
    """Exact value of int int |x-y|^2 sin kx sin nx sin ky sin ny.

    Derived by expanding ``|x-y|^2 = x^2 - 2xy + y^2``; only the cross term
    survives off the diagonal.  Used as a third route in tests.
    """
    if k == n:
        return PI**4 / 24 - PI**2 / (4 * n * n)
    if (k - n) % 2 == 0:
        return 0.0
    return -32.0 * k * k * n * n / (n * n - k * k) ** 4


def m_closed_true(k, n):
    """Exact off-diagonal value of int int |x-y| sin kx sin nx sin ky sin ny."""
    if k == n:
        raise ValueError("diagonal has no simple closed form here")
    return -0.5 * PI * (n * n + k * k) / (n * n - k * k) ** 2

