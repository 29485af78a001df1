"""Gauss-Legendre evaluation of the four-sine double integrals on [0, pi]^2.

The weight ``|x - y|`` has a derivative kink on the diagonal, so the square
is split into the triangles ``y < x`` and ``x < y``.  Each triangle is
pulled back to the unit square by ``(x, y) = (x, x t)`` (Jacobian ``x``),
on which the integrand is smooth and a tensor Gauss rule converges
spectrally.  Nothing here shares code with :mod:`tiltwire.sine_integrals`;
the two routes check each other.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .exceptions import ConvergenceError

DEFAULT_ORDER = 64
MAX_ORDER = 512


@dataclass(frozen=True)
class QuadratureRule:
    order: int
    nodes: np.ndarray
    weights: np.ndarray


@lru_cache(maxsize=64)
def gauss_legendre(order):
    """Gauss-Legendre rule on (-1, 1) with ``order`` nodes."""
    if order < 2:
        raise ValueError("order must be >= 2")
    x, w = np.polynomial.legendre.leggauss(order)
    x.setflags(write=False)
    w.setflags(write=False)
    return QuadratureRule(order, x, w)


@lru_cache(maxsize=64)
def _triangle_nodes(order):
    rule = gauss_legendre(order)
    t = 0.5 * (rule.nodes + 1.0)
    w = 0.5 * rule.weights
    x = np.pi * t[:, None] * np.ones_like(t)[None, :]
    y = x * t[None, :]
    jac = np.pi * w[:, None] * w[None, :] * x
    return x, y, jac


def _triangle_split(weight, a, b, c, d, order):
    # weight is a function of r = |x - y| >= 0
    x, y, jac = _triangle_nodes(order)
    r = x - y
    wr = weight(r)
    lower = np.sin(a * x) * np.sin(b * x) * np.sin(c * y) * np.sin(d * y)
    upper = np.sin(a * y) * np.sin(b * y) * np.sin(c * x) * np.sin(d * x)
    return np.sum(jac * wr * (lower + upper))


def _checked(fn, order, scale_hint=1.0):
    value = fn(order)
    coarse = fn(max(8, (3 * order) // 4))
    diff = abs(value - coarse)
    if diff > 1e-9 * max(1.0, abs(value), scale_hint):
        raise ConvergenceError(
            f"quadrature order {order} not converged (difference {diff:.3g})",
            estimate=value,
            error=diff,
            order=order,
        )
    return value


def q_poly(m, a, b, c, d, order=DEFAULT_ORDER, check=True):
    """Integral of ``|x-y|^m sin(ax) sin(bx) sin(cy) sin(dy)`` over the square."""
    if m not in (0, 1, 2):
        raise ValueError("m must be 0, 1 or 2")
    if order < 8:
        raise ValueError("order must be >= 8")

    def run(o):
        return float(_triangle_split(lambda r: r**m, a, b, c, d, o))

    return _checked(run, order) if check else run(order)


def q_exp(cexp, a, b, c, d, order=DEFAULT_ORDER, check=True):
    """Integral of ``exp(cexp |x-y|) sin(ax) sin(bx) sin(cy) sin(dy)``."""
    cexp = complex(cexp)
    if cexp.real > 0 and abs(cexp) * np.pi > 50:
        raise ValueError(f"exponent {cexp} grows too fast for a fixed rule")

    def run(o):
        return complex(_triangle_split(lambda r: np.exp(cexp * r), a, b, c, d, o))

    return _checked(run, order) if check else run(order)


def direct_tensor(f_x, f_y, order=DEFAULT_ORDER):
    """Product integral ``int f_x * int f_y`` with a plain tensor rule (no split)."""
    rule = gauss_legendre(order)
    x = 0.5 * np.pi * (rule.nodes + 1.0)
    w = 0.5 * np.pi * rule.weights
    return float(np.sum(w * f_x(x)) * np.sum(w * f_y(x)))


@dataclass(frozen=True)
class IntegralSpec:
    """Which integral to converge: ``m`` for ``|x-y|^m``, or ``cexp`` for the exponential."""

    a: int
    b: int
    c: int
    d: int
    m: int = None
    cexp: complex = None

    def __post_init__(self):
        if min(self.a, self.b, self.c, self.d) < 1:
            raise ValueError("frequencies must be >= 1")
        if (self.m is None) == (self.cexp is None):
            raise ValueError("give exactly one of m and cexp")


@dataclass(frozen=True)
class ConvergedValue:
    value: complex
    error: float
    order: int


def q_converged(spec, tol, start_order=DEFAULT_ORDER, max_order=MAX_ORDER):
    """Double the rule order until successive values agree to ``tol``."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    freqs = (spec.a, spec.b, spec.c, spec.d)

    def at(order):
        if spec.m is not None:
            return q_poly(spec.m, *freqs, order=order, check=False)
        return q_exp(spec.cexp, *freqs, order=order, check=False)

    # a rule that cannot resolve the highest frequency may agree with itself by accident
    order = max(start_order, 16, sum(freqs) // 2 + 16)
    prev = at(order)
    while True:
        nxt = 2 * order
        if nxt > max_order:
            raise ConvergenceError(
                f"no convergence to {tol:g} below order {max_order}",
                estimate=prev,
                order=order,
            )
        cur = at(nxt)
        diff = abs(cur - prev)
        if diff < tol:
            return ConvergedValue(cur, diff, nxt)
        order, prev = nxt, cur
