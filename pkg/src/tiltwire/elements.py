"""Matrix elements of the tilt-expansion operators.

Expanding ``exp(i tau_k eps |x-y|)`` in powers of ``eps`` gives wire
operators with kernels

    T_1(x, y) = -(1/pi)       sum_k |x-y|   sin(kx) sin(ky)
    T_2(x, y) = -(i/(2 pi))   sum_k tau_k(z) |x-y|^2 sin(kx) sin(ky)

and their elements between ``w_j = sin(j x)`` reduce to the four-sine
integrals ``M_{k,n}`` (weight ``|x-y|``) and ``N_{k,n}`` (weight
``|x-y|^2``).  Two sets of values are carried for those: the closed forms
as printed in the literature and quadrature oracles.  They disagree, so
the oracle is what everything downstream uses.
"""

from dataclasses import dataclass
import csv
import io
from functools import lru_cache

import numpy as np

from .exceptions import TruncationError
from .quadrature import IntegralSpec, q_converged
from .sine_integrals import sine4_poly
from .spectral import tau

PI = np.pi
K_DEFAULT = 200
J_DEFAULT = 60
ORACLE_TOL = 1e-10
K_CAP = 1 << 16
J_CAP = 480

# crude upper bounds from |sin| <= 1
M_BOUND = PI**3 / 3
N_BOUND = PI**4 / 6


@dataclass(frozen=True)
class ClosedForm:
    value: float
    verified: bool


def m_closed(k, n):
    """Printed closed form of M_{k,n}; the diagonal row comes back unverified."""
    if k < 1 or n < 1:
        raise ValueError("indices must be >= 1")
    if k != n:
        return ClosedForm(-(PI / 4) * (n * n + k * k) / (n * n - k * k) ** 2, True)
    return ClosedForm(-21 * PI / (48 * k * k) + 11 * PI**3 / 6, False)


def n_closed(k, n):
    """Printed closed form of N_{k,n}; the diagonal row comes back unverified."""
    if k < 1 or n < 1:
        raise ValueError("indices must be >= 1")
    if k == n:
        return ClosedForm(PI**4 / 12 - PI**2 / (4 * k * k), False)
    if (k - n) % 2 == 0:
        return ClosedForm(0.0, True)
    return ClosedForm(-8.0 * k * k * n * n / (n * n - k * k) ** 4, True)


@lru_cache(maxsize=4096)
def m_oracle(k, n, tol=ORACLE_TOL):
    """Quadrature value of ``int int |x-y| sin kx sin nx sin ky sin ny``."""
    return q_converged(IntegralSpec(k, n, k, n, m=1), tol).value


@lru_cache(maxsize=4096)
def n_oracle(k, n, tol=ORACLE_TOL):
    """Quadrature value of ``int int |x-y|^2 sin kx sin nx sin ky sin ny``."""
    return q_converged(IntegralSpec(k, n, k, n, m=2), tol).value


@dataclass
class ElementRow:
    kind: str
    k: int
    n: int
    closed: float
    oracle: float
    verified: bool

    @property
    def abs_diff(self):
        return abs(self.closed - self.oracle)

    @property
    def bound(self):
        return M_BOUND if self.kind == "M" else N_BOUND

    def note(self, tol):
        notes = []
        if not self.verified:
            notes.append("unverified")
        if abs(self.closed) > self.bound:
            notes.append("closed form exceeds magnitude bound")
        if self.abs_diff >= tol:
            notes.append("mismatch")
        return "; ".join(notes)


@dataclass
class ElementTable:
    kind: str
    rows: list

    def discrepancies(self, tol=1e-6):
        """Rows whose printed value disagrees with the oracle or breaks the bound."""
        return [r for r in self.rows if r.note(tol) and ("mismatch" in r.note(tol)
                                                        or "bound" in r.note(tol))]

    def to_csv(self, tol=1e-6, only_discrepancies=False):
        rows = self.discrepancies(tol) if only_discrepancies else self.rows
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["kind", "k", "n", "closed", "oracle", "abs_diff", "note"])
        for r in rows:
            writer.writerow([r.kind, r.k, r.n, repr(float(r.closed)), repr(float(r.oracle)),
                             repr(float(r.abs_diff)), r.note(tol)])
        return buf.getvalue()


def element_table(kind, kmax, tol=ORACLE_TOL):
    """All pairs ``1 <= k, n <= kmax`` with printed and oracle values."""
    if kind not in ("M", "N"):
        raise ValueError("kind must be 'M' or 'N'")
    closed_fn, oracle_fn = (m_closed, m_oracle) if kind == "M" else (n_closed, n_oracle)
    rows = []
    for k in range(1, kmax + 1):
        for n in range(1, kmax + 1):
            cf = closed_fn(k, n)
            rows.append(ElementRow(kind, k, n, cf.value, float(oracle_fn(k, n, tol)), cf.verified))
    return ElementTable(kind, rows)


def _t1_partial(j, n, K):
    # j may be an array; the result has its shape
    j = np.asarray(j)
    k = np.arange(1, K + 1)
    vals = sine4_poly(1, j[..., None], k, k, n)
    return -np.sum(vals, axis=-1) / PI


def _t1_richardson(j, n, K, tol):
    prev = None
    while 4 * K <= K_CAP:
        s1, s2, s4 = (_t1_partial(j, n, m * K) for m in (1, 2, 4))
        # eliminate c/K and d/K^2
        est = (4 * (2 * s4 - s2) - (2 * s2 - s1)) / 3
        if prev is not None and np.max(np.abs(est - prev)) < tol:
            return est
        prev = est
        K *= 2
    raise TruncationError(f"T_1 elements for n={n} not stable below {K_CAP} channels",
                          estimate=prev)


def t1_column(j, n, K=K_DEFAULT, tol=1e-10):
    """Converged ``(w_j, T_1 w_n)`` for an array of ``j`` at once.

    Entries whose plain channel sum no longer moves between K and 2K are
    taken as they are.  The rest (in practice the diagonal, which settles
    only like ``1/K``) go through Richardson extrapolation over partial sums
    at K, 2K and 4K, with K doubled until the estimate is stable to ``tol``.
    """
    j = np.atleast_1d(np.asarray(j))
    K = max(K, int(np.max(j)) + 10, n + 10)
    s1, s2 = _t1_partial(j, n, K), _t1_partial(j, n, 2 * K)
    out = s2.copy()
    slow = np.abs(s2 - s1) >= tol
    if np.any(slow):
        out[slow] = _t1_richardson(j[slow], n, K, tol)
    return out


def t1_element(j, n, K=K_DEFAULT, extrapolate=True, tol=1e-10):
    """Element ``(w_j, T_1 w_n)``.

    With ``extrapolate=False`` this is the plain channel sum up to ``K``,
    which for ``j == n`` still carries a tail of about ``1/(2K)``.  The
    default returns the extrapolated limit (see :func:`t1_column`).

    Raises
    ------
    TruncationError
        If the extrapolation is not stable below ``K_CAP`` channels.
    """
    if K < max(j, n) + 10:
        raise ValueError("K must exceed max(j, n) + 10")
    if not extrapolate:
        return float(_t1_partial(j, n, K))
    return float(t1_column(j, n, K, tol)[0])


def t2_element(j, n, z, modes, K=K_DEFAULT, tol=1e-12):
    """Element ``(w_j, T_2(z) w_n)`` with channel sheets taken from ``modes``.

    The summand decays like ``k**-5`` on the diagonal; K is doubled until the
    last doubling changes the sum by less than ``tol``.
    """
    if K < max(j, n) + 10:
        raise ValueError("K must exceed max(j, n) + 10")

    def partial(kk):
        k = np.arange(1, kk + 1)
        return -(1j / (2 * PI)) * np.sum(tau(z, k, modes) * sine4_poly(2, j, k, k, n))

    prev = partial(K)
    while 2 * K <= K_CAP:
        K *= 2
        cur = partial(K)
        if abs(cur - prev) < tol:
            return complex(cur)
        prev = cur
    raise TruncationError(f"T_2 element ({j},{n}) not settled below {K_CAP} channels",
                          estimate=prev)


def t2_terms(n, z, modes, K=K_DEFAULT):
    """Per-channel pieces ``-(i/2pi) tau_k N_{k,n}`` of the diagonal T_2 element."""
    k = np.arange(1, K + 1)
    return k, -(1j / (2 * PI)) * tau(z, k, modes) * sine4_poly(2, n, k, k, n)


def t1_squared_element(n, J=J_DEFAULT, K=K_DEFAULT, tol=1e-8):
    """``(w_n, T_1^2 w_n)`` through completeness of the orthonormal sines.

    Summed over j = 1..J with J doubled until the change is below ``tol``
    relative to the value, or absolute once the value itself is below ``tol``.
    """
    if J < 2 * n + 10:
        raise ValueError("J must be >= 2n + 10")

    def total(jj):
        col = t1_column(np.arange(1, jj + 1), n, K)
        return float((2 / PI) * np.sum(col * col))

    prev = total(J)
    while 2 * J <= J_CAP:
        J *= 2
        cur = total(J)
        if abs(cur - prev) < tol * max(abs(cur), 1.0):
            return float(cur)
        prev = cur
    raise TruncationError(f"T_1^2 element for n={n} not settled below J={J_CAP}",
                          estimate=prev)
