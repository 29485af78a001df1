"""Nonperturbative pole search through the continued Birman-Schwinger operator.

The wire operator ``R(z)`` acts on functions of the transverse coordinate
``x2`` in [0, pi].  Its kernel is a sum over channels,

    (i/pi) sum_k exp(i tau_k eps |x-y|) / tau_k  sin(kx) sin(ky),

and we represent it by its matrix in the orthonormal sines
``e_j = sqrt(2/pi) sin(j x)``, j = 1..J.  For eps > 0 the channel sum only
decays like ``eps / k**2`` after Galerkin projection, so a plain cut at K
leaves an O(eps/K) error in the pole.  The default assembly therefore keeps
channels 1..K exactly and replaces k > K by the large-k form
``tau_k -> i k``, whose full channel sum has a closed logarithmic kernel
(Kummer subtraction).  What remains is O(eps |z| / K**3).
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
import logging

import numpy as np
from scipy import optimize

from .exceptions import ConvergenceError, NearSingularError, RegionError
from .quadrature import gauss_legendre
from .sine_integrals import sine4
from .spectral import classify_modes, tau

log = logging.getLogger(__name__)

PI = np.pi
DEFAULT_J = 30
DEFAULT_K = 120
TOL_ROOT = 1e-10
MAX_ITER = 60
COND_LIMIT = 1e12


@dataclass
class OperatorMatrix:
    """Dense J x J matrix of a wire operator in the orthonormal sine basis."""

    data: np.ndarray
    z: complex
    eps: float
    alpha: float
    n: int
    K: int
    tail: str = "kummer"

    @property
    def J(self):
        return self.data.shape[0]


@dataclass
class PoleResult:
    z_root: complex
    residual: float
    iterations: int
    J: int
    K: int
    seed: complex
    converged: bool
    eps: float = 0.0
    alpha: float = 0.0
    n: int = 0
    trace: list = field(default_factory=list)

    def as_row(self):
        return {
            "eps": self.eps,
            "Re_z": self.z_root.real,
            "Im_z": self.z_root.imag,
            "residual": self.residual,
            "iters": self.iterations,
            "J": self.J,
            "K": self.K,
        }


def _index_grids(J, K):
    k = np.arange(1, K + 1)[:, None, None]
    j = np.arange(1, J + 1)[None, :, None]
    l = np.arange(1, J + 1)[None, None, :]
    return k, j, l


def channel_sum(z, eps, modes, J, K):
    """Exact channels 1..K of the Galerkin matrix, ``(2/pi)(i/pi) sum_k Q_k / tau_k``."""
    k, j, l = _index_grids(J, K)
    t = tau(z, np.arange(1, K + 1), modes)
    c = (1j * eps * t)[:, None, None]
    block = sine4(0, c, j, k, k, l) / t[:, None, None]
    return (2.0 / PI) * (1j / PI) * block.sum(axis=0)


@lru_cache(maxsize=32)
def _free_channel_sum(eps, J, K):
    """Channels 1..K of the large-k model kernel ``(1/pi) exp(-k eps r)/k``."""
    k, j, l = _index_grids(J, K)
    kk = np.arange(1, K + 1, dtype=float)
    block = sine4(0, (-eps * kk)[:, None, None], j, k, k, l).real / kk[:, None, None]
    out = (2.0 / PI) * (1.0 / PI) * block.sum(axis=0)
    out.setflags(write=False)
    return out


def _log_excess(eps, x, y):
    """Model kernel at tilt eps minus its value at zero tilt (bounded, even in eps).

    The full model sum is ``(1/4pi)[log Phi(s) - log Phi(r)]`` with
    ``Phi(theta) = 1 - 2 exp(-eps r) cos(theta) + exp(-2 eps r)``,
    ``r = |x-y|`` and ``s = x+y``.
    """
    r = np.abs(x - y)
    s = x + y
    em = np.expm1(-eps * r)
    grow = np.exp(eps * r)
    a_s = em / (2.0 * np.sin(0.5 * s))
    a_r = em / (2.0 * np.sin(0.5 * r))
    return (np.log1p(a_s * a_s * grow) - np.log1p(a_r * a_r * grow)) / (4.0 * PI)


def _duffy_nodes(order):
    # triangle (0,0), (pi,0), (pi/2,pi/2) collapsed at the origin
    rule = gauss_legendre(order)
    u = 0.5 * (rule.nodes + 1.0)
    w = 0.5 * rule.weights
    U, T = np.meshgrid(u, u, indexing="ij")
    x = U * (PI - 0.5 * PI * T)
    y = U * 0.5 * PI * T
    jac = np.outer(w, w) * U * PI * PI / 2.0
    return x.ravel(), y.ravel(), jac.ravel()


@lru_cache(maxsize=32)
def log_kernel_matrix(eps, J, order=None):
    """Galerkin matrix of :func:`_log_excess` in the orthonormal sines.

    The kernel is invariant under ``(x, y) -> (y, x)`` and
    ``(x, y) -> (pi-x, pi-y)``, so only the triangle with vertices (0,0),
    (pi,0), (pi/2,pi/2) is integrated, with a Duffy map from the origin.
    """
    if order is None:
        order = max(64, 2 * J + 40)
    x, y, jac = _duffy_nodes(order)
    wd = jac * _log_excess(eps, x, y)
    idx = np.arange(1, J + 1)[:, None]
    sx = np.sin(idx * x[None, :])
    sy = np.sin(idx * y[None, :])
    half = (sx * wd) @ sy.T
    half = half + half.T
    parity = 1.0 + (-1.0) ** (idx + idx.T)
    out = (2.0 / PI) * parity * half
    out.setflags(write=False)
    return out


@lru_cache(maxsize=32)
def _kummer_tail(eps, J, K):
    # channels k > K of the large-k model: full closed form minus its first K terms
    jj = np.arange(1, J + 1)
    full = np.diag(1.0 / (2.0 * jj))
    if eps != 0:
        full = full + log_kernel_matrix(eps, J)
        return full - _free_channel_sum(eps, J, K)
    part = np.diag(np.where(jj <= K, 1.0 / (2.0 * jj), 0.0))
    return full - part


def _checked_sizes(J, K, n, tail):
    if J < 2 * n or K < 2 * n:
        raise ValueError(f"J={J} and K={K} must both be >= 2n={2 * n}")
    if tail == "kummer" and K < J:
        raise ValueError("the tail correction needs K >= J")
    if tail not in ("kummer", "none"):
        raise ValueError(f"unknown tail mode {tail!r}")


def r_matrix(z, eps, alpha, n, J=DEFAULT_J, K=DEFAULT_K, tail="kummer", modes=None):
    """Galerkin matrix of the continued wire operator at energy ``z``.

    ``tail="none"`` gives the plain K-channel truncation; ``"kummer"`` adds
    the closed-form remainder for channels above K.
    """
    if modes is None:
        modes = classify_modes(alpha, n)
    _checked_sizes(J, K, n, tail)
    data = channel_sum(z, eps, modes, J, K)
    if tail == "kummer":
        data = data + _kummer_tail(float(eps), J, K)
    return OperatorMatrix(data, complex(z), float(eps), float(alpha), int(n), K, tail)


def s_rank1(z, alpha, n, J=DEFAULT_J, modes=None):
    """Rank-one extraction of channel ``n``: ``i/(2 tau_n)`` at position (n, n)."""
    if modes is None:
        modes = classify_modes(alpha, n)
    data = np.zeros((J, J), dtype=complex)
    data[n - 1, n - 1] = 1j / (2.0 * tau(z, n, modes))
    return OperatorMatrix(data, complex(z), 0.0, float(alpha), int(n), 0, "none")


def _reduced_matrix(z, eps, alpha, n, J, K, tail, modes):
    R = r_matrix(z, eps, alpha, n, J, K, tail, modes).data
    t_n = tau(z, n, modes)
    T = R.copy()
    T[n - 1, n - 1] -= 1j / (2.0 * t_n)
    return R, T, t_n


def eta(z, eps, alpha, n, J=DEFAULT_J, K=DEFAULT_K, tail="kummer", modes=None):
    """Scalar pole condition ``tau_n - (i alpha/pi) (w_n, (I - alpha T)^-1 w_n)``.

    With ``w_n = sin(n x)`` the inner product equals ``pi/2`` times the
    (n, n) entry of the inverse in the orthonormal basis.
    """
    if modes is None:
        modes = classify_modes(alpha, n)
    _, T, t_n = _reduced_matrix(z, eps, alpha, n, J, K, tail, modes)
    M = np.eye(J) - alpha * T
    cond = np.linalg.cond(M)
    if cond > COND_LIMIT:
        raise NearSingularError(f"I - alpha T nearly singular at z={z} (cond {cond:.3g})", cond)
    rhs = np.zeros(J, dtype=complex)
    rhs[n - 1] = 1.0
    x = np.linalg.solve(M, rhs)
    return t_n - 0.5j * alpha * x[n - 1]


def det_crosscheck(z, eps, alpha, n, J=DEFAULT_J, K=DEFAULT_K, tail="kummer", modes=None):
    """Return ``(det(I - alpha R), smallest singular value of I - alpha R)``."""
    R = r_matrix(z, eps, alpha, n, J, K, tail, modes).data
    M = np.eye(J) - alpha * R
    sv = np.linalg.svd(M, compute_uv=False)
    return complex(np.linalg.det(M)), float(sv[-1])


def factorization_terms(z, eps, alpha, n, J=DEFAULT_J, K=DEFAULT_K, tail="kummer", modes=None):
    """``det(I - alpha R)``, ``det(I - alpha T)`` and ``eta / tau_n``.

    The rank-one determinant lemma gives
    ``det(I - alpha R) = det(I - alpha T) * eta / tau_n``.
    """
    if modes is None:
        modes = classify_modes(alpha, n)
    R, T, t_n = _reduced_matrix(z, eps, alpha, n, J, K, tail, modes)
    eye = np.eye(J)
    e = eta(z, eps, alpha, n, J, K, tail, modes)
    return complex(np.linalg.det(eye - alpha * R)), complex(np.linalg.det(eye - alpha * T)), e / t_n


def _pull_inside(modes, z_old, z_new):
    # halve the step until the iterate is back in the continuation region
    for _ in range(60):
        if modes.in_region(z_new):
            return z_new
        z_new = z_old + 0.5 * (z_new - z_old)
    raise RegionError(f"iteration left the continuation region near {z_old}")


def _muller(f, z0, z1, z2, modes, tol, max_iter, trace):
    w0, w1, w2 = f(z0), f(z1), f(z2)
    for it in range(max_iter):
        h1, h2 = z1 - z0, z2 - z1
        # iterates collapsed onto each other: nothing more to learn
        if h1 == 0 or h2 == 0 or h1 + h2 == 0:
            break
        d1, d2 = (w1 - w0) / h1, (w2 - w1) / h2
        a = (d2 - d1) / (h2 + h1)
        b = a * h2 + d2
        disc = np.sqrt(b * b - 4 * a * w2)
        den = b + disc if abs(b + disc) > abs(b - disc) else b - disc
        if den == 0 or not np.isfinite(den):
            break
        z3 = _pull_inside(modes, z2, z2 - 2 * w2 / den)
        w3 = f(z3)
        trace.append((z3, abs(w3)))
        z0, z1, z2, w0, w1, w2 = z1, z2, z3, w1, w2, w3
        if abs(w3) < tol:
            return z3, w3, it + 1, True
    return z2, w2, max_iter, False


def find_pole(alpha, eps, n, J=DEFAULT_J, K=DEFAULT_K, seed=None, tol_root=TOL_ROOT,
              max_iter=MAX_ITER, tail="kummer"):
    """Solve ``eta(z) = 0`` by a complex secant iteration, Muller as fallback.

    The default seed is the second-order expansion of the pole.
    """
    modes = classify_modes(alpha, n)
    if seed is None:
        from .perturbation import pole_expansion
        seed = pole_expansion(alpha, n, eps)
    seed = complex(seed)
    if not modes.in_region(seed):
        raise RegionError(f"seed {seed} outside the continuation region")

    def f(z):
        return eta(z, eps, alpha, n, J, K, tail, modes)

    trace = []
    step = 1e-4 * max(1.0, abs(seed))
    z0, z1 = seed, _pull_inside(modes, seed, seed + step * (1 - 1j))
    w0, w1 = f(z0), f(z1)
    trace += [(z0, abs(w0)), (z1, abs(w1))]
    z, w, iters, ok = z1, w1, 0, abs(w1) < tol_root
    if abs(w0) < tol_root:
        z, w, ok = z0, w0, True
    while not ok and iters < max_iter:
        iters += 1
        if w1 == w0:
            break
        z2 = _pull_inside(modes, z1, z1 - w1 * (z1 - z0) / (w1 - w0))
        w2 = f(z2)
        trace.append((z2, abs(w2)))
        z0, w0, z1, w1 = z1, w1, z2, w2
        z, w = z2, w2
        ok = abs(w2) < tol_root
        # secant stalled: growing residual after many steps
        if not ok and iters > 15 and abs(w2) > abs(trace[-2][1]):
            break

    if not ok:
        log.info("secant did not converge from %s, switching to Muller", seed)
        zz = [z, z + step, z + 1j * step]
        zz = [_pull_inside(modes, z, q) for q in zz]
        z, w, extra, ok = _muller(f, *zz, modes, tol_root, max_iter - iters, trace)
        iters += extra

    result = PoleResult(complex(z), float(abs(w)), iters, J, K, seed, bool(ok),
                        float(eps), float(alpha), int(n), trace)
    if not ok:
        raise ConvergenceError(
            f"pole search for n={n}, eps={eps} did not converge",
            estimate=result, error=float(abs(w)),
        )
    return result


def sv_minimum(alpha, eps, n, start, J=DEFAULT_J, K=DEFAULT_K, tail="kummer", xatol=1e-12):
    """Locate the minimum of the smallest singular value of ``I - alpha R(z)`` near ``start``."""
    modes = classify_modes(alpha, n)

    def objective(p):
        z = complex(p[0], p[1])
        if not modes.in_region(z):
            return 1e3
        return det_crosscheck(z, eps, alpha, n, J, K, tail, modes)[1]

    start = complex(start)
    res = optimize.minimize(
        objective,
        x0=[start.real + 1e-5, start.imag - 1e-5],
        method="Nelder-Mead",
        options={"xatol": xatol, "fatol": 1e-15, "maxiter": 2000,
                 "initial_simplex": [[start.real + 1e-5, start.imag - 1e-5],
                                     [start.real - 2e-5, start.imag],
                                     [start.real, start.imag + 2e-5]]},
    )
    return complex(res.x[0], res.x[1]), float(res.fun)


@dataclass
class SweepFit:
    alpha: float
    n: int
    table: list
    V_hat: complex
    W_hat: complex
    cubic_residual_slope: float
    residuals: list
    V_n: float
    W_n: complex
    complete: bool = True
    fit_residual: list = field(default_factory=list)
    cubic_coeff: complex = complex("nan")

    @property
    def eps_radius_hint(self):
        """Rough tilt scale ``0.1 |W_n| / |c_3|`` where the expansion stops being useful.

        ``c_3`` is the least-squares ``eps**3`` coefficient of the residual
        against the expansion.  For information only; nothing is gated on it.
        """
        return 0.1 * abs(self.W_n) / (abs(self.cubic_coeff) + 1e-30)

    def summary(self):
        return {
            "alpha": self.alpha,
            "n": self.n,
            "V_hat_re": self.V_hat.real,
            "V_hat_im": self.V_hat.imag,
            "W_hat_re": self.W_hat.real,
            "W_hat_im": self.W_hat.imag,
            "V_n": self.V_n,
            "W_n_re": self.W_n.real,
            "W_n_im": self.W_n.imag,
            "cubic_residual_slope": self.cubic_residual_slope,
            "eps_radius_hint": self.eps_radius_hint,
            "complete": self.complete,
        }


def _pole_task(args):
    alpha, eps, n, J, K, seed, tol_root, tail = args
    try:
        return find_pole(alpha, eps, n, J, K, seed, tol_root, tail=tail)
    except ConvergenceError as err:
        return err.estimate
    except (RegionError, NearSingularError) as err:
        return PoleResult(complex(np.nan, np.nan), np.inf, 0, J, K, seed or 0j,
                          False, eps, alpha, n, [str(err)])


def loglog_slope(x, y):
    """Least-squares slope of ``log y`` against ``log x``."""
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


def sweep_and_fit(alpha, n, eps_list, J=DEFAULT_J, K=DEFAULT_K, tol_root=TOL_ROOT,
                  workers=1, tail="kummer", seed_from_expansion=True):
    """Pole positions over a tilt grid plus the fitted low-order coefficients.

    ``z_root(eps) - E_n`` is fitted by least squares on ``[eps, eps**2]``.
    The residual slope compares the roots with the perturbative coefficients
    ``V_n, W_n`` and is the log-log slope of
    ``|z_root - (E_n + V_n eps + W_n eps**2)|``.
    """
    from .perturbation import pole_expansion, v_coeff, w_coeff

    eps = np.asarray(eps_list, dtype=float)
    if eps.size < 5 or np.any(np.diff(eps) <= 0) or eps[0] <= 0 or eps[-1] > 0.1:
        raise ValueError("eps_list must be increasing, in (0, 0.1], with at least 5 points")
    modes = classify_modes(alpha, n)
    seeds = [pole_expansion(alpha, n, e) if seed_from_expansion else modes.energy for e in eps]
    tasks = [(alpha, float(e), n, J, K, s, tol_root, tail) for e, s in zip(eps, seeds)]
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            table = list(pool.map(_pole_task, tasks))
    else:
        table = [_pole_task(t) for t in tasks]

    complete = all(r.converged for r in table)
    roots = np.array([r.z_root for r in table])
    shift = roots - modes.energy
    design = np.column_stack([eps, eps**2]).astype(complex)
    coef, *_ = np.linalg.lstsq(design, shift, rcond=None)
    fit_res = np.abs(shift - design @ coef)

    v = v_coeff(alpha, n)
    w = w_coeff(alpha, n)
    diff = roots - (modes.energy + v * eps + w * eps**2)
    resid = np.abs(diff)
    slope = loglog_slope(eps, resid) if complete and np.all(resid > 0) else float("nan")
    c3 = complex(np.sum(diff * eps**3) / np.sum(eps**6))
    return SweepFit(float(alpha), int(n), table, complex(coef[0]), complex(coef[1]),
                    slope, resid.tolist(), float(v), complex(w), complete, fit_res.tolist(), c3)
