"""Second-order expansion of the pole in the tilt.

For small tilt the pole near ``E_n`` is

    z_n(eps) = E_n + V_n eps + W_n eps**2 + ...

    V_n = -(alpha^3/pi) (w_n, T_1 w_n)
    W_n = -(alpha^4/pi^2) (w_n, T_1 w_n)^2 - (alpha^3/pi) (w_n, T_2(E_n) w_n)
          - (alpha^4/pi) (w_n, T_1^2 w_n)

Only channels that are open at ``E_n`` and of opposite parity to ``n`` give
``W_n`` an imaginary part, and the width is ``2 |Im W_n| eps**2``.
"""

from dataclasses import dataclass, asdict
from functools import lru_cache
import warnings

import numpy as np

from .elements import J_DEFAULT, K_DEFAULT, t1_element, t1_squared_element, t2_element
from .spectral import classify_modes, tau

PI = np.pi


@dataclass(frozen=True)
class PerturbativeCoefficients:
    alpha: float
    n: int
    E_n: float
    V_n: float
    W_n: complex
    S_n: float

    @property
    def gamma_rate(self):
        return 2.0 * abs(self.W_n.imag)

    def width_candidates(self):
        """Three constants for ``Im z`` per eps^2 that appear in the literature chain.

        ``chain`` is ``Im W_n`` itself.  ``printed_display`` is the stand-alone
        formula ``-4 alpha^2 S_n / pi^3``; ``printed_elements`` runs the W_n chain
        with the printed (not the quadrature) values of N_{k,n}.
        """
        a = self.alpha
        return {
            "chain": self.W_n.imag,
            "printed_display": -4 * a * a * self.S_n / PI**3,
            "printed_elements": -4 * a**3 * self.S_n / PI**2,
        }

    def as_record(self):
        return {
            "alpha": self.alpha,
            "n": self.n,
            "E_n": self.E_n,
            "V_n": self.V_n,
            "Re_W_n": self.W_n.real,
            "Im_W_n": self.W_n.imag,
            "S_n": self.S_n,
            "gamma_rate": self.gamma_rate,
        }


@lru_cache(maxsize=128)
def v_coeff(alpha, n, K=K_DEFAULT):
    """First-order shift ``V_n``; real by construction."""
    classify_modes(alpha, n)
    return -(alpha**3 / PI) * t1_element(n, n, K)


@lru_cache(maxsize=128)
def w_terms(alpha, n, J=J_DEFAULT, K=K_DEFAULT):
    """The three pieces of ``W_n`` as ``(t1_squared_of_diag, t2, t1_squared)``."""
    modes = classify_modes(alpha, n)
    t1 = t1_element(n, n, K)
    first = -(alpha**4 / PI**2) * t1 * t1
    second = -(alpha**3 / PI) * t2_element(n, n, modes.energy, modes, K)
    third = -(alpha**4 / PI) * t1_squared_element(n, J, K)
    return first, complex(second), third


def w_coeff(alpha, n, J=J_DEFAULT, K=K_DEFAULT):
    """Second-order coefficient ``W_n``."""
    return complex(sum(w_terms(alpha, n, J, K)))


def s_sum(alpha, n):
    """``sum over odd open channels of tau_k(E_n) k^2 n^2 / (n^2 - k^2)^4``."""
    modes = classify_modes(alpha, n)
    total = 0.0
    for k in modes.odd_open:
        t = tau(modes.energy, k, modes)
        total += t.real * k * k * n * n / (n * n - k * k) ** 4
    return total


def coefficients(alpha, n, J=J_DEFAULT, K=K_DEFAULT):
    modes = classify_modes(alpha, n)
    return PerturbativeCoefficients(
        alpha=float(alpha),
        n=int(n),
        E_n=modes.energy,
        V_n=float(v_coeff(alpha, n, K)),
        W_n=w_coeff(alpha, n, J, K),
        S_n=float(s_sum(alpha, n)),
    )


def pole_expansion(alpha, n, eps):
    """``E_n + V_n eps + W_n eps^2``."""
    if eps < 0:
        raise ValueError("eps must be >= 0")
    if eps > 0.1:
        warnings.warn(f"eps={eps} is outside the small-tilt regime", stacklevel=2)
    modes = classify_modes(alpha, n)
    if eps == 0:
        return complex(modes.energy)
    return modes.energy + v_coeff(alpha, n) * eps + w_coeff(alpha, n) * eps * eps


def repulsive_pole(alpha, n, eps):
    """Second-sheet pole for a repulsive wire.

    At zero tilt the pole sits at ``n^2 - alpha^2/4`` on the unphysical sheet
    of channel ``n``; tilting pushes it into the upper half plane.
    """
    if alpha >= 0:
        raise ValueError("repulsive_pole needs alpha < 0")
    return pole_expansion(alpha, n, eps)


def as_dict(coeffs):
    d = asdict(coeffs)
    d["W_n"] = [coeffs.W_n.real, coeffs.W_n.imag]
    return d
