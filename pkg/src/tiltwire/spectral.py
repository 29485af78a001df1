"""Mode bookkeeping for the straight Dirichlet strip of width pi.

Transverse channels are ``sin(k x2)`` with thresholds ``k**2``.  At zero tilt
each channel carries one bound state of the one-dimensional point
interaction, ``E_k = k**2 - alpha**2 / 4``; those above the continuum edge 1
are embedded.  For a chosen embedded level ``E_n`` the channels split into
open ones (``k**2 < E_n``) and closed ones, and this split fixes the sheet
on which each channel square root ``tau_k`` is continued into the lower
half plane.
"""

from dataclasses import dataclass
import math

import numpy as np

from .exceptions import AdmissibilityError, RegionError

ESS_THRESHOLD = 1.0
TOL_ADM = 1e-9
# distance kept from the thresholds bounding the window
WINDOW_MARGIN = 1e-6


@dataclass(frozen=True)
class WaveguideParams:
    """Coupling ``alpha`` (attractive if positive) and tilt ``epsilon``."""

    alpha: float
    epsilon: float = 0.0

    def __post_init__(self):
        if self.alpha == 0:
            raise ValueError("alpha must be nonzero")
        if self.epsilon < 0:
            raise ValueError("epsilon must be >= 0")


@dataclass(frozen=True)
class ModeClassification:
    """Channel split around the embedded level ``E_n``.

    ``open_channels`` is the set A_n of channels with ``k**2 < E_n``;
    ``odd_open`` keeps those with ``n - k`` odd, the only ones that feed the
    width at second order.  ``window`` is the real interval between the
    thresholds enclosing ``E_n``.
    """

    alpha: float
    n: int
    energy: float
    open_channels: tuple
    odd_open: tuple
    k1: int
    window: tuple

    @property
    def repulsive(self):
        return self.alpha < 0

    @property
    def closed_from(self):
        """First closed channel; every k >= this is closed."""
        return self.k1 + 1

    def lower_region(self):
        """Rectangle ``(re_lo, re_hi, im_lo)`` used as the lower-half continuation."""
        lo, hi = self.window
        h = min(1.0, hi - lo) / 2
        return lo + WINDOW_MARGIN, hi - WINDOW_MARGIN, -h

    def in_region(self, z):
        z = complex(z)
        if z.imag > 0:
            return True
        re_lo, re_hi, im_lo = self.lower_region()
        if z.imag == 0:
            return self.window[0] < z.real < self.window[1]
        return re_lo < z.real < re_hi and z.imag > im_lo


def embedded_eigenvalue(alpha, k):
    """Bound-state energy of channel ``k`` at zero tilt, ``k**2 - alpha**2/4``."""
    if alpha <= 0:
        raise ValueError("the zero-tilt bound state requires alpha > 0")
    return k * k - alpha * alpha / 4.0


@dataclass(frozen=True)
class SpectrumSummary:
    discrete: list
    embedded: list
    ess_threshold: float = ESS_THRESHOLD


def spectrum_summary(alpha, k_max):
    """Split the zero-tilt eigenvalues ``E_1..E_kmax`` into discrete and embedded."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    levels = [embedded_eigenvalue(alpha, k) for k in range(1, k_max + 1)]
    discrete = [e for e in levels if e < ESS_THRESHOLD]
    embedded = [e for e in levels if e >= ESS_THRESHOLD]
    return SpectrumSummary(discrete, embedded)


def discrete_count(alpha):
    """Number of k with ``k**2 < 1 + alpha**2/4`` (all discrete levels)."""
    bound = 1.0 + alpha * alpha / 4.0
    k = 0
    while (k + 1) ** 2 < bound:
        k += 1
    return k


def check_admissible(alpha, n, tol=TOL_ADM):
    """Return ``(ok, message)`` for the pair ``(alpha, n)``.

    The level must be embedded, and it may not sit on a channel threshold,
    i.e. ``alpha != 2*sqrt(n**2 - k**2)`` for ``1 <= k <= n``.
    """
    if alpha == 0:
        return False, "alpha must be nonzero"
    if n < 1 or int(n) != n:
        return False, f"n={n} is not a positive integer"
    energy = n * n - alpha * alpha / 4.0
    for k in range(1, n):
        if abs(abs(alpha) - 2.0 * math.sqrt(n * n - k * k)) <= tol:
            return False, f"collision at k={k}"
    if energy <= ESS_THRESHOLD:
        return False, (
            f"E_{n}={energy:.12g} below essential-spectrum threshold {ESS_THRESHOLD:g}"
        )
    return True, "ok"


def classify_modes(alpha, n):
    """Build the :class:`ModeClassification` for level ``n``.

    Raises
    ------
    AdmissibilityError
        If ``E_n <= 1`` or the level collides with a threshold.
    """
    ok, msg = check_admissible(alpha, n)
    if not ok:
        if msg.startswith("collision"):
            raise AdmissibilityError(f"threshold collision: {msg}")
        raise AdmissibilityError(f"not an embedded eigenvalue: {msg}")
    energy = n * n - alpha * alpha / 4.0
    open_channels = tuple(k for k in range(1, n + 1) if k * k < energy)
    odd_open = tuple(k for k in open_channels if (n - k) % 2 == 1)
    k1 = max(open_channels)
    return ModeClassification(
        alpha=float(alpha),
        n=int(n),
        energy=energy,
        open_channels=open_channels,
        odd_open=odd_open,
        k1=k1,
        window=(float(k1 * k1), float((k1 + 1) ** 2)),
    )


def tau(z, k, modes, check=True):
    """Continued channel square root ``tau_k(z)``; ``k`` may be an array.

    Open channels use the principal root of ``z - k**2``: positive on the
    window and continued through it into the lower half plane.  Closed
    channels use ``1j*sqrt(k**2 - z)``, the physical branch.  For repulsive
    coupling channel ``n`` itself sits on its unphysical sheet,
    ``-1j*sqrt(n**2 - z)``, which is where the zero-tilt pole lives.
    """
    z = complex(z)
    if check and not modes.in_region(z):
        raise RegionError(f"z={z} outside the continuation region around E_{modes.n}")
    k = np.asarray(k)
    kk = (k * k).astype(float)
    is_open = k <= modes.k1
    val = np.where(is_open, np.sqrt(z - kk + 0j), 1j * np.sqrt(kk - z + 0j))
    if modes.repulsive:
        val = np.where(k == modes.n, -val, val)
    if val.ndim == 0:
        return complex(val)
    return val
