"""Rational step-function filters from Zolotarev's sign approximation.

The filter ``r_tau`` is close to 1 on ``[tau - eta, tau - delta]`` and close to
0 on ``[tau + delta, tau + eta]``. Only its poles feed the compression; the
evaluator exists so the approximation quality can be checked.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

MAX_DEGREE = 200
GRID_POINTS = 10_000
_EPS = np.finfo(np.float64).eps


class FilterDegreeError(ValueError):
    """The gap is too narrow for a filter within the degree cap."""


def required_degree(tol_ra: float, delta: float, eta: float) -> int:
    """Degree bound ``ceil(2/pi^2 * ln(4/tol_ra) * ln(4 eta/delta))``."""
    if not 0.0 < tol_ra < 1.0:
        raise ValueError("tol_ra must lie in (0, 1)")
    if not delta > 0.0:
        raise ValueError("delta must be positive")
    if not eta > 0.0:
        raise ValueError("eta must be positive")
    val = 2.0 / math.pi**2 * math.log(4.0 / tol_ra) * math.log(4.0 * eta / delta)
    # guard against 18.999999999 style rounding just above an integer
    return int(math.ceil(val - 1e-12 * max(1.0, val)))


def _complement(k: float, kc: float | None) -> float:
    if kc is None:
        kc = math.sqrt((1.0 - k) * (1.0 + k))
    return kc


def ellipk(k: float, kc: float | None = None) -> float:
    """Complete elliptic integral of the first kind ``K(k)`` via the AGM.

    Parameters
    ----------
    k : float
        Modulus in ``[0, 1)``.
    kc : float, optional
        Complementary modulus ``sqrt(1 - k^2)``. Pass it when ``k`` is close
        to 1 so it is not lost to cancellation.
    """
    if not 0.0 <= k < 1.0:
        raise ValueError("modulus must lie in [0, 1)")
    a, b = 1.0, _complement(k, kc)
    if b <= 0.0:
        raise ValueError("complementary modulus must be positive")
    for _ in range(64):
        if abs(a - b) <= 4.0 * _EPS * a:
            break
        a, b = 0.5 * (a + b), math.sqrt(a * b)
    return math.pi / (a + b)


def jacobi_sn_cn_dn(u: float, k: float, kc: float | None = None):
    """Jacobi elliptic functions ``(sn, cn, dn)`` by descending Landen steps.

    ``kc`` plays the same role as in :func:`ellipk`.
    """
    if not 0.0 <= k < 1.0:
        raise ValueError("modulus must lie in [0, 1)")
    if k == 0.0:
        return math.sin(u), math.cos(u), 1.0
    b = _complement(k, kc)
    a_list = [1.0]
    c_list = [k]
    a = 1.0
    while abs(c_list[-1] / a_list[-1]) > _EPS and len(a_list) < 64:
        c = 0.5 * (a - b)
        a, b = 0.5 * (a + b), math.sqrt(a * b)
        a_list.append(a)
        c_list.append(c)
    i = len(a_list) - 1
    phi = (2.0**i) * a_list[i] * u
    prev = phi
    while i > 0:
        t = c_list[i] * math.sin(phi) / a_list[i]
        prev = phi
        phi = 0.5 * (math.asin(t) + phi)
        i -= 1
    sn = math.sin(phi)
    cn = math.cos(phi)
    dn = cn / math.cos(phi - prev) if len(a_list) > 1 else 1.0
    return sn, cn, dn


def _sign_coefficients(ell: float, p: int) -> np.ndarray:
    """``c_i = ell^2 sc^2(i K'/(2p+1); k')`` for ``i = 1..2p``, ``k' = sqrt(1-ell^2)``."""
    kp = math.sqrt((1.0 - ell) * (1.0 + ell))
    Kp = ellipk(kp, kc=ell)
    c = np.empty(2 * p)
    for i in range(1, 2 * p + 1):
        u = i * Kp / (2 * p + 1)
        if 2 * i <= 2 * p + 1:
            sn, cn, _ = jacobi_sn_cn_dn(u, kp, kc=ell)
            c[i - 1] = (ell * sn / cn) ** 2
        else:
            # sc(K' - v) = 1 / (ell sc(v)) keeps full relative accuracy where cn -> 0
            sn, cn, _ = jacobi_sn_cn_dn(Kp - u, kp, kc=ell)
            c[i - 1] = (cn / sn) ** 2
    return c


def _zhat(x, c):
    x = np.asarray(x, dtype=np.float64)
    x2 = x * x
    out = x.copy()
    for j in range(c.shape[0] // 2):
        out = out * (x2 + c[2 * j + 1]) / (x2 + c[2 * j])
    return out


def _validation_grid(ell: float) -> np.ndarray:
    half = np.geomspace(ell, 1.0, GRID_POINTS // 2)
    return half


@dataclass(frozen=True)
class ZolotarevFilter:
    """Step filter ``r(t) = (1 - S((t - tau)/eta)) / 2`` and its poles.

    ``S`` is the scaled Zolotarev sign approximant of type ``(2p+1, 2p)`` on
    ``[-1, -delta/eta] U [delta/eta, 1]``.
    """

    tau: float
    delta: float
    eta: float
    tol_ra: float
    degree_d: int
    p: int
    coeffs: np.ndarray = field(repr=False)
    scale: float = field(repr=False)
    achieved_error: float = 0.0
    infinite_pole_count: int = 2

    @property
    def degree(self) -> int:
        """Denominator degree ``2p`` actually used."""
        return 2 * self.p

    @property
    def finite_poles(self) -> np.ndarray:
        """Upper-half-plane representatives ``tau + i eta sqrt(c_{2j-1})``, one per pair."""
        return self.tau + 1j * self.eta * np.sqrt(self.coeffs[0::2])

    def poles(self) -> list:
        """Full pole list: conjugate pairs in order, then two infinite poles."""
        out: list = []
        for z in self.finite_poles:
            out.extend([complex(z), complex(z).conjugate()])
        out.extend([math.inf] * self.infinite_pole_count)
        return out

    @property
    def pole_count(self) -> int:
        return 2 * self.p + self.infinite_pole_count

    def sign(self, x):
        return self.scale * _zhat(x, self.coeffs)

    def __call__(self, t):
        return evaluate_filter(self, t)


def evaluate_filter(filt: ZolotarevFilter, t):
    """Evaluate ``r_tau`` at real ``t`` (scalar or array) in factored form."""
    x = (np.asarray(t, dtype=np.float64) - filt.tau) / filt.eta
    r = 0.5 * (1.0 - filt.sign(x))
    return float(r) if np.ndim(r) == 0 else r


def _build_sign(ell: float, p: int):
    c = _sign_coefficients(ell, p)
    xs = _validation_grid(ell)
    z = _zhat(xs, c)
    scale = 2.0 / (float(z.min()) + float(z.max()))
    err = 0.5 * float(np.abs(1.0 - scale * z).max())
    return c, scale, err


def build_filter(tau: float, delta: float, eta: float, tol_ra: float) -> ZolotarevFilter:
    """Smallest filter (from the degree bound upward) meeting ``tol_ra`` on the grid.

    Raises
    ------
    FilterDegreeError
        If the denominator degree would exceed ``MAX_DEGREE``.
    """
    d = required_degree(tol_ra, delta, eta)
    ell = delta / eta
    p = max(1, (d + 1) // 2)
    while 2 * p <= MAX_DEGREE:
        c, scale, err = _build_sign(ell, p)
        if err < tol_ra:
            return ZolotarevFilter(tau, delta, eta, tol_ra, d, p, c, scale, err)
        p += 1
    raise FilterDegreeError(f"gap delta/eta={ell:.3e} needs degree above {MAX_DEGREE}")


def minimal_half_degree(delta: float, eta: float, tol_ra: float, p_max: int = MAX_DEGREE // 2) -> int:
    """Smallest ``p`` whose sign approximant passes grid validation (diagnostic)."""
    ell = delta / eta
    for p in range(1, p_max + 1):
        if _build_sign(ell, p)[2] < tol_ra:
            return p
    raise FilterDegreeError("no admissible degree below the cap")
