"""Equilibrium quantities: sticky parameter, free energies, totals, yields."""

from dataclasses import dataclass, field
import math

import numpy as np
from scipy.optimize import bisect, minimize_scalar

HARD_SPHERE_C = 2.0 / math.pi


class ShapeError(ValueError):
    """The potential has no interior minimum with positive curvature."""


class RangeError(ValueError):
    """No root of the critical-temperature equation inside the bracket."""


@dataclass(frozen=True)
class PotentialSpec:
    """Morse well of depth ``E`` and range ``rho`` with a parabolic core of
    stiffness ``m**2 U''(1)``, cut off at ``rc``."""
    E: float = 8.5
    rho: float = 30.0
    m: float = 2.0
    rc: float = None
    kind: str = "morse-with-core"

    def __post_init__(self):
        if self.rc is None:
            object.__setattr__(self, "rc", 1.0 + 4.0 / self.rho)
        if self.E <= 0 or self.rho <= 0 or self.rc <= 1:
            raise ValueError("need E > 0, rho > 0 and rc > 1")

    def morse(self, r):
        e = np.exp(-self.rho * (np.asarray(r, float) - 1.0))
        return self.E * e * (e - 2.0)

    def morse_slope(self, r):
        e = np.exp(-self.rho * (np.asarray(r, float) - 1.0))
        return 2.0 * self.E * self.rho * e * (1.0 - e)

    @property
    def curvature(self):
        """``U''(1)`` of the untruncated Morse well."""
        return 2.0 * self.E * self.rho ** 2

    @property
    def shift(self):
        """Value of the linear truncation term at ``r = 1``."""
        return float(self.morse(self.rc) + self.morse_slope(self.rc) * (1.0 - self.rc))

    @property
    def minimum(self):
        return -self.E - self.shift


@dataclass(frozen=True)
class StickyParameter:
    kappa: float
    provenance: str = "assigned"

    def __post_init__(self):
        if not self.kappa > 0:
            raise ValueError("kappa must be positive")

    def __float__(self):
        return float(self.kappa)


def kappa_closed_form(spec):
    """Sticky parameter of the truncated Morse potential with parabolic core.

    The Gaussian widths on the two sides of the minimum are in the ratio
    ``m : 1``, which gives the ``(m+1)/m`` prefactor.
    """
    if spec.kind != "morse-with-core":
        raise ValueError("closed form needs a morse-with-core potential")
    depth = -spec.minimum
    k = ((spec.m + 1) / spec.m) * math.exp(depth) / math.sqrt(spec.curvature) \
        * math.sqrt(math.pi / 2)
    return StickyParameter(k, "closed-form")


def kappa_as_printed(spec):
    """The same expression with the truncation term entering with the
    opposite sign; kept only to document the discrepancy."""
    depth = spec.E - spec.shift
    return ((spec.m + 1) / spec.m) * math.exp(depth) / math.sqrt(spec.curvature) \
        * math.sqrt(math.pi / 2)


def _second_difference(U, r, h=1e-4):
    return (-U(r + 2 * h) + 16 * U(r + h) - 30 * U(r) + 16 * U(r - h) - U(r - 2 * h)) \
        / (12 * h * h)


def kappa_laplace(U, T=1.0, bracket=(0.5, 2.0), c=HARD_SPHERE_C, d=1.0):
    """Laplace-limit sticky parameter ``exp(-U0/T) / sqrt(c U''(r0)/T) / d``.

    ``U`` is a callable pair potential in units of ``k_B`` or a tuple
    ``(r, U)`` of tabulated values, which is interpolated with a cubic spline.
    """
    if isinstance(U, tuple):
        from scipy.interpolate import CubicSpline
        r_tab, u_tab = (np.asarray(a, float) for a in U)
        U = CubicSpline(r_tab, u_tab)
        bracket = (max(bracket[0], r_tab[0]), min(bracket[1], r_tab[-1]))
    res = minimize_scalar(lambda r: float(U(r)), bounds=bracket, method="bounded",
                          options={"xatol": 1e-10})
    r0 = res.x
    lo, hi = bracket
    if not (lo + 1e-6 < r0 < hi - 1e-6):
        raise ShapeError("minimum lies on the bracket boundary")
    U0 = float(U(r0))
    curv = float(_second_difference(lambda r: float(U(r)), r0))
    if U0 >= 0 or curv <= 0:
        raise ShapeError("potential has no attractive well with positive curvature")
    return StickyParameter(math.exp(-U0 / T) / math.sqrt(c * curv / T) / d, "laplace")


def kappa_from_constants(T, depth=4.0, stiffness=15.0):
    """``exp(depth/T) / sqrt(stiffness/T)``, the Laplace form when the well
    depth and ``c U''`` are given directly in units of ``k_B``."""
    T = np.asarray(T, float)
    return np.exp(depth / T) / np.sqrt(stiffness / T)


def free_energy(m, multiplicity, zeta, kappa):
    """``F/k_BT = -m ln(kappa) - ln(n zeta)``, constants dropped."""
    return -m * math.log(kappa) - math.log(multiplicity * zeta)


@dataclass
class ModeRow:
    id: int
    dim: int
    m: int
    multiplicity: int
    zeta: float
    h_mean: float = float("nan")
    inertia_mean: float = float("nan")
    size: float = float("nan")          # length of a line, area of a face
    corners: tuple = ()

    @property
    def z(self):
        return self.multiplicity * self.zeta

    def free_energy(self, kappa):
        return free_energy(self.m, self.multiplicity, self.zeta, kappa)


@dataclass
class LandscapeSummary:
    n: int
    rows: list
    Z: tuple = field(default=None)

    def __post_init__(self):
        if self.Z is None:
            self.Z = tuple(sum(r.z for r in self.rows if r.dim == p) for p in range(3))

    def counts(self):
        return tuple(sum(1 for r in self.rows if r.dim == p) for p in range(3))

    @property
    def ratios(self):
        Z0, Z1, Z2 = self.Z
        return Z1 / Z0, Z2 / Z1

    def partition_function(self, kappa):
        return sum(kappa ** (2 - p) * z for p, z in enumerate(self.Z))

    def probabilities(self, dim=0):
        """Leading-order occupation probabilities within one dimension."""
        rows = [r for r in self.rows if r.dim == dim]
        total = sum(r.z for r in rows)
        return {r.id: r.z / total for r in rows}


def totals(rows, n):
    return LandscapeSummary(n, list(rows))


def yields(Z, kappa):
    """Fractions ``y_p`` of time spent in p-dimensional modes (p = 0, 1, 2)."""
    Z0, Z1, Z2 = Z.Z if isinstance(Z, LandscapeSummary) else Z
    if kappa == math.inf:
        return 1.0, 0.0, 0.0
    if kappa == 0:
        return 0.0, 0.0, 1.0
    if kappa >= 1:
        w = np.array([Z0, Z1 / kappa, Z2 / kappa ** 2])
    else:
        w = np.array([Z0 * kappa ** 2, Z1 * kappa, Z2])
    w = w / w.sum()
    return tuple(float(v) for v in w)


def critical_temperature(Z, p, kappa_of_T=kappa_from_constants, bracket=(0.05, 20.0)):
    """Temperature at which ``kappa(T) Z_p = Z_{p+1}``, by bisection."""
    Zs = Z.Z if isinstance(Z, LandscapeSummary) else Z
    target = Zs[p + 1] / Zs[p]

    def g(T):
        return math.log(float(kappa_of_T(T))) - math.log(target)

    lo, hi = bracket
    if g(lo) * g(hi) > 0:
        raise RangeError(f"no crossing of kappa(T) = {target:.3g} in {bracket}")
    return bisect(g, lo, hi, xtol=1e-12)


def log_estimate(Z, p):
    """``ln(Z_{p+1}/Z_p)``, the temperature-independent part of the rough
    estimate ``1/(k_B T_p) ~ ln(Z_{p+1}/Z_p) + const``."""
    Zs = Z.Z if isinstance(Z, LandscapeSummary) else Z
    return math.log(Zs[p + 1] / Zs[p])
