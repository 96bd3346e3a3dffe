"""Initial metrics: hyperbolic geodesic tube, the 2pi-metric family and a
core-free cusp annulus used to test curvature code."""
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .errors import CurvatureSignViolation, Infeasible, InvalidParam
from .geometry import TWO_PI, MetricProfile, curvatures

KAPPA_RTOL = 1e-12
KAPPA_MAXITER = 200


def hyperbolic_tube(b, s0, grid):
    """Tube of radius s0 about a closed geodesic of length b, curvature -1.

    f = 2 pi sinh(s), g = sqrt(b) cosh(s), with s = s0 r (so h = s0).
    """
    if not b > 0 or not s0 > 0:
        raise InvalidParam(f"need b > 0 and s0 > 0, got b={b}, s0={s0}")
    s = s0 * grid.centers
    root_b = np.sqrt(b)
    return MetricProfile(
        grid,
        TWO_PI * np.sinh(s),
        root_b * np.cosh(s),
        np.full(grid.n, float(s0)),
        (TWO_PI * np.sinh(s0), root_b * np.cosh(s0), float(s0)),
    )


def kappa_tube(kappa, g0, s0, grid):
    """Constant curvature -kappa^2 tube: f = (2pi/kappa) sinh(kappa s),
    g = g0 cosh(kappa s)."""
    if not (kappa > 0 and g0 > 0 and s0 > 0):
        raise InvalidParam("kappa, g0 and s0 must be positive")
    s = s0 * grid.centers
    return MetricProfile(
        grid,
        TWO_PI / kappa * np.sinh(kappa * s),
        g0 * np.cosh(kappa * s),
        np.full(grid.n, float(s0)),
        (TWO_PI / kappa * np.sinh(kappa * s0), g0 * np.cosh(kappa * s0), float(s0)),
    )


def solve_kappa(ell1, s0, rtol=KAPPA_RTOL, maxiter=KAPPA_MAXITER):
    """Positive root of ell1 * kappa = 2 pi sinh(kappa s0), by bisection.

    sinh(k s0) / k increases strictly from s0, so a root exists iff
    ell1 > 2 pi s0, and it is unique.
    """
    if not (ell1 > 0 and s0 > 0):
        raise InvalidParam("ell1 and s0 must be positive")
    if TWO_PI * s0 >= ell1:
        raise Infeasible(
            f"2*pi*s0 = {TWO_PI * s0:.6g} >= ell1 = {ell1:.6g}: the meridian must be longer than 2*pi*s0"
        )

    def resid(k):
        return ell1 * k - TWO_PI * np.sinh(k * s0)

    lo, hi = 0.0, 1.0 / s0
    while resid(hi) > 0:
        lo, hi = hi, 2.0 * hi
    for _ in range(maxiter):
        mid = 0.5 * (lo + hi)
        if resid(mid) > 0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= rtol * hi:
            break
    return 0.5 * (lo + hi)


def bump(s, s0):
    """Perturbation shape (s/s0)^4 (1 - s/s0)^2, flat at the core and at s0."""
    x = s / s0
    return x ** 4 * (1.0 - x) ** 2


@dataclass(frozen=True)
class TwoPiParams:
    ell1: float
    L: float
    s0: float
    kappa_prime: Optional[float] = None
    epsilon: float = 0.0

    def __post_init__(self):
        if not (self.ell1 > 0 and self.L > 0 and self.s0 > 0):
            raise InvalidParam("ell1, L and s0 must be positive")
        if self.kappa_prime is not None and not self.kappa_prime > 0:
            raise InvalidParam("kappa_prime must be positive")
        if not self.epsilon >= 0:
            raise InvalidParam("epsilon must be >= 0")

    @property
    def feasible(self):
        return TWO_PI * self.s0 < self.ell1

    def kappa(self):
        return solve_kappa(self.ell1, self.s0)


def make_two_pi_metric(p, grid):
    """Negatively curved solid-torus metric with f(s0) = ell1, g(s0) = L.

    f = (2pi/kappa) sinh(kappa s) with kappa solving ell1 kappa =
    2pi sinh(kappa s0), g = L cosh(kappa' s) / cosh(kappa' s0), optionally
    multiplied by exp(epsilon * bump). With kappa' = kappa and epsilon = 0 the
    curvature is constant, -kappa^2.

    Raises Infeasible when 2 pi s0 >= ell1 and CurvatureSignViolation when
    the perturbation destroys negative curvature.
    """
    kappa = p.kappa()
    kp = kappa if p.kappa_prime is None else p.kappa_prime
    s0 = p.s0
    s = s0 * grid.centers
    f = TWO_PI / kappa * np.sinh(kappa * s)
    g = p.L * np.cosh(kp * s) / np.cosh(kp * s0)
    if p.epsilon > 0:
        g = g * np.exp(p.epsilon * bump(s, s0))
    m = MetricProfile(grid, f, g, np.full(grid.n, float(s0)), (float(p.ell1), float(p.L), float(s0)))
    report = validate_negative_curvature(m)
    if not report.passed:
        raise CurvatureSignViolation(
            f"min curvature {report.L0:.4g} in {report.worst_field}[{report.worst_index}]; reduce epsilon"
        )
    return m


def cusp_annulus(M, L, s0, s_min, grid):
    """Cusp metric M^2 e^{2(s-s0)} dmu^2 + L^2 e^{2(s-s0)} dlambda^2 + ds^2
    on s in [s_min, s0]; no core, Dirichlet data at both ends."""
    if not (M > 0 and L > 0):
        raise InvalidParam("M and L must be positive")
    if not (0 < s_min < s0):
        raise InvalidParam(f"need 0 < s_min < s0, got s_min={s_min}, s0={s0}")
    width = s0 - s_min
    s = s_min + width * grid.centers
    e = np.exp(s - s0)
    e_in = np.exp(s_min - s0)
    return MetricProfile(
        grid, M * e, L * e, np.full(grid.n, width),
        (float(M), float(L), width),
        inner=(M * e_in, L * e_in, width),
    )


class NegativeCurvatureReport(NamedTuple):
    passed: bool
    K0: float
    L0: float
    worst_field: str
    worst_index: int  # -1 for a core limit


def validate_negative_curvature(m):
    """Pass iff alpha, beta, gamma > 0 everywhere, core limits included.

    K0 is the largest and L0 the smallest of the three curvatures.
    """
    c = curvatures(m)
    L0, K0 = c.extrema()
    worst_field, worst_index, worst = "", 0, np.inf
    for name in ("alpha", "beta", "gamma"):
        a = getattr(c, name)
        i = int(np.argmin(a))
        if a[i] < worst:
            worst_field, worst_index, worst = name, i, a[i]
        core = getattr(c, "core_" + name)
        if np.isfinite(core) and core < worst:
            worst_field, worst_index, worst = name, -1, core
    return NegativeCurvatureReport(bool(L0 > 0), K0, L0, worst_field, worst_index)
