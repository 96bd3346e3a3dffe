"""Radial grid, parity-aware difference operators and curvature of the metric

    G = f(r)^2 dmu^2 + g(r)^2 dlambda^2 + h(r)^2 dr^2,   r in [0, 1],

on the solid torus. Fields live at cell centres r_i = (i + 1/2) dr, so the
core r = 0 (where f vanishes) and the boundary r = 1 are never sampled.
Values outside [0, 1] are supplied by one ghost cell on each side:

* at the core, f is odd and g, h are even;
* at r = 1, f and g use quadratic extrapolation through the two outermost
  cells and the Dirichlet value, while h (which obeys a pointwise ODE in
  time and carries no boundary condition of its own) is extrapolated from
  the interior.

Core-free annuli (used for the cusp test profile) replace the parity ghosts
by Dirichlet ghosts at r = 0.
"""
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Tuple

import numpy as np

from .errors import InvalidParam, NonFinite, PositivityLost

TWO_PI = 2.0 * np.pi
MIN_CELLS = 16
POSITIVITY_FLOOR = 1e-14

ODD = "odd"
EVEN = "even"


@dataclass(frozen=True)
class RadialGrid:
    """Uniform cell-centred grid on r in [0, 1]."""

    n: int
    centers: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if int(self.n) != self.n or self.n < MIN_CELLS:
            raise InvalidParam(f"grid needs an integer n >= {MIN_CELLS}, got {self.n!r}")
        object.__setattr__(self, "n", int(self.n))
        r = (np.arange(self.n) + 0.5) / self.n
        r.setflags(write=False)
        object.__setattr__(self, "centers", r)

    @property
    def dr(self):
        return 1.0 / self.n


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class MetricProfile:
    """Grid samples of f, g, h plus their Dirichlet values.

    ``boundary`` holds (f, g, h) at r = 1. ``inner`` is None for a solid
    torus (parity ghosts at the core) and holds (f, g, h) at r = 0 for a
    core-free annulus.
    """

    grid: RadialGrid
    f: np.ndarray
    g: np.ndarray
    h: np.ndarray
    boundary: Tuple[float, float, float]
    inner: Optional[Tuple[float, float, float]] = None

    def __post_init__(self):
        n = self.grid.n
        for name in ("f", "g", "h"):
            a = _frozen(getattr(self, name))
            if a.shape != (n,):
                raise InvalidParam(f"{name} has shape {a.shape}, expected ({n},)")
            if not np.all(np.isfinite(a)):
                raise NonFinite(f"{name} contains non-finite values")
            if a.min() <= POSITIVITY_FLOOR:
                i = int(np.argmin(a))
                raise PositivityLost(f"{name}[{i}] = {a[i]:.3e} is below the positivity floor")
            object.__setattr__(self, name, a)
        object.__setattr__(self, "boundary", tuple(float(v) for v in self.boundary))
        if self.inner is not None:
            object.__setattr__(self, "inner", tuple(float(v) for v in self.inner))

    @property
    def has_core(self):
        return self.inner is None

    def scaled(self, c):
        """Return the profile of the metric c^2 G."""
        inner = None if self.inner is None else tuple(c * v for v in self.inner)
        return MetricProfile(self.grid, c * self.f, c * self.g, c * self.h,
                             tuple(c * v for v in self.boundary), inner)


@dataclass(frozen=True)
class CurvatureField:
    """alpha = -K(lambda, mu), beta = -K(lambda, r), gamma = -K(mu, r)."""

    grid: RadialGrid
    alpha: np.ndarray
    beta: np.ndarray
    gamma: np.ndarray
    core_alpha: float
    core_beta: float
    core_gamma: float

    def extrema(self):
        """(min, max) over all three fields including the core limits."""
        vals = [self.alpha, self.beta, self.gamma]
        core = [v for v in (self.core_alpha, self.core_beta, self.core_gamma) if np.isfinite(v)]
        lo = min(min(v.min() for v in vals), min(core, default=np.inf))
        hi = max(max(v.max() for v in vals), max(core, default=-np.inf))
        return float(lo), float(hi)


# -- ghost cells -----------------------------------------------------------

def extend(u, parity, boundary_value=None, inner_value=None):
    """Return ``u`` padded with one ghost value on each side.

    ``parity`` is "odd" or "even" for a core at r = 0, or None for an
    annulus, in which case ``inner_value`` is the Dirichlet value at r = 0
    (extrapolation from the interior if that is None too). A None
    ``boundary_value`` means cubic extrapolation at r = 1.
    """
    u = np.asarray(u, dtype=float)
    out = np.empty(u.size + 2)
    out[1:-1] = u
    if parity == ODD:
        out[0] = -u[0]
    elif parity == EVEN:
        out[0] = u[0]
    elif parity is None:
        if inner_value is None:
            out[0] = 3.0 * u[0] - 3.0 * u[1] + u[2]
        else:
            out[0] = (8.0 * inner_value - 6.0 * u[0] + u[1]) / 3.0
    else:
        raise InvalidParam(f"unknown parity {parity!r}")
    if boundary_value is None:
        out[-1] = 3.0 * u[-1] - 3.0 * u[-2] + u[-3]
    else:
        out[-1] = (8.0 * boundary_value - 6.0 * u[-1] + u[-2]) / 3.0
    return out


def _dr_of(u):
    return 1.0 / (len(u) - 2)


def _h_r(h, parity):
    """Centred r-derivative of h; h is even at a core and free at r = 1."""
    H = extend(h, EVEN if parity is not None else None)
    return (H[2:] - H[:-2]) * (0.5 * (len(h)))


def d_ds(u, h, parity, boundary_value=None, inner_value=None):
    """First arclength derivative (1/h) du/dr by centred differences."""
    U = extend(u, parity, boundary_value, inner_value)
    return (U[2:] - U[:-2]) * (0.5 / _dr_of(U)) / h


def _d_ds_ghosted(U, h):
    return (U[2:] - U[:-2]) * (0.5 / _dr_of(U)) / h


def _d2_ds2_ghosted(U, h, h_r):
    n = len(U) - 2
    u_r = (U[2:] - U[:-2]) * (0.5 * n)
    u_rr = (U[2:] - 2.0 * U[1:-1] + U[:-2]) * (n * n)
    return (u_rr - u_r * h_r / h) / (h * h)


def d2_ds2(u, h, parity, boundary_value=None, inner_value=None):
    """Second arclength derivative (u_rr - u_r h_r / h) / h^2.

    Uses the compact three-point second difference so no ghost is needed
    for the first derivative.
    """
    U = extend(u, parity, boundary_value, inner_value)
    return _d2_ds2_ghosted(U, h, _h_r(h, parity))


class SDerivatives(NamedTuple):
    f_s: np.ndarray
    g_s: np.ndarray
    f_ss: np.ndarray
    g_ss: np.ndarray


def ghosted_fields(m):
    """(F, G) padded with ghosts appropriate to ``m``."""
    fi, gi = (None, None) if m.inner is None else m.inner[:2]
    fpar, gpar = (ODD, EVEN) if m.has_core else (None, None)
    F = extend(m.f, fpar, m.boundary[0], fi)
    G = extend(m.g, gpar, m.boundary[1], gi)
    return F, G


def s_derivatives(m):
    F, G = ghosted_fields(m)
    h_r = _h_r(m.h, EVEN if m.has_core else None)
    return SDerivatives(_d_ds_ghosted(F, m.h), _d_ds_ghosted(G, m.h),
                        _d2_ds2_ghosted(F, m.h, h_r), _d2_ds2_ghosted(G, m.h, h_r))


# -- core limits -----------------------------------------------------------

def core_limit(values, grid):
    """Value at r = 0 of an even field, by a quadratic in r^2 through the
    three innermost cells."""
    x = grid.centers[:3] ** 2
    y = np.asarray(values[:3], dtype=float)
    w0 = x[1] * x[2] / ((x[0] - x[1]) * (x[0] - x[2]))
    w1 = x[0] * x[2] / ((x[1] - x[0]) * (x[1] - x[2]))
    w2 = x[0] * x[1] / ((x[2] - x[0]) * (x[2] - x[1]))
    return float(w0 * y[0] + w1 * y[1] + w2 * y[2])


def core_slope(m):
    """f_r(0) / h(0), from the even quotient f / r extrapolated to the core."""
    r = m.grid.centers
    return core_limit(m.f[:3] / r[:3], m.grid) / core_limit(m.h, m.grid)


# -- operations ------------------------------------------------------------

def arclength(m):
    """Distance from r = 0 at each cell centre and the total length s1."""
    dr = m.grid.dr
    hdr = m.h * dr
    cum = np.cumsum(hdr)
    s = cum - 0.5 * hdr
    return s, float(cum[-1])


def curvatures(m, floor=POSITIVITY_FLOOR):
    """Sectional curvature magnitudes alpha, beta, gamma of ``m``.

    alpha = f_s g_s / (f g), beta = g_ss / g, gamma = f_ss / f. At a core
    the limits are taken by even extrapolation: core_alpha and core_beta
    share the limit of g_ss / g, core_gamma is the limit of f_ss / f.
    """
    if min(m.f.min(), m.g.min()) <= floor:
        raise NonFinite("f or g at the positivity floor; curvature undefined")
    d = s_derivatives(m)
    alpha = d.f_s * d.g_s / (m.f * m.g)
    beta = d.g_ss / m.g
    gamma = d.f_ss / m.f
    for name, a in (("alpha", alpha), ("beta", beta), ("gamma", gamma)):
        if not np.all(np.isfinite(a)):
            raise NonFinite(f"{name} is not finite")
    if m.has_core:
        cb = core_limit(beta, m.grid)
        cg = core_limit(gamma, m.grid)
    else:
        cb = cg = float("nan")
    return CurvatureField(m.grid, _frozen(alpha), _frozen(beta), _frozen(gamma), cb, cb, cg)


class SmoothnessReport(NamedTuple):
    passed: bool
    core_slope: float
    slope_error: float
    g_core: float
    h_core: float


def validate_smoothness(m, tol=1e-2):
    """Check the conditions for G to close up smoothly across the core:
    f > 0 away from it, g(0) > 0 and f_r(0) = 2 pi h(0)."""
    if not m.has_core:
        raise InvalidParam("smoothness at the core needs a profile with a core")
    slope = core_slope(m)
    g0 = core_limit(m.g, m.grid)
    h0 = core_limit(m.h, m.grid)
    err = abs(slope - TWO_PI)
    ok = bool(np.all(m.f > 0) and m.boundary[0] > 0 and g0 > 0 and h0 > 0 and err <= tol)
    return SmoothnessReport(ok, slope, err, g0, h0)


def volume_weight(m):
    """Radial density f g h of the volume form (mu, lambda each span [0, 1))."""
    return m.f * m.g * m.h
