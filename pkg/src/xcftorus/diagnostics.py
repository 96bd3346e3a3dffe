"""Runtime monitors for a cross curvature flow run.

The Einstein tensor of a diagonal metric has eigenvalues (beta, gamma,
alpha) along the mu, lambda and radial directions: for an orthonormal
frame, P_11 = Ric_11 - R/2 = K_12 + K_13 - (K_12 + K_13 + K_23) = -K_23,
and similarly for the other two. Hence trace P = alpha + beta + gamma and
det P = alpha beta gamma, which is all the J functional needs.
"""
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import NonFinite
from .geometry import EVEN, ODD, TWO_PI, arclength, core_limit, core_slope, d2_ds2, d_ds, s_derivatives

DEFAULT_TOL = 1e-2
CORE_CELLS = 2


class BoundFlags(NamedTuple):
    upper: bool        # alpha, beta, gamma <= K0
    exp_lower: bool    # ... >= L0 exp(-4 K0^2 t)
    poly_lower: bool   # alpha >= L0 / (4 K0 L0 t + 1)
    positive: bool     # negative sectional curvature preserved
    elliptic: bool     # alpha > 0

    def all(self):
        return all(self)


def _field_extrema(c):
    out = {}
    for name in ("alpha", "beta", "gamma"):
        a = getattr(c, name)
        core = getattr(c, "core_" + name)
        lo, hi = float(a.min()), float(a.max())
        if np.isfinite(core):
            lo, hi = min(lo, core), max(hi, core)
        out[name] = (lo, hi)
    return out


def check_bounds(c, t, K0, L0, tol=DEFAULT_TOL):
    """Evaluate the five a priori curvature bounds at time t."""
    ext = _field_extrema(c)
    lo = min(v[0] for v in ext.values())
    hi = max(v[1] for v in ext.values())
    a_lo = ext["alpha"][0]
    return BoundFlags(
        upper=hi <= K0 * (1 + tol),
        exp_lower=lo >= L0 * math.exp(-4.0 * K0 * K0 * t) * (1 - tol),
        poly_lower=a_lo >= L0 / (4.0 * K0 * L0 * t + 1.0) * (1 - tol),
        positive=lo > 0,
        elliptic=a_lo > 0,
    )


def j_density(c):
    """P/3 - (det P)^(1/3) per cell; nonnegative by AM-GM."""
    return (c.alpha + c.beta + c.gamma) / 3.0 - np.cbrt(c.alpha * c.beta * c.gamma)


def compute_J(m, c):
    """J = int f g [ (alpha+beta+gamma)/3 - (alpha beta gamma)^(1/3) ] ds,
    midpoint rule in r."""
    if not all(np.all(np.isfinite(a)) for a in (c.alpha, c.beta, c.gamma)):
        raise NonFinite("J needs finite curvatures")
    if min(c.alpha.min(), c.beta.min(), c.gamma.min()) <= 0:
        raise NonFinite("J is defined for positive curvatures only")
    return float(np.sum(m.f * m.g * m.h * j_density(c)) * m.grid.dr)


def check_J_monotone(series, tol=1e-6):
    """True iff J(t_{k+1}) <= J(t_k) + tol (1 + |J(t_k)|) along ``series``
    of (t, J) pairs."""
    js = [j for _, j in series]
    return all(b <= a + tol * (1 + abs(a)) for a, b in zip(js, js[1:]))


# -- curvature evolution ----------------------------------------------------

def alpha_rate_forms(alpha, beta, gamma, alpha_s, alpha_ss, u_s, v_s):
    """The four equivalent interior expressions for d(alpha)/dt.

    They coincide whenever alpha_s = beta u_s + gamma v_s - alpha (u_s + v_s),
    which holds identically for alpha = u_s v_s.
    """
    a, b, g = alpha, beta, gamma
    diff = a * alpha_ss
    first = (b * u_s + g * v_s + 2 * a * (u_s + v_s)) * alpha_s + 2 * a * (a * a - 2 * b * g)
    second = ((g * v_s - 3 * b * u_s + 2 * a * (u_s + v_s)) * alpha_s
              + 4 * u_s ** 2 * b * (b - a) - 2 * a * a * (2 * b - a))
    third = ((b * u_s - 3 * g * v_s + 2 * a * (u_s + v_s)) * alpha_s
             + 4 * v_s ** 2 * g * (g - a) - 2 * a * a * (2 * g - a))
    fourth = ((b * u_s + g * v_s) * alpha_s
              - 2 * a * (u_s ** 2 * (a - b) + v_s ** 2 * (a - g) + (a - b) * (a - g) + b * g))
    return diff + first, diff + second, diff + third, diff + fourth


def interior_rates(alpha, beta, gamma, u_s, v_s, d1, d2, alpha_minus_beta=None):
    """Right-hand sides of the interior curvature evolution equations.

    ``d1`` and ``d2`` are (alpha, beta, gamma) first and second arclength
    derivatives. ``alpha_minus_beta`` overrides alpha - beta in the
    u_s^2 (alpha - beta) term of beta_t.
    """
    a, b, g = alpha, beta, gamma
    amb = a - b if alpha_minus_beta is None else alpha_minus_beta
    a_s, b_s, g_s = d1
    a_ss, b_ss, g_ss = d2
    a_t = a * a_ss + (2 * a * (u_s + v_s) + b * u_s + g * v_s) * a_s + 2 * a * (a * a - 2 * b * g)
    b_t = a * b_ss + (3 * b * u_s + g * v_s - 2 * a * u_s) * b_s + 2 * b * (u_s ** 2 * amb - a * g)
    g_t = a * g_ss + (3 * g * v_s + b * u_s - 2 * a * v_s) * g_s + 2 * g * (v_s ** 2 * (a - g) - a * b)
    return a_t, b_t, g_t


def core_rates(alpha, beta, gamma, alpha_ss, beta_ss, gamma_ss):
    """Curvature evolution at the core, where u_s blows up."""
    a, b, g = alpha, beta, gamma
    a_t = 4 * a * alpha_ss + 2 * a ** 3 - 4 * a * a * g
    b_t = 4.0 / 3.0 * a * beta_ss - 2.0 / 3.0 * b ** 3 - 4.0 / 3.0 * b * b * g
    g_t = 2 * a * gamma_ss - 2 * a * a * g
    return a_t, b_t, g_t


def _extend2(u, parity):
    """Two parity ghosts at the core; two cubic-extrapolated ghosts at r = 1."""
    out = np.empty(u.size + 4)
    out[2:-2] = u
    sign = -1.0 if parity == ODD else 1.0
    out[1] = sign * u[0]
    out[0] = sign * u[1]
    out[-2] = 4 * u[-1] - 6 * u[-2] + 4 * u[-3] - u[-4]
    out[-1] = 4 * out[-2] - 6 * u[-1] + 4 * u[-2] - u[-3]
    return out


def alpha_minus_beta_fine(m):
    """alpha - beta with fourth-order stencils.

    alpha - beta = O(s^2) near the core, and u_s^2 (alpha - beta) stays
    bounded; second-order errors would be amplified by u_s^2 ~ 1/s^2.
    """
    n = m.grid.n
    F, G, H = _extend2(m.f, ODD), _extend2(m.g, EVEN), _extend2(m.h, EVEN)

    def d1(U):
        return (-U[4:] + 8 * U[3:-1] - 8 * U[1:-3] + U[:-4]) * (n / 12.0)

    def d2(U):
        return (-U[4:] + 16 * U[3:-1] - 30 * U[2:-2] + 16 * U[1:-3] - U[:-4]) * (n * n / 12.0)

    h = m.h
    h_r = d1(H)
    f_s, g_s = d1(F) / h, d1(G) / h
    g_ss = (d2(G) - d1(G) * h_r / h) / (h * h)
    return f_s * g_s / (m.f * m.g) - g_ss / m.g


@dataclass(frozen=True)
class OracleRates:
    alpha_t: np.ndarray
    beta_t: np.ndarray
    gamma_t: np.ndarray
    core_alpha_t: float
    core_beta_t: float
    core_gamma_t: float


def curvature_rhs_oracle(m, c):
    """Predicted (alpha_t, beta_t, gamma_t) at every cell of ``m``.

    Interior cells use the general evolution equations with u_s = f_s / f
    and v_s = g_s / g; the CORE_CELLS innermost cells and the core itself use
    the core forms, where u_s^2 (alpha - beta) is replaced by its limit.
    Elsewhere near the core alpha - beta = O(s^2) is multiplied by
    u_s^2 ~ 1/s^2, so it is taken from fourth-order differences.
    """
    d = s_derivatives(m)
    u_s = d.f_s / m.f
    v_s = d.g_s / m.g
    par = EVEN if m.has_core else None
    fields = (c.alpha, c.beta, c.gamma)
    d1 = tuple(d_ds(x, m.h, par) for x in fields)
    d2 = tuple(d2_ds2(x, m.h, par) for x in fields)
    amb = alpha_minus_beta_fine(m) if m.has_core else None
    a_t, b_t, g_t = interior_rates(*fields, u_s, v_s, d1, d2, amb)
    if not m.has_core:
        nan = float("nan")
        return OracleRates(a_t, b_t, g_t, nan, nan, nan)
    k = CORE_CELLS
    ca, cb, cg = core_rates(c.alpha[:k], c.beta[:k], c.gamma[:k], d2[0][:k], d2[1][:k], d2[2][:k])
    a_t[:k], b_t[:k], g_t[:k] = ca, cb, cg
    ss = [core_limit(x, m.grid) for x in d2]
    core = core_rates(c.core_alpha, c.core_beta, c.core_gamma, *ss)
    return OracleRates(a_t, b_t, g_t, *core)


# -- integral identities and derivative monitors ----------------------------

def beta_gamma_integral(m, c):
    """Midpoint quadrature of beta gamma ds over [0, s1]."""
    return float(np.sum(c.beta * c.gamma * m.h) * m.grid.dr)


def _three_point_slope(t0, t1, t2, y0, y1, y2, at):
    """Derivative at ``at`` of the parabola through three (t, y) points."""
    return (y0 * (2 * at - t1 - t2) / ((t0 - t1) * (t0 - t2))
            + y1 * (2 * at - t0 - t2) / ((t1 - t0) * (t1 - t2))
            + y2 * (2 * at - t0 - t1) / ((t2 - t0) * (t2 - t1)))


def transport_residuals(times, s1, integrals):
    """|ds1/dt - int beta gamma ds| / max(1, |ds1/dt|) at interior snapshots.

    ds1/dt is the centred (non-uniform) three-point difference.
    """
    t, s, q = (np.asarray(x, dtype=float) for x in (times, s1, integrals))
    if t.size < 3:
        raise ValueError("transport identity needs at least three snapshots")
    out = np.empty(t.size - 2)
    for k in range(1, t.size - 1):
        if t[k + 1] - t[k - 1] <= 0:
            out[k - 1] = 0.0
            continue
        rate = _three_point_slope(t[k - 1], t[k], t[k + 1], s[k - 1], s[k], s[k + 1], t[k])
        out[k - 1] = abs(rate - q[k]) / max(1.0, abs(rate))
    return out


def transport_identity_residual(times, s1, integrals):
    return float(transport_residuals(times, s1, integrals).max())


def bbs_products(m, c, t):
    """(t max|beta_s|, t max|gamma_s|), the first-order derivative monitor.

    The outermost cell is left out: curvatures have no boundary data and
    their one-sided derivative there converges slowly.
    """
    par = EVEN if m.has_core else None
    b_s = d_ds(c.beta, m.h, par)[:-1]
    g_s = d_ds(c.gamma, m.h, par)[:-1]
    return t * float(np.abs(b_s).max()), t * float(np.abs(g_s).max())


def bbs_monitor(records):
    """Series of (t, t max|beta_s|, t max|gamma_s|) from run records."""
    return [(r.t, r.bbs_beta, r.bbs_gamma) for r in records]


def convergence_monitor(c, window=0.9):
    """sup|alpha - beta| and sup|beta - gamma| over r <= window."""
    mask = c.grid.centers <= window
    return (float(np.abs(c.alpha - c.beta)[mask].max()),
            float(np.abs(c.beta - c.gamma)[mask].max()))


# -- per-snapshot records ---------------------------------------------------

FLAG_NAMES = BoundFlags._fields


@dataclass(frozen=True)
class DiagnosticsRecord:
    t: float
    dt: float
    s1: float
    alpha_min: float
    alpha_max: float
    beta_min: float
    beta_max: float
    gamma_min: float
    gamma_max: float
    J: float
    transport_residual: float
    core_slope_error: float
    bbs_beta: float
    bbs_gamma: float
    flags: BoundFlags

    def row(self):
        return [self.t, self.dt, self.s1, self.alpha_min, self.alpha_max, self.beta_min,
                self.beta_max, self.gamma_min, self.gamma_max, self.J, self.transport_residual,
                self.core_slope_error, self.bbs_beta, self.bbs_gamma] + [int(f) for f in self.flags]


SERIES_COLUMNS = ["t", "dt", "s1", "alpha_min", "alpha_max", "beta_min", "beta_max",
                  "gamma_min", "gamma_max", "J", "transport_residual", "core_slope_error",
                  "bbs_beta", "bbs_gamma"] + ["flag_" + f for f in FLAG_NAMES]


class RunMonitor:
    """Builds one DiagnosticsRecord per snapshot of a single run.

    The transport residual at a snapshot uses the backward three-point
    difference over the last three snapshots (NaN for the first two).
    """

    def __init__(self, K0, L0, tol=DEFAULT_TOL):
        self.K0 = K0
        self.L0 = L0
        self.tol = tol
        self.records = []
        self._hist = []

    def record(self, m, c, t, dt=0.0):
        _, s1 = arclength(m)
        q = beta_gamma_integral(m, c)
        self._hist.append((t, s1, q))
        if len(self._hist) >= 3:
            (t0, y0, _), (t1, y1, _), (t2, y2, _) = self._hist[-3:]
            rate = _three_point_slope(t0, t1, t2, y0, y1, y2, t2)
            resid = abs(rate - q) / max(1.0, abs(rate))
        else:
            resid = float("nan")
        ext = _field_extrema(c)
        slope_err = abs(core_slope(m) - TWO_PI) if m.has_core else float("nan")
        bb, bg = bbs_products(m, c, t)
        rec = DiagnosticsRecord(
            t=t, dt=dt, s1=s1,
            alpha_min=ext["alpha"][0], alpha_max=ext["alpha"][1],
            beta_min=ext["beta"][0], beta_max=ext["beta"][1],
            gamma_min=ext["gamma"][0], gamma_max=ext["gamma"][1],
            J=compute_J(m, c), transport_residual=resid, core_slope_error=slope_err,
            bbs_beta=bb, bbs_gamma=bg,
            flags=check_bounds(c, t, self.K0, self.L0, self.tol),
        )
        self.records.append(rec)
        return rec

    def j_series(self):
        return [(r.t, r.J) for r in self.records]

    def all_flags(self):
        return all(r.flags.all() for r in self.records)

