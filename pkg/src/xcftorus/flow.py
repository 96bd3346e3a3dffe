"""Explicit time integration of cross curvature flow for (f, g, h).

On the fixed r-grid the flow reads

    f_t = alpha f_ss,   g_t = alpha g_ss,   h_t = beta gamma h,

with alpha = f_s g_s / (f g), beta = g_ss / g, gamma = f_ss / f and
arclength derivatives d/ds = (1/h) d/dr. f and g take Dirichlet data that
scale like a homothetically expanding constant curvature metric,

    f(1, t) = f(1, 0) (1 + 4 K^2 t)^(1/4),

where -K is the curvature the boundary data are modelled on (K = 1 for the
hyperbolic tube). h has no spatial derivatives in its equation and so takes
no boundary condition; its expected boundary value is still reported.
"""
from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np

from .diagnostics import DEFAULT_TOL, RunMonitor
from .errors import EllipticityLost, InvalidParam, MaxStepsExceeded, PositivityLost
from .geometry import EVEN, ODD, POSITIVITY_FLOOR, MetricProfile, curvatures, extend

# snapshot times closer than this (relative to t_end) are merged
_TIME_EPS = 1e-12


@dataclass(frozen=True)
class FlowConfig:
    t_end: float = 1.0
    cfl: float = 0.4
    snapshot_every: float = 0.1
    max_steps: int = 10_000_000
    floor: float = POSITIVITY_FLOOR
    bound_tol: float = DEFAULT_TOL

    def __post_init__(self):
        if not 0 < self.cfl <= 0.5:
            raise InvalidParam(f"cfl must lie in (0, 0.5], got {self.cfl}")
        if not self.t_end > 0:
            raise InvalidParam("t_end must be positive")
        if not self.snapshot_every > 0:
            raise InvalidParam("snapshot_every must be positive")
        if int(self.max_steps) != self.max_steps or self.max_steps <= 0:
            raise InvalidParam("max_steps must be a positive integer")
        if not self.floor > 0:
            raise InvalidParam("floor must be positive")

    def snapshot_times(self):
        k = int(np.floor(self.t_end / self.snapshot_every + _TIME_EPS))
        times = [i * self.snapshot_every for i in range(k + 1)]
        if self.t_end - times[-1] > _TIME_EPS * self.t_end:
            times.append(self.t_end)
        else:
            times[-1] = self.t_end
        return times


@dataclass(frozen=True)
class FlowState:
    metric: MetricProfile
    t: float
    f_b0: float
    g_b0: float
    h_b0: float
    K0: float
    L0: float
    boundary_curvature: float = 1.0

    @classmethod
    def initial(cls, metric, boundary_curvature=1.0):
        """State at t = 0; K0 and L0 are the extreme initial curvatures."""
        if not metric.has_core:
            raise InvalidParam("the flow runs on the solid torus; the profile has no core")
        if not boundary_curvature > 0:
            raise InvalidParam("boundary_curvature must be positive")
        L0, K0 = curvatures(metric).extrema()
        return cls(metric, 0.0, *metric.boundary, K0, L0, float(boundary_curvature))

    def boundary_factor(self, t):
        return (1.0 + 4.0 * self.boundary_curvature ** 2 * t) ** 0.25


def boundary_values(state, t):
    """Dirichlet data (f_b, g_b, h_b) at time t."""
    if t < 0:
        raise InvalidParam("t must be nonnegative")
    c = state.boundary_factor(t)
    return state.f_b0 * c, state.g_b0 * c, state.h_b0 * c


def apply_ghost_cells(state):
    """(F, G, H): the fields padded with one ghost cell on each side."""
    m = state.metric
    return (extend(m.f, ODD, m.boundary[0]),
            extend(m.g, EVEN, m.boundary[1]),
            extend(m.h, EVEN))


def _rhs(f, g, h, fb, gb, floor):
    n = f.size
    F = extend(f, ODD, fb)
    G = extend(g, EVEN, gb)
    H = extend(h, EVEN)
    half_n = 0.5 * n
    nn = float(n * n)
    h_r = (H[2:] - H[:-2]) * half_n
    f_r = (F[2:] - F[:-2]) * half_n
    g_r = (G[2:] - G[:-2]) * half_n
    f_rr = (F[2:] - 2.0 * f + F[:-2]) * nn
    g_rr = (G[2:] - 2.0 * g + G[:-2]) * nn
    inv_h = 1.0 / h
    inv_h2 = inv_h * inv_h
    f_ss = (f_rr - f_r * h_r * inv_h) * inv_h2
    g_ss = (g_rr - g_r * h_r * inv_h) * inv_h2
    inv_fg = 1.0 / (f * g)
    alpha = f_r * g_r * inv_h2 * inv_fg
    amin = alpha.min()
    if not amin > floor:
        i = int(np.argmin(alpha)) if np.isfinite(amin) else -1
        raise EllipticityLost(f"alpha = {amin:.3e} at cell {i}; the flow is no longer parabolic")
    return alpha * f_ss, alpha * g_ss, f_ss * g_ss * inv_fg * h, alpha


def xcf_rhs(state, floor=POSITIVITY_FLOOR):
    """Time derivatives (df, dg, dh) = (alpha gamma f, alpha beta g, beta gamma h)."""
    m = state.metric
    if not m.has_core:
        c = curvatures(m, floor)
        if not c.alpha.min() > floor:
            raise EllipticityLost(f"min alpha = {c.alpha.min():.3e}")
        return c.alpha * c.gamma * m.f, c.alpha * c.beta * m.g, c.beta * c.gamma * m.h
    df, dg, dh, _ = _rhs(m.f, m.g, m.h, m.boundary[0], m.boundary[1], floor)
    return df, dg, dh


def log_rates(state, floor=POSITIVITY_FLOOR):
    """(u_t, v_t, w_t) for u = log f, v = log g, w = log h, from the
    curvatures: (alpha gamma, alpha beta, beta gamma). A cross-check on
    xcf_rhs; the logarithmic form is singular at the core and is not
    integrated."""
    c = curvatures(state.metric, floor)
    return c.alpha * c.gamma, c.alpha * c.beta, c.beta * c.gamma


def stable_dt(state, cfg, t_stop=None):
    """cfl (h dr)^2_min / (2 alpha_max), clipped so as not to pass ``t_stop``."""
    m = state.metric
    alpha = curvatures(m, cfg.floor).alpha
    amax = float(alpha.max())
    if not amax > cfg.floor:
        raise EllipticityLost(f"max alpha = {amax:.3e}; no stable step exists")
    dt = cfg.cfl * float(np.min(m.h * m.grid.dr)) ** 2 / (2.0 * amax)
    if t_stop is not None:
        dt = min(dt, t_stop - state.t)
    return dt


def _with_fields(state, f, g, h, t):
    fb, gb, hb = boundary_values(state, t)
    try:
        m = MetricProfile(state.metric.grid, f, g, h, (fb, gb, hb))
    except PositivityLost as exc:
        raise PositivityLost(f"at t = {t:.6g}: {exc}") from None
    return replace(state, metric=m, t=t)


def _stage_one(state, floor):
    m = state.metric
    return _rhs(m.f, m.g, m.h, m.boundary[0], m.boundary[1], floor)


def _finish_step(state, dt, k1, floor):
    m = state.metric
    f, g, h = m.f, m.g, m.h
    k1f, k1g, k1h = k1[:3]
    half = 0.5 * dt
    fm, gm, hm = f + half * k1f, g + half * k1g, h + half * k1h
    if min(fm.min(), gm.min(), hm.min()) <= floor:
        raise PositivityLost(f"non-positive field at the half step from t = {state.t:.6g}")
    fb, gb, _ = boundary_values(state, state.t + half)
    k2f, k2g, k2h, _ = _rhs(fm, gm, hm, fb, gb, floor)
    return _with_fields(state, f + dt * k2f, g + dt * k2g, h + dt * k2h, state.t + dt)


def step(state, dt, floor=POSITIVITY_FLOOR):
    """One explicit midpoint (RK2) step; boundary data re-evaluated at the
    half step."""
    if not dt > 0:
        raise InvalidParam(f"dt must be positive, got {dt}")
    return _finish_step(state, dt, _stage_one(state, floor), floor)


Sink = Callable[[FlowState, object, object], None]


def evolve(state, cfg, sink: Optional[Sink] = None, monitor: Optional[RunMonitor] = None):
    """Integrate to cfg.t_end, calling ``sink(state, curvature, record)`` at
    every snapshot time (t = 0 included). Returns the final state."""
    if monitor is None:
        monitor = RunMonitor(state.K0, state.L0, cfg.bound_tol)
    times = [t for t in cfg.snapshot_times() if t >= state.t - _TIME_EPS]

    def emit(s):
        c = curvatures(s.metric, cfg.floor)
        rec = monitor.record(s.metric, c, s.t, stable_dt(s, cfg))
        if sink is not None:
            sink(s, c, rec)

    if abs(times[0] - state.t) <= _TIME_EPS * cfg.t_end:
        emit(state)
        times = times[1:]
    steps = 0
    dr = state.metric.grid.dr
    for target in times:
        while state.t < target:
            k1 = _stage_one(state, cfg.floor)
            dt = cfg.cfl * float(np.min(state.metric.h * dr)) ** 2 / (2.0 * float(k1[3].max()))
            landing = target - state.t <= dt * (1 + 1e-9)
            if landing:
                dt = target - state.t
            if steps >= cfg.max_steps:
                raise MaxStepsExceeded(f"{steps} steps taken, t = {state.t:.6g} < t_end = {cfg.t_end}")
            state = _finish_step(state, dt, k1, cfg.floor)
            steps += 1
            if landing:
                state = replace(state, t=target)
        emit(state)
    return state
