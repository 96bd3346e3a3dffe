import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from xcftorus.acceptance import fitted_order, hyperbolic_run
from xcftorus.errors import InvalidParam, PositivityLost
from xcftorus.geometry import (
    EVEN,
    ODD,
    TWO_PI,
    MetricProfile,
    RadialGrid,
    arclength,
    core_limit,
    curvatures,
    d2_ds2,
    d_ds,
    extend,
    validate_smoothness,
    volume_weight,
)
from xcftorus.initial_data import TwoPiParams, cusp_annulus, hyperbolic_tube, kappa_tube, make_two_pi_metric


def profile(n, f, g, h, boundary=None):
    grid = RadialGrid(n)
    r = grid.centers
    fv, gv, hv = (np.broadcast_to(np.asarray(x(r) if callable(x) else x, float), r.shape) for x in (f, g, h))
    if boundary is None:
        boundary = tuple(float(x(1.0)) if callable(x) else float(x) for x in (f, g, h))
    return MetricProfile(grid, fv, gv, hv, boundary)


def poincare_h(r):
    return 2.0 / (1.0 - r * r)


def poincare_s(r):
    return np.log((1 + r) / (1 - r))


# -- grid --------------------------------------------------------------------

def test_grid_centers():
    g = RadialGrid(16)
    assert g.dr == 1 / 16
    assert g.centers[0] == pytest.approx(g.dr / 2)
    assert g.centers[-1] == pytest.approx(1 - g.dr / 2)
    assert np.all(np.diff(g.centers) > 0)
    assert np.all((g.centers > 0) & (g.centers < 1))


@pytest.mark.parametrize("n", [0, 8, 15, 16.5, -3])
def test_grid_rejects_coarse_or_fractional(n):
    with pytest.raises(InvalidParam):
        RadialGrid(n)


def test_profile_rejects_nonpositive():
    grid = RadialGrid(16)
    f = np.ones(16)
    f[3] = 0.0
    with pytest.raises(PositivityLost):
        MetricProfile(grid, f, np.ones(16), np.ones(16), (1, 1, 1))


def test_profile_arrays_are_read_only():
    m = hyperbolic_tube(1.0, 1.0, RadialGrid(16))
    with pytest.raises(ValueError):
        m.f[0] = 1.0


# -- arclength ---------------------------------------------------------------

def test_arclength_unit_stretch():
    m = profile(32, np.sinh, 1.0, 1.0)
    s, s1 = arclength(m)
    np.testing.assert_allclose(s, m.grid.centers, rtol=1e-14)
    assert s1 == pytest.approx(1.0)


def test_arclength_constant_stretch():
    _, s1 = arclength(profile(32, np.sinh, 1.0, 2.0))
    assert s1 == pytest.approx(2.0)


def test_arclength_poincare_stretch_converges_to_log3():
    # r = 0.5 is a cell centre when n is odd
    errs = []
    ns = (33, 65, 129)
    for n in ns:
        grid = RadialGrid(n)
        r = grid.centers
        m = MetricProfile(grid, np.sinh(poincare_s(r)), np.ones(n), poincare_h(r), (1, 1, 1))
        s, _ = arclength(m)
        errs.append(abs(s[(n - 1) // 2] - np.log(3.0)))
    assert errs[-1] < 1e-4
    assert fitted_order(ns, errs) >= 1.8


# -- derivatives -------------------------------------------------------------

def test_d_ds_linear_odd_is_exact():
    r = RadialGrid(64).centers
    out = d_ds(r, np.ones_like(r), ODD, boundary_value=1.0)
    np.testing.assert_allclose(out, 1.0, atol=1e-12)


def test_d_ds_square_even():
    r = RadialGrid(64).centers
    out = d_ds(r ** 2, np.ones_like(r), EVEN, boundary_value=1.0)
    np.testing.assert_allclose(out, 2 * r, atol=1e-12)


def test_d_ds_hyperbolic_sine_second_order():
    # field sinh(s), s = log((1+r)/(1-r)); closed form d/ds = cosh(s)
    ns = (64, 128, 256)
    errs = []
    for n in ns:
        r = RadialGrid(n).centers
        s = poincare_s(r)
        out = d_ds(np.sinh(s), poincare_h(r), ODD)
        mask = r <= 0.5
        errs.append(np.max(np.abs(out - np.cosh(s))[mask]))
    assert fitted_order(ns, errs) >= 1.8


def test_second_derivative_of_quadratic_is_exact():
    r = RadialGrid(32).centers
    out = d2_ds2(3 * r ** 2 + 1, np.ones_like(r), EVEN, boundary_value=4.0)
    np.testing.assert_allclose(out, 6.0, atol=1e-9)


def test_outer_ghost_reproduces_line_through_dirichlet_point():
    grid = RadialGrid(32)
    a, b = 0.3, 1.7
    u = a + b * grid.centers
    ghost = extend(u, EVEN, boundary_value=a + b)[-1]
    assert ghost == pytest.approx(a + b * (1 + grid.dr / 2), abs=1e-13)


def test_parity_ghosts():
    u = np.arange(1.0, 17.0) / 10
    assert extend(u, ODD, 2.0)[0] == -0.1
    assert extend(u, EVEN, 2.0)[0] == 0.1
    with pytest.raises(InvalidParam):
        extend(u, "neither", 2.0)


coeffs = st.lists(st.floats(-3, 3, allow_nan=False), min_size=1, max_size=4)


@settings(max_examples=40, deadline=None)
@given(coeffs)
def test_parity_round_trip(cs):
    # reference: centred differences on the mirrored grid over [-1, 1]
    n = 32
    r = RadialGrid(n).centers
    full = np.concatenate([-r[::-1], r])
    odd = sum(c * full ** (2 * k + 1) for k, c in enumerate(cs))
    even = 1.0 + sum(c * full ** (2 * k + 2) for k, c in enumerate(cs))
    for vals, parity in ((odd, ODD), (even, EVEN)):
        half = vals[n:]
        bv = sum(cs) + (1.0 if parity == EVEN else 0.0)
        ours = d_ds(half, np.ones(n), parity, boundary_value=bv)
        ref = (vals[2:] - vals[:-2]) * (n / 2.0)
        np.testing.assert_allclose(ours[:-1], ref[n - 1:], rtol=1e-12, atol=1e-12)
        mirrored = ref[:n - 1][::-1]
        sign = 1.0 if parity == ODD else -1.0
        np.testing.assert_allclose(ours[:n - 1], sign * mirrored, rtol=1e-12, atol=1e-12)


# -- curvatures --------------------------------------------------------------

def test_hyperbolic_curvatures_are_one_to_second_order():
    ns = (64, 128, 256)
    errs = []
    for n in ns:
        c = curvatures(hyperbolic_tube(1.0, 1.0, RadialGrid(n)))
        errs.append(max(np.max(np.abs(a - 1)) for a in (c.alpha, c.beta, c.gamma)))
    assert errs[-1] < 1e-3
    assert fitted_order(ns, errs) >= 0.9  # last cell sees the one-sided ghost


def test_hyperbolic_curvature_interior_order():
    ns = (64, 128, 256)
    errs = []
    for n in ns:
        c = curvatures(hyperbolic_tube(1.0, 1.0, RadialGrid(n)))
        errs.append(max(np.max(np.abs(a[:-1] - 1)) for a in (c.alpha, c.beta, c.gamma)))
    assert fitted_order(ns, errs) >= 1.8


def test_cusp_curvatures_are_one():
    ns = (32, 64, 128)
    errs = []
    for n in ns:
        c = curvatures(cusp_annulus(3.0, 2.0, 1.0, 0.4, RadialGrid(n)))
        errs.append(max(np.max(np.abs(a[1:-1] - 1)) for a in (c.alpha, c.beta, c.gamma)))
        assert np.isnan(c.core_alpha)
    assert errs[-1] < 1e-4
    assert fitted_order(ns, errs) >= 1.8


def test_kappa_tube_curvature():
    kappa = 1.5
    ns = (64, 128, 256)
    errs = []
    for n in ns:
        c = curvatures(kappa_tube(kappa, 2.0, 1.0, RadialGrid(n)))
        errs.append(max(np.max(np.abs(a[:-1] - 2.25)) for a in (c.alpha, c.beta, c.gamma)))
        assert c.core_gamma == pytest.approx(2.25, abs=1e-3)
    assert errs[-1] < 1e-3
    assert fitted_order(ns, errs) >= 1.8


def test_core_alpha_equals_core_beta():
    m = make_two_pi_metric(TwoPiParams(8.0, 5.0, 1.0, epsilon=0.05), RadialGrid(64))
    c = curvatures(m)
    assert c.core_alpha == c.core_beta


def test_innermost_alpha_beta_gap_is_second_order():
    p = TwoPiParams(8.0, 5.0, 1.0, epsilon=0.05)
    gaps = []
    for n in (64, 128, 256):
        c = curvatures(make_two_pi_metric(p, RadialGrid(n)))
        gaps.append(abs(c.alpha[0] - c.beta[0]))
    for coarse, fine in zip(gaps, gaps[1:]):
        assert 3.5 <= coarse / fine <= 4.5


@settings(max_examples=30, deadline=None)
@given(st.floats(0.1, 10.0))
def test_scaling_covariance(cf):
    m = make_two_pi_metric(TwoPiParams(8.0, 5.0, 1.0, epsilon=0.05), RadialGrid(32))
    c1, c2 = curvatures(m), curvatures(m.scaled(cf))
    for name in ("alpha", "beta", "gamma"):
        np.testing.assert_allclose(getattr(c2, name), getattr(c1, name) / cf ** 2, rtol=1e-9)
    assert c2.core_beta == pytest.approx(c1.core_beta / cf ** 2, rel=1e-9)


def test_extrema_include_core():
    m = make_two_pi_metric(TwoPiParams(8.0, 5.0, 1.0, epsilon=0.05), RadialGrid(64))
    c = curvatures(m)
    lo, hi = c.extrema()
    assert lo <= min(c.core_alpha, c.core_gamma, c.alpha.min())
    assert hi >= max(c.core_alpha, c.core_gamma, c.beta.max())


def test_core_limit_exact_for_quadratic_in_r_squared():
    grid = RadialGrid(16)
    r2 = grid.centers ** 2
    assert core_limit(2.0 - 3 * r2 + 5 * r2 ** 2, grid) == pytest.approx(2.0, abs=1e-12)


# -- smoothness --------------------------------------------------------------

def test_smoothness_tube_passes():
    rep = validate_smoothness(hyperbolic_tube(1.0, 1.0, RadialGrid(64)))
    assert rep.passed
    assert rep.core_slope == pytest.approx(TWO_PI, abs=1e-3)


def test_smoothness_wrong_slope_fails():
    grid = RadialGrid(64)
    s = grid.centers
    m = MetricProfile(grid, np.sinh(s), np.cosh(s), np.ones(64), (np.sinh(1), np.cosh(1), 1.0))
    rep = validate_smoothness(m)
    assert not rep.passed
    assert rep.core_slope == pytest.approx(1.0, abs=1e-3)


def test_smoothness_after_flow():
    m = hyperbolic_run(64).snapshots[-1].metric
    rep = validate_smoothness(m)
    assert rep.passed
    assert rep.slope_error < 64 ** -1


def test_smoothness_needs_core():
    with pytest.raises(InvalidParam):
        validate_smoothness(cusp_annulus(3.0, 2.0, 1.0, 0.5, RadialGrid(16)))


# -- volume weight -----------------------------------------------------------

def test_volume_weight_unit():
    np.testing.assert_array_equal(volume_weight(profile(16, 1.0, 1.0, 1.0)), 1.0)


def test_volume_weight_poincare_spot_value():
    n, b = 17, 2.0
    grid = RadialGrid(n)
    r = grid.centers
    s = poincare_s(r)
    m = MetricProfile(grid, TWO_PI * np.sinh(s), np.sqrt(b) * np.cosh(s), poincare_h(r), (1, 1, 1))
    i = (n - 1) // 2
    assert r[i] == 0.5
    expected = TWO_PI * np.sqrt(b) * (4 / 3) * (5 / 3) * (8 / 3)
    assert volume_weight(m)[i] == pytest.approx(expected, rel=1e-12)


def test_volume_weight_linear_in_h():
    m = hyperbolic_tube(1.0, 1.0, RadialGrid(32))
    m2 = MetricProfile(m.grid, m.f, m.g, 2 * m.h, m.boundary)
    np.testing.assert_allclose(volume_weight(m2), 2 * volume_weight(m), rtol=1e-15)
