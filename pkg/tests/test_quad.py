import random

import pytest

from dwell import quad
from dwell.model import EVEN, ODD, PUBLISHED_PARAMS, DomainError, QuadratureError, context
from dwell.pt import trial_grid
from dwell.trial import TrialFunction

CTX = context(192)


@pytest.fixture(scope="module")
def tf():
    return TrialFunction(PUBLISHED_PARAMS[(-1.0, EVEN)], -1.0)


@pytest.fixture(scope="module")
def grid(tf):
    return trial_grid(tf)


def test_gauss_legendre_exact_for_polynomials():
    t, w = quad.gauss_legendre(8, 192)
    for k in range(16):
        exact = 0 if k % 2 else CTX.mpf(2) / (k + 1)
        assert abs(CTX.fsum(wi * ti ** k for ti, wi in zip(t, w)) - exact) < CTX.mpf(10) ** -55


def test_grid_validation():
    for bad in ((1.0, 2.0), (0.0,), (0.0, 2.0, 1.0)):
        with pytest.raises(DomainError):
            quad.PanelGrid(bad)
    with pytest.raises(DomainError):
        quad.PanelGrid((0.0, 1.0), order=2)
    g = quad.uniform_grid(6.0, 3)
    assert g.X == 6.0 and g.panels == 3 and g.size == 96
    assert len(g.nodes(192)) == g.size


def test_adaptive_grid_respects_bounds():
    g = quad.adaptive_grid(lambda x: 4 * x ** 3, 8.0, h_max=0.5, max_change=6.0, marks=(1.234,))
    assert g.X == 8.0 and 1.234 in g.breakpoints
    widths = [b - a for a, b in zip(g.breakpoints, g.breakpoints[1:])]
    assert max(widths) <= 0.5 + 1e-12
    assert widths[-1] < widths[0]


def test_gaussian_integral():
    g = quad.uniform_grid(12.0, 24)
    val, err = quad.integrate_line(lambda x: CTX.exp(-x * x), g, EVEN)
    assert abs(val - CTX.sqrt(CTX.pi)) <= 1e-30
    assert err < 1e-20


def test_odd_integrand_short_circuits():
    calls = []
    val, err = quad.integrate_line(lambda x: calls.append(x) or x, quad.uniform_grid(1.0, 1), ODD)
    assert val == 0 and err == 0 and not calls


def test_node_doubling_self_convergence(tf, grid):
    f = lambda x: tf.psi(x) ** 2
    a = quad.integrate_line(f, grid)[0]
    b = quad.integrate_line(f, grid.refined())[0]
    assert abs(a / b - 1) <= 1e-25


def test_convergence_rate_under_node_doubling():
    # exp(x) on one panel of width 4: error collapses super-algebraically with n
    exact = CTX.exp(4) - 1
    errs = [abs(quad.integrate_half(CTX.exp, quad.PanelGrid((0.0, 4.0), n))[0] - exact) for n in (4, 8, 16)]
    assert errs[0] > 1e3 * errs[1] > 1e6 * errs[2]


def test_cumulative_polynomial():
    g = quad.uniform_grid(5.0, 2)
    F = quad.integrate_cumulative(lambda x: 2 * x, g, ODD)
    assert F.parity == EVEN
    assert abs(F(3) - 9) < 1e-50
    nodes = g.nodes(192)
    assert all(abs(v - x * x) < 1e-50 for x, v in zip(nodes, F.values))


def test_tail_at_cutoff_is_zero(grid):
    assert quad.integrate_tail(lambda x: CTX.exp(-x), grid, grid.X) == 0


def test_tail_outside_range(grid):
    with pytest.raises(DomainError):
        quad.integrate_tail(lambda x: x, grid, grid.X + 1)


def test_additivity_random_points(tf, grid):
    f = lambda x: tf.psi(x) ** 2 * (1 + x)
    F = quad.integrate_cumulative(f, grid)
    total = quad.integrate_half(f, grid)[0]
    rng = random.Random(5)
    for _ in range(20):
        x = rng.uniform(0, grid.X)
        assert abs(F(x) + quad.integrate_tail(f, grid, x) - total) <= CTX.mpf(10) ** -52 * abs(total)


def test_tail_values_match_integrate_tail(tf, grid):
    f = lambda x: tf.psi(x) ** 2
    vals = quad.sample(f, grid, 192)
    T = quad.tail_values(vals, grid, 192)
    nodes = grid.nodes(192)
    for i in (0, 40, 170):
        assert abs(T[i] - quad.integrate_tail(f, grid, nodes[i])) <= 1e-50 * abs(T[0])


def test_curve_table_exact_at_nodes_and_parity():
    g = quad.uniform_grid(3.0, 2, order=8)
    nodes = g.nodes(192)
    table = quad.CurveTable(g, tuple(x ** 3 for x in nodes), ODD)
    assert table(nodes[5]) == nodes[5] ** 3
    assert abs(table(-1.3) + CTX.mpf(1.3) ** 3) < 1e-45
    even = quad.CurveTable(g, tuple(x ** 2 for x in nodes), EVEN)
    assert abs(even(-1.3) - CTX.mpf(1.3) ** 2) < 1e-45
    with pytest.raises(DomainError):
        table(4.0)
    with pytest.raises(DomainError):
        quad.CurveTable(g, (1, 2, 3))


def test_curve_table_csv():
    g = quad.uniform_grid(1.0, 1, order=4)
    text = quad.CurveTable(g, tuple(g.nodes(192))).to_csv()
    lines = text.strip().splitlines()
    assert lines[0] == "x,value" and len(lines) == 5


def test_non_finite_sample_reports_location():
    with pytest.raises(QuadratureError) as exc:
        quad.integrate_half(lambda x: CTX.inf if x > 0.5 else x, quad.uniform_grid(1.0, 1, order=4))
    assert exc.value.x is not None


def test_determinism(tf, grid):
    f = lambda x: tf.psi(x) ** 2
    assert quad.integrate_half(f, grid) == quad.integrate_half(f, grid)


def test_log_spacing_hint():
    g = quad.log_spacing_hint(10.0, 8)
    w = [b - a for a, b in zip(g.breakpoints, g.breakpoints[1:])]
    assert g.X == pytest.approx(10.0) and all(w1 > w0 for w0, w1 in zip(w, w[1:]))
