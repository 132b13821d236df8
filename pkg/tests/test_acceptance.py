"""
Acceptance checks against published numbers and analytic identities.

Each test records a line for the summary printed at the end of the run
(see conftest.pytest_terminal_summary) and then asserts.
"""

import random

import pytest

from conftest import odd20_params, optimum, record, reference, series
from dwell import analysis, instanton, quad, reference as ref_mod
from dwell.model import EVEN, ODD, PUBLISHED_PARAMS, context, symanzik_rescale
from dwell.pt import e1, rayleigh_energy, trial_grid, y1_far, y1_stats
from dwell.trial import TrialFunction

CTX = context(192)


def s(v, n=12):
    return CTX.nstr(v, n)


def _check(crit, part, value, target, tol, *, rel=False):
    err = abs(value - target) / (abs(target) if rel else 1)
    ok = err <= tol
    kind = "rel" if rel else "abs"
    record(crit, part, ok, f"got {s(value)}, expected {target} ({kind} err {s(err, 3)} <= {tol})")
    assert ok, f"{part}: {s(value)} vs {target} ({kind} err {s(err, 3)} > {tol})"


# ---------------------------------------------------------------- 1
@pytest.mark.parametrize("a,parity,target,tol", [
    (1.0, EVEN, 1.607541302594, 1e-7),
    (-1.0, EVEN, 1.029560832093, 1e-7),
    (-20.0, EVEN, -43.7793127, 1e-5),
    (-20.0, ODD, -43.77931637, 1e-6),
])
def test_c01_variational_energy_printed_params(a, parity, target, tol):
    tf = TrialFunction(PUBLISHED_PARAMS[(a, parity)], a)
    _check("1", f"E_var a={a} {parity}", rayleigh_energy(tf), target, tol)


# ---------------------------------------------------------------- 2
def _state(a, parity):
    if (a, parity) == (-20.0, ODD):
        return series(a, ODD, params=odd20_params())
    return series(a, parity)


@pytest.mark.parametrize("a,parity,target", [
    (1.0, EVEN, -1.2552e-10),
    (-1.0, EVEN, -1.0382e-9),
    (-20.0, EVEN, -3.81e-6),
    (-20.0, ODD, -9.3618e-8),
])
def test_c02_second_order(a, parity, target):
    _check("2", f"E2 a={a} {parity}", _state(a, parity).energies[1], target, 0.02, rel=True)


# ---------------------------------------------------------------- 3
@pytest.mark.parametrize("a,parity,tol", [
    (1.0, EVEN, 1e-9),
    (-1.0, EVEN, 1e-9),
    (-20.0, EVEN, 1e-7),
    (-20.0, ODD, 1e-7),
])
def test_c03_corrected_vs_reference(a, parity, tol):
    corrected = _state(a, parity).partial_sums[1]
    exact = reference(a, parity).energy
    _check("3", f"E(K=2) - E_ref a={a} {parity}", corrected, exact, tol)


# ---------------------------------------------------------------- 4
@pytest.mark.parametrize("a,parity,magnitude", [
    (1.0, EVEN, 1e-14),
    (-1.0, EVEN, 1e-13),
    (-20.0, EVEN, 1e-8),
    (-20.0, ODD, 1e-10),
])
def test_c04_third_order_magnitude(a, parity, magnitude):
    e3 = abs(_state(a, parity).energies[2])
    ratio = e3 / magnitude
    ok = 0.1 <= ratio <= 10
    record("4", f"|E3| a={a} {parity}", ok, f"got {s(e3, 4)}, expected ~{magnitude} (within one decade)")
    assert ok


# ---------------------------------------------------------------- 5
@pytest.fixture(scope="module")
def gap_report():
    return analysis.gap(-20.0, K=2, even=PUBLISHED_PARAMS[(-20.0, EVEN)], odd=odd20_params())


@pytest.mark.parametrize("k,name,target", [(0, "dE_var", 1.03282e-7), (1, "dE(1)", 1.06529e-7), (2, "dE(2)", 1.06525e-7)])
def test_c05_gap(gap_report, k, name, target):
    _check("5", f"{name} a=-20", gap_report.gaps[k], target, 0.01, rel=True)


def test_c05_gap_reference_agrees(gap_report):
    exact = reference(-20.0, ODD).energy - reference(-20.0, EVEN).energy
    _check("5", "reference gap vs dE(2) (0.5%)", gap_report.gaps[2], exact, 0.005, rel=True)


# ---------------------------------------------------------------- 6
@pytest.mark.parametrize("order,printed", [(0, "1.12154e-7"), (1, "1.06908e-7"), (2, "1.06754e-7"), (4, "1.06738e-7")])
def test_c06_instanton_partial_sums(order, printed):
    v = instanton.gap_asymptotic(-20.0, order)
    got = CTX.nstr(v, 6, min_fixed=1, max_fixed=0)
    ok = got == printed
    record("6", f"order {order}", ok, f"got {got}, printed {printed}")
    assert ok


# ---------------------------------------------------------------- 7
@pytest.mark.parametrize("order,percent", [(0, 5.3), (1, 0.36), (2, 0.22), (4, 0.20)])
def test_c07_deviation_table(gap_report, order, percent):
    dev = 100 * gap_report.deviations[order]
    ok = abs(dev - percent) <= 0.1
    record("7", f"order {order}", ok, f"got {s(dev, 4)}%, expected {percent}% +- 0.1")
    assert ok


def test_c07_deviation_plateau(gap_report):
    dev = 100 * gap_report.deviations[4]
    record("7", "order-4 deviation >= 0.1%", dev >= 0.1, f"{s(dev, 4)}%")
    assert dev >= 0.1


# ---------------------------------------------------------------- 8
@pytest.fixture(scope="module")
def critical():
    return analysis.critical_a()


def test_c08_critical_coupling(critical):
    _check("8", "a_crit", critical.a_crit, -3.523390749, 1e-5)
    _check("8", "m2_crit (g=1)", critical.a_crit / CTX.cbrt(4), -2.2195970861, 1e-5)


# ---------------------------------------------------------------- 9
@pytest.fixture(scope="module")
def y1_state():
    return series(-1.0, EVEN, 3, X=12.0)


def test_c09_y1_maximum(y1_state):
    m, xm, _ = y1_stats(y1_state)
    okm = abs(m - 0.006) <= 0.3 * 0.006
    okx = abs(xm - 3.9) <= 0.5
    record("9", "max|y1| ~ 0.006 (+-30%)", okm, f"got {s(m, 4)}")
    record("9", "argmax|y1| ~ 3.9 (+-0.5)", okx, f"got {s(xm, 4)}")
    assert okm and okx


def test_c09_y1_plateau(y1_state):
    _, _, plat = y1_stats(y1_state)
    ok = 1e-5 <= plat <= 1e-3
    record("9", "plateau on [0,1] ~ 1e-4 (one decade)", ok, f"got {s(plat, 4)}")
    assert ok


def test_c09_y1_tail(y1_state):
    vals = [y1_far(y1_state, x) * x * x for x in (20, 40, 80)]
    spread = (max(vals) - min(vals)) / max(abs(v) for v in vals)
    ok = spread <= 0.10
    record("9", "y1*x^2 at x=20,40,80 within 10%", ok, f"{[s(v, 5) for v in vals]} (spread {s(spread, 3)})")
    assert ok


# ---------------------------------------------------------------- 10
def test_c10_parity():
    rng = random.Random(7)
    worst = CTX.mpf(0)
    for (a, parity), p in PUBLISHED_PARAMS.items():
        tf = TrialFunction(p, a)
        for _ in range(100):
            x = CTX.mpf(rng.uniform(-6, 6))
            sign = 1 if parity == EVEN else -1
            worst = max(worst, abs(tf.psi(x) - sign * tf.psi(-x)))
    record("10", "parity of trial functions", worst == 0, f"max defect {s(worst, 3)}")
    assert worst == 0


def test_c10_riccati_residual():
    worst = CTX.mpf(0)
    for (a, parity), p in PUBLISHED_PARAMS.items():
        tf = TrialFunction(p, a)
        for x in (0.37, 1.1, 2.9, 4.4):
            x = CTX.mpf(x)
            # psi''/psi by independent numerical differentiation
            curv = CTX.diff(lambda t: tf.psi(t), x, 2) / tf.psi(x)
            worst = max(worst, abs(curv - tf.v0(x)) / (abs(tf.v0(x)) + 1))
    ok = worst <= 1e-30
    record("10", "psi''/psi = V0 (Riccati)", ok, f"max {s(worst, 3)}")
    assert ok


def test_c10_e1_identity():
    tf = TrialFunction(PUBLISHED_PARAMS[(-1.0, EVEN)], -1.0)
    g = trial_grid(tf)
    d = abs(e1(tf, g) - rayleigh_energy(tf, g))
    record("10", "e1 = rayleigh_energy (a=-1)", d <= 1e-20, f"|diff| {s(d, 3)}")
    assert d <= 1e-20


def test_c10_cumulative_tail_additivity():
    tf = TrialFunction(PUBLISHED_PARAMS[(-1.0, EVEN)], -1.0)
    g = trial_grid(tf)
    f = lambda x: tf.psi(x) ** 2 * x
    total = quad.integrate_half(f, g)[0]
    F = quad.integrate_cumulative(f, g, ODD)
    rng = random.Random(3)
    worst = CTX.mpf(0)
    for _ in range(20):
        x = rng.uniform(0, g.X)
        worst = max(worst, abs(F(x) + quad.integrate_tail(f, g, x) - total) / abs(total))
    ok = worst <= CTX.mpf(10) ** -(57 - 5)
    record("10", "cumulative + tail = total", ok, f"max rel {s(worst, 3)}")
    assert ok


@pytest.mark.parametrize("key", list(PUBLISHED_PARAMS))
def test_c10_variational_bound_printed(key):
    a, parity = key
    ev = rayleigh_energy(TrialFunction(PUBLISHED_PARAMS[key], a))
    ex = reference(a, parity).energy
    record("10", f"E_var > E_ref printed a={a} {parity}", ev > ex, f"diff {s(ev - ex, 4)}")
    assert ev > ex


@pytest.mark.parametrize("a,parity", [(1.0, EVEN), (-1.0, EVEN), (-20.0, EVEN), (-20.0, ODD)])
def test_c10_variational_bound_optimized(a, parity):
    res = optimum(a, parity)
    ex = reference(a, parity).energy
    record("10", f"E_var > E_ref optimized a={a} {parity}", res.energy > ex, f"diff {s(res.energy - ex, 4)}")
    assert res.energy > ex


@pytest.mark.parametrize("m2,g", [(-1.0, 1.0), (0.5, 3.0)])
def test_c10_rescaling_roundtrip(m2, g):
    a, scale = symanzik_rescale(m2, g)
    via = ref_mod.reference_eigen(a, EVEN, verify=False).energy * scale
    direct = ref_mod.reference_eigen(m2, EVEN, verify=False, quartic=g).energy
    rel = abs(via / direct - 1)
    record("10", f"rescaling m2={m2} g={g}", rel <= 1e-9, f"rel {s(rel, 3)}")
    assert rel <= 1e-9


@pytest.mark.parametrize("a", [1.0, -1.0])
def test_c10_wavefunction_deviation(a):
    tf = TrialFunction(PUBLISHED_PARAMS[(a, EVEN)], a)
    delta, where = ref_mod.wavefunction_deviation(tf, reference(a, EVEN))
    ok = delta <= 2e-3
    record("10", f"delta <= 2e-3 a={a}", ok, f"got {s(delta, 4)} at x={s(where, 4)}")
    assert ok


# ---------------------------------------------------------------- re-optimization
@pytest.mark.parametrize("a,parity", [(1.0, EVEN), (-1.0, EVEN), (-20.0, EVEN), (-20.0, ODD)])
def test_reoptimized_not_worse(a, parity):
    printed = rayleigh_energy(TrialFunction(PUBLISHED_PARAMS[(a, parity)], a))
    res = optimum(a, parity, PUBLISHED_PARAMS[(a, parity)])
    ok = res.energy <= printed + 1e-9
    record("R", f"E_var(opt) <= E_var(printed) + 1e-9 a={a} {parity}", ok,
           f"{s(res.energy, 14)} vs {s(printed, 14)}")
    assert ok
