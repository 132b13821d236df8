"""Shared, session-cached computations (the expensive ones run once)."""

from functools import lru_cache

import pytest

from dwell import model
from dwell.model import EVEN, ODD, PUBLISHED_PARAMS
from dwell.pt import pt_series, trial_grid
from dwell.reference import reference_eigen
from dwell.trial import TrialFunction
from dwell.varopt import cold_seed, optimize_trial


@lru_cache(maxsize=None)
def series(a, parity=EVEN, K=3, params=None, X=None):
    params = params or PUBLISHED_PARAMS[(a, parity)]
    tf = TrialFunction(params, a)
    return pt_series(tf, K, trial_grid(tf, X))


@lru_cache(maxsize=None)
def reference(a, parity=EVEN, X=None):
    return reference_eigen(a, parity, X=X)


@lru_cache(maxsize=None)
def optimum(a, parity=EVEN, seed=None):
    return optimize_trial(a, parity, seed or cold_seed(a, parity))


def odd20_params():
    """Variational optimum of the odd a = -20 trial function."""
    return optimum(-20.0, ODD).best


@pytest.fixture(scope="session")
def ctx():
    return model.context(model.DEFAULT_PRECISION)


# one line per acceptance criterion, printed at the end of the run
ACCEPTANCE = {}


def record(criterion, part, ok, detail):
    ACCEPTANCE.setdefault(criterion, []).append((part, bool(ok), detail))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for crit in sorted(ACCEPTANCE, key=lambda c: (not c.isdigit(), int(c) if c.isdigit() else 0)):
        parts = ACCEPTANCE[crit]
        ok = all(p[1] for p in parts)
        tr.write_line(f"criterion {crit}: {'PASS' if ok else 'FAIL'}")
        for name, pok, detail in parts:
            tr.write_line(f"    [{'ok' if pok else 'FAIL'}] {name}: {detail}")
