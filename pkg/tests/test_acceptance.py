"""Acceptance criteria, one test each, with a one-line pass/fail print."""

import time

import pytest

from selectorkit.suites import SUITES, run_suite

pytestmark = pytest.mark.slow

SEED = 0
_FIRST = {}

CRITERIA = [
    (1, "chain", 120.0),
    (2, "cylinder", None),
    (3, "axioms", None),
    (4, "displacement", None),
    (5, "oracle", None),
    (6, "gradient", None),
    (7, "contact", None),
    (8, "reeb_capacity", None),
    (9, "epsilon_class", None),
    (10, "billiard", 60.0),
]


def _run(name):
    if name not in _FIRST:
        t0 = time.perf_counter()
        res = run_suite(name, seed=SEED)
        _FIRST[name] = (res, time.perf_counter() - t0)
    return _FIRST[name]


@pytest.mark.parametrize("number,suite,budget", CRITERIA, ids=[f"criterion{n}-{s}" for n, s, _ in CRITERIA])
def test_criterion(number, suite, budget):
    res, elapsed = _run(suite)
    in_budget = budget is None or elapsed < budget
    ok = res.ok and in_budget
    note = f"{elapsed:.1f}s" + ("" if in_budget else f" over {budget:.0f}s budget")
    print(f"\ncriterion {number}: {'pass' if ok else 'fail'} ({suite}: {res.summary or 'ok'}; {note})")
    assert res.ok, res.to_csv()
    assert in_budget, note


def test_criterion11_determinism():
    bad = []
    for name in SUITES:
        first, _ = _run(name)
        if run_suite(name, seed=SEED).to_csv() != first.to_csv():
            bad.append(name)
    print(f"\ncriterion 11: {'pass' if not bad else 'fail'} (byte-identical reruns; mismatches: {bad or 'none'})")
    assert not bad
