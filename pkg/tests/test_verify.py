import numpy as np
import pytest

from fockop.funcspace import AffineMap, constant
from fockop.verify import (
    PropertyResult,
    check_inclusion_constant,
    check_pointwise_bound,
    check_slice_bound,
    format_results,
    random_symbol,
    run_suites,
)
from fockop.wco import WcoProblem

from helpers import corpus_problems


def test_random_symbol_is_seed_deterministic():
    a = random_symbol(np.random.default_rng(9), 2)
    b = random_symbol(np.random.default_rng(9), 2)
    assert a.almost_equal(b)
    assert a.n == 2
    assert len(a.terms) <= 3
    assert a.degree() <= 4  # max_power applies per coordinate


def test_inequality_checks_pass_at_small_count():
    for check in (check_slice_bound, check_pointwise_bound, check_inclusion_constant):
        res = check(10, seed=123)
        assert res.passed, res.detail
        assert "margin" in res.detail or "worst" in res.detail


def test_property_result_line_format():
    ok = PropertyResult("lemmas", "slice-bound", True, "worst margin 0.1", None)
    bad = PropertyResult("witness", "ray[x]", False, "stuck", "w=3")
    assert ok.line().startswith("PASS lemmas: slice-bound")
    assert bad.line().startswith("FAIL witness: ray[x]")
    text = format_results([ok, bad])
    assert "1/2 properties passed" in text
    assert "w=3" in text


def test_run_suites_order_is_stable_under_threads(monkeypatch):
    problems = [(l, p) for l, p in corpus_problems()[:4]]
    monkeypatch.setenv("FOCKOP_THREADS", "3")
    with_threads = run_suites(problems, suite="witness", lemma_count=4)
    monkeypatch.setenv("FOCKOP_THREADS", "1")
    serial = run_suites(problems, suite="witness", lemma_count=4)
    assert [r.line() for r in with_threads] == [r.line() for r in serial]


def test_single_suite_selection():
    problems = corpus_problems()[:3]
    only = run_suites(problems, suite="lemmas", lemma_count=4)
    assert only
    assert {r.suite for r in only} == {"lemmas"}


def test_suites_pass_on_shipped_examples():
    # a thin slice of what `fockop verify` runs; the full corpus is acceptance
    problems = [(l, p) for l, p in corpus_problems() if p.p == p.q == 2.0][:6]
    results = run_suites(problems, suite="normalization-independence")
    assert results and all(r.passed for r in results)


def test_unknown_suite_rejected():
    with pytest.raises(Exception):
        run_suites([("x", WcoProblem(constant(1), AffineMap([[0.5]], [0.0]), 2, 2))], suite="nonsense")
