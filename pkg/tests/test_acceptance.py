"""Acceptance criteria, each at its stated tolerance and runtime limit.

Every test prints one ``[PASS]``/``[FAIL]`` line.  Run with ``-s`` or ``-v``
to see them; they are written past pytest's capture either way.
"""

import random
import time

import pytest

from gromovlab.decorate import is_reduced_diagram
from gromovlab.experiments import EXPERIMENTS, ExperimentConfig, run
from gromovlab.fulfill import exhaustive_fulfillment, find_fulfillment

from conftest import random_instance


@pytest.fixture
def report(capsys):
    def emit(n, ok, text, elapsed):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {n}: {text} ({elapsed:.1f}s)")
    return emit


def test_1_exact_identity(report):
    t = time.perf_counter()
    rep = run("eq2", ExperimentConfig(m=2, K=3, L=1, l_values=(2, 3, 4, 5), budget=2))
    dt = time.perf_counter() - t
    s = rep.summary
    ok = rep.passed and s["diagrams"] >= 1000 and dt < 60
    report(1, ok, f"{s['diagrams']} diagrams, {s['equality_failures']} equality and "
                  f"{s['inequality_failures']} inequality failures", dt)
    assert ok


def test_2_exact_partial_probability_bound(report):
    t = time.perf_counter()
    rep = run("lemma", ExperimentConfig(m=2, K=3, L=1, l_values=(2, 3, 4), budget=2, max_classes=2))
    dt = time.perf_counter() - t
    s = rep.summary
    ok = rep.passed and dt < 600
    report(2, ok, f"{s['diagrams']} diagrams, {s['checks']} exact checks, {s['failures']} failures", dt)
    assert ok


def test_3_solver_matches_exhaustive_search(report):
    t = time.perf_counter()
    rng = random.Random(2024)
    done = agree = found = 0
    while done < 1000:
        A, R = random_instance(rng, max_K=3, max_l=4, max_R=6)
        if not is_reduced_diagram(A):
            continue
        f = find_fulfillment(A, R)
        ex = exhaustive_fulfillment(A, R)
        agree += (f is None) == (ex is None)
        found += f is not None
        done += 1
    dt = time.perf_counter() - t
    ok = agree == done and dt < 300
    report(3, ok, f"{agree}/{done} instances agree ({found} fulfillable)", dt)
    assert ok


def test_4_per_diagram_bound(report):
    t = time.perf_counter()
    rep = run("prop", ExperimentConfig(m=2, K=2, L=0, l_values=(6, 8, 10), d=0.3, epsilon=0.05,
                                       trials=10_000, seed=0))
    dt = time.perf_counter() - t
    s = rep.summary
    ok = rep.passed and dt < 1800
    report(4, ok, f"{s['violating_diagrams']} violating diagrams {s['per_l']}, {s['failures']} "
                  f"exceed the bound, worst upper/bound {s['max_upper_over_bound']:.3f}", dt)
    assert ok


@pytest.mark.xfail(strict=True, reason="violation frequency rises with l at desk-scale l; "
                                       "see README, 'Known failure'")
def test_5_planar_boundary(report):
    t = time.perf_counter()
    rep = run("isoperimetric", ExperimentConfig(m=2, K=2, l_values=(4, 6, 8, 10, 12), d=0.25,
                                                epsilon=0.05, trials=10_000, seed=0))
    dt = time.perf_counter() - t
    s = rep.summary
    freqs = ", ".join(f"l={r[0]}: {r[7]:.3f}" for r in rep.rows)
    ok = rep.passed and dt < 1800
    report(5, ok, f"identity failures {s['identity_failures']}, nonincreasing "
                  f"{s['trend_nonincreasing']} ({freqs})", dt)
    assert s["identity_failures"] == 0
    assert ok


def test_6_growth_fit(report):
    t = time.perf_counter()
    rep = run("growth", ExperimentConfig(K=2, L=0, l_values=(2, 3, 4, 5, 6), rse_tol=0.1))
    base = run("growth", ExperimentConfig(K=1, L=0, l_values=(2, 3, 4, 5, 6), budget=0))
    dt = time.perf_counter() - t
    fit = rep.summary["fits"]["1"]["labeled"]
    ok = (rep.passed and fit["residual_std_error"] < 0.1
          and base.summary["closed_form_2l"] is True and dt < 300)
    report(6, ok, f"slope {fit['slope']:.3f}, RSE {fit['residual_std_error']:.4f}, "
                  f"K=1 count 2l {base.summary['closed_form_2l']}", dt)
    assert ok


SMALL = {
    "eq2": ExperimentConfig(K=2, L=1, l_values=(2, 3)),
    "lemma": ExperimentConfig(K=2, l_values=(2, 3)),
    "prop": ExperimentConfig(K=2, l_values=(4, 6), trials=2000, seed=9),
    "lgl": ExperimentConfig(K=2, l_values=(4, 6), trials=2000, seed=9),
    "isoperimetric": ExperimentConfig(K=2, l_values=(4, 6, 8), d=0.25, trials=2000, seed=9),
    "growth": ExperimentConfig(K=2, l_values=(2, 3, 4)),
}


def test_7_reproducible_reports(report):
    t = time.perf_counter()
    same = 0
    for name in EXPERIMENTS:
        cfg = SMALL[name]
        outs = set()
        for jobs in (1, 2, 1):
            rep = run(name, ExperimentConfig(**{**cfg.__dict__, "jobs": jobs}))
            outs.add((rep.to_csv(), rep.to_json(include_rows=True)))
        same += len(outs) == 1
    dt = time.perf_counter() - t
    ok = same == len(EXPERIMENTS)
    report(7, ok, f"{same}/{len(EXPERIMENTS)} experiments byte-identical across reruns and jobs 1, 2", dt)
    assert ok
