import math

import numpy as np
import pytest

from gromovlab.batch import CompiledDiagram, TrialBatch, evaluate_chunk, stream_evaluate
from gromovlab.enumerate import EnumerationFilter, enumerate_abstract
from gromovlab.stats import MCEstimate, loglog_fit, wilson_interval


def _two_class(l, budget):
    f = EnumerationFilter(max_identifications=budget, dedup=True, min_faces=2)
    return [A for A in enumerate_abstract(2, 0, l, f) if A.n == 2]


def test_key_join_matches_dense_join():
    batch = TrialBatch.sample(2, 4, 0.6, seed=2, trials=400)
    for A in _two_class(4, 2):
        cd = CompiledDiagram(A)
        if cd.contradiction or not cd.cross:
            continue
        masks = cd.class_masks(batch)
        alive = np.ones(batch.T, dtype=bool)
        keys = cd._join2_keys(batch, masks, alive, 2 * batch.m, (2 * batch.m) ** len(cd.cross))
        dense = cd._join2_dense(batch, masks, alive)
        assert (keys == dense).all()


def test_stream_is_order_preserving_and_job_independent():
    pop = _two_class(4, 2)
    one = list(stream_evaluate(pop, 2, 4, 0.5, 700, 4, jobs=1, chunk_size=37))
    two = list(stream_evaluate(pop, 2, 4, 0.5, 700, 4, jobs=2, chunk_size=37))
    assert [b for b, _, _ in one] == [b for b, _, _ in two]
    for (_, c1, h1), (_, c2, h2) in zip(one, two):
        assert (c1 == c2).all() and (h1 == h2).all()
    counts, hit = evaluate_chunk(pop, 2, 4, 0.5, 700, 4)
    assert (np.concatenate([c for _, c, _ in one]) == counts).all()
    acc = np.zeros(700, dtype=bool)
    for _, _, h in one:
        acc |= h
    assert (acc == hit).all()


def test_evaluate_chunk_independent_of_trial_chunking():
    pop = _two_class(3, 1)
    a = evaluate_chunk(pop, 2, 3, 0.7, 2500, 8, chunk=10_000)
    b = evaluate_chunk(pop, 2, 3, 0.7, 2500, 8, chunk=900)
    assert (a[0] == b[0]).all() and (a[1] == b[1]).all()


@pytest.mark.parametrize("k,n", [(0, 10), (3, 10), (10, 10), (57, 10_000)])
def test_wilson_matches_closed_form(k, n):
    z = 1.959963984540054
    p = k / n
    centre = (p + z * z / (2 * n)) / (1 + z * z / n)
    half = z / (1 + z * z / n) * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n))
    lo, hi = wilson_interval(k, n)
    assert float(lo) == pytest.approx(max(0.0, centre - half), abs=1e-12)
    assert float(hi) == pytest.approx(min(1.0, centre + half), abs=1e-12)
    est = MCEstimate.from_counts(k, n)
    assert est.lower <= est.estimate <= est.upper


def test_loglog_fit_recovers_power_law():
    x = np.arange(2, 9)
    f = loglog_fit(x, 3.0 * x**2.5)
    assert f.slope == pytest.approx(2.5) and math.exp(f.intercept) == pytest.approx(3.0)
    assert f.residual_std_error == pytest.approx(0.0, abs=1e-12)
