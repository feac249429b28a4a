import csv
import io
import json
from fractions import Fraction

import pytest

from gromovlab.experiments import (
    ExperimentConfig,
    Report,
    run,
    threshold_budget,
    violating_population,
    violation_factor,
)


@pytest.mark.parametrize("kw", [dict(m=1), dict(d=0), dict(d=1.2), dict(epsilon=0), dict(trials=0),
                                dict(l_values=()), dict(l_values=(1,)), dict(K=-1), dict(budget=-1),
                                dict(jobs=0)])
def test_config_validation(kw):
    with pytest.raises(ValueError):
        ExperimentConfig(**kw)


def test_unknown_experiment():
    with pytest.raises(ValueError):
        run("nope", ExperimentConfig())


def test_budgets_and_echo():
    cfg = ExperimentConfig(l_values=(6, 8, 10), d=0.3, epsilon=0.05)
    assert violation_factor(cfg, "prop") == Fraction(2, 5)
    assert violation_factor(cfg, "lgl") == Fraction(7, 20)
    assert [cfg.budget_for("prop", l) for l in (6, 8, 10)] == [3, 4, 4]
    assert threshold_budget(ExperimentConfig(L=1), 6, Fraction(2, 5)) == 0
    echo = cfg.echo("prop")
    assert "jobs" not in echo and echo["budget"] == {"6": 3, "8": 4, "10": 4}
    assert ExperimentConfig(K=3).budget_for("growth") == 2
    assert ExperimentConfig(budget=5).budget_for("eq2") == 5


def test_violating_population_meets_threshold():
    cfg = ExperimentConfig(l_values=(6,))
    factor = violation_factor(cfg, "prop")
    pop = list(violating_population(cfg, 6, factor, cfg.budget_for("prop", 6)))
    assert pop
    from gromovlab.complex import cancel, fix_size
    assert all(cancel(A.complex) + fix_size(A.base) >= factor * A.K * 6 for A in pop)
    assert any(A.K == 2 and cancel(A.complex) > 3 for A in pop)  # arc family


def test_audit_and_stepwise_small():
    rep = run("eq2", ExperimentConfig(K=2, L=1, l_values=(2, 3)))
    assert rep.passed and rep.summary["diagrams"] == len(rep.rows) > 0
    rep = run("lemma", ExperimentConfig(K=2, l_values=(2, 3)))
    assert rep.passed and rep.summary["failures"] == 0 and rep.summary["checks"] > 0


def test_prop_small():
    rep = run("prop", ExperimentConfig(K=2, l_values=(4,), trials=2000, seed=3))
    assert rep.summary["violating_diagrams"] == len(rep.rows) > 0
    assert rep.summary["failures"] == 0 and rep.passed


def test_prop_empty_population_is_not_a_pass():
    rep = run("prop", ExperimentConfig(K=1, l_values=(4,), budget=0, arcs=False, trials=100))
    assert not rep.passed and rep.notes


def test_lgl_vacuous_note():
    rep = run("lgl", ExperimentConfig(K=1, l_values=(4, 6), budget=0, arcs=False, trials=200))
    assert any("vacuous" in n for n in rep.notes)
    assert all(r[1] == 0 and r[3] == 0 for r in rep.rows)


def test_isoperimetric_small():
    rep = run("isoperimetric", ExperimentConfig(K=2, l_values=(4, 6), d=0.25, trials=1000))
    assert rep.summary["identity_failures"] == 0
    assert [r[0] for r in rep.rows] == [4, 6]


def test_growth():
    rep = run("growth", ExperimentConfig(K=1, l_values=tuple(range(2, 9))))
    assert rep.passed and rep.summary["closed_form_2l"] is True
    assert rep.summary["fits"]["0"]["labeled"]["slope"] == pytest.approx(1.0, abs=1e-9)
    rep = run("growth", ExperimentConfig(K=2, l_values=(2, 3, 4, 5)))
    assert [r[4] for r in rep.rows if r[2] == 1] == [204, 1122, 3688, 9210]


def test_report_formats():
    rep = Report("x", {"seed": 7, "d": 0.3}, ("a", "b", "c"),
                 rows=[(1, Fraction(2, 9), True), (2, 0.1, False)], passed=True, notes=["hi"])
    text = rep.to_csv()
    head = [l for l in text.splitlines() if l.startswith("# ")]
    assert "# seed: 7" in head and "# passed: true" in head and "# note: hi" in head
    body = list(csv.reader(io.StringIO("\n".join(l for l in text.splitlines() if not l.startswith("#")))))
    assert body == [["a", "b", "c"], ["1", "2/9", "true"], ["2", "0.1", "false"]]
    doc = json.loads(rep.to_json(include_rows=True))
    assert doc["seed"] == 7 and doc["rows"][0] == [1, "2/9", True]


def test_reports_do_not_depend_on_jobs():
    cfg = ExperimentConfig(K=2, l_values=(4, 5), trials=1500, seed=11)
    a = run("prop", cfg)
    b = run("prop", ExperimentConfig(**{**cfg.__dict__, "jobs": 2}))
    assert a.to_csv() == b.to_csv() and a.to_json(True) == b.to_json(True)
