"""Verification runs: exact audits, exact probability checks, Monte Carlo bound tests.

Every run takes an :class:`ExperimentConfig` and returns a :class:`Report`
holding per-item rows, a summary and a pass flag.  Reports serialize to
CSV (with a ``#`` header echoing the effective config) and to a JSON
summary; both are byte-stable for a fixed config, whatever ``jobs`` is.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field, replace
from fractions import Fraction
from typing import Any, Iterator, Sequence

import numpy as np

from . import __version__
from .batch import stream_evaluate
from .complex import ComplexWithFixed, boundary_length, cancel, fix_size
from .decorate import AbstractDiagram, Decoration, belonging_audit, delta_all, kappa
from .enumerate import (
    DEFAULT_DIAGRAM_CAP,
    EnumerationFilter,
    count_abstract,
    enumerate_abstract,
    enumerate_arc_complexes,
    enumerate_planar,
    face_automorphisms,
    reduced_decoration,
    set_partitions,
)
from .fulfill import partial_probability_exact
from .stats import MCEstimate, loglog_fit, wilson_interval
from .words import DEFAULT_WORD_CAP, relator_count

EXPERIMENTS = ("eq2", "lemma", "prop", "lgl", "isoperimetric", "growth")

# identification budgets used when the config leaves ``budget`` unset; the
# Monte Carlo bound tests instead default to the least violating depth per l
DEFAULT_BUDGETS = {"eq2": 2, "lemma": 2, "isoperimetric": 0}


@dataclass(frozen=True)
class ExperimentConfig:
    m: int = 2
    l_values: tuple[int, ...] = (6,)
    d: float = 0.3
    epsilon: float = 0.05
    K: int = 2
    L: int = 0
    trials: int = 10_000
    seed: int = 0
    budget: int | None = None
    alphabet: str = "a"
    dedup: bool = True
    arcs: bool = True
    max_classes: int = 2
    rse_tol: float = 0.1
    cap_words: int = DEFAULT_WORD_CAP
    cap_diagrams: int = DEFAULT_DIAGRAM_CAP
    jobs: int = 1

    def __post_init__(self):
        object.__setattr__(self, "l_values", tuple(int(x) for x in self.l_values))
        self.validate()

    def validate(self) -> None:
        if self.m < 2:
            raise ValueError(f"m must be >= 2, got {self.m}")
        if not 0 < self.d < 1:
            raise ValueError(f"d must lie in (0, 1), got {self.d}")
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        if not self.l_values or min(self.l_values) < 2:
            raise ValueError(f"every l must be >= 2, got {list(self.l_values)}")
        for name in ("K", "L", "max_classes", "cap_words", "cap_diagrams"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")
        if self.budget is not None and self.budget < 0:
            raise ValueError("budget must be nonnegative")
        if self.jobs < 1:
            raise ValueError("jobs must be >= 1")

    def budget_for(self, name: str, l: int | None = None) -> int:
        if self.budget is not None:
            return self.budget
        if name == "growth":
            return 0 if self.K <= 1 else self.K - 1
        if name in ("prop", "lgl"):
            if l is None:
                raise ValueError(f"{name} budget depends on l")
            return threshold_budget(self, l, violation_factor(self, name))
        return DEFAULT_BUDGETS[name]

    def echo(self, name: str) -> dict[str, Any]:
        """The effective config, minus settings that cannot change results."""
        doc = asdict(self)
        doc.pop("jobs")
        doc["l_values"] = list(self.l_values)
        if name in ("prop", "lgl"):
            doc["budget"] = {str(l): self.budget_for(name, l) for l in self.l_values}
        else:
            doc["budget"] = self.budget_for(name)
        return doc


def violation_factor(cfg: ExperimentConfig, name: str) -> Fraction:
    """``d + 2 eps`` for the per-diagram test, ``d + eps`` for the presentation-level one."""
    d, eps = _exact(cfg.d), _exact(cfg.epsilon)
    return d + 2 * eps if name == "prop" else d + eps


def threshold_budget(cfg: ExperimentConfig, l: int, factor: Fraction) -> int:
    """Least identification count that lets one face (with ``L`` full fixed paths) violate."""
    return max(0, math.ceil(factor * l) - cfg.L * l)


@dataclass
class Report:
    name: str
    config: dict[str, Any]
    columns: tuple[str, ...]
    rows: list[tuple] = field(default_factory=list)
    summary: dict[str, Any] = field(default_factory=dict)
    passed: bool = False
    notes: list[str] = field(default_factory=list)

    def header(self) -> list[str]:
        lines = [f"experiment: {self.name}", f"version: gromovlab {__version__}"]
        lines += [f"{k}: {json.dumps(v)}" for k, v in self.config.items()]
        lines.append(f"passed: {json.dumps(self.passed)}")
        lines += [f"note: {n}" for n in self.notes]
        return lines

    def to_csv(self) -> str:
        buf = io.StringIO()
        for line in self.header():
            buf.write(f"# {line}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for row in self.rows:
            w.writerow([_cell(x) for x in row])
        return buf.getvalue()

    def to_json(self, include_rows: bool = False) -> str:
        doc: dict[str, Any] = {"experiment": self.name, "version": f"gromovlab {__version__}",
                               "config": self.config, "seed": self.config.get("seed"),
                               "passed": self.passed, "summary": self.summary,
                               "notes": self.notes}
        if include_rows:
            doc["columns"] = list(self.columns)
            doc["rows"] = [[_jsonable(x) for x in r] for r in self.rows]
        return json.dumps(doc, indent=1, sort_keys=False) + "\n"


class BoundReport(Report):
    """Report whose rows compare Monte Carlo upper bounds with theoretical bounds."""


def _cell(x):
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}"
    if isinstance(x, float):
        return repr(x)
    return x


def _jsonable(x):
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}"
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    return x


def _exact(x: float) -> Fraction:
    """Decimal reading of a config float, so 0.3 means 3/10."""
    return Fraction(repr(float(x)))


def _filter(cfg: ExperimentConfig, budget: int, **kw) -> EnumerationFilter:
    return EnumerationFilter(max_identifications=budget, dedup=cfg.dedup,
                             alphabet=cfg.alphabet, cap=cfg.cap_diagrams, **kw)


# -- exact audits --------------------------------------------------------------

def run_belonging_audit(cfg: ExperimentConfig) -> Report:
    """``Cancel + N == sum(delta) <= sum(m_i kappa_i)`` on every enumerated diagram."""
    budget = cfg.budget_for("eq2")
    cols = ("l", "K", "n", "paths", "cancel", "N", "sum_delta", "sum_m_kappa", "pass")
    rep = Report("eq2", cfg.echo("eq2"), cols)
    eq_fail = ineq_fail = 0
    per_l = {}
    for l in cfg.l_values:
        count = 0
        for A in enumerate_abstract(cfg.K, cfg.L, l, _filter(cfg, budget)):
            a = belonging_audit(A)
            ok = a.holds
            eq_fail += a.lhs != a.mid
            ineq_fail += a.mid > a.rhs
            rep.rows.append((l, A.K, A.n, len(A.base.paths), cancel(A.complex), fix_size(A.base),
                             a.mid, a.rhs, ok))
            count += 1
        per_l[str(l)] = count
    total = sum(per_l.values())
    rep.summary = {"diagrams": total, "per_l": per_l, "equality_failures": eq_fail,
                   "inequality_failures": ineq_fail}
    rep.passed = total > 0 and eq_fail == 0 and ineq_fail == 0
    if total == 0:
        rep.notes.append("empty population")
    return rep


def run_stepwise_bound(cfg: ExperimentConfig) -> Report:
    """Exact ``p_i <= p_{i-1} (2m-1)^(-kappa_i)`` for diagrams with at most ``max_classes`` classes."""
    budget = cfg.budget_for("lemma")
    q = 2 * cfg.m - 1
    cols = ("l", "diagram", "K", "n", "i", "kappa", "p_prev", "p_i", "bound", "slack", "pass")
    rep = Report("lemma", cfg.echo("lemma"), cols)
    checked = failures = non_monotone = diagrams = 0
    max_slack = 0.0
    for l in cfg.l_values:
        for A in enumerate_abstract(cfg.K, cfg.L, l, _filter(cfg, budget)):
            if A.n > cfg.max_classes:
                continue
            deltas = delta_all(A)
            prev = Fraction(1)
            for i in range(1, A.n + 1):
                p = partial_probability_exact(A, i, cfg.m, cfg.cap_words)
                k = kappa(A, i, deltas)
                bound = prev / q**k
                ok = p <= bound
                slack = float(p / bound) if bound else 0.0
                max_slack = max(max_slack, slack)
                checked += 1
                failures += not ok
                non_monotone += p > prev
                rep.rows.append((l, diagrams, A.K, A.n, i, k, prev, p, bound, slack, ok))
                prev = p
            diagrams += 1
    rep.summary = {"diagrams": diagrams, "checks": checked, "failures": failures,
                   "non_monotone": non_monotone, "max_slack": max_slack}
    rep.passed = checked > 0 and failures == 0 and non_monotone == 0
    if checked == 0:
        rep.notes.append("empty population")
    return rep


# -- Monte Carlo bound tests ----------------------------------------------------

def _violates(A: AbstractDiagram, l: int, factor: Fraction) -> bool:
    return cancel(A.complex) + fix_size(A.base) >= factor * A.K * l


def _arc_diagrams(cfg: ExperimentConfig, l: int, min_arc: int) -> Iterator[AbstractDiagram]:
    """Two faces glued along one arc of at least ``min_arc`` sides, standard decoration."""
    seen = set()
    for Y in enumerate_arc_complexes(l, min_arc=max(min_arc, 1)):
        if Y.code in seen or face_automorphisms(Y) is None:
            continue
        seen.add(Y.code)
        for classes in set_partitions(2):
            if reduced_decoration(Y, classes, (1, 1), (1, 1)):
                yield AbstractDiagram(ComplexWithFixed(Y, ()), Decoration.standard(classes))


def violating_population(cfg: ExperimentConfig, l: int, factor: Fraction,
                         budget: int) -> Iterator[AbstractDiagram]:
    """Diagrams with ``Cancel + N >= factor |Y| l``.

    Side-level enumeration up to ``budget`` identifications, plus (for
    ``K >= 2`` with ``cfg.arcs``) two faces glued along one arc longer than
    the budget, which the side-level enumeration cannot reach.
    """
    for k in range(1, cfg.K + 1):
        need = max(0, math.ceil(factor * k * l) - cfg.L * l)
        if need > budget:
            continue
        filt = _filter(cfg, budget, min_faces=k, min_identifications=need)
        for A in enumerate_abstract(k, cfg.L, l, filt):
            if _violates(A, l, factor):
                yield A
    if cfg.K >= 2 and cfg.arcs:
        for A in _arc_diagrams(cfg, l, budget + 1):
            if _violates(A, l, factor):
                yield A


def _exponent(A: AbstractDiagram, l: int, d: Fraction) -> Fraction:
    """``(|Y| l d - Cancel - N) / |Y|``."""
    return (A.K * l * d - cancel(A.complex) - fix_size(A.base)) / A.K


def run_diagram_bound(cfg: ExperimentConfig) -> BoundReport:
    """Per violating diagram: Wilson upper bound on the fulfillment frequency vs
    ``(2m-1)^((|Y|ld - Cancel - N)/|Y|)`` and the statement form ``(2m-1)^(-eps l)``."""
    q = 2 * cfg.m - 1
    d = _exact(cfg.d)
    factor = violation_factor(cfg, "prop")
    cols = ("l", "K", "n", "cancel", "N", "sum_delta", "sum_m_kappa", "trials", "successes",
            "estimate", "wilson_lower", "wilson_upper", "bound", "eps_implied",
            "statement_bound", "eps_supported", "vacuous", "pass", "statement_pass")
    rep = BoundReport("prop", cfg.echo("prop"), cols)
    failures = statement_failures = vacuous = 0
    worst_ratio = 0.0
    eps_floor = 0.0
    per_l = {}
    for l in cfg.l_values:
        _check_relators(cfg, l)
        budget = cfg.budget_for("prop", l)
        n_l = 0
        for block, counts, _ in stream_evaluate(violating_population(cfg, l, factor, budget),
                                                cfg.m, l, cfg.d, cfg.trials, cfg.seed, cfg.jobs):
            lo, hi = wilson_interval(counts, cfg.trials)
            for A, c, wl, wh in zip(block, counts, np.atleast_1d(lo), np.atleast_1d(hi)):
                a = belonging_audit(A)
                expo = _exponent(A, l, d)
                bound = float(q) ** float(expo)
                eps_i = (Fraction(a.lhs, A.K * l) - d) / 2
                stmt = float(q) ** (-float(eps_i) * l)
                wh, wl = float(wh), float(wl)
                eps_sup = -math.log(wh, q) / l if wh > 0 else math.inf
                vac = bound >= 1
                ok = (not vac) and wh <= bound
                s_ok = (not vac) and wh <= stmt
                vacuous += vac
                failures += (not vac) and not ok
                statement_failures += (not vac) and not s_ok
                if not s_ok and not vac:
                    eps_floor = max(eps_floor, float(eps_i))
                worst_ratio = max(worst_ratio, wh / bound)
                rep.rows.append((l, A.K, A.n, cancel(A.complex), fix_size(A.base), a.mid, a.rhs,
                                 cfg.trials, int(c), int(c) / cfg.trials, wl, wh, bound,
                                 float(eps_i), stmt, eps_sup, vac, ok, s_ok))
                n_l += 1
        per_l[str(l)] = n_l
    total = sum(per_l.values())
    rep.summary = {"violating_diagrams": total, "per_l": per_l, "failures": failures,
                   "statement_failures": statement_failures, "vacuous": vacuous,
                   "max_upper_over_bound": worst_ratio,
                   "statement_holds_above_eps": eps_floor}
    rep.passed = total > 0 and failures == 0 and vacuous == 0
    if total == 0:
        rep.notes.append("no violating diagrams in the population; nothing was tested")
    return rep


def _check_relators(cfg: ExperimentConfig, l: int) -> None:
    if relator_count(cfg.m, l, cfg.d) < 1:
        raise ValueError(f"(2m-1)^(dl) < 1 at l={l}: presentations would be empty")


def _trend_ok(estimates: Sequence[MCEstimate]) -> bool:
    """Nonincreasing within confidence intervals: no later lower bound above an earlier upper."""
    return all(later.lower <= earlier.upper
               for i, earlier in enumerate(estimates) for later in estimates[i + 1:])


def run_presentation_frequency(cfg: ExperimentConfig) -> Report:
    """Frequency of presentations fulfilling some diagram with
    ``Cancel + N >= (d + eps)|Y| l``, per ``l``, with a union bound check."""
    q = 2 * cfg.m - 1
    d, eps = _exact(cfg.d), _exact(cfg.epsilon)
    factor = violation_factor(cfg, "lgl")
    cols = ("l", "violating_diagrams", "trials", "successes", "estimate", "wilson_lower",
            "wilson_upper", "max_bound", "union_bound", "union_vacuous", "union_pass",
            "statement_union_bound")
    rep = Report("lgl", cfg.echo("lgl"), cols)
    estimates = []
    union_failures = 0
    for l in cfg.l_values:
        _check_relators(cfg, l)
        budget = cfg.budget_for("lgl", l)
        anyhit = np.zeros(cfg.trials, dtype=bool)
        n = 0
        max_bound = 0.0
        for block, _, hit in stream_evaluate(violating_population(cfg, l, factor, budget),
                                             cfg.m, l, cfg.d, cfg.trials, cfg.seed, cfg.jobs):
            anyhit |= hit
            n += len(block)
            for A in block:
                max_bound = max(max_bound, float(q) ** float(_exponent(A, l, d)))
        est = MCEstimate.from_counts(int(anyhit.sum()), cfg.trials)
        estimates.append(est)
        union = n * max_bound
        vac = union >= 1
        ok = vac or est.upper <= union
        union_failures += not ok
        stmt = n * float(q) ** (-float(eps) * l)
        rep.rows.append((l, n, est.trials, est.successes, est.estimate, est.lower, est.upper,
                         max_bound, union, vac, ok, stmt))
    trend = _trend_ok(estimates)
    rep.summary = {"trend_nonincreasing": trend, "union_failures": union_failures}
    rep.passed = trend and union_failures == 0
    rep.notes.append("per-diagram bounds use the negative exponent (2m-1)^(-eps l)")
    if all(r[1] == 0 for r in rep.rows):
        rep.notes.append("no violating diagrams at any l; the check is vacuous")
    return rep


def run_isoperimetric(cfg: ExperimentConfig) -> Report:
    """Planar discs: the boundary identity on every disc, and the per-``l`` frequency
    of presentations fulfilling a disc with ``|boundary| < l(1 - 2d - eps)|D|``."""
    d, eps = _exact(cfg.d), _exact(cfg.epsilon)
    coeff = 1 - 2 * d - eps
    cols = ("l", "discs", "identity_failures", "diagrams", "violating", "trials", "successes",
            "estimate", "wilson_lower", "wilson_upper")
    rep = Report("isoperimetric", cfg.echo("isoperimetric"), cols)
    estimates = []
    identity_failures = 0
    for l in cfg.l_values:
        _check_relators(cfg, l)
        discs = list(enumerate_planar(cfg.K, l))
        bad = sum(1 for Y in discs
                  if Y.max_degree > 2 or boundary_length(Y) != l * Y.K - 2 * cancel(Y))
        identity_failures += bad
        decorated = [AbstractDiagram(ComplexWithFixed(Y, ()), Decoration.standard(c))
                     for Y in discs for c in set_partitions(Y.K)
                     if reduced_decoration(Y, c, (1,) * Y.K, (1,) * Y.K)]
        violating = [A for A in decorated if boundary_length(A.complex) < coeff * l * A.K]
        anyhit = np.zeros(cfg.trials, dtype=bool)
        for _, _, hit in stream_evaluate(violating, cfg.m, l, cfg.d, cfg.trials, cfg.seed,
                                         cfg.jobs):
            anyhit |= hit
        est = MCEstimate.from_counts(int(anyhit.sum()), cfg.trials)
        estimates.append(est)
        rep.rows.append((l, len(discs), bad, len(decorated), len(violating), est.trials,
                         est.successes, est.estimate, est.lower, est.upper))
    trend = _trend_ok(estimates)
    rep.summary = {"identity_failures": identity_failures, "trend_nonincreasing": trend}
    rep.passed = identity_failures == 0 and trend
    return rep


# -- growth of the diagram count --------------------------------------------------

def run_growth_fit(cfg: ExperimentConfig) -> Report:
    """Labeled and dedup counts over ``l`` for budgets ``0..budget``; log-log fits."""
    top = cfg.budget_for("growth")
    cols = ("K", "L", "budget", "l", "count", "count_dedup")
    rep = Report("growth", cfg.echo("growth"), cols)
    fits = {}
    closed_form_ok = None
    for b in range(top + 1):
        labeled, dedup = [], []
        for l in cfg.l_values:
            base = EnumerationFilter(max_identifications=b, alphabet=cfg.alphabet,
                                     cap=cfg.cap_diagrams)
            c = count_abstract(cfg.K, cfg.L, l, base)
            cd = count_abstract(cfg.K, cfg.L, l, replace(base, dedup=True))
            labeled.append(c)
            dedup.append(cd)
            rep.rows.append((cfg.K, cfg.L, b, l, c, cd))
        fits[str(b)] = {"labeled": _fit(cfg.l_values, labeled),
                        "dedup": _fit(cfg.l_values, dedup)}
        if cfg.K == 1 and cfg.L == 0 and b == 0:
            closed_form_ok = labeled == [2 * l for l in cfg.l_values]
    main = fits[str(top)]["labeled"]
    rep.summary = {"fits": fits, "closed_form_2l": closed_form_ok}
    rep.passed = (main is not None and main["residual_std_error"] < cfg.rse_tol
                  and closed_form_ok is not False)
    if main is None:
        rep.notes.append("fewer than two nonzero counts; no fit")
    return rep


def _fit(ls: Sequence[int], counts: Sequence[int]) -> dict[str, Any] | None:
    pts = [(l, c) for l, c in zip(ls, counts) if c > 0]
    if len(pts) < 2:
        return None
    f = loglog_fit([p[0] for p in pts], [p[1] for p in pts])
    return {"slope": f.slope, "intercept": f.intercept, "residuals": list(f.residuals),
            "residual_std_error": f.residual_std_error}


RUNNERS = {
    "eq2": run_belonging_audit,
    "lemma": run_stepwise_bound,
    "prop": run_diagram_bound,
    "lgl": run_presentation_frequency,
    "isoperimetric": run_isoperimetric,
    "growth": run_growth_fit,
}


def run(name: str, cfg: ExperimentConfig) -> Report:
    if name not in RUNNERS:
        raise ValueError(f"unknown experiment {name!r}; choose from {', '.join(EXPERIMENTS)}")
    return RUNNERS[name](cfg)
