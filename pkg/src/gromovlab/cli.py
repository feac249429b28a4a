"""Command-line entry point.

Exit codes: 0 all checks pass, 1 usage or config error, 2 a check failed,
3 a size cap fired.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .complex import boundary_length, cancel, fix_size
from .decorate import ReductionPairError, belonging_audit, delta_all, has_reduction_pair, kappa
from .enumerate import EnumerationFilter, count_abstract, enumerate_abstract
from .experiments import EXPERIMENTS, ExperimentConfig, run
from .fulfill import find_fulfillment
from .serialize import DiagramParseError, diagram_from_json, write_ndjson
from .words import DEFAULT_WORD_CAP, Presentation, SizeCapError, format_word, sample_presentation

EXIT_OK, EXIT_USAGE, EXIT_CHECK, EXIT_CAP = 0, 1, 2, 3

DEFAULT_L = {
    "eq2": (2, 3, 4, 5),
    "lemma": (2, 3, 4),
    "prop": (6, 8, 10),
    "lgl": (4, 6, 8, 10),
    "isoperimetric": (4, 6, 8, 10, 12),
    "growth": (2, 3, 4, 5, 6),
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def parse_l_range(text: str) -> tuple[int, ...]:
    """``"6,8,10"``, ``"2:8"`` (inclusive) or ``"4:12:2"``."""
    try:
        if ":" in text:
            parts = [int(x) for x in text.split(":")]
            if len(parts) == 2:
                parts.append(1)
            lo, hi, step = parts
            if step < 1 or hi < lo:
                raise ValueError
            return tuple(range(lo, hi + 1, step))
        return tuple(int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad l-range {text!r}; use 2:8, 4:12:2 or 6,8,10") from None


def _fresh_seed() -> int:
    return int(np.random.SeedSequence().entropy % (1 << 63))


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--m", type=int, default=2, help="generator count (default 2)")
    p.add_argument("--d", type=float, default=0.3, help="density (default 0.3)")
    p.add_argument("--seed", type=int, default=None, help="master seed; generated and echoed if omitted")
    p.add_argument("--out", type=Path, default=None, help="output file (default stdout)")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="gromovlab", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"gromovlab {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("sample", help="sample a random presentation")
    _common(s)
    s.add_argument("--l", type=int, required=True)
    s.add_argument("--strict", action="store_true", help="reject duplicate relators")
    s.add_argument("--cyclic", action="store_true", help="sample cyclically reduced relators")

    a = sub.add_parser("analyze", help="cancellation statistics of a diagram file")
    a.add_argument("diagram", type=Path)
    a.add_argument("--presentation", type=Path, default=None,
                   help="also search for a fulfillment by this presentation")
    a.add_argument("--format", choices=("text", "json"), default="text")

    e = sub.add_parser("experiment", help="run a verification experiment")
    e.add_argument("name", choices=EXPERIMENTS)
    _common(e)
    g = e.add_mutually_exclusive_group()
    g.add_argument("--l", type=int, default=None)
    g.add_argument("--l-range", type=parse_l_range, default=None)
    e.add_argument("--epsilon", type=float, default=0.05)
    e.add_argument("--K", type=int, default=2)
    e.add_argument("--L", type=int, default=0)
    e.add_argument("--trials", type=int, default=10_000)
    e.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    e.add_argument("--budget", type=int, default=None, help="max identifications per complex")
    e.add_argument("--alphabet", default="a", help="letters allowed on fixed paths")
    e.add_argument("--labeled", action="store_true", help="no isomorphism dedup")
    e.add_argument("--no-arcs", action="store_true", help="skip the two-face arc family")
    e.add_argument("--max-classes", type=int, default=2)
    e.add_argument("--rse-tol", type=float, default=0.1)
    e.add_argument("--cap-words", type=int, default=DEFAULT_WORD_CAP)
    e.add_argument("--cap-diagrams", type=int, default=EnumerationFilter.cap)
    e.add_argument("--format", choices=("csv", "json"), default="csv")

    n = sub.add_parser("enumerate", help="stream abstract diagrams as NDJSON")
    _enum_flags(n)
    n.add_argument("--l", type=int, required=True)
    n.add_argument("--out", type=Path, default=None)

    c = sub.add_parser("count", help="count abstract diagrams as CSV rows K,L,l,count")
    _enum_flags(c)
    c.add_argument("--l-range", type=parse_l_range, required=True)
    c.add_argument("--out", type=Path, default=None)
    return p


def _enum_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--K", type=int, default=2)
    p.add_argument("--L", type=int, default=0)
    p.add_argument("--budget", type=int, default=1)
    p.add_argument("--alphabet", default="a")
    p.add_argument("--dedup", action="store_true")
    p.add_argument("--cap-diagrams", type=int, default=EnumerationFilter.cap)


def _emit(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text)


def cmd_sample(args) -> int:
    seed = args.seed if args.seed is not None else _fresh_seed()
    if args.seed is None:
        print(f"seed: {seed}", file=sys.stderr)
    pres = sample_presentation(args.m, args.l, args.d, np.random.default_rng(seed),
                               strict=args.strict, cyclic=args.cyclic)
    for i, j in pres.duplicates:
        print(f"warning: relators {i} and {j} coincide", file=sys.stderr)
    for i in pres.proper_powers:
        print(f"warning: relator {i} ({format_word(pres.relators[i])}) is a proper power",
              file=sys.stderr)
    _emit(pres.to_json(seed=seed, version=f"gromovlab {__version__}") + "\n", args.out)
    return EXIT_OK


def analyze_diagram(A) -> dict:
    Y = A.complex
    out = {"K": Y.K, "l": Y.l, "cancel": cancel(Y), "N": fix_size(A.base),
           "boundary_length": boundary_length(Y), "n": A.n,
           "m_i": list(A.multiplicities), "reduction_pair": has_reduction_pair(A)}
    try:
        deltas = delta_all(A)
    except ReductionPairError as exc:
        out["repeated_slot"] = str(exc)
        return out
    out["delta"] = deltas
    out["kappa"] = [kappa(A, i, deltas) for i in range(1, A.n + 1)]
    out["eq2"] = list(belonging_audit(A))
    return out


def cmd_analyze(args) -> int:
    A = diagram_from_json(args.diagram.read_text())
    stats = analyze_diagram(A)
    if args.presentation is not None:
        pres = Presentation.from_json(args.presentation.read_text())
        if pres.l != A.l:
            raise ValueError(f"presentation has l={pres.l}, diagram has l={A.l}")
        try:
            found = find_fulfillment(A, pres.relators)
        except ReductionPairError:
            found = None
        stats["fulfillment"] = None if found is None else json.loads(found.to_json())
    if args.format == "json":
        print(json.dumps(stats))
    else:
        for k, v in stats.items():
            print(f"{k}: {json.dumps(v)}")
    return EXIT_OK


def cmd_experiment(args) -> int:
    seed = args.seed if args.seed is not None else _fresh_seed()
    if args.seed is None:
        print(f"seed: {seed}", file=sys.stderr)
    if args.l is not None:
        ls = (args.l,)
    else:
        ls = args.l_range or DEFAULT_L[args.name]
    cfg = ExperimentConfig(m=args.m, l_values=ls, d=args.d, epsilon=args.epsilon, K=args.K,
                           L=args.L, trials=args.trials, seed=seed, budget=args.budget,
                           alphabet=args.alphabet, dedup=not args.labeled,
                           arcs=not args.no_arcs, max_classes=args.max_classes,
                           rse_tol=args.rse_tol, cap_words=args.cap_words,
                           cap_diagrams=args.cap_diagrams, jobs=max(1, args.jobs))
    report = run(args.name, cfg)
    if args.format == "json":
        _emit(report.to_json(include_rows=True), args.out)
    else:
        _emit(report.to_csv(), args.out)
        if args.out is not None:
            args.out.with_name(args.out.name + ".summary.json").write_text(report.to_json())
    status = "PASS" if report.passed else "FAIL"
    print(f"{args.name}: {status} {json.dumps(report.summary)}", file=sys.stderr)
    return EXIT_OK if report.passed else EXIT_CHECK


def _enum_filter(args) -> EnumerationFilter:
    return EnumerationFilter(max_identifications=args.budget, dedup=args.dedup,
                             alphabet=args.alphabet, cap=args.cap_diagrams)


def cmd_enumerate(args) -> int:
    stream = enumerate_abstract(args.K, args.L, args.l, _enum_filter(args))
    if args.out is None:
        write_ndjson(stream, sys.stdout)
    else:
        with args.out.open("w") as fh:
            write_ndjson(stream, fh)
    return EXIT_OK


def cmd_count(args) -> int:
    lines = ["K,L,l,count"]
    for l in args.l_range:
        lines.append(f"{args.K},{args.L},{l},{count_abstract(args.K, args.L, l, _enum_filter(args))}")
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


COMMANDS = {"sample": cmd_sample, "analyze": cmd_analyze, "experiment": cmd_experiment,
            "enumerate": cmd_enumerate, "count": cmd_count}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SizeCapError as exc:
        print(f"cap exceeded: {exc}", file=sys.stderr)
        return EXIT_CAP
    except DiagramParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
