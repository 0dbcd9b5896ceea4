"""Command-line entry point: ``matchstab <verb> ...``.

Exit codes: 0 success, 1 a checked property failed, 2 usage or parse
error, 3 enumeration cap exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .audit import AuditConfig, TIERS, run_audit, separation_coverage
from .association import to_associated_instance, to_associated_matching
from .concepts import CONCEPTS, DETERMINISTIC_CONCEPTS, check_concept, evaluate_all
from .corpus import corpus, run_case
from .decomposition import bvn_decompose, decompose_over, enumerate_realizable
from .deterministic import check_weakly_stable_det
from .errors import CapExceeded, ParseError, TierError
from .instance import ModelTier, parse_instance, render_instance, resolve_tier
from .matching import enumerate_deterministic, format_matrix, parse_matching, render_matching

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_CAP = 0, 1, 2, 3


class _UsageError(Exception):
    pass


def _tier(name: str) -> ModelTier:
    try:
        return ModelTier.parse(name)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise _UsageError(f"cannot read {path}: {exc.strerror}") from None


def _load(args, need_matching: bool = True):
    inst = parse_instance(_read(args.instance))
    tier = resolve_tier(inst, args.tier)
    p = None
    if need_matching and args.matching:
        p = parse_matching(_read(args.matching), inst, tier)
    return inst, tier, p


def _emit(args, text: str) -> None:
    if not text.endswith("\n"):
        text += "\n"
    if getattr(args, "out", None):
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _matrix_lines(p) -> list[str]:
    rows = format_matrix(p)
    width = max((len(x) for row in rows for x in row), default=1)
    return ["  " + " ".join(x.rjust(width) for x in row) for row in rows]


# ---------------------------------------------------------------- verbs

def cmd_check(args) -> int:
    inst, tier, p = _load(args)
    if args.concept == "all":
        verdicts = list(evaluate_all(inst, p, tier, args.cap).values())
    else:
        verdicts = [check_concept(inst, p, args.concept, tier, args.cap)]
    if args.json:
        _emit(args, json.dumps({"tier": tier.label, "verdicts": [v.to_dict(inst) for v in verdicts]}, indent=2))
    else:
        lines = [f"tier: {tier.label}"]
        for v in verdicts:
            lines.append(f"{v.concept:22s} {'holds' if v.holds else 'fails'}")
            if v.witness is not None:
                w = v.witness.to_dict(inst)
                who = " ".join(f"{k}={w[k]}" for k in ("agent", "other_agent", "object", "other_object") if k in w)
                lines.append(f"    witness {w['kind']}: {who} values={' '.join(w['values'])}")
            if v.certificate is not None:
                lines.append("    certificate:")
                for wgt, q in v.certificate.parts:
                    lines.append(f"      {wgt} x")
                    lines.extend("    " + ln for ln in _matrix_lines(q))
            for k, x in v.values.items():
                if k != "unstable_matching":
                    lines.append(f"    {k}: {x}")
        _emit(args, "\n".join(lines))
    if args.assert_ and not all(v.holds for v in verdicts):
        return EXIT_FAIL
    return EXIT_OK


def cmd_decompose(args) -> int:
    inst, tier, p = _load(args)
    if args.stable:
        stable = [q for q in enumerate_realizable(p, tier, args.cap)
                  if check_weakly_stable_det(inst, q, tier) is None]
        d = decompose_over(stable, p) if stable else None
        if d is None:
            print("no decomposition into weakly stable matchings exists", file=sys.stderr)
            return EXIT_FAIL
    else:
        d = bvn_decompose(p)
    if args.json:
        _emit(args, json.dumps(d.to_json(), indent=2))
    else:
        lines = []
        for w, q in d.parts:
            lines.append(f"weight {w}")
            lines.append(render_matching(q, inst).rstrip("\n"))
        _emit(args, "\n".join(lines))
    return EXIT_OK


def cmd_transform(args) -> int:
    inst, tier, p = _load(args)
    a_inst, amap = to_associated_instance(inst)
    if args.json:
        d = {"instance": render_instance(a_inst)}
        if p is not None:
            d["matching"] = format_matrix(to_associated_matching(p, amap))
        _emit(args, json.dumps(d, indent=2))
        return EXIT_OK
    text = render_instance(a_inst)
    if p is not None:
        text += "---\n" + render_matching(to_associated_matching(p, amap), a_inst)
    _emit(args, text)
    return EXIT_OK


def cmd_enumerate(args) -> int:
    inst, tier, _ = _load(args, need_matching=False)
    qs = enumerate_deterministic(inst, args.stable, tier, args.cap)
    if args.json:
        _emit(args, json.dumps([[[int(x) for x in row] for row in q.cells] for q in qs], indent=2))
    else:
        blocks = [render_matching(q, inst).rstrip("\n") for q in qs]
        _emit(args, f"# {len(qs)} matchings\n" + "\n---\n".join(blocks))
    return EXIT_OK


def cmd_audit(args) -> int:
    tiers = tuple(args.tiers) if args.tiers else TIERS
    cfg = AuditConfig(seed=args.seed, count=args.count, n_range=(1, args.max_n), m_range=(1, args.max_n),
                      tiers=tiers, transform=not args.no_transform, include_corpus=args.corpus)
    report = run_audit(cfg)
    _emit(args, report.to_json() if args.json else report.to_table())
    return EXIT_OK if report.ok else EXIT_FAIL


def cmd_examples(args) -> int:
    cases = corpus()
    if args.list:
        _emit(args, "\n".join(f"{c.id:8s} {c.tier.label:12s} {c.summary}" for c in cases.values()))
        return EXIT_OK
    if args.coverage:
        cov = separation_coverage()
        if args.json:
            _emit(args, json.dumps(cov, indent=2))
        else:
            _emit(args, "\n".join(f"{k:50s} {', '.join(v) or '-'}" for k, v in cov.items()))
        return EXIT_OK if all(cov.values()) else EXIT_FAIL
    if args.id:
        if args.id not in cases:
            raise _UsageError(f"unknown example {args.id!r}; see --list")
        cases = {args.id: cases[args.id]}
    outcomes = [o for c in cases.values() for o in run_case(c)]
    if args.json:
        _emit(args, json.dumps([
            {"case": o.case, "key": o.key, "ok": o.ok, "expected": repr(o.expected),
             "actual": repr(o.actual), "witness": o.witness}
            for o in outcomes
        ], indent=2))
    else:
        bad = sum(not o.ok for o in outcomes)
        _emit(args, "\n".join(o.line() for o in outcomes) + f"\n{len(outcomes) - bad}/{len(outcomes)} expectations reproduced")
    return EXIT_OK if all(o.ok for o in outcomes) else EXIT_FAIL


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="matchstab", description="Exact stability checks for random matchings.")
    sub = parser.add_subparsers(dest="verb", required=True, metavar="VERB")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--out", metavar="FILE", help="write output to FILE instead of stdout")

    files = argparse.ArgumentParser(add_help=False)
    files.add_argument("--instance", required=True, metavar="FILE")
    files.add_argument("--tier", type=_tier, default=None, help="Base, WeakOrders or Generalized")
    files.add_argument("--cap", type=int, default=None, help="enumeration cap on n+m (default 12 or MATCHSTAB_CAP)")

    p = sub.add_parser("check", parents=[common, files], help="evaluate stability concepts")
    p.add_argument("--matching", required=True, metavar="FILE")
    p.add_argument("--concept", default="all", type=lambda s: s.replace("-", "_"),
                   choices=("all",) + CONCEPTS + DETERMINISTIC_CONCEPTS)
    p.add_argument("--assert", dest="assert_", action="store_true", help="exit 1 if any concept fails")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("decompose", parents=[common, files], help="decompose into deterministic matchings")
    p.add_argument("--matching", required=True, metavar="FILE")
    p.add_argument("--stable", action="store_true", help="use weakly stable matchings only")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("transform", parents=[common, files], help="build the square companion instance")
    p.add_argument("--matching", metavar="FILE")
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("enumerate", parents=[common, files], help="list deterministic matchings")
    p.add_argument("--stable", action="store_true")
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("audit", parents=[common], help="randomised implication audit")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=500, help="pairs per tier")
    p.add_argument("--max-n", type=int, default=4, help="largest number of agents and of objects")
    p.add_argument("--tier", dest="tiers", type=_tier, action="append", help="restrict to a tier (repeatable)")
    p.add_argument("--no-transform", action="store_true", help="skip companion-instance checks")
    p.add_argument("--corpus", action="store_true", help="also replay the worked examples")
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("examples", parents=[common], help="replay the worked examples")
    p.add_argument("--id")
    p.add_argument("--list", action="store_true")
    p.add_argument("--coverage", action="store_true", help="show which examples separate each non-implication")
    p.set_defaults(func=cmd_examples)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (TierError, _UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CapExceeded as exc:
        print(f"cap exceeded: {exc}", file=sys.stderr)
        return EXIT_CAP
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
