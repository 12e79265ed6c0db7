"""Command-line front end.

Every command writes deterministic artifacts.  JSON artifacts embed the
resolved configuration and a schema version; CSV and digit files keep their
fixed formats and get a ``<path>.meta.json`` sidecar carrying the same.

Exit codes: 0 success, 2 usage error, 3 budget exhausted (partial artifacts
are still written and marked incomplete).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .analysis import PrefixTooShort, find_zero_runs, periodicity_scan
from .arith import ResourceError
from .construction import (
    CLAIMED_STRENGTH,
    PAPER_FAITHFUL,
    CrtPlan,
    PlanError,
    SearchExhausted,
    build_plan,
    find_m0,
    verify_plan,
)
from .digits import format_digit_file, parse_digit_file
from .series import DEFAULT_MAX_SCALE, SeriesSpec, certified_prefix, lemma1_census

SCHEMA_VERSION = 1
EXIT_OK, EXIT_USAGE, EXIT_BUDGET = 0, 2, 3

_MODES = {"paper": PAPER_FAITHFUL, "claimed": CLAIMED_STRENGTH,
          PAPER_FAITHFUL: PAPER_FAITHFUL, CLAIMED_STRENGTH: CLAIMED_STRENGTH}


class UsageError(Exception):
    pass


# -- config files -----------------------------------------------------------

def parse_config(text: str) -> dict[str, str]:
    """Flat ``key = value`` lines; ``#`` starts a comment; keys use flag names."""
    out = {}
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise UsageError(f"config line without '=': {raw!r}")
        out[key.strip().replace("-", "_")] = value.strip()
    return out


def format_config(cfg: dict) -> str:
    return "".join(f"{k.replace('_', '-')} = {v}\n" for k, v in sorted(cfg.items()) if v is not None)


# -- parser -----------------------------------------------------------------

def _add_plan_args(p):
    p.add_argument("--plan", help="plan JSON produced by the plan command")
    p.add_argument("--base", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--j0", type=int)
    p.add_argument("--prime-floor", type=int)
    p.add_argument("--mode", choices=sorted(_MODES), default="claimed")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="divseries", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def command(name, help):
        p = sub.add_parser(name, help=help)
        p.add_argument("--config", help="flat key = value file mirroring the flags")
        p.add_argument("--out", help="artifact path (default: stdout)")
        p.add_argument("--threads", type=int, default=1, help="worker cap; never changes outputs")
        p.add_argument("--seed", type=int, default=0)
        return p

    p = command("digits", "certified digit prefix of sum d(n) a_n / b^n")
    p.add_argument("--base", type=int, required=True)
    p.add_argument("--rule", required=True, help="constant:a | alternating | periodic:a,b,.. | explicit:a,b,..")
    p.add_argument("--target", type=int, required=True)
    p.add_argument("--max-scale", type=int, default=DEFAULT_MAX_SCALE)
    p.add_argument("--truncation", type=int)
    p.add_argument("--summary", help="JSON summary path (default: <out>.summary.json)")

    p = command("runs", "zero runs of a digit file")
    p.add_argument("--input", required=True)
    p.add_argument("--min-len", type=int, default=1)

    p = command("plan", "build a CRT plan")
    _add_plan_args(p)

    p = command("verify", "check slot divisibility of a plan over a range of m")
    _add_plan_args(p)
    p.add_argument("--m-start", type=int, default=0)
    p.add_argument("--m-stop", type=int, default=100)
    p.add_argument("--factor-bound", type=int)

    p = command("find-m0", "smallest m whose exceptional slot is prime")
    _add_plan_args(p)
    p.add_argument("--rule", default="constant:1")
    p.add_argument("--m-limit", type=int, default=10_000)
    p.add_argument("--tail-rule", choices=("off", "strict"), default="off")
    p.add_argument("--budget", type=int, default=4096)

    p = command("census", "tail census over m < m-limit")
    _add_plan_args(p)
    p.add_argument("--rule", default="constant:1")
    p.add_argument("--m-limit", type=int, default=50)
    p.add_argument("--budget", type=int, default=4096)

    p = command("falsify", "periodicity scan of a digit file")
    p.add_argument("--input", required=True)
    p.add_argument("--max-preperiod", type=int, required=True)
    p.add_argument("--max-period", type=int, required=True)
    p.add_argument("--length", type=int)
    return parser


def _config_path(argv) -> str | None:
    for i, tok in enumerate(argv):
        if tok == "--config" and i + 1 < len(argv):
            return argv[i + 1]
        if tok.startswith("--config="):
            return tok.split("=", 1)[1]
    return None


def _resolve(argv) -> argparse.Namespace:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    path = _config_path(argv)
    command = next((t for t in argv if t in COMMANDS), None)
    if path and command:
        try:
            cfg = parse_config(Path(path).read_text())
        except OSError as exc:
            parser.error(f"cannot read config: {exc}")
        except UsageError as exc:
            parser.error(str(exc))
        # the file supplies defaults; explicit flags still win
        sub = parser._subparsers._group_actions[0].choices[command]
        actions = {a.dest: a for a in sub._actions if a.dest not in ("help", "config")}
        cfg.pop("command", None)
        unknown = set(cfg) - set(actions)
        if unknown:
            parser.error(f"unknown config keys: {', '.join(sorted(unknown))}")
        typed = {}
        for dest, value in cfg.items():
            a = actions[dest]
            try:
                typed[dest] = a.type(value) if a.type else value
            except ValueError:
                parser.error(f"bad value for {dest}: {value!r}")
            a.required = False
        sub.set_defaults(**typed)
    return parser.parse_args(argv)


def _config_of(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k != "config"}


# -- output helpers ---------------------------------------------------------

def _emit(args, text: str, kind: str, extra: dict | None = None) -> None:
    if args.out:
        Path(args.out).write_text(text)
        if kind != "json":
            meta = {"schema_version": SCHEMA_VERSION, "artifact": kind, "config": _config_of(args)}
            meta.update(extra or {})
            Path(args.out + ".meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    else:
        sys.stdout.write(text)


def _json(args, payload: dict) -> str:
    doc = {"schema_version": SCHEMA_VERSION, "config": _config_of(args)}
    doc.update(payload)
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _plan_from(args) -> CrtPlan:
    if args.plan:
        data = json.loads(Path(args.plan).read_text())
        return CrtPlan.from_json(data.get("plan", data))
    missing = [f for f in ("base", "k", "j0", "prime_floor") if getattr(args, f) is None]
    if missing:
        raise UsageError(f"missing plan parameters: {', '.join('--' + m.replace('_', '-') for m in missing)}")
    return build_plan(args.base, args.k, args.j0, args.prime_floor, _MODES[args.mode])


def _spec(base, rule) -> SeriesSpec:
    try:
        return SeriesSpec.parse(base, rule)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


# -- commands ---------------------------------------------------------------

def cmd_digits(args) -> int:
    spec = _spec(args.base, args.rule)
    res = certified_prefix(spec, args.target, max_scale=args.max_scale, truncation=args.truncation)
    certified = None if res.exact else res.certified_length
    _emit(args, format_digit_file(res.digits, certified), "digits", {"complete": res.complete})
    summary = _json(args, {
        "M": res.truncation,
        "tail_bound": [str(res.tail_bound.numerator), str(res.tail_bound.denominator)],
        "certified_length": "exact" if res.exact else res.certified_length,
        "complete": res.complete,
    })
    path = args.summary or (args.out + ".summary.json" if args.out else None)
    if path:
        Path(path).write_text(summary)
    return EXIT_OK if res.complete else EXIT_BUDGET


def cmd_runs(args) -> int:
    ds, certified = parse_digit_file(Path(args.input).read_text())
    # exact files never end in a zero, so the boundary flag only bites when certified
    runs = find_zero_runs(ds, args.min_len, certified_length=certified)
    lines = ["start,length,preceded_by_nonzero,within_certified"]
    for r in runs:
        lines.append(f"{r.start},{r.length},{str(r.preceded_by_nonzero).lower()},"
                     f"{str(r.within_certified).lower()}")
    _emit(args, "\n".join(lines) + "\n", "runs")
    return EXIT_OK


def cmd_plan(args) -> int:
    plan = _plan_from(args)
    _emit(args, _json(args, {"plan": json.loads(plan.to_json())}), "json")
    return EXIT_OK


def cmd_verify(args) -> int:
    plan = _plan_from(args)
    rep = verify_plan(plan, range(args.m_start, args.m_stop), factor_bound=args.factor_bound,
                      workers=args.threads)
    _emit(args, rep.to_csv(), "verify", {
        "passed": rep.passed,
        "coprime": rep.coprime,
        "unverified": len(rep.unverified),
        "plan": json.loads(plan.to_json()),
    })
    return EXIT_OK


def cmd_find_m0(args) -> int:
    plan = _plan_from(args)
    spec = _spec(plan.base, args.rule)
    try:
        cert = find_m0(plan, spec, args.m_limit, args.tail_rule, budget=args.budget)
    except SearchExhausted as exc:
        _emit(args, _json(args, {
            "complete": False,
            "plan": json.loads(plan.to_json()),
            "error": str(exc),
            "primality_failures": exc.primality_failures,
            "divisibility_failures": exc.divisibility_failures,
            "tail_failures": exc.tail_failures,
        }), "json")
        return EXIT_BUDGET
    payload = cert.to_dict()
    payload["complete"] = True
    _emit(args, _json(args, payload), "json")
    return EXIT_OK


def cmd_census(args) -> int:
    plan = _plan_from(args)
    spec = _spec(plan.base, args.rule)
    rep = lemma1_census(plan, spec, args.m_limit, budget=args.budget, workers=args.threads)
    _emit(args, rep.to_csv(), "census", {
        "exceedances": rep.exceedances,
        "unresolved": rep.unresolved,
        "counting_bound_shape": rep.shape_value(),
        "plan": json.loads(plan.to_json()),
    })
    return EXIT_OK if rep.unresolved == 0 else EXIT_BUDGET


def cmd_falsify(args) -> int:
    ds, certified = parse_digit_file(Path(args.input).read_text())
    if certified is None:
        length = args.length or max(len(ds.digits), args.max_preperiod + 2 * args.max_period)
    else:
        length = min(args.length or certified, certified)
    verdict = periodicity_scan(ds, args.max_preperiod, args.max_period, length=length)
    doc = json.loads(verdict.to_json())
    _emit(args, _json(args, doc | {"summary": verdict.summary()}), "json")
    return EXIT_OK


COMMANDS = {
    "digits": cmd_digits,
    "runs": cmd_runs,
    "plan": cmd_plan,
    "verify": cmd_verify,
    "find-m0": cmd_find_m0,
    "census": cmd_census,
    "falsify": cmd_falsify,
}


def main(argv=None) -> int:
    args = _resolve(argv)
    try:
        return COMMANDS[args.command](args)
    except (UsageError, PlanError, PrefixTooShort) as exc:
        print(f"divseries {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ResourceError as exc:
        print(f"divseries {args.command}: {exc}", file=sys.stderr)
        return EXIT_BUDGET


if __name__ == "__main__":
    sys.exit(main())
