"""Command line: train, parse, eval, oracle-audit, stats."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .audit import FAULTS, exhaustive_audit, sampled_audit
from .evaluate import EvalError, evaluate, stats
from .oracle import ExplorationPolicy
from .scorer import DEFAULT_BITS, LinearModel, ModelFormatError
from .trainer import ConfigError, TrainConfig, parse_many, train
from .transitions import format_transitions
from .treebank import (DEFAULT_UNARY_CAP, HeadRuleTable, PTBParseError, Token, read_ptb,
                       write_ptb)

EXIT_OK, EXIT_IO, EXIT_USAGE, EXIT_AUDIT = 0, 1, 2, 3

log = logging.getLogger("nbsr")


class InputError(ValueError):
    pass


def _read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    return Path(path).read_text(encoding="utf-8")


def _open_out(path: str | None):
    if path in (None, "-"):
        return sys.stdout
    return open(path, "w", encoding="utf-8")


def read_tagged(text: str) -> list[list[Token]]:
    """One sentence per line, tokens written ``form_POS``; blank lines skipped."""
    out = []
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        sent = []
        for tok in line.split():
            form, sep, pos = tok.rpartition("_")
            if not sep or not form or not pos:
                raise InputError(f"line {lineno}: token {tok!r} is not form_POS")
            try:
                sent.append(Token(form, pos))
            except ValueError as e:
                raise InputError(f"line {lineno}: {e}") from e
        out.append(sent)
    return out


def read_config(path: str) -> dict[str, str]:
    """``key = value`` lines; ``#`` starts a comment."""
    values = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise InputError(f"{path}:{lineno}: expected key=value")
        values[key.strip().replace("-", "_")] = value.strip()
    return values


def _load_rules(path: str | None) -> HeadRuleTable:
    return HeadRuleTable.from_file(path) if path else HeadRuleTable.english()


# ---------------------------------------------------------------------------
# subcommands

def cmd_train(args) -> int:
    try:
        policy = ExplorationPolicy.parse(args.explore)
    except ValueError as e:
        raise ConfigError(str(e)) from e
    if args.oracle == "static" and (policy.margin is not None or policy.probability is not None):
        log.warning("exploration policy ignored by the static oracle")
    config = TrainConfig(oracle=args.oracle, system=args.system, policy=policy,
                         epochs=args.epochs, seed=args.seed, unary_cap=args.unary_cap,
                         bits=args.bits)
    config.validate()
    if args.system == "binary":
        config.head_rules = _load_rules(args.head_rules)
    corpus = read_ptb(_read_text(args.treebank))
    model, report = train(corpus, config)
    model.save(args.output)
    print(report.format())
    if args.report:
        Path(args.report).write_text(json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n")
    return EXIT_OK


def cmd_parse(args) -> int:
    model = LinearModel.load(args.model)
    sentences = read_tagged(_read_text(args.input))
    results = parse_many(model, sentences, args.threads)
    out = _open_out(args.output)
    try:
        for r in results:
            out.write(write_ptb(r.tree) + "\n")
    finally:
        if out is not sys.stdout:
            out.close()
    if args.trace:
        trace = _open_out(args.trace_output) if args.trace_output else sys.stderr
        try:
            for k, r in enumerate(results):
                trace.write(f"# sentence {k + 1}\n{format_transitions(r.transitions)}\n")
        finally:
            if trace not in (sys.stdout, sys.stderr):
                trace.close()
    return EXIT_OK


def cmd_eval(args) -> int:
    gold = read_ptb(_read_text(args.gold))
    pred = read_ptb(_read_text(args.pred))
    result = evaluate(gold, pred, by_arity=args.by_arity)
    if args.json:
        print(json.dumps(result.to_records(), indent=2))
    else:
        print(result.format())
    return EXIT_OK


def cmd_oracle_audit(args) -> int:
    letters = [chr(ord("A") + k) for k in range(max(args.labels, args.exhaustive_labels) + 1)]
    loss_fn = FAULTS[args.fault]
    reports = []
    if args.mode in ("exhaustive", "both"):
        reports.append(exhaustive_audit(args.exhaustive_max_n,
                                        labels=letters[:args.exhaustive_labels], depth=args.depth,
                                        extra_unaries=args.extra_unaries, unary_cap=args.unary_cap,
                                        loss_fn=loss_fn))
    if args.mode in ("sampled", "both"):
        reports.append(sampled_audit(args.samples, args.max_n, labels=letters[:args.labels],
                                     distractor=letters[args.labels], seed=args.seed,
                                     unary_cap=args.unary_cap, loss_fn=loss_fn))
    failed = False
    for report in reports:
        print(report.summary())
        if not report.ok:
            failed = True
            m = report.mismatches[0]
            print(f"counterexample: tree {m.tree}")
            print(f"  loss {m.loss}, brute force {m.brute_force}, after:")
            for t in m.transitions:
                print(f"    {t}")
    if args.json:
        Path(args.json).write_text(json.dumps([r.to_dict() for r in reports], indent=2) + "\n")
    return EXIT_AUDIT if failed else EXIT_OK


def cmd_stats(args) -> int:
    corpus = read_ptb(_read_text(args.treebank))
    rules = _load_rules(args.head_rules)
    systems = ["nonbinary", "binary"] if args.system == "both" else [args.system]
    print(f"sentences {len(corpus)}")
    for name in systems:
        s = stats(corpus, name, rules)
        print(f"{name:10s} tran./sent. {s.mean:.2f}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing

def build_parser() -> tuple[argparse.ArgumentParser, dict[str, argparse.ArgumentParser]]:
    parser = argparse.ArgumentParser(prog="nbsr", description="Non-binary shift-reduce constituent parser")
    parser.add_argument("--config", help="key=value file with defaults for the subcommand flags")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    subs = {}

    p = subs["train"] = sub.add_parser("train", help="train a model on a PTB treebank")
    p.add_argument("treebank")
    p.add_argument("-o", "--output", required=True, help="model file")
    p.add_argument("--system", choices=("nonbinary", "binary"), default="nonbinary")
    p.add_argument("--oracle", choices=("static", "dynamic"), default="static")
    p.add_argument("--explore", default="none", help='e.g. "aggr=1.0,reg=0.1"')
    p.add_argument("--epochs", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--head-rules", help="head rule file (binary system)")
    p.add_argument("--unary-cap", type=int, default=DEFAULT_UNARY_CAP)
    p.add_argument("--bits", type=int, default=DEFAULT_BITS, help="log2 of the weight table size")
    p.add_argument("--report", help="write the training report as JSON")
    p.set_defaults(func=cmd_train)

    p = subs["parse"] = sub.add_parser("parse", help="parse form_POS sentences")
    p.add_argument("input", nargs="?", default="-")
    p.add_argument("-m", "--model", required=True)
    p.add_argument("-o", "--output")
    p.add_argument("--trace", action="store_true", help="also emit each transition sequence")
    p.add_argument("--trace-output", help="file for --trace (default stderr)")
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=cmd_parse)

    p = subs["eval"] = sub.add_parser("eval", help="labeled bracketing scores")
    p.add_argument("gold")
    p.add_argument("pred")
    p.add_argument("--by-arity", action="store_true")
    p.add_argument("--json", action="store_true", help="machine-readable records")
    p.add_argument("--threads", type=int, default=1, help="accepted for symmetry; scoring is cheap")
    p.set_defaults(func=cmd_eval)

    p = subs["oracle-audit"] = sub.add_parser("oracle-audit", help="check the oracle against brute force")
    p.add_argument("--mode", choices=("sampled", "exhaustive", "both"), default="sampled")
    p.add_argument("--max-n", type=int, default=6, help="longest sampled sentence")
    p.add_argument("--labels", type=int, default=3, help="gold labels in sampled trees")
    p.add_argument("--exhaustive-max-n", type=int, default=4)
    p.add_argument("--exhaustive-labels", type=int, default=2)
    p.add_argument("--depth", type=int, default=8, help="exhaustive search depth")
    p.add_argument("--extra-unaries", type=int, default=None)
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--unary-cap", type=int, default=DEFAULT_UNARY_CAP)
    p.add_argument("--fault", choices=sorted(FAULTS), default="none",
                   help="inject a known bug to check that the audit catches it")
    p.add_argument("--json", help="write the report as JSON")
    p.set_defaults(func=cmd_oracle_audit)

    p = subs["stats"] = sub.add_parser("stats", help="transitions per sentence")
    p.add_argument("treebank")
    p.add_argument("--system", choices=("nonbinary", "binary", "both"), default="both")
    p.add_argument("--head-rules")
    p.set_defaults(func=cmd_stats)
    return parser, subs


def _apply_config(parser, subs, argv: list[str]) -> None:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, rest = pre.parse_known_args(argv)
    if not known.config:
        return
    values = read_config(known.config)
    command = next((a for a in rest if a in subs), None)
    if command is None:
        return
    sp = subs[command]
    actions = {a.dest: a for a in sp._actions}
    defaults = {}
    for key, value in values.items():
        action = actions.get(key)
        if action is None or key in ("help", "func"):
            parser.error(f"config file: unknown option {key!r} for {command}")
        if isinstance(action, argparse._StoreTrueAction):
            defaults[key] = value.lower() in ("1", "true", "yes", "on")
        elif action.option_strings:
            defaults[key] = value
        else:
            parser.error(f"config file: {key!r} is positional; give it on the command line")
    sp.set_defaults(**defaults)


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser, subs = build_parser()
    try:
        _apply_config(parser, subs, argv)
    except (OSError, InputError) as e:
        print(f"nbsr: {e}", file=sys.stderr)
        return EXIT_IO
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"nbsr: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, PTBParseError, InputError, ModelFormatError, EvalError) as e:
        print(f"nbsr: {e}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
