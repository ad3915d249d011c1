"""Command line front end: one binary, one subcommand per pipeline stage.

Exit codes: 0 success, 1 bad usage or parameter, 2 unreadable or malformed
data. Diagnostics go to stderr; payload goes to stdout or --out.
"""

from __future__ import annotations

import argparse
import logging
import math
import os
import random
import sys
from itertools import islice

from .boost import (
    ALPHA_CAP,
    BoostProfile,
    DEFAULT_GUESS_EXPONENT,
    estimate_alpha,
    plus_stream,
)
from .corpus import ATTRIBUTE_NAMES, Alphabet, load_hints, load_passwords
from .errors import OmenError
from .evaluation import TestSetOracle, crack_curve, export_curve
from .model import (
    DEFAULT_DELTA,
    DEFAULT_LEVEL_COUNT,
    DEFAULT_ORDER,
    load_model,
    save_model,
    train,
)
from .scheduler import guess_stream
from .enumerator import enum_pwd
from .similarity import MAX_ATTRIBUTE, attribute_stats, cdf_similarity, policy_check

logger = logging.getLogger("omen")


class _Parser(argparse.ArgumentParser):
    """argparse with usage errors mapped to exit code 1 instead of 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _parse_checkpoints(text: str) -> list[int]:
    try:
        cps = [int(float(part)) for part in text.split(",") if part.strip()]
    except ValueError:
        raise ValueError(f"bad checkpoint list {text!r}") from None
    if not cps:
        raise ValueError("empty checkpoint list")
    return cps


def _parse_grid(text: str) -> list[float]:
    try:
        lo, hi, step = (float(p) for p in text.split(":"))
    except ValueError:
        raise ValueError(f"bad grid {text!r}, expected lo:hi:step") from None
    if step <= 0 or hi < lo:
        raise ValueError(f"bad grid {text!r}")
    count = int(round((hi - lo) / step)) + 1
    return [round(lo + i * step, 10) for i in range(count)]


def _load_test_set(args, alphabet):
    return load_passwords(args.test, alphabet, args.min_len, args.max_len)


def _cmd_train(args) -> int:
    alphabet = Alphabet.from_file(args.alphabet) if args.alphabet else Alphabet.default()
    corpus = load_passwords(args.input, alphabet, args.min_len, args.max_len)
    logger.info("loaded %d passwords (%d rejected)", len(corpus), corpus.rejected_count)
    model = train(corpus, alphabet, n=args.order, L=args.levels, delta=args.delta)
    save_model(model, args.out)
    logger.info("wrote model (n=%d, L=%d, |alphabet|=%d) to %s",
                model.n, model.L, alphabet.size, args.out)
    return 0


def _cmd_enum(args) -> int:
    model = load_model(args.model)
    guesses = enum_pwd(model, args.level, args.length)
    if args.max is not None:
        if args.max < 1:
            raise ValueError("--max must be >= 1")
        guesses = islice(guesses, args.max)
    out = sys.stdout
    count = 0
    for text in guesses:
        out.write(text + "\n")
        count += 1
    logger.info("emitted %d guesses", count)
    return 0


def _cmd_crack(args) -> int:
    model = load_model(args.model)
    test = _load_test_set(args, model.alphabet)
    logger.info("test set: %d passwords (%d rejected)", len(test), test.rejected_count)
    if args.checkpoints:
        cps = _parse_checkpoints(args.checkpoints)
        oracle = TestSetOracle(test.passwords, unique=args.unique)
        stream = guess_stream(model, args.budget, oracle)
        curve = crack_curve(stream, test.passwords, cps, unique=args.unique)
        sys.stdout.write("guesses,fraction\n")
        for cp, frac in zip(curve.checkpoints, curve.fractions):
            sys.stdout.write(f"{cp},{frac!r}\n")
    else:
        oracle = TestSetOracle(test.passwords, unique=args.unique)
        made = 0
        for _ in guess_stream(model, args.budget, oracle):
            made += 1
        sys.stdout.write("guesses,cracked,fraction\n")
        sys.stdout.write(f"{made},{oracle.cracked},{oracle.fraction!r}\n")
    return 0


def _cmd_eval(args) -> int:
    model = load_model(args.model)
    test = _load_test_set(args, model.alphabet)
    logger.info("test set: %d passwords (%d rejected)", len(test), test.rejected_count)
    cps = _parse_checkpoints(args.checkpoints)
    oracle = TestSetOracle(test.passwords, unique=args.unique)
    stream = guess_stream(model, args.budget, oracle)
    curve = crack_curve(stream, test.passwords, cps, unique=args.unique)
    export_curve(curve, args.out)
    logger.info("final fraction %.4f; curve written to %s", curve.fractions[-1], args.out)
    return 0


def _cmd_sim(args) -> int:
    records = load_hints(args.hints)
    if not records:
        raise OmenError(f"{args.hints}: no hint records")
    wrote = False
    if args.cdf:
        points = cdf_similarity(records, args.attribute)
        with open(args.cdf, "w", encoding="utf-8") as fh:
            fh.write("value,fraction\n")
            for value, frac in points:
                fh.write(f"{value!r},{frac!r}\n")
        logger.info("CDF (%s) over %d records written to %s", args.attribute, len(records), args.cdf)
        wrote = True
    if args.table or not wrote:
        rows = attribute_stats(records)
        out = open(args.table, "w", encoding="utf-8") if args.table else sys.stdout
        try:
            out.write("attribute,meanJS,js5,meanLCSS,lcss5,meanLen\n")
            for row in rows:
                out.write(f"{row.attribute},{row.mean_js:.6g},{row.js5:.6g},"
                          f"{row.mean_lcss:.6g},{row.lcss5:.6g},{row.mean_len:.6g}\n")
        finally:
            if args.table:
                out.close()
    return 0


def _cmd_alpha(args) -> int:
    model = load_model(args.model)
    records = load_hints(args.hints)
    if not records:
        raise OmenError(f"{args.hints}: no hint records")
    grid = _parse_grid(args.grid)
    alpha_star, boost = estimate_alpha(records, args.attribute, model, grid,
                                       b=args.exponent, threads=args.threads)
    sys.stdout.write("alpha,lnAlpha,boostLevel\n")
    sys.stdout.write(f"{alpha_star:.6g},{math.log(alpha_star):.6g},{boost}\n")
    return 0


def _cmd_plus(args) -> int:
    model = load_model(args.model)
    records = load_hints(args.hints)
    if not 0 <= args.target < len(records):
        raise ValueError(f"--target must be in [0, {len(records) - 1}]")
    profile = BoostProfile.load(args.profile, L=model.L)
    record = records[args.target]
    count = 0
    for guess in plus_stream(model, profile, record, args.budget):
        sys.stdout.write(guess.text + "\n")
        count += 1
    logger.info("emitted %d boosted guesses for target %d", count, args.target)
    return 0


def _cmd_policy_check(args) -> int:
    verdict = policy_check(args.username, args.password,
                           args.min_edit_distance, args.js_threshold)
    sys.stdout.write(verdict + "\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--threads", type=int, default=None,
                        help="worker threads for parallel stages (default: all cores)")
    common.add_argument("--seed", type=int, default=0, help="seed for randomized steps")
    common.add_argument("--quiet", action="store_true", help="suppress progress output")

    parser = _Parser(prog="omen", description="Markov-model password guessing toolkit")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("train", parents=[common], help="train a model from a password file")
    p.add_argument("--input", required=True, help="newline-delimited password file")
    p.add_argument("--out", required=True, help="model file to write")
    p.add_argument("--alphabet", help="alphabet file (single line); default: built-in 72 characters")
    p.add_argument("-n", "--order", type=int, default=DEFAULT_ORDER, help="gram order")
    p.add_argument("-L", "--levels", type=int, default=DEFAULT_LEVEL_COUNT, help="level count")
    p.add_argument("--delta", type=float, default=DEFAULT_DELTA, help="additive smoothing count")
    p.add_argument("--min-len", type=int, default=3)
    p.add_argument("--max-len", type=int, default=20)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("enum", parents=[common], help="emit all guesses at one (level, length)")
    p.add_argument("--model", required=True)
    p.add_argument("--level", type=int, required=True, help="target level (<= 0)")
    p.add_argument("--length", type=int, required=True)
    p.add_argument("--max", type=int, default=None, help="stop after this many guesses")
    p.set_defaults(func=_cmd_enum)

    p = sub.add_parser("crack", parents=[common], help="adaptive cracking run against a test set")
    p.add_argument("--model", required=True)
    p.add_argument("--test", required=True, help="plaintext test passwords, one per line")
    p.add_argument("--budget", type=int, required=True)
    p.add_argument("--checkpoints", help="csv guess counts; prints a curve instead of a summary")
    p.add_argument("--unique", action="store_true", help="collapse duplicate test passwords")
    p.add_argument("--min-len", type=int, default=3)
    p.add_argument("--max-len", type=int, default=20)
    p.set_defaults(func=_cmd_crack)

    p = sub.add_parser("eval", parents=[common], help="crack and export the curve as CSV")
    p.add_argument("--model", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--budget", type=int, required=True)
    p.add_argument("--checkpoints", default="1e3,1e4,1e5,1e6")
    p.add_argument("--out", required=True, help="curve CSV to write")
    p.add_argument("--unique", action="store_true")
    p.add_argument("--min-len", type=int, default=3)
    p.add_argument("--max-len", type=int, default=20)
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("sim", parents=[common], help="similarity statistics over hint records")
    p.add_argument("--hints", required=True, help="JSON-lines hint file")
    p.add_argument("--attribute", default=MAX_ATTRIBUTE,
                   choices=[MAX_ATTRIBUTE, *ATTRIBUTE_NAMES], help="attribute for --cdf")
    p.add_argument("--cdf", help="write the similarity CDF to this CSV")
    p.add_argument("--table", help="write the per-attribute stats table to this CSV")
    p.set_defaults(func=_cmd_sim)

    p = sub.add_parser("alpha", parents=[common], help="estimate an attribute's boost multiplier")
    p.add_argument("--model", required=True)
    p.add_argument("--hints", required=True)
    p.add_argument("--attribute", required=True, choices=list(ATTRIBUTE_NAMES))
    p.add_argument("--grid", default=f"1.0:{ALPHA_CAP}:0.1", help="lo:hi:step, within [1, 5]")
    p.add_argument("--exponent", type=float, default=DEFAULT_GUESS_EXPONENT,
                   help="guess-curve exponent b")
    p.set_defaults(func=_cmd_alpha)

    p = sub.add_parser("plus", parents=[common], help="boosted guess stream for one hint record")
    p.add_argument("--model", required=True)
    p.add_argument("--hints", required=True)
    p.add_argument("--profile", required=True, help="CSV attribute,alpha,boostLevel")
    p.add_argument("--budget", type=int, required=True)
    p.add_argument("--target", type=int, default=0, help="index of the hint record to attack")
    p.set_defaults(func=_cmd_plus)

    p = sub.add_parser("policy-check", parents=[common],
                       help="judge a username/password pair")
    p.add_argument("--username", required=True)
    p.add_argument("--password", required=True)
    p.add_argument("--min-edit-distance", type=int, default=2)
    p.add_argument("--js-threshold", type=float, default=0.5)
    p.set_defaults(func=_cmd_policy_check)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(stream=sys.stderr, level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(levelname)s %(message)s")
    random.seed(args.seed)
    try:
        return args.func(args)
    except BrokenPipeError:
        # downstream closed the pipe (e.g. | head); not an error
        devnull = os.open(os.devnull, os.O_WRONLY)
        os.dup2(devnull, sys.stdout.fileno())
        return 0
    except ValueError as exc:
        logger.error("%s", exc)
        return 1
    except OmenError as exc:
        logger.error("%s", exc)
        return 2
    except OSError as exc:
        logger.error("%s", exc)
        return 2


if __name__ == "__main__":
    sys.exit(main())
