"""Enumeration throughput: numba kernels vs the numpy fallback.

The backend is chosen once at import time from OMEN_JIT, so the measurement
runs in child processes, one per backend, over an identical workload:
train a trigram model on a synthetic corpus, stream guesses, and run the
per-level counting pass. The parent prints both results and the speedup.

Usage: python3 benchmarks/enum_throughput.py [--budget N] [--train N]
"""

import argparse
import os
import subprocess
import sys
import time

SIGMA = 20
LENGTHS = tuple(range(4, 10))


def synth_corpus(count: int, alphabet) -> list:
    import numpy as np

    g = np.random.default_rng(99)
    sigma = alphabet.size
    trans = g.dirichlet(np.full(sigma, 0.08), size=sigma)
    cum = np.cumsum(trans, axis=1)
    lengths = g.integers(4, 10, size=count)
    max_l = int(lengths.max())
    out = np.empty((count, max_l), dtype=np.int64)
    state = g.integers(0, sigma, size=count)
    out[:, 0] = state
    for t in range(1, max_l):
        u = g.random(count)
        state = np.minimum((cum[state] < u[:, None]).sum(axis=1), sigma - 1)
        out[:, t] = state
    chars = np.array(list(alphabet.chars))
    return ["".join(chars[out[i, : lengths[i]]]) for i in range(count)]


def run_child(budget: int, train_n: int) -> None:
    from omen import Alphabet, Corpus, guess_stream, train
    from omen._jit import JIT_ENABLED
    from omen.enumerator import count_guesses

    alphabet = Alphabet("abcdefghijklmnopqrstuvwxyz"[:SIGMA])
    model = train(Corpus(synth_corpus(train_n, alphabet)), alphabet=alphabet)

    # warm pass so one-time kernel compilation stays out of the clock
    for _ in guess_stream(model, 1000, lengths=LENGTHS):
        pass

    started = time.perf_counter()
    made = 0
    for _ in guess_stream(model, budget, lengths=LENGTHS):
        made += 1
    stream_s = time.perf_counter() - started

    started = time.perf_counter()
    total = 0
    for eta in range(0, -3 * (model.L - 1), -1):
        for ell in LENGTHS:
            total += count_guesses(model, eta, ell)
    count_s = time.perf_counter() - started

    print(f"backend={'numba' if JIT_ENABLED else 'numpy'} "
          f"stream={made / stream_s:.0f} guesses/s "
          f"count={count_s:.3f}s checked={made},{total}")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--budget", type=int, default=2_000_000,
                        help="guesses to stream per backend (default 2e6)")
    parser.add_argument("--train", type=int, default=50_000,
                        help="synthetic corpus size (default 5e4)")
    parser.add_argument("--child", action="store_true", help=argparse.SUPPRESS)
    args = parser.parse_args(argv)

    if args.child:
        run_child(args.budget, args.train)
        return 0

    reports = {}
    for flag in ("1", "0"):
        env = dict(os.environ, OMEN_JIT=flag)
        print(f"running OMEN_JIT={flag} ...", file=sys.stderr)
        proc = subprocess.run(
            [sys.executable, __file__, "--child",
             "--budget", str(args.budget), "--train", str(args.train)],
            env=env, capture_output=True, text=True)
        if proc.returncode != 0:
            sys.stderr.write(proc.stderr)
            return proc.returncode
        line = proc.stdout.strip()
        print(line)
        reports[flag] = line

    checked = [r.rsplit("checked=", 1)[1] for r in reports.values()]
    if checked[0] != checked[1]:
        print("backends disagree on output sizes", file=sys.stderr)
        return 2
    rates = {f: float(r.split("stream=")[1].split()[0]) for f, r in reports.items()}
    print(f"speedup: {rates['1'] / rates['0']:.1f}x (stream)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
