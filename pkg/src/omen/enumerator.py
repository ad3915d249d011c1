"""Ordered enumeration: every password of length ell whose level sum is eta.

The enumeration walks level vectors (one level for the initial gram, one per
conditional transition) in lexicographically descending order; within one
vector, characters advance in alphabet order. Both choices are arbitrary but
fixed, so two runs over the same model emit byte-identical sequences.
"""

from __future__ import annotations

from typing import Iterator, NamedTuple

import numpy as np

from .kernels import _count_dp, _enum_fill

_BATCH = 4096


class _Tables(NamedTuple):
    """Per-model lookup tables for the enumeration kernel.

    init_grams: initial-gram ranks grouped by level index, rank-ascending
    within a group; init_start[v] slices the group for level index v.
    succ_chars/succ_start: CSR over (context, level index) cells, each cell
    listing the next characters at that level for that context, ascending.
    """

    init_grams: np.ndarray
    init_start: np.ndarray
    succ_chars: np.ndarray
    succ_start: np.ndarray


def _tables(model) -> _Tables:
    cached = getattr(model, "_enum_tables", None)
    if cached is not None:
        return cached
    L = model.L
    sigma = model.alphabet.size
    C = sigma ** (model.n - 1)

    init_neg = model.init_level_neg()
    init_grams = np.argsort(init_neg, kind="stable").astype(np.int64)
    init_start = np.zeros(L + 1, dtype=np.int64)
    np.cumsum(np.bincount(init_neg, minlength=L), out=init_start[1:])

    cond_neg = model.cond_level_neg()
    flat = np.arange(C * sigma, dtype=np.int64)
    key = (flat // sigma) * L + cond_neg
    order = np.argsort(key, kind="stable")
    succ_chars = (order % sigma).astype(np.int64)
    succ_start = np.zeros(C * L + 1, dtype=np.int64)
    np.cumsum(np.bincount(key, minlength=C * L), out=succ_start[1:])

    tabs = _Tables(init_grams, init_start, succ_chars, succ_start)
    model._enum_tables = tabs
    return tabs


def enum_level_vectors(eta: int, k: int, min_level: int) -> Iterator[tuple[int, ...]]:
    """All integer vectors of length k, entries in [min_level, 0], summing to eta.

    Emitted in lexicographically descending order, each exactly once. An eta
    outside [min_level*k, 0] is infeasible and yields nothing.
    """
    if k < 1:
        raise ValueError(f"vector length must be >= 1, got {k}")
    if min_level > 0:
        raise ValueError(f"min_level must be <= 0, got {min_level}")
    if not min_level * k <= eta <= 0:
        return
    yield from _vectors(eta, k, min_level)


def _vectors(eta: int, k: int, min_level: int) -> Iterator[tuple[int, ...]]:
    if k == 1:
        yield (eta,)
        return
    # first entry a: remaining sum eta-a must fit in k-1 entries of [min_level, 0]
    hi = min(0, eta - min_level * (k - 1))
    lo = max(min_level, eta)
    for a in range(hi, lo - 1, -1):
        for rest in _vectors(eta - a, k - 1, min_level):
            yield (a,) + rest


def _check_args(model, eta: int, ell: int) -> int:
    """Validate (eta, ell) against the model; returns the vector length k."""
    floor = max(3, model.n - 1)
    if ell < floor:
        raise ValueError(f"length must be >= {floor}, got {ell}")
    k = ell - (model.n - 2)
    min_total = -(model.L - 1) * k
    if not min_total <= eta <= 0:
        raise ValueError(f"level must be in [{min_total}, 0] for length {ell}, got {eta}")
    return k


def enum_pwd(model, eta: int, ell: int, batch_size: int = _BATCH) -> Iterator[str]:
    """Stream every length-ell password whose level sum equals eta, once each."""
    k = _check_args(model, eta, ell)
    if batch_size < 1:
        raise ValueError("batch_size must be >= 1")
    return _generate(model, eta, ell, k, batch_size)


def _generate(model, eta, ell, k, batch_size):
    tabs = _tables(model)
    alphabet = model.alphabet
    sigma = alphabet.size
    n1 = model.n - 1
    ctx_size = sigma**n1
    L = model.L

    out = np.empty((batch_size, ell), dtype=np.int64)
    prefix = np.zeros(ell, dtype=np.int64)
    cursors = np.zeros(k, dtype=np.int64)
    ctxs = np.zeros(k, dtype=np.int64)
    pos_box = np.zeros(1, dtype=np.int64)
    vec_neg = np.empty(k, dtype=np.int64)

    for vec in enum_level_vectors(eta, k, -(L - 1)):
        for i in range(k):
            vec_neg[i] = -vec[i]
        cursors[0] = 0
        pos_box[0] = 0
        while True:
            m = _enum_fill(
                vec_neg,
                tabs.init_grams,
                tabs.init_start,
                tabs.succ_chars,
                tabs.succ_start,
                sigma,
                ctx_size,
                L,
                n1,
                prefix,
                cursors,
                ctxs,
                pos_box,
                out,
            )
            if m:
                yield from alphabet.decode_batch(out[:m])
            if m < batch_size:
                break


def count_guesses(model, eta: int, ell: int) -> int:
    """Size of enum_pwd(model, eta, ell) without materializing guesses.

    Exact while the count stays below 2**53; beyond that the float64 dynamic
    program rounds.
    """
    _check_args(model, eta, ell)
    sigma = model.alphabet.size
    ctx_size = sigma ** (model.n - 1)
    transitions = ell - (model.n - 1)
    depth = -eta + 1
    hist = _count_dp(
        model.init_level_neg(),
        model.cond_level_neg(),
        sigma,
        ctx_size,
        transitions,
        depth,
    )
    return int(round(hist[-eta]))
