"""n-gram model: counting, smoothing, level discretization, scoring, file I/O.

A trained model holds four dense arrays indexed by gram rank (the base-|Σ|
value of the gram's character ranks, so rank order == lexicographic order):

  init_prob[c]      probability of the password starting with (n-1)-gram c
  cond_prob[c, z]   probability of character z given (n-1)-gram context c
  init_level[c]     discretized level of init_prob[c], in [-(L-1), 0]
  cond_level[c, z]  discretized level of cond_prob[c, z], same range

Levels come from lvl = round(log(c1*p + c2)) with (c1, c2) calibrated per
table so the table's maximum probability maps to 0 and probability 0 maps
to -(L-1). Natural log throughout.
"""

from __future__ import annotations

import math
import struct

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .corpus import Alphabet
from .errors import ModelFormatError, ScoringError, TrainingError

DEFAULT_ORDER = 3
DEFAULT_LEVEL_COUNT = 10
DEFAULT_DELTA = 0.01

_MAGIC = b"OMEN"
_FORMAT_VERSION = 1

# dense tables: keep C*sigma from exploding for large n
_MAX_TABLE_CELLS = 200_000_000


def calibrate(p_max: float, L: int) -> tuple[float, float]:
    """Choose (c1, c2) so that discretize(p_max) = 0 and discretize(0) = -(L-1)."""
    if L < 2:
        raise ValueError(f"level count must be >= 2, got {L}")
    if not 0.0 < p_max <= 1.0:
        raise ValueError(f"calibration requires 0 < p_max <= 1, got {p_max}")
    c2 = math.exp(-(L - 1))
    c1 = (1.0 - c2) / p_max
    return c1, c2


def discretize(prob: float, c1: float, c2: float, min_level: int | None = None) -> int:
    """Map a probability to an integer level in [min_level, 0].

    min_level defaults to round(log(c2)), which is -(L-1) for calibrated c2.
    Monotone non-decreasing in prob; round() ties follow round-half-to-even,
    same as the vectorized path.
    """
    if min_level is None:
        min_level = round(math.log(c2))
    lvl = round(math.log(c1 * prob + c2))
    return max(min_level, min(0, lvl))


def _discretize_array(prob: np.ndarray, c1: float, c2: float, min_level: int) -> np.ndarray:
    lvl = np.rint(np.log(c1 * prob + c2))
    return np.clip(lvl, min_level, 0).astype(np.int8)


def _encode_concat(alphabet: Alphabet, passwords) -> tuple[np.ndarray, np.ndarray]:
    """Encode a batch of strings into one flat rank array plus lengths."""
    joined = "".join(passwords)
    lengths = np.fromiter((len(p) for p in passwords), dtype=np.int64, count=len(passwords))
    if not joined:
        return np.empty(0, dtype=np.int64), lengths
    cps = np.frombuffer(joined.encode("utf-32-le"), dtype="<u4").astype(np.int64)
    table = np.fromiter((ord(c) for c in alphabet.chars), dtype=np.int64, count=alphabet.size)
    order = np.argsort(table)
    sorted_cp = table[order]
    pos = np.clip(np.searchsorted(sorted_cp, cps), 0, alphabet.size - 1)
    if not np.array_equal(sorted_cp[pos], cps):
        raise ValueError("corpus contains characters outside the alphabet")
    return order[pos], lengths


class NgramModel:
    """Immutable trained model; probability and level tables plus constants."""

    def __init__(
        self,
        alphabet: Alphabet,
        n: int,
        L: int,
        init_prob: np.ndarray,
        cond_prob: np.ndarray,
        init_level: np.ndarray,
        cond_level: np.ndarray,
        delta: float | None = None,
        validate: bool = True,
    ):
        if n < 2:
            raise ValueError(f"order must be >= 2, got {n}")
        if not 2 <= L <= 128:
            raise ValueError(f"level count must be in [2, 128], got {L}")
        self.alphabet = alphabet
        self.n = n
        self.L = L
        self.delta = delta
        C = alphabet.size ** (n - 1)
        sigma = alphabet.size
        self.init_prob = np.ascontiguousarray(init_prob, dtype=np.float64).reshape(C)
        self.cond_prob = np.ascontiguousarray(cond_prob, dtype=np.float64).reshape(C, sigma)
        self.init_level = np.ascontiguousarray(init_level, dtype=np.int8).reshape(C)
        self.cond_level = np.ascontiguousarray(cond_level, dtype=np.int8).reshape(C, sigma)
        for arr in (self.init_prob, self.cond_prob, self.init_level, self.cond_level):
            arr.setflags(write=False)
        self.c2 = math.exp(-(L - 1))
        self.c1_init = (1.0 - self.c2) / float(self.init_prob.max())
        self.c1_cond = (1.0 - self.c2) / float(self.cond_prob.max())
        if validate:
            self._check()

    def _check(self) -> None:
        L = self.L
        row_sums = self.cond_prob.sum(axis=1)
        if not np.allclose(row_sums, 1.0, atol=1e-9, rtol=0):
            raise ValueError("conditional rows do not sum to 1")
        if abs(self.init_prob.sum() - 1.0) > 1e-9:
            raise ValueError("initial probabilities do not sum to 1")
        for levels in (self.init_level, self.cond_level):
            if levels.min() < -(L - 1) or levels.max() > 0:
                raise ValueError("levels outside [-(L-1), 0]")
            if levels.max() != 0:
                raise ValueError("no gram at level 0")

    @property
    def sigma(self) -> int:
        return self.alphabet.size

    @property
    def context_count(self) -> int:
        return self.alphabet.size ** (self.n - 1)

    def context_rank(self, text: str) -> int:
        """Rank of an (n-1)-character context string."""
        if len(text) != self.n - 1:
            raise ValueError(f"context must have {self.n - 1} characters")
        r = 0
        for ch in text:
            r = r * self.sigma + self.alphabet.index(ch)
        return r

    # scoring accessors; BoostedModel overrides the conditional pair
    def initial_probability(self, rank: int) -> float:
        return float(self.init_prob[rank])

    def conditional_probability(self, ctx: int, z: int) -> float:
        return float(self.cond_prob[ctx, z])

    def initial_level_at(self, rank: int) -> int:
        return int(self.init_level[rank])

    def conditional_level(self, ctx: int, z: int) -> int:
        return int(self.cond_level[ctx, z])

    # enumeration accessors: negated levels as int64, flat layout
    def init_level_neg(self) -> np.ndarray:
        return (-self.init_level).astype(np.int64)

    def cond_level_neg(self) -> np.ndarray:
        return (-self.cond_level).astype(np.int64).reshape(-1)


def train(corpus, alphabet: Alphabet | None = None, n: int = DEFAULT_ORDER,
          L: int = DEFAULT_LEVEL_COUNT, delta: float = DEFAULT_DELTA) -> NgramModel:
    """Count grams, smooth additively, discretize, return an immutable model.

    Probabilities are (count + delta) / (total + delta * cells) where cells
    is the row width: |Σ| for conditional rows, |Σ|^(n-1) for the initial
    table. Entries shorter than n-1 characters contribute nothing; if every
    entry is that short there is nothing to anchor a guess on and training
    fails.
    """
    if alphabet is None:
        alphabet = Alphabet.default()
    if n < 2:
        raise ValueError(f"order must be >= 2, got {n}")
    if not 2 <= L <= 128:
        raise ValueError(f"level count must be in [2, 128], got {L}")
    if not delta > 0:
        raise ValueError(f"smoothing delta must be > 0, got {delta}")

    passwords = list(corpus)
    if not passwords:
        raise TrainingError("empty corpus")
    sigma = alphabet.size
    n1 = n - 1
    C = sigma**n1
    if C * sigma > _MAX_TABLE_CELLS:
        raise ValueError(f"dense tables would need {C * sigma} cells; lower n or shrink the alphabet")

    usable = [p for p in passwords if len(p) >= n1]
    if not usable:
        raise TrainingError(f"no entry has the {n1} characters needed for an initial gram")
    flat, lengths = _encode_concat(alphabet, usable)
    starts = np.zeros(len(usable) + 1, dtype=np.int64)
    np.cumsum(lengths, out=starts[1:])

    powers1 = sigma ** np.arange(n1 - 1, -1, -1, dtype=np.int64)
    first = flat[starts[:-1, None] + np.arange(n1, dtype=np.int64)[None, :]]
    init_counts = np.bincount(first @ powers1, minlength=C).astype(np.float64)

    cond_counts = np.zeros(C * sigma, dtype=np.float64)
    if flat.size >= n:
        windows = sliding_window_view(flat, n)
        pid = np.repeat(np.arange(len(usable), dtype=np.int64), lengths)
        inside = pid[: windows.shape[0]] == pid[n - 1:]
        if inside.any():
            powers = sigma ** np.arange(n - 1, -1, -1, dtype=np.int64)
            ranks = windows[inside] @ powers
            cond_counts = np.bincount(ranks, minlength=C * sigma).astype(np.float64)

    init_prob = (init_counts + delta) / (init_counts.sum() + delta * C)
    cond_counts = cond_counts.reshape(C, sigma)
    cond_prob = (cond_counts + delta) / (cond_counts.sum(axis=1, keepdims=True) + delta * sigma)

    min_level = -(L - 1)
    c1i, c2 = calibrate(float(init_prob.max()), L)
    c1c, _ = calibrate(float(cond_prob.max()), L)
    init_level = _discretize_array(init_prob, c1i, c2, min_level)
    cond_level = _discretize_array(cond_prob, c1c, c2, min_level)
    return NgramModel(alphabet, n, L, init_prob, cond_prob, init_level, cond_level, delta=delta)


def _checked_ranks(model, pwd: str) -> list[int]:
    if len(pwd) < model.n - 1:
        raise ScoringError(f"password shorter than {model.n - 1} characters")
    try:
        return [model.alphabet.index(ch) for ch in pwd]
    except KeyError as exc:
        raise ScoringError(str(exc)) from None


def password_probability(model, pwd: str) -> float:
    """Chain probability: initial gram times each conditional step."""
    ranks = _checked_ranks(model, pwd)
    n1 = model.n - 1
    sigma = model.alphabet.size
    C = sigma**n1
    ctx = 0
    for r in ranks[:n1]:
        ctx = ctx * sigma + r
    p = model.initial_probability(ctx)
    for z in ranks[n1:]:
        p *= model.conditional_probability(ctx, z)
        ctx = (ctx * sigma + z) % C
    return float(p)


def password_level(model, pwd: str) -> int:
    """Chain level: initial gram level plus each conditional step's level."""
    ranks = _checked_ranks(model, pwd)
    n1 = model.n - 1
    sigma = model.alphabet.size
    C = sigma**n1
    ctx = 0
    for r in ranks[:n1]:
        ctx = ctx * sigma + r
    total = model.initial_level_at(ctx)
    for z in ranks[n1:]:
        total += model.conditional_level(ctx, z)
        ctx = (ctx * sigma + z) % C
    return int(total)


def save_model(model: NgramModel, path) -> None:
    """Write the binary model file (see load_model for the layout)."""
    abytes = model.alphabet.chars.encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<IIII", _FORMAT_VERSION, model.n, model.L, len(abytes)))
        fh.write(abytes)
        fh.write(model.init_prob.astype("<f8").tobytes(order="C"))
        fh.write(model.cond_prob.astype("<f8").tobytes(order="C"))
        fh.write(model.init_level.astype("i1").tobytes(order="C"))
        fh.write(model.cond_level.astype("i1").tobytes(order="C"))


def load_model(path) -> NgramModel:
    """Read a model file written by save_model.

    Layout, all integers little-endian: magic "OMEN", format version u32,
    n u32, L u32, alphabet byte length u32, alphabet UTF-8 bytes, then
    init_prob f64[C], cond_prob f64[C*sigma], init_level i8[C],
    cond_level i8[C*sigma], each C-ordered in gram rank order.

    The smoothing delta is not stored; a loaded model reports delta=None.
    (c1, c2) are reconstructed from L and the stored table maxima, which
    reproduces the training-time constants exactly.
    """
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < 4 or blob[:4] != _MAGIC:
        raise ModelFormatError("not a model file (bad magic)")
    if len(blob) < 20:
        raise ModelFormatError("truncated header")
    version, n, L, alen = struct.unpack_from("<IIII", blob, 4)
    if version != _FORMAT_VERSION:
        raise ModelFormatError(f"unsupported format version {version}")
    if n < 2 or not 2 <= L <= 128:
        raise ModelFormatError(f"implausible parameters n={n}, L={L}")
    off = 20
    if len(blob) < off + alen:
        raise ModelFormatError("truncated alphabet")
    try:
        alphabet = Alphabet(blob[off : off + alen].decode("utf-8"))
    except (UnicodeDecodeError, ValueError) as exc:
        raise ModelFormatError(f"bad alphabet: {exc}") from None
    off += alen
    sigma = alphabet.size
    if sigma ** (n - 1) * sigma > _MAX_TABLE_CELLS:
        raise ModelFormatError("declared tables implausibly large")
    C = sigma ** (n - 1)
    expect = off + 8 * C + 8 * C * sigma + C + C * sigma
    if len(blob) != expect:
        raise ModelFormatError(f"file is {len(blob)} bytes, layout requires {expect}")
    init_prob = np.frombuffer(blob, dtype="<f8", count=C, offset=off)
    off += 8 * C
    cond_prob = np.frombuffer(blob, dtype="<f8", count=C * sigma, offset=off)
    off += 8 * C * sigma
    init_level = np.frombuffer(blob, dtype="i1", count=C, offset=off)
    off += C
    cond_level = np.frombuffer(blob, dtype="i1", count=C * sigma, offset=off)
    for levels in (init_level, cond_level):
        if levels.min() < -(L - 1) or levels.max() > 0:
            raise ModelFormatError("levels outside [-(L-1), 0]")
    if init_prob.max() <= 0 or cond_prob.max() <= 0:
        raise ModelFormatError("probability table has no positive entry")
    return NgramModel(alphabet, n, L, init_prob, cond_prob, init_level, cond_level,
                      delta=None, validate=False)
