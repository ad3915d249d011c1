"""Password corpora, hint records, and the alphabet they live over.

Loading filters and counts rather than transliterates: a password with a
character outside the alphabet is dropped and tallied in rejected_count.
Duplicates are kept on purpose, frequencies carry the signal the model
trains on.
"""

from __future__ import annotations

import json
import random
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyCorpusError, HintParseError

DEFAULT_MIN_LENGTH = 3
DEFAULT_MAX_LENGTH = 20

# Attribute vocabulary for hint records, in canonical report order.
ATTRIBUTE_NAMES = (
    "email",
    "userName",
    "firstName",
    "lastName",
    "birthday",
    "location",
    "contact",
    "eduWork",
    "friends",
    "siblings",
)

_DEFAULT_CHARS = (
    "abcdefghijklmnopqrstuvwxyz"
    "ABCDEFGHIJKLMNOPQRSTUVWXYZ"
    "0123456789"
    "!@#$%^&*.-"
)


class Alphabet:
    """Ordered character set; rank order of n-grams follows this order."""

    def __init__(self, chars: str):
        if len(chars) < 2:
            raise ValueError("alphabet needs at least 2 characters")
        if len(set(chars)) != len(chars):
            raise ValueError("alphabet contains duplicate characters")
        for ch in chars:
            if len(ch) != 1 or not ch.isprintable():
                raise ValueError(f"alphabet character {ch!r} is not a printable code point")
        self.chars = chars
        self.size = len(chars)
        self._index = {ch: i for i, ch in enumerate(chars)}
        # <U1 array used for bulk decoding of guess batches.
        self._char_array = np.array(list(chars), dtype="<U1")

    @classmethod
    def default(cls) -> "Alphabet":
        return cls(_DEFAULT_CHARS)

    @classmethod
    def from_file(cls, path) -> "Alphabet":
        with open(path, encoding="utf-8") as fh:
            line = fh.readline().rstrip("\n")
        return cls(line)

    def to_file(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.chars + "\n")

    def __contains__(self, ch: str) -> bool:
        return ch in self._index

    def __len__(self) -> int:
        return self.size

    def __eq__(self, other) -> bool:
        return isinstance(other, Alphabet) and other.chars == self.chars

    def index(self, ch: str) -> int:
        try:
            return self._index[ch]
        except KeyError:
            raise KeyError(f"character {ch!r} not in alphabet") from None

    def accepts(self, text: str) -> bool:
        return all(ch in self._index for ch in text)

    def encode(self, text: str) -> np.ndarray:
        """Map a string to an int64 array of character ranks."""
        try:
            return np.fromiter((self._index[ch] for ch in text), dtype=np.int64, count=len(text))
        except KeyError as exc:
            raise KeyError(f"character {exc.args[0]!r} not in alphabet") from None

    def decode_batch(self, codes: np.ndarray) -> list[str]:
        """Turn an (m, ell) array of character ranks into m strings."""
        if codes.size == 0:
            return []
        chars = self._char_array[codes]
        return np.ascontiguousarray(chars).view(f"<U{codes.shape[1]}").ravel().tolist()


@dataclass
class Corpus:
    """Filtered password list plus bookkeeping from the load."""

    passwords: list[str]
    rejected_count: int = 0
    length_histogram: Counter = field(default_factory=Counter)

    def __post_init__(self):
        if not self.length_histogram and self.passwords:
            self.length_histogram = Counter(len(p) for p in self.passwords)

    def __len__(self) -> int:
        return len(self.passwords)

    def __iter__(self):
        return iter(self.passwords)


@dataclass
class HintRecord:
    """One account: its password and named personal attributes."""

    password: str
    attributes: dict[str, list[str]] = field(default_factory=dict)


def load_passwords(
    path,
    alphabet: Alphabet | None = None,
    min_len: int = DEFAULT_MIN_LENGTH,
    max_len: int = DEFAULT_MAX_LENGTH,
) -> Corpus:
    """Read a newline-delimited UTF-8 password file, filtering as we go.

    Keeps exactly the lines whose characters all belong to the alphabet and
    whose length lies in [min_len, max_len]; everything else increments
    rejected_count. Order is preserved. Raises EmptyCorpusError if nothing
    survives.
    """
    if alphabet is None:
        alphabet = Alphabet.default()
    if min_len < 1 or max_len < min_len:
        raise ValueError(f"bad length bounds [{min_len}, {max_len}]")

    kept: list[str] = []
    rejected = 0
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            pwd = line.rstrip("\r\n")
            if min_len <= len(pwd) <= max_len and alphabet.accepts(pwd):
                kept.append(pwd)
            else:
                rejected += 1
    if not kept:
        raise EmptyCorpusError(f"no usable passwords in {path} (rejected {rejected})")
    return Corpus(kept, rejected)


def split(corpus: Corpus, train_fraction: float, seed: int) -> tuple[Corpus, Corpus]:
    """Deterministically partition a corpus into (train, test).

    |train| = round(train_fraction * |corpus|); relative order inside each
    part follows the original corpus.
    """
    if not 0.0 < train_fraction < 1.0:
        raise ValueError(f"train_fraction must be in (0, 1), got {train_fraction}")
    if len(corpus) == 0:
        raise ValueError("cannot split an empty corpus")

    n = len(corpus)
    k = int(round(train_fraction * n))
    indices = list(range(n))
    random.Random(seed).shuffle(indices)
    train_idx = sorted(indices[:k])
    test_idx = sorted(indices[k:])
    train = Corpus([corpus.passwords[i] for i in train_idx])
    test = Corpus([corpus.passwords[i] for i in test_idx])
    return train, test


def load_hints(path) -> list[HintRecord]:
    """Parse a JSON-lines hint file into HintRecords, strictly.

    Each line must be an object with a non-empty "password" string and an
    "attributes" object mapping known attribute names to lists of strings.
    Any violation raises HintParseError naming the 1-based line number.
    """
    records: list[HintRecord] = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise HintParseError(line_no, f"invalid JSON ({exc.msg})") from None
            if not isinstance(obj, dict):
                raise HintParseError(line_no, "record is not an object")
            pwd = obj.get("password")
            if not isinstance(pwd, str) or not pwd:
                raise HintParseError(line_no, 'missing or empty "password"')
            attrs = obj.get("attributes")
            if not isinstance(attrs, dict):
                raise HintParseError(line_no, 'missing "attributes" object')
            clean: dict[str, list[str]] = {}
            for name, values in attrs.items():
                if name not in ATTRIBUTE_NAMES:
                    raise HintParseError(line_no, f"unknown attribute {name!r}")
                if not isinstance(values, list) or not all(isinstance(v, str) for v in values):
                    raise HintParseError(line_no, f"attribute {name!r} is not a list of strings")
                clean[name] = list(values)
            records.append(HintRecord(pwd, clean))
    return records


def save_hints(records: list[HintRecord], path) -> None:
    """Inverse of load_hints; load(save(records)) == records."""
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps({"password": rec.password, "attributes": rec.attributes}) + "\n")
