"""Replay guess streams against test sets; record, export, compare curves."""

from __future__ import annotations

import csv
from collections import Counter
from dataclasses import dataclass

from .errors import CurveMismatchError, OmenError


@dataclass(frozen=True)
class CrackCurve:
    checkpoints: tuple[int, ...]
    fractions: tuple[float, ...]

    def __post_init__(self):
        if len(self.checkpoints) != len(self.fractions) or not self.checkpoints:
            raise ValueError("checkpoints and fractions must be equally sized and non-empty")
        if any(b <= a for a, b in zip(self.checkpoints, self.checkpoints[1:])):
            raise ValueError("checkpoints must be strictly ascending")
        if self.checkpoints[0] < 1:
            raise ValueError("checkpoints must be >= 1")
        if any(not 0.0 <= f <= 1.0 for f in self.fractions):
            raise ValueError("fractions must lie in [0, 1]")
        if any(b < a for a, b in zip(self.fractions, self.fractions[1:])):
            raise ValueError("fractions must be non-decreasing")


class TestSetOracle:
    """Feedback callable over a plaintext test multiset.

    Each call reports how many remaining occurrences the guess cracked and
    removes them, so a repeated guess cannot double-count.
    """

    __test__ = False  # not a test class despite the name

    def __init__(self, passwords, unique: bool = False):
        items = list(passwords)
        self.remaining = Counter(set(items) if unique else items)
        self.total = sum(self.remaining.values())
        self.cracked = 0

    def __call__(self, guess: str) -> int:
        hit = self.remaining.pop(guess, 0)
        self.cracked += hit
        return hit

    @property
    def fraction(self) -> float:
        return self.cracked / self.total if self.total else 0.0


def _guess_text(item) -> str:
    return item.text if hasattr(item, "text") else item


def crack_curve(stream, test_set, checkpoints, unique: bool = False) -> CrackCurve:
    """Cracked fraction of the test set after the first c guesses, per checkpoint.

    The test set is a multiset: a matching guess cracks every remaining
    occurrence at once (pass unique=True to collapse duplicates first). A
    stream that ends early carries its final fraction through the remaining
    checkpoints.
    """
    cps = [int(c) for c in checkpoints]
    oracle = TestSetOracle(test_set, unique)
    if oracle.total == 0:
        raise ValueError("empty test set")
    if not cps or cps[0] < 1 or any(b <= a for a, b in zip(cps, cps[1:])):
        raise ValueError("checkpoints must be strictly ascending and >= 1")

    fractions: list[float] = []
    seen = 0
    nxt = 0
    for item in stream:
        oracle(_guess_text(item))
        seen += 1
        if seen == cps[nxt]:
            fractions.append(oracle.fraction)
            nxt += 1
            if nxt == len(cps):
                break
    while len(fractions) < len(cps):
        fractions.append(oracle.fraction)
    return CrackCurve(tuple(cps), tuple(fractions))


def export_curve(curve: CrackCurve, path) -> None:
    """Write "guesses,fraction" CSV; repr keeps fractions exact on reload."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["guesses", "fraction"])
        for cp, frac in zip(curve.checkpoints, curve.fractions):
            writer.writerow([cp, repr(frac)])


def load_curve(path) -> CrackCurve:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        rows = [row for row in reader if row]
    if not rows or rows[0] != ["guesses", "fraction"]:
        raise OmenError(f"{path}: not a curve file (expected guesses,fraction header)")
    cps = []
    fracs = []
    for i, row in enumerate(rows[1:], start=2):
        try:
            cps.append(int(row[0]))
            fracs.append(float(row[1]))
        except (IndexError, ValueError):
            raise OmenError(f"{path}: bad curve row at line {i}") from None
    try:
        return CrackCurve(tuple(cps), tuple(fracs))
    except ValueError as exc:
        raise OmenError(f"{path}: {exc}") from None


@dataclass(frozen=True)
class ComparisonReport:
    checkpoints: tuple[int, ...]
    gaps: tuple[float, ...]
    wins: int
    dominance: float
    max_gap: float


def compare_curves(a: CrackCurve, b: CrackCurve) -> ComparisonReport:
    """Per-checkpoint gap a-b, the count of checkpoints where a >= b, and the
    largest absolute gap. Raises when the curves sample different checkpoints."""
    if a.checkpoints != b.checkpoints:
        raise CurveMismatchError(f"checkpoints differ: {a.checkpoints} vs {b.checkpoints}")
    gaps = tuple(fa - fb for fa, fb in zip(a.fractions, b.fractions))
    wins = sum(1 for g in gaps if g >= 0.0)
    return ComparisonReport(
        checkpoints=a.checkpoints,
        gaps=gaps,
        wins=wins,
        dominance=wins / len(gaps),
        max_gap=max(abs(g) for g in gaps),
    )
