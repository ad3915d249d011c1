"""Adaptive length scheduling for guess generation.

One schedule entry per password length carries the success probability sp of
its most recent batch. The loop always pops the entry with the highest sp,
runs that length's next (one lower) level, measures the new sp, and puts the
entry back until the length bottoms out. Success is reported by a feedback
callable: it receives each guess and returns how many targets it cracked
(evaluation mode passes a test-set oracle, attack mode a hash checker; pass
None for a constant 0, which degrades to a fixed deterministic order).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterator, NamedTuple

from .enumerator import enum_pwd

DEFAULT_LENGTHS = range(3, 21)

Feedback = Callable[[str], int]


class Guess(NamedTuple):
    text: str
    level: int
    length: int


@dataclass
class ScheduleEntry:
    sp: float
    level: int
    length: int


@dataclass
class ScheduleState:
    entries: list[ScheduleEntry] = field(default_factory=list)
    guesses_made: int = 0
    cracked: int = 0


def _zero_feedback(_guess: str) -> int:
    return 0


def _sort_entries(entries: list[ScheduleEntry]) -> None:
    # highest sp first; ties go to the smaller length
    entries.sort(key=lambda e: (-e.sp, e.length))


def _min_total_level(model, length: int) -> int:
    return -(model.L - 1) * (length - (model.n - 2))


def _usable_lengths(model, lengths) -> list[int]:
    if lengths is None:
        lengths = DEFAULT_LENGTHS
    floor = max(3, model.n - 1)
    out = sorted({int(x) for x in lengths})
    if not out:
        raise ValueError("no lengths given")
    if out[0] < floor:
        raise ValueError(f"lengths must be >= {floor}, got {out[0]}")
    return out


def schedule_init(model, lengths=None, feedback: Feedback | None = None) -> ScheduleState:
    """Run level 0 for every length and build the initial schedule.

    sp is cracked/generated for the batch, 0 when the batch was empty.
    """
    feedback = feedback or _zero_feedback
    state = ScheduleState()
    for ell in _usable_lengths(model, lengths):
        generated = 0
        hit = 0
        for text in enum_pwd(model, 0, ell):
            generated += 1
            hit += feedback(text)
        sp = hit / generated if generated else 0.0
        state.entries.append(ScheduleEntry(sp, 0, ell))
        state.guesses_made += generated
        state.cracked += hit
    _sort_entries(state.entries)
    return state


def next_step(state: ScheduleState, model, feedback: Feedback | None = None) -> ScheduleState:
    """Pop the best entry, run its next level, reinsert with the measured sp.

    An entry already at its length's minimum level is dropped instead; the
    state is mutated in place and returned.
    """
    if not state.entries:
        raise ValueError("schedule is empty")
    feedback = feedback or _zero_feedback
    head = state.entries.pop(0)
    nxt = head.level - 1
    if nxt < _min_total_level(model, head.length):
        return state
    generated = 0
    hit = 0
    for text in enum_pwd(model, nxt, head.length):
        generated += 1
        hit += feedback(text)
    sp = hit / generated if generated else 0.0
    state.entries.append(ScheduleEntry(sp, nxt, head.length))
    state.guesses_made += generated
    state.cracked += hit
    _sort_entries(state.entries)
    return state


def guess_stream(model, budget: int, feedback: Feedback | None = None,
                 lengths=None) -> Iterator[Guess]:
    """Lazy stream of at most ``budget`` guesses in schedule order.

    Yields (text, level, length) triples. The per-length level sequence is
    0, -1, -2, ... with no repeats; the interleaving of lengths follows the
    measured success probabilities.
    """
    if budget < 1:
        raise ValueError(f"budget must be >= 1, got {budget}")
    use = _usable_lengths(model, lengths)
    return _stream(model, int(budget), feedback or _zero_feedback, use)


def _stream(model, budget, feedback, lengths):
    state = ScheduleState()
    made = 0
    for ell in lengths:
        generated = 0
        hit = 0
        for text in enum_pwd(model, 0, ell):
            yield Guess(text, 0, ell)
            made += 1
            generated += 1
            hit += feedback(text)
            if made >= budget:
                return
        sp = hit / generated if generated else 0.0
        state.entries.append(ScheduleEntry(sp, 0, ell))
        state.guesses_made += generated
        state.cracked += hit
    _sort_entries(state.entries)

    while state.entries:
        head = state.entries.pop(0)
        nxt = head.level - 1
        if nxt < _min_total_level(model, head.length):
            continue
        generated = 0
        hit = 0
        for text in enum_pwd(model, nxt, head.length):
            yield Guess(text, nxt, head.length)
            made += 1
            generated += 1
            hit += feedback(text)
            if made >= budget:
                return
        sp = hit / generated if generated else 0.0
        state.entries.append(ScheduleEntry(sp, nxt, head.length))
        state.guesses_made += generated
        state.cracked += hit
        _sort_entries(state.entries)
