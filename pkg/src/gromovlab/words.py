"""Letters, reduced words and random presentations in the density model.

A letter is a nonzero signed integer: ``g`` is the generator ``g`` and
``-g`` its formal inverse.  Words are tuples of letters.  The string
encoding uses ``a..z`` for positive generators and ``A..Z`` for inverses.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

Letter = int
Word = tuple[int, ...]

DEFAULT_WORD_CAP = 10**7
DEFAULT_RELATOR_CAP = 10**6

_LOWER = "abcdefghijklmnopqrstuvwxyz"


class SizeCapError(ValueError):
    """An enumeration or sample would exceed its configured size cap."""

    def __init__(self, what: str, size: int, cap: int):
        super().__init__(f"{what}: size {size} exceeds cap {cap}")
        self.what = what
        self.size = size
        self.cap = cap


class DuplicateRelatorError(ValueError):
    pass


def letter(generator: int, sign: int = 1) -> Letter:
    if generator < 1 or sign not in (1, -1):
        raise ValueError(f"bad letter ({generator}, {sign})")
    return generator * sign


def generator(x: Letter) -> int:
    return abs(x)


def sign(x: Letter) -> int:
    return 1 if x > 0 else -1


def inverse(x: Letter) -> Letter:
    return -x


def is_reduced(w: Sequence[Letter]) -> bool:
    return all(b != -a for a, b in zip(w, w[1:]))


def is_cyclically_reduced(w: Sequence[Letter]) -> bool:
    return is_reduced(w) and (len(w) < 2 or w[-1] != -w[0])


def is_proper_power(w: Sequence[Letter]) -> bool:
    """True iff ``w`` is a literal concatenation ``u^k`` with ``k >= 2``."""
    n = len(w)
    w = tuple(w)
    for period in range(1, n // 2 + 1):
        if n % period == 0 and w == w[:period] * (n // period):
            return True
    return False


def reduced_word_count(m: int, l: int) -> int:
    if l == 0:
        return 1
    return 2 * m * (2 * m - 1) ** (l - 1)


def alphabet(m: int) -> list[Letter]:
    """The ``2m`` letters in the fixed order a, A, b, B, ..."""
    return [s * g for g in range(1, m + 1) for s in (1, -1)]


def enumerate_reduced_words(m: int, l: int, cap: int = DEFAULT_WORD_CAP) -> list[Word]:
    """All reduced words of length ``l`` over ``m`` generators, in a fixed order."""
    size = reduced_word_count(m, l)
    if size > cap:
        raise SizeCapError("reduced words", size, cap)
    letters = alphabet(m)
    words: list[Word] = [()]
    for _ in range(l):
        words = [w + (x,) for w in words for x in letters if not w or x != -w[-1]]
    return words


def iter_all_words(m: int, l: int) -> Iterator[Word]:
    return itertools.product(alphabet(m), repeat=l)


# -- string encoding -------------------------------------------------------

def format_word(w: Sequence[Letter]) -> str:
    return "".join(_LOWER[x - 1] if x > 0 else _LOWER[-x - 1].upper() for x in w)


def parse_word(s: str) -> Word:
    out = []
    for ch in s:
        if ch.lower() not in _LOWER:
            raise ValueError(f"not a generator letter: {ch!r}")
        g = _LOWER.index(ch.lower()) + 1
        out.append(g if ch.islower() else -g)
    return tuple(out)


# -- sampling ---------------------------------------------------------------

def _codes_to_letters(codes: np.ndarray) -> np.ndarray:
    # code 2(g-1) is g, code 2(g-1)+1 is g^-1; inverse is code ^ 1
    return ((codes >> 1) + 1) * (1 - 2 * (codes & 1))


def _sample_codes(m: int, l: int, count: int, rng: np.random.Generator) -> np.ndarray:
    codes = np.empty((count, l), dtype=np.int64)
    if l:
        codes[:, 0] = rng.integers(0, 2 * m, count)
        for k in range(1, l):
            r = rng.integers(0, 2 * m - 1, count)
            codes[:, k] = r + (r >= (codes[:, k - 1] ^ 1))
    return codes


def sample_word_array(m: int, l: int, size: tuple[int, ...], rng: np.random.Generator,
                      cyclic: bool = False) -> np.ndarray:
    """Array of shape ``size + (l,)`` of independent uniform reduced words (int8 letters)."""
    count = int(np.prod(size)) if size else 1
    codes = _sample_codes(m, l, count, rng)
    if cyclic and l >= 2:
        bad = codes[:, -1] == (codes[:, 0] ^ 1)
        while bad.any():
            codes[bad] = _sample_codes(m, l, int(bad.sum()), rng)
            bad = codes[:, -1] == (codes[:, 0] ^ 1)
    return _codes_to_letters(codes).astype(np.int8).reshape(tuple(size) + (l,))


def sample_reduced_word(m: int, l: int, rng: np.random.Generator, cyclic: bool = False) -> Word:
    """Uniform reduced word: first letter uniform over ``2m``, each next over ``2m-1``."""
    if m < 1 or l < 1:
        raise ValueError("need m >= 1 and l >= 1")
    return tuple(int(x) for x in sample_word_array(m, l, (1,), rng, cyclic=cyclic)[0])


def relator_count(m: int, l: int, d: float) -> int:
    """``floor((2m-1)^(d*l))``, robust to float round-off at exact integers."""
    value = (2 * m - 1) ** (d * l)
    n = math.floor(value)
    if math.isclose(value, n + 1, rel_tol=1e-12):
        n += 1
    return n


@dataclass(frozen=True)
class Presentation:
    m: int
    l: int
    d: float
    relators: tuple[Word, ...]
    duplicates: tuple[tuple[int, int], ...] = field(default=(), compare=False)
    proper_powers: tuple[int, ...] = field(default=(), compare=False)

    @property
    def size(self) -> int:
        return len(self.relators)

    def to_json(self, **extra) -> str:
        doc = {"m": self.m, "l": self.l, "d": self.d,
               "relators": [format_word(w) for w in self.relators]}
        doc.update(extra)
        return json.dumps(doc, indent=1)

    @classmethod
    def from_json(cls, text: str) -> "Presentation":
        doc = json.loads(text)
        try:
            relators = tuple(parse_word(s) for s in doc["relators"])
            return make_presentation(int(doc["m"]), int(doc["l"]), float(doc["d"]), relators)
        except KeyError as exc:
            raise ValueError(f"presentation JSON missing field {exc}") from None


def make_presentation(m: int, l: int, d: float, relators: Sequence[Word]) -> Presentation:
    relators = tuple(tuple(w) for w in relators)
    for w in relators:
        if len(w) != l or not is_reduced(w) or any(abs(x) > m or x == 0 for x in w):
            raise ValueError(f"relator {format_word(w)!r} is not a reduced word of length {l}")
    first: dict[Word, int] = {}
    dups = []
    for i, w in enumerate(relators):
        if w in first:
            dups.append((first[w], i))
        else:
            first[w] = i
    powers = tuple(i for i, w in enumerate(relators) if is_proper_power(w))
    return Presentation(m, l, d, relators, tuple(dups), powers)


def sample_presentation(m: int, l: int, d: float, rng: np.random.Generator,
                        strict: bool = False, cyclic: bool = False,
                        cap: int = DEFAULT_RELATOR_CAP) -> Presentation:
    """Draw ``floor((2m-1)^(dl))`` relators independently, with replacement.

    Duplicates and proper powers are recorded on the result, not resampled.
    With ``strict`` a duplicate raises :class:`DuplicateRelatorError`.
    """
    if m < 2 or not 0 < d < 1:
        raise ValueError("need m >= 2 and 0 < d < 1")
    n = relator_count(m, l, d)
    if n < 1:
        raise ValueError(f"(2m-1)^(dl) = {(2 * m - 1) ** (d * l):.3g} gives no relators")
    if n > cap:
        raise SizeCapError("relator count", n, cap)
    arr = sample_word_array(m, l, (n,), rng, cyclic=cyclic)
    pres = make_presentation(m, l, d, [tuple(int(x) for x in row) for row in arr])
    if strict and pres.duplicates:
        raise DuplicateRelatorError(f"duplicate relators at {pres.duplicates}")
    return pres
