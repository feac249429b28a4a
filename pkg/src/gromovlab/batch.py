"""Vectorized fulfillment checks across many sampled presentations at once.

Each trial's relator set is a row of a ``(trials, N, l)`` letter array.
For a diagram, the per-class slot constraints become bitmasks over the
``N`` relators of every trial (packed into uint64 words), so one-class
diagrams are decided by a handful of array ANDs.  Two classes are joined
on their shared-edge letters; three or more fall back to the backtracking
search on the trials that survive the per-class filter.

Trials are seeded in fixed sub-blocks from ``(seed, m, l, d, block)`` so
the sampled relator sets never depend on how the work is split.
"""

from __future__ import annotations

import collections
import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np

from .decorate import AbstractDiagram
from .fulfill import UnfulfillableError, _Compiled, build_slots
from .stats import MCEstimate
from .words import relator_count, sample_word_array

SUB_BLOCK = 1000
_JOIN_CELLS = 1 << 22


def trial_rng(seed: int, m: int, l: int, d: float, block: int) -> np.random.Generator:
    return np.random.default_rng([seed, m, l, round(d * 10**9), block])


def sample_trial_words(m: int, l: int, d: float, seed: int, start: int, count: int) -> np.ndarray:
    """Relator arrays for trials ``start .. start+count-1``; shape ``(count, N, l)``."""
    N = relator_count(m, l, d)
    out = np.empty((count, N, l), dtype=np.int8)
    t = start
    while t < start + count:
        b = t // SUB_BLOCK
        lo = b * SUB_BLOCK
        block = sample_word_array(m, l, (SUB_BLOCK, N), trial_rng(seed, m, l, d, b))
        take = min(lo + SUB_BLOCK, start + count) - t
        out[t - start:t - start + take] = block[t - lo:t - lo + take]
        t += take
    return out


@dataclass
class TrialBatch:
    m: int
    d: float
    words: np.ndarray  # (T, N, l) int8
    _eq: dict = field(default_factory=dict, repr=False)
    _pin: dict = field(default_factory=dict, repr=False)

    @classmethod
    def sample(cls, m: int, l: int, d: float, seed: int, trials: int, start: int = 0) -> "TrialBatch":
        return cls(m, d, sample_trial_words(m, l, d, seed, start, trials))

    @property
    def T(self) -> int:
        return self.words.shape[0]

    @property
    def N(self) -> int:
        return self.words.shape[1]

    @property
    def l(self) -> int:
        return self.words.shape[2]

    def pack(self, bits: np.ndarray) -> np.ndarray:
        T, N = bits.shape
        width = -(-N // 64) * 64
        if width != N:
            bits = np.concatenate([bits, np.zeros((T, width - N), dtype=bool)], axis=1)
        return np.packbits(bits, axis=1, bitorder="little").view(np.uint64)

    def unpack(self, mask: np.ndarray) -> np.ndarray:
        bits = np.unpackbits(mask.view(np.uint8), axis=1, bitorder="little")
        return bits[:, :self.N].astype(bool)

    def full(self) -> np.ndarray:
        if "full" not in self._pin:
            self._pin["full"] = self.pack(np.ones((self.T, self.N), dtype=bool))
        return self._pin["full"]

    def eq(self, j: int, k: int, tau: int) -> np.ndarray:
        """Relators whose letter at ``k`` equals ``tau`` times the letter at ``j`` (0-based)."""
        key = (j, k, tau)
        if key not in self._eq:
            W = self.words
            self._eq[key] = self.pack(W[:, :, k] == tau * W[:, :, j])
        return self._eq[key]

    def pin(self, k: int, x: int) -> np.ndarray:
        key = (k, x)
        if key not in self._pin:
            self._pin[key] = self.pack(self.words[:, :, k] == x)
        return self._pin[key]


def _letter_code(x: np.ndarray) -> np.ndarray:
    return 2 * (np.abs(x) - 1) + (x < 0)


class CompiledDiagram:
    """Bitmask recipe for one diagram: per-class filters plus cross-class joins."""

    def __init__(self, A: AbstractDiagram):
        self.A = A
        self.n = A.n
        try:
            ss = build_slots(A)
        except UnfulfillableError:
            self.contradiction = True
            return
        self.contradiction = False
        self.slot_system = ss
        self.intra: list[list[tuple]] = [[] for _ in range(A.n + 1)]
        self.cross: list[list[tuple[int, int, int]]] = []
        for g in ss.groups():
            by_class: dict[int, tuple[int, int]] = {}
            for mm in g.members:
                k, s = mm.position - 1, mm.sign
                if mm.cls in by_class:
                    k0, s0 = by_class[mm.cls]
                    # s*w[k] == s0*w[k0]  <=>  w[k] == s*s0*w[k0]
                    self.intra[mm.cls].append(("eq", k0, k, s * s0))
                else:
                    by_class[mm.cls] = (k, s)
                    if g.pin is not None:
                        self.intra[mm.cls].append(("pin", k, s * g.pin))
            if g.pin is None and len(by_class) >= 2:
                self.cross.append([(c, k, s) for c, (k, s) in sorted(by_class.items())])
        self._compiled = None

    def class_masks(self, batch: TrialBatch) -> list[np.ndarray]:
        out = [None]
        for c in range(1, self.n + 1):
            mask = batch.full()
            for op in self.intra[c]:
                if op[0] == "eq":
                    mask = mask & batch.eq(op[1], op[2], op[3])
                else:
                    mask = mask & batch.pin(op[1], op[2])
            out.append(mask)
        return out

    def evaluate(self, batch: TrialBatch) -> np.ndarray:
        """Per-trial bool: does that trial's relator set fulfill the diagram?"""
        T = batch.T
        if self.contradiction or batch.N < self.n:
            return np.zeros(T, dtype=bool)
        masks = self.class_masks(batch)
        alive = np.ones(T, dtype=bool)
        for c in range(1, self.n + 1):
            alive &= masks[c].any(axis=1)
        if self.n == 1 or not alive.any():
            return alive
        if self.n == 2:
            return self._join2(batch, masks, alive)
        return self._search(batch, masks, alive)

    def _join2(self, batch: TrialBatch, masks, alive) -> np.ndarray:
        base = 2 * batch.m
        span = base ** len(self.cross)
        if span >= 1 << 62:
            return self._join2_dense(batch, masks, alive)
        return self._join2_keys(batch, masks, alive, base, span)

    def _join2_keys(self, batch: TrialBatch, masks, alive, base: int, span: int) -> np.ndarray:
        """Encode each relator's shared-edge letters as one integer per class
        and count equal keys between distinct relators, trial by trial."""
        out = np.zeros(batch.T, dtype=bool)
        idx = np.flatnonzero(alive)
        step = max(1, min(len(idx), ((1 << 62) // span) - 1))
        for lo in range(0, len(idx), step):
            sel = idx[lo:lo + step]
            W = batch.words[sel].astype(np.int64)
            key1 = np.zeros(W.shape[:2], dtype=np.int64)
            key2 = np.zeros(W.shape[:2], dtype=np.int64)
            for group in self.cross:
                (_, k1, s1), (_, k2, s2) = group
                key1 = key1 * base + _letter_code(s1 * W[:, :, k1])
                key2 = key2 * base + _letter_code(s2 * W[:, :, k2])
            ok1 = batch.unpack(masks[1][sel])
            ok2 = batch.unpack(masks[2][sel])
            row = np.arange(len(sel), dtype=np.int64)[:, None] * span
            a = (key1 + row)[ok1]
            b = np.sort((key2 + row)[ok2])
            hits = np.searchsorted(b, a, side="right") - np.searchsorted(b, a, side="left")
            owner = np.broadcast_to(np.arange(len(sel))[:, None], ok1.shape)[ok1]
            pairs = np.bincount(owner, weights=hits, minlength=len(sel))
            same = (ok1 & ok2 & (key1 == key2)).sum(axis=1)
            out[sel] = pairs - same > 0
        return out

    def _join2_dense(self, batch: TrialBatch, masks, alive) -> np.ndarray:
        out = np.zeros(batch.T, dtype=bool)
        idx = np.flatnonzero(alive)
        N = batch.N
        step = max(1, _JOIN_CELLS // (N * N))
        off_diag = ~np.eye(N, dtype=bool)
        for lo in range(0, len(idx), step):
            sel = idx[lo:lo + step]
            W = batch.words[sel].astype(np.int16)
            ok = (batch.unpack(masks[1][sel])[:, :, None]
                  & batch.unpack(masks[2][sel])[:, None, :] & off_diag)
            for group in self.cross:
                (_, k1, s1), (_, k2, s2) = group
                ok &= (s1 * W[:, :, k1])[:, :, None] == (s2 * W[:, :, k2])[:, None, :]
            out[sel] = ok.any(axis=(1, 2))
        return out

    def _search(self, batch: TrialBatch, masks, alive) -> np.ndarray:
        from .fulfill import _search

        if self._compiled is None:
            self._compiled = _Compiled(self.slot_system)
        out = np.zeros(batch.T, dtype=bool)
        unpacked = [None] + [batch.unpack(mk) for mk in masks[1:]]
        for t in np.flatnonzero(alive):
            R = [tuple(int(x) for x in row) for row in batch.words[t]]
            cands = {c: list(np.flatnonzero(unpacked[c][t])) for c in range(1, self.n + 1)}
            out[t] = _search(self._compiled, R, cands) is not None
        return out


def evaluate_many(diagrams: Iterable[AbstractDiagram], batch: TrialBatch) -> list[np.ndarray]:
    return [CompiledDiagram(A).evaluate(batch) for A in diagrams]


_BATCHES: dict[tuple, list[TrialBatch]] = {}


def _batches(m: int, l: int, d: float, trials: int, seed: int, chunk: int) -> list[TrialBatch]:
    key = (m, l, d, trials, seed, chunk)
    if key not in _BATCHES:
        _BATCHES.clear()
        _BATCHES[key] = [TrialBatch.sample(m, l, d, seed, min(chunk, trials - s), s)
                         for s in range(0, trials, chunk)]
    return _BATCHES[key]


def evaluate_chunk(diagrams: Sequence[AbstractDiagram], m: int, l: int, d: float, trials: int,
                   seed: int, chunk: int = 10_000) -> tuple[np.ndarray, np.ndarray]:
    """Success counts per diagram and, per trial, whether any diagram was fulfilled.

    The sampled trials are cached per process, so a worker fed many chunks
    samples them once.
    """
    counts = np.zeros(len(diagrams), dtype=np.int64)
    anyhit = np.zeros(trials, dtype=bool)
    offset = 0
    for b in _batches(m, l, d, trials, seed, chunk):
        for i, A in enumerate(diagrams):
            hit = CompiledDiagram(A).evaluate(b)
            counts[i] += int(hit.sum())
            anyhit[offset:offset + b.T] |= hit
        offset += b.T
    return counts, anyhit


def _eval_task(args):
    return evaluate_chunk(*args)


def stream_evaluate(diagrams: Iterable[AbstractDiagram], m: int, l: int, d: float, trials: int,
                    seed: int, jobs: int = 1, chunk_size: int = 2000
                    ) -> Iterator[tuple[list[AbstractDiagram], np.ndarray, np.ndarray]]:
    """Evaluate a diagram stream in chunks, in order, on up to ``jobs`` processes.

    Yields ``(chunk, counts, anyhit)``; results never depend on ``jobs``.
    """
    it = iter(diagrams)

    def chunks():
        while True:
            block = list(itertools.islice(it, chunk_size))
            if not block:
                return
            yield block

    if jobs <= 1:
        for block in chunks():
            yield (block, *evaluate_chunk(block, m, l, d, trials, seed))
        return
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        window: collections.deque = collections.deque()
        for block in chunks():
            window.append((block, pool.submit(_eval_task, (block, m, l, d, trials, seed))))
            if len(window) >= 2 * jobs:
                blk, fut = window.popleft()
                yield (blk, *fut.result())
        while window:
            blk, fut = window.popleft()
            yield (blk, *fut.result())


def monte_carlo(diagrams: Sequence[AbstractDiagram], m: int, d: float, trials: int,
                seed: int = 0, chunk: int = 10_000) -> list[MCEstimate]:
    """Fulfillment frequency of each diagram over ``trials`` sampled presentations."""
    if trials < 1:
        raise ValueError("need at least one trial")
    if not diagrams:
        return []
    l = diagrams[0].l
    counts, _ = evaluate_chunk(diagrams, m, l, d, trials, seed, chunk)
    return [MCEstimate.from_counts(int(c), trials) for c in counts]
