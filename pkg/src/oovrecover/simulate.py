"""Synthetic corpora: ground truth, a normal-LM decode and an OOV-LM decode.

Randomness comes from a single :class:`random.Random` (MT19937) stream per
corpus and only its ``random()`` method is used, so corpora are identical
across platforms and Python versions for a given seed.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .align import CostMatrix, cross_distances, make_hard_matrix
from .formats import Label
from .phoneset import Lexicon, PhoneSeq
from .recovery import SIL, ContextEntry, Hypothesis, TimedWord


@dataclass(frozen=True)
class CorruptionModel:
    """Per-phone substitution/deletion and per-gap insertion probabilities.

    With a ``bias_matrix``, a substituted phone ``p`` becomes ``q`` with
    probability proportional to ``exp(-sub[p, q] / temperature)``;
    otherwise partners are uniform.
    """

    p_sub: float = 0.0
    p_del: float = 0.0
    p_ins: float = 0.0
    bias_matrix: Optional[CostMatrix] = None
    temperature: float = 0.2
    seed: int = 0

    def __post_init__(self):
        for name in ("p_sub", "p_del", "p_ins"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
        if self.p_sub + self.p_del > 1.0:
            raise ValueError("p_sub + p_del must not exceed 1")
        if self.temperature <= 0:
            raise ValueError("temperature must be > 0")


def _below(rng: random.Random, n: int) -> int:
    return min(int(rng.random() * n), n - 1)


def _pick(rng: random.Random, cumulative: Sequence[float]) -> int:
    u = rng.random() * cumulative[-1]
    lo, hi = 0, len(cumulative) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if cumulative[mid] > u:
            hi = mid
        else:
            lo = mid + 1
    return lo


class _PartnerTable:
    """Cumulative substitution-partner weights, one row per phone."""

    def __init__(self, n_phones: int, bias: Optional[CostMatrix], temperature: float):
        self.rows: List[Tuple[List[int], List[float]]] = []
        for p in range(n_phones):
            partners = [q for q in range(n_phones) if q != p]
            if bias is None:
                weights = [1.0] * len(partners)
            else:
                weights = [math.exp(-float(bias.sub[p, q]) / temperature) for q in partners]
            cum, acc = [], 0.0
            for w in weights:
                acc += w
                cum.append(acc)
            self.rows.append((partners, cum))

    def sample(self, rng, p):
        partners, cum = self.rows[p]
        return partners[_pick(rng, cum)]


def _corrupt(truth: Sequence[int], model: CorruptionModel, table: _PartnerTable, n_phones: int,
             rng: random.Random):
    out: List[int] = []
    events = {"sub": 0, "del": 0, "ins": 0, "keep": 0}

    def gap():
        if model.p_ins and rng.random() < model.p_ins:
            out.append(_below(rng, n_phones))
            events["ins"] += 1

    gap()
    for p in truth:
        u = rng.random()
        if u < model.p_sub:
            out.append(table.sample(rng, p))
            events["sub"] += 1
        elif u < model.p_sub + model.p_del:
            events["del"] += 1
        else:
            out.append(p)
            events["keep"] += 1
        gap()
    return tuple(out), events


def corrupt_phones(truth: Sequence[int], model: CorruptionModel, n_phones: int,
                   rng: Optional[random.Random] = None) -> PhoneSeq:
    """Corrupt one phone sequence.  Without ``rng`` a fresh stream is seeded from ``model.seed``."""
    if model.bias_matrix is not None and model.bias_matrix.size != n_phones:
        raise ValueError("bias matrix size does not match the phone set")
    rng = rng or random.Random(model.seed)
    table = _PartnerTable(n_phones, model.bias_matrix, model.temperature)
    return _corrupt(truth, model, table, n_phones, rng)[0]


@dataclass
class SimUtterance:
    utt_id: str
    entry_id: int
    truth_words: List[TimedWord]
    labels: List[Label]
    normal: Hypothesis
    oov: Hypothesis
    truth_phones: PhoneSeq
    decoded_phones: PhoneSeq


@dataclass
class SimCorpus:
    context: List[ContextEntry]
    utterances: List[SimUtterance] = field(default_factory=list)
    params: Dict = field(default_factory=dict)

    def truth(self) -> Dict[str, List[Label]]:
        return {u.utt_id: u.labels for u in self.utterances}

    def phone_pairs(self):
        return [(u.utt_id, u.truth_phones, u.decoded_phones) for u in self.utterances]


@dataclass(frozen=True)
class SimSettings:
    mode: str = "sentence"  # "word" or "sentence"
    min_fillers: int = 4
    max_fillers: int = 10
    word_ms: int = 300
    duration_jitter_ms: int = 60
    boundary_jitter_ms: int = 150
    p_drop: float = 0.5

    def __post_init__(self):
        if self.mode not in ("word", "sentence"):
            raise ValueError(f"unknown simulation mode {self.mode!r}")
        if not 0 <= self.min_fillers <= self.max_fillers:
            raise ValueError("need 0 <= min_fillers <= max_fillers")
        if self.word_ms <= self.duration_jitter_ms:
            raise ValueError("word_ms must exceed duration_jitter_ms")


def filler_words(lexicon: Lexicon, context: Sequence[ContextEntry]) -> List[str]:
    taken = {tok for e in context for tok in e.surface.split()}
    return [w for w in lexicon.words() if w not in taken]


def vowel_indices(phoneset) -> List[int]:
    """Phones with a tongue-height value (``high``/``mid``/``low`` feature set)."""
    cols = [phoneset.feature_names.index(f) for f in ("high", "mid", "low") if f in phoneset.feature_names]
    if not cols:
        raise ValueError("phone set has no high/mid/low features; pass vowels explicitly")
    return [int(i) for i in np.nonzero(phoneset.features[:, cols].sum(axis=1) > 0)[0]]


def synthetic_context(n: int, phoneset, n_syllables: int = 40, words_syllables=(2, 3), seed: int = 7,
                      vowels: Optional[Sequence[int]] = None) -> List[ContextEntry]:
    """``n`` distinct pseudo-names compounded from a shared pool of CV(C) syllables.

    Real context lists (city or dealer names) reuse a small stock of
    morphemes, so many entries differ from a neighbour by one syllable; a
    shared pool reproduces that density.  Surfaces are ``ctx0000`` style.
    """
    vowels = list(vowel_indices(phoneset) if vowels is None else vowels)
    consonants = [i for i in range(len(phoneset)) if i not in set(vowels)]
    if not vowels or not consonants:
        raise ValueError("need both vowels and consonants")
    lo, hi = words_syllables
    if not 1 <= lo <= hi:
        raise ValueError("need 1 <= min syllables <= max syllables")
    if n > sum(n_syllables ** k for k in range(lo, hi + 1)):
        raise ValueError(f"cannot draw {n} distinct names from {n_syllables} syllables")
    rng = random.Random(seed)
    pool = []
    for _ in range(n_syllables):
        syl = [consonants[_below(rng, len(consonants))], vowels[_below(rng, len(vowels))]]
        if rng.random() < 0.4:
            syl.append(consonants[_below(rng, len(consonants))])
        pool.append(tuple(syl))
    out: List[ContextEntry] = []
    seen = set()
    while len(out) < n:
        k = lo + _below(rng, hi - lo + 1)
        phones = sum((pool[_below(rng, n_syllables)] for _ in range(k)), ())
        if phones in seen:
            continue
        seen.add(phones)
        out.append(ContextEntry(len(out), f"ctx{len(out):04d}", (phones,)))
    return out


def _jitter(rng, start, end, amount):
    if amount:
        start = max(0, start + _below(rng, 2 * amount + 1) - amount)
        end = end + _below(rng, 2 * amount + 1) - amount
    return start, max(end, start + 10)


def generate_corpus(context: Sequence[ContextEntry], n_utts: int, model: CorruptionModel,
                    lexicon: Lexicon, settings: SimSettings = SimSettings()) -> SimCorpus:
    context = list(context)
    corpus = SimCorpus(context, params={"n_utts": n_utts, "mode": settings.mode})
    if n_utts == 0:
        return corpus
    if not context:
        raise ValueError("context list is empty")
    n_phones = len(lexicon.phoneset)
    if model.bias_matrix is not None and model.bias_matrix.size != n_phones:
        raise ValueError("bias matrix size does not match the phone set")
    fillers = filler_words(lexicon, context)
    if not fillers:
        raise ValueError("lexicon has no filler words outside the context list")
    filler_prons = [lexicon.get(w)[0] for w in fillers]
    hard = make_hard_matrix(n_phones)
    table = _PartnerTable(n_phones, model.bias_matrix, model.temperature)
    rng = random.Random(model.seed)

    for k in range(n_utts):
        entry = context[_below(rng, len(context))]
        variant = entry.variants[_below(rng, len(entry.variants))]
        decoded, _ = _corrupt(variant, model, table, n_phones, rng)

        if settings.mode == "sentence":
            n_fill = settings.min_fillers + _below(rng, settings.max_fillers - settings.min_fillers + 1)
            slot = _below(rng, n_fill + 1)
            words = [fillers[_below(rng, len(fillers))] for _ in range(n_fill)]
            words.insert(slot, None)
        else:
            slot, words = 0, [None]

        truth_words, t = [], 0
        for w in words:
            n_tok = len(entry.surface.split()) if w is None else 1
            dur = settings.word_ms * n_tok + _below(rng, 2 * settings.duration_jitter_ms + 1) - settings.duration_jitter_ms
            truth_words.append(TimedWord(entry.surface if w is None else w, t, t + dur))
            t += dur
        target = truth_words[slot]

        near = None
        if rng.random() >= settings.p_drop:
            d = cross_distances(filler_prons, [variant], hard)[:, 0]
            near = fillers[int(np.argmin(d))]

        normal, oov = [], []
        for i, tw in enumerate(truth_words):
            if i != slot:
                normal.append(TimedWord(tw.surface, *_jitter(rng, tw.start, tw.end, settings.boundary_jitter_ms)))
                oov.append(TimedWord(tw.surface, *_jitter(rng, tw.start, tw.end, settings.boundary_jitter_ms)))
                continue
            if near is not None:
                normal.append(TimedWord(near, *_jitter(rng, tw.start, tw.end, settings.boundary_jitter_ms)))
            if decoded:
                oov.append(TimedWord(SIL, *_jitter(rng, tw.start, tw.end, settings.boundary_jitter_ms), decoded))

        utt_id = f"utt{k:05d}"
        corpus.utterances.append(SimUtterance(
            utt_id, entry.id, truth_words,
            [Label(entry.surface, target.start, target.end)],
            Hypothesis(utt_id, tuple(sorted(normal, key=lambda w: w.start))),
            Hypothesis(utt_id, tuple(sorted(oov, key=lambda w: w.start))),
            tuple(variant), decoded,
        ))
    return corpus
