"""Phone inventory, articulatory feature vectors and the pronunciation lexicon."""
from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Sequence, Tuple

import numpy as np

from .errors import (
    DuplicatePhone,
    EmptyPronunciation,
    FeatureWidthError,
    FormatError,
    MissingFeatures,
    OOVToken,
    UnknownPhone,
    ZeroFeatureVector,
)

PhoneSeq = Tuple[int, ...]

DEFAULT_MAX_VARIANTS = 16


class LexiconWarning(UserWarning):
    pass


@dataclass(frozen=True)
class Phone:
    symbol: str
    index: int


def _check_symbol(symbol: str) -> None:
    if not symbol or any(ch.isspace() for ch in symbol):
        raise FormatError(f"invalid phone symbol {symbol!r}")


@dataclass(frozen=True, eq=False)
class PhoneSet:
    """Immutable phone inventory with one feature vector per phone.

    ``features`` is an ``(N, D)`` read-only array whose row ``i`` belongs to
    the phone with index ``i``.
    """

    phones: Tuple[Phone, ...]
    features: np.ndarray
    feature_names: Tuple[str, ...] = ()
    _by_symbol: Dict[str, int] = field(init=False, repr=False)

    def __post_init__(self):
        by_symbol = {}
        for i, p in enumerate(self.phones):
            _check_symbol(p.symbol)
            if p.index != i:
                raise FormatError(f"phone {p.symbol!r} has index {p.index}, expected {i}")
            if p.symbol in by_symbol:
                raise DuplicatePhone(p.symbol)
            by_symbol[p.symbol] = i
        feats = np.array(self.features, dtype=np.float64)
        if feats.ndim != 2 or feats.shape[0] != len(self.phones):
            raise FeatureWidthError(
                f"feature table shape {feats.shape} does not match {len(self.phones)} phones"
            )
        if not np.all(np.isfinite(feats)) or feats.min(initial=0) < 0 or feats.max(initial=0) > 1:
            raise FormatError("feature values must lie in [0, 1]")
        for i, row in enumerate(feats):
            if not row.any():
                raise ZeroFeatureVector(self.phones[i].symbol)
        feats.setflags(write=False)
        object.__setattr__(self, "features", feats)
        object.__setattr__(self, "_by_symbol", by_symbol)

    @classmethod
    def from_table(cls, symbols: Sequence[str], features, feature_names=()) -> "PhoneSet":
        phones = tuple(Phone(s, i) for i, s in enumerate(symbols))
        return cls(phones, np.asarray(features, dtype=np.float64), tuple(feature_names))

    def __len__(self):
        return len(self.phones)

    @property
    def dimension(self) -> int:
        return self.features.shape[1]

    @property
    def symbols(self) -> List[str]:
        return [p.symbol for p in self.phones]

    def index(self, symbol: str) -> int:
        try:
            return self._by_symbol[symbol]
        except KeyError:
            raise UnknownPhone(symbol) from None

    def encode(self, symbols: Iterable[str]) -> PhoneSeq:
        return tuple(self.index(s) for s in symbols)

    def decode(self, seq: Iterable[int]) -> List[str]:
        return [self.phones[i].symbol for i in seq]


def _data_lines(path):
    """Yield ``(lineno, text)`` for non-blank, non-comment lines."""
    with open(path, encoding="utf-8") as f:
        for lineno, raw in enumerate(f, 1):
            line = raw.rstrip("\n").rstrip("\r")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            yield lineno, line


def load_phoneset(phone_file, feature_file) -> PhoneSet:
    symbols = []
    seen = set()
    for lineno, line in _data_lines(phone_file):
        sym = line.strip()
        if any(ch.isspace() for ch in sym):
            raise FormatError(f"phone symbol contains whitespace: {sym!r}", phone_file, lineno)
        if sym in seen:
            raise DuplicatePhone(sym)
        seen.add(sym)
        symbols.append(sym)

    rows: Dict[str, List[float]] = {}
    header = None
    for lineno, line in _data_lines(feature_file):
        cols = line.split("\t")
        if header is None:
            header = cols
            if len(header) < 2:
                raise FormatError("feature header needs at least one feature column", feature_file, lineno)
            continue
        if len(cols) != len(header):
            raise FeatureWidthError(
                f"{feature_file}:{lineno}: expected {len(header)} columns, got {len(cols)}"
            )
        sym = cols[0]
        if sym not in seen:
            raise UnknownPhone(sym)
        if sym in rows:
            raise DuplicatePhone(sym)
        try:
            rows[sym] = [float(v) for v in cols[1:]]
        except ValueError as e:
            raise FormatError(str(e), feature_file, lineno) from None
    if header is None:
        raise FormatError("empty feature file", feature_file)

    for sym in symbols:
        if sym not in rows:
            raise MissingFeatures(sym)
    feats = np.array([rows[s] for s in symbols], dtype=np.float64).reshape(len(symbols), len(header) - 1)
    return PhoneSet.from_table(symbols, feats, header[1:])


@dataclass(frozen=True)
class Lexicon:
    """Case-folded word -> pronunciations, in file order."""

    entries: Dict[str, Tuple[PhoneSeq, ...]]
    phoneset: PhoneSet

    def __contains__(self, word):
        return word.lower() in self.entries

    def __len__(self):
        return len(self.entries)

    def get(self, word):
        return self.entries.get(word.lower())

    def words(self):
        return list(self.entries)


def load_lexicon(lexicon_file, phoneset: PhoneSet) -> Lexicon:
    entries: Dict[str, List[PhoneSeq]] = {}
    for lineno, line in _data_lines(lexicon_file):
        if "\t" not in line:
            raise FormatError("expected word<TAB>phones", lexicon_file, lineno)
        word, pron = line.split("\t", 1)
        word = word.strip().lower()
        if not word:
            raise FormatError("empty word", lexicon_file, lineno)
        symbols = pron.split()
        if not symbols:
            raise EmptyPronunciation(word)
        seq = phoneset.encode(symbols)
        prons = entries.setdefault(word, [])
        if seq in prons:
            warnings.warn(f"{lexicon_file}:{lineno}: duplicate pronunciation for {word!r}", LexiconWarning)
            continue
        prons.append(seq)
    return Lexicon({w: tuple(p) for w, p in entries.items()}, phoneset)


def save_lexicon(lexicon: Lexicon, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for word, prons in lexicon.entries.items():
            for seq in prons:
                f.write(word + "\t" + " ".join(lexicon.phoneset.decode(seq)) + "\n")


def phonemize(text: str, lexicon: Lexicon, max_variants: int = DEFAULT_MAX_VARIANTS) -> List[PhoneSeq]:
    """Concatenated pronunciations of a word or phrase.

    Returns the cross product of the per-token pronunciations, earliest
    lexicon entries first, truncated to ``max_variants``.
    """
    per_token = []
    for token in text.split():
        prons = lexicon.get(token)
        if prons is None:
            raise OOVToken(token)
        per_token.append(prons)
    if not per_token:
        return []
    combos = itertools.islice(itertools.product(*per_token), max_variants)
    return [tuple(itertools.chain.from_iterable(c)) for c in combos]


def default_data_path(name: str) -> Path:
    return Path(__file__).with_name("data") / name
