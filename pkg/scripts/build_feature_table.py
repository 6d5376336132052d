"""Regenerate the shipped phone inventory and articulatory feature table.

The 39-column schema is a reconstruction for a common Hindi/English phone
set: the attribute categories follow the usual Indic phonetic grouping
(vowel length and placement, manner and place of articulation, aspiration,
nukta, halanta, anusvara, visarga), but the exact column set is ours.

Values are specified contrastively: an attribute shared by every member of a
major class (vowels are all voiced; every consonant is a consonant) carries
no contrast and is left unset.  Such redundant columns dilute the cosine
geometry, pulling all consonant pairs toward one distance.  The ``vowel``,
``consonant`` and ``halanta`` columns are kept for schema width but are
zero in the shipped table.

    python scripts/build_feature_table.py src/oovrecover/data
"""
import sys
from pathlib import Path

FEATURES = [
    "vowel", "consonant", "short", "medium", "long", "front", "central",
    "back", "high", "mid", "low", "rounded", "diphthong", "nasalized",
    "plosive", "fricative", "affricate", "nasal", "central_approximant",
    "lateral_approximant", "flap", "trill", "velar", "palatal", "retroflex",
    "dental", "alveolar", "labial", "labiodental", "glottal", "postalveolar",
    "uvular", "voiced", "aspirated", "nukta", "halanta", "anusvara",
    "visarga", "sibilant",
]

V = {}
C = {}


def _v(**kw):
    return {**V, **kw}


def _c(**kw):
    return {**C, **kw}


def _stops(place, voiceless, voiceless_asp, voiced, voiced_asp, manner="plosive"):
    return {
        voiceless: _c(**{manner: 1, place: 1}),
        voiceless_asp: _c(**{manner: 1, place: 1, "aspirated": 1}),
        voiced: _c(**{manner: 1, place: 1, "voiced": 1}),
        voiced_asp: _c(**{manner: 1, place: 1, "voiced": 1, "aspirated": 1}),
    }


PHONES = {
    # vowels
    "a": _v(short=1, central=1, mid=0.5, low=0.5),
    "aa": _v(long=1, central=1, low=1),
    "i": _v(short=1, front=1, high=1),
    "ii": _v(long=1, front=1, high=1),
    "u": _v(short=1, back=1, high=1, rounded=1),
    "uu": _v(long=1, back=1, high=1, rounded=1),
    "e": _v(medium=1, front=1, mid=1),
    "ee": _v(long=1, front=1, mid=1),
    "o": _v(medium=1, back=1, mid=1, rounded=1),
    "oo": _v(long=1, back=1, mid=1, rounded=1),
    "ai": _v(long=1, diphthong=1, front=1, central=0.5, low=0.5, high=0.5),
    "au": _v(long=1, diphthong=1, back=1, central=0.5, low=0.5, rounded=0.5),
    "ae": _v(short=1, front=1, low=1),
    "ax": _v(short=1, central=1, mid=1),
    "eh": _v(short=1, front=1, mid=1, low=0.3),
    "ih": _v(short=1, front=1, high=0.7, mid=0.3),
    "uh": _v(short=1, back=1, high=0.7, mid=0.3, rounded=0.5),
    "aw": _v(long=1, diphthong=1, back=0.5, central=0.5, low=0.5, rounded=0.5),
    "oy": _v(long=1, diphthong=1, back=1, front=0.5, mid=1, rounded=0.5),
    "rq": _v(short=1, central=1, mid=1, retroflex=1, central_approximant=0.5),
    # anusvara / visarga
    "mq": _c(nasal=1, anusvara=1, voiced=1, nasalized=1),
    "hq": _c(fricative=1, glottal=1, visarga=1),
    # stops and affricates
    **_stops("velar", "k", "kh", "g", "gh"),
    **_stops("palatal", "c", "ch", "j", "jh", manner="affricate"),
    **_stops("retroflex", "tx", "txh", "dx", "dxh"),
    **_stops("dental", "t", "th", "d", "dh"),
    **_stops("labial", "p", "ph", "b", "bh"),
    # nasals
    "ng": _c(nasal=1, velar=1, voiced=1),
    "nj": _c(nasal=1, palatal=1, voiced=1),
    "nx": _c(nasal=1, retroflex=1, voiced=1),
    "n": _c(nasal=1, dental=1, alveolar=0.5, voiced=1),
    "m": _c(nasal=1, labial=1, voiced=1),
    # approximants and liquids
    "y": _c(central_approximant=1, palatal=1, voiced=1),
    "r": _c(trill=1, flap=0.5, alveolar=1, voiced=1),
    "l": _c(lateral_approximant=1, alveolar=1, voiced=1),
    "w": _c(central_approximant=1, labial=1, rounded=1, voiced=1),
    "v": _c(central_approximant=1, labiodental=1, voiced=1),
    "lx": _c(lateral_approximant=1, retroflex=1, voiced=1),
    # fricatives and nukta consonants
    "s": _c(fricative=1, alveolar=1, sibilant=1),
    "sh": _c(fricative=1, postalveolar=1, sibilant=1),
    "sx": _c(fricative=1, retroflex=1, sibilant=1),
    "h": _c(fricative=1, glottal=1, voiced=0.5),
    "f": _c(fricative=1, labiodental=1, nukta=1),
    "z": _c(fricative=1, alveolar=1, sibilant=1, voiced=1, nukta=1),
    "zh": _c(fricative=1, postalveolar=1, sibilant=1, voiced=1),
    "x": _c(fricative=1, velar=1, nukta=1),
    "gq": _c(fricative=1, velar=1, voiced=1, nukta=1),
    "q": _c(plosive=1, uvular=1, nukta=1),
    "dxq": _c(flap=1, retroflex=1, voiced=1, nukta=1),
    "dxhq": _c(flap=1, retroflex=1, voiced=1, aspirated=1, nukta=1),
}


def main(out_dir):
    out = Path(out_dir)
    assert len(PHONES) == 65, len(PHONES)
    assert len(FEATURES) == 39
    for attrs in PHONES.values():
        unknown = set(attrs) - set(FEATURES)
        assert not unknown, unknown
    rows = [tuple(attrs.get(name, 0) for name in FEATURES) for attrs in PHONES.values()]
    assert len(set(rows)) == len(rows), "two phones share a feature vector"
    with open(out / "phones.tsv", "w") as f:
        f.write("# common Hindi/English phone set (65 phones)\n")
        for p in PHONES:
            f.write(p + "\n")
    with open(out / "features.tsv", "w") as f:
        f.write("\t".join(["phone", *FEATURES]) + "\n")
        for p, attrs in PHONES.items():
            row = [p] + [f"{attrs.get(name, 0):g}" for name in FEATURES]
            f.write("\t".join(row) + "\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "src/oovrecover/data")
