import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oovrecover.align import CostMatrix, make_hard_matrix
from oovrecover.confusion import build_phonetic_matrix
from oovrecover.phoneset import Lexicon, PhoneSet
from oovrecover.recovery import (
    SIL, ContextEntry, Hypothesis, RecoveryConfig, Recovered, TimedWord, merge_transcripts,
    pair_hypotheses, pass1_exact, pass2_fuzzy, recover_corpus, recover_utterance, span_candidates,
)


def w(surface, start, end, phones=None):
    return TimedWord(surface, start, end, phones)


@pytest.fixture
def enc(phoneset):
    return lambda text: phoneset.encode(text.split())


@pytest.fixture
def brno(enc):
    return [ContextEntry(0, "brno", (enc("b r n o"),))]


def beer_utterance(enc, sil_phones="b r n oo"):
    normal = Hypothesis("u1", (w("i", 0, 200), w("live", 200, 500), w("in", 500, 700), w("beer", 700, 1100)))
    oov = Hypothesis("u1", (w("i", 0, 200), w("live", 200, 500), w("in", 500, 700),
                            w(SIL, 700, 1100, enc(sil_phones))))
    return normal, oov


# --- types -------------------------------------------------------------------

def test_timed_word_validation():
    with pytest.raises(ValueError):
        TimedWord("x", 100, 100)
    with pytest.raises(ValueError):
        TimedWord(SIL, 0, 10)
    with pytest.raises(ValueError):
        Hypothesis("u", (w("a", 50, 60), w("b", 0, 10)))
    Hypothesis("u", (w("a", 0, 60), w("b", 10, 20)))  # overlaps are allowed


def test_config_validation():
    for bad in ({"cost_threshold": -1}, {"max_span_words": 0}, {"window_ms": -5}):
        with pytest.raises(ValueError):
            RecoveryConfig(**bad)


def test_context_entry_needs_phones():
    with pytest.raises(ValueError):
        ContextEntry(0, "x", ())
    with pytest.raises(ValueError):
        ContextEntry(0, "x", ((),))


# --- pass 1 ------------------------------------------------------------------

def test_pass1_exact_match(enc, brno):
    hyp = Hypothesis("u", (w(SIL, 0, 400, enc("b r n o")),))
    (r,) = pass1_exact(hyp, brno)
    assert (r.pass_no, r.cost, r.entry_id, r.span) == (1, 0.0, 0, (0, 1))


def test_pass1_inexact(enc, brno):
    assert pass1_exact(Hypothesis("u", (w(SIL, 0, 400, enc("b r n")),)), brno) == []


def test_pass1_ignores_non_sil(enc, brno):
    assert pass1_exact(Hypothesis("u", (w("brno", 0, 400, enc("b r n o")),)), brno) == []


def test_pass1_lowest_id_wins(enc):
    ctx = [ContextEntry(5, "later", (enc("b r n o"),)), ContextEntry(2, "earlier", (enc("x"), enc("b r n o")))]
    (r,) = pass1_exact(Hypothesis("u", (w(SIL, 0, 400, enc("b r n o")),)), ctx)
    assert r.surface == "earlier"


# --- pass 2 ------------------------------------------------------------------

def test_beer_vs_brno_costs_three(phoneset, enc, brno):
    hyp = Hypothesis("u", (w("beer", 0, 400, enc("b ih r")),))
    hard = make_hard_matrix(phoneset)
    (r,) = pass2_fuzzy(hyp, brno, hard, RecoveryConfig(cost_threshold=3))
    assert r.cost == 3.0 and r.pass_no == 2
    assert pass2_fuzzy(hyp, brno, hard, RecoveryConfig(cost_threshold=2.999)) == []


def test_exact_span_always_accepted(phoneset, enc, brno):
    hyp = Hypothesis("u", (w("x", 0, 100, enc("b r")), w("y", 100, 300, enc("n o"))))
    (r,) = pass2_fuzzy(hyp, brno, make_hard_matrix(phoneset), RecoveryConfig(cost_threshold=0))
    assert r.cost == 0 and r.span == (0, 2) and (r.start, r.end) == (0, 300)


def test_empty_context(phoneset, enc):
    hyp = Hypothesis("u", (w(SIL, 0, 100, enc("b r")),))
    assert pass2_fuzzy(hyp, [], make_hard_matrix(phoneset), RecoveryConfig()) == []


def test_pass1_spans_excluded(phoneset, enc, brno):
    hyp = Hypothesis("u", (w(SIL, 0, 100, enc("b r n o")),))
    first = pass1_exact(hyp, brno)
    cfg = RecoveryConfig(allow_repeats=True)
    assert pass2_fuzzy(hyp, brno, make_hard_matrix(phoneset), cfg, first) == []


def test_tie_prefers_longer_span_then_lower_id(toy_phoneset):
    hard = make_hard_matrix(toy_phoneset)
    a, b = toy_phoneset.encode("a"), toy_phoneset.encode("b")
    hyp = Hypothesis("u", (w("p", 0, 100, a), w("q", 100, 200, b)))
    # "ab" matches span [0,2) at cost 0; "a" would match [0,1) at cost 0 too.
    ctx = [ContextEntry(0, "A", (a,)), ContextEntry(1, "AB", (a + b,))]
    out = pass2_fuzzy(hyp, ctx, hard, RecoveryConfig(cost_threshold=0))
    assert [(r.surface, r.span) for r in out] == [("AB", (0, 2))]
    ctx = [ContextEntry(3, "B1", (b,)), ContextEntry(1, "B0", (b,))]
    out = pass2_fuzzy(Hypothesis("u", (w("q", 0, 100, b),)), ctx, hard, RecoveryConfig(cost_threshold=0))
    assert [r.surface for r in out] == ["B0"]


def test_greedy_order_and_disjointness(toy_phoneset):
    hard = make_hard_matrix(toy_phoneset)
    e = toy_phoneset.encode
    hyp = Hypothesis("u", (w("1", 0, 100, e("ab")), w("2", 100, 200, e("cd")), w("3", 200, 300, e("ab"))))
    ctx = [ContextEntry(0, "X", (e("abcd"),)), ContextEntry(1, "Y", (e("cda"),))]
    out = pass2_fuzzy(hyp, ctx, hard, RecoveryConfig(cost_threshold=5))
    # X takes [0,2) at cost 0, which blocks Y's cost-1 spans [1,2) and [1,3);
    # Y falls back to [2,3): "cda" -> "ab" costs 3 by hand.
    assert [(r.surface, r.span, r.cost) for r in out] == [("X", (0, 2), 0.0), ("Y", (2, 3), 3.0)]
    # With repeats, X re-matches "ab" on [2,3) at cost 2, ahead of Y's 3.
    out = pass2_fuzzy(hyp, ctx, hard, RecoveryConfig(cost_threshold=5, allow_repeats=True))
    assert [(r.surface, r.span, r.cost) for r in out] == [("X", (0, 2), 0.0), ("X", (2, 3), 2.0)]
    spans = [r.span for r in out]
    for i, s in enumerate(spans):
        for t in spans[i + 1:]:
            assert s[1] <= t[0] or t[1] <= s[0]


def test_repeats_off_and_on(toy_phoneset):
    hard = make_hard_matrix(toy_phoneset)
    e = toy_phoneset.encode
    hyp = Hypothesis("u", (w("1", 0, 100, e("ab")), w("2", 100, 200, e("ab"))))
    ctx = [ContextEntry(0, "X", (e("ab"),))]
    assert len(pass2_fuzzy(hyp, ctx, hard, RecoveryConfig())) == 1
    assert [r.span for r in pass2_fuzzy(hyp, ctx, hard, RecoveryConfig(allow_repeats=True))] == [(0, 1), (1, 2)]


def test_unknown_word_is_skipped_with_diagnostic(phoneset, enc, brno, lexicon):
    hyp = Hypothesis("u", (w("zzyzx", 0, 100), w(SIL, 100, 400, enc("b r n oo"))))
    diags = []
    out = pass2_fuzzy(hyp, brno, make_hard_matrix(phoneset), RecoveryConfig(), lexicon=lexicon, diagnostics=diags)
    assert [r.span for r in out] == [(1, 2)]
    assert len(diags) == 1 and "zzyzx" in diags[0]


def test_lexicon_supplies_phones_for_plain_words(phoneset, enc, brno, lexicon):
    hyp = Hypothesis("u", (w("beer", 0, 400),))
    (r,) = pass2_fuzzy(hyp, brno, make_hard_matrix(phoneset), RecoveryConfig(), lexicon=lexicon)
    assert r.cost == 3.0  # b ii r vs b r n o


def test_length_normalised_costs(phoneset, enc, brno):
    hyp = Hypothesis("u", (w("beer", 0, 400, enc("b ih r")),))
    (r,) = pass2_fuzzy(hyp, brno, make_hard_matrix(phoneset), RecoveryConfig(length_normalize=True))
    assert r.cost == 0.75


def test_max_span_limits_concatenation(toy_phoneset):
    hard = make_hard_matrix(toy_phoneset)
    e = toy_phoneset.encode
    hyp = Hypothesis("u", tuple(w(str(k), 100 * k, 100 * k + 100, e("a")) for k in range(4)))
    ctx = [ContextEntry(0, "AAAA", (e("aaaa"),))]
    (r,) = pass2_fuzzy(hyp, ctx, hard, RecoveryConfig(max_span_words=2, cost_threshold=10))
    assert r.span[1] - r.span[0] <= 2 and r.cost == 2.0


# --- merge -------------------------------------------------------------------

def test_motivating_example(phoneset, enc, brno, lexicon):
    normal, oov = beer_utterance(enc)
    rep = recover_utterance(normal, oov, brno, build_phonetic_matrix(phoneset), RecoveryConfig(), lexicon)
    assert rep.merged.text() == "i live in brno"
    (r,) = rep.recovered
    assert r.pass_no == 2 and (r.start, r.end) == (700, 1100)


def test_no_recoveries_keeps_normal():
    normal = Hypothesis("u", (w("a", 0, 10), w("b", 5, 30)))
    assert merge_transcripts(normal, []) == normal


def test_partial_overlap_keeps_both():
    normal = Hypothesis("u", (w("left", 0, 400), w("gone", 450, 600), w("right", 700, 1000)))
    rec = Recovered(0, "brno", 2, 1.0, 200, 800, (0, 1))
    merged = merge_transcripts(normal, [rec])
    assert merged.text() == "left brno right"
    assert [x.start for x in merged.words] == [0, 200, 700]


def test_recover_utterance_exact_case(phoneset, enc, brno, lexicon):
    normal, oov = beer_utterance(enc, "b r n o")
    rep = recover_utterance(normal, oov, brno, make_hard_matrix(phoneset), RecoveryConfig(), lexicon)
    assert [(r.pass_no, r.cost) for r in rep.recovered] == [(1, 0.0)]
    assert rep.merged.text() == "i live in brno"


def test_recover_utterance_nothing_found(phoneset, enc, lexicon):
    normal, oov = beer_utterance(enc)
    rep = recover_utterance(normal, oov, [], make_hard_matrix(phoneset), RecoveryConfig(), lexicon)
    assert rep.recovered == [] and rep.merged == normal


def test_utt_id_mismatch(phoneset, brno):
    with pytest.raises(ValueError):
        recover_utterance(Hypothesis("a"), Hypothesis("b"), brno, make_hard_matrix(phoneset))


def test_report_json_shape(phoneset, enc, brno, lexicon):
    normal, oov = beer_utterance(enc)
    rep = recover_utterance(normal, oov, brno, build_phonetic_matrix(phoneset), RecoveryConfig(), lexicon)
    js = rep.to_json()
    assert set(js) == {"utt_id", "recoveries", "merged", "diagnostics"}
    assert js["recoveries"][0]["surface"] == "brno" and js["recoveries"][0]["pass"] == 2
    assert js["merged"][-1] == {"w": "brno", "start_ms": 700, "end_ms": 1100}


def test_pairing_skips_unmatched(caplog):
    n = [Hypothesis("a"), Hypothesis("b"), Hypothesis("c")]
    o = [Hypothesis("c"), Hypothesis("a"), Hypothesis("z")]
    pairs, missing = pair_hypotheses(n, o)
    assert [p[0].utt_id for p in pairs] == ["a", "c"]
    assert missing == ["b", "z"]
    assert "present in only one" in caplog.text


def test_parallel_matches_serial(phoneset, enc, brno, lexicon):
    pairs = [beer_utterance(enc, s) for s in ("b r n o", "b r n oo", "p r n o", "b r")]
    pairs = [(Hypothesis(f"u{k}", n.words), Hypothesis(f"u{k}", o.words)) for k, (n, o) in enumerate(pairs)]
    phon = build_phonetic_matrix(phoneset)
    serial = recover_corpus(pairs, brno, phon, RecoveryConfig(), lexicon, jobs=1)
    parallel = recover_corpus(pairs, brno, phon, RecoveryConfig(), lexicon, jobs=3)
    assert [r.to_json() for r in serial] == [r.to_json() for r in parallel]


# --- properties ------------------------------------------------------------

PS = PhoneSet.from_table(list("abcd"), np.eye(4) + 0.2 * np.roll(np.eye(4), 1, axis=1), list("wxyz"))
phones = st.lists(st.integers(0, 3), min_size=1, max_size=4).map(tuple)


@st.composite
def utterances(draw):
    n = draw(st.integers(0, 5))
    words, t = [], 0
    for k in range(n):
        dur = draw(st.integers(50, 400))
        sil = draw(st.booleans())
        words.append(TimedWord(SIL if sil else f"w{k}", t, t + dur, draw(phones)))
        t += dur + draw(st.integers(0, 50))
    ctx = [ContextEntry(i, f"c{i}", tuple(draw(st.lists(phones, min_size=1, max_size=2))))
           for i in range(draw(st.integers(0, 4)))]
    normal = []
    for k in range(draw(st.integers(0, 4))):
        s = draw(st.integers(0, max(t, 1)))
        normal.append(TimedWord(f"n{k}", s, s + draw(st.integers(1, 500))))
    normal.sort(key=lambda x: x.start)
    return Hypothesis("u", tuple(normal)), Hypothesis("u", tuple(words)), ctx


thresholds = st.sampled_from([0.0, 0.5, 1.0, 2.5, 10.0])


@settings(max_examples=200, deadline=None)
@given(utterances(), thresholds, st.booleans())
def test_report_invariants(utt, threshold, repeats):
    normal, oov, ctx = utt
    cfg = RecoveryConfig(cost_threshold=threshold, max_span_words=3, allow_repeats=repeats)
    costs = build_phonetic_matrix(PS)
    rep = recover_utterance(normal, oov, ctx, costs, cfg)
    spans = sorted(r.span for r in rep.recovered)
    for (a0, a1), (b0, b1) in zip(spans, spans[1:]):
        assert a1 <= b0
    assert all(r.cost <= threshold for r in rep.recovered)
    exact = {v: e.id for e in sorted(ctx, key=lambda e: -e.id) for v in e.variants}
    for k, word in enumerate(oov.words):
        if word.surface == SIL and word.phones in exact:
            assert any(r.span == (k, k + 1) and r.pass_no == 1 and r.cost == 0 for r in rep.recovered)
    for nw in normal.words:
        if not any(r.start <= nw.start and nw.end <= r.end for r in rep.recovered):
            assert nw in rep.merged.words
    if not repeats:
        first = {r.entry_id for r in rep.recovered if r.pass_no == 1}
        second = [r.entry_id for r in rep.recovered if r.pass_no == 2]
        assert len(second) == len(set(second)) and not first & set(second)
    again = recover_utterance(normal, oov, ctx, costs, cfg)
    assert again.to_json() == rep.to_json()


@settings(max_examples=200, deadline=None)
@given(utterances(), thresholds, st.lists(st.sampled_from([0.0, 0.5, 1.0]), min_size=16, max_size=16))
def test_lower_costs_never_lose_candidates(utt, threshold, factor):
    """An entry with some span under the threshold keeps one when costs drop pointwise."""
    _, oov, ctx = utt
    cfg = RecoveryConfig(cost_threshold=threshold, max_span_words=3)
    high = build_phonetic_matrix(PS)
    low = CostMatrix(1.0, 1.0, high.sub * np.array(factor).reshape(4, 4))

    def reachable(costs):
        return {ctx[e].id for c, e, *_ in span_candidates(oov, ctx, costs, cfg) if c <= threshold}

    assert reachable(high) <= reachable(low)
