"""Hard vs phonetic cumulative recovery across context densities.

Reproduces the numbers behind the soft-cost trend check: for each syllable
pool size a 370-entry synthetic context is drawn, a 500-utterance
sentence-level corpus is corrupted (p_sub=0.25, p_del=p_ins=0.05, phonetic
bias, seed 42) and both matrices are run at the default threshold.  The
shipped 92-entry context is included as a last row.

    python scripts/trend_sweep.py [pool ...]
"""
import sys
import time

from oovrecover.align import make_hard_matrix
from oovrecover.confusion import build_phonetic_matrix
from oovrecover.evaluate import eval_sentence_level
from oovrecover.formats import read_context
from oovrecover.phoneset import default_data_path, load_lexicon, load_phoneset
from oovrecover.recovery import RecoveryConfig, recover_corpus
from oovrecover.simulate import CorruptionModel, generate_corpus, synthetic_context


def run(context, ps, lexicon, phon, hard):
    corpus = generate_corpus(context, 500, CorruptionModel(0.25, 0.05, 0.05, bias_matrix=phon, seed=42), lexicon)
    pairs = [(u.normal, u.oov) for u in corpus.utterances]
    rates = []
    for costs in (hard, phon):
        reports = recover_corpus(pairs, context, costs, RecoveryConfig(), lexicon)
        rates.append(eval_sentence_level(reports, corpus.truth(), 500).pass2_rate)
    return rates


def main(pools):
    ps = load_phoneset(default_data_path("phones.tsv"), default_data_path("features.tsv"))
    lexicon = load_lexicon(default_data_path("lexicon.tsv"), ps)
    phon, hard = build_phonetic_matrix(ps), make_hard_matrix(ps)
    print("| context | hard (%) | phonetic (%) | gap |")
    print("|---|---|---|---|")
    rows = [(f"synthetic, pool {p}", synthetic_context(370, ps, n_syllables=p)) for p in pools]
    rows.append(("shipped list", read_context(default_data_path("context.tsv"), lexicon, ps)))
    for name, context in rows:
        t = time.perf_counter()
        h, s = run(context, ps, lexicon, phon, hard)
        print(f"| {name} | {h:.1f} | {s:.1f} | {s - h:+.1f} |  ({time.perf_counter() - t:.0f}s)", flush=True)


if __name__ == "__main__":
    main([int(a) for a in sys.argv[1:]] or [15, 20, 30, 40, 60, 100])
