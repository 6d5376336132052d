"""Regenerate tests/golden/recovery_100.json, the reference recovery run.

The corpus is 100 simulated sentence-level utterances over the shipped
context list; recovery uses the phonetic matrix with a threshold of 3 so
that each utterance carries a handful of reviewable recoveries.

    python scripts/make_golden.py tests/golden/recovery_100.json
"""
import json
import sys

from oovrecover.confusion import build_phonetic_matrix
from oovrecover.formats import read_context
from oovrecover.phoneset import default_data_path, load_lexicon, load_phoneset
from oovrecover.recovery import RecoveryConfig, recover_corpus
from oovrecover.simulate import CorruptionModel, generate_corpus

SEED = 11
THRESHOLD = 3.0


def reference_run():
    ps = load_phoneset(default_data_path("phones.tsv"), default_data_path("features.tsv"))
    lexicon = load_lexicon(default_data_path("lexicon.tsv"), ps)
    context = read_context(default_data_path("context.tsv"), lexicon, ps)
    phon = build_phonetic_matrix(ps)
    model = CorruptionModel(0.25, 0.05, 0.05, bias_matrix=phon, seed=SEED)
    corpus = generate_corpus(context, 100, model, lexicon)
    pairs = [(u.normal, u.oov) for u in corpus.utterances]
    reports = recover_corpus(pairs, context, phon, RecoveryConfig(cost_threshold=THRESHOLD), lexicon)
    return corpus, reports


def summarize(reports):
    utts = {}
    for r in reports:
        utts[r.utt_id] = [[x.surface, x.pass_no, round(x.cost, 6), list(x.span)] for x in r.recovered]
    return {
        "seed": SEED,
        "cost_threshold": THRESHOLD,
        "pass1": sum(x[1] == 1 for v in utts.values() for x in v),
        "pass2": sum(x[1] == 2 for v in utts.values() for x in v),
        "utterances": utts,
    }


if __name__ == "__main__":
    _, reports = reference_run()
    out = sys.argv[1] if len(sys.argv) > 1 else "tests/golden/recovery_100.json"
    with open(out, "w") as f:
        json.dump(summarize(reports), f, indent=1)
        f.write("\n")
