"""Command-line entry point: ``oovrecover {build-confusion,recover,evaluate,simulate}``.

Exit codes: 0 success, 1 data error, 2 usage error.  Every command writes a
JSON run manifest next to its main output.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
import time
from pathlib import Path

from . import __version__
from .align import LABELS, load_cost_matrix, make_hard_matrix, save_cost_matrix
from .confusion import (
    SimilarityConfig,
    build_acoustic_matrix,
    build_append_matrix,
    build_phonetic_matrix,
    build_weighted_matrix,
    harvest_phone_stats,
    read_phone_pairs,
    write_phone_pairs,
)
from .errors import DataError
from .evaluate import MODES, evaluate
from .formats import (
    read_context,
    read_hypotheses,
    read_reports,
    read_truth,
    write_context,
    write_hypotheses,
    write_reports,
    write_truth,
)
from .phoneset import default_data_path, load_lexicon, load_phoneset
from .recovery import RecoveryConfig, pair_hypotheses, recover_corpus
from .simulate import CorruptionModel, SimSettings, generate_corpus, synthetic_context

log = logging.getLogger("oovrecover")


class UsageError(Exception):
    pass


def sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for block in iter(lambda: f.read(1 << 16), b""):
            h.update(block)
    return h.hexdigest()


def write_manifest(path, command, args, inputs, outputs, started, extra=None):
    flags = {k: (str(v) if isinstance(v, Path) else v) for k, v in sorted(vars(args).items())
             if k not in ("func",)}
    manifest = {
        "tool": "oovrecover",
        "version": __version__,
        "command": command,
        "flags": flags,
        "inputs": {str(p): sha256(p) for p in inputs if p is not None},
        "outputs": {str(p): sha256(p) for p in outputs},
        "duration_s": round(time.time() - started, 3),
    }
    if extra:
        manifest.update(extra)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(manifest, f, indent=2, sort_keys=True)
        f.write("\n")
    return manifest


def _phoneset_args(p):
    p.add_argument("--phones", type=Path, default=default_data_path("phones.tsv"),
                   help="phones.tsv: one symbol per line, '#' comments (default: bundled set)")
    p.add_argument("--features", type=Path, default=default_data_path("features.tsv"),
                   help="features.tsv: 'phone<TAB>f1..fD' header then one row per phone")


def _lexicon_arg(p):
    p.add_argument("--lexicon", type=Path, default=default_data_path("lexicon.tsv"),
                   help="lexicon.tsv: 'word<TAB>space-separated phones', e.g. 'brno\\tb r n o'")


def _prob(text):
    v = float(text)
    if not 0.0 <= v <= 1.0:
        raise argparse.ArgumentTypeError(f"probability must lie in [0, 1], got {text}")
    return v


def _nonneg_int(text):
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError(f"expected an integer >= 0, got {text}")
    return v


# ---------------------------------------------------------------------------


def cmd_build_confusion(args):
    started = time.time()
    ps = load_phoneset(args.phones, args.features)
    I, D = args.insert_cost, args.delete_cost
    cfg = SimilarityConfig(args.min_substitutions, args.exponent, args.w, args.per_pair)
    inputs = [args.phones, args.features]

    def acoustic():
        if args.acoustic:
            inputs.append(args.acoustic)
            return load_cost_matrix(args.acoustic, ps)
        if not args.pairs:
            raise UsageError(f"--method {args.method} needs --pairs phonepairs.tsv (or --acoustic)")
        inputs.append(args.pairs)
        stats = harvest_phone_stats([(r, h) for _, r, h in read_phone_pairs(args.pairs, ps)], ps)
        return build_acoustic_matrix(stats, cfg, ps, I, D)

    def phonetic():
        if args.phonetic:
            inputs.append(args.phonetic)
            return load_cost_matrix(args.phonetic, ps)
        return build_phonetic_matrix(ps, I, D)

    if args.method == "hard":
        m = make_hard_matrix(ps, I, D)
    elif args.method == "phonetic":
        m = build_phonetic_matrix(ps, I, D)
    elif args.method == "acoustic":
        m = acoustic()
    elif args.method == "append":
        m = build_append_matrix(acoustic(), phonetic())
    else:
        m = build_weighted_matrix(acoustic(), phonetic(), args.w)

    n = save_cost_matrix(m, ps, args.out)
    print(f"method={m.label} phones={len(ps)} pair_universe={len(ps) ** 2} "
          f"non_default_entries={n} clamped={m.n_clamped}")
    write_manifest(_manifest_path(args.out), "build-confusion", args, inputs, [args.out], started,
                   {"non_default_entries": n, "pair_universe": len(ps) ** 2, "clamped": m.n_clamped})
    return 0


def cmd_recover(args):
    started = time.time()
    ps = load_phoneset(args.phones, args.features)
    lexicon = load_lexicon(args.lexicon, ps)
    costs = load_cost_matrix(args.matrix, ps)
    context = read_context(args.context, lexicon, ps)
    normal = read_hypotheses(args.normal, ps)
    oov = read_hypotheses(args.oov, ps)
    pairs, unmatched = pair_hypotheses(normal, oov)
    cfg = RecoveryConfig(args.cost_threshold, args.max_span, args.window_ms, args.length_normalize,
                         args.allow_repeats)
    reports = recover_corpus(pairs, context, costs, cfg, lexicon, jobs=args.jobs)
    write_reports(reports, args.out)
    n_rec = sum(len(r.recovered) for r in reports)
    print(f"utterances={len(reports)} recoveries={n_rec} skipped={len(unmatched)}")
    write_manifest(_manifest_path(args.out), "recover", args,
                   [args.phones, args.features, args.lexicon, args.matrix, args.context, args.normal, args.oov],
                   [args.out], started, {"skipped_utterances": unmatched, "skipped_count": len(unmatched)})
    return 0


def cmd_evaluate(args):
    started = time.time()
    reports = read_reports(args.report)
    truth = read_truth(args.truth)
    if args.mode in ("word", "verify"):
        multi = [u for u, labels in truth.items() if len(labels) != 1]
        if multi:
            raise UsageError(f"--mode {args.mode} expects exactly one label per utterance; "
                             f"{len(multi)} utterances differ (first: {multi[0]})")
    try:
        result = evaluate(args.mode, reports, truth, args.window_ms)
    except KeyError as e:
        raise DataError(str(e)) from None
    summary = result.to_json()
    table = result.to_markdown()
    out = args.out or args.report.with_name(args.report.name + f".{args.mode}.json")
    markdown = args.markdown or out.with_suffix(".md")
    with open(out, "w", encoding="utf-8") as f:
        json.dump(summary, f, indent=2, sort_keys=True)
        f.write("\n")
    with open(markdown, "w", encoding="utf-8") as f:
        f.write(table)
    sys.stdout.write(table)
    write_manifest(_manifest_path(out), "evaluate", args, [args.report, args.truth], [out, markdown], started)
    return 0


def cmd_simulate(args):
    started = time.time()
    if args.p_sub + args.p_del > 1.0:
        raise UsageError("--p-sub + --p-del must not exceed 1")
    ps = load_phoneset(args.phones, args.features)
    lexicon = load_lexicon(args.lexicon, ps)
    bias = load_cost_matrix(args.bias_matrix, ps) if args.bias_matrix else None
    inputs = [args.phones, args.features, args.lexicon, args.bias_matrix]
    if args.synthetic_context:
        context = synthetic_context(args.synthetic_context, ps, seed=args.context_seed)
    else:
        inputs.append(args.context)
        context = read_context(args.context, lexicon, ps)
    model = CorruptionModel(args.p_sub, args.p_del, args.p_ins, bias, args.tau, args.seed)
    settings = SimSettings(mode=args.mode, boundary_jitter_ms=args.boundary_jitter_ms)
    corpus = generate_corpus(context, args.n, model, lexicon, settings)

    out = args.out_dir
    out.mkdir(parents=True, exist_ok=True)
    files = {name: out / name for name in
             ("context.tsv", "normal.jsonl", "oov.jsonl", "truth.jsonl", "phonepairs.tsv")}
    write_context(corpus.context, ps, files["context.tsv"])
    write_hypotheses([u.normal for u in corpus.utterances], ps, files["normal.jsonl"])
    write_hypotheses([u.oov for u in corpus.utterances], ps, files["oov.jsonl"])
    write_truth(corpus.truth(), files["truth.jsonl"])
    write_phone_pairs(corpus.phone_pairs(), ps, files["phonepairs.tsv"])
    print(f"utterances={len(corpus.utterances)} context_entries={len(corpus.context)} out={out}")
    write_manifest(out / "manifest.json", "simulate", args, inputs, list(files.values()), started,
                   {"rng": "Python random.Random (MT19937), random() draws only"})
    return 0


def _manifest_path(out: Path) -> Path:
    return out.with_name(out.name + ".manifest.json")


# ---------------------------------------------------------------------------


def build_parser():
    parser = argparse.ArgumentParser(
        prog="oovrecover",
        description="Recover context-list words from ASR decodes with confusion-aware phone matching.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    fmt = argparse.RawDescriptionHelpFormatter

    p = sub.add_parser("build-confusion", formatter_class=fmt, help="build a substitution-cost matrix",
                       description=(
                           "Write costmatrix.tsv.  Example output:\n"
                           "  #I=1.0\t#D=1.0\t#label=phonetic\n"
                           "  k\tg\t0.1055728090000841\n\n"
                           "phonepairs.tsv (for acoustic/append/weighted):\n"
                           "  utt1\tb r n o\tb r n oo"))
    p.add_argument("--method", choices=LABELS, required=True)
    _phoneset_args(p)
    p.add_argument("--pairs", type=Path, help="phonepairs.tsv: utt_id<TAB>ref phones<TAB>hyp phones")
    p.add_argument("--acoustic", type=Path, help="prebuilt acoustic costmatrix.tsv for ensembles")
    p.add_argument("--phonetic", type=Path, help="prebuilt phonetic costmatrix.tsv for ensembles")
    p.add_argument("--insert-cost", type=float, default=1.0)
    p.add_argument("--delete-cost", type=float, default=1.0)
    p.add_argument("--min-substitutions", type=_nonneg_int, default=100)
    p.add_argument("--exponent", type=int, default=4)
    p.add_argument("--per-pair", action="store_true", help="score acoustic costs per (ref, hyp) pair")
    p.add_argument("--w", type=_prob, default=0.5, help="acoustic weight for --method weighted")
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_build_confusion)

    p = sub.add_parser("recover", formatter_class=fmt, help="run two-pass recovery and merge",
                       description=(
                           "hypotheses.jsonl line example:\n"
                           '  {"utt_id": "u1", "words": [{"w": "i", "start_ms": 0, "end_ms": 200},\n'
                           '   {"w": "!SIL", "start_ms": 700, "end_ms": 1100, "phones": ["b", "r", "n", "oo"]}]}\n'
                           "context.tsv line example:  brno<TAB>b r n o   (phones optional)"))
    p.add_argument("--normal", type=Path, required=True)
    p.add_argument("--oov", type=Path, required=True)
    p.add_argument("--context", type=Path, required=True)
    p.add_argument("--matrix", type=Path, required=True)
    _lexicon_arg(p)
    _phoneset_args(p)
    p.add_argument("--cost-threshold", type=float, default=10.0)
    p.add_argument("--max-span", type=int, default=5)
    p.add_argument("--window-ms", type=_nonneg_int, default=500)
    p.add_argument("--length-normalize", action="store_true")
    p.add_argument("--allow-repeats", action="store_true",
                   help="let one context entry be recovered on several spans of an utterance")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", type=Path, required=True, help="report.jsonl")
    p.set_defaults(func=cmd_recover)

    p = sub.add_parser("evaluate", formatter_class=fmt, help="score a report against ground truth",
                       description=(
                           "truth.jsonl line example:\n"
                           '  {"utt_id": "u1", "labels": [{"surface": "brno", "start_ms": 700, "end_ms": 1100}]}'))
    p.add_argument("--mode", choices=MODES, required=True)
    p.add_argument("--report", type=Path, required=True)
    p.add_argument("--truth", type=Path, required=True)
    p.add_argument("--window-ms", type=_nonneg_int, default=500)
    p.add_argument("--out", type=Path, help="JSON summary (default: <report>.<mode>.json)")
    p.add_argument("--markdown", type=Path, help="Markdown table (default: summary path with .md)")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("simulate", formatter_class=fmt, help="generate a synthetic corpus",
                       description=(
                           "Writes context.tsv, normal.jsonl, oov.jsonl, truth.jsonl, phonepairs.tsv\n"
                           "and manifest.json into --out-dir."))
    p.add_argument("--mode", choices=("word", "sentence"), default="sentence")
    p.add_argument("--n", type=_nonneg_int, default=500)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--p-sub", type=_prob, default=0.0)
    p.add_argument("--p-del", type=_prob, default=0.0)
    p.add_argument("--p-ins", type=_prob, default=0.0)
    p.add_argument("--tau", type=float, default=0.2, help="softmax temperature for biased substitutions")
    p.add_argument("--bias-matrix", type=Path)
    p.add_argument("--boundary-jitter-ms", type=_nonneg_int, default=150)
    p.add_argument("--context", type=Path, default=default_data_path("context.tsv"))
    p.add_argument("--synthetic-context", type=_nonneg_int, default=0, metavar="N",
                   help="use N generated pseudo-words instead of --context")
    p.add_argument("--context-seed", type=int, default=7)
    _lexicon_arg(p)
    _phoneset_args(p)
    p.add_argument("--out-dir", type=Path, required=True)
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as e:
        parser.error(str(e))
    except (DataError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
