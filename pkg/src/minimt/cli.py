"""Single executable covering the pipeline: align, stats, split, train,
translate, evaluate.

Every subcommand writes a JSON run manifest next to its outputs with all
defaults materialized, so any run can be reproduced bit-identically from
the recorded arguments. All randomness flows from explicit --seed flags.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from dataclasses import dataclass
from pathlib import Path

from . import __version__
from .align import (
    AlignerConfig,
    align_ladder,
    estimate_length_ratio,
    extract_pairs,
    load_dictionary,
    write_ladder,
)
from .bleu import BleuReport, evaluate_corpus
from .corpus import (
    SplitSpec,
    compute_stats,
    filter_by_length,
    load_bitext,
    load_sentences,
    read_lines,
    save_bitext,
    split_train_valid,
)
from .errors import DataError, MinimtError, NumericError
from .nn import ModelConfig, greedy_decode, load_checkpoint, save_checkpoint
from .text import Vocabulary, build_vocab, encode_corpus, tokenize
from .train import TrainingConfig, train

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3


@dataclass
class RunManifest:
    """Everything needed to reproduce one subcommand run bit-identically."""

    subcommand: str
    arguments: dict
    inputs: list[str]
    outputs: list[str]
    seeds: dict
    tool_version: str = __version__

    def save(self, path: str | Path) -> None:
        Path(path).write_text(
            json.dumps(dataclasses.asdict(self), indent=2, sort_keys=True) + "\n",
            encoding="utf-8",
        )


def _resolved_args(args: argparse.Namespace) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k != "func"}


def _write_manifest(args, inputs, outputs, seeds, manifest_path) -> None:
    RunManifest(
        subcommand=args.func.__name__.removeprefix("cmd_"),
        arguments=_resolved_args(args),
        inputs=[str(p) for p in inputs],
        outputs=[str(p) for p in outputs],
        seeds=seeds,
    ).save(manifest_path)


# -- align ---------------------------------------------------------------------

def cmd_align(args) -> int:
    src = load_sentences(args.src)
    tgt = load_sentences(args.tgt)
    dictionary = load_dictionary(args.dict) if args.dict else None
    ratio = estimate_length_ratio(src, tgt) if args.estimate_ratio else args.mean_length_ratio
    cfg = AlignerConfig(
        mean_length_ratio=ratio,
        length_variance=args.length_variance,
        dict_weight=args.dict_weight,
        dictionary=dictionary,
        max_cells=args.max_cells,
    )
    ladder = align_ladder(src, tgt, cfg)
    pairs = extract_pairs(ladder, src, tgt, only_1_1=args.only_1_1)
    out = args.out
    Path(out).parent.mkdir(parents=True, exist_ok=True)
    ladder_path, src_path, tgt_path = f"{out}.ladder", f"{out}.src", f"{out}.tgt"
    write_ladder(ladder, ladder_path)
    save_bitext(pairs, src_path, tgt_path)
    _write_manifest(
        args,
        inputs=[args.src, args.tgt] + ([args.dict] if args.dict else []),
        outputs=[ladder_path, src_path, tgt_path],
        seeds={},
        manifest_path=f"{out}.manifest.json",
    )
    print(f"aligned {len(src)} x {len(tgt)} sentences into {len(ladder.beads)} beads "
          f"({len(pairs)} pairs, total cost {ladder.total_cost:.3f})")
    return EXIT_OK


# -- stats ---------------------------------------------------------------------

def cmd_stats(args) -> int:
    corpus = load_bitext(args.src, args.tgt, domain=args.domain)
    stats = compute_stats(corpus, src_language=args.src_lang, tgt_language=args.tgt_lang)
    table = stats.to_table()
    if args.out:
        Path(args.out).write_text(table, encoding="utf-8")
        _write_manifest(args, [args.src, args.tgt], [args.out], {},
                        f"{args.out}.manifest.json")
    sys.stdout.write(table)
    return EXIT_OK


# -- split ---------------------------------------------------------------------

def cmd_split(args) -> int:
    corpus = load_bitext(args.src, args.tgt)
    train_c, valid_c = split_train_valid(
        corpus, SplitSpec(seed=args.seed, train_fraction=args.train_fraction)
    )
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    outputs = [out_dir / name for name in ("train.src", "train.tgt", "valid.src", "valid.tgt")]
    save_bitext(train_c, outputs[0], outputs[1])
    save_bitext(valid_c, outputs[2], outputs[3])
    _write_manifest(args, [args.src, args.tgt], outputs,
                    {"split": args.seed}, out_dir / "split.manifest.json")
    print(f"split {len(corpus)} pairs into {len(train_c)} train + {len(valid_c)} valid")
    return EXIT_OK


# -- train ---------------------------------------------------------------------

def cmd_train(args) -> int:
    corpus = filter_by_length(load_bitext(args.train_src, args.train_tgt), args.max_len)
    if args.valid_src and args.valid_tgt:
        train_c = corpus
        valid_c = filter_by_length(load_bitext(args.valid_src, args.valid_tgt), args.max_len)
    else:
        train_c, valid_c = split_train_valid(
            corpus, SplitSpec(seed=args.seed, train_fraction=args.train_fraction)
        )
    src_vocab = build_vocab((tokenize(p.source) for p in train_c), min_freq=args.min_freq)
    tgt_vocab = build_vocab((tokenize(p.target) for p in train_c), min_freq=args.min_freq)
    model_cfg = ModelConfig(
        src_vocab_size=len(src_vocab),
        tgt_vocab_size=len(tgt_vocab),
        embed_dim=args.embed_dim,
        hidden_dim=args.hidden_dim,
        bidirectional=args.bidirectional,
        attention=args.attention,
        dropout_rate=args.dropout_rate,
        max_decode_len=args.max_len,
    )
    train_cfg = TrainingConfig(
        learning_rate=args.learning_rate,
        batch_size=args.batch_size,
        max_epochs=args.max_epochs,
        patience=args.patience,
        max_grad_norm=args.max_grad_norm,
        weight_decay=args.weight_decay,
        seed=args.seed,
    )
    train_enc = encode_corpus(train_c.sentences(), src_vocab, tgt_vocab)
    valid_enc = encode_corpus(valid_c.sentences(), src_vocab, tgt_vocab)
    params, report = train(model_cfg, train_enc, valid_enc, train_cfg,
                           snapshot_dir=args.snapshot_dir)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    save_checkpoint(out, params, model_cfg, args.seed)
    src_vocab.save(f"{out}.src.vocab")
    tgt_vocab.save(f"{out}.tgt.vocab")
    report_path = f"{out}.report.tsv"
    report.save(report_path)
    inputs = [args.train_src, args.train_tgt]
    if args.valid_src and args.valid_tgt:
        inputs += [args.valid_src, args.valid_tgt]
    _write_manifest(
        args,
        inputs=inputs,
        outputs=[str(out), f"{out}.src.vocab", f"{out}.tgt.vocab", report_path],
        seeds={"split": args.seed, "train": args.seed},
        manifest_path=f"{out}.manifest.json",
    )
    best = report.epochs[report.best_epoch - 1] if report.epochs else None
    if best:
        print(f"best epoch {best.epoch}: valid_loss={best.valid_loss:.4f} "
              f"valid_accuracy={best.valid_accuracy:.4f} ({len(report.epochs)} epochs run)")
    if report.stop_reason.startswith("aborted"):
        print(f"warning: {report.stop_reason}; wrote last good snapshot", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


# -- translate -------------------------------------------------------------------

def cmd_translate(args) -> int:
    params, model_cfg, _seed = load_checkpoint(args.checkpoint)
    src_vocab = Vocabulary.load(args.src_vocab or f"{args.checkpoint}.src.vocab")
    tgt_vocab = Vocabulary.load(args.tgt_vocab or f"{args.checkpoint}.tgt.vocab")
    source = load_sentences(args.input) if args.skip_blank else read_lines(args.input)
    lines = []
    for sentence in source:
        ids = src_vocab.encode(tokenize(sentence))
        out_ids = greedy_decode(ids, params, model_cfg)
        lines.append(" ".join(tgt_vocab.decode(out_ids)))
    text = "".join(line + "\n" for line in lines)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        _write_manifest(args, [args.checkpoint, args.input], [args.out], {},
                        f"{args.out}.manifest.json")
    else:
        sys.stdout.write(text)
    return EXIT_OK


# -- evaluate --------------------------------------------------------------------

def cmd_evaluate(args) -> int:
    hyp_lines = read_lines(args.hyp)
    ref_lines = read_lines(args.ref)
    report = evaluate_corpus(
        [line.split() for line in hyp_lines],
        [line.split() for line in ref_lines],
    )
    table = "\t".join(BleuReport.ROW_HEADER) + "\n" + report.to_row(args.model_name) + "\n"
    if args.out:
        Path(args.out).write_text(table, encoding="utf-8")
        _write_manifest(args, [args.hyp, args.ref], [args.out], {},
                        f"{args.out}.manifest.json")
    sys.stdout.write(table)
    return EXIT_OK


# -- parser ------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    """argparse with usage errors reported on exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="minimt", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"minimt {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("align", help="align two monolingual sentence files")
    p.add_argument("src")
    p.add_argument("tgt")
    p.add_argument("--dict", default=None, help="source TAB target dictionary file")
    p.add_argument("--dict-weight", "--lambda", dest="dict_weight", type=float, default=1.5)
    p.add_argument("--mean-length-ratio", type=float, default=1.0)
    p.add_argument("--estimate-ratio", action="store_true",
                   help="estimate the length ratio from the input texts")
    p.add_argument("--length-variance", type=float, default=6.8)
    p.add_argument("--max-cells", type=int, default=4_000_000)
    p.add_argument("--only-1-1", action="store_true", help="drop merged (m-n) pairs")
    p.add_argument("--out", required=True, help="output prefix")
    p.set_defaults(func=cmd_align)

    p = sub.add_parser("stats", help="corpus statistics table")
    p.add_argument("src")
    p.add_argument("tgt")
    p.add_argument("--domain", default=None)
    p.add_argument("--src-lang", default="source")
    p.add_argument("--tgt-lang", default="target")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("split", help="random disjoint train/valid split")
    p.add_argument("src")
    p.add_argument("tgt")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--train-fraction", type=float, default=0.5)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("train", help="train one model variant")
    p.add_argument("train_src")
    p.add_argument("train_tgt")
    p.add_argument("--valid-src", default=None)
    p.add_argument("--valid-tgt", default=None)
    p.add_argument("--train-fraction", type=float, default=0.5,
                   help="used only when no explicit validation files are given")
    p.add_argument("--bidirectional", action="store_true")
    p.add_argument("--attention", action="store_true")
    p.add_argument("--embed-dim", type=int, default=128)
    p.add_argument("--hidden-dim", type=int, default=300)
    p.add_argument("--dropout-rate", type=float, default=0.2)
    p.add_argument("--learning-rate", "--lr", dest="learning_rate", type=float, default=1e-3)
    p.add_argument("--batch-size", type=int, default=128)
    p.add_argument("--max-len", type=int, default=50)
    p.add_argument("--max-epochs", type=int, default=100)
    p.add_argument("--patience", type=int, default=5)
    p.add_argument("--max-grad-norm", type=float, default=5.0)
    p.add_argument("--weight-decay", type=float, default=1e-5)
    p.add_argument("--min-freq", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--snapshot-dir", default=None,
                   help="also write a checkpoint at every new best epoch")
    p.add_argument("--out", required=True, help="checkpoint path")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("translate", help="greedy-decode a file of sentences")
    p.add_argument("checkpoint")
    p.add_argument("input")
    p.add_argument("--src-vocab", default=None)
    p.add_argument("--tgt-vocab", default=None)
    p.add_argument("--skip-blank", action="store_true", help="drop blank input lines")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_translate)

    p = sub.add_parser("evaluate", help="BLEU report for hypothesis vs reference files")
    p.add_argument("hyp")
    p.add_argument("ref")
    p.add_argument("--model-name", default="-")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_evaluate)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    try:
        return args.func(args)
    except NumericError as exc:
        print(f"minimt: numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except DataError as exc:
        print(f"minimt: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except MinimtError as exc:
        print(f"minimt: error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
