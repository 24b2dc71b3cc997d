"""Command line entry point: ``xlanalogy <subcommand> ...``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import analogy_bench as ab
from . import linear_maps as lm
from . import pipeline as pl
from .embedding_store import POSTPROCESSING_TAGS, load_space, postprocess, save_space
from .errors import XlAnalogyError


def _postproc(value: str) -> str:
    value = value.lstrip("-") or "none"
    if value not in POSTPROCESSING_TAGS:
        raise argparse.ArgumentTypeError(f"post-processing must be one of {', '.join(POSTPROCESSING_TAGS)}")
    return value


def _method(value: str) -> str:
    value = value.upper()
    if value not in pl.METHOD_CODES:
        raise argparse.ArgumentTypeError(f"method must be one of {', '.join(pl.METHOD_CODES)}")
    return value


def _sizes(value: str) -> list[int]:
    try:
        sizes = [int(x) for x in value.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError("sizes must be comma-separated integers") from None
    if not sizes or min(sizes) <= 0:
        raise argparse.ArgumentTypeError("sizes must be positive")
    return sizes


def cmd_fit(args) -> int:
    src = postprocess(load_space(args.src, args.vocab_limit, args.src_lang), args.postproc)
    tgt = postprocess(load_space(args.tgt, args.vocab_limit, args.tgt_lang), args.postproc)
    dictionary = ab.parse_dictionary(args.dict, args.dict_size, src.language, tgt.language)
    am = lm.build_aligned(src, tgt, dictionary)
    linear_map = lm.fit(am, pl.METHOD_CODES[args.method], args.cca_eps)
    lm.save_map(linear_map, args.output)
    print(
        f"{src.language}->{tgt.language} {args.method}-{args.postproc}: "
        f"{am.n} pairs used, {am.skipped} skipped, "
        f"variance ratio {lm.variance_ratio(am, linear_map):.4f} -> {args.output}"
    )
    return 0


def cmd_transform(args) -> int:
    linear_map = lm.load_map(args.map)
    space = load_space(args.space, args.vocab_limit, args.lang or linear_map.source_language or None)
    mapped = lm.apply_map(linear_map, postprocess(space, linear_map.postprocessing))
    save_space(mapped, args.output)
    print(f"wrote {len(mapped)} mapped vectors to {args.output}")
    return 0


def cmd_eval(args) -> int:
    linear_map = lm.load_map(args.map) if args.map else None
    pp = linear_map.postprocessing if linear_map else args.postproc
    tgt = postprocess(load_space(args.tgt, args.vocab_limit, args.lang_b), pp)
    if args.src is None:
        if args.lang_a != args.lang_b:
            raise XlAnalogyError("--src is required for cross-lingual evaluation")
        src = tgt
    else:
        src = postprocess(load_space(args.src, args.vocab_limit, args.lang_a), pp)
        if linear_map:
            src = lm.apply_map(linear_map, src)
    if linear_map:
        label = f"{linear_map.method}-{pp}"
    else:
        label = pl.NO_TRANSFORM if pp == "none" else f"{pl.NO_TRANSFORM} -{pp}"
    corpus = ab.parse_corpus({args.lang_a: args.corpus_a, args.lang_b: args.corpus_b or args.corpus_a})
    report = ab.evaluate(src, tgt, corpus, args.lang_a, args.lang_b, args.search_limit, args.k, method=label)
    sys.stdout.write(report.to_tsv())
    if args.output:
        out = Path(args.output)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.with_suffix(".json").write_text(report.to_json(), encoding="utf-8")
        out.with_suffix(".tsv").write_text(report.to_tsv(), encoding="utf-8")
    return 0


def _grid_config(args) -> pl.ExperimentConfig:
    overrides = {
        "methods": args.method,
        "modes": args.mode,
        "postprocessings": args.postproc,
        "dict_size": args.dict_size,
        "search_limit": args.search_limit,
        "top_k": args.k,
        "pivot": args.pivot,
        "output_dir": str(Path(args.output_dir).resolve()) if args.output_dir else None,
        "vocab_limit": args.vocab_limit,
        "cca_eps": args.cca_eps,
    }
    if args.no_cache:
        overrides["cache"] = False
    cfg = pl.load_config(args.config)
    for key in ("methods", "modes", "postprocessings"):
        if overrides[key]:
            overrides[key] = tuple(overrides[key])
    return pl.with_overrides(cfg, **overrides)


def cmd_grid(args) -> int:
    cfg = _grid_config(args)
    result = pl.run_experiment_grid(cfg)
    sys.stdout.write((cfg.output_dir / "summary.tsv").read_text(encoding="utf-8"))
    if not result.ok:
        print(f"{len(result.failures)} cell(s) failed; see {cfg.output_dir / 'failures.json'}", file=sys.stderr)
        return 1
    return 0


def cmd_sweep(args) -> int:
    cfg = _grid_config(args)
    result = pl.run_dictionary_sweep(cfg, args.sizes)
    sys.stdout.write((cfg.output_dir / "sweep.tsv").read_text(encoding="utf-8"))
    if not result.ok:
        print(f"{len(result.failures)} cell(s) failed", file=sys.stderr)
        return 1
    return 0


def cmd_synth(args) -> int:
    cfg = pl.generate_synthetic(
        args.output,
        n_words=args.n_words,
        d=args.dim,
        n_languages=args.languages,
        noise=args.noise,
        seed=args.seed,
        n_categories=args.categories,
        pairs_per_category=args.pairs,
    )
    print(f"synthetic fixture for {', '.join(cfg.languages)} written; config: {Path(args.output) / 'config.yaml'}")
    return 0


def _grid_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", required=True, help="YAML experiment config")
    p.add_argument("--method", type=_method, action="append", help="LS, OT or CCA (repeatable)")
    p.add_argument("--mode", choices=pl.MODES, action="append", help="B or M (repeatable)")
    p.add_argument("--postproc", type=_postproc, action="append", help="none, c, u or cu (repeatable)")
    p.add_argument("--dict-size", type=int)
    p.add_argument("--search-limit", type=int)
    p.add_argument("-k", type=int, help="k for Acc@k")
    p.add_argument("--pivot")
    p.add_argument("--output-dir")
    p.add_argument("--vocab-limit", type=int)
    p.add_argument("--cca-eps", type=float)
    p.add_argument("--no-cache", action="store_true", help="do not read or write cached artifacts")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="xlanalogy",
        description="Align monolingual word embeddings with linear maps and score them on cross-lingual analogies.",
    )
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="fit one map between two spaces")
    p.add_argument("--src", required=True, help="source vectors (word2vec text)")
    p.add_argument("--tgt", required=True, help="target vectors (word2vec text)")
    p.add_argument("--dict", required=True, help="source<TAB>target dictionary")
    p.add_argument("--method", type=_method, default="OT")
    p.add_argument("--postproc", type=_postproc, default="cu")
    p.add_argument("--dict-size", type=int, default=pl.DEFAULT_DICT_SIZE)
    p.add_argument("--vocab-limit", type=int)
    p.add_argument("--src-lang")
    p.add_argument("--tgt-lang")
    p.add_argument("--cca-eps", type=float, default=lm.DEFAULT_CCA_EPS)
    p.add_argument("-o", "--output", required=True, help="map file to write")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("transform", help="apply a fitted map to a space file")
    p.add_argument("--map", required=True)
    p.add_argument("--space", required=True)
    p.add_argument("--lang")
    p.add_argument("--vocab-limit", type=int)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("eval", help="evaluate one language pair")
    p.add_argument("--src", help="source space; omit for monolingual evaluation of --tgt")
    p.add_argument("--tgt", required=True, help="target space")
    p.add_argument("--lang-a", required=True)
    p.add_argument("--lang-b", required=True)
    p.add_argument("--corpus-a", required=True)
    p.add_argument("--corpus-b")
    p.add_argument("--map", help="map fitted on raw spaces; both spaces are post-processed to match it")
    p.add_argument("--postproc", type=_postproc, default="none", help="used when no --map is given")
    p.add_argument("--search-limit", type=int, default=ab.DEFAULT_SEARCH_LIMIT)
    p.add_argument("-k", type=int, default=ab.DEFAULT_TOP_K)
    p.add_argument("--vocab-limit", type=int)
    p.add_argument("-o", "--output", help="write <output>.json and <output>.tsv")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("grid", help="run the full experiment grid")
    _grid_options(p)
    p.set_defaults(func=cmd_grid)

    p = sub.add_parser("sweep-dict", help="accuracy versus dictionary size")
    _grid_options(p)
    p.add_argument("--sizes", type=_sizes, help="comma-separated sizes (default: config dict_sizes)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("synth", help="write a synthetic benchmark with planted analogies")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--n-words", type=int, default=400)
    p.add_argument("--dim", type=int, default=10)
    p.add_argument("--languages", type=int, default=3)
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--categories", type=int, default=3)
    p.add_argument("--pairs", type=int, default=10)
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except (XlAnalogyError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
