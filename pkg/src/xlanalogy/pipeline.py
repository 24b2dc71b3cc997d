"""Experiment orchestration: post-processing arms, bilingual and multilingual
spaces, the evaluation grid, dictionary-size sweeps and synthetic fixtures.

Experiment names follow ``<mode>-<method>[-<postproc>]``, e.g. ``B-OT-cu``
(bilingual space, orthogonal map, centered + unit rows) or ``M-CCA-c``.
"""

from __future__ import annotations

import hashlib
import itertools
import json
import logging
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np
import yaml

from . import analogy_bench as ab
from . import linear_maps as lm
from .embedding_store import POSTPROCESSING_TAGS, SemanticSpace, load_space, postprocess, save_space
from .errors import ConfigError, XlAnalogyError

logger = logging.getLogger(__name__)

METHOD_CODES = {"LS": "least_squares", "OT": "orthogonal", "CCA": "cca"}
MODES = ("B", "M")
DEFAULT_DICT_SIZE = 20_000
SWEEP_SIZES = (1000, 5000, 10_000, 20_000, 50_000)
NO_TRANSFORM = "No trans."


# --------------------------------------------------------------------------
# naming


@dataclass(frozen=True, order=True)
class ExperimentTag:
    mode: str
    method: str
    postprocessing: str = "none"

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.method not in METHOD_CODES:
            raise ValueError(f"unknown method {self.method!r}")
        if self.postprocessing not in POSTPROCESSING_TAGS:
            raise ValueError(f"unknown post-processing {self.postprocessing!r}")

    def __str__(self) -> str:
        base = f"{self.mode}-{self.method}"
        return base if self.postprocessing == "none" else f"{base}-{self.postprocessing}"

    @classmethod
    def parse(cls, text: str) -> "ExperimentTag":
        parts = text.strip().split("-")
        if len(parts) == 2:
            parts.append("none")
        if len(parts) != 3:
            raise ValueError(f"cannot parse experiment name {text!r}")
        return cls(parts[0].upper(), parts[1].upper(), parts[2].lower())

    @property
    def fit_method(self) -> str:
        return METHOD_CODES[self.method]


def format_tag(mode: str, method: str, postprocessing: str) -> str:
    return str(ExperimentTag(mode, method, postprocessing))


parse_tag = ExperimentTag.parse


# --------------------------------------------------------------------------
# configuration


def _as_tuple(value) -> tuple:
    if value is None:
        return ()
    if isinstance(value, (list, tuple)):
        return tuple(value)
    return (value,)


@dataclass
class ExperimentConfig:
    """Everything needed to run a grid.

    Dictionary keys are ordered ``(source, target)`` language pairs. Methods,
    modes and post-processing variants may each list several values; the grid
    runs every combination.
    """

    spaces: dict[str, Path]
    corpus: dict[str, Path]
    dictionaries: dict[tuple[str, str], Path] = field(default_factory=dict)
    methods: tuple[str, ...] = ("OT",)
    modes: tuple[str, ...] = ("B",)
    postprocessings: tuple[str, ...] = ("cu",)
    dict_size: int | None = DEFAULT_DICT_SIZE
    dict_sizes: tuple[int, ...] = SWEEP_SIZES
    search_limit: int = ab.DEFAULT_SEARCH_LIMIT
    top_k: int = ab.DEFAULT_TOP_K
    pivot: str = "en"
    output_dir: Path = Path("results")
    cca_eps: float = lm.DEFAULT_CCA_EPS
    seed: int = 0
    vocab_limit: int | None = None
    lowercase: bool = True
    cache: bool = True
    languages: tuple[str, ...] = ()

    def __post_init__(self):
        self.spaces = {k: Path(v) for k, v in self.spaces.items()}
        self.corpus = {k: Path(v) for k, v in self.corpus.items()}
        self.dictionaries = {tuple(k): Path(v) for k, v in self.dictionaries.items()}
        self.methods = tuple(m.upper() for m in _as_tuple(self.methods))
        self.modes = tuple(m.upper() for m in _as_tuple(self.modes))
        self.postprocessings = tuple(
            "none" if p in ("", "-", None) else str(p).lstrip("-") for p in _as_tuple(self.postprocessings)
        )
        self.dict_sizes = tuple(int(n) for n in _as_tuple(self.dict_sizes))
        self.output_dir = Path(self.output_dir)
        if not self.languages:
            self.languages = tuple(self.spaces)

    @property
    def tags(self) -> list[ExperimentTag]:
        return [
            ExperimentTag(mode, method, pp)
            for mode in self.modes
            for method in self.methods
            for pp in self.postprocessings
        ]

    def validate(self) -> None:
        """Check names and that every referenced file exists."""
        try:
            self.tags
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if not self.languages:
            raise ConfigError("no languages configured")
        for lang in self.languages:
            if lang not in self.spaces:
                raise ConfigError(f"no space configured for language {lang!r}")
            if lang not in self.corpus:
                raise ConfigError(f"no analogy corpus configured for language {lang!r}")
        if "M" in self.modes and self.pivot not in self.spaces:
            raise ConfigError(f"multilingual mode needs a space for pivot language {self.pivot!r}")
        if self.search_limit <= 0 or self.top_k <= 0:
            raise ConfigError("search_limit and top_k must be positive")
        if self.dict_size is not None and self.dict_size <= 0:
            raise ConfigError("dict_size must be positive")
        files = list(self.spaces.values()) + list(self.corpus.values()) + list(self.dictionaries.values())
        for p in files:
            if not p.is_file():
                raise ConfigError(f"file not found: {p}")


def _dict_key(key) -> tuple[str, str]:
    if isinstance(key, (list, tuple)) and len(key) == 2:
        return str(key[0]), str(key[1])
    a, sep, b = str(key).partition("-")
    if not sep or not a or not b:
        raise ConfigError(f"dictionary key must look like 'de-en', got {key!r}")
    return a, b


CONFIG_KEYS = {
    "spaces", "corpus", "dictionaries", "method", "methods", "mode", "modes",
    "postprocessing", "postprocessings", "dict_size", "dict_sizes", "search_limit",
    "top_k", "pivot", "output_dir", "cca_eps", "seed", "vocab_limit", "lowercase",
    "cache", "languages",
}


def config_from_mapping(data: Mapping, base_dir=None) -> ExperimentConfig:
    """Build a config from parsed YAML; relative paths resolve against ``base_dir``."""
    unknown = set(data) - CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    base = Path(base_dir) if base_dir is not None else Path.cwd()

    def path(p) -> Path:
        p = Path(p)
        return p if p.is_absolute() else base / p

    data = dict(data)
    kwargs = {
        "spaces": {str(k): path(v) for k, v in (data.pop("spaces", None) or {}).items()},
        "corpus": {str(k): path(v) for k, v in (data.pop("corpus", None) or {}).items()},
        "dictionaries": {
            _dict_key(k): path(v) for k, v in (data.pop("dictionaries", None) or {}).items()
        },
    }
    for single, plural in (("method", "methods"), ("mode", "modes"), ("postprocessing", "postprocessings")):
        if single in data and plural in data:
            raise ConfigError(f"give either {single!r} or {plural!r}, not both")
        if single in data or plural in data:
            kwargs[plural] = data.pop(single, None) if single in data else data.pop(plural)
    if "output_dir" in data:
        kwargs["output_dir"] = path(data.pop("output_dir"))
    if "languages" in data:
        kwargs["languages"] = tuple(str(x) for x in data.pop("languages"))
    kwargs.update(data)
    try:
        return ExperimentConfig(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


def load_config(path, overrides: Mapping | None = None) -> ExperimentConfig:
    path = Path(path)
    with open(path, encoding="utf-8") as f:
        data = yaml.safe_load(f) or {}
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    data.update({k: v for k, v in (overrides or {}).items() if v is not None})
    return config_from_mapping(data, path.parent)


def config_to_mapping(cfg: ExperimentConfig, base_dir=None) -> dict:
    """Inverse of :func:`config_from_mapping`; paths under ``base_dir`` become relative."""
    base = Path(base_dir).resolve() if base_dir is not None else None

    def rel(p: Path) -> str:
        p = Path(p).resolve()
        if base is not None and p.is_relative_to(base):
            return p.relative_to(base).as_posix()
        return str(p)

    return {
        "languages": list(cfg.languages),
        "spaces": {k: rel(v) for k, v in cfg.spaces.items()},
        "corpus": {k: rel(v) for k, v in cfg.corpus.items()},
        "dictionaries": {f"{a}-{b}": rel(v) for (a, b), v in cfg.dictionaries.items()},
        "methods": list(cfg.methods),
        "modes": list(cfg.modes),
        "postprocessings": list(cfg.postprocessings),
        "dict_size": cfg.dict_size,
        "dict_sizes": list(cfg.dict_sizes),
        "search_limit": cfg.search_limit,
        "top_k": cfg.top_k,
        "pivot": cfg.pivot,
        "output_dir": rel(cfg.output_dir),
        "cca_eps": cfg.cca_eps,
        "seed": cfg.seed,
        "vocab_limit": cfg.vocab_limit,
        "lowercase": cfg.lowercase,
        "cache": cfg.cache,
    }


def save_config(cfg: ExperimentConfig, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        yaml.safe_dump(config_to_mapping(cfg, path.parent), f, sort_keys=False, allow_unicode=True)


# --------------------------------------------------------------------------
# on-disk cache


def file_digest(path, _memo: dict = {}) -> str:
    path = Path(path)
    st = path.stat()
    key = (str(path.resolve()), st.st_size, st.st_mtime_ns)
    if key not in _memo:
        h = hashlib.sha256()
        with open(path, "rb") as f:
            for chunk in iter(lambda: f.read(1 << 20), b""):
                h.update(chunk)
        _memo[key] = h.hexdigest()
    return _memo[key]


class ArtifactCache:
    """Post-processed spaces and fitted maps, keyed by a hash of their inputs."""

    def __init__(self, root, enabled: bool = True):
        self.root = Path(root)
        self.enabled = enabled

    @staticmethod
    def key(*parts) -> str:
        h = hashlib.sha256()
        for p in parts:
            if isinstance(p, np.ndarray):
                h.update(np.ascontiguousarray(p, dtype=np.float64).tobytes())
                h.update(repr(p.shape).encode())
            else:
                h.update(repr(p).encode())
            h.update(b"\x00")
        return h.hexdigest()[:32]

    def space(self, key: str, compute) -> SemanticSpace:
        path = self.root / "spaces" / f"{key}.npz"
        if self.enabled and path.is_file():
            with np.load(path, allow_pickle=False) as z:
                return SemanticSpace(
                    str(z["language"]),
                    tuple(z["vocab"].tolist()),
                    z["matrix"],
                    str(z["postprocessing"]),
                    frozenset(z["degenerate"].tolist()),
                )
        space = compute()
        if self.enabled:
            path.parent.mkdir(parents=True, exist_ok=True)
            tmp = path.with_suffix(".tmp.npz")
            np.savez(
                tmp,
                language=np.array(space.language),
                vocab=np.array(space.vocab, dtype=str),
                matrix=space.matrix,
                postprocessing=np.array(space.postprocessing),
                degenerate=np.array(sorted(space.degenerate), dtype=str),
            )
            tmp.replace(path)
        return space

    def linear_map(self, key: str, compute) -> lm.LinearMap:
        path = self.root / "maps" / f"{key}.map"
        if self.enabled and path.is_file():
            return lm.load_map(path)
        linear_map = compute()
        if self.enabled:
            tmp = path.with_suffix(".tmp")
            lm.save_map(linear_map, tmp)
            tmp.replace(path)
        return linear_map


# --------------------------------------------------------------------------
# building shared spaces


class CellError(XlAnalogyError):
    """Failure inside one grid cell, with the experiment context attached."""


class Experiment:
    """Loads inputs lazily and shares them between grid cells."""

    def __init__(self, cfg: ExperimentConfig):
        self.cfg = cfg
        self.cache = ArtifactCache(cfg.output_dir / "cache", enabled=cfg.cache)
        self._spaces: dict[tuple[str, str], SemanticSpace] = {}
        self._dicts: dict[tuple[str, str], ab.BilingualDictionary] = {}
        self._maps: dict[tuple, lm.LinearMap] = {}
        self._corpus: ab.AnalogyCorpus | None = None

    # inputs -------------------------------------------------------------

    def space(self, lang: str, variant: str) -> SemanticSpace:
        if (lang, variant) not in self._spaces:
            path = self.cfg.spaces.get(lang)
            if path is None:
                raise ConfigError(f"no space configured for {lang!r}")
            key = ArtifactCache.key(
                "space", file_digest(path), self.cfg.vocab_limit, self.cfg.lowercase, variant, lang
            )

            def compute():
                if variant == "none":
                    return load_space(path, self.cfg.vocab_limit, lang, self.cfg.lowercase)
                return postprocess(self.space(lang, "none"), variant)

            self._spaces[lang, variant] = self.cache.space(key, compute)
        return self._spaces[lang, variant]

    def dictionary(self, a: str, b: str) -> ab.BilingualDictionary:
        if (a, b) not in self._dicts:
            path = self.cfg.dictionaries.get((a, b))
            if path is None:
                raise ConfigError(f"no dictionary configured for {a}->{b}")
            self._dicts[a, b] = ab.parse_dictionary(path, None, a, b)
        return self._dicts[a, b]

    @property
    def corpus(self) -> ab.AnalogyCorpus:
        if self._corpus is None:
            self._corpus = ab.parse_corpus({l: self.cfg.corpus[l] for l in self.cfg.languages})
        return self._corpus

    # maps ---------------------------------------------------------------

    def fit_map(self, a: str, b: str, method: str, variant: str, dict_size: int | None) -> lm.LinearMap:
        memo = (a, b, method, variant, dict_size)
        if memo not in self._maps:
            src, tgt = self.space(a, variant), self.space(b, variant)
            dictionary = self.dictionary(a, b).truncate(dict_size)
            am = lm.build_aligned(src, tgt, dictionary)
            eps = self.cfg.cca_eps if method == "cca" else None
            key = ArtifactCache.key("map", method, eps, variant, a, b, am.X_a, am.X_b)
            linear_map = self.cache.linear_map(
                key, lambda: lm.fit(am, method, self.cfg.cca_eps)
            )
            logger.info(
                "%s->%s %s-%s: %d pairs (%d skipped), variance ratio %.3f",
                a, b, method, variant, am.n, am.skipped, lm.variance_ratio(am, linear_map),
            )
            self._maps[memo] = linear_map
        return self._maps[memo]

    def build_bilingual(self, lang_a: str, lang_b: str, method: str, variant: str, dict_size=None):
        """Fit ``a -> b`` on dictionary pairs and map the full source space."""
        size = self.cfg.dict_size if dict_size is None else dict_size
        try:
            linear_map = self.fit_map(lang_a, lang_b, method, variant, size)
            return linear_map, lm.apply_map(linear_map, self.space(lang_a, variant))
        except XlAnalogyError as exc:
            raise CellError(f"[{lang_a}->{lang_b} {method} {variant} n={size}] {exc}") from exc

    def build_multilingual(self, method: str, variant: str, dict_size=None) -> dict[str, SemanticSpace]:
        """Map every non-pivot language onto the pivot; the pivot passes through."""
        pivot = self.cfg.pivot
        out = {}
        for lang in self.cfg.languages:
            if lang == pivot:
                out[lang] = self.space(lang, variant)
            else:
                out[lang] = self.build_bilingual(lang, pivot, method, variant, dict_size)[1]
        if pivot not in out and pivot in self.cfg.spaces:
            out[pivot] = self.space(pivot, variant)
        return out

    # evaluation ---------------------------------------------------------

    def evaluate(self, src: SemanticSpace, tgt: SemanticSpace, a: str, b: str, label: str) -> ab.EvalReport:
        return ab.evaluate(
            src, tgt, self.corpus, a, b, self.cfg.search_limit, self.cfg.top_k, method=label
        )

    def pair_spaces(self, tag: ExperimentTag, a: str, b: str, dict_size=None, multilingual=None):
        """(source-in-target-space, target) for one ordered pair under ``tag``."""
        pp = tag.postprocessing
        if tag.mode == "B":
            if a == b:
                s = self.space(a, pp)
                return s, s
            return self.build_bilingual(a, b, tag.fit_method, pp, dict_size)[1], self.space(b, pp)
        spaces = multilingual if multilingual is not None else self.build_multilingual(tag.fit_method, pp, dict_size)
        return spaces[a], spaces[b]


def build_bilingual(cfg: ExperimentConfig, lang_a: str, lang_b: str, tag: ExperimentTag | str | None = None):
    """Fitted map and mapped source space for ``lang_a -> lang_b``.

    ``tag`` defaults to the first configured method and post-processing.
    """
    tag = _resolve_tag(cfg, tag, "B")
    return Experiment(cfg).build_bilingual(lang_a, lang_b, tag.fit_method, tag.postprocessing)


def build_multilingual(cfg: ExperimentConfig, tag: ExperimentTag | str | None = None) -> dict[str, SemanticSpace]:
    tag = _resolve_tag(cfg, tag, "M")
    return Experiment(cfg).build_multilingual(tag.fit_method, tag.postprocessing)


def _resolve_tag(cfg, tag, mode) -> ExperimentTag:
    if tag is None:
        return ExperimentTag(mode, cfg.methods[0], cfg.postprocessings[0])
    return ExperimentTag.parse(tag) if isinstance(tag, str) else tag


# --------------------------------------------------------------------------
# grid


@dataclass
class GridResult:
    reports: dict[tuple[str, str, str], ab.EvalReport] = field(default_factory=dict)
    failures: list[dict] = field(default_factory=list)
    files: list[Path] = field(default_factory=list)
    summary: list[dict] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures


def _mean(values):
    values = [v for v in values if v == v]
    return float(np.mean(values)) if values else float("nan")


def _write(path: Path, text: str, files: list[Path]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(text)
    files.append(path)


def _f1(x: float) -> str:
    return "nan" if x != x else f"{x:.1f}"


def _jsonable(x):
    if isinstance(x, float) and not math.isfinite(x):
        return None
    return x


def run_experiment_grid(cfg: ExperimentConfig, tags: Iterable[ExperimentTag] | None = None) -> GridResult:
    """Evaluate every ordered language pair for every configured experiment.

    Writes into ``cfg.output_dir``:

    * ``reports/<tag>/<a>-<b>.{json,tsv}`` per pair,
    * ``<tag>/pairs.tsv``: source rows, target columns, Acc@1 and Acc@k,
    * ``<tag>/categories/<category>.tsv``: per-category Acc@1 matrices,
    * ``summary.tsv`` / ``summary.json``: monolingual and cross-lingual
      averages, with a ``No trans.`` baseline per post-processing variant.

    A failing cell is recorded in ``failures.json`` and the grid moves on.
    """
    cfg.validate()
    exp = Experiment(cfg)
    langs = cfg.languages
    tags = list(tags) if tags is not None else cfg.tags
    result = GridResult()
    out = cfg.output_dir

    def record(label, a, b, exc):
        logger.error("%s %s->%s failed: %s", label, a, b, exc)
        result.failures.append({"experiment": label, "lang_a": a, "lang_b": b, "error": str(exc)})

    def run_cell(label, a, b, get_spaces):
        try:
            src, tgt = get_spaces()
            report = exp.evaluate(src, tgt, a, b, label)
        except XlAnalogyError as exc:
            record(label, a, b, exc)
            return
        result.reports[label, a, b] = report
        stem = out / "reports" / label / f"{a}-{b}"
        _write(stem.with_suffix(".json"), report.to_json(), result.files)
        _write(stem.with_suffix(".tsv"), report.to_tsv(), result.files)

    for pp in dict.fromkeys(t.postprocessing for t in tags):
        label = NO_TRANSFORM if pp == "none" else f"{NO_TRANSFORM} -{pp}"
        for a in langs:
            run_cell(label, a, a, lambda a=a, pp=pp: (exp.space(a, pp),) * 2)
        result.summary.append(_summary_row(result, label, langs, pp))

    for tag in tags:
        label = str(tag)
        multilingual = None
        if tag.mode == "M":
            try:
                multilingual = exp.build_multilingual(tag.fit_method, tag.postprocessing)
            except XlAnalogyError as exc:
                for a, b in itertools.product(langs, langs):
                    record(label, a, b, exc)
                result.summary.append(_summary_row(result, label, langs, tag.postprocessing))
                continue
        for a, b in itertools.product(langs, langs):
            run_cell(label, a, b, lambda a=a, b=b: exp.pair_spaces(tag, a, b, multilingual=multilingual))
        _write_matrices(result, out / label, label, langs, cfg.top_k)
        result.summary.append(_summary_row(result, label, langs, tag.postprocessing))

    k = cfg.top_k
    lines = [f"experiment\tpostprocessing\tmono_acc1\tmono_acc{k}\tcross_acc1\tcross_acc{k}\n"]
    for row in result.summary:
        lines.append(
            f"{row['experiment']}\t{row['postprocessing']}\t{_f1(row['mono_acc1'])}\t{_f1(row['mono_acck'])}"
            f"\t{_f1(row['cross_acc1'])}\t{_f1(row['cross_acck'])}\n"
        )
    _write(out / "summary.tsv", "".join(lines), result.files)
    summary_json = [{k2: _jsonable(v) for k2, v in row.items()} for row in result.summary]
    _write(out / "summary.json", json.dumps(summary_json, indent=2, sort_keys=True) + "\n", result.files)
    if result.failures:
        _write(out / "failures.json", json.dumps(result.failures, indent=2) + "\n", result.files)
    return result


def _summary_row(result: GridResult, label: str, langs, pp: str) -> dict:
    mono = [result.reports[label, a, a] for a in langs if (label, a, a) in result.reports]
    cross = [
        result.reports[label, a, b]
        for a in langs
        for b in langs
        if a != b and (label, a, b) in result.reports
    ]
    return {
        "experiment": label,
        "postprocessing": pp,
        "mono_acc1": _mean(r.acc1 for r in mono),
        "mono_acck": _mean(r.acck for r in mono),
        "cross_acc1": _mean(r.acc1 for r in cross),
        "cross_acck": _mean(r.acck for r in cross),
        "mono_cells": len(mono),
        "cross_cells": len(cross),
    }


def _write_matrices(result: GridResult, folder: Path, label: str, langs, k: int) -> None:
    header = "source\t" + "\t".join(f"{b}_acc1\t{b}_acc{k}" for b in langs) + "\n"
    rows = []
    for a in langs:
        cells = []
        for b in langs:
            r = result.reports.get((label, a, b))
            cells += [_f1(r.acc1), _f1(r.acck)] if r else ["nan", "nan"]
        rows.append(a + "\t" + "\t".join(cells) + "\n")
    _write(folder / "pairs.tsv", header + "".join(rows), result.files)

    categories = dict.fromkeys(
        c for a in langs for b in langs if (label, a, b) in result.reports
        for c in result.reports[label, a, b].categories
    )
    for c in categories:
        lines = ["source\t" + "\t".join(langs) + "\n"]
        for a in langs:
            vals = []
            for b in langs:
                r = result.reports.get((label, a, b))
                counts = r.categories.get(c) if r else None
                vals.append(_f1(counts.acc1) if counts else "nan")
            lines.append(a + "\t" + "\t".join(vals) + "\n")
        _write(folder / "categories" / f"{c}.tsv", "".join(lines), result.files)


# --------------------------------------------------------------------------
# dictionary-size sweep


def run_dictionary_sweep(cfg: ExperimentConfig, sizes: Iterable[int] | None = None) -> GridResult:
    """Cross-lingual accuracy per target language as the dictionary grows.

    For each experiment, target language ``b`` and size ``n`` the reported
    value averages Acc@1/Acc@k over all source languages ``a != b``.
    Output: ``sweep.tsv`` with one series per (experiment, target).
    """
    cfg.validate()
    sizes = tuple(sizes) if sizes is not None else cfg.dict_sizes
    exp = Experiment(cfg)
    langs = cfg.languages
    result = GridResult()
    rows = []
    for tag in cfg.tags:
        label = str(tag)
        for n in sizes:
            multilingual = None
            if tag.mode == "M":
                try:
                    multilingual = exp.build_multilingual(tag.fit_method, tag.postprocessing, n)
                except XlAnalogyError as exc:
                    result.failures.append({"experiment": label, "dict_size": n, "error": str(exc)})
                    continue
            for b in langs:
                reports = []
                for a in langs:
                    if a == b:
                        continue
                    try:
                        src, tgt = exp.pair_spaces(tag, a, b, dict_size=n, multilingual=multilingual)
                        reports.append(exp.evaluate(src, tgt, a, b, label))
                    except XlAnalogyError as exc:
                        result.failures.append(
                            {"experiment": label, "dict_size": n, "lang_a": a, "lang_b": b, "error": str(exc)}
                        )
                        continue
                    result.reports[f"{label}@{n}", a, b] = reports[-1]
                rows.append((label, b, n, _mean(r.acc1 for r in reports), _mean(r.acck for r in reports), len(reports)))
    k = cfg.top_k
    text = [f"experiment\ttarget\tdict_size\tacc1\tacc{k}\tn_sources\n"]
    text += [f"{l}\t{b}\t{n}\t{_f1(a1)}\t{_f1(ak)}\t{m}\n" for l, b, n, a1, ak, m in rows]
    _write(cfg.output_dir / "sweep.tsv", "".join(text), result.files)
    if result.failures:
        _write(cfg.output_dir / "sweep_failures.json", json.dumps(result.failures, indent=2) + "\n", result.files)
    return result


# --------------------------------------------------------------------------
# synthetic fixtures

SYNTH_LANGUAGES = ("en", "de", "es", "it", "cs", "hr")


def _random_orthogonal(rng: np.random.Generator, d: int) -> np.ndarray:
    q, r = np.linalg.qr(rng.standard_normal((d, d)))
    return q * np.sign(np.diag(r))


def _unit_rows(rng: np.random.Generator, n: int, d: int) -> np.ndarray:
    x = rng.standard_normal((n, d))
    return x / np.linalg.norm(x, axis=1, keepdims=True)


def generate_synthetic(
    out_dir,
    n_words: int = 400,
    d: int = 10,
    n_languages: int = 3,
    noise: float = 0.0,
    seed: int = 0,
    n_categories: int = 3,
    pairs_per_category: int = 10,
) -> ExperimentConfig:
    """Write a small multilingual benchmark with planted analogies.

    Every latent word is ``[base; attribute] / sqrt(2)`` with unit-norm parts.
    A category fixes two attribute vectors; its pairs share a base vector and
    swap attributes, so ``w2 - w1 + w3 == w4`` exactly. Each word also has a
    negated twin, which keeps the vocabulary mean at zero and all norms equal,
    so centering and normalization leave the planted structure intact.

    Language ``l`` sees ``latent @ R_l + noise * N(0, 1)`` for a random
    orthogonal ``R_l``. Dictionaries align word ``i`` with word ``i`` for every
    ordered language pair. Returns a config (also saved as ``config.yaml``)
    pointing at the written files.
    """
    if n_languages < 1:
        raise ValueError("need at least one language")
    if not 1 <= n_categories <= len(ab.CATEGORIES):
        raise ValueError(f"n_categories must be in 1..{len(ab.CATEGORIES)}")
    d_attr = max(2, d // 4)
    d_base = d - d_attr
    if d_base < 2:
        raise ValueError("dimension too small for the planted structure (need d >= 4)")
    positives = n_words // 2
    per_category = positives // n_categories
    if per_category < 4:
        raise ValueError(
            f"n_words={n_words} leaves {per_category} words per category; need at least 4 "
            "(half of the vocabulary is reserved for negated twins)"
        )
    n_pairs = min(pairs_per_category, per_category // 2)
    if n_pairs < 2:
        raise ValueError("pairs_per_category must be at least 2")

    rng = np.random.default_rng(seed)
    out = Path(out_dir)
    categories = list(ab.CATEGORIES)[:n_categories]

    latent = np.empty((positives, d))
    planted: dict[str, list[tuple[int, int]]] = {}
    row = 0
    for c in categories:
        attrs = _unit_rows(rng, 2, d_attr)
        bases = _unit_rows(rng, n_pairs, d_base)
        planted[c] = []
        for b in bases:
            latent[row] = np.concatenate([b, attrs[0]])
            latent[row + 1] = np.concatenate([b, attrs[1]])
            planted[c].append((row, row + 1))
            row += 2
    n_free = positives - row
    latent[row:] = np.hstack([_unit_rows(rng, n_free, d_base), _unit_rows(rng, n_free, d_attr)])
    latent /= np.sqrt(2.0)
    latent = np.vstack([latent, -latent])

    # frequency order is a random permutation of word ids
    order = rng.permutation(latent.shape[0])
    rank = np.empty_like(order)
    rank[order] = np.arange(order.size)

    languages = list(SYNTH_LANGUAGES[:n_languages]) + [f"x{i}" for i in range(len(SYNTH_LANGUAGES), n_languages)]

    def word(lang: str, wid: int) -> str:
        return f"{lang}_{wid:05d}"

    spaces, corpora, dictionaries = {}, {}, {}
    corpus = ab.AnalogyCorpus(languages=tuple(languages))
    for lang in languages:
        rotated = latent @ _random_orthogonal(rng, d)
        if noise > 0:
            rotated = rotated + noise * rng.standard_normal(rotated.shape)
        space = SemanticSpace(lang, tuple(word(lang, w) for w in order), rotated[order])
        spaces[lang] = out / "spaces" / f"{lang}.vec"
        save_space(space, spaces[lang])
        for c in categories:
            corpus.categories.setdefault(c, {})[lang] = [(word(lang, i), word(lang, j)) for i, j in planted[c]]
        corpora[lang] = out / "corpus" / f"{lang}.txt"
        ab.save_corpus(corpus, lang, corpora[lang])
    for a, b in itertools.permutations(languages, 2):
        pairs = tuple((word(a, w), word(b, w)) for w in order)
        dictionaries[a, b] = out / "dictionaries" / f"{a}-{b}.tsv"
        ab.save_dictionary(ab.BilingualDictionary(a, b, pairs), dictionaries[a, b])

    cfg = ExperimentConfig(
        spaces=spaces,
        corpus=corpora,
        dictionaries=dictionaries,
        methods=("OT",),
        modes=("B",),
        postprocessings=("cu",),
        dict_size=None,
        dict_sizes=tuple(s for s in (50, 100, 200, 400) if s <= latent.shape[0]) or (latent.shape[0],),
        search_limit=ab.DEFAULT_SEARCH_LIMIT,
        pivot=languages[0],
        output_dir=out / "results",
        seed=seed,
        languages=tuple(languages),
    )
    save_config(cfg, out / "config.yaml")
    return cfg


def with_overrides(cfg: ExperimentConfig, **changes) -> ExperimentConfig:
    changes = {k: v for k, v in changes.items() if v is not None}
    return replace(cfg, **changes)
