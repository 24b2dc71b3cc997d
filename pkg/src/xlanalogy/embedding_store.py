"""Monolingual semantic spaces: loading, lookup and global post-processing.

A space is an immutable value. Post-processing (``center``, ``normalize``)
returns a fresh space, so one loaded space can feed several experiment arms.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidStateError, ParseError

logger = logging.getLogger(__name__)

POSTPROCESSING_TAGS = ("none", "c", "u", "cu")

# Rows shorter than this are treated as zero vectors by ``normalize``.
DEGENERATE_NORM = 1e-12


@dataclass(frozen=True, eq=False)
class SemanticSpace:
    """Frequency-ordered vocabulary with one dense row per word.

    Attributes:
        language: language code, identifier only (``"en"``, or ``"de→en"`` once mapped).
        vocab: unique words, most frequent first.
        matrix: ``(len(vocab), d)`` float64 array, read-only.
        postprocessing: one of ``none``, ``c``, ``u``, ``cu``.
        degenerate: words whose row had (near) zero norm at normalization time.
    """

    language: str
    vocab: tuple[str, ...]
    matrix: np.ndarray
    postprocessing: str = "none"
    degenerate: frozenset = field(default_factory=frozenset)
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        vocab = tuple(self.vocab)
        matrix = np.array(self.matrix, dtype=np.float64, copy=True)
        if matrix.ndim != 2:
            raise ValueError(f"matrix must be 2-D, got shape {matrix.shape}")
        if matrix.shape[0] != len(vocab):
            raise ValueError(
                f"matrix has {matrix.shape[0]} rows but vocabulary has {len(vocab)} words"
            )
        if self.postprocessing not in POSTPROCESSING_TAGS:
            raise ValueError(f"unknown post-processing tag {self.postprocessing!r}")
        index = {}
        for i, word in enumerate(vocab):
            if word in index:
                raise ValueError(f"duplicate word {word!r} in vocabulary")
            index[word] = i
        matrix.setflags(write=False)
        object.__setattr__(self, "vocab", vocab)
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "degenerate", frozenset(self.degenerate))
        object.__setattr__(self, "_index", index)

    def __len__(self) -> int:
        return len(self.vocab)

    def __contains__(self, word: str) -> bool:
        return self.index(word) is not None

    @property
    def dim(self) -> int:
        return self.matrix.shape[1]

    def index(self, word: str) -> int | None:
        """Row index of ``word``; exact match first, then the lowercased form."""
        i = self._index.get(word)
        if i is None:
            i = self._index.get(word.lower())
        return i

    def lookup(self, word: str) -> np.ndarray | None:
        i = self.index(word)
        return None if i is None else self.matrix[i]

    def head(self, limit: int) -> "SemanticSpace":
        """The ``limit`` most frequent words as a new space."""
        if limit >= len(self):
            return self
        return SemanticSpace(
            self.language,
            self.vocab[:limit],
            self.matrix[:limit],
            self.postprocessing,
            self.degenerate & set(self.vocab[:limit]),
        )

    def replace(self, **changes) -> "SemanticSpace":
        fields = dict(
            language=self.language,
            vocab=self.vocab,
            matrix=self.matrix,
            postprocessing=self.postprocessing,
            degenerate=self.degenerate,
        )
        fields.update(changes)
        return SemanticSpace(**fields)


def lookup(space: SemanticSpace, word: str) -> np.ndarray | None:
    """Row of ``word`` (query lowercased as a fallback) or ``None`` when absent."""
    return space.lookup(word)


def _language_from_path(path: Path) -> str:
    name = path.name
    for suffix in (".vec", ".txt", ".w2v"):
        if name.endswith(suffix):
            return name[: -len(suffix)]
    return path.stem


def load_space(
    path,
    limit: int | None = None,
    language: str | None = None,
    lowercase: bool = True,
) -> SemanticSpace:
    """Read a word2vec text file.

    The first line is ``"<count> <dim>"``; every following line is a token and
    ``dim`` decimal values separated by spaces. File order is taken as
    descending frequency. Only the first ``limit`` data lines are read.

    With ``lowercase`` on, tokens are lowercased and a token that collides with
    an earlier (more frequent) one is dropped.

    Raises:
        ParseError: bad header, wrong value count on a line, non-numeric
            value, or no words at all.
    """
    path = Path(path)
    if limit is not None and limit <= 0:
        raise ValueError("limit must be a positive integer")
    if language is None:
        language = _language_from_path(path)

    words: list[str] = []
    rows: list[np.ndarray] = []
    seen: set[str] = set()
    dropped = 0
    with open(path, encoding="utf-8", newline=None) as f:
        header = f.readline()
        parts = header.split()
        if len(parts) != 2:
            raise ParseError("header must be '<count> <dim>'", path, 1)
        try:
            count, dim = int(parts[0]), int(parts[1])
        except ValueError:
            raise ParseError(f"non-integer header {header.strip()!r}", path, 1) from None
        if dim <= 0:
            raise ParseError(f"dimension must be positive, got {dim}", path, 1)
        if count < 0:
            raise ParseError(f"word count must be non-negative, got {count}", path, 1)
        wanted = count if limit is None else min(limit, count)

        read = 0
        lineno = 1
        for line in f:
            if read >= wanted:
                break
            lineno += 1
            tokens = line.split()
            if not tokens:
                # blank trailing line
                continue
            read += 1
            if len(tokens) - 1 != dim:
                raise ParseError(
                    f"expected {dim} values, found {len(tokens) - 1}", path, lineno
                )
            word = tokens[0].lower() if lowercase else tokens[0]
            try:
                row = np.array(tokens[1:], dtype=np.float64)
            except ValueError:
                raise ParseError("non-numeric vector value", path, lineno) from None
            if word in seen:
                dropped += 1
                continue
            seen.add(word)
            words.append(word)
            rows.append(row)

    if not words:
        raise ParseError("empty vocabulary", path, None)
    if read < wanted:
        logger.warning("%s: header announces %d words, file holds %d", path, count, read)
    if dropped:
        logger.info("%s: dropped %d duplicate words after lowercasing", path, dropped)
    return SemanticSpace(language, tuple(words), np.vstack(rows), "none")


def save_space(space: SemanticSpace, path) -> None:
    """Write ``space`` in word2vec text format with round-trip float precision."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(f"{len(space)} {space.dim}\n")
        for word, row in zip(space.vocab, space.matrix):
            f.write(word)
            f.write(" ")
            f.write(" ".join(repr(float(x)) for x in row))
            f.write("\n")


def center(space: SemanticSpace) -> SemanticSpace:
    """Subtract the column means (the ``-c`` variant)."""
    if space.postprocessing != "none":
        raise InvalidStateError(
            f"center expects a raw space, got post-processing {space.postprocessing!r}"
        )
    matrix = space.matrix - space.matrix.mean(axis=0, keepdims=True)
    return space.replace(matrix=matrix, postprocessing="c")


def normalize(space: SemanticSpace) -> SemanticSpace:
    """Scale each row to unit length (``-u``, or ``-cu`` after ``center``).

    Rows with norm below 1e-12 become exact zero vectors and their words are
    recorded in ``degenerate`` instead of raising.
    """
    if space.postprocessing not in ("none", "c"):
        raise InvalidStateError(
            f"normalize expects a raw or centered space, got {space.postprocessing!r}"
        )
    norms = np.linalg.norm(space.matrix, axis=1)
    bad = norms < DEGENERATE_NORM
    safe = np.where(bad, 1.0, norms)
    matrix = space.matrix / safe[:, None]
    matrix[bad] = 0.0
    degenerate = frozenset(space.vocab[i] for i in np.flatnonzero(bad))
    if degenerate:
        logger.warning("%s: %d zero-norm rows left unnormalized", space.language, len(degenerate))
    tag = "u" if space.postprocessing == "none" else "cu"
    return space.replace(matrix=matrix, postprocessing=tag, degenerate=space.degenerate | degenerate)


def postprocess(space: SemanticSpace, variant: str) -> SemanticSpace:
    """Apply one of the four global variants to a raw space."""
    if variant not in POSTPROCESSING_TAGS:
        raise ValueError(f"unknown post-processing variant {variant!r}")
    if space.postprocessing == variant:
        return space
    if space.postprocessing != "none":
        raise InvalidStateError(
            f"cannot turn a {space.postprocessing!r} space into {variant!r}"
        )
    if "c" in variant:
        space = center(space)
    if "u" in variant:
        space = normalize(space)
    return space


def from_rows(language: str, words: Sequence[str], rows: Iterable, postprocessing: str = "none") -> SemanticSpace:
    """Convenience constructor for in-memory spaces (tests, synthetic data)."""
    return SemanticSpace(language, tuple(words), np.asarray(list(rows), dtype=np.float64), postprocessing)
