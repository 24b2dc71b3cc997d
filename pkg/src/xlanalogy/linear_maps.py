"""Linear transformations between two semantic spaces.

All maps act on row vectors: a source row ``x`` lands at ``x @ T`` in the
target space. Three estimators are provided, fitted from the rows of a
bilingual dictionary:

* least squares (pseudo-inverse, plus a gradient-descent variant used as a
  cross-check),
* orthogonal Procrustes,
* canonical correlation analysis composed back into the target space.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .embedding_store import POSTPROCESSING_TAGS, SemanticSpace
from .errors import (
    DivergenceError,
    FitError,
    FitInfeasibleError,
    InvalidArgumentError,
    ParseError,
)

logger = logging.getLogger(__name__)

METHODS = ("least_squares", "orthogonal", "cca")
DEFAULT_CCA_EPS = 1e-8
# Relative cutoff for treating a singular value as zero: max(n, d) * s_max * PINV_RTOL.
PINV_RTOL = 1e-12
# C_b condition numbers above this make C_a @ inv(C_b) meaningless.
CCA_MAX_COND = 1e12


@dataclass(frozen=True, eq=False)
class AlignedMatrices:
    """Row-aligned source/target vectors for the dictionary pairs found in both spaces."""

    X_a: np.ndarray
    X_b: np.ndarray
    pairs_used: tuple
    skipped: int = 0
    source_language: str = ""
    target_language: str = ""
    postprocessing: str = "none"

    @property
    def n(self) -> int:
        return self.X_a.shape[0]

    @property
    def d(self) -> int:
        return self.X_a.shape[1]


@dataclass(frozen=True, eq=False)
class LinearMap:
    matrix: np.ndarray
    method: str
    source_language: str = ""
    target_language: str = ""
    postprocessing: str = "none"
    info: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        m = np.array(self.matrix, dtype=np.float64, copy=True)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise InvalidArgumentError(f"map matrix must be square, got shape {m.shape}")
        if self.method not in METHODS:
            raise InvalidArgumentError(f"unknown method {self.method!r}")
        if self.postprocessing not in POSTPROCESSING_TAGS:
            raise InvalidArgumentError(f"unknown post-processing tag {self.postprocessing!r}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def d(self) -> int:
        return self.matrix.shape[0]

    def __call__(self, rows: np.ndarray) -> np.ndarray:
        return np.asarray(rows, dtype=np.float64) @ self.matrix


@dataclass(frozen=True, eq=False)
class CcaBases:
    """Canonical directions as columns, paired with their correlations."""

    C_a: np.ndarray
    C_b: np.ndarray
    correlations: np.ndarray


def _wrap(matrix, am: AlignedMatrices, method: str, **info) -> LinearMap:
    return LinearMap(
        matrix,
        method,
        am.source_language,
        am.target_language,
        am.postprocessing,
        info=info,
    )


def build_aligned(src: SemanticSpace, tgt: SemanticSpace, dictionary) -> AlignedMatrices:
    """Stack the vectors of every dictionary pair present in both vocabularies.

    Rows keep dictionary order. Duplicate pairs produce duplicate rows.
    ``dictionary`` is a :class:`~xlanalogy.analogy_bench.BilingualDictionary`
    or any iterable of ``(source_word, target_word)``.
    """
    if src.dim != tgt.dim:
        raise InvalidArgumentError(
            f"dimension mismatch: source d={src.dim}, target d={tgt.dim}"
        )
    if src.postprocessing != tgt.postprocessing:
        raise InvalidArgumentError(
            f"post-processing mismatch: {src.postprocessing!r} vs {tgt.postprocessing!r}"
        )
    pairs = getattr(dictionary, "pairs", dictionary)
    src_rows, tgt_rows, used = [], [], []
    skipped = 0
    for a, b in pairs:
        i, j = src.index(a), tgt.index(b)
        if i is None or j is None:
            skipped += 1
            continue
        src_rows.append(i)
        tgt_rows.append(j)
        used.append((a, b))
    if skipped:
        logger.info("%d of %d dictionary pairs not in vocabulary", skipped, skipped + len(used))
    if len(used) < src.dim:
        raise FitInfeasibleError(
            f"only {len(used)} dictionary pairs found in both vocabularies; need at least d={src.dim}"
        )
    return AlignedMatrices(
        src.matrix[src_rows],
        tgt.matrix[tgt_rows],
        tuple(used),
        skipped,
        src.language,
        tgt.language,
        src.postprocessing,
    )


def aligned_from_arrays(X_a, X_b, **kwargs) -> AlignedMatrices:
    """Wrap two raw ``(n, d)`` arrays, mostly for tests and synthetic studies."""
    X_a = np.asarray(X_a, dtype=np.float64)
    X_b = np.asarray(X_b, dtype=np.float64)
    if X_a.shape != X_b.shape or X_a.ndim != 2:
        raise InvalidArgumentError(f"shape mismatch: {X_a.shape} vs {X_b.shape}")
    pairs = kwargs.pop("pairs_used", tuple((i, i) for i in range(X_a.shape[0])))
    return AlignedMatrices(X_a, X_b, pairs, **kwargs)


def pseudo_inverse(X: np.ndarray) -> tuple[np.ndarray, int]:
    """Moore-Penrose pseudo-inverse via SVD. Returns ``(pinv, rank)``."""
    try:
        U, s, Vt = np.linalg.svd(X, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise FitError(f"SVD did not converge: {exc}") from exc
    if s.size == 0:
        return np.zeros(X.T.shape), 0
    cutoff = max(X.shape) * s[0] * PINV_RTOL
    keep = s > cutoff
    s_inv = np.zeros_like(s)
    s_inv[keep] = 1.0 / s[keep]
    return (Vt.T * s_inv) @ U.T, int(keep.sum())


def fit_least_squares(am: AlignedMatrices) -> LinearMap:
    """Unconstrained map minimising ``||X_b - X_a T||_F^2``, ``T = pinv(X_a) X_b``.

    A rank-deficient ``X_a`` yields the minimum-norm solution and a
    ``RuntimeWarning``.
    """
    if am.n < am.d:
        raise FitInfeasibleError(f"least squares needs n >= d, got n={am.n}, d={am.d}")
    if not (np.all(np.isfinite(am.X_a)) and np.all(np.isfinite(am.X_b))):
        raise FitError("non-finite values in aligned matrices")
    pinv, rank = pseudo_inverse(am.X_a)
    if rank < am.d:
        warnings.warn(
            f"source matrix has rank {rank} < d={am.d}; using the minimum-norm solution",
            RuntimeWarning,
            stacklevel=2,
        )
    return _wrap(pinv @ am.X_b, am, "least_squares", rank=rank)


def least_squares_loss(am: AlignedMatrices, T: np.ndarray) -> float:
    r = am.X_b - am.X_a @ T
    return float(np.sum(r * r))


def fit_least_squares_gd(
    am: AlignedMatrices,
    steps: int = 500,
    learning_rate: float = 0.1,
    tol: float = 0.0,
) -> LinearMap:
    """Plain full-batch gradient descent on the least-squares objective.

    Starts from ``T = 0`` and descends the mean squared residual
    ``||X_b - X_a T||_F^2 / n`` so the step size does not depend on ``n``.
    Stops early once the gradient norm drops below ``tol``.

    Raises:
        DivergenceError: the loss rose for 10 consecutive steps or went non-finite.
    """
    if am.n < 1:
        raise FitInfeasibleError("gradient descent needs at least one pair")
    X_a, X_b = am.X_a, am.X_b
    n = am.n
    T = np.zeros((am.d, am.d))
    loss = least_squares_loss(am, T) / n
    rising = 0
    step = 0
    for step in range(1, steps + 1):
        grad = (2.0 / n) * (X_a.T @ (X_a @ T - X_b))
        if tol > 0 and np.linalg.norm(grad) < tol:
            break
        T = T - learning_rate * grad
        new_loss = least_squares_loss(am, T) / n
        if not np.isfinite(new_loss):
            raise DivergenceError("loss became non-finite", new_loss)
        rising = rising + 1 if new_loss > loss else 0
        loss = new_loss
        if rising >= 10:
            raise DivergenceError(f"loss increased for 10 consecutive steps at step {step}", loss)
    return _wrap(T, am, "least_squares", solver="gradient_descent", steps=step, loss=loss)


def fit_orthogonal(am: AlignedMatrices) -> LinearMap:
    """Orthogonal Procrustes: with ``X_b^T X_a = U S V^T`` the map is ``V U^T``."""
    try:
        U, _, Vt = np.linalg.svd(am.X_b.T @ am.X_a)
    except np.linalg.LinAlgError as exc:
        raise FitError(f"SVD did not converge: {exc}") from exc
    return _wrap(Vt.T @ U.T, am, "orthogonal")


def _inv_sqrt(S: np.ndarray) -> np.ndarray:
    w, Q = np.linalg.eigh(S)
    if w[0] <= 0:
        raise FitError(
            "covariance matrix is not positive definite; increase the CCA regularization"
        )
    return (Q / np.sqrt(w)) @ Q.T


def cca_bases(X_a: np.ndarray, X_b: np.ndarray, regularization: float = DEFAULT_CCA_EPS) -> CcaBases:
    """Canonical directions of two row-aligned samples (centered internally)."""
    n, d = X_a.shape
    if regularization < 0:
        raise InvalidArgumentError("regularization must be non-negative")
    A = X_a - X_a.mean(axis=0)
    B = X_b - X_b.mean(axis=0)
    eye = np.eye(d)
    S_aa = A.T @ A / n + regularization * eye
    S_bb = B.T @ B / n + regularization * eye
    S_ab = A.T @ B / n
    try:
        Wa = _inv_sqrt(S_aa)
        Wb = _inv_sqrt(S_bb)
        U, s, Vt = np.linalg.svd(Wa @ S_ab @ Wb)
    except np.linalg.LinAlgError as exc:
        raise FitError(f"CCA decomposition failed: {exc}") from exc
    C_a = Wa @ U
    C_b = Wb @ Vt.T
    # Deterministic signs: largest-magnitude entry of each C_a column is positive.
    lead = np.argmax(np.abs(C_a), axis=0)
    signs = np.sign(C_a[lead, np.arange(d)])
    signs[signs == 0] = 1.0
    return CcaBases(C_a * signs, C_b * signs, np.clip(s, 0.0, 1.0))


def fit_cca(am: AlignedMatrices, regularization: float = DEFAULT_CCA_EPS) -> tuple[LinearMap, CcaBases]:
    """CCA map ``T = C_a inv(C_b)``: into the shared canonical space, then out into the target space."""
    if am.n <= am.d:
        raise FitInfeasibleError(f"CCA needs n > d, got n={am.n}, d={am.d}")
    bases = cca_bases(am.X_a, am.X_b, regularization)
    cond = np.linalg.cond(bases.C_b)
    if not np.isfinite(cond) or cond > CCA_MAX_COND:
        raise FitError(
            f"target canonical basis is singular (condition {cond:.3g}); "
            "try a larger CCA regularization"
        )
    T = np.linalg.solve(bases.C_b.T, bases.C_a.T).T
    return _wrap(T, am, "cca", regularization=regularization), bases


def fit(am: AlignedMatrices, method: str, cca_eps: float = DEFAULT_CCA_EPS) -> LinearMap:
    if method == "least_squares":
        return fit_least_squares(am)
    if method == "orthogonal":
        return fit_orthogonal(am)
    if method == "cca":
        return fit_cca(am, cca_eps)[0]
    raise InvalidArgumentError(f"unknown method {method!r}")


def apply_map(linear_map: LinearMap, space: SemanticSpace) -> SemanticSpace:
    """Right-multiply every row of ``space`` by the map; vocabulary is untouched."""
    if linear_map.source_language and space.language != linear_map.source_language:
        raise InvalidArgumentError(
            f"map expects source language {linear_map.source_language!r}, got {space.language!r}"
        )
    if space.postprocessing != linear_map.postprocessing:
        raise InvalidArgumentError(
            f"map was fitted on {linear_map.postprocessing!r} spaces, got {space.postprocessing!r}"
        )
    if space.dim != linear_map.d:
        raise InvalidArgumentError(f"map is {linear_map.d}-dimensional, space is {space.dim}")
    label = f"{space.language}→{linear_map.target_language or '?'}"
    return space.replace(language=label, matrix=space.matrix @ linear_map.matrix)


def variance_ratio(am: AlignedMatrices, linear_map: LinearMap) -> float:
    """Total variance of the mapped source rows over that of the target rows.

    Values well below 1 mean mapped points crowd together, the usual
    precursor of hubness in least-squares maps.
    """
    mapped = am.X_a @ linear_map.matrix
    target = float(np.sum(np.var(am.X_b, axis=0)))
    if target == 0.0:
        return float("nan")
    return float(np.sum(np.var(mapped, axis=0))) / target


def save_map(linear_map: LinearMap, path) -> None:
    """Header ``"d method src tgt postproc"`` then ``d`` rows at 17 significant digits."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        src = linear_map.source_language or "-"
        tgt = linear_map.target_language or "-"
        f.write(f"{linear_map.d} {linear_map.method} {src} {tgt} {linear_map.postprocessing}\n")
        for row in linear_map.matrix:
            f.write(" ".join(f"{x:.17g}" for x in row))
            f.write("\n")


def load_map(path) -> LinearMap:
    path = Path(path)
    with open(path, encoding="utf-8") as f:
        lines = [line for line in f.read().splitlines() if line.strip()]
    if not lines:
        raise ParseError("empty map file", path, 1)
    head = lines[0].split()
    if len(head) != 5:
        raise ParseError("header must be 'd method src tgt postproc'", path, 1)
    try:
        d = int(head[0])
    except ValueError:
        raise ParseError(f"bad dimension {head[0]!r}", path, 1) from None
    if d <= 0 or len(lines) != d + 1:
        raise ParseError(f"expected {d} matrix rows, found {len(lines) - 1}", path, None)
    rows = []
    for i, line in enumerate(lines[1:], start=2):
        values = line.split()
        if len(values) != d:
            raise ParseError(f"expected {d} values, found {len(values)}", path, i)
        try:
            rows.append([float(v) for v in values])
        except ValueError:
            raise ParseError("non-numeric matrix entry", path, i) from None
    src = "" if head[2] == "-" else head[2]
    tgt = "" if head[3] == "-" else head[3]
    try:
        return LinearMap(np.array(rows), head[1], src, tgt, head[4])
    except InvalidArgumentError as exc:
        raise ParseError(str(exc), path, 1) from None
