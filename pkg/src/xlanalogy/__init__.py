"""Cross-lingual word-embedding alignment and cross-lingual word-analogy evaluation."""

from .analogy_bench import (
    CATEGORIES,
    AnalogyCorpus,
    AnalogyQuestion,
    BilingualDictionary,
    CategoryCounts,
    EvalReport,
    answer_analogy,
    evaluate,
    generate_questions,
    parse_corpus,
    parse_dictionary,
)
from .embedding_store import SemanticSpace, center, load_space, lookup, normalize, postprocess, save_space
from .errors import (
    ConfigError,
    DivergenceError,
    EvaluationError,
    FitError,
    FitInfeasibleError,
    InvalidArgumentError,
    InvalidStateError,
    ParseError,
    XlAnalogyError,
)
from .linear_maps import (
    AlignedMatrices,
    CcaBases,
    LinearMap,
    apply_map,
    build_aligned,
    fit_cca,
    fit_least_squares,
    fit_least_squares_gd,
    fit_orthogonal,
    load_map,
    save_map,
)
from .pipeline import (
    ExperimentConfig,
    ExperimentTag,
    build_bilingual,
    build_multilingual,
    generate_synthetic,
    load_config,
    run_dictionary_sweep,
    run_experiment_grid,
)

__version__ = "0.1.0"
