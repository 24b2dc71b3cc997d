"""Published word-pair counts per analogy category and language."""

from xlanalogy.analogy_bench import parse_corpus

LANGS = ("en", "de", "es", "it", "cs", "hr")
# pairs per category, in LANGS order
PAIR_COUNTS = {
    "family": (24, 24, 20, 20, 26, 41),
    "state-currency": (29, 29, 28, 29, 29, 21),
    "capital-common-countries": (23, 23, 21, 23, 23, 23),
    "state-adjective": (41, 41, 40, 41, 41, 41),
    "adjective-comparative": (23, 37, 5, 10, 40, 77),
    "adjective-superlative": (20, 34, 40, 29, 40, 77),
    "adjective-opposite": (29, 29, 20, 24, 27, 29),
    "noun-plural": (112, 111, 37, 36, 74, 46),
    "verb-past-tense": (38, 40, 39, 33, 95, 40),
}


def write_count_corpus(folder):
    """Write one corpus file per language with the counts above and parse them."""
    paths = {}
    for j, lang in enumerate(LANGS):
        lines = []
        for cat, counts in PAIR_COUNTS.items():
            lines.append(f": {cat}")
            lines += [f"{lang}_{cat}_{i}a {lang}_{cat}_{i}b" for i in range(counts[j])]
        p = folder / f"{lang}.txt"
        p.write_text("\n".join(lines) + "\n", encoding="utf-8")
        paths[lang] = p
    return parse_corpus(paths)
