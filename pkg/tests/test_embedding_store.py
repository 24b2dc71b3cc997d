import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from xlanalogy.embedding_store import (
    SemanticSpace,
    center,
    from_rows,
    load_space,
    lookup,
    normalize,
    postprocess,
    save_space,
)
from xlanalogy.errors import InvalidStateError, ParseError

THREE = "3 2\na 1 0\nb 0 1\nc 1 1\n"


def test_load_reads_back_matrix(write):
    s = load_space(write("en.vec", THREE))
    assert s.vocab == ("a", "b", "c")
    np.testing.assert_array_equal(s.matrix, [[1, 0], [0, 1], [1, 1]])
    assert s.postprocessing == "none"
    assert s.language == "en"


def test_load_limit_is_prefix(write):
    s = load_space(write("en.vec", THREE), limit=2)
    assert s.vocab == ("a", "b")


def test_load_lowercases_and_keeps_first_duplicate(write):
    s = load_space(write("x.vec", "2 2\nA 1 0\na 2 0\n"))
    assert s.vocab == ("a",)
    np.testing.assert_array_equal(s.matrix, [[1, 0]])


def test_load_without_lowercasing_keeps_both(write):
    s = load_space(write("x.vec", "2 2\nA 1 0\na 2 0\n"), lowercase=False)
    assert s.vocab == ("A", "a")


def test_load_accepts_crlf_and_trailing_space(write):
    s = load_space(write("x.vec", "2 2\r\nfoo 1 2 \r\nbar 3 4 \r\n"))
    assert s.vocab == ("foo", "bar")
    np.testing.assert_array_equal(s.matrix, [[1, 2], [3, 4]])


@pytest.mark.parametrize(
    "text, line",
    [
        ("3\na 1 0\n", 1),
        ("x 2\na 1 0\n", 1),
        ("1 0\na\n", 1),
        ("2 2\na 1 0\nb 1\n", 3),
        ("1 2\na 1 zz\n", 2),
    ],
)
def test_load_errors_name_the_line(write, text, line):
    with pytest.raises(ParseError) as err:
        load_space(write("bad.vec", text))
    assert err.value.line == line
    assert f":{line}" in str(err.value)


def test_load_empty_vocabulary(write):
    with pytest.raises(ParseError, match="empty vocabulary"):
        load_space(write("e.vec", "0 3\n"))


def test_save_roundtrip(tmp_path, rng):
    s = from_rows("xx", ["p", "q", "r"], rng.standard_normal((3, 4)))
    save_space(s, tmp_path / "s.vec")
    t = load_space(tmp_path / "s.vec", language="xx")
    assert t.vocab == s.vocab
    np.testing.assert_array_equal(t.matrix, s.matrix)


def test_center_examples():
    s = center(from_rows("en", ["a", "b"], [[1, 0], [3, 0]]))
    np.testing.assert_allclose(s.matrix, [[-1, 0], [1, 0]])
    assert s.postprocessing == "c"

    zero_mean = from_rows("en", ["a", "b"], [[1, 2], [-1, -2]])
    np.testing.assert_allclose(center(zero_mean).matrix, zero_mean.matrix)

    single = center(from_rows("en", ["a"], [[5, 7]]))
    np.testing.assert_allclose(single.matrix, [[0, 0]])


def test_center_rejects_processed_space():
    s = center(from_rows("en", ["a", "b"], [[1, 0], [3, 0]]))
    with pytest.raises(InvalidStateError):
        center(s)
    with pytest.raises(InvalidStateError):
        center(normalize(from_rows("en", ["a"], [[1, 1]])))


def test_normalize_examples():
    s = normalize(from_rows("en", ["a", "z"], [[3, 4], [0, 0]]))
    np.testing.assert_allclose(s.matrix, [[0.6, 0.8], [0, 0]])
    assert s.degenerate == {"z"}
    assert s.postprocessing == "u"


def test_center_then_normalize():
    s = normalize(center(from_rows("en", ["a", "b"], [[1, 0], [3, 0]])))
    np.testing.assert_allclose(s.matrix, [[-1, 0], [1, 0]])
    assert s.postprocessing == "cu"
    with pytest.raises(InvalidStateError):
        normalize(s)


def test_postprocess_variants(rng):
    raw = from_rows("en", list("abcdef"), rng.standard_normal((6, 3)) + 5)
    assert postprocess(raw, "none") is raw
    cu = postprocess(raw, "cu")
    # same order as explicit center then normalize
    np.testing.assert_array_equal(cu.matrix, normalize(center(raw)).matrix)
    with pytest.raises(InvalidStateError):
        postprocess(cu, "c")


def test_lookup():
    s = from_rows("en", ["a", "b", "c"], [[1, 0], [0, 1], [1, 1]])
    np.testing.assert_array_equal(lookup(s, "a"), [1, 0])
    assert lookup(s, "Z") is None
    np.testing.assert_array_equal(lookup(s, "A"), [1, 0])


def test_space_is_immutable():
    s = from_rows("en", ["a"], [[1.0, 2.0]])
    with pytest.raises(ValueError):
        s.matrix[0, 0] = 3.0
    with pytest.raises(ValueError):
        SemanticSpace("en", ("a", "a"), np.zeros((2, 2)))


matrices = arrays(
    np.float64,
    st.tuples(st.integers(1, 12), st.integers(1, 5)),
    elements=st.floats(-100, 100, allow_nan=False),
)


@settings(max_examples=60, deadline=None)
@given(matrices)
def test_cu_pipeline_properties(m):
    raw = SemanticSpace("en", tuple(f"w{i}" for i in range(m.shape[0])), m)
    c = center(raw)
    scale = max(1.0, np.abs(m).max())
    assert np.all(np.abs(c.matrix.mean(axis=0)) <= 1e-6 * scale)
    # centering a centered matrix again moves nothing
    again = c.matrix - c.matrix.mean(axis=0)
    np.testing.assert_allclose(again, c.matrix, atol=1e-9 * scale)
    cu = normalize(c)
    norms = np.linalg.norm(cu.matrix, axis=1)
    live = np.array([w not in cu.degenerate for w in cu.vocab])
    np.testing.assert_allclose(norms[live], 1.0, atol=1e-6)
    assert np.all(norms[~live] == 0)
    for w in raw.vocab:
        np.testing.assert_array_equal(raw.lookup(w), raw.matrix[raw.index(w)])


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 8), st.integers(1, 8))
def test_limit_gives_prefix(tmp_path_factory, n, k):
    rng = np.random.default_rng(n * 31 + k)
    path = tmp_path_factory.mktemp("pref") / "s.vec"
    words = [f"w{i}" for i in range(n)]
    save_space(from_rows("en", words, rng.standard_normal((n, 3))), path)
    full = load_space(path)
    part = load_space(path, limit=k)
    assert full.vocab[: len(part.vocab)] == part.vocab
