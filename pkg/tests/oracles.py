"""Reference implementations that share no code with the package.

Each oracle solves the same problem by a different route (normal equations,
plain gradient loops, exhaustive pure-Python cosine search) so agreement is
evidence of correctness, not of shared bugs.
"""

import math

import numpy as np


def normal_equations(X_a, X_b):
    """(X_a^T X_a)^-1 X_a^T X_b via a linear solve."""
    return np.linalg.solve(X_a.T @ X_a, X_a.T @ X_b)


def random_orthogonal(rng, d):
    q, r = np.linalg.qr(rng.standard_normal((d, d)))
    return q * np.sign(np.diag(r))


def well_conditioned(rng, n, d, max_cond=10.0):
    """Random n x d matrix whose condition number is at most ``max_cond``."""
    while True:
        X = rng.standard_normal((n, d))
        if np.linalg.cond(X) <= max_cond:
            return X


def _cos(u, v):
    nu = math.sqrt(math.fsum(x * x for x in u))
    nv = math.sqrt(math.fsum(x * x for x in v))
    if nu == 0.0:
        return -math.inf
    if nv == 0.0:
        return 0.0
    return math.fsum(a * b for a, b in zip(u, v)) / (nu * nv)


def brute_force_answer(src_vocab, src_rows, tgt_vocab, tgt_rows, question, k, window):
    """Exhaustive 3CosAdd answer as a list of words, or None for OOV."""
    w1, w2, w3, _gold, lang_a, lang_b = question
    s_index = {w: i for i, w in enumerate(src_vocab)}
    t_index = {w: i for i, w in enumerate(tgt_vocab)}
    if w1 not in s_index or w2 not in s_index or w3 not in t_index:
        return None
    a = src_rows[s_index[w1]]
    b = src_rows[s_index[w2]]
    c = tgt_rows[t_index[w3]]
    v = [float(b[j]) - float(a[j]) + float(c[j]) for j in range(len(c))]
    banned = {w3} if lang_a != lang_b else {w1, w2, w3}
    scored = []
    for i in range(min(window, len(tgt_vocab))):
        word = tgt_vocab[i]
        if word in banned:
            continue
        s = _cos([float(x) for x in tgt_rows[i]], v)
        if s == -math.inf:
            continue
        scored.append((-s, i, word))
    scored.sort()
    return [w for _, _, w in scored[:k]]


def brute_force_counts(src_vocab, src_rows, tgt_vocab, tgt_rows, questions, k, window):
    """(n, correct@1, correct@k, oov) for a list of question tuples."""
    n = c1 = ck = oov = 0
    t_index = set(tgt_vocab)
    for q in questions:
        n += 1
        ans = brute_force_answer(src_vocab, src_rows, tgt_vocab, tgt_rows, q, k, window)
        if ans is None or q[3] not in t_index:
            oov += 1
            continue
        if ans and ans[0] == q[3]:
            c1 += 1
        if q[3] in ans:
            ck += 1
    return n, c1, ck, oov
