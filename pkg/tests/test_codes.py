import itertools
import math
from fractions import Fraction

import numpy as np
import pytest

from quclab.codes import (all_sequences, build_code, code_measure, code_size,
                          empirical_entropy_scores, superblock_code)
from quclab.errors import ValidationError
from quclab.processes import IIDProcess, MarkovProcess, PeriodicProcess


def brute_order(L, n, k):
    """Independent (score, lex) ordering via per-sequence counting."""
    seqs = list(itertools.product(range(L), repeat=n))
    scored = []
    for seq in seqs:
        counts = {}
        for i in range(n):
            gram = tuple(seq[(i + j) % n] for j in range(k + 1))
            counts[gram] = counts.get(gram, 0) + 1
        ctx = {}
        for gram, c in counts.items():
            ctx[gram[:-1]] = ctx.get(gram[:-1], 0) + c
        h = sum(c * math.log2(ctx[gram[:-1]] / c) for gram, c in counts.items()) / n
        scored.append((h, seq))
    scored.sort(key=lambda t: (round(t[0], 12), t[1]))
    return [s for _, s in scored]


def test_code_size_floor_guard():
    assert code_size(10, 0.7) == 2 ** 7
    assert code_size(3, 2 / 3) == 4


def test_build_code_full_rate():
    c = build_code(2, 1.0, 3, 0)
    assert c.degenerate and c.size == 8


def test_build_code_spec_example():
    c = build_code(2, 2 / 3, 3, 0)
    assert c.size == 4
    assert c.to_text().splitlines() == ["000", "001", "010", "111"]


def test_build_code_matches_bruteforce_order():
    for L, n, k in [(2, 5, 0), (2, 6, 1), (3, 4, 0), (2, 5, 2)]:
        c = build_code(L, 0.75 * math.log2(L), n, k)
        expect = brute_order(L, n, k)[:c.size]
        got = {tuple(int(d) for d in s) for s in c.to_text().split()}
        assert got == set(expect)


def test_periodic_k1_measure_one():
    p = PeriodicProcess([0, 1])
    c = build_code(2, 0.5, 4, 1)
    assert code_measure(p, c) == 1.0
    assert sorted(c.to_text().split()) == ["0000", "0101", "1010", "1111"]


def test_code_measure_full_code():
    c = build_code(2, 1.0, 4, 0)
    assert code_measure(IIDProcess([0.3, 0.7]), c) == pytest.approx(1.0, abs=1e-15)


def test_code_measure_binomial_oracle_dense():
    # Bernoulli(0.9), n=10, R=0.8: exact binomial-tail arithmetic in Fractions
    c = build_code(2, 0.8, 10, 0)
    p0, p1 = Fraction(9, 10), Fraction(1, 10)
    oracle = Fraction(0)
    ordered = sorted(range(2 ** 10),
                     key=lambda i: (min(bin(i).count("1"), 10 - bin(i).count("1")), i))
    for i in ordered[:c.size]:
        j = bin(i).count("1")
        oracle += p1 ** j * p0 ** (10 - j)
    assert abs(code_measure(IIDProcess([0.9, 0.1]), c) - float(oracle)) < 1e-12


def _typeclass_measure_oracle(n, R, p0f, p1f):
    """Fraction-exact measure of the lex-first 2^floor(nR) sequences under the
    (type entropy, lex) order, computed recursively without enumeration."""
    size = code_size(n, R)
    p0, p1 = Fraction(p0f).limit_denominator(10 ** 6), Fraction(p1f).limit_denominator(10 ** 6)
    total = Fraction(0)
    remaining = size

    def class_prefix_measure(ones_counts, take):
        # measure of the lex-first `take` members of the class union
        acc = Fraction(0)
        o, t = 0, 0
        left = take
        while left > 0 and t < n:
            advanced = False
            for s in (0, 1):
                cnt = sum(math.comb(n - t - 1, j - o - s)
                          for j in ones_counts if j - o - s >= 0)
                if cnt <= left:
                    for j in ones_counts:
                        if j - o - s >= 0:
                            acc += math.comb(n - t - 1, j - o - s) * p1 ** j * p0 ** (n - j)
                    left -= cnt
                    if s == 1:
                        o, t = o + 1, t + 1
                        advanced = True
                else:
                    o, t = o + s, t + 1
                    advanced = True
                    break
            if not advanced:
                break
        return acc

    for g in range(n // 2 + 1):
        classes = sorted({g, n - g})
        csize = sum(math.comb(n, j) for j in classes)
        if csize <= remaining:
            for j in classes:
                total += math.comb(n, j) * p1 ** j * p0 ** (n - j)
            remaining -= csize
            if remaining == 0:
                break
        else:
            total += class_prefix_measure(classes, remaining)
            break
    return float(total)


def test_typeclass_mode_matches_dense():
    # same parameters evaluated in dense mode and in predicate mode
    proc = IIDProcess([0.85, 0.15])
    for n in (8, 12, 16):
        dense = build_code(2, 0.6, n, 0)
        pred = build_code(2, 0.6, n, 0, dense_cap=1)
        assert not pred.dense
        assert pred.size == dense.size
        assert abs(code_measure(proc, pred) - code_measure(proc, dense)) < 1e-12
        # membership agrees sequence by sequence
        seqs = all_sequences(2, n)
        member = dense.member_set()
        for i in range(0, 2 ** n, max(1, 2 ** n // 257)):
            assert pred.contains(seqs[i]) == (i in member)


def test_typeclass_measure_oracle_large_n():
    proc = IIDProcess([0.9, 0.1])
    for n in (20, 40, 60):
        c = build_code(2, 0.8, n, 0)
        assert abs(code_measure(proc, c) - _typeclass_measure_oracle(n, 0.8, 0.9, 0.1)) < 1e-12


def test_universality_curve():
    proc = IIDProcess([0.9, 0.1])
    vals = {n: code_measure(proc, build_code(2, 0.8, n, 0)) for n in range(10, 61, 10)}
    for n in range(20, 61, 10):
        assert vals[n] >= vals[n - 10]
    assert vals[60] >= 0.99


def test_converse_fair_coin():
    proc = IIDProcess([0.5, 0.5])
    for n in (10, 20, 40):
        c = build_code(2, 0.8, n, 0)
        assert code_measure(proc, c) <= 2.0 ** (math.floor(n * 0.8) - n) + 1e-15


def test_code_size_law():
    for L, R, n, k in [(2, 0.7, 9, 0), (3, 1.2, 4, 1), (4, 1.5, 3, 0)]:
        c = build_code(L, R, n, k)
        if not c.degenerate:
            assert c.size == code_size(n, R)


def test_superblock_identity():
    c = build_code(2, 0.5, 4, 1)
    assert superblock_code(c, 1) is c


def test_superblock_regrouping():
    c = build_code(2, 0.5, 4, 1)
    s = superblock_code(c, 2)
    assert (s.L, s.n, s.R) == (4, 2, 1.0)
    assert s.size == c.size
    # flat indices are preserved by mixed-radix regrouping
    assert np.array_equal(np.sort(s.members), np.sort(c.members))


def test_superblock_contains_low_entropy_core():
    # classical inclusion at the smallest instance: L=2, i=2, j=2, R=1/2
    c = build_code(2, 0.5, 4, 1)
    regrouped = set(int(i) for i in superblock_code(c, 2).members)
    direct = build_code(4, 1.0, 2, 0)
    # the regrouped set should contain the zero-entropy (constant-pair) core
    core = {int(i) for i in direct.members
            if len(set(divmod(int(i), 4))) == 1}
    assert core <= regrouped


def test_superblock_divisibility_error():
    with pytest.raises(ValidationError):
        superblock_code(build_code(2, 0.5, 5, 0), 2)


def test_scores_rotation_invariant():
    seqs = all_sequences(2, 6)
    scores = empirical_entropy_scores(seqs, 2, 1)
    for i in (5, 11, 23):
        seq = seqs[i]
        rot = np.roll(seq, 2)
        j = int("".join(map(str, rot)), 2)
        assert abs(scores[i] - scores[j]) < 1e-12


def test_code_measure_markov():
    mk = MarkovProcess([[0.95, 0.05], [0.3, 0.7]])
    c = build_code(2, 0.7, 8, 1)
    mu = mk.marginal(8).probs
    assert abs(code_measure(mk, c) - mu[c.members].sum()) < 1e-15
