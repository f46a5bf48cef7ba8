"""Fixed-rate universal block codes realized as empirical-type codes.

A code over alphabet L with block length n and rate R is the set of the
first 2^floor(nR) sequences under the total order (cyclic k-th-order
empirical conditional entropy ascending, then lexicographic).  Dense mode
enumerates all L^n sequences; for binary alphabets with k = 0 a type-class
representation handles block lengths up to 64.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import SizeError, ValidationError
from .processes import (DENSE_CAP, ClassicalProcess, IIDProcess,
                        index_sequence, sequence_index)

# guard against float-floor artifacts like 0.7 * 10 -> 6.999...
FLOOR_GUARD = 1e-9


def code_size(n: int, R: float) -> int:
    return 2 ** int(math.floor(n * R + FLOOR_GUARD))


def empirical_entropy_scores(digits: np.ndarray, L: int, k: int) -> np.ndarray:
    """Cyclic k-th-order empirical conditional entropy per row, in bits.

    Wrap-around (k+1)-grams make the score rotation-invariant, so all phases
    of a periodic sequence receive the same score.  For k = 0 the score is
    computed from the descending-sorted symbol counts, which makes permuted
    type classes tie bit-exactly.
    """
    N, n = digits.shape
    if k == 0:
        counts = np.stack([(digits == s).sum(axis=1) for s in range(L)], axis=1)
        counts = np.sort(counts, axis=1)[:, ::-1].astype(float)
        with np.errstate(divide="ignore", invalid="ignore"):
            t = np.where(counts > 0, counts * np.log2(counts / n), 0.0)
        return -t.sum(axis=1) / n
    # gram code at position i: x_i ... x_{i+k}, most significant first
    gram = np.zeros((N, n), dtype=np.int64)
    for j in range(k + 1):
        gram = gram * L + digits[:, (np.arange(n) + j) % n]
    counts = np.zeros((N, L ** (k + 1)), dtype=np.int64)
    for i in range(n):
        np.add.at(counts, (np.arange(N), gram[:, i]), 1)
    ctx = counts.reshape(N, L ** k, L).sum(axis=2)
    ctx_rep = np.repeat(ctx, L, axis=1).astype(float)
    cf = counts.astype(float)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(cf > 0, cf * np.log2(ctx_rep / cf), 0.0)
    return t.sum(axis=1) / n


def all_sequences(L: int, n: int) -> np.ndarray:
    """All L^n sequences as an (L^n, n) digit matrix, x1 most significant."""
    N = L ** n
    idx = np.arange(N)
    digits = np.empty((N, n), dtype=np.int64)
    for pos in range(n - 1, -1, -1):
        digits[:, pos] = idx % L
        idx = idx // L
    return digits


@dataclass
class BlockCode:
    L: int
    n: int
    R: float
    k: int
    # dense mode
    members: np.ndarray | None = None      # flat sequence indices, code order
    # type-class mode (binary, k = 0)
    full_ones_counts: list = field(default_factory=list)
    boundary_ones_counts: list = field(default_factory=list)
    boundary_take: int = 0
    degenerate: bool = False

    @property
    def size(self) -> int:
        if self.members is not None:
            return int(len(self.members))
        full = sum(math.comb(self.n, j) for j in self.full_ones_counts)
        return full + self.boundary_take

    @property
    def dense(self) -> bool:
        return self.members is not None

    def member_set(self) -> frozenset:
        if not self.dense:
            raise ValidationError("member_set requires dense mode")
        return frozenset(int(i) for i in self.members)

    def contains(self, seq) -> bool:
        seq = tuple(int(s) for s in seq)
        if len(seq) != self.n:
            raise ValidationError("sequence length mismatch")
        if self.dense:
            return sequence_index(seq, self.L) in self.member_set()
        j = sum(seq)
        if j in self.full_ones_counts:
            return True
        if j not in self.boundary_ones_counts:
            return False
        return _boundary_rank(seq, self.n, self.boundary_ones_counts) < self.boundary_take

    def to_text(self) -> str:
        """Sorted newline-delimited digit strings (dense mode)."""
        if not self.dense:
            raise ValidationError("serialization requires dense mode")
        lines = sorted("".join(str(d) for d in index_sequence(int(i), self.L, self.n))
                       for i in self.members)
        return "\n".join(lines) + "\n"


def _boundary_rank(seq, n: int, ones_counts) -> int:
    """Lexicographic rank of seq within the union of the given type classes."""
    rank = 0
    o = 0
    for t, s in enumerate(seq):
        if s == 1:
            # count completions with a 0 here
            rank += sum(math.comb(n - t - 1, j - o) for j in ones_counts if j >= o)
        o += s
    return rank


def build_code(L: int, R: float, n: int, k: int = 0,
               dense_cap: int = DENSE_CAP) -> BlockCode:
    if not (0 < R <= math.log2(L) + FLOOR_GUARD):
        raise ValidationError(f"rate {R} outside (0, log2 {L}]")
    size = code_size(n, R)
    if size >= L ** n:
        digits = all_sequences(L, n) if L ** n <= dense_cap else None
        if digits is None:
            raise SizeError("degenerate code too large to enumerate")
        return BlockCode(L, n, R, k, members=np.arange(L ** n), degenerate=True)
    if L ** n <= dense_cap:
        digits = all_sequences(L, n)
        scores = empirical_entropy_scores(digits, L, k)
        order = np.lexsort((np.arange(L ** n), scores))
        return BlockCode(L, n, R, k, members=order[:size])
    if L == 2 and k == 0 and n <= 64:
        return _build_binary_typeclass(R, n, size)
    raise NotImplementedError("predicate mode supports only binary alphabets with k = 0")


def _build_binary_typeclass(R: float, n: int, size: int) -> BlockCode:
    full: list[int] = []
    remaining = size
    for g in range(n // 2 + 1):
        classes = sorted({g, n - g})
        total = sum(math.comb(n, j) for j in classes)
        if total <= remaining:
            full.extend(classes)
            remaining -= total
            if remaining == 0:
                return BlockCode(2, n, R, 0, full_ones_counts=full)
        else:
            return BlockCode(2, n, R, 0, full_ones_counts=full,
                             boundary_ones_counts=classes, boundary_take=remaining)
    return BlockCode(2, n, R, 0, full_ones_counts=full)


def code_measure(p: ClassicalProcess, c: BlockCode) -> float:
    """Exact probability mass the process assigns to the code set."""
    if p.L != c.L:
        raise ValidationError("alphabet size mismatch")
    if c.dense:
        mu = p.marginal(c.n).probs
        return float(mu[c.members].sum())
    if not isinstance(p, IIDProcess):
        raise NotImplementedError("type-class code measure needs an i.i.d. process")
    p0, p1 = float(p.p[0]), float(p.p[1])
    total = 0.0
    for j in c.full_ones_counts:
        total += math.comb(c.n, j) * p1 ** j * p0 ** (c.n - j)
    if c.boundary_take:
        total += _boundary_measure(c.n, c.boundary_ones_counts, c.boundary_take, p0, p1)
    return total


def _boundary_measure(n: int, ones_counts, take: int, p0: float, p1: float) -> float:
    """Measure of the `take` lexicographically-first sequences in a union of
    binary type classes, via a positional walk (no enumeration)."""
    measure = 0.0
    o = 0
    t = 0
    remaining = take
    while remaining > 0 and t < n:
        for s in (0, 1):
            cnt = sum(math.comb(n - t - 1, j - o - s)
                      for j in ones_counts if j - o - s >= 0)
            if cnt <= remaining:
                for j in ones_counts:
                    if j - o - s >= 0:
                        measure += math.comb(n - t - 1, j - o - s) * p1 ** j * p0 ** (n - j)
                remaining -= cnt
                if s == 1:
                    # both branches consumed; nothing deeper on this level
                    o += 1
                    t += 1
            else:
                o += s
                t += 1
                break
        else:
            break
    return measure


def superblock_code(c: BlockCode, i: int) -> BlockCode:
    """Regroup a length-(i*j) code over L into a length-j code over L^i.

    The flat member indices are invariant under mixed-radix regrouping, so
    the member array carries over unchanged.
    """
    if i == 1:
        return c
    if not c.dense:
        raise NotImplementedError("superblock regrouping requires dense mode")
    if c.n % i != 0:
        raise ValidationError(f"superblock size {i} does not divide length {c.n}")
    return BlockCode(c.L ** i, c.n // i, c.R * i, c.k,
                     members=c.members.copy(), degenerate=c.degenerate)
