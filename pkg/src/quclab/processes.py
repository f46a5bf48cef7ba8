"""Finite-alphabet stationary processes with exact marginal evaluation.

Four concrete kinds: i.i.d., finite Markov chains (initialized at their
stationary distribution unless a custom initial vector is requested),
deterministic cycles with a uniform random phase, and convex mixtures
(provided to exercise non-ergodic behavior).  A fifth, evaluator-backed kind
carries processes induced by pinching a quantum source.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import SizeError, ValidationError

DENSE_CAP = 2 ** 20
PROB_TOL = 1e-12


def entropy_bits(p: np.ndarray) -> float:
    """Shannon entropy in bits, with 0 log 0 = 0."""
    p = np.asarray(p, dtype=float)
    nz = p[p > 0.0]
    return float(-np.sum(nz * np.log2(nz)))


@dataclass(frozen=True)
class Distribution:
    """Dense distribution over length-n blocks, flat index base-L (x1 most significant)."""

    L: int
    n: int
    probs: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        if p.shape != (self.L ** self.n,):
            raise ValidationError("distribution shape mismatch")
        if np.any(p < -PROB_TOL):
            raise ValidationError("negative probability")
        if abs(p.sum() - 1.0) > 1e-9:
            raise ValidationError(f"distribution sums to {p.sum()}, not 1")
        object.__setattr__(self, "probs", p)

    def entropy(self) -> float:
        return entropy_bits(self.probs)

    def marginalize_last(self, i: int) -> "Distribution":
        """Sum out the last i symbols."""
        p = self.probs.reshape(self.L ** (self.n - i), self.L ** i).sum(axis=1)
        return Distribution(self.L, self.n - i, p)

    def marginalize_first(self, i: int) -> "Distribution":
        p = self.probs.reshape(self.L ** i, self.L ** (self.n - i)).sum(axis=0)
        return Distribution(self.L, self.n - i, p)


def shannon_entropy(d: Distribution) -> float:
    return d.entropy()


def sequence_index(seq, L: int) -> int:
    idx = 0
    for s in seq:
        idx = idx * L + int(s)
    return idx


def index_sequence(idx: int, L: int, n: int) -> tuple:
    out = []
    for _ in range(n):
        out.append(idx % L)
        idx //= L
    return tuple(reversed(out))


class ClassicalProcess:
    """Base class; concrete kinds override prob / marginal / entropy_rate."""

    L: int
    ergodic: bool = True

    def prob(self, seq) -> float:
        raise NotImplementedError

    def marginal(self, n: int) -> Distribution:
        if n < 1:
            raise ValidationError("block length must be >= 1")
        if self.L ** n > DENSE_CAP:
            raise SizeError(f"dense marginal with {self.L}^{n} entries exceeds cap")
        probs = np.array([self.prob(index_sequence(i, self.L, n))
                          for i in range(self.L ** n)])
        return Distribution(self.L, n, probs)

    def entropy_rate(self) -> float:
        raise NotImplementedError

    def block(self, l: int) -> "ClassicalProcess":
        raise NotImplementedError(f"block regrouping not implemented for {type(self).__name__}")

    def lagged_pair_expectations(self, f, g, m: int, lags) -> np.ndarray:
        """E[f(X_1..X_m) g(X_{j+1}..X_{j+m})] for each lag j >= m in `lags`.

        f and g are dense vectors over L^m indexed like Distribution.
        """
        raise NotImplementedError

    def mean_observable(self, f, m: int) -> float:
        return float(np.dot(np.asarray(f, float), self.marginal(m).probs))


def _check_prob_vector(p, name: str) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if np.any(p < -PROB_TOL):
        raise ValidationError(f"{name} has negative entries")
    if abs(p.sum() - 1.0) > PROB_TOL:
        raise ValidationError(f"{name} sums to {p.sum()}, not 1")
    return np.clip(p, 0.0, None)


class IIDProcess(ClassicalProcess):
    def __init__(self, probs):
        self.p = _check_prob_vector(probs, "probability vector")
        self.L = len(self.p)

    def prob(self, seq) -> float:
        out = 1.0
        for s in seq:
            out *= self.p[int(s)]
        return float(out)

    def marginal(self, n: int) -> Distribution:
        if n < 1:
            raise ValidationError("block length must be >= 1")
        if self.L ** n > DENSE_CAP:
            raise SizeError("dense marginal exceeds cap")
        probs = self.p.copy()
        for _ in range(n - 1):
            probs = np.outer(probs, self.p).ravel()
        return Distribution(self.L, n, probs)

    def entropy_rate(self) -> float:
        return entropy_bits(self.p)

    def block(self, l: int) -> "IIDProcess":
        if l == 1:
            return self
        return IIDProcess(self.marginal(l).probs)

    def lagged_pair_expectations(self, f, g, m, lags):
        mu = self.marginal(m).probs
        ef = float(np.dot(f, mu))
        eg = float(np.dot(g, mu))
        return np.full(len(list(lags)), ef * eg)


def stationary_distribution(P: np.ndarray) -> np.ndarray:
    """Solve pi P = pi, sum(pi) = 1 by a linear solve."""
    L = P.shape[0]
    a = P.T - np.eye(L)
    a[-1, :] = 1.0
    b = np.zeros(L)
    b[-1] = 1.0
    pi = np.linalg.solve(a, b)
    return np.clip(pi, 0.0, None) / np.clip(pi, 0.0, None).sum()


class MarkovProcess(ClassicalProcess):
    def __init__(self, transition, initial=None):
        P = np.asarray(transition, dtype=float)
        if P.ndim != 2 or P.shape[0] != P.shape[1]:
            raise ValidationError("transition matrix must be square")
        for row in P:
            _check_prob_vector(row, "transition row")
        self.P = P
        self.L = P.shape[0]
        self.pi_stationary = stationary_distribution(P)
        if initial is None:
            self.pi = self.pi_stationary
            self.stationary = True
        else:
            self.pi = _check_prob_vector(initial, "initial distribution")
            self.stationary = bool(np.max(np.abs(self.pi - self.pi_stationary)) <= 1e-12)

    def prob(self, seq) -> float:
        seq = [int(s) for s in seq]
        out = self.pi[seq[0]]
        for a, b in zip(seq, seq[1:]):
            out *= self.P[a, b]
        return float(out)

    def marginal(self, n: int) -> Distribution:
        if n < 1:
            raise ValidationError("block length must be >= 1")
        if self.L ** n > DENSE_CAP:
            raise SizeError("dense marginal exceeds cap")
        probs = self.pi.copy()
        for _ in range(n - 1):
            last = np.arange(len(probs)) % self.L
            probs = (probs[:, None] * self.P[last, :]).ravel()
        return Distribution(self.L, n, probs)

    def entropy_rate(self) -> float:
        if not self.stationary:
            raise ValidationError("entropy rate requires stationary initialization")
        return float(sum(self.pi[i] * entropy_bits(self.P[i]) for i in range(self.L)))

    def block(self, l: int) -> "MarkovProcess":
        if l == 1:
            return self
        if self.L ** l > DENSE_CAP:
            raise SizeError("block alphabet exceeds cap")
        Ll = self.L ** l
        init = self.marginal(l).probs
        T = np.zeros((Ll, Ll))
        for u in range(Ll):
            last = index_sequence(u, self.L, l)[-1]
            for v in range(Ll):
                vs = index_sequence(v, self.L, l)
                w = self.P[last, vs[0]]
                for a, b in zip(vs, vs[1:]):
                    w *= self.P[a, b]
                T[u, v] = w
        return MarkovProcess(T, initial=init)

    def irreducible(self) -> bool:
        reach = (self.P > 0).astype(int)
        closure = np.linalg.matrix_power(reach + np.eye(self.L, dtype=int), self.L)
        return bool(np.all(closure > 0))

    def period(self) -> int:
        """Period of an irreducible chain (gcd of cycle length differences)."""
        level = {0: 0}
        frontier = [0]
        g = 0
        edges = []
        while frontier:
            nxt = []
            for u in frontier:
                for v in np.nonzero(self.P[u] > 0)[0]:
                    edges.append((u, int(v)))
                    if int(v) not in level:
                        level[int(v)] = level[u] + 1
                        nxt.append(int(v))
            frontier = nxt
        for u, v in edges:
            g = math.gcd(g, level[u] + 1 - level[v])
        return max(g, 1)

    def lagged_pair_expectations(self, f, g, m, lags):
        f = np.asarray(f, float)
        g = np.asarray(g, float)
        mu = self.marginal(m).probs
        # u[s]: measure of first m symbols weighted by f, ending in state s
        u = (mu * f).reshape(self.L ** (m - 1), self.L).sum(axis=0) if m > 1 else mu * f
        # w[s]: expected g over the m symbols following state s
        w = np.zeros(self.L)
        for s in range(self.L):
            probs = self.P[s].copy()
            for _ in range(m - 1):
                last = np.arange(len(probs)) % self.L
                probs = (probs[:, None] * self.P[last, :]).ravel()
            w[s] = float(np.dot(g, probs))
        lags = list(lags)
        out = np.empty(len(lags))
        vec = u.copy()
        cur = m  # vec currently advanced to lag m (gap 0)
        for idx, j in enumerate(lags):
            if j < m:
                raise ValidationError("lag must be >= m")
            while cur < j:
                vec = vec @ self.P
                cur += 1
            out[idx] = float(np.dot(vec, w))
        return out


class PeriodicProcess(ClassicalProcess):
    """Deterministic cycle observed from a uniformly random phase.

    `phases` restricts the admissible phases (used by the l-ergodic
    decomposition); the default is all of them.
    """

    def __init__(self, cycle, phases=None, L=None):
        self.cycle = [int(c) for c in cycle]
        if not self.cycle:
            raise ValidationError("cycle must be nonempty")
        self.L = int(L) if L is not None else max(self.cycle) + 1
        self.c = len(self.cycle)
        self.phases = sorted(set(range(self.c) if phases is None else (int(p) % self.c for p in phases)))
        if not self.phases:
            raise ValidationError("phase set must be nonempty")
        self.ergodic = len(self.phases) == self.c or len(self.phases) == 1

    def _matches(self, seq, ph: int) -> bool:
        return all(int(s) == self.cycle[(ph + t) % self.c] for t, s in enumerate(seq))

    def prob(self, seq) -> float:
        hits = sum(1 for ph in self.phases if self._matches(seq, ph))
        return hits / len(self.phases)

    def entropy_rate(self) -> float:
        return 0.0

    def shifted(self, x: int) -> "PeriodicProcess":
        return PeriodicProcess(self.cycle, phases=[(p + x) % self.c for p in self.phases], L=self.L)

    def block(self, l: int) -> "ClassicalProcess":
        if l == 1:
            return self
        if self.L ** l > DENSE_CAP:
            raise SizeError("block alphabet exceeds cap")
        comps = []
        for ph in self.phases:
            period = self.c // math.gcd(self.c, l)
            sup = [sequence_index([self.cycle[(ph + t * l + j) % self.c] for j in range(l)], self.L)
                   for t in range(period)]
            comps.append(PeriodicProcess(sup, phases=[0], L=self.L ** l))
        if len(comps) == 1:
            return comps[0]
        return MixtureProcess([1.0 / len(comps)] * len(comps), comps)

    def lagged_pair_expectations(self, f, g, m, lags):
        f = np.asarray(f, float)
        g = np.asarray(g, float)
        lags = list(lags)
        out = np.zeros(len(lags))
        for ph in self.phases:
            fa = f[sequence_index([self.cycle[(ph + t) % self.c] for t in range(m)], self.L)]
            for idx, j in enumerate(lags):
                gb = g[sequence_index([self.cycle[(ph + j + t) % self.c] for t in range(m)], self.L)]
                out[idx] += fa * gb
        return out / len(self.phases)


class MixtureProcess(ClassicalProcess):
    """Convex mixture of processes over a common alphabet; non-ergodic a priori."""

    ergodic = False

    def __init__(self, weights, components):
        self.w = _check_prob_vector(weights, "mixture weights")
        self.components = list(components)
        if len(self.w) != len(self.components):
            raise ValidationError("weights / components length mismatch")
        Ls = {c.L for c in self.components}
        if len(Ls) != 1:
            raise ValidationError("mixture components must share the alphabet")
        self.L = Ls.pop()

    def prob(self, seq) -> float:
        return float(sum(w * c.prob(seq) for w, c in zip(self.w, self.components)))

    def marginal(self, n: int) -> Distribution:
        probs = sum(w * c.marginal(n).probs for w, c in zip(self.w, self.components))
        return Distribution(self.L, n, probs)

    def entropy_rate(self) -> float:
        warnings.warn("mixture process is non-ergodic; returning the weighted "
                      "average of component entropy rates", stacklevel=2)
        return float(sum(w * c.entropy_rate() for w, c in zip(self.w, self.components)))

    def lagged_pair_expectations(self, f, g, m, lags):
        return sum(w * c.lagged_pair_expectations(f, g, m, lags)
                   for w, c in zip(self.w, self.components))


class EvaluatorProcess(ClassicalProcess):
    """Process defined by a dense-marginal evaluator (n -> flat probability array)."""

    def __init__(self, L, marginal_fn, ergodic=True):
        self.L = int(L)
        self._fn = marginal_fn
        self.ergodic = ergodic
        self._cache: dict[int, Distribution] = {}

    def marginal(self, n: int) -> Distribution:
        if n not in self._cache:
            if self.L ** n > DENSE_CAP:
                raise SizeError("dense marginal exceeds cap")
            self._cache[n] = Distribution(self.L, n, np.asarray(self._fn(n), float))
        return self._cache[n]

    def prob(self, seq) -> float:
        seq = tuple(int(s) for s in seq)
        return float(self.marginal(len(seq)).probs[sequence_index(seq, self.L)])


def marginal(p: ClassicalProcess, n: int) -> Distribution:
    return p.marginal(n)


def entropy_rate(p: ClassicalProcess) -> float:
    return p.entropy_rate()


def block_process(p: ClassicalProcess, l: int) -> ClassicalProcess:
    if l < 1:
        raise ValidationError("block length must be >= 1")
    return p.block(l)


@dataclass
class Decomposition:
    """l-ergodic decomposition: uniform mixture of k shift-related components."""

    l: int
    k: int
    components: list = field(default_factory=list)


def ergodic_decomposition_l(p: ClassicalProcess, l: int) -> Decomposition:
    if isinstance(p, PeriodicProcess):
        if set(p.phases) != set(range(p.c)):
            raise ValidationError("decomposition expects the full uniform-phase process")
        k = math.gcd(p.c, l)
        comps = [PeriodicProcess(p.cycle, phases=[ph for ph in range(p.c) if ph % k == x], L=p.L)
                 for x in range(k)]
        return Decomposition(l=l, k=k, components=comps)
    if isinstance(p, MarkovProcess):
        if not p.stationary:
            raise ValidationError("decomposition requires a stationary chain")
        if not p.irreducible():
            raise NotImplementedError("decomposition of reducible chains is not supported")
        if math.gcd(p.period(), l) != 1:
            raise NotImplementedError("decomposition of periodic chains with gcd(period, l) > 1 "
                                      "is not supported")
        return Decomposition(l=l, k=1, components=[p])
    raise NotImplementedError(f"decomposition not implemented for {type(p).__name__}")


def high_entropy_components(decomposition: Decomposition, s: float, eta: float,
                            block_len: int) -> set:
    """Indices of components whose per-symbol block entropy reaches s + eta."""
    out = set()
    for x, comp in enumerate(decomposition.components):
        h = comp.marginal(block_len).entropy() / block_len
        if h >= s + eta:
            out.add(x)
    return out
