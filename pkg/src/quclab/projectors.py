"""Universal projector construction: schedule arithmetic, code projectors,
randomized unitary-orbit joins, and the assembled block projectors with
their trace-rate bounds.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field

import numpy as np

from .codes import BlockCode, build_code
from .errors import ConfigError, ConvergenceError, SizeError, ValidationError
from .operators import DEFAULT_DIM_CAP, haar_unitary, range_basis, span_basis
from .processes import index_sequence
from .sources import QuantumSource

JOIN_TOL = 1e-6
JOIN_BUDGET = 32
JOIN_VERIFY_SAMPLES = 8
NEW_DIRECTION_TOL = 1e-8


@dataclass(frozen=True)
class Schedule:
    m: int
    d: int
    r: float
    i: int
    l: int
    n: int
    R: float


def schedule(m: int, d: int, r: float) -> Schedule:
    """Block-length schedule: the unique i with
    2^i d^(3 2^i) <= m < 2^(i+1) d^(3 2^(i+1))."""
    if m < d ** 3:
        raise ValidationError(f"m = {m} below the admissible minimum {d ** 3}")
    i = 0
    while not (2 ** i * d ** (3 * 2 ** i) <= m < 2 ** (i + 1) * d ** (3 * 2 ** (i + 1))):
        i += 1
        if 2 ** i * d ** (3 * 2 ** i) > m:
            raise ValidationError(f"no admissible schedule index for m = {m}")
    l = 2 ** i
    return Schedule(m=m, d=d, r=r, i=i, l=l, n=m // l, R=l * r)


def _tensor_power_apply(U: np.ndarray, cols: np.ndarray, n: int) -> np.ndarray:
    """Apply U^{x n} (U acting per block site) to a (D^n, K) column stack."""
    D = U.shape[0]
    K = cols.shape[1]
    t = cols.reshape((D,) * n + (K,))
    for site in range(n):
        t = np.moveaxis(np.tensordot(U, t, axes=([1], [site])), 0, site)
    return t.reshape(D ** n, K)


def code_range_basis(code: BlockCode, block_basis: np.ndarray | None = None) -> np.ndarray:
    """Columns spanning the code projector: one product vector per member."""
    if not code.dense:
        raise NotImplementedError("code projector needs dense (enumerated) mode")
    D = code.L
    dim = D ** code.n
    if block_basis is None:
        cols = np.zeros((dim, code.size), dtype=complex)
        cols[np.asarray(code.members, dtype=int), np.arange(code.size)] = 1.0
        return cols
    B = np.asarray(block_basis, dtype=complex)
    if B.shape != (D, D):
        raise ValidationError(f"block basis must be {D}x{D}")
    cols = np.empty((dim, code.size), dtype=complex)
    for j, idx in enumerate(code.members):
        seq = index_sequence(int(idx), D, code.n)
        v = B[:, seq[0]]
        for s in seq[1:]:
            v = np.kron(v, B[:, s])
        cols[:, j] = v
    return cols


def code_projector(code: BlockCode, block_basis: np.ndarray | None = None) -> np.ndarray:
    cols = code_range_basis(code, block_basis)
    if block_basis is None:
        p = np.zeros((cols.shape[0], cols.shape[0]), dtype=complex)
        members = np.asarray(code.members, dtype=int)
        p[members, members] = 1.0
        return p
    q = span_basis(cols)
    return q @ q.conj().T


def _adjoin(Q: np.ndarray, W: np.ndarray) -> tuple[np.ndarray, int]:
    """Extend the orthonormal column set Q by the new directions in W."""
    R = W - Q @ (Q.conj().T @ W)
    R = R - Q @ (Q.conj().T @ R)
    if R.shape[1] == 0:
        return Q, 0
    u, s, _ = np.linalg.svd(R, full_matrices=False)
    keep = u[:, s > NEW_DIRECTION_TOL]
    if keep.shape[1] == 0:
        return Q, 0
    keep = keep - Q @ (Q.conj().T @ keep)
    keep /= np.linalg.norm(keep, axis=0)
    return np.hstack([Q, keep]), keep.shape[1]


@dataclass
class JoinResult:
    """Orthonormal basis of the approximated unitary-orbit join, plus build
    evidence (sample count, rank history, verification deviation)."""

    basis: np.ndarray
    block_dim: int
    n: int
    samples: int
    verify_deviation: float
    seed: int | None = None

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    @property
    def rank(self) -> int:
        return self.basis.shape[1]

    def matrix(self) -> np.ndarray:
        return self.basis @ self.basis.conj().T

    def diagonal(self) -> np.ndarray:
        return (np.abs(self.basis) ** 2).sum(axis=1)


def orbit_join_basis(base: np.ndarray, block_dim: int, n: int,
                     tolerance: float = JOIN_TOL, budget: int = JOIN_BUDGET,
                     rng=None, seed: int | None = None) -> JoinResult:
    """Randomized span saturation of the orbit of span(base) under tensor
    powers of single-block unitaries; verified on fresh samples afterwards."""
    if rng is None:
        rng = np.random.default_rng(seed)
    dim = block_dim ** n
    if base.shape[0] != dim:
        raise ValidationError("base dimension does not match block_dim^n")
    Q = span_basis(base)
    samples = 0
    cap = 100 * budget
    while True:
        stable = 0
        while stable < budget and Q.shape[1] < dim:
            samples += 1
            if samples > cap:
                raise ConvergenceError(
                    f"orbit join rank failed to stabilize after {samples} samples "
                    f"(rank {Q.shape[1]} of {dim})")
            U = haar_unitary(block_dim, rng)
            W = _tensor_power_apply(U, base, n)
            Q, added = _adjoin(Q, W)
            stable = 0 if added else stable + 1
        if Q.shape[1] == dim:
            return JoinResult(basis=np.eye(dim, dtype=complex), block_dim=block_dim,
                              n=n, samples=samples, verify_deviation=0.0, seed=seed)
        dev = 0.0
        extra = []
        for _ in range(JOIN_VERIFY_SAMPLES):
            samples += 1
            U = haar_unitary(block_dim, rng)
            W = _tensor_power_apply(U, base, n)
            res = W - Q @ (Q.conj().T @ W)
            dev = max(dev, float(np.linalg.norm(res, axis=0).max()))
            extra.append(W)
        if dev <= tolerance:
            return JoinResult(basis=Q, block_dim=block_dim, n=n, samples=samples,
                              verify_deviation=dev, seed=seed)
        if samples > cap:
            raise ConvergenceError(
                f"orbit join failed verification (deviation {dev:.3e}) after "
                f"{samples} samples")
        for W in extra:
            Q, _ = _adjoin(Q, W)


def orbit_join(p: np.ndarray, l: int, n: int, tolerance: float = JOIN_TOL,
               budget: int = JOIN_BUDGET, rng=None, seed: int | None = None,
               d: int | None = None) -> np.ndarray:
    """Projector-in, projector-out wrapper around orbit_join_basis."""
    p = np.asarray(p, dtype=complex)
    dim = p.shape[0]
    if d is None:
        d = 2
    block_dim = d ** l
    if block_dim ** n != dim:
        raise ValidationError(f"projector dimension {dim} != ({d}^{l})^{n}")
    base = range_basis(p)
    if base.shape[1] == dim:
        return np.eye(dim, dtype=complex)
    res = orbit_join_basis(base, block_dim, n, tolerance, budget, rng=rng, seed=seed)
    return res.matrix()


def symmetric_subspace_trace_bound(block_dim: int, n: int, base_trace: int) -> float:
    """(n+1)^(D^2) * tr(p) * D for block dimension D."""
    return float((n + 1) ** (block_dim ** 2) * base_trace * block_dim)


def rate_upper_bound(d: int, l: int, n: int | None = None) -> float:
    """Additive excess over r in the trace-rate upper bound.

    With the paper schedule n >= d^(3l); passing an explicit n recomputes the
    bound for an override schedule.
    """
    if n is None:
        n = d ** (3 * l)
    return (d ** (2 * l) * math.log2(n + 1)) / (l * n) + math.log2(d) / n


@dataclass
class UniversalProjector:
    m: int
    d: int
    r: float
    l: int
    n: int
    R: float
    k_order: int
    join: JoinResult
    pad: int
    code_size: int
    metadata: dict = field(default_factory=dict)

    @property
    def trace(self) -> float:
        return float(self.join.rank * self.d ** self.pad)

    @property
    def trace_log_rate(self) -> float:
        return math.log2(self.trace) / self.m

    def upper_rate(self) -> float:
        return self.r + rate_upper_bound(self.d, self.l, self.n)

    def diagonal(self) -> np.ndarray:
        diag = self.join.diagonal()
        if self.pad:
            diag = np.kron(diag, np.ones(self.d ** self.pad))
        return diag

    def matrix(self) -> np.ndarray:
        q = self.join.matrix()
        if self.pad:
            q = np.kron(q, np.eye(self.d ** self.pad, dtype=complex))
        return q

    def extended_basis(self) -> np.ndarray:
        b = self.join.basis
        if self.pad:
            b = np.kron(b, np.eye(self.d ** self.pad, dtype=complex))
        return b


def assemble_q(m: int, d: int, r: float, k_order: int = 0,
               override: tuple[int, int, float] | None = None,
               tolerance: float = JOIN_TOL, budget: int = JOIN_BUDGET,
               seed: int | None = None, dim_cap: int = DEFAULT_DIM_CAP) -> UniversalProjector:
    """Build q_r^(m): the orbit join of the code projector on l-blocks,
    identity-padded when l*n does not divide m exactly.

    `override` = (l, n, R) replaces the paper schedule for desk-scale runs.
    """
    if override is not None:
        l, n, R = override
        if l * n > m:
            raise ValidationError("override blocks exceed m sites")
    else:
        sch = schedule(m, d, r)
        l, n, R = sch.l, sch.n, sch.R
    if d ** m > dim_cap:
        raise SizeError(f"projector dimension {d}^{m} exceeds cap")
    pad = m - l * n
    code = build_code(d ** l, R, n, k_order)
    base = code_range_basis(code)
    join = orbit_join_basis(base, d ** l, n, tolerance, budget, seed=seed)
    up = UniversalProjector(m=m, d=d, r=r, l=l, n=n, R=R, k_order=k_order,
                            join=join, pad=pad, code_size=code.size,
                            metadata={"seed": seed, "tolerance": tolerance,
                                      "budget": budget, "samples": join.samples,
                                      "verify_deviation": join.verify_deviation})
    up.metadata["rate_lower_ok"] = bool(up.trace_log_rate >= r - 1e-12)
    up.metadata["sym_trace_bound_ok"] = bool(
        join.rank <= symmetric_subspace_trace_bound(d ** l, n, code.size))
    return up


def acceptance_probability(q: UniversalProjector, s: QuantumSource) -> float:
    """tr(q rho_m), via the diagonal fast path when the source marginal is
    diagonal in the computational basis."""
    if s.d != q.d:
        raise ValidationError("source dimension != projector site dimension")
    diag = s.diagonal_marginal(q.m)
    if diag is not None:
        return float(np.dot(q.diagonal(), diag))
    rho = s.marginal(q.m)
    b = q.extended_basis()
    return float(np.einsum("ik,ij,jk->", b.conj(), rho, b, optimize=True).real)


def export_projector(q: UniversalProjector, path_prefix: str) -> None:
    """CSV real/imag grids plus a JSON sidecar for reproducibility."""
    mat = q.matrix()
    np.savetxt(path_prefix + ".real.csv", mat.real, delimiter=",")
    np.savetxt(path_prefix + ".imag.csv", mat.imag, delimiter=",")
    sidecar = {
        "m": q.m, "d": q.d, "r": q.r, "l": q.l, "n": q.n, "R": q.R,
        "k_order": q.k_order, "pad": q.pad, "trace": q.trace,
        "rank": q.join.rank, "code_size": q.code_size,
        "metadata": q.metadata,
    }
    with open(path_prefix + ".json", "w") as fh:
        json.dump(sidecar, fh, indent=2, sort_keys=True)


def load_projector_matrix(path_prefix: str) -> tuple[np.ndarray, dict]:
    re_path = path_prefix + ".real.csv"
    im_path = path_prefix + ".imag.csv"
    js_path = path_prefix + ".json"
    if not (os.path.exists(re_path) and os.path.exists(im_path)):
        raise ConfigError(f"projector files {path_prefix}.{{real,imag}}.csv not found")
    mat = np.loadtxt(re_path, delimiter=",") + 1j * np.loadtxt(im_path, delimiter=",")
    meta = {}
    if os.path.exists(js_path):
        with open(js_path) as fh:
            meta = json.load(fh)
    return np.atleast_2d(mat), meta
