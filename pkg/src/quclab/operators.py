"""Dense complex-matrix substrate: tensor products, deterministic Hermitian
eigendecomposition, partial trace and a small projector lattice.

All functions are pure and operate on plain complex ndarrays.  Density
operators and projectors are ordinary matrices; `validate_density` /
`validate_projector` enforce the structural invariants that every other
module relies on.
"""

from __future__ import annotations

import numpy as np

from .errors import SizeError, ValidationError

DEFAULT_DIM_CAP = 2 ** 14

HERMITIAN_TOL = 1e-10
IDEMPOTENT_TOL = 1e-8
EIG_DEGENERACY_GAP = 1e-9
RANK_SVAL_RTOL = 1e-8


def _as_matrix(a) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a.real)) or not np.all(np.isfinite(a.imag)):
        raise ValidationError("matrix has non-finite entries")
    return a


def check_hermitian(a, tol: float = HERMITIAN_TOL) -> float:
    a = _as_matrix(a)
    dev = float(np.max(np.abs(a - a.conj().T))) if a.size else 0.0
    if dev > tol:
        raise ValidationError(f"matrix is not Hermitian (deviation {dev:.3e})")
    return dev


def tensor_product(a, b, dim_cap: int = DEFAULT_DIM_CAP) -> np.ndarray:
    """Kronecker product with an explicit dimension cap."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    out_dim = a.shape[0] * b.shape[0]
    if out_dim > dim_cap:
        raise SizeError(f"tensor product dimension {out_dim} exceeds cap {dim_cap}")
    return np.kron(a, b)


def _phase_fix(v: np.ndarray) -> np.ndarray:
    i = int(np.argmax(np.abs(v)))
    z = v[i]
    if abs(z) > 0:
        v = v * (z.conjugate() / abs(z))
    return v


def _canonical_degenerate_basis(block: np.ndarray) -> np.ndarray:
    """Deterministic orthonormal basis of the column span of `block`.

    Gram-Schmidt over the projections of the computational basis vectors,
    taken in index order.
    """
    d, k = block.shape
    proj = block @ block.conj().T
    cols: list[np.ndarray] = []
    for j in range(d):
        w = proj[:, j].copy()
        for c in cols:
            w -= c * (c.conj() @ w)
        nrm = np.linalg.norm(w)
        if nrm > 1e-6:
            cols.append(w / nrm)
        if len(cols) == k:
            break
    if len(cols) < k:
        # fall back to the raw eigenvectors for the remainder
        for j in range(k):
            w = block[:, j].copy()
            for c in cols:
                w -= c * (c.conj() @ w)
            nrm = np.linalg.norm(w)
            if nrm > 1e-8:
                cols.append(w / nrm)
            if len(cols) == k:
                break
    return np.column_stack(cols)


def hermitian_eig(a, tol: float = HERMITIAN_TOL):
    """Eigendecomposition of a Hermitian matrix with deterministic ordering.

    Eigenvalues come out descending.  Inside degenerate clusters (gap below
    1e-9) the eigenvectors are canonicalized against the computational basis
    and every column is phase-fixed so its largest-magnitude entry is real
    positive.  Returns (eigenvalues, eigenvector columns).
    """
    a = _as_matrix(a)
    check_hermitian(a, tol)
    w, v = np.linalg.eigh(a)
    w = w[::-1].copy()
    v = v[:, ::-1].copy()
    n = len(w)
    i = 0
    while i < n:
        j = i + 1
        while j < n and w[i] - w[j] < EIG_DEGENERACY_GAP:
            j += 1
        if j - i > 1:
            v[:, i:j] = _canonical_degenerate_basis(v[:, i:j])
        i = j
    for c in range(n):
        v[:, c] = _phase_fix(v[:, c])
    return w, v


def partial_trace(a, site_dims, traced_sites) -> np.ndarray:
    """Trace out the listed sites of an operator on a tensor-product space."""
    a = _as_matrix(a)
    site_dims = list(site_dims)
    k = len(site_dims)
    if int(np.prod(site_dims)) != a.shape[0]:
        raise ValidationError("product of site_dims does not match matrix dimension")
    traced = sorted(set(int(s) for s in traced_sites))
    if traced and (traced[0] < 0 or traced[-1] >= k):
        raise ValidationError(f"traced site index out of range for {k} sites")
    t = a.reshape(site_dims + site_dims)
    remaining = k
    for s in reversed(traced):
        t = np.trace(t, axis1=s, axis2=s + remaining)
        remaining -= 1
    kept = [d for i, d in enumerate(site_dims) if i not in traced]
    dim = int(np.prod(kept)) if kept else 1
    return t.reshape(dim, dim)


def validate_density(rho, tol: float = HERMITIAN_TOL) -> dict:
    """Check Hermiticity, positivity and unit trace; returns the deviations."""
    rho = _as_matrix(rho)
    herm = float(np.max(np.abs(rho - rho.conj().T)))
    if herm > tol:
        raise ValidationError(f"density operator not Hermitian (deviation {herm:.3e})")
    evals = np.linalg.eigvalsh(rho)
    min_eig = float(evals[0])
    if min_eig < -1e-10:
        raise ValidationError(f"density operator not PSD (min eigenvalue {min_eig:.3e})")
    tr = float(np.trace(rho).real)
    if abs(tr - 1.0) > 1e-10:
        raise ValidationError(f"density operator trace {tr} is not 1")
    return {"hermiticity": herm, "min_eigenvalue": min_eig, "trace": tr}


def validate_projector(p, tol: float = IDEMPOTENT_TOL) -> dict:
    p = _as_matrix(p)
    herm = float(np.max(np.abs(p - p.conj().T)))
    if herm > HERMITIAN_TOL:
        raise ValidationError(f"projector not Hermitian (deviation {herm:.3e})")
    idem = float(np.max(np.abs(p @ p - p)))
    if idem > tol:
        raise ValidationError(f"projector not idempotent (deviation {idem:.3e})")
    tr = float(np.trace(p).real)
    rank = round(tr)
    if abs(tr - rank) > 1e-6 or rank < 0:
        raise ValidationError(f"projector trace {tr} is not a nonnegative integer")
    return {"hermiticity": herm, "idempotency": idem, "rank": rank}


def projector_rank(p) -> int:
    return validate_projector(p)["rank"]


def range_basis(p, tol: float = 0.5) -> np.ndarray:
    """Orthonormal basis of the range of a projector (columns)."""
    w, v = hermitian_eig(p)
    return v[:, w > tol]


def span_basis(columns: np.ndarray, rtol: float = RANK_SVAL_RTOL) -> np.ndarray:
    """Orthonormal basis of the column span, rank cut at rtol * s_max."""
    if columns.size == 0:
        return columns.reshape(columns.shape[0], 0)
    u, s, _ = np.linalg.svd(columns, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return u[:, :0]
    return u[:, s > rtol * s[0]]


def projector_join(ps, dim: int | None = None) -> np.ndarray:
    """Smallest projector dominating every projector in `ps`.

    Computed as the orthonormal span closure of the input range bases.  For
    an empty list the caller must pass `dim` and gets the zero projector.
    """
    ps = list(ps)
    if not ps:
        if dim is None:
            raise ValidationError("projector_join of an empty list needs an explicit dim")
        return np.zeros((dim, dim), dtype=complex)
    d = _as_matrix(ps[0]).shape[0]
    bases = []
    for p in ps:
        p = _as_matrix(p)
        if p.shape[0] != d:
            raise ValidationError("projector_join requires equal dimensions")
        bases.append(range_basis(p))
    q = span_basis(np.hstack(bases))
    return q @ q.conj().T


def projector_leq(p, q, tol: float = 1e-8) -> bool:
    """True iff range(p) is contained in range(q), up to `tol`."""
    p = _as_matrix(p)
    q = _as_matrix(q)
    if p.shape != q.shape:
        raise ValidationError("projector_leq requires equal dimensions")
    gap = (np.eye(p.shape[0]) - q) @ p
    return float(np.linalg.norm(gap, 2)) <= tol


def random_density(dim: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_hermitian(dim: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    h = (g + g.conj().T) / 2
    return h / max(1.0, np.linalg.norm(h, 2))


def random_projector(dim: int, rank: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    q, _ = np.linalg.qr(g)
    return q @ q.conj().T


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary via QR of a Ginibre matrix with phase fix."""
    g = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(g)
    ph = np.diag(r).copy()
    ph /= np.abs(ph)
    return q * ph
