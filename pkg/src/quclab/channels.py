"""Kraus-form trace-preserving completely positive maps and tensor powers.

Tensor-power application is site-sequential (one single-site map at a time),
which is algebraically identical to the multi-index operator sum but costs
m * |kraus| matrix products instead of |kraus|^m.
"""

from __future__ import annotations

import numpy as np

from .errors import SizeError, ValidationError
from .operators import DEFAULT_DIM_CAP

COMPLETENESS_TOL = 1e-10
CHOI_EIG_FLOOR = -1e-10


class KrausChannel:
    def __init__(self, kraus, validate: bool = True):
        self.kraus = [np.asarray(a, dtype=complex) for a in kraus]
        if not self.kraus:
            raise ValidationError("channel needs at least one Kraus operator")
        d = self.kraus[0].shape[0]
        for a in self.kraus:
            if a.shape != (d, d):
                raise ValidationError("Kraus operators must be square with equal dims")
        self.d = d
        if validate:
            rep = validate_channel(self)
            if rep["completeness_deviation"] > COMPLETENESS_TOL:
                raise ValidationError(
                    f"Kraus family not trace-preserving "
                    f"(deviation {rep['completeness_deviation']:.3e})")
            if rep["min_choi_eigenvalue"] < CHOI_EIG_FLOOR:
                raise ValidationError(
                    f"Choi matrix not PSD (min eigenvalue {rep['min_choi_eigenvalue']:.3e})")

    def apply_single(self, rho: np.ndarray) -> np.ndarray:
        out = np.zeros_like(rho)
        for a in self.kraus:
            out += a @ rho @ a.conj().T
        return out

    def dual_single(self, obs: np.ndarray) -> np.ndarray:
        out = np.zeros_like(obs)
        for a in self.kraus:
            out += a.conj().T @ obs @ a
        return out


def validate_channel(c: KrausChannel) -> dict:
    """Report-style check: completeness deviation and minimum Choi eigenvalue."""
    d = c.d
    comp = sum(a.conj().T @ a for a in c.kraus)
    dev = float(np.max(np.abs(comp - np.eye(d))))
    choi = np.zeros((d * d, d * d), dtype=complex)
    for a in c.kraus:
        v = a.reshape(-1, order="F")  # column-stacking vec
        choi += np.outer(v, v.conj())
    min_eig = float(np.linalg.eigvalsh(choi)[0])
    return {"completeness_deviation": dev, "min_choi_eigenvalue": min_eig}


def _apply_site(op: np.ndarray, site: int, m: int, d: int,
                single_site_map) -> np.ndarray:
    """Apply a single-site superoperator (given as a map on (d x d) blocks) to
    one site of a d^m-dimensional operator, via tensor reshaping."""
    dl = d ** site
    dr = d ** (m - site - 1)
    t = op.reshape(dl, d, dr, dl, d, dr)
    out = single_site_map(t)
    return out.reshape(d ** m, d ** m)


def apply_tensor_power(c: KrausChannel, rho, m: int,
                       dim_cap: int = DEFAULT_DIM_CAP) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    d = c.d
    if rho.shape[0] != d ** m:
        raise ValidationError(f"operator dimension {rho.shape[0]} != {d}^{m}")
    if d ** m > dim_cap:
        raise SizeError("dimension cap exceeded")
    out = rho
    for site in range(m):
        def site_map(t):
            acc = np.zeros_like(t)
            for a in c.kraus:
                # a on the row index, a^dagger on the column index
                s = np.einsum("ab,LbRmcS->LaRmcS", a, t, optimize=True)
                acc += np.einsum("LaRmcS,dc->LaRmdS", s, a.conj(), optimize=True)
            return acc
        out = _apply_site(out, site, m, d, site_map)
    return out


def heisenberg_dual(c: KrausChannel, obs, m: int,
                    dim_cap: int = DEFAULT_DIM_CAP) -> np.ndarray:
    """Observable dual: tr(E^{x m}(rho) a) = tr(rho dual(a)) for all rho."""
    obs = np.asarray(obs, dtype=complex)
    d = c.d
    if obs.shape[0] != d ** m:
        raise ValidationError(f"operator dimension {obs.shape[0]} != {d}^{m}")
    if d ** m > dim_cap:
        raise SizeError("dimension cap exceeded")
    out = obs
    for site in range(m):
        def site_map(t):
            acc = np.zeros_like(t)
            for a in c.kraus:
                s = np.einsum("ab,LbRmcS->LaRmcS", a.conj().T, t, optimize=True)
                acc += np.einsum("LaRmcS,dc->LaRmdS", s, a.T, optimize=True)
            return acc
        out = _apply_site(out, site, m, d, site_map)
    return out


_PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
_PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def identity_channel(d: int = 2) -> KrausChannel:
    return KrausChannel([np.eye(d)])


def depolarizing(p: float) -> KrausChannel:
    if not 0 <= p <= 1:
        raise ValidationError("depolarizing strength must be in [0, 1]")
    return KrausChannel([
        np.sqrt(1 - 3 * p / 4) * np.eye(2),
        np.sqrt(p / 4) * _PAULI_X,
        np.sqrt(p / 4) * _PAULI_Y,
        np.sqrt(p / 4) * _PAULI_Z,
    ])


def dephasing(p: float) -> KrausChannel:
    """p = 1 kills all off-diagonal terms in the computational basis."""
    if not 0 <= p <= 1:
        raise ValidationError("dephasing strength must be in [0, 1]")
    return KrausChannel([np.sqrt(1 - p / 2) * np.eye(2), np.sqrt(p / 2) * _PAULI_Z])


def amplitude_damping(gamma: float) -> KrausChannel:
    if not 0 <= gamma <= 1:
        raise ValidationError("damping strength must be in [0, 1]")
    k0 = np.array([[1, 0], [0, np.sqrt(1 - gamma)]], dtype=complex)
    k1 = np.array([[0, np.sqrt(gamma)], [0, 0]], dtype=complex)
    return KrausChannel([k0, k1])


def channel_from_spec(spec: dict) -> KrausChannel:
    """Presets by name plus a custom matrix-list escape hatch."""
    name = spec.get("name")
    if name == "identity":
        return identity_channel(int(spec.get("d", 2)))
    if name == "depolarizing":
        return depolarizing(float(spec["p"]))
    if name == "dephasing":
        return dephasing(float(spec["p"]))
    if name == "amplitude-damping":
        return amplitude_damping(float(spec["gamma"]))
    if name == "custom":
        mats = [np.array(m_re) + 1j * np.array(m_im)
                for m_re, m_im in spec["kraus"]]
        return KrausChannel(mats)
    raise ValidationError(f"unknown channel preset {name!r}")
