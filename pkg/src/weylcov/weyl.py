"""Discrete Weyl operators and the noncommutative Fourier transform.

``W_z = U^x V^y`` with ``U|e_k> = |e_{k+1 mod d}>`` and
``V|e_k> = exp(2 pi i k / d)|e_k>``.  Fourier coefficients are stored as a
``(d, d)`` complex array indexed ``f[x, y]``, so ``f.ravel()`` is in canonical
order.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np

from .zgroup import GroupElement

PSD_TOL = 1e-9
HERMITIAN_TOL = 1e-10


def omega_power(k, d: int):
    """exp(2 pi i k / d), with ``k`` reduced mod ``d`` first."""
    return np.exp(2j * np.pi * (np.asarray(k) % d) / d)


def shift_operator(d: int) -> np.ndarray:
    return np.roll(np.eye(d, dtype=complex), 1, axis=0)


def phase_operator(d: int) -> np.ndarray:
    return np.diag(omega_power(np.arange(d), d))


@lru_cache(maxsize=None)
def weyl_basis(d: int) -> np.ndarray:
    """Array of shape ``(d, d, d, d)`` with ``basis[x, y] = U^x V^y``; read-only."""
    k = np.arange(d)
    basis = np.zeros((d, d, d, d), dtype=complex)
    for x in range(d):
        for y in range(d):
            # column k of U^x V^y is w^{ky} e_{k+x}
            basis[x, y, (k + x) % d, k] = omega_power(k * y, d)
    basis.setflags(write=False)
    return basis


def weyl_operator(z: GroupElement) -> np.ndarray:
    return weyl_basis(z.d)[z.x, z.y].copy()


def verify_weyl_relations(d: int) -> dict[str, float]:
    """Max deviation over all pairs of each commutation/orthogonality relation.

    Keys: ``product`` (W_z W_z' = w^{y x'} W_{z+z'}), ``commutation``,
    ``adjoint`` (W_z^* = w^{xy} W_{-z}) and ``orthogonality``
    (tr W_z W_z'^* = d delta).
    """
    B = weyl_basis(d).reshape(d * d, d, d)
    xs, ys = np.divmod(np.arange(d * d), d)
    Bstar = np.conj(np.transpose(B, (0, 2, 1)))

    prod = np.matmul(B[:, None], B[None, :])
    sum_index = ((xs[:, None] + xs[None, :]) % d) * d + (ys[:, None] + ys[None, :]) % d
    phase_prod = omega_power(ys[:, None] * xs[None, :], d)
    dev_prod = np.abs(prod - phase_prod[..., None, None] * B[sum_index]).max()

    phase_comm = omega_power(xs[None, :] * ys[:, None] - ys[None, :] * xs[:, None], d)
    dev_comm = np.abs(prod - phase_comm[..., None, None] * np.transpose(prod, (1, 0, 2, 3))).max()

    neg_index = ((-xs) % d) * d + (-ys) % d
    dev_adj = np.abs(Bstar - omega_power(xs * ys, d)[:, None, None] * B[neg_index]).max()

    gram = np.einsum("aij,bij->ab", B, np.conj(B))
    dev_orth = np.abs(gram - d * np.eye(d * d)).max()

    return {
        "product": float(dev_prod),
        "commutation": float(dev_comm),
        "adjoint": float(dev_adj),
        "orthogonality": float(dev_orth),
    }


def _dim(X) -> int:
    X = np.asarray(X)
    if X.ndim != 2 or X.shape[0] != X.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {X.shape}")
    return X.shape[0]


def fourier_transform(X) -> np.ndarray:
    """f_X(z) = tr(X W_z^*) / d as a ``(d, d)`` array."""
    X = np.asarray(X, dtype=complex)
    d = _dim(X)
    # tr(X W^*) = sum_ij X_ij conj(W_ij)
    return np.einsum("ij,xyij->xy", X, np.conj(weyl_basis(d))) / d


def inverse_fourier(f) -> np.ndarray:
    """X = sum_z f(z) W_z."""
    f = np.asarray(f, dtype=complex)
    if f.ndim != 2 or f.shape[0] != f.shape[1]:
        raise ValueError(f"coefficients must be a complete (d, d) array, got shape {f.shape}")
    if not np.all(np.isfinite(f)):
        raise ValueError("coefficient map has missing (non-finite) entries")
    return np.einsum("xy,xyij->ij", f, weyl_basis(f.shape[0]))


def negate_index(f: np.ndarray) -> np.ndarray:
    """The map z -> f(-z)."""
    d = f.shape[0]
    idx = (-np.arange(d)) % d
    return f[np.ix_(idx, idx)]


def _xy_grid(d: int):
    return np.meshgrid(np.arange(d), np.arange(d), indexing="ij")


def adjoint_relation_deviation(f_X: np.ndarray, f_Xstar: np.ndarray) -> float:
    d = f_X.shape[0]
    x, y = _xy_grid(d)
    rhs = np.conj(omega_power(x * y, d)) * negate_index(f_Xstar)
    return float(np.abs(np.conj(f_X) - rhs).max())


def verify_adjoint_relation(X) -> float:
    """max_z |conj f_X(z) - exp(-i<y,x>) f_{X*}(-z)|."""
    X = np.asarray(X, dtype=complex)
    return adjoint_relation_deviation(fourier_transform(X), fourier_transform(X.conj().T))


def is_state_coefficients(f, atol: float = 1e-10) -> bool:
    d = np.asarray(f).shape[0]
    return abs(f[0, 0] - 1 / d) <= atol


def is_pure_by_fourier(f, tol: float = 1e-9) -> bool:
    """Purity test: sum over z != 0 of |f(z)|^2 equals (d-1)/d^2."""
    f = np.asarray(f, dtype=complex)
    d = f.shape[0]
    if not is_state_coefficients(f):
        raise ValueError(f"not a state: f(0) = {f[0, 0]}, expected {1 / d}")
    off = np.sum(np.abs(f) ** 2) - abs(f[0, 0]) ** 2
    return abs(off - (d - 1) / d**2) <= tol


def positivity_matrix(f) -> np.ndarray:
    """The d^2 x d^2 matrix whose positive semidefiniteness is equivalent to X >= 0.

    Entry ``[z, z']`` is ``conj(f(z'-z)) * exp(i<y, x - x'>)``, which equals
    ``tr(X W_z^* W_z') / d``.  Rows and columns are in canonical order.
    """
    f = np.asarray(f, dtype=complex)
    d = f.shape[0]
    xs, ys = np.divmod(np.arange(d * d), d)
    dx = (xs[None, :] - xs[:, None]) % d
    dy = (ys[None, :] - ys[:, None]) % d
    phase = omega_power(ys[:, None] * (xs[:, None] - xs[None, :]), d)
    return np.conj(f[dx, dy]) * phase


def positivity_criterion(f, tol: float = PSD_TOL) -> bool:
    """Decide positivity of the Hermitian operator with coefficients ``f``."""
    f = np.asarray(f, dtype=complex)
    dev = adjoint_relation_deviation(f, f)
    if dev > HERMITIAN_TOL:
        raise ValueError(f"coefficients are not those of a Hermitian operator (deviation {dev:.3g})")
    M = positivity_matrix(f)
    M = (M + M.conj().T) / 2
    return bool(np.linalg.eigvalsh(M).min() >= -tol)


def is_psd(X, tol: float = PSD_TOL) -> bool:
    X = np.asarray(X, dtype=complex)
    return bool(np.linalg.eigvalsh((X + X.conj().T) / 2).min() >= -tol)


# -- bipartite utilities; first factor is the slow Kronecker index ----------


def _split_dims(r: np.ndarray, dH: int) -> int:
    n = _dim(r)
    if n % dH:
        raise ValueError(f"matrix dimension {n} is not divisible by dH={dH}")
    return n // dH


def partial_trace_first(r, dH: int) -> np.ndarray:
    """Trace out the first (H) factor of an operator on H (x) K."""
    r = np.asarray(r, dtype=complex)
    dK = _split_dims(r, dH)
    return np.einsum("ikil->kl", r.reshape(dH, dK, dH, dK))


def extract_Az(r, z: GroupElement) -> np.ndarray:
    """A_z = tr_H[r (W_z^* (x) I)] / d, so that r = sum_z W_z (x) A_z."""
    return extract_all_Az(r, z.d)[z.x, z.y]


def extract_all_Az(r, d: int) -> np.ndarray:
    """Every A_z at once, shape ``(d, d, dK, dK)`` indexed ``[x, y]``."""
    r = np.asarray(r, dtype=complex)
    dK = _split_dims(r, d)
    blocks = r.reshape(d, dK, d, dK)
    # tr_H[r (W^* (x) I)]_{kl} = sum_ij r_{ik,jl} conj(W)_{ij}
    return np.einsum("ikjl,xyij->xykl", blocks, np.conj(weyl_basis(d))) / d


def assemble_from_Az(A: np.ndarray) -> np.ndarray:
    """Inverse of :func:`extract_all_Az`: sum_z W_z (x) A_z."""
    d, dK = A.shape[0], A.shape[2]
    out = np.einsum("xyij,xykl->ikjl", weyl_basis(d), A)
    return out.reshape(d * dK, d * dK)


def hs_norm(X) -> float:
    return float(np.linalg.norm(np.asarray(X)))


__all__ = [
    "weyl_basis",
    "weyl_operator",
    "verify_weyl_relations",
    "fourier_transform",
    "inverse_fourier",
    "verify_adjoint_relation",
    "is_pure_by_fourier",
    "positivity_matrix",
    "positivity_criterion",
    "partial_trace_first",
    "extract_Az",
    "extract_all_Az",
    "assemble_from_Az",
]
