"""Random operators, states and channels for experiments and tests."""
from __future__ import annotations

import numpy as np

from .covariant import WeylChannel, from_p


def ginibre(rng: np.random.Generator, rows: int, cols: int | None = None) -> np.ndarray:
    cols = rows if cols is None else cols
    return rng.normal(size=(rows, cols)) + 1j * rng.normal(size=(rows, cols))


def random_hermitian(rng, d: int) -> np.ndarray:
    A = ginibre(rng, d)
    return (A + A.conj().T) / 2


def random_unit_vector(rng, d: int) -> np.ndarray:
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    return v / np.linalg.norm(v)


def random_pure_state(rng, d: int) -> np.ndarray:
    v = random_unit_vector(rng, d)
    return np.outer(v, v.conj())


def random_mixed_state(rng, d: int, rank: int | None = None) -> np.ndarray:
    """Random density matrix of the given rank (default full rank)."""
    rank = d if rank is None else rank
    A = ginibre(rng, d, rank)
    rho = A @ A.conj().T
    return rho / np.trace(rho).real


def random_psd(rng, d: int, rank: int | None = None) -> np.ndarray:
    rank = d if rank is None else rank
    A = ginibre(rng, d, rank)
    return A @ A.conj().T


def random_pauli_weights(rng, d: int) -> np.ndarray:
    return rng.dirichlet(np.ones(d * d)).reshape(d, d)


def random_weyl_channel(rng, d: int) -> WeylChannel:
    return from_p(d, random_pauli_weights(rng, d))


def random_multiplier(rng, d: int, contractive: bool = True) -> np.ndarray:
    """Random complex phi with phi(0) = 1; |phi| <= 1 when ``contractive``."""
    phi = ginibre(rng, d) / 2
    if contractive:
        mags = np.abs(phi)
        phi = np.where(mags > 1, phi / np.maximum(mags, 1e-300), phi)
    phi[0, 0] = 1
    return phi


def random_kraus(rng, d_in: int, n_ops: int, d_out: int | None = None) -> list[np.ndarray]:
    """Kraus operators of a random CP-TP map, from a random isometry."""
    d_out = d_in if d_out is None else d_out
    Q, _ = np.linalg.qr(ginibre(rng, n_ops * d_out, d_in))
    return [Q[k * d_out:(k + 1) * d_out] for k in range(n_ops)]
