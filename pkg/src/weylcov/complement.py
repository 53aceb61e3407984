"""Complementary channels, from a generic Kraus list and in Weyl block form."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import weyl
from .covariant import NotCPTP, WeylChannel, kraus_operators
from .norms import COMPLETENESS_ATOL, check_kraus


@dataclass(frozen=True, eq=False)
class KrausChannel:
    """rho -> sum_k A_k rho A_k^*, with each A_k of shape (dB, dA)."""

    operators: tuple[np.ndarray, ...] = field(repr=False)

    def __post_init__(self):
        K = check_kraus(self.operators, COMPLETENESS_ATOL)
        object.__setattr__(self, "operators", tuple(K))

    @property
    def dA(self) -> int:
        return self.operators[0].shape[1]

    @property
    def dB(self) -> int:
        return self.operators[0].shape[0]

    def __len__(self):
        return len(self.operators)

    def __call__(self, rho) -> np.ndarray:
        K = np.asarray(self.operators)
        return np.einsum("kij,jl,kml->im", K, np.asarray(rho, dtype=complex), np.conj(K))

    def tp_deviation(self) -> float:
        K = np.asarray(self.operators)
        return float(np.abs(np.einsum("kji,kjl->il", np.conj(K), K) - np.eye(self.dA)).max())

    def __repr__(self):
        return f"KrausChannel(dA={self.dA}, dB={self.dB}, n={len(self)})"


def complementary_from_kraus(c: KrausChannel | Sequence[np.ndarray]) -> KrausChannel:
    """Row t of the alpha-th original operator becomes row alpha of the t-th new one."""
    if not isinstance(c, KrausChannel):
        c = KrausChannel(tuple(c))
    K = np.asarray(c.operators)  # (dC, dB, dA)
    return KrausChannel(tuple(np.transpose(K, (1, 0, 2))))


def _rep(k: int, d: int) -> tuple[int, int]:
    """1-indexed label in {1..d} and its 0-indexed residue."""
    r = k % d
    return (d if r == 0 else r), r


@dataclass(frozen=True, eq=False)
class StructuredComplement:
    """Complement of a Weyl channel as W~ (I (x) rho) W~^*.

    ``lambdas[x, y]`` is the square-root weight of the Kraus operator
    U^x V^y (0-indexed residues).  ``D_blocks[s-1]`` holds the diagonal of
    D_s for s = 1..d, and ``W_tilde`` is the d^2 x d^2 matrix whose t-th
    column block (t = 1..d) is W~_t.
    """

    d: int
    lambdas: np.ndarray = field(repr=False)
    D_blocks: np.ndarray = field(repr=False)
    W_tilde: np.ndarray = field(repr=False)

    def block(self, t: int) -> np.ndarray:
        """W~_t for 1-indexed t, shape (d^2, d)."""
        _, r = _rep(t, self.d)
        col = (self.d if r == 0 else r) - 1
        return self.W_tilde[:, col * self.d:(col + 1) * self.d]

    def kraus(self) -> KrausChannel:
        return KrausChannel(tuple(self.block(t) for t in range(1, self.d + 1)))

    def __call__(self, rho) -> np.ndarray:
        rho = np.asarray(rho, dtype=complex)
        big = np.kron(np.eye(self.d), rho)
        return self.W_tilde @ big @ self.W_tilde.conj().T

    @property
    def environment_dim(self) -> int:
        return self.d * self.d


def structured_complement(c: WeylChannel) -> StructuredComplement:
    """Assemble W~ = blockdiag(D_1..D_d) [U^{1-t} V^{1-s}]_{s,t} from the Kraus weights."""
    if not c.is_cp_tp:
        raise NotCPTP("complementary channel needs a CP-TP Weyl channel")
    d = c.d
    # Kraus operator U^x V^y = W_{J gamma} carries weight p_gamma with gamma = (-y, x)
    x, y = np.meshgrid(np.arange(d), np.arange(d), indexing="ij")
    weights = np.clip(c.p.real[(-y) % d, x], 0.0, None)
    lambdas = np.sqrt(weights)

    D = np.zeros((d, d))
    for s in range(1, d + 1):
        for u in range(1, d + 1):
            # entry u of D_s is lambda_{1-u, 1-s}
            D[s - 1, u - 1] = lambdas[(1 - u) % d, (1 - s) % d]

    basis = weyl.weyl_basis(d)
    W_tilde = np.zeros((d * d, d * d), dtype=complex)
    for s in range(1, d + 1):
        rows = slice((s - 1) * d, s * d)
        for t in range(1, d + 1):
            cols = slice((t - 1) * d, t * d)
            W_tilde[rows, cols] = D[s - 1][:, None] * basis[(1 - t) % d, (1 - s) % d]
    return StructuredComplement(d, lambdas, D, W_tilde)


def sorted_spectrum(X) -> np.ndarray:
    X = np.asarray(X, dtype=complex)
    return np.sort(np.linalg.eigvalsh((X + X.conj().T) / 2))[::-1]


def spectral_distance(A, B) -> float:
    """Max gap between descending spectra, the shorter padded with zeros."""
    a, b = sorted_spectrum(A), sorted_spectrum(B)
    n = max(len(a), len(b))
    a = np.pad(a, (0, n - len(a)))
    b = np.pad(b, (0, n - len(b)))
    return float(np.abs(np.sort(a)[::-1] - np.sort(b)[::-1]).max())


@dataclass
class ComplementCheck:
    spectral_deviation: float
    general_vs_structured: float
    channel_vs_complement: float
    tp_deviation_general: float
    tp_deviation_structured: float
    environment_dim: int


def complement_consistency_check(c: WeylChannel, samples: int = 50, seed: int = 0) -> ComplementCheck:
    """Compare output spectra of Phi, its generic complement and its structured complement."""
    general = complementary_from_kraus(kraus_operators(c))
    structured = structured_complement(c)
    rng = np.random.default_rng(seed)
    gen_vs_str = chan_vs = 0.0
    for _ in range(samples):
        v = rng.normal(size=c.d) + 1j * rng.normal(size=c.d)
        v /= np.linalg.norm(v)
        rho = np.outer(v, v.conj())
        out_c, out_g, out_s = c(rho), general(rho), structured(rho)
        gen_vs_str = max(gen_vs_str, spectral_distance(out_g, out_s))
        chan_vs = max(chan_vs, spectral_distance(out_c, out_g), spectral_distance(out_c, out_s))
    return ComplementCheck(
        spectral_deviation=max(gen_vs_str, chan_vs),
        general_vs_structured=gen_vs_str,
        channel_vs_complement=chan_vs,
        tp_deviation_general=general.tp_deviation(),
        tp_deviation_structured=structured.kraus().tp_deviation(),
        environment_dim=structured.environment_dim,
    )
