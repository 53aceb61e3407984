"""Weyl-covariant maps Phi(W_z) = phi(z) W_z and their Kraus weights p.

The multiplier ``phi`` and the weights ``p`` are Fourier duals::

    p[g]   = (1/d^2) sum_z phi(z) exp(i<g, z>)
    phi[z] = sum_g p[g] exp(-i<g, z>)

and for a channel ``Phi(X) = sum_g p[g] W_{Jg} X W_{Jg}^*``.  Both arrays
are ``(d, d)`` indexed ``[x, y]``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import weyl
from .zgroup import (
    GroupElement,
    Subgroup,
    all_elements,
    apply_J,
    cyclic_subgroup,
    image_under_J,
    is_degenerate,
    orthogonal_subgroup,
)

CP_TOL = 1e-12
PAIR_TOL = 1e-12
KRAUS_DROP = 1e-14

CHANNEL_AND_SHADED = "channel_and_shaded"
CHANNEL_UNSHADED = "channel_unshaded"
NOT_CHANNEL = "not_channel"


class NotCPTP(ValueError):
    """An operation needing a CP-TP channel received a general map."""


@lru_cache(maxsize=None)
def character_matrix(d: int) -> np.ndarray:
    """C[g, z] = exp(i<g, z>) over canonical indices, built from integer forms."""
    xs, ys = np.divmod(np.arange(d * d), d)
    k = (xs[:, None] * xs[None, :] + ys[:, None] * ys[None, :]) % d
    C = np.exp(2j * np.pi * k / d)
    C.setflags(write=False)
    return C


def phi_to_p(phi: np.ndarray) -> np.ndarray:
    return np.fft.ifft2(phi)


def p_to_phi(p: np.ndarray) -> np.ndarray:
    return np.fft.fft2(p)


def _as_grid(values, d: int, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=complex)
    if arr.shape == (d * d,):
        arr = arr.reshape(d, d)
    if arr.shape != (d, d):
        raise ValueError(f"{name} needs all {d * d} values, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


@dataclass(frozen=True, eq=False)
class WeylChannel:
    """A map in W_1: Weyl-covariant with phi(0) = 1.

    Build with :func:`from_phi` or :func:`from_p`; both parameterizations
    are stored and cross-checked.
    """

    d: int
    phi: np.ndarray = field(repr=False)
    p: np.ndarray = field(repr=False)

    def __post_init__(self):
        for arr in (self.phi, self.p):
            arr.setflags(write=False)
        if abs(self.phi[0, 0] - 1) > PAIR_TOL:
            raise ValueError(f"phi(0) must be 1, got {self.phi[0, 0]}")
        C = character_matrix(self.d)
        dev_p = np.abs(C @ self.phi.ravel() / self.d**2 - self.p.ravel()).max()
        dev_phi = np.abs(np.conj(C) @ self.p.ravel() - self.phi.ravel()).max()
        if max(dev_p, dev_phi) > PAIR_TOL:
            raise ValueError(f"phi and p are not a Fourier pair (deviation {max(dev_p, dev_phi):.3g})")

    @property
    def is_cp_tp(self) -> bool:
        return bool(np.all(np.abs(self.p.imag) <= CP_TOL) and np.all(self.p.real >= -CP_TOL))

    @property
    def is_contractive(self) -> bool:
        return bool(np.all(np.abs(self.phi) <= 1 + CP_TOL))

    def __call__(self, X) -> np.ndarray:
        return apply(self, X)

    def __repr__(self):
        return f"WeylChannel(d={self.d}, cp_tp={self.is_cp_tp}, contractive={self.is_contractive})"


def from_phi(d: int, phi) -> WeylChannel:
    phi = _as_grid(phi, d, "phi")
    if abs(phi[0, 0] - 1) > PAIR_TOL:
        raise ValueError(f"phi(0) must be 1 (normalization), got {phi[0, 0]}")
    return WeylChannel(d, phi.copy(), phi_to_p(phi))


def from_p(d: int, p) -> WeylChannel:
    p = _as_grid(p, d, "p")
    total = p.sum()
    if abs(total - 1) > PAIR_TOL:
        raise ValueError(f"p must sum to 1, got {total}")
    phi = p_to_phi(p)
    # phi(0) = sum p exactly up to rounding; pin it
    phi[0, 0] = 1.0
    return WeylChannel(d, phi, p.copy())


def identity_channel(d: int) -> WeylChannel:
    return from_phi(d, np.ones((d, d)))


def kraus_terms(c: WeylChannel, drop_zero: bool = True):
    """``[(gamma, weight, W_{J gamma})]`` in canonical gamma order."""
    if not c.is_cp_tp:
        raise NotCPTP("Kraus form requires a CP-TP channel (p must be a probability distribution)")
    basis = weyl.weyl_basis(c.d)
    out = []
    for g in all_elements(c.d):
        w = max(float(c.p[g.x, g.y].real), 0.0)
        if drop_zero and w <= KRAUS_DROP:
            continue
        jg = apply_J(g)
        out.append((g, w, basis[jg.x, jg.y]))
    return out


def kraus_operators(c: WeylChannel) -> list[np.ndarray]:
    """Weighted Kraus operators sqrt(p_g) W_{Jg}; weights below 1e-14 are dropped."""
    return [np.sqrt(w) * W for _, w, W in kraus_terms(c)]


def apply(c: WeylChannel, X) -> np.ndarray:
    """Evaluate the map through its action on Fourier coefficients."""
    X = np.asarray(X, dtype=complex)
    if X.shape != (c.d, c.d):
        raise ValueError(f"operator shape {X.shape} does not match d={c.d}")
    return weyl.inverse_fourier(c.phi * weyl.fourier_transform(X))


def apply_kraus(kraus, X) -> np.ndarray:
    K = np.asarray(kraus, dtype=complex)
    return np.einsum("kij,jl,kml->im", K, X, np.conj(K))


def compose(c1: WeylChannel, c2: WeylChannel) -> WeylChannel:
    if c1.d != c2.d:
        raise ValueError(f"cannot compose maps on d={c1.d} and d={c2.d}")
    return from_phi(c1.d, c1.phi * c2.phi)


def circular_convolution(p1: np.ndarray, p2: np.ndarray) -> np.ndarray:
    """(p1 * p2)(g) = sum_h p1(h) p2(g - h) over Z_d + Z_d, by direct summation."""
    d = p1.shape[0]
    out = np.zeros_like(p1, dtype=complex)
    for hx in range(d):
        for hy in range(d):
            out += p1[hx, hy] * np.roll(np.roll(p2, hx, axis=0), hy, axis=1)
    return out


def verify_covariance(c: WeylChannel, samples: int = 20, seed: int = 0) -> float:
    """max ||Phi(W X W^*) - W Phi(X) W^*||_2 over all z and random X."""
    rng = np.random.default_rng(seed)
    basis = weyl.weyl_basis(c.d).reshape(c.d * c.d, c.d, c.d)
    worst = 0.0
    for _ in range(samples):
        X = rng.normal(size=(c.d, c.d)) + 1j * rng.normal(size=(c.d, c.d))
        PX = apply(c, X)
        for W in basis:
            lhs = apply(c, W @ X @ W.conj().T)
            worst = max(worst, float(np.linalg.norm(lhs - W @ PX @ W.conj().T)))
    return worst


def depolarizing(d: int, lam: complex) -> WeylChannel:
    phi = np.full((d, d), lam, dtype=complex)
    phi[0, 0] = 1
    return from_phi(d, phi)


@dataclass(frozen=True)
class ABFamilySpec:
    """phi = 1 at 0, a + b on g minus 0, b off g; ``g`` has order d."""

    d: int
    g: Subgroup
    a: complex
    b: complex

    def __post_init__(self):
        if self.g.d != self.d:
            raise ValueError(f"subgroup modulus {self.g.d} differs from d={self.d}")
        if self.g.order != self.d:
            raise ValueError(f"subgroup order must be d={self.d}, got {self.g.order}")


def indicator(g: Subgroup) -> np.ndarray:
    out = np.zeros((g.d, g.d), dtype=complex)
    for z in g:
        out[z.x, z.y] = 1
    return out


def ab_phi(spec: ABFamilySpec) -> np.ndarray:
    phi = np.full((spec.d, spec.d), spec.b, dtype=complex)
    phi += spec.a * indicator(spec.g)
    phi[0, 0] = 1
    return phi


def ab_p_formula(spec: ABFamilySpec) -> np.ndarray:
    """Closed-form weights: three cases split by the annihilator of g."""
    d, a, b = spec.d, spec.a, spec.b
    perp = indicator(orthogonal_subgroup(spec.g)).real.astype(bool)
    p = np.where(perp, 1 + a * (d - 1) - b, 1 - a - b).astype(complex)
    p[0, 0] = 1 + a * (d - 1) + b * (d * d - 1)
    return p / d**2


def ab_family(spec: ABFamilySpec) -> WeylChannel:
    c = from_phi(spec.d, ab_phi(spec))
    dev = np.abs(c.p - ab_p_formula(spec)).max()
    if dev > PAIR_TOL:
        raise ArithmeticError(f"closed-form weights disagree with the transform by {dev:.3g}")
    return c


def ab_case_values(d: int, a: float, b: float) -> tuple[float, float, float]:
    """d^2 p at 0, on the annihilator minus 0, and off it."""
    return (1 + a * (d - 1) + b * (d * d - 1), 1 + a * (d - 1) - b, 1 - a - b)


def ab_triangle_corners(d: int) -> dict[str, tuple[float, float]]:
    return {"A": (0.0, 1.0), "B": (d / (d - 1), -1 / (d - 1)), "E": (-1 / (d - 1), 0.0)}


def ab_triangle_classify(d: int, a: float, b: float) -> str:
    if min(ab_case_values(d, a, b)) < -CP_TOL:
        return NOT_CHANNEL
    return CHANNEL_AND_SHADED if a * (a + 2 * b) >= 0 else CHANNEL_UNSHADED


def cyclic_generator_subgroup(z0: GroupElement) -> Subgroup:
    g = cyclic_subgroup(z0)
    if g.order != z0.d:
        raise ValueError(f"cyclic subgroup of {z0} has order {g.order} < d={z0.d}")
    return g


def dephasing_channel(d: int, basis_generator: GroupElement) -> WeylChannel:
    """Uniform Weyl average over the cyclic subgroup generated by ``basis_generator``."""
    if basis_generator.d != d:
        raise ValueError(f"generator modulus {basis_generator.d} differs from d={d}")
    return from_phi(d, indicator(cyclic_generator_subgroup(basis_generator)))


def dephasing_eigenbasis(z0: GroupElement) -> np.ndarray:
    """Orthonormal eigenbasis of W_{z0} (columns), sorted by eigenvalue phase."""
    cyclic_generator_subgroup(z0)
    vals, vecs = np.linalg.eig(weyl.weyl_operator(z0))
    order = np.argsort(np.mod(np.angle(vals), 2 * np.pi))
    vecs = vecs[:, order]
    return vecs / np.linalg.norm(vecs, axis=0)


def subgroup_average(g, rho) -> np.ndarray:
    """(1/|g|) sum_{z in g} W_z rho W_z^*, summed directly."""
    basis = weyl.weyl_basis(g.d)
    out = np.zeros((g.d, g.d), dtype=complex)
    for z in g:
        W = basis[z.x, z.y]
        out += W @ rho @ W.conj().T
    return out / len(g)


def annihilator_average(g: Subgroup, rho) -> np.ndarray:
    """(1/d) sum over z in the annihilator of g of W_{Jz} rho W_{Jz}^*."""
    perp = orthogonal_subgroup(g)
    basis = weyl.weyl_basis(g.d)
    out = np.zeros((g.d, g.d), dtype=complex)
    for z in perp:
        jz = apply_J(z)
        W = basis[jz.x, jz.y]
        out += W @ rho @ W.conj().T
    return out / g.d


def is_maximal_degenerate(g: Subgroup) -> bool:
    return g.order == g.d and is_degenerate(g.generators())


def ccom_decomposition_check(spec: ABFamilySpec, samples: int = 20, seed: int = 0) -> float:
    """Max HS deviation between the (a, b) map and a*Psi + b*id + (1-a-b)*tr(.) I/d.

    Psi is the uniform average over ``g`` itself, which equals the
    annihilator form because the annihilator of a maximal degenerate g is Jg.
    """
    g = spec.g
    if not is_maximal_degenerate(g):
        raise ValueError(f"{g} is not maximal degenerate")
    if orthogonal_subgroup(g) != image_under_J(g):
        raise ArithmeticError("annihilator differs from Jg for a maximal degenerate subgroup")
    c = ab_family(spec)
    d, a, b = spec.d, spec.a, spec.b
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        A = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        rho = A @ A.conj().T
        rho /= np.trace(rho).real
        expected = a * subgroup_average(g, rho) + b * rho + (1 - a - b) * np.trace(rho) * np.eye(d) / d
        worst = max(worst, float(np.linalg.norm(apply(c, rho) - expected)))
    return worst

