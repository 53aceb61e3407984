"""Output norms of Weyl-covariant maps: bounds, optimizers and equality witnesses."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import weyl
from .covariant import WeylChannel, apply, kraus_operators
from .zgroup import (
    ENUMERATION_LIMIT,
    GroupElement,
    Subgroup,
    all_elements,
    is_degenerate,
    maximal_degenerate_subgroups,
)

TIE_TOLERANCE = 1e-9
EQUALITY_ATOL = 1e-7
EIGEN_ATOL = 1e-9
STATE_MATCH_ATOL = 1e-9
SUPPORT_ATOL = 1e-10
COMPLETENESS_ATOL = 1e-10
TENSOR_DIM_CAP = 36


def schatten_norm(X, p: float = 2) -> float:
    """(sum of singular values ** p) ** (1/p); ``p`` may be ``inf``."""
    if not p >= 1:
        raise ValueError(f"Schatten norm needs p >= 1, got {p}")
    s = np.linalg.svd(np.asarray(X, dtype=complex), compute_uv=False)
    if np.isinf(p):
        return float(s.max())
    return float(np.sum(s**p) ** (1 / p))


# -- pure-state optimization -----------------------------------------------

Objective = Callable[[np.ndarray], tuple[float, np.ndarray]]


def _ascend(objective: Objective, psi: np.ndarray, max_iter: int, rtol: float):
    """Projected gradient ascent on the unit sphere with step halving.

    ``objective`` returns the value and the (Wirtinger) gradient with
    respect to conj(psi).
    """
    f, g = objective(psi)
    step = 1.0
    for _ in range(max_iter):
        tangent = g - np.vdot(psi, g) * psi
        if np.linalg.norm(tangent) < 1e-15:
            break
        while True:
            cand = psi + step * tangent
            cand /= np.linalg.norm(cand)
            fc, gc = objective(cand)
            if fc > f or step < 1e-14:
                break
            step *= 0.5
        if fc <= f:
            break
        rel = (fc - f) / max(abs(f), 1e-300)
        psi, f, g = cand, fc, gc
        step *= 2.0
        if rel < rtol:
            break
    return f, psi


def optimize_pure_states(
    objective: Objective,
    dim: int,
    restarts: int = 64,
    seed: int = 0,
    initial: Sequence[np.ndarray] = (),
    max_iter: int = 2000,
    rtol: float = 1e-12,
) -> tuple[float, np.ndarray]:
    """Best objective value over seeded starts plus ``restarts`` random starts.

    Random starts are drawn in sequence from ``default_rng(seed)``, so raising
    ``restarts`` only appends starts and never lowers the result.  Ties keep
    the earliest start.
    """
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    rng = np.random.default_rng(seed)
    starts = [np.asarray(v, dtype=complex) / np.linalg.norm(v) for v in initial]
    for _ in range(restarts):
        v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
        starts.append(v / np.linalg.norm(v))
    best_f, best_psi = -np.inf, None
    for v in starts:
        f, psi = _ascend(objective, v, max_iter, rtol)
        if f > best_f:
            best_f, best_psi = f, psi
    return best_f, best_psi


def _stack_kraus(kraus) -> np.ndarray:
    K = np.asarray([np.asarray(k, dtype=complex) for k in kraus])
    if K.ndim != 3 or len(K) == 0:
        raise ValueError("expected a non-empty list of equally shaped matrices")
    return K


def check_kraus(kraus, atol: float = COMPLETENESS_ATOL) -> np.ndarray:
    K = _stack_kraus(kraus)
    dev = np.abs(np.einsum("kji,kjl->il", np.conj(K), K) - np.eye(K.shape[2])).max()
    if dev > atol:
        raise ValueError(f"Kraus list is not trace preserving (deviation {dev:.3g})")
    return K


def kraus_objective(K: np.ndarray, p: float = 2) -> Objective:
    """psi -> (tr Phi(psi psi^*)^p, gradient)."""

    def objective(psi):
        v = K @ psi
        sigma = v.T @ v.conj()
        if p == 2:
            power = sigma
            value = float(np.sum(np.abs(sigma) ** 2))
        else:
            w, U = np.linalg.eigh(sigma)
            w = np.clip(w, 0.0, None)
            value = float(np.sum(w**p))
            power = (U * w ** (p - 1)) @ U.conj().T
        grad = p * np.einsum("kji,jl,kl->i", np.conj(K), power, v)
        return value, grad

    return objective


def max_output_norm(
    channel_as_kraus,
    p: float = 2,
    restarts: int = 64,
    seed: int = 0,
    initial: Sequence[np.ndarray] = (),
) -> tuple[float, np.ndarray]:
    """Estimate sup over states of ||Phi(rho)||_p; returns (value, optimizer vector).

    The supremum of a convex function over states sits on pure states, so the
    search runs over unit vectors only.
    """
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    K = check_kraus(channel_as_kraus)
    f, psi = optimize_pure_states(kraus_objective(K, p), K.shape[2], restarts, seed, initial)
    return float(f ** (1 / p)), psi


def multiplier_objective(c: WeylChannel) -> Objective:
    """psi -> ||Phi(psi psi^*)||_2^2 = (1/d) sum_z |phi(z)|^2 |<psi|W_z|psi>|^2.

    Valid for every map in W_1, CP or not.
    """
    d = c.d
    W = weyl.weyl_basis(d).reshape(d * d, d, d)
    w = np.abs(c.phi.ravel()) ** 2 / d

    def objective(psi):
        Wpsi = W @ psi
        Wstar_psi = np.einsum("kji,j->ki", np.conj(W), psi)
        a = Wpsi @ psi.conj()
        value = float(np.sum(w * np.abs(a) ** 2))
        grad = np.einsum("k,ki->i", w * np.conj(a), Wpsi) + np.einsum("k,ki->i", w * a, Wstar_psi)
        return value, grad

    return objective


def max_output_2norm(c: WeylChannel, restarts: int = 64, seed: int = 0, initial=()):
    """nu_2 of a Weyl-covariant map; Kraus path for channels, multiplier path otherwise."""
    if c.is_cp_tp:
        return max_output_norm(kraus_operators(c), 2, restarts, seed, initial)
    f, psi = optimize_pure_states(multiplier_objective(c), c.d, restarts, seed, initial)
    return float(np.sqrt(f)), psi


# -- bounds ----------------------------------------------------------------


def max_offzero_sq(c: WeylChannel) -> float:
    """max over z != 0 of |phi(z)|^2."""
    mags = np.abs(c.phi.ravel()[1:]) ** 2
    return float(mags.max())


@dataclass
class Theorem1Result:
    lhs: float
    rhs: float
    holds: bool
    lhs_direct: float


def theorem1_check(c: WeylChannel, rho_hat, atol: float = 1e-10) -> Theorem1Result:
    """Evaluate both sides of the bipartite 2-norm estimate for (Phi (x) Id)(rho_hat)."""
    d = c.d
    A = weyl.extract_all_Az(rho_hat, d)
    norms_sq = np.einsum("xykl,xykl->xy", np.conj(A), A).real
    lhs = float(d * np.sum(np.abs(c.phi) ** 2 * norms_sq))
    lhs_direct = float(np.linalg.norm(weyl.assemble_from_Az(c.phi[:, :, None, None] * A)) ** 2)
    M = max_offzero_sq(c)
    tr_h = weyl.partial_trace_first(rho_hat, d)
    rhs = float((1 - M) / d * np.linalg.norm(tr_h) ** 2 + M * np.linalg.norm(rho_hat) ** 2)
    return Theorem1Result(lhs, rhs, lhs <= rhs + atol, lhs_direct)


def kmnr_bound(c: WeylChannel) -> float:
    """sqrt((1 + (d-1) max_{z!=0} |phi(z)|^2) / d)."""
    return float(np.sqrt((1 + (c.d - 1) * max_offzero_sq(c)) / c.d))


@dataclass
class EMaxReport:
    d: int
    max_abs_phi: float
    members: list[GroupElement]
    tie_tolerance: float

    def __contains__(self, z):
        return z in self.members


def compute_emax(c: WeylChannel, tie_tolerance: float = TIE_TOLERANCE) -> EMaxReport:
    mags = np.abs(c.phi)
    nonzero = all_elements(c.d)[1:]
    top = max(float(mags[z.x, z.y]) for z in nonzero)
    members = [z for z in nonzero if mags[z.x, z.y] >= top * (1 - tie_tolerance)]
    return EMaxReport(c.d, top, members, tie_tolerance)


def stabilizer_subgroup(psi, d: int | None = None, atol: float = EIGEN_ATOL) -> Subgroup:
    """All z such that psi is an eigenvector of W_z."""
    psi = np.asarray(psi, dtype=complex)
    d = len(psi) if d is None else d
    if len(psi) != d:
        raise ValueError(f"vector length {len(psi)} does not match d={d}")
    if abs(np.linalg.norm(psi) - 1) > 1e-12:
        raise ValueError("stabilizer needs a unit vector")
    basis = weyl.weyl_basis(d)
    members = []
    for z in all_elements(d):
        v = basis[z.x, z.y] @ psi
        if np.linalg.norm(v - np.vdot(psi, v) * psi) <= atol:
            members.append(z)
    try:
        g = Subgroup(d, tuple(members))
    except ValueError as err:
        raise ArithmeticError(f"stabilizer set is not a subgroup: {err}") from err
    if g.order > d:
        raise ArithmeticError(f"stabilizer of order {g.order} exceeds d={d}")
    return g


def common_eigenvector(g: Subgroup) -> np.ndarray:
    """A unit vector that is an eigenvector of every W_z, z in ``g``."""
    if not is_degenerate(g.generators()):
        raise ValueError(f"{g} is not degenerate; its Weyl operators do not commute")
    d = g.d
    Q = np.eye(d, dtype=complex)
    for z in g.generators():
        M = Q.conj().T @ weyl.weyl_operator(z) @ Q
        vals = np.linalg.eigvals(M)
        target = vals[np.argmin(np.mod(np.angle(vals) + 1e-9, 2 * np.pi))]
        # eigenspace for ``target`` = null space of M - target
        _, s, vh = np.linalg.svd(M - target * np.eye(len(M)))
        null = vh[s <= 1e-8].conj().T
        Q = Q @ null
    psi = Q[:, 0]
    return psi / np.linalg.norm(psi)


@dataclass
class BoundReport:
    nu2_bound: float
    nu2_numeric: Optional[float]
    equality_attained: Optional[bool]
    necessary_holds: bool
    sufficient_witness: Optional[tuple[Subgroup, np.ndarray]]
    optimizer_state: Optional[np.ndarray]
    emax: EMaxReport = field(repr=False)
    notice: str = ""


def find_witness(c: WeylChannel, emax: EMaxReport | None = None, limit: int = ENUMERATION_LIMIT):
    """First maximal degenerate G with G minus 0 inside E_max, with its common eigenvector."""
    emax = compute_emax(c) if emax is None else emax
    members = set(emax.members)
    for g in maximal_degenerate_subgroups(c.d, limit):
        if set(g.nonzero()) <= members:
            return g, common_eigenvector(g)
    return None


def equality_conditions(
    c: WeylChannel, restarts: int = 64, seed: int = 0, numeric: bool = True
) -> BoundReport:
    """Check when nu_2 reaches the multiplier bound.

    ``numeric=False`` skips the optimizer; ``equality_attained`` is then
    only decided (as False) when the necessary condition fails.
    """
    emax = compute_emax(c)
    bound = kmnr_bound(c)
    necessary = len(emax.members) >= c.d - 1
    witness = find_witness(c, emax)
    nu2 = psi = None
    attained = None if necessary else False
    if numeric:
        initial = [witness[1]] if witness else []
        nu2, psi = max_output_2norm(c, restarts, seed, initial)
        attained = bool(abs(nu2 - bound) <= EQUALITY_ATOL)
    return BoundReport(bound, nu2, attained, necessary, witness, psi, emax)


@dataclass
class StateCheck:
    tr_phi_rho_sq: float
    fourier_identity: float
    bound_sq: float
    match: bool
    support: list[GroupElement]


def theorem3_state_check(c: WeylChannel, witness: tuple[Subgroup, np.ndarray]) -> StateCheck:
    """Evaluate tr Phi(rho0)^* Phi(rho0) for the witness state rho0 = |psi><psi|."""
    g, psi = witness
    d = c.d
    if g.order != d or not set(g) <= set(stabilizer_subgroup(psi, d)):
        raise ValueError("witness vector is not a common eigenvector of an order-d subgroup")
    rho0 = np.outer(psi, psi.conj())
    out = apply(c, rho0)
    direct = float(np.real(np.trace(out.conj().T @ out)))
    mags = np.abs(c.phi) ** 2
    fourier = d * (1 / d**2 + sum(mags[z.x, z.y] for z in g.nonzero()) / d**2)
    bound_sq = kmnr_bound(c) ** 2
    f = weyl.fourier_transform(rho0)
    support = [z for z in all_elements(d)[1:] if abs(f[z.x, z.y]) > SUPPORT_ATOL]
    match = bool(abs(direct - bound_sq) <= STATE_MATCH_ATOL and abs(fourier - bound_sq) <= STATE_MATCH_ATOL)
    return StateCheck(direct, float(fourier), bound_sq, match, support)


@dataclass
class MultReport:
    nu2_phi: float
    nu2_omega: float
    nu2_tensor: float
    product: float
    multiplicative: bool
    tol: float
    hypothesis_contractive: bool
    hypothesis_equality: bool


def tensor_kraus(kraus_a, kraus_b) -> list[np.ndarray]:
    return [np.kron(A, B) for A in kraus_a for B in kraus_b]


def multiplicativity_experiment(
    c: WeylChannel, omega_kraus, restarts: int = 64, seed: int = 0
) -> MultReport:
    """Compare nu_2 of Phi (x) Omega with the product of the factors' nu_2."""
    phi_kraus = kraus_operators(c)
    omega = check_kraus(omega_kraus)
    d_in, d_out = c.d * omega.shape[2], c.d * omega.shape[1]
    if max(d_in, d_out) > TENSOR_DIM_CAP:
        raise ValueError(f"tensor dimension {max(d_in, d_out)} exceeds the cap {TENSOR_DIM_CAP}")
    nu_phi, psi_phi = max_output_norm(phi_kraus, 2, restarts, seed)
    nu_omega, psi_omega = max_output_norm(omega, 2, restarts, seed + 1)
    # the product of the factor optimizers guarantees the trivial lower bound is seen
    nu_tensor, _ = max_output_norm(
        tensor_kraus(phi_kraus, omega), 2, restarts, seed + 2, [np.kron(psi_phi, psi_omega)]
    )
    product = nu_phi * nu_omega
    tol = 1e-6 * product
    return MultReport(
        nu2_phi=nu_phi,
        nu2_omega=nu_omega,
        nu2_tensor=nu_tensor,
        product=product,
        multiplicative=bool(abs(nu_tensor - product) <= tol),
        tol=tol,
        hypothesis_contractive=c.is_contractive,
        hypothesis_equality=bool(abs(nu_phi - kmnr_bound(c)) <= EQUALITY_ATOL),
    )
