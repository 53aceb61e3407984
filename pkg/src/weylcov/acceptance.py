"""Desk-scale acceptance criteria, each a seeded function returning a verdict.

``run_all`` evaluates every criterion; the CLI ``acceptance`` subcommand and
the acceptance test module both go through here.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import covariant as cv
from . import norms, weyl
from .complement import complement_consistency_check
from .samplers import (
    ginibre,
    random_hermitian,
    random_kraus,
    random_mixed_state,
    random_multiplier,
    random_pure_state,
    random_psd,
    random_weyl_channel,
)
from .zgroup import (
    GroupElement,
    all_elements,
    all_subgroups,
    duality_form,
    maximal_degenerate_subgroups,
    orthogonal_subgroup,
)


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    metrics: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        bits = ", ".join(f"{k}={_fmt(v)}" for k, v in self.metrics.items())
        return f"criterion {self.number}: {verdict} {self.title} ({bits}; {self.seconds:.2f}s)"


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.3g}"
    return str(v)


def _timed(number: int, title: str, limit: float | None, body: Callable[[], tuple[bool, dict]]) -> CriterionResult:
    start = time.perf_counter()
    ok, metrics = body()
    seconds = time.perf_counter() - start
    if limit is not None:
        metrics["time_limit_s"] = limit
        ok = ok and seconds < limit
    return CriterionResult(number, title, bool(ok), metrics, seconds)


def weyl_algebra(dims=range(2, 17)) -> CriterionResult:
    def body():
        worst = max(max(weyl.verify_weyl_relations(d).values()) for d in dims)
        return worst <= 1e-12, {"max_deviation": worst}

    return _timed(1, "Weyl relations", 10.0, body)


def fourier_parseval(samples: int = 100, seed: int = 1) -> CriterionResult:
    rng = np.random.default_rng(seed)

    def body():
        round_trip = trace_rel = hs_rel = 0.0
        for d in (2, 3, 4, 5):
            for _ in range(samples):
                X = ginibre(rng, d)
                f = weyl.fourier_transform(X)
                round_trip = max(round_trip, float(np.abs(weyl.inverse_fourier(f) - X).max()))
                tr = np.trace(X)
                trace_rel = max(trace_rel, abs(tr - d * f[0, 0]) / max(abs(tr), 1e-300))
                hs = np.trace(X.conj().T @ X).real
                hs_rel = max(hs_rel, abs(hs - d * np.sum(np.abs(f) ** 2)) / hs)
        ok = round_trip <= 1e-12 and trace_rel <= 1e-12 and hs_rel <= 1e-12
        return ok, {"round_trip": round_trip, "trace_rel": trace_rel, "hs_rel": hs_rel}

    return _timed(2, "Fourier round trip and Parseval", 5.0, body)


def purity_criterion(samples: int = 100, seed: int = 2) -> CriterionResult:
    rng = np.random.default_rng(seed)

    def body():
        wrong = 0
        for d in (2, 3, 4, 5):
            for _ in range(samples):
                wrong += not weyl.is_pure_by_fourier(weyl.fourier_transform(random_pure_state(rng, d)), 1e-9)
                rank = int(rng.integers(2, d + 1))
                mixed = random_mixed_state(rng, d, rank)
                wrong += weyl.is_pure_by_fourier(weyl.fourier_transform(mixed), 1e-9)
        return wrong == 0, {"misclassified": wrong}

    return _timed(3, "purity criterion", None, body)


def _hermitian_mix(rng, d: int, k: int) -> np.ndarray:
    """Cycle through indefinite, PSD of random rank and barely PSD/non-PSD cases."""
    kind = k % 4
    if kind == 0:
        return random_hermitian(rng, d)
    if kind == 1:
        return random_psd(rng, d, int(rng.integers(1, d + 1)))
    H = random_hermitian(rng, d)
    shift = np.linalg.eigvalsh(H)[0]
    return H - shift * np.eye(d) + (1e-6 if kind == 2 else -1e-6) * np.eye(d)


def positivity_criterion(samples: int = 100, seed: int = 3) -> CriterionResult:
    rng = np.random.default_rng(seed)

    def body():
        disagree = positives = 0
        for d in (2, 3, 4):
            for k in range(samples):
                X = _hermitian_mix(rng, d, k)
                oracle = weyl.is_psd(X, weyl.PSD_TOL)
                positives += oracle
                disagree += weyl.positivity_criterion(weyl.fourier_transform(X), weyl.PSD_TOL) != oracle
        return disagree == 0, {"disagreements": disagree, "psd_cases": positives}

    return _timed(4, "positivity criterion vs eigenvalues", None, body)


def _unit_operator(rng, n: int, hermitian_state: bool) -> np.ndarray:
    X = random_mixed_state(rng, n) if hermitian_state else ginibre(rng, n)
    return X / np.linalg.norm(X)


def bipartite_estimate(samples: int = 200, seed: int = 4) -> CriterionResult:
    rng = np.random.default_rng(seed)

    def body():
        worst_slack = np.inf
        failures = 0
        for d in (2, 3):
            for dK in (2, 3):
                for k in range(samples):
                    c = random_weyl_channel(rng, d) if k % 2 else cv.from_phi(d, random_multiplier(rng, d))
                    res = norms.theorem1_check(c, _unit_operator(rng, d * dK, k % 3 == 0), atol=1e-10)
                    worst_slack = min(worst_slack, res.rhs - res.lhs)
                    failures += not res.holds
        identity_gap = 0.0
        for d in (2, 3):
            for dK in (2, 3):
                for k in range(10):
                    res = norms.theorem1_check(cv.identity_channel(d), _unit_operator(rng, d * dK, k % 2 == 0))
                    identity_gap = max(identity_gap, abs(res.lhs - res.rhs))
        ok = failures == 0 and identity_gap <= 1e-12
        return ok, {"failures": failures, "min_slack": float(worst_slack), "identity_gap": identity_gap}

    return _timed(5, "bipartite 2-norm estimate", None, body)


def depolarizing_bound(lams=(0.1, 0.5, 0.9), restarts: int = 64, seed: int = 0) -> CriterionResult:
    def body():
        worst = 0.0
        ok = True
        for lam in lams:
            c = cv.depolarizing(3, lam)
            rep = norms.equality_conditions(c, restarts, seed)
            gap = abs(rep.nu2_numeric - np.sqrt((1 + 2 * lam**2) / 3))
            worst = max(worst, gap)
            if rep.sufficient_witness is None:
                ok = False
                continue
            g, psi = rep.sufficient_witness
            stab = norms.stabilizer_subgroup(psi, 3)
            state = norms.theorem3_state_check(c, rep.sufficient_witness)
            ok = ok and gap <= 1e-7 and set(g) <= set(stab) and state.match
        return ok, {"max_gap": worst}

    return _timed(6, "d=3 depolarizing bound and witness", 30.0, body)


def qubit_equality(channels: int = 50, restarts: int = 64, seed: int = 7) -> CriterionResult:
    rng = np.random.default_rng(seed)

    def body():
        failures = 0
        worst = 0.0
        for k in range(channels):
            rep = norms.equality_conditions(random_weyl_channel(rng, 2), restarts, seed + k)
            gap = abs(rep.nu2_numeric - rep.nu2_bound)
            worst = max(worst, gap)
            failures += not (rep.equality_attained and gap <= 1e-7)
        return failures == 0, {"failures": failures, "max_gap": worst}

    return _timed(7, "qubit Pauli channels attain the bound", None, body)


def _witnessed_channel(rng, d: int) -> cv.WeylChannel:
    """Random Weyl channel with a maximal degenerate G inside E_max plus 0."""
    if d == 2:
        return random_weyl_channel(rng, 2)
    subgroups = maximal_degenerate_subgroups(d)
    while True:
        g = subgroups[int(rng.integers(len(subgroups)))]
        a, b = rng.uniform(-1 / (d - 1), d / (d - 1)), rng.uniform(-1 / (d - 1), 1)
        if cv.ab_triangle_classify(d, a, b) == cv.NOT_CHANNEL or abs(a + b) < abs(b):
            continue
        c = cv.ab_family(cv.ABFamilySpec(d, g, a, b))
        if norms.find_witness(c) is not None:
            return c


def multiplicativity(pairs: int = 10, restarts: int = 64, seed: int = 8) -> CriterionResult:
    rng = np.random.default_rng(seed)

    def body():
        worst = 0.0
        failures = 0
        for k in range(pairs):
            d = 2 + k % 2
            d_omega = 2 + (k // 2) % 2
            c = _witnessed_channel(rng, d)
            omega = random_kraus(rng, d_omega, int(rng.integers(1, 5)))
            rep = norms.multiplicativity_experiment(c, omega, restarts, seed + 3 * k)
            worst = max(worst, abs(rep.nu2_tensor - rep.product) / rep.product)
            failures += not (rep.multiplicative and rep.hypothesis_equality)
        return failures == 0, {"failures": failures, "max_rel_gap": worst}

    return _timed(8, "multiplicativity with Weyl factor", 300.0, body)


def ab_family(seed: int = 9) -> CriterionResult:
    rng = np.random.default_rng(seed)

    def body():
        formula = ccom = 0.0
        noncyclic = 0
        labels_ok = True
        for d in (2, 3, 4, 6):
            for g in maximal_degenerate_subgroups(d):
                noncyclic += len(g.generators()) > 1
                a, b = rng.normal(size=2) + 1j * rng.normal(size=2)
                spec = cv.ABFamilySpec(d, g, a, b)
                formula = max(formula, float(np.abs(cv.ab_family(spec).p - cv.ab_p_formula(spec)).max()))
                ccom = max(ccom, cv.ccom_decomposition_check(spec, samples=5, seed=seed))
            corners = cv.ab_triangle_corners(d)
            labels_ok &= all(cv.ab_triangle_classify(d, a, b) != cv.NOT_CHANNEL for a, b in corners.values())
            normals = {
                ("A", "B"): np.array([1.0, 1.0]),
                ("A", "E"): np.array([-(d - 1.0), 1.0]),
                ("B", "E"): np.array([-(d - 1.0), -(d * d - 1.0)]),
            }
            for (p, q), n in normals.items():
                mid = (np.array(corners[p]) + np.array(corners[q])) / 2
                out = mid + 0.01 * n / np.linalg.norm(n)
                labels_ok &= cv.ab_triangle_classify(d, *out) == cv.NOT_CHANNEL
        ok = formula <= 1e-12 and ccom <= 1e-10 and labels_ok and noncyclic > 0
        return ok, {"formula_dev": formula, "ccom_dev": ccom, "labels_ok": labels_ok, "noncyclic_G": noncyclic}

    return _timed(9, "(a,b) family", None, body)


def dephasing_identity() -> CriterionResult:
    def body():
        worst = 0.0
        for d in (2, 3, 5):
            for x, y in ((0, 1), (1, 0), (1, 1)):
                z0 = GroupElement(x, y, d)
                c = cv.dephasing_channel(d, z0)
                H = cv.dephasing_eigenbasis(z0)
                for m in range(d):
                    for n in range(d):
                        X = np.outer(H[:, m], H[:, n].conj())
                        target = X if m == n else np.zeros_like(X)
                        worst = max(worst, float(np.abs(c(X) - target).max()))
        return worst <= 1e-12, {"max_deviation": worst}

    return _timed(10, "dephasing identity", None, body)


def complements(channels: int = 10, samples: int = 50, seed: int = 11) -> CriterionResult:
    rng = np.random.default_rng(seed)

    def body():
        spec = tp = 0.0
        for d in (2, 3):
            for k in range(channels):
                chk = complement_consistency_check(random_weyl_channel(rng, d), samples, seed + k)
                spec = max(spec, chk.spectral_deviation)
                tp = max(tp, chk.tp_deviation_general, chk.tp_deviation_structured)
        return spec <= 1e-9 and tp <= 1e-10, {"spectral_dev": spec, "tp_dev": tp}

    return _timed(11, "complementary channels", None, body)


def character_sums() -> CriterionResult:
    def body():
        worst = 0.0
        count = 0
        for d in (2, 3, 4, 6):
            elems = all_elements(d)
            for sub in all_subgroups(d):
                count += 1
                perp = set(orthogonal_subgroup(sub))
                for gamma in elems:
                    total = sum(np.exp(1j * duality_form(gamma, z)) for z in sub)
                    expected = len(sub) if gamma in perp else 0
                    worst = max(worst, abs(total - expected))
        return worst <= 1e-10, {"max_deviation": worst, "subgroups": count}

    return _timed(12, "character sums over subgroups", None, body)


CRITERIA: dict[int, Callable[[], CriterionResult]] = {
    1: weyl_algebra,
    2: fourier_parseval,
    3: purity_criterion,
    4: positivity_criterion,
    5: bipartite_estimate,
    6: depolarizing_bound,
    7: qubit_equality,
    8: multiplicativity,
    9: ab_family,
    10: dephasing_identity,
    11: complements,
    12: character_sums,
}


def run_all(only=None) -> list[CriterionResult]:
    keys = sorted(CRITERIA) if not only else sorted(only)
    return [CRITERIA[k]() for k in keys]
