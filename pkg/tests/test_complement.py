import numpy as np
import pytest

from weylcov import covariant as cv
from weylcov.complement import (
    KrausChannel,
    complement_consistency_check,
    complementary_from_kraus,
    sorted_spectrum,
    spectral_distance,
    structured_complement,
)
from weylcov.samplers import ginibre, random_kraus, random_pure_state, random_weyl_channel
from weylcov.zgroup import GroupElement, cyclic_subgroup


def nonzero_spectrum(X, tol=1e-12):
    s = sorted_spectrum(X)
    return s[s > tol]


def test_kraus_channel_validates():
    with pytest.raises(ValueError):
        KrausChannel((np.eye(2), np.eye(2)))
    ch = KrausChannel((np.eye(3),))
    assert (ch.dA, ch.dB, len(ch)) == (3, 3, 1)


def test_unitary_complement_is_trace(rng):
    u, _ = np.linalg.qr(ginibre(rng, 3))
    comp = complementary_from_kraus([u])
    assert (comp.dA, comp.dB) == (3, 1)
    X = ginibre(rng, 3)
    assert comp(X)[0, 0] == pytest.approx(np.trace(X))


def test_qubit_dephasing_complement(rng):
    Z = np.diag([1.0, -1.0])
    K = [np.eye(2) / np.sqrt(2), Z / np.sqrt(2)]
    comp = complementary_from_kraus(K)
    rho = random_pure_state(rng, 2)
    out = comp(rho)
    # environment state built from the inner products tr(A_j^* A_i rho)
    expected = np.array([[np.trace(K[i] @ rho @ K[j].conj().T) for j in range(2)] for i in range(2)])
    assert np.allclose(out, expected, atol=1e-14)
    phi_out = sum(k @ rho @ k.conj().T for k in K)
    assert np.allclose(nonzero_spectrum(out), nonzero_spectrum(phi_out), atol=1e-12)


def test_depolarizing_d3_shapes():
    comp = complementary_from_kraus(cv.kraus_operators(cv.depolarizing(3, 0.5)))
    assert len(comp) == 3
    assert all(op.shape == (9, 3) for op in comp.operators)
    assert comp.tp_deviation() <= 1e-12


def test_complement_of_arbitrary_channel(rng):
    K = random_kraus(rng, 3, 4, 2)
    comp = complementary_from_kraus(K)
    assert comp.tp_deviation() <= 1e-12
    double = complementary_from_kraus(comp)
    for _ in range(10):
        rho = random_pure_state(rng, 3)
        orig = sum(k @ rho @ k.conj().T for k in K)
        assert spectral_distance(orig, comp(rho)) <= 1e-10
        assert spectral_distance(orig, double(rho)) <= 1e-10


def test_structured_shapes_and_weights(rng):
    for d in (2, 3, 4):
        c = random_weyl_channel(rng, d)
        s = structured_complement(c)
        assert s.W_tilde.shape == (d * d, d * d)
        assert s.D_blocks.shape == (d, d)
        assert np.sum(s.lambdas**2) == pytest.approx(1.0, abs=1e-12)
        assert s.environment_dim == d * d
        assert all(s.block(t).shape == (d * d, d) for t in range(1, d + 1))


def test_structured_rows_are_kraus_rows(rng):
    # each row of W~ should be a row of some sqrt(p) W_{J gamma}, zero slots included
    d = 3
    c = random_weyl_channel(rng, d)
    s = structured_complement(c)
    rows = [np.sqrt(w.real) * op[r] for _, w, op in cv.kraus_terms(c, drop_zero=False) for r in range(d)]
    for t in range(1, d + 1):
        B = s.block(t)
        for r in range(d * d):
            assert any(np.allclose(B[r], row, atol=1e-12) for row in rows)


def test_structured_identity_channel(rng):
    s = structured_complement(cv.identity_channel(3))
    rho = random_pure_state(rng, 3)
    out = s(rho)
    assert np.linalg.matrix_rank(out, tol=1e-10) == 1
    assert np.trace(out) == pytest.approx(1.0)
    assert spectral_distance(out, s(random_pure_state(rng, 3))) <= 1e-12


@pytest.mark.parametrize("d", [2, 3])
def test_completely_depolarizing_complement_spectrum(rng, d):
    # Phi(psi) = I/d has rank d, so by purification duality the complement
    # output is rank d with flat spectrum, not pure
    c = cv.depolarizing(d, 0)
    s = structured_complement(c)
    g = complementary_from_kraus(cv.kraus_operators(c))
    for _ in range(5):
        rho = random_pure_state(rng, d)
        for out in (s(rho), g(rho)):
            assert np.allclose(nonzero_spectrum(out), np.full(d, 1 / d), atol=1e-12)


def test_structured_requires_cp():
    with pytest.raises(cv.NotCPTP):
        structured_complement(cv.depolarizing(3, 1.2))


def test_qubit_depolarizing_structured_vs_general():
    chk = complement_consistency_check(cv.depolarizing(2, 0.5), samples=50)
    assert chk.environment_dim == 4
    assert chk.general_vs_structured <= 1e-10


def test_consistency_examples(rng):
    assert complement_consistency_check(cv.identity_channel(3)).spectral_deviation <= 1e-12
    assert complement_consistency_check(random_weyl_channel(rng, 2)).spectral_deviation <= 1e-10
    g = cyclic_subgroup(GroupElement(1, 1, 3))
    ab = cv.ab_family(cv.ABFamilySpec(3, g, 0.3, 0.2))
    assert ab.is_cp_tp
    chk = complement_consistency_check(ab)
    assert chk.spectral_deviation <= 1e-9
    assert max(chk.tp_deviation_general, chk.tp_deviation_structured) <= 1e-10


@pytest.mark.parametrize("d", [2, 3, 4, 5])
def test_trace_preservation(rng, d):
    c = random_weyl_channel(rng, d)
    X = ginibre(rng, d)
    for comp in (structured_complement(c), complementary_from_kraus(cv.kraus_operators(c))):
        assert np.trace(comp(X)) == pytest.approx(np.trace(X), abs=1e-10)


def test_spectral_distance_pads():
    assert spectral_distance(np.diag([1.0, 0.0]), np.array([[1.0]])) == 0.0
    assert spectral_distance(np.diag([0.5, 0.5]), np.diag([1.0, 0, 0])) == pytest.approx(0.5)
