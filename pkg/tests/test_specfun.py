import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from numpy.polynomial.hermite_e import hermeval
from scipy.special import eval_jacobi

from tomoprob.oracle import oracle_rotation
from tomoprob.specfun import (
    HalfInt,
    HermiteMatrixParam,
    hermite_multivar,
    jacobi_poly,
    wigner_3j,
    wigner_D,
    wigner_D_matrix,
    wigner_small_d,
)
from tomoprob.spintomo import EulerFrame


# ---------------------------------------------------------------------------
# HalfInt

def test_halfint_basics():
    h = HalfInt(3)
    assert float(h) == 1.5
    assert not h.is_integer
    assert HalfInt(4).is_integer
    assert int(HalfInt(4)) == 2
    assert HalfInt.of(0.5) == HalfInt(1)
    assert HalfInt.of(h) is h
    assert -h == HalfInt(-3)
    assert abs(HalfInt(-3)) == h
    assert h + HalfInt(1) == HalfInt(4)
    assert h - 1 == HalfInt(1)
    assert 2 - h == HalfInt(1)
    assert HalfInt(1) < HalfInt(2)
    assert hash(HalfInt(2)) == hash(1.0)


def test_halfint_rejects_non_halves():
    with pytest.raises(ValueError):
        HalfInt.of(0.3)
    with pytest.raises(TypeError):
        HalfInt(1.5)
    with pytest.raises(ValueError):
        int(HalfInt(3))


# ---------------------------------------------------------------------------
# Jacobi polynomials (scipy as the independent route)

@given(
    st.integers(min_value=0, max_value=8),
    st.floats(min_value=-0.9, max_value=3.0),
    st.floats(min_value=-0.9, max_value=3.0),
    st.floats(min_value=-1.0, max_value=1.0),
)
def test_jacobi_matches_scipy(n, a, b, x):
    assert jacobi_poly(n, a, b, x) == pytest.approx(
        float(eval_jacobi(n, a, b, x)), abs=1e-10, rel=1e-10
    )


def test_jacobi_low_orders():
    assert jacobi_poly(0, 0.5, 1.5, 0.3) == pytest.approx(1.0)
    # P_1^{(a,b)}(x) = (a - b)/2 + (a + b + 2) x / 2
    a, b, x = 0.7, 1.2, -0.4
    assert jacobi_poly(1, a, b, x) == pytest.approx((a - b) / 2 + (a + b + 2) * x / 2)


# ---------------------------------------------------------------------------
# rotation matrices

JS = [HalfInt(t) for t in range(1, 7)]


def test_small_d_identity_at_zero():
    for j in JS:
        n = j.twice + 1
        d = np.array(
            [
                [
                    wigner_small_d(j, HalfInt(j.twice - 2 * p), HalfInt(j.twice - 2 * q), 0.0)
                    for q in range(n)
                ]
                for p in range(n)
            ]
        )
        np.testing.assert_allclose(d, np.eye(n), atol=1e-14)


def test_rotation_matrix_against_exponential():
    # generator route: expm(-i alpha Jz) expm(-i beta Jy) expm(-i gamma Jz)
    rng = np.random.default_rng(42)
    for j in JS:
        al, ga = rng.uniform(0, 2 * math.pi, size=2)
        be = rng.uniform(0, math.pi)
        frame = EulerFrame(al, be, ga)
        D = wigner_D_matrix(j, al, be, ga)
        ref = oracle_rotation(float(j), frame)
        assert np.abs(D - ref).max() < 1e-12


def test_wigner_D_entry_layout():
    # rows m' and columns m run from +j down to -j
    j = HalfInt(3)
    al, be, ga = 0.7, 1.1, 2.3
    D = wigner_D_matrix(j, al, be, ga)
    for p in range(4):
        for q in range(4):
            mp, m = HalfInt(3 - 2 * p), HalfInt(3 - 2 * q)
            assert D[p, q] == pytest.approx(wigner_D(j, mp, m, al, be, ga), abs=1e-14)


def test_rotation_unitarity():
    D = wigner_D_matrix(HalfInt(3), 0.7, 1.1, 2.3)
    assert np.abs(D @ D.conj().T - np.eye(4)).max() < 1e-12


def test_small_d_composition():
    j = HalfInt(4)
    n = j.twice + 1

    def dmat(beta):
        return np.array(
            [
                [
                    wigner_small_d(j, HalfInt(j.twice - 2 * p), HalfInt(j.twice - 2 * q), beta)
                    for q in range(n)
                ]
                for p in range(n)
            ]
        )

    b1, b2 = 0.61, 1.93
    assert np.abs(dmat(b1) @ dmat(b2) - dmat(b1 + b2)).max() < 1e-12


def test_conjugation_symmetry():
    j = HalfInt(3)
    al, be, ga = 1.9, 0.8, 0.3
    for p in range(4):
        for q in range(4):
            mp, m = HalfInt(3 - 2 * p), HalfInt(3 - 2 * q)
            sign = -1.0 if ((mp.twice - m.twice) // 2) % 2 else 1.0
            lhs = np.conj(wigner_D(j, mp, m, al, be, ga))
            rhs = sign * wigner_D(j, -mp, -m, al, be, ga)
            assert abs(lhs - rhs) < 1e-13


# ---------------------------------------------------------------------------
# 3j symbols

def test_threej_selection_rules():
    assert wigner_3j(1, 1, 1, 1, 1, 1) == 0.0
    assert wigner_3j(1, 1, 3, 0, 0, 0) == 0.0
    assert wigner_3j(1, 1, 2, 2, -2, 0) == 0.0


def test_threej_known_values():
    # (j j 0; m -m 0) = (-1)^(j-m) / sqrt(2j+1)
    for jt in (1, 2, 3, 4):
        j = HalfInt(jt)
        for mt in range(-jt, jt + 1, 2):
            m = HalfInt(mt)
            want = (-1.0) ** ((jt - mt) // 2) / math.sqrt(jt + 1)
            assert wigner_3j(j, j, 0, m, -m, 0) == pytest.approx(want, abs=1e-14)
    assert wigner_3j(1, 1, 2, 0, 0, 0) == pytest.approx(math.sqrt(2 / 15), abs=1e-14)
    assert wigner_3j(1, 1, 1, 0, 0, 0) == 0.0
    assert wigner_3j(HalfInt(1), HalfInt(1), 1, HalfInt(1), HalfInt(-1), 0) == pytest.approx(
        1 / math.sqrt(6), abs=1e-14
    )


def test_threej_permutation_symmetry():
    j1, j2, j3 = HalfInt(3), HalfInt(2), HalfInt(3)
    m1, m2, m3 = HalfInt(1), HalfInt(-2), HalfInt(1)
    base = wigner_3j(j1, j2, j3, m1, m2, m3)
    assert base != 0.0
    # cyclic permutations leave the symbol unchanged
    assert wigner_3j(j2, j3, j1, m2, m3, m1) == pytest.approx(base, abs=1e-14)
    assert wigner_3j(j3, j1, j2, m3, m1, m2) == pytest.approx(base, abs=1e-14)
    # a transposition and the m -> -m flip both pick up (-1)^(j1+j2+j3)
    sign = (-1.0) ** ((j1.twice + j2.twice + j3.twice) // 2)
    assert wigner_3j(j2, j1, j3, m2, m1, m3) == pytest.approx(sign * base, abs=1e-14)
    assert wigner_3j(j1, j2, j3, -m1, -m2, -m3) == pytest.approx(sign * base, abs=1e-14)


def test_threej_orthogonality_gram():
    j1, j2 = HalfInt(2), HalfInt(2)
    labels = [
        (j3t, m3t) for j3t in range(0, 5, 2) for m3t in range(-j3t, j3t + 1, 2)
    ]
    gram = np.zeros((len(labels), len(labels)))
    for a, (j3t, m3t) in enumerate(labels):
        for b, (k3t, n3t) in enumerate(labels):
            total = 0.0
            for m1t in range(-2, 3, 2):
                for m2t in range(-2, 3, 2):
                    va = wigner_3j(j1, j2, HalfInt(j3t), HalfInt(m1t), HalfInt(m2t), HalfInt(m3t))
                    vb = wigner_3j(j1, j2, HalfInt(k3t), HalfInt(m1t), HalfInt(m2t), HalfInt(n3t))
                    total += (j3t + 1) * va * vb
            gram[a, b] = total
    assert np.abs(gram - np.eye(len(labels))).max() < 1e-12


# ---------------------------------------------------------------------------
# multivariate Hermite polynomials

def test_hermite_scalar_reduction():
    # M = [[1]] reduces to the probabilists' family He_n
    m = HermiteMatrixParam(np.array([[1.0]]))
    for n in range(7):
        coeffs = np.zeros(n + 1)
        coeffs[n] = 1.0
        for zeta in (-1.3, 0.0, 0.4, 2.1):
            assert hermite_multivar(m, (n,), np.array([zeta])) == pytest.approx(
                float(hermeval(zeta, coeffs)), rel=1e-12, abs=1e-12
            )


def test_hermite_diagonal_factorizes():
    m = HermiteMatrixParam(np.diag([1.0, 1.0]))
    one = HermiteMatrixParam(np.array([[1.0]]))
    z = np.array([0.7, -1.1])
    for n1 in range(4):
        for n2 in range(4):
            prod = hermite_multivar(one, (n1,), z[:1]) * hermite_multivar(one, (n2,), z[1:])
            assert hermite_multivar(m, (n1, n2), z) == pytest.approx(prod, rel=1e-12, abs=1e-12)


def test_hermite_recurrence():
    # H_{n+e_k} = (M zeta)_k H_n - sum_j M_{kj} n_j H_{n-e_j}
    rng = np.random.default_rng(11)
    sym = rng.normal(size=(3, 3))
    m = HermiteMatrixParam(0.3 * (sym + sym.T) + 2.0 * np.eye(3))
    zeta = rng.normal(size=3) + 1j * rng.normal(size=3)
    mz = m.matrix @ zeta
    for orders in [(0, 0, 0), (1, 0, 2), (2, 1, 1), (0, 3, 1)]:
        h = hermite_multivar(m, orders, zeta)
        for k in range(3):
            up = list(orders)
            up[k] += 1
            want = mz[k] * h
            for jj in range(3):
                if orders[jj] == 0:
                    continue
                down = list(orders)
                down[jj] -= 1
                want -= m.matrix[k, jj] * orders[jj] * hermite_multivar(m, tuple(down), zeta)
            got = hermite_multivar(m, tuple(up), zeta)
            assert abs(got - want) < 1e-10 * max(1.0, abs(want))


def test_hermite_param_validation():
    with pytest.raises(ValueError):
        HermiteMatrixParam(np.array([[1.0, 0.5], [0.2, 1.0]]))
    m = HermiteMatrixParam(np.eye(2))
    assert m.dim == 2
    with pytest.raises(ValueError):
        hermite_multivar(m, (17, 0), np.zeros(2))
    with pytest.raises(ValueError):
        hermite_multivar(m, (1,), np.zeros(2))  # order tuple length mismatch
