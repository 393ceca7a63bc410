import math

import numpy as np
import pytest

from tomoprob.oracle import (
    ORACLE_FOCK_LEVELS,
    PropagatorResult,
    build_hamiltonian,
    direct_marginal,
    oracle_rotation,
    residual_check,
    time_derivative,
    vonneumann_evolve,
)
from tomoprob.pauli_evolution import HamiltonianSpec, HybridFrame, analytic_trapped_solution
from tomoprob.qstate import BasisDescriptor, DensityMatrix, PureState, density_from_pure
from tomoprob.specfun import HalfInt
from tomoprob.spintomo import EulerFrame
from tomoprob.symtomo import SymplecticFrame, marginal_1d


def _random_density(rng, dim, basis):
    m = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    m = m @ m.conj().T
    m /= np.trace(m).real
    return DensityMatrix(basis, m)


# ---------------------------------------------------------------------------
# Hamiltonians

def test_hamiltonians_are_hermitian():
    for kind, params in (
        ("free", {"levels": 12}),
        ("spin_diag", {"a": 1.3, "c": -0.7}),
        ("trapped", {"levels": 6}),
        ("landau", {"levels": 4}),
    ):
        H, basis = build_hamiltonian(HamiltonianSpec(kind, params))
        assert H.shape == (basis.dim, basis.dim)
        assert np.abs(H - H.conj().T).max() < 1e-12


def test_unknown_kind_rejected():
    class Spec:
        kind = "anharmonic"
        params = {}

    with pytest.raises(ValueError, match="anharmonic"):
        build_hamiltonian(Spec())


def test_trapped_spectrum_carries_the_triple_gap():
    # coherence between (n=1, up) and (n=0, down) rotates at rate 3
    H, _ = build_hamiltonian(HamiltonianSpec("trapped", {"levels": 4}))
    evals = np.sort(np.real(np.diag(H)))
    e_up1 = 1.5 + 1.0
    e_dn0 = 0.5 - 1.0
    assert e_up1 - e_dn0 == pytest.approx(3.0)
    assert np.min(np.abs(evals - e_up1)) < 1e-12
    assert np.min(np.abs(evals - e_dn0)) < 1e-12


# ---------------------------------------------------------------------------
# propagation

def test_evolution_preserves_trace_energy_purity():
    rng = np.random.default_rng(1)
    spec = HamiltonianSpec("trapped", {"levels": 5})
    H, basis = build_hamiltonian(spec)
    rho = _random_density(rng, basis.dim, basis)
    res = vonneumann_evolve(rho, spec, [0.3, 0.9, 2.0])
    assert isinstance(res, PropagatorResult)
    assert res.unitarity_defect < 1e-10
    e0 = float(np.real(np.trace(rho.entries @ H)))
    for state in res.states:
        assert abs(np.trace(state.entries).real - 1.0) < 1e-10
        assert abs(float(np.real(np.trace(state.entries @ H))) - e0) < 1e-9
        assert abs(state.purity() - rho.purity()) < 1e-9


def test_spin_coherence_phase():
    spec = HamiltonianSpec("spin_diag", {"a": 1.3, "c": -0.7})
    rho = DensityMatrix(BasisDescriptor.spin(0.5), np.full((2, 2), 0.5))
    res = vonneumann_evolve(rho, spec, [0.0, 0.4, 1.1])
    gap = 2.0
    for t, state in zip(res.times, res.states):
        want = 0.5 * np.exp(-1j * gap * t)
        assert abs(state.entries[0, 1] - want) < 1e-12


def test_eigendecomposition_matches_rk4_integrator():
    # same dynamics through an explicit 4th-order commutator integrator
    rng = np.random.default_rng(2)
    spec = HamiltonianSpec("trapped", {"levels": 4})
    H, basis = build_hamiltonian(spec)
    rho = _random_density(rng, basis.dim, basis)
    res = vonneumann_evolve(rho, spec, [1.0])

    def rhs(m):
        return 1j * (m @ H - H @ m)

    m = rho.entries.astype(complex)
    steps = 2000
    h = 1.0 / steps
    for _ in range(steps):
        k1 = rhs(m)
        k2 = rhs(m + 0.5 * h * k1)
        k3 = rhs(m + 0.5 * h * k2)
        k4 = rhs(m + h * k3)
        m = m + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
    assert np.abs(m - res.states[0].entries).max() < 1e-8


def test_free_motion_spreads_the_ground_state():
    # <(mu q + nu p)^2>(t) = (mu^2 + (nu + mu t)^2) / 2 for the ground state
    psi = PureState(BasisDescriptor.fock(1), np.array([1.0]))
    rho = density_from_pure(psi)
    spec = HamiltonianSpec("free", {})
    times = [0.0, 0.5, 1.5]
    res = vonneumann_evolve(rho, spec, times)
    assert res.leakage < 1e-6
    x = np.linspace(-12, 12, 1201)
    mu, nu = 0.8, 0.6
    fr = SymplecticFrame(mu, nu)
    for t, state in zip(res.times, res.states):
        w = direct_marginal(state, x, frames=(fr,))
        second = np.trapezoid(w * x * x, x)
        want = (mu**2 + (nu + mu * t) ** 2) / 2
        assert second == pytest.approx(want, abs=1e-6)


def test_trapped_oracle_matches_closed_form_solution():
    # (|1, up> + |0, down>)/sqrt(2) under the trapped Hamiltonian
    levels = ORACLE_FOCK_LEVELS["trapped"]
    basis = BasisDescriptor.product(BasisDescriptor.fock(levels), BasisDescriptor.spin(0.5))
    amps = np.zeros(2 * levels)
    amps[1 * 2 + 0] = 1 / math.sqrt(2)  # n=1, spin up
    amps[0 * 2 + 1] = 1 / math.sqrt(2)  # n=0, spin down
    rho = density_from_pure(PureState(basis, amps))
    spec = HamiltonianSpec("trapped", {})
    x = np.linspace(-4, 4, 33)
    for t in (0.0, 0.6, 1.7):
        res = vonneumann_evolve(rho, spec, [t])
        for mu, nu in ((math.cos(0.7), math.sin(0.7)), (1.2, -0.4)):
            sym = SymplecticFrame(mu, nu)
            for euler in (EulerFrame(0.9, 1.2), EulerFrame(4.0, 2.2)):
                w = direct_marginal(res.states[0], x, frames=(sym,), euler=euler)
                hf = HybridFrame((sym,), euler)
                ref_up = analytic_trapped_solution(x, hf, HalfInt(1), t)
                ref_dn = analytic_trapped_solution(x, hf, HalfInt(-1), t)
                assert np.abs(w[:, 0] - ref_up).max() < 1e-9
                assert np.abs(w[:, 1] - ref_dn).max() < 1e-9


# ---------------------------------------------------------------------------
# direct marginals

def test_direct_marginal_agrees_with_tomography_route():
    rng = np.random.default_rng(3)
    basis = BasisDescriptor.fock(5)
    rho = _random_density(rng, 5, basis)
    x = np.linspace(-6, 6, 41)
    # nu = 0.05 lands in the fast path's rotated-frame branch while staying
    # resolvable by the oracle's plain quadrature
    for fr in (SymplecticFrame(1.0, 0.05), SymplecticFrame(0.6, -1.1), SymplecticFrame(0.0, 1.0)):
        w_oracle = direct_marginal(rho, x, frames=(fr,))
        w_fast = marginal_1d(rho, x, fr)
        assert np.abs(w_oracle - w_fast).max() < 1e-8


def test_direct_marginal_requires_euler_for_spin():
    rho = DensityMatrix(
        BasisDescriptor.product(BasisDescriptor.fock(2), BasisDescriptor.spin(0.5)),
        np.eye(4) / 4,
    )
    with pytest.raises(ValueError, match="Euler frame"):
        direct_marginal(rho, np.linspace(-3, 3, 9), frames=(SymplecticFrame(1.0, 0.2),))


def test_pure_spin_direct_marginal():
    rho = DensityMatrix(BasisDescriptor.spin(0.5), np.diag([1.0, 0.0]))
    w = direct_marginal(rho, None, euler=EulerFrame(0.0, 1.1))
    assert w.sum() == pytest.approx(1.0, abs=1e-12)
    assert w[0] == pytest.approx(math.cos(0.55) ** 2, abs=1e-12)


# ---------------------------------------------------------------------------
# finite-difference helpers

def test_time_derivative_five_point():
    deriv = time_derivative(lambda t: np.array([math.sin(t), t * t]), 0.8)
    assert deriv[0] == pytest.approx(math.cos(0.8), abs=1e-10)
    assert deriv[1] == pytest.approx(1.6, abs=1e-10)


def test_residual_check_flags_wrong_rhs():
    def marg(t):
        return np.array([math.exp(-2 * t), math.exp(-t)])

    good = residual_check(marg, lambda w, t: -np.array([2, 1]) * w, t=0.5)
    bad = residual_check(marg, lambda w, t: -3 * w, t=0.5)
    assert good < 1e-9
    assert bad > 1e-2
