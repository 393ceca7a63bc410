import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from tomoprob.oracle import oracle_rotation
from tomoprob.qstate import BasisDescriptor, DensityMatrix
from tomoprob.specfun import HalfInt
from tomoprob.spintomo import (
    EulerFrame,
    SpinMarginal,
    kernel_K_spin,
    read_spin_csv,
    reconstruct_spin_density,
    rotation_matrix,
    sphere_lattice,
    spin_marginal,
    spin_marginal_grid,
    write_spin_csv,
)


def _random_spin_density(rng, j):
    dim = int(2 * float(j)) + 1
    m = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    m = m @ m.conj().T
    m /= np.trace(m).real
    return DensityMatrix(BasisDescriptor.spin(j), m)


JS = [HalfInt(1), HalfInt(2), HalfInt(3), HalfInt(4)]


# ---------------------------------------------------------------------------
# forward map

def test_spin_up_beta_sweep():
    rho = DensityMatrix(BasisDescriptor.spin(0.5), np.diag([1.0, 0.0]))
    betas = np.linspace(0.0, math.pi, 32)
    frames = tuple(EulerFrame(0.3, float(b)) for b in betas)
    marg = spin_marginal_grid(rho, frames)
    up = np.cos(betas / 2) ** 2
    assert np.abs(marg.values[:, 0] - up).max() < 1e-12
    assert np.abs(marg.values[:, 1] - (1.0 - up)).max() < 1e-12


def test_marginal_grid_matches_single_frame():
    rng = np.random.default_rng(2)
    rho = _random_spin_density(rng, HalfInt(2))
    frames = tuple(EulerFrame(a, b) for a, b in rng.uniform(0.2, 2.8, size=(6, 2)))
    grid = spin_marginal_grid(rho, frames)
    for k, fr in enumerate(frames):
        np.testing.assert_allclose(grid.values[k], spin_marginal(rho, fr), atol=1e-13)


def test_gamma_angle_is_irrelevant():
    rng = np.random.default_rng(3)
    rho = _random_spin_density(rng, HalfInt(3))
    fr0 = EulerFrame(1.1, 0.8, 0.0)
    fr1 = EulerFrame(1.1, 0.8, 2.7)
    assert np.abs(spin_marginal(rho, fr0) - spin_marginal(rho, fr1)).max() < 1e-12


@given(
    st.sampled_from(JS),
    st.floats(min_value=0.0, max_value=2 * math.pi),
    st.floats(min_value=0.0, max_value=math.pi),
    st.integers(min_value=0, max_value=2**31 - 1),
)
def test_sum_rule_and_nonnegativity(j, alpha, beta, seed):
    rho = _random_spin_density(np.random.default_rng(seed), j)
    w = spin_marginal(rho, EulerFrame(alpha, beta))
    assert abs(w.sum() - 1.0) < 1e-12
    assert w.min() > -1e-10


def test_rotation_matrix_against_exponential_route():
    rng = np.random.default_rng(4)
    for j in JS:
        for _ in range(3):
            al, ga = rng.uniform(0, 2 * math.pi, size=2)
            be = rng.uniform(0, math.pi)
            fr = EulerFrame(al, be, ga)
            assert np.abs(rotation_matrix(j, fr) - oracle_rotation(float(j), fr)).max() < 1e-12


def test_z_rotation_covariance():
    # conjugating rho by a z-rotation shifts the frame azimuth
    rng = np.random.default_rng(6)
    for j in (HalfInt(1), HalfInt(2)):
        rho = _random_spin_density(rng, j)
        delta = 0.9
        Rz = rotation_matrix(j, EulerFrame(delta, 0.0))
        rho_rot = DensityMatrix(
            BasisDescriptor.spin(j), Rz @ rho.entries @ Rz.conj().T
        )
        al, be = 0.7, 1.3
        w_rot = spin_marginal(rho_rot, EulerFrame(al, be))
        w_shift_plus = spin_marginal(rho, EulerFrame(al + delta, be))
        w_shift_minus = spin_marginal(rho, EulerFrame(al - delta, be))
        best = min(
            np.abs(w_rot - w_shift_plus).max(), np.abs(w_rot - w_shift_minus).max()
        )
        assert best < 1e-10


# ---------------------------------------------------------------------------
# sphere quadrature

def test_sphere_lattice_weights():
    frames, weights = sphere_lattice(8, 8)
    assert len(frames) == 64 and len(weights) == 64
    assert float(np.sum(weights)) == pytest.approx(1.0, abs=1e-12)
    # first harmonics integrate to zero under the quadrature
    alphas = np.array([f.alpha for f in frames])
    betas = np.array([f.beta for f in frames])
    assert abs(np.sum(weights * np.cos(betas))) < 1e-12
    assert abs(np.sum(weights * np.sin(betas) * np.exp(1j * alphas))) < 1e-12


# ---------------------------------------------------------------------------
# inverse map

def test_round_trip_all_supported_j():
    rng = np.random.default_rng(7)
    frames, weights = sphere_lattice()
    for j in JS:
        for _ in range(5):
            rho = _random_spin_density(rng, j)
            marg = spin_marginal_grid(rho, frames, weights)
            back = reconstruct_spin_density(marg)
            assert np.abs(back.entries - rho.entries).max() < 1e-8


def test_spin_up_reconstructs_projector():
    rho = DensityMatrix(BasisDescriptor.spin(0.5), np.diag([1.0, 0.0]))
    frames, weights = sphere_lattice()
    marg = spin_marginal_grid(rho, frames, weights)
    back = reconstruct_spin_density(marg)
    np.testing.assert_allclose(back.entries, np.diag([1.0, 0.0]), atol=1e-10)


def test_uniform_marginal_reconstructs_maximally_mixed():
    frames, weights = sphere_lattice()
    vals = np.full((len(frames), 2), 0.5)
    marg = SpinMarginal(j=HalfInt(1), frames=frames, values=vals, weights=weights)
    back = reconstruct_spin_density(marg)
    np.testing.assert_allclose(back.entries, np.eye(2) / 2, atol=1e-12)


def test_kernel_stack_reconstructs_directly():
    # rho = sum_s int dOmega/(4 pi) w(s|Omega) K^(j)(s, Omega), no symmetrizing
    rng = np.random.default_rng(8)
    j = HalfInt(2)
    frames, weights = sphere_lattice()
    rho = _random_spin_density(rng, j)
    marg = spin_marginal_grid(rho, frames, weights)
    svals = [HalfInt(j.twice - 2 * i) for i in range(j.twice + 1)]
    acc = np.zeros((j.twice + 1, j.twice + 1), dtype=complex)
    for k, fr in enumerate(frames):
        for si, s in enumerate(svals):
            acc += weights[k] * marg.values[k, si] * kernel_K_spin(j, s, fr)
    assert np.abs(acc - rho.entries).max() < 1e-8


def test_reconstruction_requires_weights():
    rho = DensityMatrix(BasisDescriptor.spin(0.5), np.eye(2) / 2)
    frames, _ = sphere_lattice(4, 4)
    marg = spin_marginal_grid(rho, frames)  # no weights attached
    with pytest.raises(ValueError, match="weights"):
        reconstruct_spin_density(marg)


# ---------------------------------------------------------------------------
# grid files

def test_spin_csv_round_trip(tmp_path):
    rng = np.random.default_rng(9)
    rho = _random_spin_density(rng, HalfInt(3))
    frames, weights = sphere_lattice()  # (4,4) aliases the j3=3 azimuthals
    marg = spin_marginal_grid(rho, frames, weights)
    path = tmp_path / "spin.csv"
    write_spin_csv(path, marg)
    back = read_spin_csv(path)
    assert back.j == marg.j
    np.testing.assert_array_equal(back.values, marg.values)
    np.testing.assert_array_equal(back.weights, marg.weights)
    assert all(
        (a.alpha, a.beta, a.gamma) == (b.alpha, b.beta, b.gamma)
        for a, b in zip(back.frames, marg.frames)
    )
    back2 = reconstruct_spin_density(back)
    assert np.abs(back2.entries - rho.entries).max() < 1e-8


def test_spin_csv_errors_carry_line_numbers(tmp_path):
    rho = DensityMatrix(BasisDescriptor.spin(0.5), np.eye(2) / 2)
    frames, weights = sphere_lattice(2, 2)
    marg = spin_marginal_grid(rho, frames, weights)
    path = tmp_path / "spin.csv"
    write_spin_csv(path, marg)
    lines = path.read_text().splitlines()
    lines[3] = lines[3].replace(",", ";")
    bad = tmp_path / "bad.csv"
    bad.write_text("\n".join(lines) + "\n")
    with pytest.raises(ValueError, match=r"bad\.csv: line 4"):
        read_spin_csv(bad)
