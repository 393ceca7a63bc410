import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tomoprob.qstate import BasisDescriptor, DensityMatrix, PureState, density_from_pure
from tomoprob.symtomo import (
    DEFAULT_CIRCLE_COUNT,
    DEGENERATE_NU,
    QuadratureMarginal,
    SymplecticFrame,
    default_circle_frames,
    frame_angles,
    marginal_1d,
    marginal_grid,
    marginal_multimode,
    quad_eigenfunction,
    read_marginal_csv,
    reconstruct_density,
    tomographic_amplitudes,
    two_mode_marginal_grid,
    write_marginal_csv,
)


def _random_density(rng, dim):
    m = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    m = m @ m.conj().T
    m /= np.trace(m).real
    return DensityMatrix(BasisDescriptor.fock(dim), m)


def _fock_density(n, levels):
    m = np.zeros((levels, levels))
    m[n, n] = 1.0
    return DensityMatrix(BasisDescriptor.fock(levels), m)


frames_st = st.tuples(
    st.floats(min_value=-2.0, max_value=2.0),
    st.floats(min_value=-2.0, max_value=2.0),
).filter(lambda t: math.hypot(*t) > 0.05)


# ---------------------------------------------------------------------------
# closed forms for the lowest oscillator states

def test_ground_state_closed_form():
    x = np.linspace(-6, 6, 64)
    rho = _fock_density(0, 1)
    for theta in 2 * math.pi * np.arange(16) / 16:
        fr = SymplecticFrame(math.cos(theta), math.sin(theta))
        w = marginal_1d(rho, x, fr)
        ref = np.exp(-x * x) / math.sqrt(math.pi)
        assert np.abs(w - ref).max() < 1e-6


def test_first_level_closed_form():
    x = np.linspace(-6, 6, 64)
    rho = _fock_density(1, 2)
    for theta in 2 * math.pi * np.arange(16) / 16:
        fr = SymplecticFrame(math.cos(theta), math.sin(theta))
        w = marginal_1d(rho, x, fr)
        ref = 2 * x * x * np.exp(-x * x) / math.sqrt(math.pi)
        assert np.abs(w - ref).max() < 1e-6


def test_general_radius_gaussian():
    # |0><0| at radius r: exp(-x^2/r^2)/sqrt(pi r^2)
    rho = _fock_density(0, 1)
    x = np.linspace(-5, 5, 41)
    for mu, nu in ((1.5, -0.3), (0.2, 0.9), (-1.1, 1.3)):
        r2 = mu * mu + nu * nu
        ref = np.exp(-x * x / r2) / math.sqrt(math.pi * r2)
        assert np.abs(marginal_1d(rho, x, SymplecticFrame(mu, nu)) - ref).max() < 1e-10


# ---------------------------------------------------------------------------
# scaling and normalization properties

@given(frames_st, st.sampled_from([0.5, 2.0, 3.0]))
def test_homogeneity_in_nu(frame, kappa):
    mu, nu = frame
    rng = np.random.default_rng(77)
    rho = _random_density(rng, 3)
    x = np.array([-1.7, -0.2, 0.8, 2.4])
    lhs = marginal_1d(rho, x, SymplecticFrame(mu, kappa * nu))
    rhs = marginal_1d(rho, x / kappa, SymplecticFrame(mu / kappa, nu)) / kappa
    assert np.abs(lhs - rhs).max() < 1e-8


@given(frames_st, st.sampled_from([0.5, 2.0, 3.0]))
def test_homogeneity_in_mu(frame, kappa):
    mu, nu = frame
    rng = np.random.default_rng(78)
    rho = _random_density(rng, 3)
    x = np.array([-2.1, 0.3, 1.1])
    lhs = marginal_1d(rho, x, SymplecticFrame(kappa * mu, nu))
    rhs = marginal_1d(rho, x / kappa, SymplecticFrame(mu, nu / kappa)) / kappa
    assert np.abs(lhs - rhs).max() < 1e-8


@settings(max_examples=15)
@given(frames_st, st.integers(min_value=1, max_value=5))
def test_normalization_and_nonnegativity(frame, dim):
    rng = np.random.default_rng(dim * 37)
    rho = _random_density(rng, dim)
    fr = SymplecticFrame(*frame)
    span = 8.0 * max(1.0, math.hypot(*frame))
    x = np.linspace(-span, span, 481)
    w = marginal_1d(rho, x, fr)
    assert w.min() > -1e-10
    assert abs(np.trapezoid(w, x) - 1.0) < 1e-6


def test_skewed_frame_band_is_stable():
    # frames with |nu| << |mu| once under-resolved the projection grid;
    # the quarter-turn route keeps every thin-frame marginal normalized
    rng = np.random.default_rng(123)
    rho = _random_density(rng, 5)
    x = np.linspace(-10, 10, 481)
    for mu, nu in ((0.9, 1e-4), (1.2, -6.5e-5), (-0.8, 1e-3), (1.0, 0.0499)):
        w = marginal_1d(rho, x, SymplecticFrame(mu, nu))
        assert abs(np.trapezoid(w, x) - 1.0) < 1e-8
        assert w.min() > -1e-10


def test_degenerate_frame_is_rescaled_position_density():
    rho = _fock_density(1, 3)
    x = np.linspace(-4, 4, 33)
    for mu in (1.0, -2.0, 0.5):
        w = marginal_1d(rho, x, SymplecticFrame(mu, 0.5 * DEGENERATE_NU * abs(mu)))
        q = x / mu
        ref = (2 * q * q * np.exp(-q * q) / math.sqrt(math.pi)) / abs(mu)
        assert np.abs(w - ref).max() < 1e-10


# ---------------------------------------------------------------------------
# eigenfunctions and amplitudes

def test_quad_eigenfunction_differential_identity():
    # x f = mu q f - i nu df/dq, five-point finite differences
    q = np.linspace(-4, 4, 8001)
    h = q[1] - q[0]
    for mu, nu, x in ((0.7, 0.9, 1.3), (-0.4, 1.2, -0.6), (1.0, -0.5, 0.0)):
        f = quad_eigenfunction(x, SymplecticFrame(mu, nu), q)
        df = (-f[4:] + 8 * f[3:-1] - 8 * f[1:-3] + f[:-4]) / (12 * h)
        mid = slice(2, -2)
        resid = x * f[mid] - mu * q[mid] * f[mid] + 1j * nu * df
        scale = np.abs(f).max()
        assert np.abs(resid).max() / scale < 1e-8


def test_tomographic_amplitudes_consistent_with_marginal():
    rng = np.random.default_rng(3)
    rho = _random_density(rng, 4)
    x = np.linspace(-5, 5, 21)
    fr = SymplecticFrame(0.8, -0.6)
    B = tomographic_amplitudes(4, x, fr)
    w = np.real(np.einsum("xm,mn,xn->x", B, rho.entries, B.conj()))
    assert np.abs(w - marginal_1d(rho, x, fr)).max() < 1e-10


def test_frame_angles_reconstruct_frame():
    # the (phi, lambda) chart covers |mu*nu| <= 1/2 (sin(2 phi)/2 bound)
    rng = np.random.default_rng(8)
    done = 0
    while done < 25:
        mu, nu = rng.uniform(-3, 3, size=2)
        if math.hypot(mu, nu) < 0.05 or abs(mu * nu) > 0.45:
            continue
        ang = frame_angles(SymplecticFrame(mu, nu))
        assert ang.lam * math.cos(ang.phi) == pytest.approx(mu, abs=1e-10)
        assert math.sin(ang.phi) / ang.lam == pytest.approx(nu, abs=1e-10)
        done += 1
    with pytest.raises(ValueError, match="not solvable"):
        frame_angles(SymplecticFrame(1.5, 1.5))


def test_zero_frame_rejected():
    with pytest.raises(ValueError):
        SymplecticFrame(0.0, 0.0)


# ---------------------------------------------------------------------------
# grids, threading, multimode

def test_marginal_grid_threads_match_serial():
    rng = np.random.default_rng(21)
    rho = _random_density(rng, 4)
    x = np.linspace(-6, 6, 51)
    frames = default_circle_frames(12)
    a = marginal_grid(rho, x, frames, threads=1)
    b = marginal_grid(rho, x, frames, threads=3)
    np.testing.assert_array_equal(a.values, b.values)
    assert a.frames == b.frames


def test_default_circle_frames():
    frames = default_circle_frames()
    assert len(frames) == DEFAULT_CIRCLE_COUNT
    rads = [math.hypot(f.mu, f.nu) for f in frames]
    assert max(abs(r - 1.0) for r in rads) < 1e-12


def test_two_mode_grid_factorizes_product_states():
    rng = np.random.default_rng(31)
    ra = _random_density(rng, 3)
    rb = _random_density(rng, 2)
    from tomoprob.qstate import tensor_product

    rho = tensor_product(ra, rb)
    x1 = np.linspace(-3, 3, 7)
    x2 = np.linspace(-2, 2, 5)
    f1 = SymplecticFrame(0.9, 0.44)
    f2 = SymplecticFrame(-0.3, 1.1)
    grid = two_mode_marginal_grid(rho, x1, x2, f1, f2)
    wa = marginal_1d(ra, x1, f1)
    wb = marginal_1d(rb, x2, f2)
    np.testing.assert_allclose(grid, np.outer(wa, wb), atol=1e-10)


def test_marginal_multimode_matches_two_mode_grid():
    rng = np.random.default_rng(32)
    basis = BasisDescriptor.product(BasisDescriptor.fock(2), BasisDescriptor.fock(3))
    m = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
    m = m @ m.conj().T
    m /= np.trace(m).real
    rho = DensityMatrix(basis, m)
    f1 = SymplecticFrame(1.2, -0.5)
    f2 = SymplecticFrame(0.6, 0.8)
    grid = two_mode_marginal_grid(rho, np.array([0.7]), np.array([-0.4]), f1, f2)
    point = marginal_multimode(rho, (0.7, -0.4), (f1, f2))
    assert grid[0, 0] == pytest.approx(point, abs=1e-12)


# ---------------------------------------------------------------------------
# reconstruction

def test_reconstruction_round_trip():
    rng = np.random.default_rng(44)
    x = np.linspace(-7, 7, 241)
    frames = default_circle_frames()
    for _ in range(3):
        rho = _random_density(rng, 4)
        qm = marginal_grid(rho, x, frames)
        back = reconstruct_density(qm, levels=4)
        assert np.abs(back.entries - rho.entries).max() < 1e-8


def test_reconstruction_levels_from_metadata():
    rng = np.random.default_rng(45)
    rho = _random_density(rng, 3)
    qm = marginal_grid(rho, np.linspace(-7, 7, 241), default_circle_frames())
    qm.meta["levels"] = 3
    back = reconstruct_density(qm)
    assert back.dim == 3
    assert np.abs(back.entries - rho.entries).max() < 1e-8


def test_reconstruction_reports_diagnostics():
    rng = np.random.default_rng(46)
    rho = _random_density(rng, 2)
    qm = marginal_grid(rho, np.linspace(-6, 6, 201), default_circle_frames())
    report = {}
    reconstruct_density(qm, levels=2, report=report)
    assert report["levels"] == 2
    assert report["hermiticity_defect"] < 1e-10
    assert abs(report["trace"] - 1.0) < 1e-8
    assert report["min_eigenvalue"] > -1e-10


def test_reconstruction_rejects_off_circle_lattice():
    rng = np.random.default_rng(47)
    rho = _random_density(rng, 2)
    x = np.linspace(-6, 6, 101)
    frames = tuple(SymplecticFrame(2 * math.cos(t), 2 * math.sin(t))
                   for t in 2 * math.pi * np.arange(16) / 16)
    qm = marginal_grid(rho, x, frames)
    with pytest.raises(ValueError, match="unit frame circle"):
        reconstruct_density(qm, levels=2)


def test_reconstruction_rejects_nonuniform_angles():
    rng = np.random.default_rng(48)
    rho = _random_density(rng, 2)
    x = np.linspace(-6, 6, 101)
    thetas = np.array([0.0, 0.3, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0])
    frames = tuple(SymplecticFrame(math.cos(t), math.sin(t)) for t in thetas)
    qm = marginal_grid(rho, x, frames)
    with pytest.raises(ValueError, match="uniform"):
        reconstruct_density(qm, levels=2)


# ---------------------------------------------------------------------------
# grid files

def test_marginal_csv_round_trip(tmp_path):
    rng = np.random.default_rng(55)
    rho = _random_density(rng, 3)
    x = np.linspace(-5, 5, 41)
    qm = marginal_grid(rho, x, default_circle_frames(8))
    qm.meta["levels"] = 3
    path = tmp_path / "marg.csv"
    write_marginal_csv(path, qm)
    back = read_marginal_csv(path)
    np.testing.assert_array_equal(back.x, qm.x)
    np.testing.assert_array_equal(back.values, qm.values)
    assert back.frames == qm.frames
    assert back.meta["levels"] == 3
    # byte-stable: writing the parsed object reproduces the file
    path2 = tmp_path / "again.csv"
    back.meta = {k: back.meta[k] for k in qm.meta}  # writer re-adds derived keys
    write_marginal_csv(path2, back)
    assert path2.read_bytes() == path.read_bytes()


def test_marginal_csv_errors_carry_line_numbers(tmp_path):
    rng = np.random.default_rng(56)
    qm = marginal_grid(_random_density(rng, 2), np.linspace(-4, 4, 9),
                       default_circle_frames(4))
    path = tmp_path / "marg.csv"
    write_marginal_csv(path, qm)
    lines = path.read_text().splitlines()
    lines[4] = "0.1,bad,0.3,0.4"
    bad = tmp_path / "bad.csv"
    bad.write_text("\n".join(lines) + "\n")
    with pytest.raises(ValueError, match=r"bad\.csv: line 5"):
        read_marginal_csv(bad)
    nohdr = tmp_path / "nohdr.csv"
    nohdr.write_text("x,mu,nu,w\n0,1,0,0.5\n")
    with pytest.raises(ValueError, match="line 1"):
        read_marginal_csv(nohdr)


def test_quadrature_marginal_diagnostics():
    rng = np.random.default_rng(57)
    rho = _random_density(rng, 3)
    qm = marginal_grid(rho, np.linspace(-8, 8, 321), default_circle_frames(8))
    assert np.abs(qm.normalization_defects()).max() < 1e-8
    assert qm.min_value() > -1e-10
