"""Runnable invariant suites behind the command-line ``verify`` command.

Each suite re-derives a set of identities with fixed random seeds and compares
the library's fast paths against closed forms or the brute-force oracle.  The
functions return :class:`CheckResult` records rather than printing, so callers
can render them as text or JSON.  Tolerances come in two profiles: ``default``
mirrors the documented contract of each module, ``strict`` tightens to roughly
an order of magnitude above the errors measured on the reference platform.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from . import landau as ll
from . import oracle
from .pauli_evolution import (
    EvolutionProblem,
    HamiltonianSpec,
    HybridFrame,
    HybridMarginal,
    ThetaOperator,
    analytic_landau_solution,
    analytic_trapped_solution,
    circle_lattice,
    circle_marginal_from_density,
    evolve,
    fit_oscillation_rate,
    free_rhs,
    landau_initial_marginal,
    landau_rect_rhs,
    spin_rhs,
    trapped_initial_marginal,
    trapped_rhs,
)
from .qstate import BasisDescriptor, DensityMatrix, PureState, density_from_pure
from .specfun import (
    HalfInt,
    HermiteMatrixParam,
    hermite_multivar,
    wigner_3j,
    wigner_D_matrix,
    wigner_small_d,
)
from .spintomo import (
    EulerFrame,
    SpinMarginal,
    reconstruct_spin_density,
    rotation_matrix,
    sphere_lattice,
    spin_marginal,
    spin_marginal_grid,
)
from .symtomo import (
    SymplecticFrame,
    default_circle_frames,
    marginal_1d,
    marginal_grid,
    reconstruct_density,
    two_mode_marginal_grid,
)

SUITE_NAMES = ("specfun", "symtomo", "spintomo", "evolution", "landau")
PROFILES = ("default", "strict")

UP, DOWN = HalfInt(1), HalfInt(-1)


@dataclass(frozen=True)
class CheckResult:
    """Outcome of one invariant check."""

    suite: str
    name: str
    value: float
    tolerance: float
    seconds: float

    @property
    def passed(self) -> bool:
        return self.value < self.tolerance

    def as_dict(self) -> dict:
        return {
            "suite": self.suite,
            "name": self.name,
            "value": float(self.value),
            "tolerance": float(self.tolerance),
            "passed": bool(self.passed),
            "seconds": round(float(self.seconds), 3),
        }


class _Recorder:
    def __init__(self, suite: str, profile: str):
        if profile not in PROFILES:
            raise ValueError(f"unknown tolerance profile {profile!r}")
        self.suite = suite
        self.strict = profile == "strict"
        self.results: list[CheckResult] = []
        self._t0 = time.perf_counter()

    def add(self, name: str, value: float, default_tol: float, strict_tol: float):
        now = time.perf_counter()
        tol = strict_tol if self.strict else default_tol
        self.results.append(
            CheckResult(self.suite, name, float(value), tol, now - self._t0)
        )
        self._t0 = now


def _random_density(rng, dim: int) -> np.ndarray:
    m = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = m @ m.conj().T
    return rho / np.trace(rho).real


def _random_spin_density(rng, j: HalfInt) -> DensityMatrix:
    dim = j.twice + 1
    return DensityMatrix(BasisDescriptor.spin(j), _random_density(rng, dim))


def _random_fock_density(rng, levels: int) -> DensityMatrix:
    return DensityMatrix(BasisDescriptor.fock(levels), _random_density(rng, levels))


# --------------------------------------------------------------------------
# specfun
# --------------------------------------------------------------------------

def specfun_suite(profile: str = "default") -> list[CheckResult]:
    rec = _Recorder("specfun", profile)
    rng = np.random.default_rng(1101)
    js = [HalfInt(t) for t in range(7)]  # every j <= 3

    err = 0.0
    for _ in range(20):
        al, ga = rng.uniform(0.0, 2.0 * math.pi, size=2)
        be = rng.uniform(0.0, math.pi)
        for j in js:
            D = wigner_D_matrix(j, al, be, ga)
            sq = D.real**2 + D.imag**2
            err = max(err, np.abs(sq.sum(axis=0) - 1.0).max(),
                      np.abs(sq.sum(axis=1) - 1.0).max(),
                      np.abs(D @ D.conj().T - np.eye(j.twice + 1)).max())
    rec.add("rotation_matrix_unitarity", err, 1e-12, 1e-13)

    j = HalfInt(3)
    err = 0.0
    for _ in range(6):
        b1, b2 = rng.uniform(0.0, math.pi, size=2)
        d1 = np.array([[wigner_small_d(j, HalfInt(mp), HalfInt(m), b1)
                        for m in range(3, -5, -2)] for mp in range(3, -5, -2)])
        d2 = np.array([[wigner_small_d(j, HalfInt(mp), HalfInt(m), b2)
                        for m in range(3, -5, -2)] for mp in range(3, -5, -2)])
        d12 = np.array([[wigner_small_d(j, HalfInt(mp), HalfInt(m), b1 + b2)
                         for m in range(3, -5, -2)] for mp in range(3, -5, -2)])
        err = max(err, np.abs(d1 @ d2 - d12).max())
    rec.add("small_d_composition", err, 1e-10, 1e-13)

    err = 0.0
    for j in js:
        al, ga = rng.uniform(0.0, 2.0 * math.pi, size=2)
        be = rng.uniform(0.0, math.pi)
        D = wigner_D_matrix(j, al, be, ga)
        n = j.twice + 1
        for p in range(n):
            for q in range(n):
                mp, m = j.twice - 2 * p, j.twice - 2 * q
                sign = -1.0 if ((mp - m) // 2) % 2 else 1.0
                err = max(err, abs(np.conj(D[p, q]) - sign * D[n - 1 - p, n - 1 - q]))
    rec.add("conjugation_symmetry", err, 1e-12, 1e-13)

    # Full orthogonality: the Gram matrix of (j3, m3) rows under
    # Sum_{m1,m2} (2 j3 + 1) W W' must be the identity (cross terms with
    # m3 != m3' vanish through the projection selection rule).
    err = 0.0
    for j1, j2 in ((HalfInt(2), HalfInt(2)), (HalfInt(3), HalfInt(1)), (HalfInt(4), HalfInt(2))):
        lo, hi = abs(j1.twice - j2.twice), j1.twice + j2.twice
        labels = [(j3t, m3t) for j3t in range(lo, hi + 1, 2)
                  for m3t in range(-j3t, j3t + 1, 2)]
        gram = np.zeros((len(labels), len(labels)))
        for a, (j3t, m3t) in enumerate(labels):
            for b, (k3t, n3t) in enumerate(labels):
                total = 0.0
                for m1t in range(-j1.twice, j1.twice + 1, 2):
                    for m2t in range(-j2.twice, j2.twice + 1, 2):
                        va = wigner_3j(j1, j2, HalfInt(j3t), HalfInt(m1t),
                                       HalfInt(m2t), HalfInt(m3t))
                        if va == 0.0:
                            continue
                        vb = wigner_3j(j1, j2, HalfInt(k3t), HalfInt(m1t),
                                       HalfInt(m2t), HalfInt(n3t))
                        total += (j3t + 1) * va * vb
                gram[a, b] = total
        err = max(err, np.abs(gram - np.eye(len(labels))).max())
    rec.add("threej_orthogonality", err, 1e-12, 1e-13)

    # Generating-function identity: Taylor coefficients of
    # exp(-a^T M a / 2 + a^T M zeta) on a small polydisk, extracted by FFT,
    # must equal H_n(zeta) / n!.  Small radius and moderate matrix entries
    # keep the aliased order-(n+npts) coefficients below the tolerance.
    err = 0.0
    for _ in range(3):
        sym = 0.4 * rng.normal(size=(2, 2))
        m = HermiteMatrixParam(sym + sym.T + 2.0 * np.eye(2))
        zeta = 0.5 * (rng.normal(size=2) + 1j * rng.normal(size=2))
        npts, radius = 32, 0.35
        angles = 2.0 * math.pi * np.arange(npts) / npts
        a1 = radius * np.exp(1j * angles)
        g = np.empty((npts, npts), dtype=complex)
        for p in range(npts):
            for q in range(npts):
                a = np.array([a1[p], a1[q]])
                g[p, q] = np.exp(-0.5 * a @ m.matrix @ a + a @ m.matrix @ zeta)
        coeffs = np.fft.fft2(g) / npts**2
        for n1 in range(3):
            for n2 in range(3):
                got = coeffs[n1, n2] / radius ** (n1 + n2)
                want = hermite_multivar(m, (n1, n2), zeta) / (
                    math.factorial(n1) * math.factorial(n2)
                )
                err = max(err, abs(got - want))
    rec.add("hermite_generating_function", err, 1e-8, 1e-9)
    return rec.results


# --------------------------------------------------------------------------
# symtomo
# --------------------------------------------------------------------------

def symtomo_suite(profile: str = "default") -> list[CheckResult]:
    rec = _Recorder("symtomo", profile)
    rng = np.random.default_rng(2202)

    x = np.linspace(-6.0, 6.0, 64)
    thetas = 2.0 * math.pi * np.arange(16) / 16
    err = 0.0
    for n in (0, 1):
        rho = np.zeros((2, 2))
        rho[n, n] = 1.0
        dm = DensityMatrix(BasisDescriptor.fock(2), rho)
        for th in thetas:
            fr = SymplecticFrame(math.cos(th), math.sin(th))
            w = marginal_1d(dm, x, fr)
            gauss = np.exp(-(x**2)) / math.sqrt(math.pi)
            ref = gauss if n == 0 else 2.0 * x**2 * gauss
            err = max(err, np.abs(w - ref).max())
    rec.add("fock_closed_forms", err, 1e-6, 1e-11)

    xw = np.linspace(-12.0, 12.0, 481)
    err = 0.0
    for _ in range(200):
        dm = _random_fock_density(rng, int(rng.integers(2, 7)))
        fr = SymplecticFrame(rng.uniform(-1.2, 1.2), rng.uniform(-1.2, 1.2))
        if fr.mu**2 + fr.nu**2 < 0.09:
            fr = SymplecticFrame(1.0, fr.nu)
        w = marginal_1d(dm, xw, fr)
        err = max(err, abs(np.trapezoid(w, xw) - 1.0))
    rec.add("normalization", err, 1e-8, 1e-9)

    xs = np.linspace(-2.0, 2.0, 9)
    err = 0.0
    for _ in range(200):
        dm = _random_fock_density(rng, int(rng.integers(2, 7)))
        fr = SymplecticFrame(rng.uniform(-1.2, 1.2), rng.uniform(-1.2, 1.2))
        if fr.mu**2 + fr.nu**2 < 0.09:
            fr = SymplecticFrame(1.0, fr.nu)
        lam = rng.uniform(0.4, 2.5) * rng.choice([-1.0, 1.0])
        w = marginal_1d(dm, xs, fr)
        w_scaled = marginal_1d(dm, lam * xs, SymplecticFrame(lam * fr.mu, lam * fr.nu))
        err = max(err, np.abs(w_scaled - w / abs(lam)).max())
    rec.add("homogeneity", err, 1e-10, 1e-12)

    frames = default_circle_frames()
    xr = np.linspace(-7.0, 7.0, 241)
    err = 0.0
    for _ in range(3):
        dm = _random_fock_density(rng, 4)
        qm = marginal_grid(dm, xr, frames)
        rec_dm = reconstruct_density(qm, levels=4)
        err = max(err, np.abs(rec_dm.entries - dm.entries).max())
    rec.add("reconstruction_round_trip", err, 1e-3, 5e-4)
    return rec.results


# --------------------------------------------------------------------------
# spintomo
# --------------------------------------------------------------------------

def spintomo_suite(profile: str = "default") -> list[CheckResult]:
    rec = _Recorder("spintomo", profile)
    rng = np.random.default_rng(3303)
    half = HalfInt(1)

    betas = np.linspace(0.0, math.pi, 32)
    up = DensityMatrix(BasisDescriptor.spin(half), np.diag([1.0, 0.0]))
    err = 0.0
    for be in betas:
        w = spin_marginal(up, EulerFrame(0.9, be))
        err = max(err, abs(w[0] - math.cos(be / 2.0) ** 2))
        err = max(err, abs(w[1] - math.sin(be / 2.0) ** 2))
    rec.add("spin_half_beta_sweep", err, 1e-12, 1e-13)

    err = 0.0
    for _ in range(200):
        j = HalfInt(int(rng.integers(1, 5)))
        dm = _random_spin_density(rng, j)
        fr = EulerFrame(rng.uniform(0.0, 2.0 * math.pi), rng.uniform(0.0, math.pi))
        err = max(err, abs(spin_marginal(dm, fr).sum() - 1.0))
    rec.add("sum_rule", err, 1e-12, 1e-13)

    err = 0.0
    for j in (HalfInt(1), HalfInt(2), HalfInt(3), HalfInt(4)):
        frames, weights = sphere_lattice()
        for _ in range(5):
            dm = _random_spin_density(rng, j)
            marg = spin_marginal_grid(dm, frames, weights)
            rec_dm = reconstruct_spin_density(marg)
            err = max(err, np.abs(rec_dm.entries - dm.entries).max())
    rec.add("reconstruction_round_trip", err, 1e-8, 1e-10)

    err = 0.0
    for _ in range(12):
        j = HalfInt(int(rng.integers(1, 5)))
        fr = EulerFrame(rng.uniform(0.0, 2.0 * math.pi), rng.uniform(0.0, math.pi),
                        rng.uniform(0.0, 2.0 * math.pi))
        R = rotation_matrix(j, fr)
        err = max(err, np.abs(R @ R.conj().T - np.eye(j.twice + 1)).max())
    rec.add("rotation_unitarity", err, 1e-12, 1e-13)
    return rec.results


# --------------------------------------------------------------------------
# evolution
# --------------------------------------------------------------------------

def _coherent_fock_density(alpha0: float, levels: int) -> DensityMatrix:
    ns = np.arange(levels)
    v = alpha0**ns / np.sqrt(
        np.array([math.factorial(int(n)) for n in ns], dtype=float)
    )
    v = v / np.linalg.norm(v)
    return density_from_pure(PureState(BasisDescriptor.fock(levels), v.astype(complex)))


def evolution_suite(profile: str = "default") -> list[CheckResult]:
    rec = _Recorder("evolution", profile)
    sphere = sphere_lattice(4, 4)
    fr_s, wt_s = sphere

    # Spin rotation term against its first-harmonic closed form.
    frames8, weights8 = sphere_lattice(8, 8)
    alphas = np.array([f.alpha for f in frames8])
    betas = np.array([f.beta for f in frames8])
    w_up = 0.25 * (1.0 + np.cos(alphas) * np.sin(betas))
    sm = SpinMarginal(j=HalfInt(1), frames=frames8,
                      values=np.stack([w_up, 1.0 - w_up], axis=1), weights=weights8)
    rhs = spin_rhs(sm, 1.3, -0.7)
    expected = 2.0 * np.sin(betas) * np.sin(alphas) / 4.0
    err = max(np.abs(rhs[:, 0] - expected).max(), np.abs(rhs.sum(axis=1)).max())
    rec.add("spin_rotation_rhs", err, 1e-10, 1e-12)

    # Stationary trapped components have vanishing rhs; the coherence
    # component oscillates at the level-gap rate 3.
    x_g = np.linspace(-2.0, 2.0, 5)
    mu_g = np.linspace(0.7, 1.5, 81)
    X, MU, NU = np.meshgrid(x_g, mu_g, mu_g, indexing="ij")
    r2 = MU**2 + NU**2
    g = np.exp(-(X**2) / r2)
    w00 = g / np.sqrt(math.pi * r2)
    w11 = 2.0 * X**2 * g / np.sqrt(math.pi * r2**3)
    w01 = math.sqrt(2.0) * X * (MU + 1j * NU) * g / np.sqrt(math.pi * r2**3)
    D = np.stack([rotation_matrix(HalfInt(1), f) for f in fr_s])
    d_plus, d_minus = D[:, :, 0], D[:, :, 1]

    def rect_marg(spatial, spinfac):
        vals = 0.5 * spinfac[:, :, None, None, None] * spatial[None, None]
        return HybridMarginal(kind="rect", values=vals, x=(x_g,),
                              frame_grids=(mu_g, mu_g), spin=HalfInt(1),
                              sphere_frames=fr_s, sphere_weights=wt_s)

    m00 = rect_marg(w00, np.abs(d_minus.T) ** 2)
    m11 = rect_marg(w11, np.abs(d_plus.T) ** 2)
    m01 = rect_marg(w01, (d_minus * np.conj(d_plus)).T)
    err = max(np.abs(trapped_rhs(m00)).max(), np.abs(trapped_rhs(m11)).max())
    rec.add("trapped_component_stationarity", err, 1e-6, 5e-7)
    rec.add("trapped_cross_rate",
            np.abs(trapped_rhs(m01) - 3j * m01.values).max(), 1e-6, 1e-7)

    # Free motion: oracle-evolved coherent state satisfies the transport
    # equation with a centered finite-difference time derivative.
    rho_free = _coherent_fock_density(0.8, 48)
    x_r = np.linspace(-6.0, 6.0, 25)
    mu_r = np.linspace(0.6, 1.4, 5)
    nu_r = np.linspace(-0.5, 0.5, 41)
    ham_f = HamiltonianSpec("free")

    def marginal_fn(t):
        rho_t = oracle.vonneumann_evolve(rho_free, ham_f, [t]).states[0]
        out = np.empty((x_r.size, mu_r.size, nu_r.size))
        for a_i, mu in enumerate(mu_r):
            for b_i, nu in enumerate(nu_r):
                out[:, a_i, b_i] = oracle.direct_marginal(
                    rho_t, x_r, frames=[SymplecticFrame(mu, nu)])
        return out

    def rhs_fn(w, t):
        return free_rhs(HybridMarginal(kind="rect", values=w, x=(x_r,),
                                       frame_grids=(mu_r, nu_r)))

    resid = oracle.residual_check(marginal_fn, rhs_fn, t=0.25, h=0.01)
    rec.add("free_motion_residual", resid, 1e-5, 8e-6)

    # Residual identity: the analytic trapped solution satisfies the lattice
    # equation at an interior time.
    phis, y = circle_lattice(16, 64)
    vals = np.empty((2, len(fr_s), phis.size, y.size))
    dvals = np.empty_like(vals)
    for i, phi in enumerate(phis):
        sym = (SymplecticFrame(math.cos(phi), math.sin(phi)),)
        for k, e in enumerate(fr_s):
            hf = HybridFrame(sym, e)
            for si, s in enumerate((UP, DOWN)):
                vals[si, k, i] = analytic_trapped_solution(y, hf, s, 0.6)
                dvals[si, k, i] = (
                    analytic_trapped_solution(y, hf, s, 0.6 + 5e-4)
                    - analytic_trapped_solution(y, hf, s, 0.6 - 5e-4)
                ) / 1e-3
    marg_t = HybridMarginal(kind="circle", values=vals, time=0.6, y=y, phis=phis,
                            spin=HalfInt(1), sphere_frames=fr_s, sphere_weights=wt_s)
    rec.add("trapped_residual_identity",
            np.abs(trapped_rhs(marg_t) - dvals).max(), 1e-5, 1e-6)

    # Pointwise two-frame kernel application for all three Hamiltonian kinds.
    err = 0.0
    op_free = ThetaOperator(HamiltonianSpec("free"))
    for mu, nu, xv in [(1.0, 0.3, 0.7), (0.8, -0.5, -1.2)]:
        hf = HybridFrame((SymplecticFrame(mu, nu),))
        r2p = mu * mu + nu * nu

        def fock0(xq, hfq, sq):
            (f,) = hfq.symplectic
            rr = f.mu**2 + f.nu**2
            return np.exp(-(np.asarray(xq) ** 2) / rr) / math.sqrt(math.pi * rr)

        w = math.exp(-(xv**2) / r2p) / math.sqrt(math.pi * r2p)
        want = mu * w * (2.0 * xv**2 * nu / r2p**2 - nu / r2p)
        err = max(err, abs(op_free.apply(fock0, xv, hf, None) - want))

    op_tr = ThetaOperator(HamiltonianSpec("trapped"), sphere=sphere_lattice(8, 8))

    def wini(xq, hfq, sq):
        return analytic_trapped_solution(xq, hfq, sq, 0.0)

    for mu, nu, xv, e, s in [(1.0, 0.0, 0.6, EulerFrame(0.4, 1.1), UP),
                             (0.7, 0.6, -0.9, EulerFrame(2.0, 0.5), DOWN)]:
        hf = HybridFrame((SymplecticFrame(mu, nu),), e)
        dt_true = (analytic_trapped_solution(xv, hf, s, 1e-3)
                   - analytic_trapped_solution(xv, hf, s, -1e-3)) / 2e-3
        err = max(err, abs(op_tr.apply(wini, xv, hf, s) - dt_true))

    op_ll = ThetaOperator(HamiltonianSpec("landau"), sphere=sphere_lattice(8, 8))

    def wll(xp, hfq, sv):
        return analytic_landau_solution(xp[0], xp[1], hfq, sv, 0.0)

    for f1, f2, e, xv, s in [
        ((1.3, 0.7), (0.8, 1.2), EulerFrame(0.8, 0.9), (0.7, -0.4), UP),
    ]:
        hf = HybridFrame((SymplecticFrame(*f1), SymplecticFrame(*f2)), e)
        dt_true = (analytic_landau_solution(xv[0], xv[1], hf, s, 5e-4)
                   - analytic_landau_solution(xv[0], xv[1], hf, s, -5e-4)) / 1e-3
        err = max(err, abs(op_ll.apply(wll, xv, hf, s) - dt_true))
    rec.add("theta_pointwise", err, 1e-5, 1e-6)

    # Reduced-lattice trapped evolution against the analytic solution,
    # including conservation, positivity, and the coherence beat rate.
    phis, y = circle_lattice(32, 96)
    init = trapped_initial_marginal(32, y, sphere)
    times = tuple(np.linspace(0.0, 1.0, 17))
    res = evolve(EvolutionProblem(HamiltonianSpec("trapped"), init, times))
    err = 0.0
    for snap in (res.snapshots[8], res.snapshots[16]):
        ref = np.empty_like(snap.values)
        for i, phi in enumerate(snap.phis):
            sym = (SymplecticFrame(math.cos(phi), math.sin(phi)),)
            for k, e in enumerate(snap.sphere_frames):
                hf = HybridFrame(sym, e)
                for si, s in enumerate((UP, DOWN)):
                    ref[si, k, i] = analytic_trapped_solution(snap.y, hf, s, snap.time)
        err = max(err, np.abs(snap.values - ref).max())
    rec.add("trapped_evolution_error", err, 1e-3, 1e-4)
    rec.add("trapped_evolution_conservation", res.norm_drift, 1e-5, 1e-12)
    rec.add("trapped_evolution_min_value",
            max(0.0, -min(s.min_value() for s in res.snapshots)), 1e-6, 1e-9)

    sb = np.sin(np.array([f.beta for f in init.sphere_frames]))
    ea = np.exp(-1j * np.array([f.alpha for f in init.sphere_frames]))
    series = []
    for snap in res.snapshots:
        m = np.einsum("k,skiy->siy", init.sphere_weights * sb * ea,
                      snap.values.astype(complex))
        series.append(np.einsum("y,y->", snap.y * np.exp(-snap.y**2), m[0, 0]))
    rate = abs(fit_oscillation_rate(times, np.array(series)))
    rec.add("trapped_evolution_beat_rate", abs(rate - 3.0), 1e-2, 1e-3)

    # Free-motion closure on the circle lattice against the exact
    # label-transported Gaussian.
    rho0 = _coherent_fock_density(0.0, 4)
    marg0 = circle_marginal_from_density(rho0, 32, y)
    res_f = evolve(EvolutionProblem(HamiltonianSpec("free"), marg0, (1.0,)))
    snap = res_f.snapshots[0]
    r2t = np.cos(snap.phis) ** 2 + (np.sin(snap.phis) + np.cos(snap.phis)) ** 2
    ref = np.exp(-(snap.y[None, :] ** 2) / r2t[:, None]) / np.sqrt(math.pi * r2t[:, None])
    rec.add("free_transport", np.abs(snap.values - ref).max(), 1e-3, 5e-4)
    return rec.results


# --------------------------------------------------------------------------
# landau
# --------------------------------------------------------------------------

def landau_suite(profile: str = "default") -> list[CheckResult]:
    rec = _Recorder("landau", profile)
    rng = np.random.default_rng(5505)
    x1 = np.linspace(-3.0, 3.0, 17)
    x2 = np.linspace(-3.0, 3.0, 17)

    err = 0.0
    fr = ll.TwoModeFrame(0.3, 1.2, -0.7, 0.9)
    for n, n_p in ((0, 0), (1, 0), (1, 1)):
        w = ll.landau_level_marginal(n, n_p, x1[:, None], x2[None, :], fr)
        rho = density_from_pure(ll.landau_number_state(n, n_p, 8))
        ref = two_mode_marginal_grid(rho, x1, x2,
                                     SymplecticFrame(fr.mu1, fr.nu1),
                                     SymplecticFrame(fr.mu2, fr.nu2))
        err = max(err, np.abs(w - ref).max())
    rec.add("level_marginals", err, 1e-6, 1e-10)

    err_min, err_norm = 0.0, 0.0
    xg = np.linspace(-8.0, 8.0, 161)
    for _ in range(4):
        n, n_p = int(rng.integers(0, 3)), int(rng.integers(0, 3))
        r = rng.uniform(0.6, 1.4, size=2)
        tau = rng.uniform(0.0, 2.0 * math.pi, size=2)
        frd = ll.TwoModeFrame(r[0] * math.cos(tau[0]), r[0] * math.sin(tau[0]),
                              r[1] * math.cos(tau[1]), r[1] * math.sin(tau[1]))
        w = ll.landau_level_marginal(n, n_p, xg[:, None], xg[None, :], frd)
        err_min = max(err_min, -float(w.min()))
        err_norm = max(err_norm, abs(np.trapezoid(np.trapezoid(w, xg, axis=1), xg) - 1.0))
    rec.add("diagonal_min_value", err_min, 1e-10, 1e-12)
    rec.add("diagonal_normalization", err_norm, 1e-6, 1e-8)

    # Coherent resummation: the coherent-amplitude-weighted component sum
    # reproduces the closed-form coherent-state marginal.
    alpha, beta = 0.45 + 0.2j, -0.3 + 0.35j
    params = ll.LandauCoherentParams(alpha, beta)
    xs = np.linspace(-1.5, 1.5, 5)
    target = ll.coherent_marginal(params, xs, xs, fr) * math.exp(
        abs(alpha) ** 2 + abs(beta) ** 2)
    total = np.zeros(xs.size, dtype=complex)
    cap = 8
    fact = [math.factorial(k) for k in range(cap + 1)]
    for n1 in range(cap + 1):
        for n2 in range(cap + 1):
            for p1 in range(cap + 1):
                for p2 in range(cap + 1):
                    if n1 + n2 + p1 + p2 > 2 * cap:
                        continue
                    comp = ll.fock_marginal_components((n1, n2, p1, p2), xs, xs, fr)
                    total += (alpha**n1 * np.conj(alpha) ** n2
                              * beta**p1 * np.conj(beta) ** p2 * comp
                              / math.sqrt(fact[n1] * fact[n2] * fact[p1] * fact[p2]))
    rec.add("coherent_resummation", np.abs(total - target).max(), 1e-6, 5e-7)

    # Two-mode evolved entangled state against the dense propagator.
    f8 = BasisDescriptor.fock(8)
    spin_b = BasisDescriptor.spin(HalfInt(1))
    psi00 = ll.landau_number_state(0, 0, 8)
    psi10 = ll.landau_number_state(1, 0, 8)
    amp = np.zeros((64, 2), dtype=complex)
    amp[:, 1] = psi00.amplitudes / math.sqrt(2.0)
    amp[:, 0] = psi10.amplitudes / math.sqrt(2.0)
    rho_ll = density_from_pure(
        PureState(BasisDescriptor.product(f8, f8, spin_b), amp.reshape(-1)))
    rho_t = oracle.vonneumann_evolve(rho_ll, HamiltonianSpec("landau"), [0.4]).states[0]
    xg = np.linspace(-2.5, 2.5, 9)
    err = 0.0
    for f1, f2, e in [((1.0, 0.0), (1.0, 0.0), EulerFrame(0.8, 0.9)),
                      ((0.6, -0.8), (1.1, 0.5), EulerFrame(4.0, 2.1))]:
        fr1, fr2 = SymplecticFrame(*f1), SymplecticFrame(*f2)
        w_or = oracle.direct_marginal(rho_t, (xg, xg), frames=[fr1, fr2], euler=e)
        hf = HybridFrame((fr1, fr2), e)
        for si, s in enumerate((UP, DOWN)):
            w_an = analytic_landau_solution(xg[:, None], xg[None, :], hf, s, 0.4)
            err = max(err, np.abs(w_or[:, :, si] - w_an).max())
    rec.add("two_mode_solution_vs_oracle", err, 1e-4, 1e-8)

    # Mode-mixing lattice equation at the frame-lattice interior.
    sph33 = sphere_lattice(3, 3)
    fr33, _ = sph33
    xg = np.linspace(-6.0, 6.0, 33)
    fg = tuple(np.linspace(0.7, 1.3, 5) for _ in range(4))
    marg_ll = landau_initial_marginal(xg, xg, fg, sphere=sph33)
    rhs_ll = landau_rect_rhs(marg_ll)
    dref = np.empty((2, len(fr33), xg.size, xg.size))
    sym = (SymplecticFrame(1.0, 1.0), SymplecticFrame(1.0, 1.0))
    for k, e in enumerate(fr33):
        hf = HybridFrame(sym, e)
        for si, s in enumerate((UP, DOWN)):
            dref[si, k] = (
                analytic_landau_solution(xg[:, None], xg[None, :], hf, s, 5e-4)
                - analytic_landau_solution(xg[:, None], xg[None, :], hf, s, -5e-4)
            ) / 1e-3
    rec.add("mixing_rhs_interior",
            np.abs(rhs_ll[:, :, :, :, 2, 2, 2, 2] - dref).max(), 1e-3, 8e-4)
    return rec.results


SUITES = {
    "specfun": specfun_suite,
    "symtomo": symtomo_suite,
    "spintomo": spintomo_suite,
    "evolution": evolution_suite,
    "landau": landau_suite,
}


def run_suite(name: str, profile: str = "default") -> list[CheckResult]:
    """Run one named suite, or every suite for ``name == "all"``."""
    if name == "all":
        out: list[CheckResult] = []
        for key in SUITE_NAMES:
            out.extend(SUITES[key](profile))
        return out
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; expected one of "
                       f"{', '.join(SUITE_NAMES + ('all',))}")
    return SUITES[name](profile)
