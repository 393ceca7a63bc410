"""Independent reference dynamics and marginals for cross-validation.

Everything here is deliberately built from different primitives than the
production paths: Hamiltonians as dense matrices diagonalized once, rotation
matrices through matrix exponentials of angular-momentum generators, harmonic
eigenfunctions through the numpy Hermite-series evaluator, and overlap
integrals through Simpson quadrature. Agreement between this module and the
tomography/evolution modules is therefore a genuine two-route check, not a
tautology.

State evolution follows d rho / dt = i [rho, H], i.e. rho(t) = U rho U^dag
with U = exp(-i H t).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.hermite import hermval
from scipy.integrate import simpson
from scipy.linalg import expm

from .qstate import BasisDescriptor, DensityMatrix

__all__ = [
    "PropagatorResult",
    "build_hamiltonian",
    "vonneumann_evolve",
    "oracle_rotation",
    "direct_marginal",
    "time_derivative",
    "residual_check",
]

#: Fock truncation per Hamiltonian kind (per mode for multimode kinds).
#: Free motion squeezes the state across many levels, hence the deep ladder.
ORACLE_FOCK_LEVELS = {"free": 48, "trapped": 16, "landau": 8}


@dataclass
class PropagatorResult:
    times: np.ndarray
    states: list
    basis: BasisDescriptor
    unitarity_defect: float
    leakage: float


def _ladder(n: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, n)), 1)


def _sigma_z() -> np.ndarray:
    return np.diag([1.0, -1.0])  # spin basis ordered m = +1/2, -1/2


def build_hamiltonian(spec):
    """Dense Hamiltonian and its basis for a dynamics descriptor.

    spec needs attributes kind ('free' | 'spin_diag' | 'trapped' | 'landau')
    and params (dict). Truncations follow ORACLE_FOCK_LEVELS.
    """
    kind = spec.kind
    params = dict(spec.params or {})
    if kind == "free":
        n = int(params.get("levels", ORACLE_FOCK_LEVELS["free"]))
        a = _ladder(n)
        ad = a.T
        num = np.diag(np.arange(n, dtype=float))
        p2 = num + 0.5 * np.eye(n) - 0.5 * (a @ a + ad @ ad)
        return 0.5 * p2, BasisDescriptor.fock(n)
    if kind == "spin_diag":
        a_level = float(params["a"])
        c_level = float(params["c"])
        return np.diag([a_level, c_level]).astype(complex), BasisDescriptor.spin(0.5)
    if kind == "trapped":
        n = int(params.get("levels", ORACLE_FOCK_LEVELS["trapped"]))
        hosc = np.diag(np.arange(n) + 0.5)
        H = np.kron(hosc, np.eye(2)) + np.kron(np.eye(n), _sigma_z())
        basis = BasisDescriptor.product(BasisDescriptor.fock(n), BasisDescriptor.spin(0.5))
        return H.astype(complex), basis
    if kind == "landau":
        n = int(params.get("levels", ORACLE_FOCK_LEVELS["landau"]))
        a = _ladder(n)
        ad = a.T
        num = ad @ a
        eye = np.eye(n)
        hsp = np.kron(num, eye) + np.kron(eye, num) + np.kron(eye, eye)
        lz = 1j * (np.kron(a, ad) - np.kron(ad, a))
        hsp = hsp - lz
        H = np.kron(hsp, np.eye(2)) + np.kron(np.eye(n * n), _sigma_z())
        basis = BasisDescriptor.product(
            BasisDescriptor.fock(n), BasisDescriptor.fock(n), BasisDescriptor.spin(0.5)
        )
        return H, basis
    raise ValueError(f"unknown dynamics kind {kind!r}")


def _embed(rho: np.ndarray, src: BasisDescriptor, dst: BasisDescriptor) -> np.ndarray:
    """Pad a density matrix into a larger Fock truncation (per factor)."""
    if src.dim == dst.dim:
        return rho.astype(complex)
    sf = src.factors if src.kind == "product" else (src,)
    df = dst.factors if dst.kind == "product" else (dst,)
    if len(sf) != len(df):
        raise ValueError("basis structures do not match")
    idx = np.zeros(src.dim, dtype=int)
    # row index of each source basis vector inside the destination basis
    stride_d = np.ones(len(df), dtype=int)
    for k in range(len(df) - 2, -1, -1):
        stride_d[k] = stride_d[k + 1] * df[k + 1].dim
    src_shapes = [f.dim for f in sf]
    for flat in range(src.dim):
        rem = flat
        pos = 0
        for k, (fs, fd) in enumerate(zip(sf, df)):
            i = rem // int(np.prod(src_shapes[k + 1 :])) if k + 1 < len(sf) else rem
            rem = rem - i * int(np.prod(src_shapes[k + 1 :])) if k + 1 < len(sf) else 0
            if fs.kind != fd.kind or i >= fd.dim:
                raise ValueError("state does not fit inside the oracle basis")
            pos += i * stride_d[k]
        idx[flat] = pos
    out = np.zeros((dst.dim, dst.dim), dtype=complex)
    out[np.ix_(idx, idx)] = rho
    return out


def _leak_indices(basis: BasisDescriptor) -> np.ndarray:
    """Flat indices whose Fock label (any mode) sits on the truncation edge.

    The edge band is two levels deep so parity-preserving dynamics cannot
    hide in an empty top level.
    """
    factors = basis.factors if basis.kind == "product" else (basis,)
    dims = [f.dim for f in factors]
    grids = np.meshgrid(*[np.arange(d) for d in dims], indexing="ij")
    edge = np.zeros(grids[0].shape, dtype=bool)
    for f, g in zip(factors, grids):
        if f.kind == "fock":
            edge |= g >= f.dim - 2
    return np.flatnonzero(edge.ravel())


def vonneumann_evolve(state: DensityMatrix, spec, times) -> PropagatorResult:
    """Exact evolution rho(t) = e^{-iHt} rho e^{iHt} by eigendecomposition."""
    if isinstance(spec, np.ndarray):
        H, basis = spec, state.basis
    else:
        H, basis = build_hamiltonian(spec)
    herm = np.max(np.abs(H - H.conj().T))
    if herm > 1e-12:
        raise ValueError(f"Hamiltonian not Hermitian (defect {herm:.2e})")
    rho0 = _embed(state.entries, state.basis, basis)
    evals, V = np.linalg.eigh(H)
    times = np.atleast_1d(np.asarray(times, dtype=float))
    leak_idx = _leak_indices(basis)
    states = []
    udef = 0.0
    leak = 0.0
    for t in times:
        U = (V * np.exp(-1j * evals * t)) @ V.conj().T
        udef = max(udef, float(np.max(np.abs(U @ U.conj().T - np.eye(basis.dim)))))
        rt = U @ rho0 @ U.conj().T
        if leak_idx.size:
            leak = max(leak, float(np.sum(np.real(np.diag(rt)[leak_idx]))))
        states.append(DensityMatrix(basis, (rt + rt.conj().T) / 2.0, tol=1e-9))
    return PropagatorResult(
        times=times, states=states, basis=basis, unitarity_defect=udef, leakage=leak
    )


# ---------------------------------------------------------------------------
# direct marginal evaluation (Simpson quadrature, Hermite-series states)

def _osc_stack(levels: int, q: np.ndarray) -> np.ndarray:
    """Oscillator eigenfunctions via the numpy Hermite evaluator, [len(q), levels]."""
    out = np.empty((q.size, levels))
    gauss = np.exp(-0.5 * q * q)
    for n in range(levels):
        coeff = np.zeros(n + 1)
        coeff[n] = 1.0
        norm = 1.0 / math.sqrt(2.0**n * math.factorial(n) * math.sqrt(math.pi))
        out[:, n] = norm * hermval(q, coeff) * gauss
    return out


_overlap_cache: dict = {}


def _overlap_matrix(levels: int, xs: np.ndarray, frame) -> tuple[np.ndarray, float]:
    """b_n(x) = <x, frame | n> on a Simpson grid; returns (matrix, weight).

    weight is the factor multiplying |amplitude|^2 in the marginal:
    1/(2 pi) for generic frames, 1/|mu| for the degenerate nu -> 0 limit
    (where b_n are the position wavefunctions at x/mu).
    """
    key = (levels, xs.size, float(xs[0]), float(xs[-1]), frame.mu, frame.nu)
    hit = _overlap_cache.get(key)
    if hit is not None:
        return hit
    if abs(frame.nu) < 1e-6 * max(1.0, abs(frame.mu)):
        B = _osc_stack(levels, xs / frame.mu).astype(complex)
        res = (B, 1.0 / abs(frame.mu))
    else:
        span = 10.0
        kmax = (np.max(np.abs(xs)) + abs(frame.mu) * span) / abs(frame.nu)
        pts = int(min(max(2049, 8 * span * kmax / math.pi), 32769))
        if pts % 2 == 0:
            pts += 1
        q = np.linspace(-span, span, pts)
        psi = _osc_stack(levels, q)
        u_conj = np.exp(
            -1j * np.outer(xs / frame.nu, q) + 0.5j * (frame.mu / frame.nu) * q * q
        ) / math.sqrt(abs(frame.nu))
        B = simpson(u_conj[:, None, :] * psi.T[None, :, :], x=q, axis=2)
        res = (B, 1.0 / (2.0 * math.pi))
    if len(_overlap_cache) > 512:
        _overlap_cache.clear()
    _overlap_cache[key] = res
    return res


def oracle_rotation(j: float, frame) -> np.ndarray:
    """Euler rotation e^{i gamma Jz} e^{i beta Jy} e^{i alpha Jz} by expm.

    Basis ordered m = j..-j; matches the production rotation convention but is
    computed from generators instead of closed-form matrix elements.
    """
    dim = int(round(2 * j)) + 1
    m = j - np.arange(dim)
    jz = np.diag(m.astype(complex))
    jp = np.zeros((dim, dim), dtype=complex)
    for i in range(1, dim):
        mm = m[i]
        jp[i - 1, i] = math.sqrt(j * (j + 1) - mm * (mm + 1))
    jy = (jp - jp.conj().T) / 2j
    return expm(1j * frame.gamma * jz) @ expm(1j * frame.beta * jy) @ expm(1j * frame.alpha * jz)


def direct_marginal(rho: DensityMatrix, x, frames=None, euler=None) -> np.ndarray:
    """Marginal of a state by direct quadrature, for any supported basis shape.

    x: array (one spatial mode) or tuple of arrays (one per mode); ignored for
    pure spin states. frames: one quadrature frame per spatial mode. euler:
    spin measurement frame if the state carries a spin factor.

    Returns w with axes (x1[, x2][, s]); the spin axis is ordered s = j..-j.
    Normalization: sums/integrates to 1 over all axes.
    """
    basis = rho.basis
    factors = basis.factors if basis.kind == "product" else (basis,)
    fock_factors = [f for f in factors if f.kind == "fock"]
    spin_factors = [f for f in factors if f.kind == "spin"]
    if len(spin_factors) > 1 or any(f.kind == "product" for f in factors):
        raise ValueError("unsupported basis structure")
    if spin_factors and factors[-1].kind != "spin":
        raise ValueError("spin factor must come last")
    if spin_factors and euler is None:
        raise ValueError("state has a spin factor: an Euler frame is required")

    xs_list = []
    if fock_factors:
        if isinstance(x, (tuple, list)):
            xs_list = [np.atleast_1d(np.asarray(xi, dtype=float)) for xi in x]
        else:
            xs_list = [np.atleast_1d(np.asarray(x, dtype=float))]
        frames = list(frames) if frames is not None else []
        if len(xs_list) != len(fock_factors) or len(frames) != len(fock_factors):
            raise ValueError("one x array and one frame per spatial mode required")

    mats = []
    weight = 1.0
    for f, xi, fr in zip(fock_factors, xs_list, frames or []):
        B, wgt = _overlap_matrix(f.levels, xi, fr)
        mats.append(B)
        weight *= wgt
    if spin_factors:
        jval = float(spin_factors[0].j)
        D = oracle_rotation(jval, euler)

    evals, vecs = np.linalg.eigh(rho.entries)
    shape = [f.dim for f in factors]
    out_shape = [b.shape[0] for b in mats] + ([D.shape[0]] if spin_factors else [])
    w = np.zeros(out_shape if out_shape else (1,))
    for lam, v in zip(evals, vecs.T):
        if abs(lam) < 1e-14:
            continue
        amp = v.reshape(shape)
        for k, B in enumerate(mats):
            amp = np.tensordot(B, amp, axes=([1], [k]))
            amp = np.moveaxis(amp, 0, k)
        if spin_factors:
            amp = np.tensordot(amp, D.T, axes=([amp.ndim - 1], [0]))
        w = w + lam * (amp.real**2 + amp.imag**2).reshape(w.shape)
    return w * weight


def time_derivative(fn, t: float, h: float = 1e-3):
    """5-point centered first derivative of an array-valued function."""
    return (fn(t - 2 * h) - 8.0 * fn(t - h) + 8.0 * fn(t + h) - fn(t + 2 * h)) / (12.0 * h)


def residual_check(marginal_fn, rhs_fn, t: float, h: float = 1e-3) -> float:
    """Max-norm defect of d/dt w = RHS(w) at time t.

    marginal_fn(t) returns the stacked marginal array; rhs_fn(w, t) evaluates
    the candidate evolution generator on it. Both sides use only values, so
    this couples an independent propagation route to the generator under test.
    """
    dw = time_derivative(marginal_fn, t, h)
    return float(np.max(np.abs(dw - rhs_fn(marginal_fn(t), t))))
