"""Truncated quantum states and grids.

Basis descriptors (Fock ladders, spin multiplets, tensor products), validated
density matrices and pure states, harmonic-oscillator wavefunctions on
position grids, and the coherent state of a charged particle in a uniform
axial magnetic field. Also the structured-text (JSON) state-file interface
used by the CLI.

Spin bases are ordered by decreasing magnetic number m = j, ..., -j; product
bases are ordered with the last factor varying fastest (Kronecker order).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .specfun import HalfInt

__all__ = [
    "BasisDescriptor",
    "DensityMatrix",
    "PureState",
    "LandauCoherentParams",
    "fock_wavefunction",
    "fock_stack",
    "landau_coherent_wavefunction",
    "tensor_product",
    "density_from_pure",
    "position_grid",
    "load_state",
    "save_state",
    "state_from_dict",
    "state_to_dict",
]

FOCK_LEVEL_CAP = 64
PRODUCT_DIM_CAP = 4096
DEFAULT_GRID_POINTS = 256
DEFAULT_GRID_SPAN = 8.0


@dataclass(frozen=True)
class BasisDescriptor:
    """Describes a truncated Hilbert-space basis."""

    kind: str
    levels: int = 0
    j: HalfInt | None = None
    factors: tuple["BasisDescriptor", ...] = ()

    @classmethod
    def fock(cls, levels: int) -> "BasisDescriptor":
        """Oscillator number basis |0>, ..., |levels-1>."""
        if not 1 <= levels <= FOCK_LEVEL_CAP:
            raise ValueError(f"levels must be in 1..{FOCK_LEVEL_CAP}")
        return cls(kind="fock", levels=int(levels))

    @classmethod
    def spin(cls, j) -> "BasisDescriptor":
        """Spin-j basis |j m>, m = j ... -j."""
        j = HalfInt.of(j)
        if j.twice < 0:
            raise ValueError("j must be nonnegative")
        return cls(kind="spin", j=j)

    @classmethod
    def product(cls, *factors: "BasisDescriptor") -> "BasisDescriptor":
        flat: list[BasisDescriptor] = []
        for f in factors:
            flat.extend(f.factors if f.kind == "product" else (f,))
        dim = math.prod(f.dim for f in flat)
        if dim > PRODUCT_DIM_CAP:
            raise ValueError(f"product dimension {dim} exceeds cap {PRODUCT_DIM_CAP}")
        return cls(kind="product", factors=tuple(flat))

    @property
    def dim(self) -> int:
        if self.kind == "fock":
            return self.levels
        if self.kind == "spin":
            return self.j.twice + 1
        if self.kind == "product":
            return math.prod(f.dim for f in self.factors)
        raise ValueError(f"unknown basis kind {self.kind!r}")

    def spin_values(self) -> list[HalfInt]:
        """Magnetic numbers m = j ... -j for a spin basis."""
        if self.kind != "spin":
            raise ValueError("not a spin basis")
        tj = self.j.twice
        return [HalfInt(tj - 2 * r) for r in range(tj + 1)]


def _check_density(entries: np.ndarray, tol: float) -> None:
    scale = max(1.0, float(np.max(np.abs(entries))) if entries.size else 1.0)
    herm = float(np.max(np.abs(entries - entries.conj().T)))
    if herm > tol * scale:
        raise ValueError(f"not Hermitian: deviation {herm:.3e} > {tol:.1e}")
    tr = complex(np.trace(entries))
    if abs(tr - 1.0) > max(tol, 1e-12):
        raise ValueError(f"trace {tr} deviates from 1 beyond {tol:.1e}")
    mineig = float(np.linalg.eigvalsh((entries + entries.conj().T) / 2.0).min())
    if mineig < -max(1e-10, tol):
        raise ValueError(f"negative eigenvalue {mineig:.3e}")


@dataclass(frozen=True)
class DensityMatrix:
    """Density matrix with construction-time invariant checks.

    tol loosens the Hermiticity/trace/positivity thresholds for matrices
    produced by quadrature (reconstruction); the default is strict.
    """

    basis: BasisDescriptor
    entries: np.ndarray
    tol: float = 1e-12

    def __post_init__(self):
        m = np.array(self.entries, dtype=complex)
        if m.shape != (self.basis.dim, self.basis.dim):
            raise ValueError(f"entries shape {m.shape} != basis dim {self.basis.dim}")
        _check_density(m, self.tol)
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)

    @property
    def dim(self) -> int:
        return self.basis.dim

    def purity(self) -> float:
        return float(np.real(np.trace(self.entries @ self.entries)))


@dataclass(frozen=True)
class PureState:
    basis: BasisDescriptor
    amplitudes: np.ndarray

    def __post_init__(self):
        v = np.array(self.amplitudes, dtype=complex)
        if v.shape != (self.basis.dim,):
            raise ValueError(f"amplitudes shape {v.shape} != basis dim {self.basis.dim}")
        n = float(np.linalg.norm(v))
        if abs(n - 1.0) > 1e-12:
            raise ValueError(f"norm {n} deviates from 1")
        v.setflags(write=False)
        object.__setattr__(self, "amplitudes", v)


@dataclass(frozen=True)
class LandauCoherentParams:
    """Complex coherent labels of the magnetic coherent state.

    beta_c is the second coherent label (named to keep it apart from the
    Euler angle beta used elsewhere in the package).
    """

    alpha: complex = 0j
    beta_c: complex = 0j

    def __post_init__(self):
        if not (np.isfinite(self.alpha) and np.isfinite(self.beta_c)):
            raise ValueError("coherent labels must be finite")


def position_grid(points: int = DEFAULT_GRID_POINTS, span: float = DEFAULT_GRID_SPAN):
    """Uniform grid on [-span, span] and its trapezoid quadrature weights."""
    q = np.linspace(-span, span, points)
    dq = q[1] - q[0]
    w = np.full(points, dq)
    w[0] = w[-1] = dq / 2.0
    return q, w


def fock_wavefunction(n: int, q):
    """Harmonic-oscillator eigenfunction psi_n(q) (unit mass and frequency).

    psi_n(q) = H_n(q) e^{-q^2/2} / sqrt(2^n n! sqrt(pi)), evaluated with the
    stable normalized recurrence. q may be a scalar or array.
    """
    n = int(n)
    if n < 0:
        raise ValueError("n must be nonnegative")
    if n > FOCK_LEVEL_CAP:
        raise ValueError(f"n exceeds truncation cap {FOCK_LEVEL_CAP}")
    q = np.asarray(q, dtype=float)
    psi_prev = np.zeros_like(q)
    psi = np.pi ** (-0.25) * np.exp(-q * q / 2.0)
    for k in range(n):
        psi, psi_prev = (
            np.sqrt(2.0 / (k + 1)) * q * psi - np.sqrt(k / (k + 1.0)) * psi_prev,
            psi,
        )
    return psi if psi.ndim else float(psi)


def fock_stack(levels: int, q) -> np.ndarray:
    """Matrix [len(q), levels] of psi_0 ... psi_{levels-1} sampled on q."""
    q = np.asarray(q, dtype=float)
    out = np.empty((q.size, levels))
    psi_prev = np.zeros_like(q)
    psi = np.pi ** (-0.25) * np.exp(-q * q / 2.0)
    out[:, 0] = psi
    for k in range(levels - 1):
        psi, psi_prev = (
            np.sqrt(2.0 / (k + 1)) * q * psi - np.sqrt(k / (k + 1.0)) * psi_prev,
            psi,
        )
        out[:, k + 1] = psi
    return out


def landau_coherent_wavefunction(params: LandauCoherentParams, q1, q2):
    """Coherent-state wavefunction of a charge in a uniform axial field.

    Psi(q1, q2) = pi^{-1/2} exp{ -(q1^2+q2^2)/2 - |alpha|^2/2 - |beta|^2/2
                                 - i alpha beta + beta (q1 + i q2)
                                 + i alpha (q1 - i q2) }.
    """
    a, b = complex(params.alpha), complex(params.beta_c)
    q1 = np.asarray(q1, dtype=float)
    q2 = np.asarray(q2, dtype=float)
    val = (
        np.pi ** (-0.5)
        * np.exp(
            -(q1**2 + q2**2) / 2.0
            - abs(a) ** 2 / 2.0
            - abs(b) ** 2 / 2.0
            - 1j * a * b
            + b * (q1 + 1j * q2)
            + 1j * a * (q1 - 1j * q2)
        )
    )
    return val if np.ndim(val) else complex(val)


def tensor_product(a: DensityMatrix, b: DensityMatrix) -> DensityMatrix:
    """Kronecker product of density matrices with a product basis."""
    basis = BasisDescriptor.product(a.basis, b.basis)
    tol = max(a.tol, b.tol)
    return DensityMatrix(basis, np.kron(a.entries, b.entries), tol=tol)


def density_from_pure(psi: PureState) -> DensityMatrix:
    """Rank-1 projector |psi><psi|."""
    v = psi.amplitudes
    return DensityMatrix(psi.basis, np.outer(v, v.conj()))


# ---------------------------------------------------------------------------
# state definition files (JSON)

def _basis_to_dict(b: BasisDescriptor) -> dict:
    if b.kind == "fock":
        return {"kind": "fock", "levels": b.levels}
    if b.kind == "spin":
        return {"kind": "spin", "j": b.j.twice / 2.0}
    return {"kind": "product", "factors": [_basis_to_dict(f) for f in b.factors]}


def _basis_from_dict(d: dict) -> BasisDescriptor:
    kind = d.get("kind")
    if kind == "fock":
        return BasisDescriptor.fock(int(d["levels"]))
    if kind == "spin":
        return BasisDescriptor.spin(HalfInt.of(d["j"]))
    if kind == "product":
        return BasisDescriptor.product(*(_basis_from_dict(f) for f in d["factors"]))
    raise ValueError(f"unknown basis kind {kind!r}")


def _c2pair(z: complex) -> list[float]:
    return [float(np.real(z)), float(np.imag(z))]


def _pair2c(p) -> complex:
    if isinstance(p, (int, float)):
        return complex(p)
    return complex(p[0], p[1])


def state_to_dict(state) -> dict:
    if isinstance(state, PureState):
        return {
            "type": "pure",
            "basis": _basis_to_dict(state.basis),
            "amplitudes": [_c2pair(z) for z in state.amplitudes],
        }
    if isinstance(state, DensityMatrix):
        return {
            "type": "density",
            "basis": _basis_to_dict(state.basis),
            "matrix": [[_c2pair(z) for z in row] for row in state.entries],
        }
    raise TypeError(f"cannot serialize {type(state).__name__}")


def state_from_dict(d: dict):
    basis = _basis_from_dict(d["basis"])
    if d.get("type") == "pure":
        amps = np.array([_pair2c(p) for p in d["amplitudes"]])
        return PureState(basis, amps)
    if d.get("type") == "density":
        m = np.array([[_pair2c(p) for p in row] for row in d["matrix"]])
        return DensityMatrix(basis, m, tol=float(d.get("tol", 1e-12)))
    raise ValueError(f"unknown state type {d.get('type')!r}")


def save_state(state, path) -> None:
    with open(path, "w") as fh:
        json.dump(state_to_dict(state), fh, indent=1)
        fh.write("\n")


def load_state(path):
    with open(path) as fh:
        return state_from_dict(json.load(fh))
