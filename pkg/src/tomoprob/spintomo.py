"""Spin tomography: rotated-frame projection probabilities and their inverse.

The measurable object is w(s | alpha, beta) — the probability of spin
projection s along the axis obtained by the Euler rotation (alpha, beta,
gamma) of the lab frame:

    w(s) = (D rho D^dag)_{ss},   D^j_{m'm} = e^{i m' gamma} d^j_{m'm}(beta) e^{i m alpha},

where d is the real rotation matrix with d^{1/2} = [[cos, sin], [-sin, cos]]
(half-angle arguments; rows ordered m' = j..-j). Both the marginal and the
reconstruction kernel are gamma-independent, so frames are points on the
sphere.

The inverse map integrates the marginal against an operator kernel built from
rank-j3 irreducible components (j3 = 0..2j); the sphere integral uses a
Gauss-Legendre grid in cos(beta) times a uniform alpha grid, which is exact
for the band-limited integrands arising here once each direction has >= 4j+1
nodes.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .qstate import BasisDescriptor, DensityMatrix
from .specfun import HalfInt, wigner_3j, wigner_D, wigner_D_matrix

__all__ = [
    "EulerFrame",
    "SpinMarginal",
    "sphere_lattice",
    "rotation_matrix",
    "spin_marginal",
    "spin_marginal_grid",
    "phi_function",
    "kernel_K_spin",
    "reconstruct_spin_density",
    "write_spin_csv",
    "read_spin_csv",
]

DEFAULT_SPHERE_ALPHA = 16
DEFAULT_SPHERE_BETA = 16


@dataclass(frozen=True)
class EulerFrame:
    """Euler angles (z-y-z order) of the measurement frame."""

    alpha: float
    beta: float
    gamma: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "beta", float(self.beta))
        object.__setattr__(self, "gamma", float(self.gamma))


@dataclass
class SpinMarginal:
    """Projection probabilities on a frame lattice.

    values[k, i] is w(s_i | frame_k) with s_i = j - i (descending projection
    order, matching the spin basis ordering). weights, when present, are
    sphere-quadrature weights normalized so that sum(weights) == 1.
    """

    j: HalfInt
    frames: tuple
    values: np.ndarray
    weights: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.j = HalfInt.of(self.j)
        self.values = np.asarray(self.values, dtype=float)
        dim = int(2 * float(self.j)) + 1
        if self.values.shape != (len(self.frames), dim):
            raise ValueError("values shape does not match frames x projections")
        if self.weights is not None:
            self.weights = np.asarray(self.weights, dtype=float)
            if self.weights.shape != (len(self.frames),):
                raise ValueError("weights length does not match frames")

    def sum_rule_defects(self) -> np.ndarray:
        return self.values.sum(axis=1) - 1.0


def sphere_lattice(n_alpha: int = DEFAULT_SPHERE_ALPHA, n_beta: int = DEFAULT_SPHERE_BETA):
    """Gauss-Legendre (cos beta) x uniform (alpha) quadrature of dOmega/(4 pi)."""
    nodes, glw = np.polynomial.legendre.leggauss(n_beta)
    betas = np.arccos(nodes)
    alphas = 2.0 * math.pi * np.arange(n_alpha) / n_alpha
    frames = []
    weights = []
    for b, wb in zip(betas, glw):
        for a in alphas:
            frames.append(EulerFrame(alpha=float(a), beta=float(b)))
            weights.append(wb / (2.0 * n_alpha))
    return tuple(frames), np.array(weights)


def rotation_matrix(j, frame: EulerFrame) -> np.ndarray:
    return wigner_D_matrix(j, frame.alpha, frame.beta, frame.gamma)


@lru_cache(maxsize=32)
def _rotation_stack(tj: int, frames: tuple) -> np.ndarray:
    j = HalfInt(tj)
    return np.array([rotation_matrix(j, fr) for fr in frames])


def spin_marginal(rho: DensityMatrix, frame: EulerFrame) -> np.ndarray:
    """w(s | frame) for all s = j..-j; sums to 1 exactly (unitarity)."""
    if rho.basis.kind != "spin":
        raise ValueError("spin_marginal expects a spin-basis density matrix")
    D = rotation_matrix(rho.basis.j, frame)
    return np.real(np.einsum("sm,mn,sn->s", D, rho.entries, D.conj(), optimize=True))


def spin_marginal_grid(rho: DensityMatrix, frames, weights=None) -> SpinMarginal:
    """Forward map over a frame lattice (rotation matrices cached per lattice)."""
    if rho.basis.kind != "spin":
        raise ValueError("spin_marginal_grid expects a spin-basis density matrix")
    j = rho.basis.j
    frames = tuple(frames)
    D = _rotation_stack(int(2 * float(j)), frames)
    vals = np.real(np.einsum("ksm,mn,ksn->ks", D, rho.entries, D.conj(), optimize=True))
    return SpinMarginal(j=j, frames=frames, values=vals, weights=weights)


def phi_function(j, j3, m1, m2, frame: EulerFrame) -> complex:
    """Irreducible-component amplitude entering the reconstruction kernel.

    Phi^{(j3)}_{m1 m2} = e^{i pi m2} sum_{m3} D^{(j3)}_{0 m3}(frame)
                         * threej(j, j, j3; m1, -m2, m3);
    the selection rule keeps only m3 = m2 - m1. gamma-independent because the
    D row index is 0.
    """
    j = HalfInt.of(j)
    j3 = HalfInt.of(j3)
    m1 = HalfInt.of(m1)
    m2 = HalfInt.of(m2)
    acc = 0.0 + 0.0j
    m3 = m2 - m1
    if abs(float(m3)) <= float(j3):
        acc = wigner_D(j3, HalfInt(0), m3, frame.alpha, frame.beta, frame.gamma) * wigner_3j(
            j, j, j3, m1, -m2, m3
        )
    return complex(np.exp(1j * math.pi * float(m2)) * acc)


def kernel_K_spin(j, s, frame: EulerFrame) -> np.ndarray:
    """Operator kernel K^{(j)}(s, frame) of the inverse map.

    rho = sum_s  int dOmega/(4 pi)  w(s | frame) K^{(j)}(s, frame).

    K = e^{-i pi s} sum_{j3=0}^{2j} (2 j3 + 1)^2 threej(j, j, j3; s, -s, 0)
        * Phi-matrix(j3, frame); entries ordered m = j..-j on both axes.
    """
    j = HalfInt.of(j)
    s = HalfInt.of(s)
    dim = int(2 * float(j)) + 1
    ms = [HalfInt.of(float(j) - i) for i in range(dim)]
    K = np.zeros((dim, dim), dtype=complex)
    for tj3 in range(0, int(2 * float(j)) + 1):
        j3 = HalfInt(2 * tj3)
        w3 = wigner_3j(j, j, j3, s, -s, HalfInt(0))
        if w3 == 0.0:
            continue
        coef = (2.0 * tj3 + 1.0) ** 2 * w3
        for a, m1 in enumerate(ms):
            for b, m2 in enumerate(ms):
                K[a, b] += coef * phi_function(j, j3, m1, m2, frame)
    return np.exp(-1j * math.pi * float(s)) * K


@lru_cache(maxsize=16)
def _kernel_stack(tj: int, frames: tuple) -> np.ndarray:
    """K[k, s_index, m1, m2] over a frame lattice."""
    j = HalfInt(tj)
    dim = tj + 1
    svals = [HalfInt.of(float(j) - i) for i in range(dim)]
    out = np.empty((len(frames), dim, dim, dim), dtype=complex)
    for k, fr in enumerate(frames):
        for i, s in enumerate(svals):
            out[k, i] = kernel_K_spin(j, s, fr)
    return out


def reconstruct_spin_density(
    marg: SpinMarginal,
    report: dict | None = None,
    tol: float = 1e-8,
) -> DensityMatrix:
    """Integrate the marginal against the kernel stack over the sphere lattice."""
    if marg.weights is None:
        raise ValueError("reconstruction needs sphere-quadrature weights")
    tj = int(2 * float(marg.j))
    K = _kernel_stack(tj, marg.frames)
    rho = np.einsum("k,ks,ksmn->mn", marg.weights, marg.values, K, optimize=True)
    herm = float(np.max(np.abs(rho - rho.conj().T)))
    if report is not None:
        report["hermiticity_defect"] = herm
        report["trace"] = complex(np.trace(rho))
    rho = (rho + rho.conj().T) / 2.0
    return DensityMatrix(BasisDescriptor.spin(marg.j), rho, tol=tol)


# ---------------------------------------------------------------------------
# spin marginal files: CSV with a JSON header line

def write_spin_csv(path, marg: SpinMarginal, extra: dict | None = None) -> None:
    header = {
        "kind": "spin_marginal",
        "j": float(marg.j),
        "frames": len(marg.frames),
        "has_weights": marg.weights is not None,
        "sum_rule_max_defect": float(np.max(np.abs(marg.sum_rule_defects()))),
    }
    header.update(marg.meta)
    if extra:
        header.update(extra)
    dim = int(2 * float(marg.j)) + 1
    svals = [float(marg.j) - i for i in range(dim)]
    with open(path, "w") as fh:
        fh.write("# " + json.dumps(header, sort_keys=True) + "\n")
        fh.write("alpha,beta,gamma,weight,s,w\n")
        for k, fr in enumerate(marg.frames):
            wt = float(marg.weights[k]) if marg.weights is not None else 0.0
            for i, s in enumerate(svals):
                fh.write(
                    f"{fr.alpha!r},{fr.beta!r},{fr.gamma!r},{wt!r},{s!r},"
                    f"{float(marg.values[k, i])!r}\n"
                )


def read_spin_csv(path) -> SpinMarginal:
    with open(path) as fh:
        first = fh.readline()
        if not first.startswith("#"):
            raise ValueError(f"{path}: line 1: missing JSON header")
        try:
            meta = json.loads(first[1:].strip())
        except json.JSONDecodeError as e:
            raise ValueError(f"{path}: line 1: bad header: {e}") from None
        cols = fh.readline().strip()
        if cols != "alpha,beta,gamma,weight,s,w":
            raise ValueError(f"{path}: line 2: unexpected column header")
        rows = []
        for ln, line in enumerate(fh, start=3):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 6:
                raise ValueError(f"{path}: line {ln}: expected 6 fields")
            try:
                rows.append([float(p) for p in parts])
            except ValueError:
                raise ValueError(f"{path}: line {ln}: non-numeric field") from None
    j = HalfInt.of(meta["j"])
    dim = int(2 * float(j)) + 1
    nf = meta["frames"]
    if len(rows) != nf * dim:
        raise ValueError(f"{path}: row count {len(rows)} does not match header grid spec")
    arr = np.array(rows).reshape(nf, dim, 6)
    frames = tuple(EulerFrame(*arr[k, 0, 0:3]) for k in range(nf))
    weights = arr[:, 0, 3] if meta.get("has_weights") else None
    values = arr[:, :, 5]
    return SpinMarginal(j=j, frames=frames, values=values, weights=weights, meta=meta)
