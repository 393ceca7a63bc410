"""Evolution of hybrid spin-1/2 (x) spatial marginal distributions.

The joint tomographic representation carries a nonnegative marginal
w(x, mu, nu, s, alpha, beta, t): probabilities of quadrature outcomes x
in the frame (mu, nu) together with spin projection s along the axis
with Euler angles (alpha, beta).  Its time evolution is linear and
classical-like: a first-order advection in the quadrature-frame labels
plus, when the Hamiltonian splits the spin levels, a nonlocal integral
over measurement directions on the sphere.  This module assembles those
right-hand sides for the four supported generators, provides the
closed-form reference solutions for the trapped and magnetic-field
cases, and integrates the equation with an explicit fourth-order
stepper.

Supported generators (see :class:`HamiltonianSpec`):

``free``       p^2/2, one spatial mode, no spin.
``spin_diag``  diagonal spin Hamiltonian with level energies a, c.
``trapped``    oscillator mode with +/-1 spin splitting.
``landau``     two planar modes with angular-momentum coupling and
               +/-1 spin splitting.

Lattice layout
--------------
Frame dependence is stored either on the unit circle of quadrature
frames (mu, nu) = (cos phi, sin phi) -- values at any other radius
follow from the scaling identity w(x, r mu, r nu) = w(x/r, mu, nu)/r --
or on a rectangular (mu, nu) patch when explicit stencils in every
frame label are wanted.  Spin-direction dependence lives on the
Gauss-Legendre sphere lattice shared with the spin tomography routines.
Spin projections are indexed in descending order s = +1/2, -1/2,
matching the spin basis ordering used everywhere else.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .qstate import DensityMatrix
from .specfun import HalfInt
from .spintomo import EulerFrame, SpinMarginal, rotation_matrix, sphere_lattice, spin_marginal_grid
from .symtomo import SymplecticFrame, tomographic_amplitudes
from . import landau as _landau

__all__ = [
    "HamiltonianSpec",
    "HybridFrame",
    "HybridMarginal",
    "EvolutionProblem",
    "EvolutionResult",
    "circle_lattice",
    "circle_marginal_from_density",
    "sphere_marginal_from_density",
    "trapped_initial_marginal",
    "landau_initial_marginal",
    "analytic_trapped_solution",
    "analytic_landau_solution",
    "free_rhs",
    "spin_rhs",
    "trapped_rhs",
    "landau_rect_rhs",
    "theta_kernel",
    "ThetaOperator",
    "evolve",
    "fit_oscillation_rate",
]

SUPPORTED_KINDS = ("free", "spin_diag", "trapped", "landau")

DEFAULT_PHI_COUNT = 64
DEFAULT_Y_POINTS = 128
DEFAULT_Y_SPAN = 8.0
STEPS_PER_PERIOD = 40

_SPIN_UP = 0  # index of s = +1/2 along a spin axis
_SPIN_DOWN = 1


# ---------------------------------------------------------------------------
# domain types


@dataclass(frozen=True)
class HamiltonianSpec:
    """One of the supported evolution generators plus its parameters.

    params: ``spin_diag`` requires level energies ``a`` and ``c``; every
    kind accepts an optional ``levels`` override consumed by the
    density-matrix propagation routines.
    """

    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in SUPPORTED_KINDS:
            raise ValueError(f"unsupported Hamiltonian kind {self.kind!r}")
        params = dict(self.params or {})
        if self.kind == "spin_diag":
            if "a" not in params or "c" not in params:
                raise ValueError("spin_diag requires level energies 'a' and 'c'")
            for key in ("a", "c"):
                params[key] = float(params[key])
                if not math.isfinite(params[key]):
                    raise ValueError(f"level energy {key!r} must be finite")
        object.__setattr__(self, "params", params)

    @property
    def has_spin(self) -> bool:
        return self.kind != "free"

    @property
    def spin_gap(self) -> float:
        """Level splitting a - c driving the sphere-integral term."""
        if self.kind == "spin_diag":
            return self.params["a"] - self.params["c"]
        if self.kind in ("trapped", "landau"):
            return 2.0  # +/-1 spin splitting
        return 0.0

    @property
    def phase_rate(self) -> float:
        """Fastest oscillation rate appearing in marginal components."""
        if self.kind == "trapped":
            return 3.0
        if self.kind == "landau":
            return 4.0
        if self.kind == "spin_diag":
            return abs(self.spin_gap)
        return 0.0


@dataclass(frozen=True)
class HybridFrame:
    """Quadrature frame per spatial mode plus a spin measurement frame."""

    symplectic: tuple = ()
    euler: EulerFrame | None = None

    def __post_init__(self):
        sym = self.symplectic
        if isinstance(sym, SymplecticFrame):
            sym = (sym,)
        sym = tuple(sym)
        for fr in sym:
            if not isinstance(fr, SymplecticFrame):
                raise TypeError("symplectic entries must be SymplecticFrame")
        object.__setattr__(self, "symplectic", sym)
        if self.euler is not None and not isinstance(self.euler, EulerFrame):
            raise TypeError("euler must be an EulerFrame or None")


@dataclass
class HybridMarginal:
    """Marginal values on a named lattice of outcomes and frames.

    kind and the corresponding ``values`` layout (spin axis always first,
    sphere axis second when a spin sector is present):

    ``circle``  no spin: ``values[phi, y]``; with spin:
                ``values[s, sphere, phi, y]``.  ``y`` is the quadrature
                outcome at unit frame radius, ``phis`` the frame angles.
    ``rect``    one mode: ``values[(s, sphere,) x, mu, nu]``; two modes:
                ``values[(s, sphere,) x1, x2, mu1, nu1, mu2, nu2]`` on the
                1-D grids in ``x`` and ``frame_grids``.
    ``sphere``  pure spin: ``values[s, sphere]``.

    Physical marginals are real with Sum_s Integral dx w = 1 on every
    frame (see :meth:`norm_defects`); the container also carries complex
    component fields so the right-hand-side operators can be exercised
    on individual solution components.
    """

    kind: str
    values: np.ndarray
    time: float = 0.0
    y: np.ndarray | None = None
    phis: np.ndarray | None = None
    x: tuple | None = None
    frame_grids: tuple | None = None
    spin: HalfInt | None = None
    sphere_frames: tuple | None = None
    sphere_weights: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values)
        if self.spin is not None:
            self.spin = HalfInt.of(self.spin)
        if self.sphere_weights is not None:
            self.sphere_weights = np.asarray(self.sphere_weights, dtype=float)
        if self.kind == "circle":
            if self.phis is None or self.y is None:
                raise ValueError("circle marginals carry phis and y grids")
            self.phis = np.asarray(self.phis, dtype=float)
            self.y = np.asarray(self.y, dtype=float)
            expected = self._spin_shape() + (len(self.phis), len(self.y))
        elif self.kind == "rect":
            if self.x is None or self.frame_grids is None:
                raise ValueError("rect marginals carry x and frame_grids")
            self.x = tuple(np.asarray(g, dtype=float) for g in self.x)
            self.frame_grids = tuple(np.asarray(g, dtype=float) for g in self.frame_grids)
            if len(self.frame_grids) != 2 * len(self.x):
                raise ValueError("need one (mu, nu) grid pair per spatial mode")
            if len(self.x) not in (1, 2):
                raise ValueError("rect marginals support one or two spatial modes")
            expected = (
                self._spin_shape()
                + tuple(len(g) for g in self.x)
                + tuple(len(g) for g in self.frame_grids)
            )
        elif self.kind == "sphere":
            if self.spin is None:
                raise ValueError("sphere marginals carry a spin sector")
            expected = self._spin_shape()
        else:
            raise ValueError(f"unknown lattice kind {self.kind!r}")
        if self.spin is not None:
            if self.sphere_frames is None or self.sphere_weights is None:
                raise ValueError("spin sector requires sphere_frames and sphere_weights")
            self.sphere_frames = tuple(self.sphere_frames)
            if len(self.sphere_weights) != len(self.sphere_frames):
                raise ValueError("sphere weights do not match sphere frames")
        if self.values.shape != expected:
            raise ValueError(f"values shape {self.values.shape} does not match lattice {expected}")

    def _spin_shape(self) -> tuple:
        if self.spin is None:
            return ()
        return (self.spin.twice + 1, len(self.sphere_frames))

    @property
    def has_spin(self) -> bool:
        return self.spin is not None

    @property
    def modes(self) -> int:
        if self.kind == "rect":
            return len(self.x)
        return 0 if self.kind == "sphere" else 1

    def with_values(self, values: np.ndarray, time: float | None = None) -> "HybridMarginal":
        return replace(self, values=values, time=self.time if time is None else float(time))

    def norm_defects(self) -> np.ndarray:
        """Per-frame defect of Sum_s Integral dx w against 1."""
        vals = self.values.real
        if self.kind == "sphere":
            return vals.sum(axis=0) - 1.0
        if self.kind == "circle":
            total = np.trapezoid(vals, x=self.y, axis=-1)
        else:
            total = vals
            for k in range(len(self.x)):
                # x axes sit right after the (s, sphere) block
                total = np.trapezoid(total, x=self.x[k], axis=2 if self.has_spin else 0)
        if self.has_spin:
            total = total.sum(axis=0)
        return total - 1.0

    def min_value(self) -> float:
        return float(self.values.real.min())


@dataclass(frozen=True)
class EvolutionProblem:
    """An initial marginal, a generator, and the snapshot times wanted."""

    hamiltonian: HamiltonianSpec
    initial: HybridMarginal
    times: tuple
    dt: float | None = None
    norm_tolerance: float = 1e-5
    growth_limit: float = 0.10
    full_lattice: bool = False

    def __post_init__(self):
        times = tuple(float(t) for t in self.times)
        if not times:
            raise ValueError("at least one snapshot time is required")
        if any(b < a for a, b in zip(times, times[1:])):
            raise ValueError("snapshot times must be nondecreasing")
        if times[0] < self.initial.time - 1e-12:
            raise ValueError("snapshot times start before the initial marginal")
        object.__setattr__(self, "times", times)


@dataclass(frozen=True)
class EvolutionResult:
    times: tuple
    snapshots: tuple
    dt: float
    steps: int
    norm_drift: float
    diagnostics: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# finite-difference helpers


def _axis_view(vec: np.ndarray, ndim: int, axis: int) -> np.ndarray:
    """Reshape a 1-D coefficient grid to broadcast along one axis."""
    shape = [1] * ndim
    shape[axis] = len(vec)
    return vec.reshape(shape)


def _uniform_step(grid: np.ndarray, label: str) -> float:
    if len(grid) < 5:
        raise ValueError(f"{label} grid too small for the five-point stencil")
    steps = np.diff(grid)
    h = float(steps[0])
    if h <= 0 or not np.allclose(steps, h, rtol=1e-9, atol=1e-12):
        raise ValueError(f"{label} grid must be uniform and increasing")
    return h


def _periodic_derivative(values: np.ndarray, step: float, axis: int) -> np.ndarray:
    """Spectral first derivative on a uniform periodic axis.

    The fields differentiated here are either trigonometric polynomials
    of low order in the frame angle (finitely many level pairs contribute
    one harmonic each) or outcome profiles that vanish identically at the
    span ends and so embed as smooth periodic functions.  For both the
    Fourier derivative is exact where a fixed-order stencil would leave
    an O(k^5 step^4) error that dominates the evolution error budget.
    The Nyquist mode, if present, is dropped to keep the derivative of
    real data real.
    """
    n = values.shape[axis]
    k = 2.0 * math.pi * np.fft.fftfreq(n, d=step)
    if n % 2 == 0:
        k = k.copy()
        k[n // 2] = 0.0
    spec = np.fft.fft(values, axis=axis)
    spec *= _axis_view(1j * k, values.ndim, axis)
    out = np.fft.ifft(spec, axis=axis)
    return out if np.iscomplexobj(values) else out.real


def _simpson(values: np.ndarray, step: float) -> float:
    """Composite Simpson rule on a uniform grid with an odd point count."""
    n = len(values)
    if n % 2 == 0:
        raise ValueError("Simpson rule needs an odd number of nodes")
    acc = values[0] + values[-1] + 4.0 * values[1:-1:2].sum() + 2.0 * values[2:-2:2].sum()
    return float(acc * step / 3.0)


_EDGE_FIRST = np.array([-25.0, 48.0, -36.0, 16.0, -3.0]) / 12.0
_EDGE_SECOND = np.array([-3.0, -10.0, 18.0, -6.0, 1.0]) / 12.0


def _bounded_derivative(values: np.ndarray, step: float, axis: int) -> np.ndarray:
    """Fourth-order first derivative with one-sided closures at the ends."""
    v = np.moveaxis(values, axis, -1)
    if v.shape[-1] < 5:
        raise ValueError("need at least five points along a stencil axis")
    out = np.empty_like(v)
    out[..., 2:-2] = (8.0 * (v[..., 3:-1] - v[..., 1:-3]) - (v[..., 4:] - v[..., :-4])) / (
        12.0 * step
    )
    out[..., 0] = v[..., :5] @ _EDGE_FIRST / step
    out[..., 1] = v[..., :5] @ _EDGE_SECOND / step
    out[..., -1] = -(v[..., -1:-6:-1] @ _EDGE_FIRST) / step
    out[..., -2] = -(v[..., -1:-6:-1] @ _EDGE_SECOND) / step
    return np.moveaxis(out, -1, axis)


def _decaying_derivative(values: np.ndarray, step: float, axis: int) -> np.ndarray:
    """Fourth-order first derivative assuming the field vanishes off-grid."""
    v = np.moveaxis(values, axis, -1)
    pad = [(0, 0)] * (v.ndim - 1) + [(2, 2)]
    v = np.pad(v, pad)
    d = (8.0 * (v[..., 3:-1] - v[..., 1:-3]) - (v[..., 4:] - v[..., :-4])) / (12.0 * step)
    return np.moveaxis(d, -1, axis)


def _antiderivative(values: np.ndarray, step: float, axis: int) -> np.ndarray:
    """Running integral along an axis (trapezoid, zero at the left edge).

    Used for the inverse outcome derivatives; the integrands it is applied
    to integrate to zero over the axis, so the result decays on both
    sides like the marginal itself.
    """
    v = np.moveaxis(values, axis, -1)
    out = np.zeros_like(v)
    np.cumsum(0.5 * step * (v[..., 1:] + v[..., :-1]), axis=-1, out=out[..., 1:])
    return np.moveaxis(out, -1, axis)


# ---------------------------------------------------------------------------
# sphere-integral term


def _sphere_arrays(frames) -> tuple:
    alphas = np.array([f.alpha for f in frames])
    betas = np.array([f.beta for f in frames])
    return alphas, betas


def _sphere_term(values: np.ndarray, axis: int, frames, weights, coeff: float) -> np.ndarray:
    """coeff * sin(beta) * Integral dOmega'/(8 pi^2) w(...) sin(beta') sin(alpha-alpha').

    The gamma' integral is already absorbed into the quadrature weights
    (which sum to 1, the measure Integral dOmega/(4 pi)).  Expanding
    sin(alpha - alpha') splits the integral into two shared moments, so
    the nonlocal term costs one reduction plus a pointwise update.
    """
    alphas, betas = _sphere_arrays(frames)
    sin_b = np.sin(betas)
    mom_cos = np.tensordot(values, weights * sin_b * np.cos(alphas), axes=([axis], [0]))
    mom_sin = np.tensordot(values, weights * sin_b * np.sin(alphas), axes=([axis], [0]))
    mom_cos = np.expand_dims(mom_cos, axis)
    mom_sin = np.expand_dims(mom_sin, axis)
    ndim = values.ndim
    sin_bv = _axis_view(sin_b, ndim, axis)
    sin_av = _axis_view(np.sin(alphas), ndim, axis)
    cos_av = _axis_view(np.cos(alphas), ndim, axis)
    return coeff * sin_bv * (sin_av * mom_cos - cos_av * mom_sin)


# ---------------------------------------------------------------------------
# right-hand sides


def free_rhs(marg: HybridMarginal) -> np.ndarray:
    """mu d/d(nu) w on a rectangular (x, mu, nu) lattice."""
    if marg.kind != "rect" or marg.has_spin or marg.modes != 1:
        raise ValueError("free_rhs expects a spinless one-mode rect marginal")
    mu, nu = marg.frame_grids
    h = _uniform_step(nu, "nu")
    d_nu = _bounded_derivative(marg.values, h, axis=-1)
    return _axis_view(mu, marg.values.ndim, -2) * d_nu


def spin_rhs(marg: SpinMarginal, a: float, c: float) -> np.ndarray:
    """Sphere-integral evolution term for a diagonal spin-1/2 Hamiltonian.

    Returns 3(a-c) sin(beta) Integral dOmega'/(8 pi^2) w(s, alpha', beta')
    sin(beta') sin(alpha - alpha'), shaped like marg.values; the spin
    argument is untouched (each s column evolves independently).
    """
    if marg.j != HalfInt(1):
        raise ValueError("spin_rhs is specific to spin 1/2")
    if marg.weights is None:
        raise ValueError("spin_rhs needs sphere-quadrature weights on the marginal")
    # SpinMarginal stores [frame, s]; put the sphere axis where the shared
    # helper contracts it.
    return _sphere_term(marg.values, 0, marg.frames, marg.weights, 3.0 * (float(a) - float(c)))


def trapped_rhs(marg: HybridMarginal) -> np.ndarray:
    """(mu d_nu - nu d_mu) w plus the spin term with coefficient 6.

    The spin coefficient is 6 = 3 * (level splitting 2).  On the circle
    lattice the frame advection is purely tangential, (mu d_nu - nu d_mu)
    restricted to the unit circle is exactly d/d(phi), so no radial or
    outcome stencils are needed there.
    """
    if not marg.has_spin:
        raise ValueError("trapped_rhs expects a spin sector")
    if marg.kind == "circle":
        h = _uniform_step(marg.phis, "phi")
        motion = _periodic_derivative(marg.values, h, axis=-2)
    elif marg.kind == "rect":
        if marg.modes != 1:
            raise ValueError("trapped_rhs expects a single spatial mode")
        mu, nu = marg.frame_grids
        d_mu = _bounded_derivative(marg.values, _uniform_step(mu, "mu"), axis=-2)
        d_nu = _bounded_derivative(marg.values, _uniform_step(nu, "nu"), axis=-1)
        ndim = marg.values.ndim
        motion = _axis_view(mu, ndim, -2) * d_nu - _axis_view(nu, ndim, -1) * d_mu
    else:
        raise ValueError("trapped_rhs expects a circle or rect lattice")
    spin = _sphere_term(marg.values, 1, marg.sphere_frames, marg.sphere_weights, 6.0)
    return motion + spin


def landau_rect_rhs(marg: HybridMarginal) -> np.ndarray:
    """Evolution right-hand side for the magnetic-field generator.

    The motion part is NOT a pure frame advection: the magnetic coupling
    mixes the two circular modes, and a frame monomial of mode 1 driven
    through the coupling picks up mode-2 content that no shift of the
    four frame labels can represent.  Working with the per-mode
    characteristic variables shows the extra content carries a ratio of
    the two outcome frequencies, i.e. an outcome derivative on one slot
    and an inverse outcome derivative on the other:

        d_t w = [mu1 d_nu1 - nu1 d_mu1 + mu2 d_nu2 - nu2 d_mu2] w
              + d_x1 d_x2^{-1} (mu1 d_mu2 + nu1 d_nu2) w
              - d_x2 d_x1^{-1} (mu2 d_mu1 + nu2 d_nu1) w
              + spin term.

    Each per-mode pair rotates rigidly at unit rate; the two cross terms
    transport probability between the mode labels.  They conserve the
    normalisation exactly: their integrands integrate to zero over the
    differentiated outcome axis, which also makes the inverse derivative
    well defined (the running integral decays on both sides).  The spin
    coefficient is 6 = 3 * (level splitting 2).
    """
    if marg.kind != "rect" or marg.modes != 2 or not marg.has_spin:
        raise ValueError("landau_rect_rhs expects a two-mode rect marginal with spin")
    mu1, nu1, mu2, nu2 = marg.frame_grids
    x1, x2 = marg.x
    ndim = marg.values.ndim
    d_mu1 = _bounded_derivative(marg.values, _uniform_step(mu1, "mu1"), axis=-4)
    d_nu1 = _bounded_derivative(marg.values, _uniform_step(nu1, "nu1"), axis=-3)
    d_mu2 = _bounded_derivative(marg.values, _uniform_step(mu2, "mu2"), axis=-2)
    d_nu2 = _bounded_derivative(marg.values, _uniform_step(nu2, "nu2"), axis=-1)
    mu1_v = _axis_view(mu1, ndim, -4)
    nu1_v = _axis_view(nu1, ndim, -3)
    mu2_v = _axis_view(mu2, ndim, -2)
    nu2_v = _axis_view(nu2, ndim, -1)
    h_x1 = _uniform_step(x1, "x1")
    h_x2 = _uniform_step(x2, "x2")
    motion = mu1_v * d_nu1 - nu1_v * d_mu1 + mu2_v * d_nu2 - nu2_v * d_mu2
    motion += _decaying_derivative(
        _antiderivative(mu1_v * d_mu2 + nu1_v * d_nu2, h_x2, axis=-5), h_x1, axis=-6
    )
    motion -= _decaying_derivative(
        _antiderivative(mu2_v * d_mu1 + nu2_v * d_nu1, h_x1, axis=-6), h_x2, axis=-5
    )
    spin = _sphere_term(marg.values, 1, marg.sphere_frames, marg.sphere_weights, 6.0)
    return motion + spin


def _circle_free_rhs(values: np.ndarray, phis: np.ndarray, y: np.ndarray) -> np.ndarray:
    """mu d_nu w reduced to the unit frame circle by homogeneity.

    With w(x, r cos phi, r sin phi) = w~(phi, x/r)/r the free advection
    becomes cos^2(phi) d_phi w~ - cos(phi) sin(phi) (w~ + y d_y w~).
    """
    d_phi = _periodic_derivative(values, _uniform_step(phis, "phi"), axis=-2)
    # the outcome profile decays like the ground-state envelope well inside
    # the span, so the periodic spectral derivative is exact here too
    d_y = _periodic_derivative(values, _uniform_step(y, "y"), axis=-1)
    cos_p = _axis_view(np.cos(phis), values.ndim, -2)
    sin_p = _axis_view(np.sin(phis), values.ndim, -2)
    y_v = _axis_view(y, values.ndim, -1)
    return cos_p * cos_p * d_phi - cos_p * sin_p * (values + y_v * d_y)


def _sphere_rhs(values: np.ndarray, frames, weights, gap: float) -> np.ndarray:
    return _sphere_term(values, 1, frames, weights, 3.0 * gap)


# ---------------------------------------------------------------------------
# the evolution kernel


def theta_kernel(h: HamiltonianSpec, to: tuple, frm: tuple) -> complex:
    """Regular factor of the two-point evolution kernel.

    ``to`` and ``frm`` are (x, s, HybridFrame) triples for the target and
    source points.  The full kernel of the integral form of the evolution
    equation is distributional: the motion part differentiates delta
    functions of the frame labels along the advection flow (plus, for the
    mode-mixing magnetic kind, outcome-derivative cross terms), and the
    spin part carries delta(x - x') times deltas in the quadrature-frame
    labels.  Those factors never appear as values of a function; they are
    applied by :class:`ThetaOperator` through stencils and quadrature.
    This function returns the one genuinely pointwise piece, the smooth
    spin-sector factor

        6 (a - c) s s' sin(beta) sin(beta') sin(alpha - alpha') / (8 pi^2),

    which vanishes identically for kind="free" and for a = c.
    """
    if h.kind not in SUPPORTED_KINDS:
        raise ValueError(f"unsupported Hamiltonian kind {h.kind!r}")
    x, s, frame = to
    xp, sp, frame_p = frm
    for hf in (frame, frame_p):
        for sym in hf.symplectic:
            if sym.radius == 0.0:
                raise ValueError("degenerate symplectic frame")
    gap = h.spin_gap
    if gap == 0.0:
        return 0.0 + 0.0j
    e, ep = frame.euler, frame_p.euler
    if e is None or ep is None:
        raise ValueError("spin-splitting kernels need Euler frames on both points")
    value = (
        6.0
        * gap
        * float(s)
        * float(sp)
        * math.sin(e.beta)
        * math.sin(ep.beta)
        * math.sin(e.alpha - ep.alpha)
        / (8.0 * math.pi**2)
    )
    return complex(value)


_FLOW_DIM = {"free": 2, "spin_diag": 0, "trapped": 2, "landau": 4}


@dataclass
class ThetaOperator:
    """Applies the evolution kernel to a marginal given as a callable.

    The kernel splits into a local differential part (the advection flow
    on the quadrature-frame labels, applied here as a five-point
    directional stencil of size ``step``) and a separable nonlocal part
    (the sphere integral, applied with the stored quadrature).  The
    nonlocal part uses the kernel exactly as :func:`theta_kernel` states
    it, contracting s' against both spin values of the source marginal.
    The two-mode magnetic kind adds the outcome-nonlocal cross-mode
    transport, evaluated by line quadrature over the outcome arguments.

    ``w`` passed to :meth:`apply` must accept (x, HybridFrame, s) and
    may return scalars or arrays over x; for the two-mode kind it must
    broadcast over array-valued outcome arguments.
    """

    hamiltonian: HamiltonianSpec
    sphere: tuple | None = None
    step: float = 1e-3

    def __post_init__(self):
        if self.hamiltonian.kind not in SUPPORTED_KINDS:
            raise ValueError(f"unsupported Hamiltonian kind {self.hamiltonian.kind!r}")
        if self.hamiltonian.spin_gap != 0.0 and self.sphere is None:
            self.sphere = sphere_lattice()

    def flow(self, frame: HybridFrame) -> np.ndarray:
        """Local advection velocity of the quadrature-frame labels.

        For the two-mode magnetic kind this is only the rigid per-mode
        rotation; the cross-mode transport is nonlocal in the outcomes
        and is added separately by :meth:`apply`.
        """
        kind = self.hamiltonian.kind
        if kind == "spin_diag":
            return np.zeros(0)
        if kind == "free":
            (f,) = frame.symplectic
            return np.array([0.0, f.mu])
        if kind == "trapped":
            (f,) = frame.symplectic
            return np.array([-f.nu, f.mu])
        f1, f2 = frame.symplectic
        return np.array([-f1.nu, f1.mu, -f2.nu, f2.mu])

    def _shifted(self, frame: HybridFrame, flow: np.ndarray, h: float) -> HybridFrame:
        sym = []
        for k, f in enumerate(frame.symplectic):
            sym.append(SymplecticFrame(f.mu + h * flow[2 * k], f.nu + h * flow[2 * k + 1]))
        return HybridFrame(tuple(sym), frame.euler)

    def _cross_transport(self, w, x, frame: HybridFrame, s) -> float:
        """Outcome-nonlocal cross-mode terms of the two-mode magnetic kernel.

        Evaluates d_x1 d_x2^{-1} (mu1 d_mu2 + nu1 d_nu2) w minus the same
        with the mode roles swapped, at a single point.  The inverse
        outcome derivative is the running integral from below the support
        (the integrand has zero total integral), done with a composite
        Simpson rule; ``w`` must broadcast over array outcome arguments.
        """
        f1, f2 = frame.symplectic
        x1c, x2c = (float(x[0]), float(x[1]))
        h = self.step
        hx = 1e-2 * max(f1.radius, f2.radius)

        def shifted(i, delta):
            sym = [[f1.mu, f1.nu], [f2.mu, f2.nu]]
            sym[i // 2][i % 2] += delta
            return HybridFrame(
                (SymplecticFrame(*sym[0]), SymplecticFrame(*sym[1])), frame.euler
            )

        def label_mix(xpair, cmu, cnu, i_mu, i_nu):
            return (
                cmu * (w(xpair, shifted(i_mu, h), s) - w(xpair, shifted(i_mu, -h), s))
                + cnu * (w(xpair, shifted(i_nu, h), s) - w(xpair, shifted(i_nu, -h), s))
            ) / (2.0 * h)

        stencil = hx * np.array([-2.0, -1.0, 1.0, 2.0])
        n_nodes = 513

        line2 = np.linspace(min(0.0, x2c) - 8.0 * f2.radius, x2c, n_nodes)
        rows = label_mix(
            (x1c + stencil[:, None], line2[None, :]), f1.mu, f1.nu, 2, 3
        )
        along = (rows[0] - 8.0 * rows[1] + 8.0 * rows[2] - rows[3]) / (12.0 * hx)
        term = _simpson(along, line2[1] - line2[0])

        line1 = np.linspace(min(0.0, x1c) - 8.0 * f1.radius, x1c, n_nodes)
        cols = label_mix(
            (line1[:, None], x2c + stencil[None, :]), f2.mu, f2.nu, 0, 1
        )
        along = (cols[:, 0] - 8.0 * cols[:, 1] + 8.0 * cols[:, 2] - cols[:, 3]) / (12.0 * hx)
        return term - _simpson(along, line1[1] - line1[0])

    def apply(self, w, x, frame: HybridFrame, s) -> np.ndarray | float:
        """Evaluate (Theta w)(x, frame, s)."""
        if len(frame.symplectic) * 2 != _FLOW_DIM[self.hamiltonian.kind]:
            raise ValueError("frame does not match the Hamiltonian's mode count")
        total = 0.0
        flow = self.flow(frame)
        if flow.size and np.any(flow):
            h = self.step
            samples = [w(x, self._shifted(frame, flow, c * h), s) for c in (-2, -1, 1, 2)]
            total = total + (
                np.asarray(samples[0])
                - 8.0 * np.asarray(samples[1])
                + 8.0 * np.asarray(samples[2])
                - np.asarray(samples[3])
            ) / (12.0 * h)
        if self.hamiltonian.kind == "landau":
            total = total + self._cross_transport(w, x, frame, s)
        gap = self.hamiltonian.spin_gap
        if gap != 0.0:
            frames, weights = self.sphere
            euler = frame.euler
            if euler is None:
                raise ValueError("spin-splitting kernels need an Euler frame")
            up, down = HalfInt(1), HalfInt(-1)
            acc = 0.0
            for fj, wj in zip(frames, weights):
                geom = wj * math.sin(fj.beta) * math.sin(euler.alpha - fj.alpha)
                if geom == 0.0:
                    continue
                source = HybridFrame(frame.symplectic, fj)
                diff = np.asarray(w(x, source, up)) - np.asarray(w(x, source, down))
                acc = acc + geom * 0.5 * diff
            total = total + 6.0 * gap * float(s) * math.sin(euler.beta) * acc
        return total


# ---------------------------------------------------------------------------
# analytic reference solutions


def _spin_pair(euler: EulerFrame, s) -> tuple:
    """Row of the spin-1/2 rotation matrix for projection s: (d_+, d_-)."""
    d = rotation_matrix(HalfInt(1), euler)
    row = _SPIN_UP if HalfInt.of(s) == HalfInt(1) else _SPIN_DOWN
    return d[row, 0], d[row, 1]


def analytic_trapped_solution(x, frame: HybridFrame, s, t: float):
    """Closed-form evolving marginal of the trapped superposition state.

    The state is the equal superposition of (ground level, spin down) and
    (first level, spin up); its marginal is

        w = 1/2 [ w00 |d_-|^2 + w11 |d_+|^2 + 2 Re(w01 e^{3it} d_- conj(d_+)) ]

    with spatial components at frame radius r, tan(theta) = nu/mu:

        w00 = exp(-x^2/r^2)/sqrt(pi r^2)
        w11 = 2 x^2 exp(-x^2/r^2)/sqrt(pi r^6)
        w01 = sqrt(2) x (mu + i nu) exp(-x^2/r^2)/(sqrt(pi) r^3),

    and d_+/- the spin-1/2 rotation amplitudes onto projection s.  The
    oscillation rate 3 is the level gap of the two branches (energies
    -1/2 and 5/2).  Real and nonnegative by construction.
    """
    (sym,) = frame.symplectic
    if frame.euler is None:
        raise ValueError("the trapped solution carries a spin sector")
    x = np.asarray(x, dtype=float)
    r2 = sym.mu**2 + sym.nu**2
    if r2 == 0.0:
        raise ValueError("degenerate symplectic frame")
    gauss = np.exp(-(x**2) / r2)
    w00 = gauss / math.sqrt(math.pi * r2)
    w11 = 2.0 * x**2 * gauss / math.sqrt(math.pi * r2**3)
    w01 = math.sqrt(2.0) * x * (sym.mu + 1j * sym.nu) * gauss / math.sqrt(math.pi * r2**3)
    d_plus, d_minus = _spin_pair(frame.euler, s)
    cross = w01 * np.exp(3.0j * t) * d_minus * np.conj(d_plus)
    out = 0.5 * (w00 * abs(d_minus) ** 2 + w11 * abs(d_plus) ** 2 + 2.0 * cross.real)
    return out if out.ndim else float(out)


def analytic_landau_solution(x1, x2, frame: HybridFrame, s, t: float):
    """Closed-form evolving marginal of the magnetic-field superposition.

    The state superposes (lowest level, spin down) with (first excited
    circular level, spin up).  Spatial components come from the
    level-marginal expansion: the spin-down diagonal is component orders
    (0,0,0,0), the spin-up diagonal (1,1,0,0), and the cross term
    (0,1,0,0), each dressed with the same spin rotation amplitudes as the
    trapped solution.  The cross phase e^{4it} is the energy gap between
    the two branches: the motion levels contribute 1 and 3, the spin
    splitting -1 and +1, so the branch energies are 0 and 4.  (A dense
    matrix propagation of the initial state confirms rate 4.)
    """
    if len(frame.symplectic) != 2:
        raise ValueError("two symplectic frames required")
    if frame.euler is None:
        raise ValueError("the solution carries a spin sector")
    two_mode = _landau.TwoModeFrame.of(*frame.symplectic)
    c00 = _landau.fock_marginal_components((0, 0, 0, 0), x1, x2, two_mode)
    c11 = _landau.fock_marginal_components((1, 1, 0, 0), x1, x2, two_mode)
    c01 = _landau.fock_marginal_components((0, 1, 0, 0), x1, x2, two_mode)
    d_plus, d_minus = _spin_pair(frame.euler, s)
    cross = c01 * np.exp(4.0j * t) * d_minus * np.conj(d_plus)
    out = 0.5 * (
        np.asarray(c00).real * abs(d_minus) ** 2
        + np.asarray(c11).real * abs(d_plus) ** 2
        + 2.0 * cross.real
    )
    out = np.asarray(out)
    return out if out.ndim else float(out)


# ---------------------------------------------------------------------------
# lattice builders


def circle_lattice(
    n_phi: int = DEFAULT_PHI_COUNT,
    n_y: int = DEFAULT_Y_POINTS,
    y_span: float = DEFAULT_Y_SPAN,
) -> tuple:
    """Uniform frame angles and outcome grid for circle marginals."""
    phis = 2.0 * math.pi * np.arange(n_phi) / n_phi
    y = np.linspace(-y_span, y_span, n_y)
    return phis, y


def _eigen_pairs(rho: DensityMatrix, tol: float = 1e-14):
    evals, vecs = np.linalg.eigh(rho.entries)
    keep = np.abs(evals) > tol
    return evals[keep], vecs[:, keep]


def circle_marginal_from_density(
    rho: DensityMatrix,
    n_phi: int = DEFAULT_PHI_COUNT,
    y: np.ndarray | None = None,
    sphere: tuple | None = None,
    time: float = 0.0,
) -> HybridMarginal:
    """Sample a circle-lattice marginal of a Fock or Fock x spin state."""
    phis, y_default = circle_lattice(n_phi)
    y = y_default if y is None else np.asarray(y, dtype=float)
    basis = rho.basis
    factors = basis.factors if basis.kind == "product" else (basis,)
    evals, vecs = _eigen_pairs(rho)
    if len(factors) == 1 and basis.kind == "fock":
        values = np.zeros((len(phis), len(y)))
        for i, phi in enumerate(phis):
            bmat = tomographic_amplitudes(basis.levels, y, SymplecticFrame(math.cos(phi), math.sin(phi)))
            amps = bmat @ vecs
            values[i] = (amps.real**2 + amps.imag**2) @ evals
        return HybridMarginal(kind="circle", values=values, time=time, y=y, phis=phis)
    if (
        len(factors) == 2
        and factors[0].kind == "fock"
        and factors[1].kind == "spin"
        and factors[1].j == HalfInt(1)
    ):
        frames, weights = sphere_lattice() if sphere is None else sphere
        rot = np.stack([rotation_matrix(HalfInt(1), f) for f in frames])  # [K, s, m]
        levels = factors[0].levels
        values = np.zeros((2, len(frames), len(phis), len(y)))
        for i, phi in enumerate(phis):
            bmat = tomographic_amplitudes(levels, y, SymplecticFrame(math.cos(phi), math.sin(phi)))
            # amp[y, m, eig] for each eigenvector reshaped to (levels, 2)
            amp = np.einsum("yl,lme->yme", bmat, vecs.reshape(levels, 2, -1))
            rotated = np.einsum("ksm,yme->ksye", rot, amp)
            values[:, :, i, :] = np.einsum(
                "ksye,e->sky", rotated.real**2 + rotated.imag**2, evals
            )
        return HybridMarginal(
            kind="circle",
            values=values,
            time=time,
            y=y,
            phis=phis,
            spin=HalfInt(1),
            sphere_frames=frames,
            sphere_weights=weights,
        )
    raise ValueError("unsupported basis for circle marginals (fock or fock x spin-1/2)")


def sphere_marginal_from_density(
    rho: DensityMatrix,
    sphere: tuple | None = None,
    time: float = 0.0,
) -> HybridMarginal:
    """Sample a pure-spin marginal on the sphere quadrature lattice."""
    if rho.basis.kind != "spin":
        raise ValueError("sphere marginals require a spin-basis state")
    frames, weights = sphere_lattice() if sphere is None else sphere
    sm = spin_marginal_grid(rho, frames, weights)
    return HybridMarginal(
        kind="sphere",
        values=sm.values.T.copy(),
        time=time,
        spin=rho.basis.j,
        sphere_frames=frames,
        sphere_weights=weights,
    )


def _sample_hybrid(solution, phis, y, frames, time: float) -> np.ndarray:
    values = np.zeros((2, len(frames), len(phis), len(y)))
    spins = (HalfInt(1), HalfInt(-1))
    for i, phi in enumerate(phis):
        hf_sym = (SymplecticFrame(math.cos(phi), math.sin(phi)),)
        for k, euler in enumerate(frames):
            hf = HybridFrame(hf_sym, euler)
            for si, s in enumerate(spins):
                values[si, k, i] = solution(y, hf, s, time)
    return values


def trapped_initial_marginal(
    n_phi: int = DEFAULT_PHI_COUNT,
    y: np.ndarray | None = None,
    sphere: tuple | None = None,
) -> HybridMarginal:
    """Circle-lattice sample of the trapped reference solution at t = 0."""
    phis, y_default = circle_lattice(n_phi)
    y = y_default if y is None else np.asarray(y, dtype=float)
    frames, weights = sphere_lattice() if sphere is None else sphere
    values = _sample_hybrid(analytic_trapped_solution, phis, y, frames, 0.0)
    return HybridMarginal(
        kind="circle",
        values=values,
        time=0.0,
        y=y,
        phis=phis,
        spin=HalfInt(1),
        sphere_frames=frames,
        sphere_weights=weights,
    )


def landau_initial_marginal(
    x1: np.ndarray,
    x2: np.ndarray,
    frame_grids: tuple,
    sphere: tuple | None = None,
) -> HybridMarginal:
    """Rect-lattice sample of the magnetic-field reference solution at t = 0."""
    frames, weights = sphere_lattice() if sphere is None else sphere
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    mu1, nu1, mu2, nu2 = (np.asarray(g, dtype=float) for g in frame_grids)
    values = np.zeros((2, len(frames), len(x1), len(x2), len(mu1), len(nu1), len(mu2), len(nu2)))
    spins = (HalfInt(1), HalfInt(-1))
    xx1 = x1[:, None]
    xx2 = x2[None, :]
    for a, m1 in enumerate(mu1):
        for b, n1 in enumerate(nu1):
            for c, m2 in enumerate(mu2):
                for d, n2 in enumerate(nu2):
                    sym = (SymplecticFrame(m1, n1), SymplecticFrame(m2, n2))
                    for k, euler in enumerate(frames):
                        hf = HybridFrame(sym, euler)
                        for si, s in enumerate(spins):
                            values[si, k, :, :, a, b, c, d] = analytic_landau_solution(
                                xx1, xx2, hf, s, 0.0
                            )
    return HybridMarginal(
        kind="rect",
        values=values,
        time=0.0,
        x=(x1, x2),
        frame_grids=(mu1, nu1, mu2, nu2),
        spin=HalfInt(1),
        sphere_frames=frames,
        sphere_weights=weights,
    )


# ---------------------------------------------------------------------------
# time integration


def _build_rhs(ham: HamiltonianSpec, marg: HybridMarginal):
    """Dispatch to the lattice right-hand side for this generator."""
    kind = ham.kind
    if kind == "free":
        if marg.kind == "circle" and not marg.has_spin:
            phis, y = marg.phis, marg.y
            return lambda values: _circle_free_rhs(values, phis, y)
        if marg.kind == "rect" and not marg.has_spin and marg.modes == 1:
            template = marg
            return lambda values: free_rhs(template.with_values(values))
        raise ValueError("free evolution runs on a spinless circle or one-mode rect lattice")
    if kind == "spin_diag":
        if marg.kind != "sphere":
            raise ValueError("spin_diag evolution runs on a sphere lattice")
        frames, weights, gap = marg.sphere_frames, marg.sphere_weights, ham.spin_gap
        return lambda values: _sphere_rhs(values, frames, weights, gap)
    if kind == "trapped":
        if marg.kind != "circle" or not marg.has_spin:
            raise ValueError("trapped evolution runs on a circle lattice with spin")
        template = marg
        return lambda values: trapped_rhs(template.with_values(values))
    if marg.kind != "rect" or marg.modes != 2 or not marg.has_spin:
        raise ValueError("landau evolution runs on a two-mode rect lattice with spin")
    template = marg
    return lambda values: landau_rect_rhs(template.with_values(values))


def _auto_dt(ham: HamiltonianSpec, marg: HybridMarginal, span: float) -> float:
    candidates = []
    if ham.phase_rate > 0.0:
        candidates.append(2.0 * math.pi / ham.phase_rate / STEPS_PER_PERIOD)
    if marg.kind == "circle":
        d_phi = _uniform_step(marg.phis, "phi")
        candidates.append(0.8 * d_phi)
        if ham.kind == "free":
            d_y = _uniform_step(marg.y, "y")
            y_speed = 0.5 * float(np.max(np.abs(marg.y)))
            if y_speed > 0.0:
                candidates.append(0.8 * d_y / y_speed)
    elif marg.kind == "rect" and ham.kind == "free":
        mu, nu = marg.frame_grids
        speed = float(np.max(np.abs(mu)))
        if speed > 0.0:
            candidates.append(0.8 * _uniform_step(nu, "nu") / speed)
    elif marg.kind == "rect" and ham.kind == "landau":
        mu1, nu1, mu2, nu2 = marg.frame_grids
        speed = max(
            np.max(np.abs(nu1)) + np.max(np.abs(mu2)),
            np.max(np.abs(mu1)) + np.max(np.abs(nu2)),
        )
        step = min(_uniform_step(g, "frame") for g in marg.frame_grids)
        if speed > 0.0:
            candidates.append(0.8 * step / speed)
        # The cross-mode transport couples a frame stencil, an outcome
        # stencil and an inverse outcome derivative; bound its spectral
        # radius by the product of the per-axis symbol maxima (1.372/h for
        # the five-point stencils, span/(2 pi) for the running integral).
        x1, x2 = marg.x
        for coeffs, d_frame, d_x, span in (
            ((mu1, nu1), _uniform_step(mu2, "mu2"), _uniform_step(x1, "x1"), x2[-1] - x2[0]),
            ((mu2, nu2), _uniform_step(mu1, "mu1"), _uniform_step(x2, "x2"), x1[-1] - x1[0]),
        ):
            c = max(float(np.max(np.abs(g))) for g in coeffs)
            radius = c * 1.372**2 * float(span) / (2.0 * math.pi * d_frame * d_x)
            if radius > 0.0:
                candidates.append(2.5 / radius)
    elif marg.kind == "sphere" and abs(ham.spin_gap) > 0.0:
        candidates.append(1.0 / (3.0 * abs(ham.spin_gap)))
    if not candidates:
        return max(span / 100.0, 1e-3)
    dt = min(candidates)
    return min(dt, span) if span > 0.0 else dt


def _spin_decoupling_check(rhs, marg: HybridMarginal) -> None:
    """The diagonal-spin generator must not mix projection sectors."""
    probe = np.zeros_like(marg.values, dtype=float)
    alphas, betas = _sphere_arrays(marg.sphere_frames)
    probe[0] = 0.25 * (1.0 + np.cos(alphas) * np.sin(betas))
    image = rhs(probe)
    if np.any(image[1:] != 0.0):
        raise AssertionError("spin_diag right-hand side couples spin sectors")


def evolve(problem: EvolutionProblem) -> EvolutionResult:
    """Integrate the marginal evolution equation with classic RK4.

    Emits one snapshot per requested time.  The step size resolves the
    fastest component phase with at least 40 steps per period and obeys
    an advection limit for the lattice in use; it can be overridden with
    ``problem.dt``.  Per-frame normalization is tracked against the
    initial marginal, and growth beyond ``problem.growth_limit`` aborts
    (an explicit stepper diverging on an under-resolved lattice).
    """
    ham = problem.hamiltonian
    marg = problem.initial
    if ham.kind == "landau" and not problem.full_lattice:
        raise ValueError(
            "full-lattice landau evolution is expensive and validated only at"
            " smoke level; pass full_lattice=True to run it anyway"
        )
    rhs = _build_rhs(ham, marg)
    if ham.kind == "spin_diag":
        _spin_decoupling_check(rhs, marg)

    t_now = float(marg.time)
    span = problem.times[-1] - t_now
    dt = float(problem.dt) if problem.dt is not None else _auto_dt(ham, marg, span)
    if dt <= 0.0:
        raise ValueError("time step must be positive")

    norms0 = marg.norm_defects() + 1.0
    base = float(np.max(np.abs(norms0)))
    values = marg.values.astype(float, copy=True)
    snapshots = []
    steps = 0
    drift = 0.0

    def _advance(v: np.ndarray, h: float) -> np.ndarray:
        k1 = rhs(v)
        k2 = rhs(v + 0.5 * h * k1)
        k3 = rhs(v + 0.5 * h * k2)
        k4 = rhs(v + h * k3)
        return v + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

    for target in problem.times:
        while target - t_now > 1e-12:
            h = min(dt, target - t_now)
            values = _advance(values, h)
            t_now += h
            steps += 1
            if steps % 25 == 0:
                peak = float(np.max(np.abs(values)))
                if not math.isfinite(peak):
                    raise RuntimeError(
                        f"evolution diverged at t={t_now:.6g} (step {steps}, dt={dt:.3g})"
                    )
        snap = marg.with_values(values.copy(), time=target)
        defects = snap.norm_defects()
        peak_norm = float(np.max(np.abs(defects + 1.0)))
        drift = max(drift, float(np.max(np.abs(defects + 1.0 - norms0))))
        if peak_norm > (1.0 + problem.growth_limit) * max(base, 1.0):
            raise RuntimeError(
                "normalization grew by more than "
                f"{100 * problem.growth_limit:.0f}% at t={target:.6g} "
                f"(peak {peak_norm:.4g}, dt={dt:.3g}, steps={steps}); "
                "the lattice under-resolves this generator"
            )
        snapshots.append(snap)

    diagnostics = {
        "dt": dt,
        "steps": steps,
        "norm_drift": drift,
        "min_value": min(s.min_value() for s in snapshots),
    }
    if drift > problem.norm_tolerance:
        diagnostics["norm_warning"] = (
            f"normalization drifted by {drift:.3g} > tolerance {problem.norm_tolerance:.3g}"
        )
    return EvolutionResult(
        times=problem.times,
        snapshots=tuple(snapshots),
        dt=dt,
        steps=steps,
        norm_drift=drift,
        diagnostics=diagnostics,
    )


def fit_oscillation_rate(times, series) -> float:
    """Least-squares rate of a complex oscillation exp(i omega t).

    Fits a line to the unwrapped phase of ``series``; the slope estimates
    omega.  Points with negligible amplitude are down-weighted to keep
    the unwrapping stable.
    """
    times = np.asarray(times, dtype=float)
    series = np.asarray(series, dtype=complex)
    if times.shape != series.shape or times.size < 2:
        raise ValueError("need matching time/series arrays with at least two samples")
    phase = np.unwrap(np.angle(series))
    weights = np.abs(series)
    scale = float(weights.max())
    if scale == 0.0:
        raise ValueError("series is identically zero")
    weights = np.clip(weights / scale, 1e-3, None)
    coeffs = np.polyfit(times, phase, 1, w=weights)
    return float(coeffs[0])
