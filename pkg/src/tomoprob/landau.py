"""Two-mode quadrature marginals of a charge moving on Landau levels.

The planar motion of a charge in a uniform axial magnetic field separates
into two oscillator modes.  This module evaluates the joint marginal
distribution of the pair of rotated quadratures X_k = mu_k q_k + nu_k p_k
in closed form: a two-mode Gaussian for the magnetic coherent states and,
for number (Landau level) states, that Gaussian times a four-variable
Hermite polynomial whose matrix parameter is built from the two frame
phases.  A ladder construction of the number states is included so the
closed forms can be checked against direct quadrature.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .qstate import BasisDescriptor, LandauCoherentParams, PureState
from .specfun import HermiteMatrixParam, hermite_multivar

__all__ = [
    "TwoModeFrame",
    "coherent_marginal",
    "m_matrix",
    "zeta_args",
    "fock_marginal_components",
    "landau_level_marginal",
    "landau_number_state",
]


@dataclass(frozen=True)
class TwoModeFrame:
    """Pair of quadrature frames X_k = mu_k q_k + nu_k p_k for k = 1, 2."""

    mu1: float
    nu1: float
    mu2: float
    nu2: float

    def __post_init__(self):
        for name in ("mu1", "nu1", "mu2", "nu2"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if self.mu1 == 0.0 and self.nu1 == 0.0:
            raise ValueError("mode 1 frame (0, 0) is not allowed")
        if self.mu2 == 0.0 and self.nu2 == 0.0:
            raise ValueError("mode 2 frame (0, 0) is not allowed")

    @classmethod
    def of(cls, frame1, frame2) -> "TwoModeFrame":
        """Build from two single-mode frames with .mu/.nu attributes."""
        return cls(frame1.mu, frame1.nu, frame2.mu, frame2.nu)

    @property
    def r1(self) -> float:
        return math.hypot(self.mu1, self.nu1)

    @property
    def r2(self) -> float:
        return math.hypot(self.mu2, self.nu2)

    @property
    def tau1(self) -> float:
        """Frame phase with tan(tau1) = mu1/nu1, quadrant aware."""
        return math.atan2(self.mu1, self.nu1)

    @property
    def tau2(self) -> float:
        return math.atan2(self.mu2, self.nu2)


def coherent_marginal(params: LandauCoherentParams, x1, x2, frame: TwoModeFrame):
    """Joint marginal of a magnetic coherent state, closed form.

    A two-mode Gaussian; each mode contributes

        E_k = -x_k^2/r_k^2 + Re[(nu_k + i mu_k)(nu_k c_k^2 - 2 i x_k c_k)]/r_k^2

    with c_1 = i*alpha + beta and c_2 = alpha + i*beta, and the overall
    weight is exp(-|alpha|^2 - |beta|^2 + 2 Im(alpha*beta)) / (pi r_1 r_2).
    Written this way the 1/nu_k poles of the raw exponent are cancelled
    explicitly, so the expression stays finite for nu_k -> 0 and reduces to
    the rescaled position density |Psi(x1/mu1, x2/mu2)|^2 / |mu1 mu2| there.
    """
    a, b = complex(params.alpha), complex(params.beta_c)
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    c1 = 1j * a + b
    c2 = a + 1j * b
    r1sq = frame.mu1**2 + frame.nu1**2
    r2sq = frame.mu2**2 + frame.nu2**2
    e1 = (
        -(x1**2) / r1sq
        + ((frame.nu1 + 1j * frame.mu1) * (frame.nu1 * c1 * c1 - 2j * x1 * c1)).real
        / r1sq
    )
    e2 = (
        -(x2**2) / r2sq
        + ((frame.nu2 + 1j * frame.mu2) * (frame.nu2 * c2 * c2 - 2j * x2 * c2)).real
        / r2sq
    )
    weight = math.exp(-abs(a) ** 2 - abs(b) ** 2 + 2.0 * (a * b).imag)
    out = weight * np.exp(e1 + e2) / (math.pi * math.sqrt(r1sq * r2sq))
    return out if np.ndim(out) else float(out)


def _mode_phase_factor(mu: float, nu: float) -> complex:
    """g = nu / (nu - i mu) = cos(tau) e^{i tau} with tan(tau) = mu/nu."""
    return nu * (nu + 1j * mu) / (mu * mu + nu * nu)


def m_matrix(frame: TwoModeFrame) -> HermiteMatrixParam:
    """Symmetric 4x4 matrix parameter of the marginal's Hermite polynomial.

    Rows/columns follow the label order (alpha, alpha*, beta, beta*) of the
    coherent expansion.  Entries couple only labels of equal total parity,
    so the matrix has a checkerboard of zeros.
    """
    g1 = _mode_phase_factor(frame.mu1, frame.nu1)
    g2 = _mode_phase_factor(frame.mu2, frame.nu2)
    m = np.zeros((4, 4), dtype=complex)
    m[0, 0] = g1 - g2
    m[1, 1] = (g1 - g2).conjugate()
    m[2, 2] = g2 - g1
    m[3, 3] = (g2 - g1).conjugate()
    m[0, 2] = m[2, 0] = -1j * (g1 + g2 - 1.0)
    m[1, 3] = m[3, 1] = (-1j * (g1 + g2 - 1.0)).conjugate()
    return HermiteMatrixParam(m)


def zeta_args(x1, x2, frame: TwoModeFrame) -> np.ndarray:
    """Hermite arguments (zeta1, conj zeta1, zeta2, conj zeta2).

    zeta1 = x1 e^{-i tau1}/r1 + i x2 e^{-i tau2}/r2 and
    zeta2 = i x1 e^{-i tau1}/r1 + x2 e^{-i tau2}/r2, stacked on the last
    axis so the result feeds hermite_multivar directly.
    """
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    f1 = cmath.exp(-1j * frame.tau1) / frame.r1
    f2 = cmath.exp(-1j * frame.tau2) / frame.r2
    z1 = x1 * f1 + 1j * (x2 * f2)
    z2 = 1j * (x1 * f1) + x2 * f2
    return np.stack(
        np.broadcast_arrays(z1, z1.conjugate(), z2, z2.conjugate()), axis=-1
    )


def fock_marginal_components(orders, x1, x2, frame: TwoModeFrame):
    """Coherent-label Taylor component w_{n1 n2 n1' n2'} of the marginal.

    These are the coefficients of the expansion

        w_coh * e^{|alpha|^2 + |beta|^2}
          = sum alpha^{n1} conj(alpha)^{n2} beta^{n1'} conj(beta)^{n2'}
                * w_{n1 n2 n1' n2'} / sqrt(n1! n2! n1'! n2'!),

    evaluated as the base Gaussian times a four-variable Hermite polynomial
    over sqrt of the order factorials.  Components with n1 = n2, n1' = n2'
    are the (real) marginals of the number states; mixed orders are the
    interference terms between different number states.
    """
    orders = tuple(int(o) for o in orders)
    if len(orders) != 4:
        raise ValueError("orders must be a 4-tuple (n1, n2, n1', n2')")
    if any(o < 0 for o in orders):
        raise ValueError("orders must be nonnegative")
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    r1sq = frame.mu1**2 + frame.nu1**2
    r2sq = frame.mu2**2 + frame.nu2**2
    base = np.exp(-(x1**2) / r1sq - (x2**2) / r2sq) / (
        math.pi * math.sqrt(r1sq * r2sq)
    )
    poly = hermite_multivar(m_matrix(frame), orders, zeta_args(x1, x2, frame))
    norm = math.sqrt(
        math.factorial(orders[0])
        * math.factorial(orders[1])
        * math.factorial(orders[2])
        * math.factorial(orders[3])
    )
    out = base * poly / norm
    return out if np.ndim(out) else complex(out)


def landau_level_marginal(n: int, n_prime: int, x1, x2, frame: TwoModeFrame):
    """Real marginal w_{n n'} of the Landau number state Psi_{n n'}."""
    vals = fock_marginal_components((n, n, n_prime, n_prime), x1, x2, frame)
    out = np.real(vals)
    return out if np.ndim(out) else float(out)


def landau_number_state(n: int, n_prime: int, levels: int) -> PureState:
    """Ladder-built number state on a truncated two-mode Fock basis.

    Psi_{n n'} = i^n (A_minus^dag)^n (A_plus^dag)^{n'} |0 0> / sqrt(n! n'!)
    with the circular modes A_pm = (a_1 -/+ i a_2)/sqrt(2).  The truncation
    is exact whenever n + n' <= levels - 1, because the circular ladders
    preserve the total excitation number.
    """
    if n < 0 or n_prime < 0:
        raise ValueError("level indices must be nonnegative")
    if n + n_prime > levels - 1:
        raise ValueError("levels too small: need n + n' <= levels - 1")
    basis = BasisDescriptor.product(
        BasisDescriptor.fock(levels), BasisDescriptor.fock(levels)
    )
    a = np.diag(np.sqrt(np.arange(1, levels)), 1)
    eye = np.eye(levels)
    ad1 = np.kron(a.conj().T, eye)
    ad2 = np.kron(eye, a.conj().T)
    minus_dag = (ad1 - 1j * ad2) / math.sqrt(2.0)
    plus_dag = (ad1 + 1j * ad2) / math.sqrt(2.0)
    vec = np.zeros(levels * levels, dtype=complex)
    vec[0] = 1.0
    for _ in range(n_prime):
        vec = plus_dag @ vec
    for _ in range(n):
        vec = minus_dag @ vec
    vec *= (1j**n) / math.sqrt(math.factorial(n) * math.factorial(n_prime))
    return PureState(basis, vec)
