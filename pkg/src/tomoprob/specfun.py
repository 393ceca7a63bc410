"""Angular-momentum special functions and multivariate Hermite polynomials.

Conventions used throughout the package:

* rotation matrices D^j_{m'm}(alpha, beta, gamma) = e^{i m' gamma} d^j_{m'm}(beta) e^{i m alpha},
  i.e. the matrix of e^{i gamma J_z} e^{i beta J_y} e^{i alpha J_z} in the |j m> basis,
* basis states ordered by decreasing magnetic number m = j, j-1, ..., -j,
* multivariate Hermite polynomials H^{M}_n(zeta) defined by the generating function
  exp(-1/2 a^T M a + a^T M zeta) = sum_n H^{M}_n(zeta) prod_k a_k^{n_k}/n_k!.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.special import eval_jacobi

__all__ = [
    "HalfInt",
    "HermiteMatrixParam",
    "jacobi_poly",
    "wigner_small_d",
    "wigner_D",
    "wigner_D_matrix",
    "wigner_3j",
    "hermite_multivar",
]


class HalfInt:
    """Exact half-integer, stored as twice its value (an int).

    Supports arithmetic with other half-integers and plain ints, ordering,
    hashing (consistent with the equal float), and float conversion.
    """

    __slots__ = ("twice",)

    def __init__(self, twice_value: int):
        if not isinstance(twice_value, (int, np.integer)):
            raise TypeError("twice_value must be an integer")
        self.twice = int(twice_value)

    @classmethod
    def of(cls, value) -> "HalfInt":
        """Coerce a number to HalfInt. The value must be a multiple of 1/2."""
        if isinstance(value, HalfInt):
            return value
        tw = round(2 * float(value))
        if abs(2 * float(value) - tw) > 1e-9:
            raise ValueError(f"{value!r} is not a half-integer")
        return cls(tw)

    @property
    def is_integer(self) -> bool:
        return self.twice % 2 == 0

    def __float__(self) -> float:
        return self.twice / 2.0

    def __int__(self) -> int:
        if self.twice % 2:
            raise ValueError(f"{self} is not an integer")
        return self.twice // 2

    def __add__(self, other):
        return HalfInt(self.twice + HalfInt.of(other).twice)

    __radd__ = __add__

    def __sub__(self, other):
        return HalfInt(self.twice - HalfInt.of(other).twice)

    def __rsub__(self, other):
        return HalfInt(HalfInt.of(other).twice - self.twice)

    def __neg__(self):
        return HalfInt(-self.twice)

    def __abs__(self):
        return HalfInt(abs(self.twice))

    def __eq__(self, other):
        try:
            return self.twice == HalfInt.of(other).twice
        except (TypeError, ValueError):
            return NotImplemented

    def __lt__(self, other):
        return self.twice < HalfInt.of(other).twice

    def __le__(self, other):
        return self.twice <= HalfInt.of(other).twice

    def __gt__(self, other):
        return self.twice > HalfInt.of(other).twice

    def __ge__(self, other):
        return self.twice >= HalfInt.of(other).twice

    def __hash__(self):
        return hash(self.twice / 2.0)

    def __repr__(self):
        if self.twice % 2 == 0:
            return str(self.twice // 2)
        return f"{self.twice}/2"


def _twice(x) -> int:
    """Twice the value of a half-integer-like number, as an exact int."""
    return HalfInt.of(x).twice


def jacobi_poly(n: int, a, b, x):
    """Jacobi polynomial P_n^{(a,b)}(x); scalar or array x."""
    if n < 0 or int(n) != n:
        raise ValueError("degree must be a nonnegative integer")
    return eval_jacobi(int(n), a, b, x)


def wigner_small_d(j, mp, m, beta):
    """d^j_{m'm}(beta): matrix element of e^{i beta J_y}.

    Accepts half-integer j, mp, m (HalfInt, int or float); beta may be an array.
    Evaluated on the Jacobi-polynomial branch with nonnegative exponents, which
    is stable for all (m', m).
    """
    tj, tmp, tm = _twice(j), _twice(mp), _twice(m)
    if tj < 0:
        raise ValueError("j must be nonnegative")
    if (tj - tmp) % 2 or (tj - tm) % 2:
        raise ValueError("m', m must differ from j by integers")
    if abs(tmp) > tj or abs(tm) > tj:
        raise ValueError("|m'|, |m| must not exceed j")
    # This convention is the transpose of the e^{-i beta J_y} one.
    return _small_d_std(tj, tm, tmp, beta)


def _small_d_std(tj: int, tmp: int, tm: int, beta):
    """Standard-convention d (matrix element of e^{-i beta J_y}), twice-value args."""
    # Branch giving nonnegative integer exponents a, b and degree k.
    candidates = {
        "jm": (tj + tm) // 2,
        "jmm": (tj - tm) // 2,
        "jmp": (tj + tmp) // 2,
        "jmpp": (tj - tmp) // 2,
    }
    key = min(candidates, key=candidates.get)
    k = candidates[key]
    if key == "jm":
        a, lam = (tmp - tm) // 2, (tmp - tm) // 2
    elif key == "jmm":
        a, lam = (tm - tmp) // 2, 0
    elif key == "jmp":
        a, lam = (tm - tmp) // 2, 0
    else:
        a, lam = (tmp - tm) // 2, (tmp - tm) // 2
    b = tj - 2 * k - a
    beta = np.asarray(beta, dtype=float)
    half = beta / 2.0
    coeff = (-1.0) ** lam * math.sqrt(
        math.comb(tj - k, k + a) / math.comb(k + b, b)
    )
    val = coeff * np.sin(half) ** a * np.cos(half) ** b * eval_jacobi(k, a, b, np.cos(beta))
    return val if val.ndim else float(val)


def wigner_D(j, mp, m, alpha, beta, gamma):
    """D^j_{m'm}(alpha, beta, gamma) = e^{i m' gamma} d^j_{m'm}(beta) e^{i m alpha}."""
    fmp, fm = float(HalfInt.of(mp)), float(HalfInt.of(m))
    alpha = np.asarray(alpha, dtype=float)
    gamma = np.asarray(gamma, dtype=float)
    val = np.exp(1j * fmp * gamma) * wigner_small_d(j, mp, m, beta) * np.exp(1j * fm * alpha)
    return val if val.ndim else complex(val)


def wigner_D_matrix(j, alpha, beta, gamma) -> np.ndarray:
    """Full (2j+1)x(2j+1) rotation matrix, rows/columns ordered m = j ... -j."""
    tj = _twice(j)
    dim = tj + 1
    out = np.empty((dim, dim), dtype=complex)
    for r in range(dim):
        tmp = tj - 2 * r
        for c in range(dim):
            tm = tj - 2 * c
            out[r, c] = wigner_D(HalfInt(tj), HalfInt(tmp), HalfInt(tm), alpha, beta, gamma)
    return out


def _fact(n: int) -> int:
    if n < 0:
        raise ValueError("negative factorial")
    return math.factorial(n)


def wigner_3j(j1, j2, j3, m1, m2, m3) -> float:
    """Wigner 3j symbol, exact rational arithmetic inside, float out.

    Selection-rule violations return 0.0 rather than raising.
    """
    tj1, tj2, tj3 = _twice(j1), _twice(j2), _twice(j3)
    tm1, tm2, tm3 = _twice(m1), _twice(m2), _twice(m3)
    if tj1 < 0 or tj2 < 0 or tj3 < 0:
        return 0.0
    if tm1 + tm2 + tm3 != 0:
        return 0.0
    if (tj1 + tj2 + tj3) % 2:
        return 0.0
    for tj, tm in ((tj1, tm1), (tj2, tm2), (tj3, tm3)):
        if abs(tm) > tj or (tj - tm) % 2:
            return 0.0
    if tj3 > tj1 + tj2 or tj3 < abs(tj1 - tj2):
        return 0.0

    # All of these are nonnegative integers now.
    p1 = (tj1 + tj2 - tj3) // 2
    p2 = (tj1 - tj2 + tj3) // 2
    p3 = (-tj1 + tj2 + tj3) // 2
    J = (tj1 + tj2 + tj3) // 2
    delta = Fraction(_fact(p1) * _fact(p2) * _fact(p3), _fact(J + 1))
    norm = Fraction(
        _fact((tj1 + tm1) // 2) * _fact((tj1 - tm1) // 2)
        * _fact((tj2 + tm2) // 2) * _fact((tj2 - tm2) // 2)
        * _fact((tj3 + tm3) // 2) * _fact((tj3 - tm3) // 2)
    )

    # Racah sum; t runs over values keeping every factorial argument >= 0.
    c1 = (tj3 - tj2 + tm1) // 2   # j3 - j2 + m1
    c2 = (tj3 - tj1 - tm2) // 2   # j3 - j1 - m2
    tmin = max(0, -c1, -c2)
    tmax = min(p1, (tj1 - tm1) // 2, (tj2 + tm2) // 2)
    if tmin > tmax:
        return 0.0
    ssum = Fraction(0)
    for t in range(tmin, tmax + 1):
        den = (
            _fact(t) * _fact(c1 + t) * _fact(c2 + t)
            * _fact(p1 - t) * _fact((tj1 - tm1) // 2 - t) * _fact((tj2 + tm2) // 2 - t)
        )
        ssum += Fraction((-1) ** t, den)
    if ssum == 0:
        return 0.0
    sign = (-1) ** ((tj1 - tj2 - tm3) // 2) * (1 if ssum > 0 else -1)
    radicand = ssum * ssum * delta * norm
    return sign * math.sqrt(radicand.numerator / radicand.denominator)


@dataclass(frozen=True)
class HermiteMatrixParam:
    """Symmetric complex matrix parameterizing a multivariate Hermite family."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("matrix must be square")
        if m.shape[0] and np.max(np.abs(m - m.T)) > 1e-12:
            raise ValueError("matrix must be symmetric")
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


_HERMITE_ORDER_CAP = 16


def hermite_multivar(M, orders, zeta):
    """Multivariate Hermite polynomial H^{M}_orders(zeta).

    M : HermiteMatrixParam or symmetric complex matrix, shape (n, n)
    orders : tuple of n nonnegative ints (total degree capped)
    zeta : array with last axis of length n; broadcasting over leading axes.

    Defined by exp(-1/2 a^T M a + a^T M zeta) = sum_n H_n(zeta) prod a^n/n!,
    computed with the downward recurrence
    H_{n+e_k} = (M zeta)_k H_n - sum_l M_{kl} n_l H_{n-e_l}.
    """
    if not isinstance(M, HermiteMatrixParam):
        M = HermiteMatrixParam(np.asarray(M, dtype=complex))
    mat = M.matrix
    n = M.dim
    orders = tuple(int(o) for o in orders)
    if len(orders) != n:
        raise ValueError("orders length must match matrix dimension")
    if any(o < 0 for o in orders):
        raise ValueError("orders must be nonnegative")
    if sum(orders) > _HERMITE_ORDER_CAP:
        raise ValueError(f"total order exceeds cap {_HERMITE_ORDER_CAP}")
    zeta = np.asarray(zeta, dtype=complex)
    if zeta.shape[-1] != n:
        raise ValueError("zeta last axis must match matrix dimension")
    w = zeta @ mat.T  # (M zeta)_k, broadcast over leading axes
    base_shape = zeta.shape[:-1]
    memo = {(0,) * n: np.ones(base_shape, dtype=complex)}

    def value(idx):
        try:
            return memo[idx]
        except KeyError:
            pass
        k = next(i for i, v in enumerate(idx) if v > 0)
        prev = list(idx)
        prev[k] -= 1
        prev_t = tuple(prev)
        acc = w[..., k] * value(prev_t)
        for l in range(n):
            if prev_t[l] > 0:
                lower = list(prev_t)
                lower[l] -= 1
                acc = acc - mat[k, l] * prev_t[l] * value(tuple(lower))
        memo[idx] = acc
        return acc

    out = value(orders)
    return out if base_shape else complex(out)
