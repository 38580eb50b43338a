"""Effective electron-electron interactions in the lowest Landau band.

Every interaction handled here is a convex combination

    W(x) = sum_j b_j (1/sqrt(2)) V_j(x / sqrt(2)).

The weights are produced in exact rational arithmetic from the
centre-of-mass / relative change of variables
sigma = (zeta_1 + zeta_2)/sqrt(2), tau = (zeta_1 - zeta_2)/sqrt(2),
with s = |sigma|, t = |tau| and theta the angle between them, so that

    |zeta_1|^2 = (s^2 + t^2 + 2 s t cos theta) / 2
    |zeta_2|^2 = (s^2 + t^2 - 2 s t cos theta) / 2.

The brute-force ``oracle_*`` functions integrate the original integrands
numerically over (s, t, theta) and share no algebra with the coefficient
routines.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from math import comb, factorial
from typing import Sequence

import numpy as np
from scipy import integrate
from scipy.special import roots_laguerre

from .errors import AccuracyError, InvalidInputError
from .potentials import DEFAULT_QUAD, QuadratureSpec, _check_m, vm

SQRT2 = math.sqrt(2.0)

ORIGINS = ("product-pair", "slater-pair", "determinant", "custom")


@dataclass(frozen=True)
class CoefficientVector:
    weights: tuple[float, ...]
    origin: str = "custom"
    exact: tuple[Fraction, ...] | None = None

    def __post_init__(self):
        if self.origin not in ORIGINS:
            raise InvalidInputError(f"unknown origin {self.origin!r}")
        if len(self.weights) == 0:
            raise InvalidInputError("coefficient vector is empty")
        w = np.asarray(self.weights, dtype=float)
        if not np.all(np.isfinite(w)) or np.any(w < -1e-12):
            raise InvalidInputError("weights must be finite and nonnegative")
        if abs(w.sum() - 1.0) > 1e-10:
            raise InvalidInputError(f"weights sum to {w.sum()!r}, expected 1")

    @classmethod
    def from_fractions(cls, fr: Sequence[Fraction], origin: str) -> "CoefficientVector":
        fr = tuple(Fraction(f) for f in fr)
        return cls(tuple(float(f) for f in fr), origin, fr)

    @property
    def J(self) -> int:
        return len(self.weights) - 1

    @property
    def support(self) -> list[int]:
        return [j for j, b in enumerate(self.weights) if b != 0.0]

    def as_array(self) -> np.ndarray:
        return np.asarray(self.weights, dtype=float)


def _normalize(raw: Sequence[Fraction]) -> list[Fraction]:
    total = sum(raw)
    if total <= 0:
        raise InvalidInputError("degenerate interaction (all weights vanish)")
    return [r / total for r in raw]


@lru_cache(maxsize=None)
def _pair_fractions(m1: int, m2: int) -> tuple[Fraction, ...]:
    M = m1 + m2
    # coefficient of c^p in (a + c)^m1 (a - c)^m2, with a = s^2+t^2, c = 2 s t cos(theta)
    cpow = [sum(comb(m1, i) * comb(m2, p - i) * (-1) ** (p - i)
                for i in range(max(0, p - m2), min(m1, p) + 1))
            for p in range(M + 1)]
    raw = [0] * (M + 1)
    for q in range(M // 2 + 1):
        cq = cpow[2 * q]
        if cq == 0:
            continue
        # angular average of cos^{2q} is C(2q,q)/4^q; it cancels the 2^{2q} from c^{2q}
        ang = comb(2 * q, q)
        rest = M - 2 * q
        for r in range(rest + 1):
            j = M - q - r
            # s-moment (r+q)!/2 and t-moment j!/2 -> common factor dropped
            raw[j] += cq * ang * comb(rest, r) * factorial(r + q) * factorial(j)
    return tuple(_normalize([Fraction(v) for v in raw]))


def pair_coefficients(m1: int, m2: int) -> CoefficientVector:
    """Weights b_j with W_{m1,m2}(x) = sum_j b_j V_j(x/sqrt2)/sqrt2, j <= m1+m2."""
    m1, m2 = _check_m(m1), _check_m(m2)
    return CoefficientVector.from_fractions(_pair_fractions(min(m1, m2), max(m1, m2)),
                                            "product-pair")


def slater_amplitudes(j: int, k: int) -> list[int]:
    """Integer A_alpha * 2^{(j+k)/2} for zeta1^j zeta2^k - zeta1^k zeta2^j."""
    J = j + k
    amps = []
    for alpha in range(J + 1):
        acc = 0
        for nu in range(max(0, alpha - k), min(j, alpha) + 1):
            mu = alpha - nu
            acc += ((-1) ** mu - (-1) ** nu) * comb(j, nu) * comb(k, mu)
        amps.append(acc)
    return amps


@lru_cache(maxsize=None)
def _slater_fractions(j: int, k: int) -> tuple[Fraction, ...]:
    J = j + k
    amps = slater_amplitudes(j, k)
    raw = [Fraction(a * a * factorial(J - alpha) * factorial(alpha))
           for alpha, a in enumerate(amps)]
    return tuple(_normalize(raw))


def slater_pair_coefficients(j: int, k: int) -> CoefficientVector:
    """Weights for the antisymmetrized pair gamma_j ^ gamma_k (odd indices only)."""
    j, k = _check_m(j), _check_m(k)
    if j == k:
        raise InvalidInputError("antisymmetric pair with j == k vanishes")
    return CoefficientVector.from_fractions(_slater_fractions(min(j, k), max(j, k)),
                                            "slater-pair")


def det_coefficients(m_list: Sequence[int]) -> CoefficientVector:
    """Uniform average of the pair weights over all pairs of a Slater determinant."""
    ms = [_check_m(m) for m in m_list]
    if len(ms) < 2:
        raise InvalidInputError("a determinant needs at least two Landau states")
    if len(set(ms)) != len(ms):
        raise InvalidInputError(f"duplicate Landau indices in {ms}")
    if ms != sorted(ms):
        raise InvalidInputError("Landau indices must be strictly increasing")
    J = ms[-2] + ms[-1]
    acc = [Fraction(0)] * (J + 1)
    pairs = list(combinations(ms, 2))
    for a, b in pairs:
        for i, f in enumerate(_slater_fractions(a, b)):
            acc[i] += f
    return CoefficientVector.from_fractions([f / len(pairs) for f in acc], "determinant")


def w_values(coeffs: CoefficientVector, x, quad: QuadratureSpec = DEFAULT_QUAD):
    """Vectorized sum_j b_j V_j(x/sqrt2)/sqrt2."""
    xa = np.asarray(x, dtype=float) / SQRT2
    acc = np.zeros(xa.shape)
    for j, b in enumerate(coeffs.weights):
        if b != 0.0:
            acc = acc + b * vm(j, xa, quad)
    acc = acc / SQRT2
    return float(acc) if xa.ndim == 0 else acc


def eval_w(coeffs: CoefficientVector, x: float, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    return float(w_values(coeffs, float(x), quad))


# ---------------------------------------------------------------------------
# brute-force oracles

def _oracle_integral(density, x: float, degree: int, quad: QuadratureSpec) -> float:
    """int s ds int t dt int dtheta density(s,t,theta) e^{-s^2-t^2} / sqrt(x^2 + 2 t^2).

    ``density`` is a polynomial in s, t, cos/sin(theta) of total degree
    ``degree`` in (s, t).  The s-integral uses Gauss-Laguerre in u = s^2, the
    angle a uniform periodic trapezoid, and the t-integral adaptive quadrature
    in w = sqrt(x^2 + 2 t^2), which removes the near-singularity at small x.
    """
    n_theta = max(16, 8 * (degree + 1))
    theta = 2 * np.pi * np.arange(n_theta) / n_theta
    n_u = degree + 8
    u, wu = roots_laguerre(n_u)
    s = np.sqrt(u)[:, None]
    ax = abs(x)

    def angular_radial(t: float) -> float:
        vals = density(s, t, theta[None, :])
        # s ds -> du/2; theta trapezoid weight 2pi/n
        return math.exp(-(t * t)) * float(wu @ vals.mean(axis=1)) * np.pi

    t_max = math.sqrt(60.0 + 6.0 * degree)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        if ax < 1.0:
            # t dt / sqrt(x^2 + 2 t^2) = dw / 2 with w = sqrt(x^2 + 2 t^2)
            def integrand(w):
                return 0.5 * angular_radial(math.sqrt(max(0.5 * (w * w - ax * ax), 0.0)))
            lo, hi = ax, math.sqrt(ax * ax + 2.0 * t_max ** 2)
        else:
            def integrand(t):
                return t * angular_radial(t) / math.sqrt(ax * ax + 2.0 * t * t)
            lo, hi = 0.0, t_max
        val, err = integrate.quad(integrand, lo, hi, epsabs=0.0, epsrel=1e-12, limit=400)
    if not np.isfinite(val) or err > max(1e-9 * abs(val), quad.abs_tol):
        raise AccuracyError("oracle quadrature did not converge", val, err)
    return val


def oracle_w_direct(m1: int, m2: int, x: float, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """W_{m1,m2}(x) by direct quadrature of |zeta1|^{2 m1} |zeta2|^{2 m2}."""
    m1, m2 = _check_m(m1), _check_m(m2)
    if max(m1, m2) > 8:
        raise InvalidInputError("oracle limited to Landau indices <= 8")

    def density(s, t, th):
        a = s * s + t * t
        c = 2.0 * s * t * np.cos(th)
        return (0.5 * (a + c)) ** m1 * (0.5 * (a - c)) ** m2

    # sigma, tau phases contribute 2pi once theta is fixed; normalization 1/(pi^2 m1! m2!)
    norm = 2.0 * np.pi / (np.pi ** 2 * factorial(m1) * factorial(m2))
    return norm * _oracle_integral(density, x, 2 * (m1 + m2), quad)


def oracle_w_slater_pair(j: int, k: int, x: float, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """Antisymmetrized pair interaction by direct quadrature of |z1^j z2^k - z1^k z2^j|^2."""
    j, k = _check_m(j), _check_m(k)
    if j == k:
        raise InvalidInputError("antisymmetric pair with j == k vanishes")
    if max(j, k) > 8:
        raise InvalidInputError("oracle limited to Landau indices <= 8")

    def density(s, t, th):
        tau = t * np.exp(1j * th)
        z1 = (s + tau) / SQRT2
        z2 = (s - tau) / SQRT2
        return np.abs(z1 ** j * z2 ** k - z1 ** k * z2 ** j) ** 2

    # |psi|^2 with psi = (g_j g_k - g_k g_j)/sqrt2
    norm = 2.0 * np.pi / (2.0 * np.pi ** 2 * factorial(j) * factorial(k))
    return norm * _oracle_integral(density, x, 2 * (j + k), quad)
