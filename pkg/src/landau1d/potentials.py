"""Regularized Coulomb potentials of the lowest Landau band.

With unit field the potential of the Landau state of angular momentum -m is

    V_m(x) = (1/m!) int_0^inf u^m e^{-u} / sqrt(x^2 + u) du,

and for field strength B one has V_m^B(x) = sqrt(B) V_m(sqrt(B) x).

Three evaluation regimes are used:

* m = 0: V_0(x) = sqrt(pi) e^{x^2} erfc(|x|), computed with the scaled
  complementary error function so nothing overflows.
* x^2 > ``asymptotic_factor * (m + 1)``: the large-|x| series
  (1/|x|) sum_k binom(-1/2, k) (m+k)!/m! x^{-2k}.
* otherwise: Gauss-Legendre quadrature of the shifted form
  V_m(x) = (2/m!) int_0^inf r^m (r + 2|x|)^m e^{-r(r + 2|x|)} dr
  (substitute u = r^2 + 2|x| r).  The shifted integrand is entire, so the
  rule converges geometrically for every x, including x -> 0 where the
  plain u-integrand has a branch point at u = -x^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy.special import erfcx, gammaln

from .errors import AccuracyError, InvalidInputError

SQRT_PI = math.sqrt(math.pi)


class _Unbounded(float):
    """Tagged +inf used where an envelope bound diverges (m = 0, x = 0)."""

    def __new__(cls):
        return super().__new__(cls, "inf")

    def __repr__(self) -> str:
        return "UNBOUNDED"

    __str__ = lambda self: "unbounded"  # noqa: E731


UNBOUNDED = _Unbounded()


@dataclass(frozen=True)
class QuadratureSpec:
    node_count: int = 64
    rel_tol: float = 1e-12
    abs_tol: float = 1e-15
    max_refinements: int = 6
    # regime switch: series when x^2 > asymptotic_factor * (m + 1)
    asymptotic_factor: float = 100.0

    def __post_init__(self):
        if self.node_count < 2:
            raise InvalidInputError("node_count must be >= 2")
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise InvalidInputError("rel_tol and abs_tol must be positive")
        if self.max_refinements < 0:
            raise InvalidInputError("max_refinements must be >= 0")


DEFAULT_QUAD = QuadratureSpec()


@dataclass(frozen=True)
class FieldParams:
    Z: float
    B: float

    def __post_init__(self):
        if not (self.Z > 0 and self.B > 0):
            raise InvalidInputError("Z and B must be positive")

    @property
    def M(self) -> float:
        """Effective mass B^{-1/2} of the scaled one-dimensional problem."""
        return self.B ** -0.5


def _check_m(m) -> int:
    if isinstance(m, bool) or int(m) != m or m < 0:
        raise InvalidInputError(f"Landau index must be a nonnegative integer, got {m!r}")
    return int(m)


@lru_cache(maxsize=32)
def _legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    t, w = np.polynomial.legendre.leggauss(n)
    t.flags.writeable = False
    w.flags.writeable = False
    return t, w


def _vm_quadrature(m: int, ax: np.ndarray, n: int) -> np.ndarray:
    # tail of the Gamma(m+1) density beyond umax is below e^-40 relative
    umax = m + 41.0 + 12.0 * math.sqrt(m + 1.0)
    t, w = _legendre(n)
    out = np.empty_like(ax)
    chunk = max(1, 2_000_000 // n)
    lg_norm = math.log(2.0) - gammaln(m + 1)
    for lo in range(0, ax.size, chunk):
        x = ax[lo:lo + chunk, None]
        rmax = np.sqrt(x * x + umax) - x
        r = 0.5 * rmax * (t + 1.0)
        log_f = m * (np.log(r) + np.log(r + 2.0 * x)) - r * (r + 2.0 * x) + lg_norm
        out[lo:lo + chunk] = 0.5 * rmax[:, 0] * (np.exp(log_f) @ w)
    return out


def _vm_asymptotic(m: int, ax: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    inv = 1.0 / (ax * ax)
    term = np.ones_like(ax)
    total = np.ones_like(ax)
    for k in range(200):
        term = term * (-(k + 0.5) / (k + 1.0)) * (m + k + 1.0) * inv
        total = total + term
        if np.all(np.abs(term) <= 1e-17 * np.abs(total)):
            break
    return total / ax, np.abs(term) / ax


def vm(m: int, x, quad: QuadratureSpec = DEFAULT_QUAD):
    """Vectorized V_m(x).  Returns a float for scalar input, else an array."""
    m = _check_m(m)
    xa = np.asarray(x, dtype=float)
    ax = np.abs(xa).ravel()
    if not np.all(np.isfinite(ax)):
        raise InvalidInputError("x must be finite")
    out = np.empty_like(ax)

    if m == 0:
        out[:] = SQRT_PI * erfcx(ax)
    else:
        asym = ax * ax > quad.asymptotic_factor * (m + 1)
        if np.any(asym):
            out[asym], _ = _vm_asymptotic(m, ax[asym])
        todo = np.flatnonzero(~asym)
        if todo.size:
            out[todo] = _refine(m, ax[todo], quad)

    if xa.ndim == 0:
        return float(out[0])
    return out.reshape(xa.shape)


def _refine(m: int, ax: np.ndarray, quad: QuadratureSpec) -> np.ndarray:
    n = quad.node_count
    prev = _vm_quadrature(m, ax, n)
    result = prev.copy()
    pending = np.arange(ax.size)
    err = np.full(ax.size, np.inf)
    for _ in range(quad.max_refinements):
        n *= 2
        cur = _vm_quadrature(m, ax[pending], n)
        e = np.abs(cur - prev[pending])
        result[pending] = cur
        err[pending] = e
        ok = e <= np.maximum(quad.abs_tol, quad.rel_tol * np.abs(cur))
        prev[pending] = cur
        pending = pending[~ok]
        if pending.size == 0:
            return result
    i = pending[0]
    raise AccuracyError(
        f"V_{m}({ax[i]:.6g}) did not converge after {quad.max_refinements} refinements",
        float(result[i]), float(err[i]))


def eval_vm(m: int, x: float, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    return float(vm(m, float(x), quad))


def vm_field(m: int, B: float, x, quad: QuadratureSpec = DEFAULT_QUAD):
    if not B > 0:
        raise InvalidInputError("B must be positive")
    sb = math.sqrt(B)
    return sb * vm(m, sb * np.asarray(x, dtype=float), quad)


def eval_vm_field(m: int, B: float, x: float, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """V_m^B(x) = sqrt(B) V_m(sqrt(B) x)."""
    return float(vm_field(m, B, float(x), quad))


def vav(N: int, x, quad: QuadratureSpec = DEFAULT_QUAD):
    """Slater-model nuclear potential: mean of V_0 ... V_{N-1}."""
    if isinstance(N, bool) or int(N) != N or N < 1:
        raise InvalidInputError("N must be a positive integer")
    xa = np.asarray(x, dtype=float)
    acc = np.zeros(xa.shape)
    for j in range(int(N)):
        acc = acc + vm(j, xa, quad)
    acc = acc / N
    return float(acc) if xa.ndim == 0 else acc


def eval_vav(N: int, x: float, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    return float(vav(N, float(x), quad))


def vav_refined(N: int, x, quad: QuadratureSpec = DEFAULT_QUAD):
    """Diagnostic 2 V_N(x) - (2 x^2 / N)(1/|x| - V_{N-1}(x)).

    Offered for comparison against ``vav``; it is not used by any bound.
    """
    xa = np.abs(np.asarray(x, dtype=float))
    with np.errstate(divide="ignore", invalid="ignore"):
        val = 2.0 * vm(N, xa, quad) - (2.0 * xa / N) * (1.0 - xa * vm(N - 1, xa, quad))
    return float(val) if np.ndim(val) == 0 else val


def vm_envelope(m: int, x: float) -> tuple[float, float]:
    """Strict bounds (1/sqrt(x^2+m+1), 1/sqrt(x^2+m)) on V_m(x)."""
    m = _check_m(m)
    x2 = float(x) ** 2
    lower = 1.0 / math.sqrt(x2 + m + 1)
    upper = UNBOUNDED if x2 + m == 0 else 1.0 / math.sqrt(x2 + m)
    return lower, upper


@dataclass(frozen=True)
class Grid1D:
    """Uniform symmetric grid on [-L, L] with n points (n odd, so 0 is a node)."""

    L: float
    n: int

    def __post_init__(self):
        if not self.L > 0:
            raise InvalidInputError("half extent L must be positive")
        if self.n < 3 or self.n % 2 == 0:
            raise InvalidInputError("grid needs an odd number of points >= 3")

    @property
    def h(self) -> float:
        return 2.0 * self.L / (self.n - 1)

    @property
    def x(self) -> np.ndarray:
        return np.linspace(-self.L, self.L, self.n)


def vm_table(m_list: Sequence[int], x, quad: QuadratureSpec = DEFAULT_QUAD) -> np.ndarray:
    """Rows are Landau indices, columns are points of ``x`` (array or Grid1D)."""
    xs = x.x if isinstance(x, Grid1D) else np.asarray(x, dtype=float).ravel()
    if xs.size == 0:
        raise InvalidInputError("grid must be nonempty")
    if len(m_list) == 0:
        return np.empty((0, xs.size))
    return np.vstack([vm(m, xs, quad) for m in m_list])
