"""Numeric no-binding certificates built on a localization argument.

Configuration space R^N is covered by a partition of unity G_0 ... G_N with
sum G^2 = 1: G_0 lives on the inner box ||x||_inf <= (1+delta) rho, and G_k
(k >= 1) on the region where x_k is (nearly) the largest coordinate.  The
localization error sqrt(B) sum |grad G|^2 is then controlled by

    lambda (log N)^2 / (delta^2 rho^2)      on supp G_0,
    lambda (log N)^2 / (delta^2 rho |x_k|)  on supp G_k,

and the N-electron Hamiltonian has no bound state if an inner-ball margin
and the outer function T(x) are both positive.  Everything here evaluates
those inequalities numerically; nothing is proved.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields, replace

import numpy as np

from .errors import InvalidInputError, NearSingularError, SamplingError
from .models import ModelFamily, ModelSpec, model_at

NU_SMALL_MAX = 8
OUTER_POINTS = 512


# ---------------------------------------------------------------------------
# partition of unity

def _smoothstep(s):
    s = np.clip(s, 0.0, 1.0)
    return s * s * (3.0 - 2.0 * s)


@dataclass(frozen=True)
class PartitionSpec:
    N: int
    rho: float
    delta: float
    # exponent p = sharpness * ln N / ln(1 + delta) of the angular weights
    sharpness: float = 3.0
    lambda_estimate: float | None = None

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 1:
            raise InvalidInputError("N must be a positive integer")
        if not (self.rho > 0 and self.delta > 0 and self.sharpness > 0):
            raise InvalidInputError("rho, delta and sharpness must be positive")

    @property
    def exponent(self) -> float:
        return max(1.0, self.sharpness * math.log(self.N) / math.log1p(self.delta))


class Partition:
    """G_nu(x) for points x in R^N (rows of a 2D array); column nu = 0 ... N.

    G_0 = cos(pi/2 s), G_k = sin(pi/2 s) h_k where s is a smoothstep of
    ||x||_inf / rho over [1, 1 + delta] and

        h_k = w_k / sqrt(sum_j w_j^2),  w_k = ((|x_k| / ||x||_inf)^p - (1+delta)^-p)_+.

    The largest coordinate always has w > 0, so h is defined everywhere
    except at the origin, where G_0 = 1 anyway.
    """

    def __init__(self, spec: PartitionSpec):
        self.spec = spec
        self.p = spec.exponent
        self.floor = (1.0 + spec.delta) ** (-self.p)

    def __call__(self, x) -> np.ndarray:
        X = np.atleast_2d(np.asarray(x, dtype=float))
        if X.shape[1] != self.spec.N:
            raise InvalidInputError(f"points must have {self.spec.N} coordinates")
        A = np.abs(X)
        M = A.max(axis=1)
        s = _smoothstep((M / self.spec.rho - 1.0) / self.spec.delta)
        g0 = np.cos(0.5 * np.pi * s)
        chi = np.sin(0.5 * np.pi * s)
        Msafe = np.where(M > 0, M, 1.0)
        w = np.clip((A / Msafe[:, None]) ** self.p - self.floor, 0.0, None)
        w[M == 0] = 1.0
        h = w / np.sqrt(np.sum(w * w, axis=1))[:, None]
        return np.concatenate([g0[:, None], chi[:, None] * h], axis=1)

    def gradient_norm2(self, x, step: float = 1e-6) -> np.ndarray:
        """sum_nu |grad G_nu|^2 by central differences (step relative to rho)."""
        X = np.atleast_2d(np.asarray(x, dtype=float))
        eps = step * self.spec.rho
        total = np.zeros(X.shape[0])
        for i in range(X.shape[1]):
            Xp, Xm = X.copy(), X.copy()
            Xp[:, i] += eps
            Xm[:, i] -= eps
            d = (self(Xp) - self(Xm)) / (2.0 * eps)
            total += np.sum(d * d, axis=1)
        return total


def build_partition(N: int, rho: float, delta: float, sharpness: float = 3.0) -> Partition:
    return Partition(PartitionSpec(N, rho, delta, sharpness))


def _sample_points(rng, count: int, N: int, rho: float, delta: float) -> np.ndarray:
    """Mix of uniform points and points with many coordinates in the band
    ||x||_inf/(1+delta) < |x_k| <= ||x||_inf, where the angular weights change."""
    M = rho * rng.uniform(0.5, 2.0 + 2.0 * delta, count)
    U = rng.uniform(0.0, 1.0, (count, N))
    lo = (1.0 + delta) ** -1.3
    band = rng.uniform(lo, 1.0, (count, N))
    frac = rng.integers(1, N + 1, count) / N
    U = np.where(rng.random((count, N)) < frac[:, None], band, U)
    U[np.arange(count), rng.integers(0, N, count)] = 1.0
    signs = rng.choice([-1.0, 1.0], (count, N))
    return signs * U * M[:, None]


@dataclass
class PartitionCheck:
    lambda_estimate: float
    per_N: dict[int, float]
    inner: dict[int, float]
    outer: dict[int, float]
    # slope of log(scaled sup) against log(log N); 0 means exact (log N)^2 growth
    loglog_slope: float
    max_normalization_error: float

    def to_dict(self) -> dict:
        return asdict(self)


def scaled_gradient_sup(partition: Partition, sample_count: int, seed: int = 0
                        ) -> tuple[float, float, float]:
    """(sup on supp G_0, sup on the outer region, normalization error), scaled as
    delta^2 rho^2 sum|grad G|^2 / (log N)^2 and delta^2 rho ||x||_inf sum|grad G|^2 / (log N)^2."""
    spec = partition.spec
    if sample_count < 1000:
        raise InvalidInputError("sample_count must be at least 1000")
    if spec.N < 2:
        raise InvalidInputError("the (log N)^2 scaling needs N >= 2")
    rng = np.random.default_rng(seed)
    X = _sample_points(rng, sample_count, spec.N, spec.rho, spec.delta)
    g = partition.gradient_norm2(X)
    norm_err = float(np.max(np.abs(np.sum(partition(X) ** 2, axis=1) - 1.0)))
    M = np.max(np.abs(X), axis=1)
    L2 = math.log(spec.N) ** 2
    inner = M < (1.0 + spec.delta) * spec.rho
    outer = M >= spec.rho
    if not inner.any() or not outer.any():
        raise SamplingError("sampling produced no points in one of the regions")
    d2 = spec.delta ** 2
    s_in = float(np.max(d2 * spec.rho ** 2 * g[inner] / L2))
    s_out = float(np.max(d2 * spec.rho * M[outer] * g[outer] / L2))
    return s_in, s_out, norm_err


def partition_check(partition: Partition | None, N_list, delta: float, sample_count: int = 10_000,
                    seed: int = 0, rho: float = 1.0, sharpness: float = 3.0) -> PartitionCheck:
    """Empirical lambda: the largest scaled gradient over sampled points and N.

    ``partition`` fixes rho and the sharpness when given; a fresh partition is
    built for every N in ``N_list``.
    """
    if partition is not None:
        rho, sharpness = partition.spec.rho, partition.spec.sharpness
    Ns = sorted(set(int(n) for n in N_list))
    if not Ns:
        raise InvalidInputError("N_list is empty")
    per, inn, out = {}, {}, {}
    worst_norm = 0.0
    for N in Ns:
        s_in, s_out, err = scaled_gradient_sup(build_partition(N, rho, delta, sharpness),
                                               sample_count, seed + N)
        inn[N], out[N], per[N] = s_in, s_out, max(s_in, s_out)
        worst_norm = max(worst_norm, err)
    if len(Ns) >= 2:
        slope = float(np.polyfit(np.log(np.log(Ns)), np.log([per[n] for n in Ns]), 1)[0])
    else:
        slope = 0.0
    return PartitionCheck(max(per.values()), per, inn, out, slope, worst_norm)


# ---------------------------------------------------------------------------
# constants and the inequalities

@dataclass(frozen=True)
class BoundParams:
    alpha: float = 0.5
    epsilon: float = 0.1
    A: float = 1.0
    a1: float = 1e12
    a2: float = 1.0
    # -e_0(1, Z, sqrt B) <= C_ahs (Z^2/sqrt B) log(Z^2/B)^2; see ahs_fit
    C_ahs: float = 0.25
    # sup of the scaled partition gradients over N >= 2 (partition_check, delta = 1)
    lam: float = 25.0
    # rho = c_rho N sqrt(B) / ((1+delta) Z^2 log(Z^2/B)^2); None means 1/(8 C_ahs)
    c_rho: float | None = None
    omega: float = 0.5
    delta: float = 1.0

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if f.name == "c_rho" and v is None:
                continue
            if not (isinstance(v, (int, float)) and v > 0 and math.isfinite(v)):
                raise InvalidInputError(f"BoundParams.{f.name} must be positive and finite")

    @property
    def c_rho_value(self) -> float:
        return self.c_rho if self.c_rho is not None else 1.0 / (8.0 * self.C_ahs)

    @classmethod
    def from_dict(cls, d: dict) -> "BoundParams":
        d = dict(d)
        if "lambda" in d:
            d["lam"] = d.pop("lambda")
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise InvalidInputError(f"unknown parameter(s): {', '.join(sorted(unknown))}")
        return cls(**d)

    @classmethod
    def load(cls, path) -> "BoundParams":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        return asdict(self)


def _log_ratio(Z: float, B: float) -> float:
    if not (Z > 0 and B > 0):
        raise InvalidInputError("Z and B must be positive")
    L = math.log(Z * Z / B)
    if abs(L) < 1e-6:
        raise NearSingularError(f"log(Z^2/B) = {L:.3g} is too close to zero")
    return L


def ahs_scale(Z: float, B: float) -> float:
    """(Z^2 / sqrt B) log(Z^2/B)^2."""
    return Z * Z / math.sqrt(B) * _log_ratio(Z, B) ** 2


def rho_star(N: int, Z: float, B: float, delta: float, c_rho: float) -> float:
    """Inner-ball radius c_rho N sqrt(B) / ((1+delta) Z^2 log(Z^2/B)^2)."""
    if N <= 0 or not (delta > 0 and c_rho > 0):
        raise InvalidInputError("N, delta and c_rho must be positive")
    L = _log_ratio(Z, B)
    return c_rho / (1.0 + delta) * N * math.sqrt(B) / (Z * Z * L * L)


def inner_ball_margin(N: int, Z: float, B: float, delta: float, rho: float, nu: int,
                      lam: float, C_ahs: float) -> float:
    """-C N (Z^2/sqrt B) L^2 + N(N-1)/2 / sqrt(4 (1+delta)^2 rho^2 + 2 nu)
    - lam sqrt(B) (log N)^2 / (delta^2 rho^2).

    The pair count N(N-1)/2 is the one the repulsion bound actually gives;
    it makes the margin negative for a single electron."""
    if not (rho > 0 and delta > 0) or nu < 0 or lam < 0 or C_ahs < 0:
        raise InvalidInputError("invalid scale parameters")
    attract = -C_ahs * N * ahs_scale(Z, B)
    repel = 0.5 * N * (N - 1) / math.sqrt(4.0 * (1.0 + delta) ** 2 * rho ** 2 + 2.0 * nu)
    loc = lam * math.sqrt(B) * math.log(N) ** 2 / (delta ** 2 * rho ** 2) if N > 1 else 0.0
    return attract + repel - loc


def outer_T(x, N: int, Z_eff: float, B: float, delta: float, rho: float, mu: int, nu: int,
            lam: float):
    """T(x) = -Z sqrt(((1+delta/2)^2 x^2 + nu/2)/(x^2 + mu)) + (N-1)/2
    - lam sqrt(B) (log N)^2 / (delta^2 rho) sqrt((1+delta/2)^2 + nu/(2 x^2))."""
    xa = np.abs(np.asarray(x, dtype=float))
    if np.any(xa == 0):
        raise InvalidInputError("outer_T needs x != 0")
    a = (1.0 + 0.5 * delta) ** 2
    loc = lam * math.sqrt(B) * math.log(N) ** 2 / (delta ** 2 * rho) if N > 1 else 0.0
    x2 = xa * xa
    val = (-Z_eff * np.sqrt((a * x2 + 0.5 * nu) / (x2 + mu)) + 0.5 * (N - 1)
           - loc * np.sqrt(a + 0.5 * nu / x2))
    return float(val) if np.ndim(val) == 0 else val


def outer_T_limit(N: int, Z_eff: float, B: float, delta: float, rho: float, lam: float) -> float:
    """T as x -> infinity."""
    a = 1.0 + 0.5 * delta
    loc = lam * math.sqrt(B) * math.log(N) ** 2 / (delta ** 2 * rho) if N > 1 else 0.0
    return -Z_eff * a + 0.5 * (N - 1) - loc * a


def gamma_nu(nu: int, params: BoundParams) -> float:
    """Field-window exponent: 2 + eps for nu = O(1) (taken as nu <= 8), else 3 + eps."""
    return (2.0 if nu <= NU_SMALL_MAX else 3.0) + params.epsilon


@dataclass
class ConditionFlag:
    name: str
    passed: bool
    margin: float


@dataclass
class CertificateReport:
    verdict: bool
    inner_margin: float
    outer_min_T: float
    condition_flags: list[ConditionFlag]
    rho: float = math.nan
    outer_argmin: float = math.nan
    inputs: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["condition_flags"] = [asdict(f) for f in self.condition_flags]
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, default=float)


def no_binding_certificate(N: int, Z: float, B: float, model: ModelSpec | ModelFamily,
                           params: BoundParams = BoundParams(),
                           outer_points: int = OUTER_POINTS) -> CertificateReport:
    """Check every hypothesis and inequality of the no-binding argument at (N, Z, B).

    The verdict is the conjunction of all flags, inner margin > 0 and T > 0.
    A failed hypothesis does not stop the remaining margins from being computed.
    """
    if int(N) != N or N < 1:
        raise InvalidInputError("N must be a positive integer")
    N = int(N)
    spec = model_at(model, N)
    Z_eff = Z * spec.charge_multiplier
    mu, nu, delta = spec.mu, spec.nu, params.delta
    flags = [ConditionFlag("nu_le_2mu", nu <= 2 * mu, float(2 * mu - nu))]

    gam = gamma_nu(nu, params)
    lower = params.a2 * Z_eff ** gam
    flags.append(ConditionFlag("field_lower", B >= lower, math.log(B / lower)))
    # compare logs: a1 exp(Z^(alpha/4)) overflows for large Z
    upper_log = math.log(params.a1) + Z_eff ** (params.alpha / 4.0)
    flags.append(ConditionFlag("field_upper", math.log(B) < upper_log, upper_log - math.log(B)))
    if nu > 0:
        need = nu / N * Z_eff ** (3.0 + params.epsilon)
        flags.append(ConditionFlag("nu_field", B > need, math.log(B / need)))
    else:
        flags.append(ConditionFlag("nu_field", True, math.inf))

    rho = rho_star(N, Z_eff, B, delta, params.c_rho_value)
    inner = inner_ball_margin(N, Z_eff, B, delta, rho, nu, params.lam, params.C_ahs)
    x_max = max(1e6, 1e3 * rho)
    xs = np.geomspace(rho, x_max, outer_points)
    T = outer_T(xs, N, Z_eff, B, delta, rho, mu, nu, params.lam)
    i = int(np.argmin(T))
    t_min, t_arg = float(T[i]), float(xs[i])
    t_inf = outer_T_limit(N, Z_eff, B, delta, rho, params.lam)
    if t_inf < t_min:
        t_min, t_arg = t_inf, math.inf

    verdict = all(f.passed for f in flags) and inner > 0 and t_min > 0
    inputs = {"N": N, "Z": Z, "B": B, "Z_eff": Z_eff, "mu": mu, "nu": nu,
              "model": spec.label or spec.name, "params": params.to_dict()}
    return CertificateReport(bool(verdict), inner, t_min, flags, rho, t_arg, inputs)


def certified_threshold(Z: float, B: float, model, params: BoundParams = BoundParams(),
                        N_max: int = 10 ** 7) -> int | None:
    """Smallest N at which the certificate passes, by doubling then bisection.

    Relies on the verdict being monotone in N (checked by the test suite)."""
    hi = 1
    while not no_binding_certificate(hi, Z, B, model, params).verdict:
        hi *= 2
        if hi > N_max:
            return None
    lo = hi // 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if no_binding_certificate(mid, Z, B, model, params).verdict:
            hi = mid
        else:
            lo = mid
    return hi


# ---------------------------------------------------------------------------
# theorem thresholds

@dataclass
class ThresholdRow:
    name: str
    N_threshold: float
    applicable: bool
    note: str = ""


def _log_upper_ok(B: float, Z: float, exponent: float, a1: float) -> bool:
    return math.log(B) < math.log(a1) + Z ** exponent


def theorem_thresholds(Z: float, B: float, model: ModelSpec | ModelFamily,
                       params: BoundParams = BoundParams(), include_remark: bool = True
                       ) -> list[ThresholdRow]:
    """Closed-form electron-number thresholds beyond which no binding is claimed.

    The charge multiplier c scales the linear term only (2cZ, 3cZ); the
    nonlinear terms carry the unspecified constant A and are left in Z.
    """
    if not (Z > 0 and B > 0):
        raise InvalidInputError("Z and B must be positive")
    spec = model_at(model, 2) if isinstance(model, ModelFamily) else model
    c = spec.charge_multiplier
    A, alpha, eps = params.A, params.alpha, params.epsilon
    logZ = math.log(Z)
    nu_ok = spec.satisfies_nu_le_2mu
    lower_ok = B >= params.a2 * Z ** gamma_nu(spec.nu, params)
    win1 = nu_ok and lower_ok and _log_upper_ok(B, Z, alpha / 4.0, params.a1)
    win2 = nu_ok and lower_ok and _log_upper_ok(B, Z, 0.5 - eps, params.a1)
    # B = a Z^p with p > 3 needs Z > 1 to make the exponent meaningful
    win3 = nu_ok and lower_ok and Z > 1 and math.log(B) / logZ > 3.0
    L = abs(math.log(Z * Z / B)) if B != Z * Z else 0.0

    rows = [
        ThresholdRow("theorem1", 2 * c * Z + A * Z ** (1 + alpha), win1),
        ThresholdRow("theorem2", 3 * c * Z + 1 + A * Z * logZ * L, win2),
        ThresholdRow("corollary3", 3 * c * Z + A * Z * logZ ** 2, win3),
    ]
    is_m = spec.name == "m-momentum"
    is_slater = spec.name == "slater"
    rows.append(ThresholdRow("corollary4", 2 * Z + A * Z ** (1 + alpha), win1 and is_m,
                             "" if is_m else "m-momentum models only"))
    rows.append(ThresholdRow("corollary5a", 4 * Z + A * Z ** (1 + alpha), win1 and is_slater,
                             "" if is_slater else "Slater model only"))
    rows.append(ThresholdRow("corollary5b", 6 * Z + A * Z * logZ ** 2, win3 and is_slater,
                             "" if is_slater else "Slater model only"))
    if include_remark:
        om = params.omega
        logB = math.log(B)
        g = logZ ** 2 + (logZ * abs(logB) ** (1 + om))
        rows.append(ThresholdRow("remark2", 3 * c * Z + Z * g, win2,
                                 "alternate form; omega and constants unspecified"))
    return rows


# ---------------------------------------------------------------------------
# empirical constant of the one-electron energy

@dataclass
class AhsFit:
    C: float
    r2: float
    r2_centered: float
    ratios: list[float]
    energies: list[float]
    B_values: list[float]
    Z: float


def ahs_fit(Z: float, B_values, model: ModelSpec | None = None, h: float = 0.05) -> AhsFit:
    """Least-squares C in e_0(1, Z, sqrt B) ~ -C (Z^2/sqrt B) log(Z^2/B)^2 (no intercept).

    ``r2`` is the uncentered coefficient of determination appropriate to a
    fit through the origin; ``r2_centered`` is reported alongside it.
    """
    from .models import make_m_model
    from .spectral import single_electron_energy, suggest_grid

    model = model if model is not None else make_m_model(0)
    Bs = [float(b) for b in B_values]
    if len(Bs) < 2:
        raise InvalidInputError("need at least two field strengths")
    e = np.array([single_electron_energy(Z, B, model, suggest_grid(Z, B, model, h=h))
                  for B in Bs])
    f = np.array([ahs_scale(Z, B) for B in Bs])
    C = float(-(e @ f) / (f @ f))
    res = e + C * f
    r2 = 1.0 - float(res @ res) / float(e @ e)
    r2c = 1.0 - float(res @ res) / float(((e - e.mean()) ** 2).sum())
    return AhsFit(C, r2, r2c, [float(r) for r in -e / f], [float(v) for v in e], Bs, Z)


def with_overrides(params: BoundParams, **kw) -> BoundParams:
    return replace(params, **{k: v for k, v in kw.items() if v is not None})
