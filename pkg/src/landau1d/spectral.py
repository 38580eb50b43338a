"""Ground states of the scaled one-dimensional N-electron Hamiltonians

    h = sum_j [ -sqrt(B) d^2/dx_j^2 - Z V~(x_j) ] + sum_{j<k} W~(x_j - x_k)

on a uniform grid with second-order central differences.  Dirichlet walls
sit one spacing beyond the outermost nodes, so every grid node is an
unknown.  Energies are in the scaled units; the physical energy is
sqrt(B) * e + N * B (see ``physical_energy``).
"""

from __future__ import annotations

import logging
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import fft as sp_fft
from scipy import linalg, optimize, signal
from scipy.sparse.linalg import LinearOperator, lobpcg

from .errors import (AccuracyError, ConvergenceError, DomainTooSmallError, InvalidInputError,
                     SizeError)
from .models import ModelFamily, ModelSpec, model_at
from .potentials import Grid1D

log = logging.getLogger(__name__)

BOUNDARY_NODES = 5
BOUNDARY_MASS = 1e-6
EXACT2_MAX_POINTS = 600


@dataclass(frozen=True)
class DiscreteOperator:
    diagonal: np.ndarray
    off_diagonal: np.ndarray
    grid: Grid1D
    M: float

    def apply(self, v: np.ndarray) -> np.ndarray:
        out = self.diagonal * v
        out[:-1] += self.off_diagonal * v[1:]
        out[1:] += self.off_diagonal * v[:-1]
        return out


@dataclass(frozen=True)
class ScfOptions:
    max_iterations: int = 2000
    # largest step of the damped density update rho <- rho + t (rho_out - rho)
    mixing: float = 1.0
    # stop when (upper - lower) <= energy_tol * max(1, |E|)
    energy_tol: float = 1e-9

    def __post_init__(self):
        if not 0 < self.mixing <= 1:
            raise InvalidInputError("mixing must lie in (0, 1]")
        if self.max_iterations < 1 or not self.energy_tol > 0:
            raise InvalidInputError("invalid SCF options")


def discretize(grid: Grid1D, M: float, potential) -> DiscreteOperator:
    """-(1/M) d^2/dx^2 + potential(x) as a symmetric tridiagonal matrix."""
    if not M > 0:
        raise InvalidInputError("mass M must be positive")
    x = grid.x
    v = potential(x) if callable(potential) else np.broadcast_to(
        np.asarray(potential, dtype=float), x.shape)
    v = np.asarray(v, dtype=float)
    if not np.all(np.isfinite(v)):
        bad = int(np.flatnonzero(~np.isfinite(v))[0])
        raise InvalidInputError(f"potential is not finite at x={x[bad]:.6g}")
    k = 1.0 / (M * grid.h ** 2)
    return DiscreteOperator(2.0 * k + v, np.full(grid.n - 1, -k), grid, float(M))


def ground_state(op: DiscreteOperator, tol: float = 1e-12) -> tuple[float, np.ndarray]:
    """Lowest eigenpair by bisection plus inverse iteration (LAPACK stebz/stein).

    The vector is normalized so that sum v_i^2 h = 1 and is positive at its peak.
    """
    try:
        w, vec = linalg.eigh_tridiagonal(op.diagonal, op.off_diagonal, select="i",
                                         select_range=(0, 0), tol=0.0)
    except linalg.LinAlgError as exc:
        raise AccuracyError(f"tridiagonal eigensolver failed: {exc}", math.nan, math.inf)
    e = float(w[0])
    v = vec[:, 0]
    scale = max(1.0, abs(e))
    res = float(np.linalg.norm(op.apply(v) - e * v))
    if res > max(tol, 1e-9) * scale * 1e3:
        raise AccuracyError("ground state residual too large", e, res)
    if v[np.argmax(np.abs(v))] < 0:
        v = -v
    return e, v / math.sqrt(op.grid.h)


def _check_boundary(grid: Grid1D, v: np.ndarray) -> None:
    edge = _edge_mass(grid, v)
    if edge > BOUNDARY_MASS:
        raise DomainTooSmallError(f"wavefunction mass {edge:.3g} near the boundary", 2.0 * grid.L)


def kinetic_coefficient(B: float) -> float:
    """1/M with M = B^{-1/2}."""
    if not B > 0:
        raise InvalidInputError("B must be positive")
    return math.sqrt(B)


def one_body_operator(Z: float, B: float, model: ModelSpec, grid: Grid1D) -> DiscreteOperator:
    nuc = np.asarray(model.nuclear_potential(grid.x), dtype=float)
    return discretize(grid, B ** -0.5, -Z * nuc)


def single_electron_energy(Z: float, B: float, model: ModelSpec, grid: Grid1D,
                           tol: float = 1e-12) -> float:
    """e_0(1, Z, sqrt B): ground energy of -sqrt(B) d^2/dx^2 - Z V~(x)."""
    e, v = ground_state(one_body_operator(Z, B, model, grid), tol)
    _check_boundary(grid, v)
    return e


def physical_energy(e_scaled: float, N: int, B: float) -> float:
    """Map a scaled energy back to the full problem: sqrt(B) e + N B."""
    return math.sqrt(B) * e_scaled + N * B


def suggest_grid(Z: float, B: float, model: ModelSpec, h: float | None = None,
                 min_L: float = 0.0, decay_lengths: float = 25.0) -> Grid1D:
    """Grid wide enough for the one-electron ground state, which decays like
    exp(-kappa |x|) with kappa^2 = |e_0| / sqrt(B).  L is set to
    ``decay_lengths / kappa`` and re-solved until it stops growing.

    Without ``h`` the spacing is 0.05, coarsened to 1/(200 kappa) (at most 1)
    for the very wide states of weakly bound systems.
    """
    if h is None:
        g = suggest_grid(Z, B, model, 0.05 if Z >= 0.05 else 0.5, min_L, decay_lengths)
        e = single_electron_energy(Z, B, model, g) if Z >= 0.05 else ground_state(
            one_body_operator(Z, B, model, g))[0]
        kappa = math.sqrt(max(-e, 1e-300) / math.sqrt(B))
        h = min(max(0.05, 1.0 / (200.0 * kappa)), 1.0)
        if h == 0.05 and g.h == 0.05:
            return g
    if not h > 0:
        raise InvalidInputError("spacing h must be positive")
    sb = kinetic_coefficient(B)
    L = max(20.0, min_L)
    for _ in range(20):
        n = 2 * int(math.ceil(L / h)) + 1
        g = Grid1D(n * h / 2 - h / 2, n)
        e, _ = ground_state(one_body_operator(Z, B, model, g))
        if e >= 0:
            L *= 2
            continue
        need = max(decay_lengths / math.sqrt(-e / sb), min_L)
        if need <= 1.05 * L:
            return g
        L = need
    raise DomainTooSmallError("could not size the grid", 2 * L)


# ---------------------------------------------------------------------------
# Hartree (symmetric product) upper bound

def interaction_kernel(model: ModelSpec, grid: Grid1D) -> np.ndarray:
    """W~ on the difference grid (-(n-1)h ... (n-1)h)."""
    d = np.arange(-(grid.n - 1), grid.n) * grid.h
    half = np.asarray(model.interaction_values(d[grid.n - 1:]), dtype=float)
    return np.concatenate([half[:0:-1], half])


def convolve(kernel: np.ndarray, rho: np.ndarray, h: float) -> np.ndarray:
    """(W * rho)(x_i) = sum_j W(x_i - x_j) rho_j h."""
    if rho.size <= 2001:
        out = np.convolve(kernel, rho, mode="valid")
    else:
        out = signal.fftconvolve(kernel, rho, mode="valid")
    return out * h


class Convolver:
    """``convolve`` with the kernel transform computed once."""

    def __init__(self, kernel: np.ndarray, h: float):
        self.n = (kernel.size + 1) // 2
        self.h = h
        self.direct = self.n <= 2001
        self.kernel = kernel
        if not self.direct:
            self.size = sp_fft.next_fast_len(kernel.size + self.n - 1, real=True)
            self.kf = sp_fft.rfft(kernel, self.size)

    def __call__(self, rho: np.ndarray) -> np.ndarray:
        if self.direct:
            return np.convolve(self.kernel, rho, mode="valid") * self.h
        full = sp_fft.irfft(sp_fft.rfft(rho, self.size) * self.kf, self.size)
        return full[self.n - 1:2 * self.n - 1] * self.h


@dataclass
class HartreeResult:
    energy: float
    orbital: np.ndarray
    iterations: int
    # upper minus lower bound on the discrete Hartree minimum
    residual: float
    history: list[float] = field(default_factory=list)
    # orbital mass within BOUNDARY_NODES of the walls; large values mean the
    # box, not the atom, is holding the electrons
    edge_mass: float = 0.0
    lower_bound: float = -math.inf
    converged: bool = True


class _ProductFunctional:
    """E[rho] = N <sqrt rho, (T + v) sqrt rho> + N(N-1)/2 <rho, W * rho>.

    Each term is convex in rho (the first through the von Weizsaecker form,
    the last because W has a positive Fourier transform), so the energy is
    convex along the segment between two densities.
    """

    def __init__(self, N, grid, B, vnuc, kernel):
        self.N, self.h = N, grid.h
        self.c = 0.5 * N * (N - 1)
        self.t_op = discretize(grid, B ** -0.5, 0.0)
        self.grid, self.B = grid, B
        self.vnuc = vnuc
        self.conv = Convolver(kernel, grid.h)

    def one_body(self, rho) -> float:
        phi = np.sqrt(np.clip(rho, 0.0, None))
        return self.N * float(phi @ (self.t_op.apply(phi) + self.vnuc * phi)) * self.h

    def energy(self, rho, w_rho=None) -> float:
        w_rho = self.conv(rho) if w_rho is None else w_rho
        return self.one_body(rho) + self.c * float(rho @ w_rho) * self.h

    def segment(self, rho, w_rho, step, w_step):
        """E(rho + t step) as a function of t; the interaction part is an exact quadratic."""
        h = self.h
        d0, d1, d2 = (float(rho @ w_rho) * h, float(step @ w_rho) * h,
                      float(step @ w_step) * h)
        return lambda t: self.one_body(rho + t * step) + self.c * (d0 + 2 * t * d1 + t * t * d2)

    def mean_field(self, rho, w_rho):
        """Lowest orbital of the mean-field operator and the matching lower bound."""
        eps, phi = ground_state(discretize(self.grid, self.B ** -0.5,
                                           self.vnuc + (self.N - 1) * w_rho))
        d = float(rho @ w_rho) * self.h
        return phi, self.N * eps - self.c * d


class HartreeMinimizer:
    """Resumable minimization of the energy of the symmetric product state phi^{(x)N}.

    Each step solves the mean-field equation for the current density and
    moves toward its density with an exact line search, so the energy never
    increases (the optimal-damping form of the Roothaan iteration).  ``energy``
    is the expectation of h in the current product state, a variational upper
    bound; ``lower`` is the convexity bound N eps - N(N-1)/2 D(rho, rho) on
    the discrete Hartree minimum.
    """

    def __init__(self, N: int, Z: float, B: float, model: ModelSpec, grid: Grid1D,
                 opts: ScfOptions = ScfOptions()):
        if int(N) != N or N < 0:
            raise InvalidInputError("N must be a nonnegative integer")
        self.N, self.grid, self.opts = int(N), grid, opts
        self.iterations = 0
        self.stalled = False
        if self.N == 0:
            self.energy = self.lower = 0.0
            self.rho = np.zeros(grid.n)
            self.history = [0.0]
            return
        vnuc = -Z * np.asarray(model.nuclear_potential(grid.x), dtype=float)
        e1, phi = ground_state(discretize(grid, B ** -0.5, vnuc))
        self.rho = phi * phi
        if self.N == 1:
            _check_boundary(grid, phi)
            self.energy = self.lower = e1
            self.history = [e1]
            return
        self.fn = _ProductFunctional(self.N, grid, B, vnuc, interaction_kernel(model, grid))
        self.w_rho = self.fn.conv(self.rho)
        self.energy = self.fn.energy(self.rho, self.w_rho)
        self.lower = -math.inf
        self.history = [self.energy]
        self._pending = None
        self._bound()

    def _bound(self):
        phi_out, lb = self.fn.mean_field(self.rho, self.w_rho)
        self.lower = max(self.lower, lb)
        self._pending = phi_out

    @property
    def gap(self) -> float:
        return self.energy - self.lower

    @property
    def converged(self) -> bool:
        return self.gap <= self.opts.energy_tol * max(1.0, abs(self.energy))

    @property
    def exhausted(self) -> bool:
        return self.stalled or self.iterations >= self.opts.max_iterations

    def step(self) -> bool:
        """One damped update; False when nothing more can be done."""
        if self.N <= 1 or self.converged or self.exhausted:
            return False
        fn = self.fn
        self.iterations += 1
        if self.iterations % 50 == 0:
            self.w_rho = fn.conv(self.rho)  # drop round-off of the linear updates
        step = self._pending * self._pending - self.rho
        w_step = fn.conv(step)
        line = fn.segment(self.rho, self.w_rho, step, w_step)
        res = optimize.minimize_scalar(line, bounds=(0.0, self.opts.mixing), method="bounded",
                                       options={"xatol": 1e-10})
        t = float(res.x)
        e_new = line(t)
        if not e_new < self.energy:
            self.stalled = True  # the line search cannot improve on the current density
            return False
        self.rho = self.rho + t * step
        self.w_rho = self.w_rho + t * w_step
        self.energy = e_new
        self.history.append(e_new)
        self._bound()
        return True

    def run(self, threshold: float | None = None) -> None:
        while True:
            if threshold is not None and (self.energy < threshold or self.lower >= threshold):
                return
            if not self.step():
                return

    def result(self) -> HartreeResult:
        phi = np.sqrt(self.rho)
        energy = self.fn.energy(self.rho) if self.N > 1 else self.energy
        return HartreeResult(energy, phi, self.iterations, self.gap, list(self.history),
                             _edge_mass(self.grid, phi), self.lower, self.converged)


def hartree(N: int, Z: float, B: float, model: ModelSpec, grid: Grid1D,
            opts: ScfOptions = ScfOptions(), threshold: float | None = None) -> HartreeResult:
    """Minimize the product-state energy (see ``HartreeMinimizer``).

    With ``threshold`` the iteration stops as soon as the bracket [lower,
    energy] lies on one side of it; ``converged`` is then False but the
    comparison with the threshold is settled.  Otherwise failure to close the
    bracket to ``energy_tol`` raises ConvergenceError.
    """
    hm = HartreeMinimizer(N, Z, B, model, grid, opts)
    hm.run(threshold)
    res = hm.result()
    settled = threshold is not None and (hm.energy < threshold or hm.lower >= threshold)
    if not (res.converged or settled):
        raise ConvergenceError(
            f"Hartree minimization for N={N} stopped after {hm.iterations} steps "
            f"(bound gap {hm.gap:.3g})", res.history)
    return res


def _edge_mass(grid: Grid1D, v: np.ndarray) -> float:
    return float((np.sum(v[:BOUNDARY_NODES] ** 2) + np.sum(v[-BOUNDARY_NODES:] ** 2)) * grid.h)


def hartree_energy(N: int, Z: float, B: float, model: ModelSpec, grid: Grid1D,
                   opts: ScfOptions = ScfOptions()) -> float:
    return hartree(N, Z, B, model, grid, opts).energy


# ---------------------------------------------------------------------------
# exact two-electron problem

def exact_two_electron(Z: float, B: float, model: ModelSpec, grid: Grid1D,
                       tol: float = 1e-10, symmetric: bool = True,
                       interaction: bool = True) -> float:
    """Lowest eigenvalue of the discretized two-electron operator.

    Solved matrix-free with LOBPCG, preconditioned by the exact inverse of the
    non-interacting part (fast diagonalization of h1 (x) 1 + 1 (x) h1).  With
    ``symmetric`` the iteration is confined to phi(x1, x2) = phi(x2, x1).
    """
    n = grid.n
    if n > EXACT2_MAX_POINTS:
        raise SizeError(f"exact two-electron solve limited to {EXACT2_MAX_POINTS} points per axis")
    op = one_body_operator(Z, B, model, grid)
    h1 = np.diag(op.diagonal) + np.diag(op.off_diagonal, 1) + np.diag(op.off_diagonal, -1)
    lam, Q = linalg.eigh(h1)
    if interaction:
        xi = grid.x
        W = np.asarray(model.interaction_values(np.abs(xi[:, None] - xi[None, :]).ravel()),
                       dtype=float).reshape(n, n)
    else:
        W = np.zeros((n, n))
    e_free = 2 * lam[0]
    sigma = e_free - max(1e-3, 1e-2 * abs(e_free))
    denom = lam[:, None] + lam[None, :] - sigma
    penalty = abs(lam[-1]) * 4 + float(W.max()) + 1.0

    def sym(P):
        return 0.5 * (P + P.swapaxes(-1, -2))

    def apply_h(v):
        P = v.T.reshape(-1, n, n)
        d, o = op.diagonal, op.off_diagonal
        S = sym(P) if symmetric else P
        out = d[:, None] * S + S * d[None, :] + W * S
        out[:, :-1, :] += o[:, None] * S[:, 1:, :]
        out[:, 1:, :] += o[:, None] * S[:, :-1, :]
        out[:, :, :-1] += o[None, :] * S[:, :, 1:]
        out[:, :, 1:] += o[None, :] * S[:, :, :-1]
        if symmetric:
            out = out + penalty * (P - S)
        return out.reshape(P.shape[0], -1).T

    def apply_prec(v):
        P = v.T.reshape(-1, n, n)
        R = Q.T @ P @ Q
        out = Q @ (R / denom) @ Q.T
        return out.reshape(P.shape[0], -1).T

    A = LinearOperator((n * n, n * n), matvec=apply_h, matmat=apply_h, dtype=float)
    Mp = LinearOperator((n * n, n * n), matvec=apply_prec, matmat=apply_prec, dtype=float)
    # start from the non-interacting ground state
    P = np.outer(Q[:, 0], Q[:, 0])
    if not symmetric:
        P = P + 1e-3 * np.outer(Q[:, 0], Q[:, 1])
    X = P.reshape(-1, 1)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)
        vals, vecs = lobpcg(A, X, M=Mp, tol=min(1e-8, tol), maxiter=1000, largest=False)
    e = float(np.min(vals))
    v = vecs[:, int(np.argmin(vals))]
    res = float(np.linalg.norm(apply_h(v[:, None])[:, 0] - e * v) / np.linalg.norm(v))
    if res > 1e-5 * max(1.0, abs(e)):
        raise AccuracyError("two-electron LOBPCG did not converge", e, res)
    return e


# ---------------------------------------------------------------------------
# binding and maximum ionization

@dataclass
class BindingResult:
    bound: bool
    eN: float
    eNm1: float


def _energy(N: int, Z: float, B: float, model, grid: Grid1D, solver: str,
            opts: ScfOptions, threshold: float | None = None) -> HartreeResult:
    spec = model_at(model, max(N, 1))
    if solver == "exact2" and N == 2:
        e = exact_two_electron(Z, B, spec, grid)
        return HartreeResult(e, np.zeros(0), 0, 0.0, lower_bound=e)
    return hartree(N, Z, B, spec, grid, opts, threshold)


def binding_test(N: int, Z: float, B: float, model, grid: Grid1D, solver: str = "hartree",
                 opts: ScfOptions = ScfOptions(), binding_tol: float | None = None
                 ) -> BindingResult:
    """Does the N-th electron lower the energy: e(N) < e(N-1) - tol?

    With Hartree energies both minimizations are advanced only until their
    [lower, upper] brackets settle the comparison, so eN and eNm1 are upper
    bounds that may be unconverged.  If neither bracket can be tightened any
    further the upper bounds are compared directly.
    """
    if solver not in ("hartree", "exact2"):
        raise InvalidInputError(f"unknown solver {solver!r}")
    if solver == "exact2" and N > 2:
        raise InvalidInputError("exact2 solver handles at most two electrons")
    if int(N) != N or N < 1:
        raise InvalidInputError("N must be a positive integer")
    if solver == "exact2" and N == 2:
        eNm1 = single_electron_energy(Z, B, model_at(model, 1), grid)
        eN = exact_two_electron(Z, B, model_at(model, 2), grid)
        tol = 1e-8 * abs(eNm1) if binding_tol is None else binding_tol
        return BindingResult(eN < eNm1 - tol, eN, eNm1)
    prev = HartreeMinimizer(N - 1, Z, B, model_at(model, max(N - 1, 1)), grid, opts)
    cur = HartreeMinimizer(N, Z, B, model_at(model, N), grid, opts)

    def tolerance():
        return 1e-8 * abs(prev.energy) if binding_tol is None else binding_tol

    while True:
        tol = tolerance()
        if cur.energy < prev.lower - tol:
            return BindingResult(True, cur.energy, prev.energy)
        if cur.lower >= prev.energy - tol:
            return BindingResult(False, cur.energy, prev.energy)
        # refine whichever bracket is wider
        first, second = (cur, prev) if cur.gap >= prev.gap else (prev, cur)
        if not (first.step() or second.step()):
            return BindingResult(cur.energy < prev.energy - tol, cur.energy, prev.energy)


@dataclass
class ScanRow:
    N: int
    energy: float
    bound: bool
    iterations: int
    residual: float
    error: str = ""


@dataclass
class ScanResult:
    n_max: int
    truncated: bool
    rows: list[ScanRow]


def _scan_worker(args):
    N, Z, B, model, grid, solver, opts = args
    try:
        r = _energy(N, Z, B, model, grid, solver, opts)
        return N, r.energy, r.iterations, r.residual, ""
    except Exception as exc:  # recorded per N, the scan continues
        return N, math.nan, 0, math.nan, f"{type(exc).__name__}: {exc}"


def nmax_scan(Z: float, B: float, model, grid: Grid1D, cap: int, solver: str = "hartree",
              opts: ScfOptions = ScfOptions(), workers: int = 1,
              binding_tol: float | None = None) -> ScanResult:
    """Add electrons one at a time until the next one no longer binds.

    With Hartree energies the result is an estimate (the product ansatz only
    bounds each e(N) from above), not a rigorous N_max.
    """
    if cap < 1:
        raise InvalidInputError("cap must be >= 1")
    energies = {0: 0.0}
    rows: list[ScanRow] = []
    n_max = 0
    stopped = False
    N = 1
    pool = ProcessPoolExecutor(workers) if workers > 1 else None
    try:
        while N <= cap and not stopped:
            batch = list(range(N, min(cap, N + max(workers, 1) - 1) + 1))
            jobs = [(k, Z, B, model, grid, solver, opts) for k in batch]
            results = list(pool.map(_scan_worker, jobs)) if pool else map(_scan_worker, jobs)
            for k, e, its, res, err in sorted(results, key=lambda r: r[0]):
                prev = energies.get(k - 1, math.nan)
                tol = 1e-8 * abs(prev) if binding_tol is None else binding_tol
                bound = bool(not err and np.isfinite(prev) and e < prev - tol)
                energies[k] = e
                rows.append(ScanRow(k, e, bound, its, res, err))
                if stopped:
                    continue
                if bound and n_max == k - 1:
                    n_max = k
                elif not err:
                    stopped = True
            N = batch[-1] + 1
    finally:
        if pool:
            pool.shutdown()
    return ScanResult(n_max, not stopped and n_max == cap, rows)
