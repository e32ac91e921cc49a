"""Gridless DoA estimation through the dual of the atomic-norm program.

The sparse reconstruction of the echo matrix over the continuum of
rank-one responses b(theta) a_r(theta)^H is handled entirely in its dual
form: with C = Y D^H and R = (D D^H)^(-1), solve

    min_{G, W}  Tr[(C - G) R (C - G)^H]
    s.t.        S := [[W, G], [G^H, rho*I_N]]  PSD,
                Tr(W) = beta^2 / (rho*N),
                sum_m W_{m, m+v} = 0   for every diagonal offset v != 0,

then read the angles off the K largest peaks of the dual spectrum
f(theta) = |a_r(theta)^H G^H b(theta)|.  The primal matrix and its atomic
decomposition are never materialized.

The solver is a consensus ADMM: a closed-form (G, W) update, a PSD-cone
projection of the consensus copy of S, and a scaled dual update, with
standard residual-balancing of the penalty.  Only eigendecompositions of
(M+N) x (M+N) matrices are needed.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .numerics import NumericError, hermitian_eig, hermitian_solve, hermitize, psd_project
from .scene import EchoData, ula_steering

DEFAULT_GRID_STEP = math.radians(0.02)

#: Penalty rescaling per Boyd-style residual balancing.
_BALANCE_RATIO = 10.0
_BALANCE_FACTOR = 2.0


def default_beta(n_res):
    """Regularization weight paired with rho = 1000 (beta^2/N = 1000)."""
    if n_res < 1:
        raise ValueError("n_res must be >= 1")
    return math.sqrt(1000.0 * n_res)


@dataclass(frozen=True)
class AnmConfig:
    """Solver and peak-search knobs.

    `beta=None` resolves to :func:`default_beta` for the problem's N at
    solve time.
    """

    beta: float | None = None
    rho: float = 1000.0
    admm_penalty: float = 1.0
    tolerance: float = 1e-6
    max_iters: int = 20000
    grid_step: float = DEFAULT_GRID_STEP
    refine: bool = True

    def __post_init__(self):
        if self.beta is not None and self.beta <= 0:
            raise ValueError("beta must be positive")
        if self.rho <= 0:
            raise ValueError("rho must be positive")
        if self.admm_penalty <= 0:
            raise ValueError("admm_penalty must be positive")
        if self.tolerance <= 0:
            raise ValueError("tolerance must be positive")
        if not (0 < self.grid_step <= 0.1):
            raise ValueError("grid_step must lie in (0, 0.1] radians")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")


@dataclass(frozen=True)
class AnmProblem:
    """Precomputed data of the dual program for one (Y, D) pair."""

    c: np.ndarray          # M x N, Y D^H
    r: np.ndarray          # N x N, (D D^H)^(-1) after regularization
    n_ses: int
    n_res: int
    n_slots: int


@dataclass(frozen=True)
class DualSolution:
    g: np.ndarray
    w: np.ndarray
    primal_residual: float
    dual_residual: float
    iterations: int
    converged: bool
    objective: float = math.nan
    objective_trace: np.ndarray = field(default=None, repr=False)


@dataclass(frozen=True)
class Spectrum:
    """Sampled spectrum over an ascending angle grid (radians)."""

    grid: np.ndarray
    values: np.ndarray


@dataclass(frozen=True)
class DoaEstimate:
    angles: np.ndarray          # radians, ascending
    peak_values: np.ndarray
    method: str
    degraded: bool = False
    diagnostics: DualSolution | None = None

    def angles_deg(self):
        return np.rad2deg(self.angles)


def build_problem(echo, measurement):
    """Cache C = Y D^H and R = (D D^H)^(-1) for the dual program."""
    y = echo.samples if isinstance(echo, EchoData) else np.asarray(echo)
    d = measurement.matrix
    if y.shape[1] != d.shape[1]:
        raise ValueError(
            f"echo has {y.shape[1]} slots but measurement has {d.shape[1]}"
        )
    cov = d @ d.conj().T
    r = hermitian_solve(cov, np.eye(d.shape[0], dtype=complex))
    return AnmProblem(
        c=y @ d.conj().T,
        r=hermitize(r),
        n_ses=y.shape[0],
        n_res=d.shape[0],
        n_slots=d.shape[1],
    )


def objective_value(problem, g):
    """Tr[(C - G) R (C - G)^H] for a candidate dual iterate G."""
    delta = problem.c - g
    return float(np.sum((delta @ problem.r) * delta.conj()).real)


def _project_trace_offsets(w, trace_target):
    """Euclidean projection onto {Tr W = t, zero sum on every offset != 0}.

    Each nonzero diagonal offset loses its mean; the main diagonal is
    shifted uniformly to meet the trace.  Hermitian input stays Hermitian.
    """
    m = w.shape[0]
    w = w.copy()
    for v in range(1, m):
        idx = np.arange(m - v)
        w[idx, idx + v] -= w[idx, idx + v].mean()
        w[idx + v, idx] -= w[idx + v, idx].mean()
    d = np.arange(m)
    w[d, d] += (trace_target - np.trace(w).real) / m
    return w


def _bordered(w, g, rho):
    m, n = g.shape
    s = np.empty((m + n, m + n), dtype=complex)
    s[:m, :m] = w
    s[:m, m:] = g
    s[m:, :m] = g.conj().T
    s[m:, m:] = rho * np.eye(n)
    return s


def solve_dual(problem, cfg=None):
    """Run the consensus ADMM on the dual program.

    Returns the best iterate with `converged=False` if `max_iters` is
    exhausted before both normalized residuals drop below `tolerance`.
    """
    cfg = cfg or AnmConfig()
    m, n = problem.n_ses, problem.n_res
    beta = cfg.beta if cfg.beta is not None else default_beta(n)
    rho = cfg.rho
    trace_target = beta**2 / (rho * n)

    r_eig = hermitian_eig(problem.r)
    rw, rv = r_eig.eigenvalues, r_eig.eigenvectors
    c_r = problem.c @ problem.r

    penalty = cfg.admm_penalty
    inv_shift = 1.0 / (rw + penalty)

    g = np.zeros((m, n), dtype=complex)
    w = (trace_target / m) * np.eye(m, dtype=complex)
    s = _bordered(w, g, rho)
    u = np.zeros_like(s)

    best = None
    obj_trace = []
    iterations = 0
    for iterations in range(1, cfg.max_iters + 1):
        t = s - u
        g_pair = 0.5 * (t[:m, m:] + t[m:, :m].conj().T)
        g = ((c_r + penalty * g_pair) @ rv) * inv_shift @ rv.conj().T
        w = _project_trace_offsets(hermitize(t[:m, :m]), trace_target)

        bordered = _bordered(w, g, rho)
        s_prev = s
        s = psd_project(bordered + u)
        u = u + bordered - s

        s_norm = float(np.linalg.norm(s))
        denom = max(1.0, s_norm)
        primal = float(np.linalg.norm(s - bordered)) / denom
        dual = penalty * float(np.linalg.norm(s - s_prev)) / denom

        if not np.isfinite(primal) or not np.isfinite(dual):
            raise NumericError(f"solver produced non-finite iterate at {iterations}")

        obj_trace.append(objective_value(problem, g))

        if best is None or max(primal, dual) < best[0]:
            best = (max(primal, dual), g, w, primal, dual)

        if primal <= cfg.tolerance and dual <= cfg.tolerance:
            return DualSolution(
                g=g, w=w, primal_residual=primal, dual_residual=dual,
                iterations=iterations, converged=True,
                objective=obj_trace[-1],
                objective_trace=np.array(obj_trace),
            )

        if primal > _BALANCE_RATIO * dual:
            penalty *= _BALANCE_FACTOR
            u /= _BALANCE_FACTOR
            inv_shift = 1.0 / (rw + penalty)
        elif dual > _BALANCE_RATIO * primal:
            penalty /= _BALANCE_FACTOR
            u *= _BALANCE_FACTOR
            inv_shift = 1.0 / (rw + penalty)

    _, g_best, w_best, primal, dual = best
    return DualSolution(
        g=g_best, w=w_best, primal_residual=primal, dual_residual=dual,
        iterations=iterations, converged=False,
        objective=objective_value(problem, g_best),
        objective_trace=np.array(obj_trace),
    )


def angle_grid(grid_step=DEFAULT_GRID_STEP):
    """Ascending angle grid over (-pi/2, pi/2] with the given step."""
    count = int(math.floor(math.pi / grid_step + 1e-9))
    return -math.pi / 2 + grid_step * np.arange(1, count + 1)


def dual_spectrum(g, theta_bi, grid_step=DEFAULT_GRID_STEP, grid=None):
    """Evaluate f(theta) = |a_r(theta)^H G^H b(theta)| over the grid.

    The RE-side vector is evaluated at the reflected-path spatial frequency
    pi*(sin theta - sin theta_bi); no arcsin is ever taken.
    """
    m, n = g.shape
    if grid is None:
        grid = angle_grid(grid_step)
    sin_g = np.sin(grid)
    b_all = np.exp(-1j * math.pi * np.outer(np.arange(m), sin_g))
    a_all = np.exp(
        -1j * math.pi * np.outer(np.arange(n), sin_g - math.sin(theta_bi))
    )
    gh_b = g.conj().T @ b_all
    values = np.abs(np.einsum("ng,ng->g", a_all.conj(), gh_b))
    return Spectrum(grid=grid, values=values)


def pick_peaks(spectrum, k, refine=True, method=""):
    """Locate the K largest strict local maxima of a sampled spectrum.

    Ties are broken toward the smaller angle.  When fewer than K maxima
    exist, the largest non-maximum grid values fill the remaining slots and
    the estimate is flagged degraded.  With `refine`, each true peak is
    nudged to the vertex of the parabola through its three samples
    (clamped to the bracketing interval).
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    f = np.asarray(spectrum.values, dtype=float)
    grid = np.asarray(spectrum.grid, dtype=float)
    if f.shape != grid.shape or f.size < 3:
        raise ValueError("spectrum needs >= 3 samples on a matching grid")

    interior = (f[1:-1] > f[:-2]) & (f[1:-1] > f[2:])
    peak_idx = np.nonzero(interior)[0] + 1
    order = sorted(peak_idx, key=lambda i: (-f[i], grid[i]))
    chosen = [(i, True) for i in order[:k]]

    degraded = False
    if len(chosen) < k:
        degraded = True
        taken = {i for i, _ in chosen}
        rest = sorted(
            (i for i in range(f.size) if i not in taken and i not in set(peak_idx)),
            key=lambda i: (-f[i], grid[i]),
        )
        chosen += [(i, False) for i in rest[: k - len(chosen)]]

    angles = []
    values = []
    for i, is_peak in chosen:
        theta = grid[i]
        if refine and is_peak and 0 < i < f.size - 1:
            y0, y1, y2 = f[i - 1], f[i], f[i + 1]
            curvature = y0 - 2.0 * y1 + y2
            if curvature != 0.0:
                offset = float(np.clip(0.5 * (y0 - y2) / curvature, -1.0, 1.0))
                theta = theta + offset * 0.5 * (grid[i + 1] - grid[i - 1])
        angles.append(theta)
        values.append(f[i])

    idx = np.argsort(angles, kind="stable")
    return DoaEstimate(
        angles=np.array(angles)[idx],
        peak_values=np.array(values)[idx],
        method=method,
        degraded=degraded,
    )


def estimate_anm(echo, measurement, k, cfg=None, theta_bi=0.0):
    """Full pipeline: dual solve, dual spectrum, peak picking."""
    cfg = cfg or AnmConfig()
    problem = build_problem(echo, measurement)
    solution = solve_dual(problem, cfg)
    spectrum = dual_spectrum(solution.g, theta_bi, grid_step=cfg.grid_step)
    estimate = pick_peaks(spectrum, k, refine=cfg.refine, method="ANM")
    return DoaEstimate(
        angles=estimate.angles,
        peak_values=estimate.peak_values,
        method="ANM",
        degraded=estimate.degraded,
        diagnostics=solution,
    )
