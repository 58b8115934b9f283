"""Dual Minkowski problem for negative exponents.

Given a discrete measure ``phi`` on the closed dual region and ``q < 0``, find
depths on the atoms of ``phi`` whose Wulff shape ``K`` has
``C_q(K, .) ≈ phi``. The method minimizes ``Phi`` over log-depths on the
normalized slice ``V_q = 1`` by projected gradient descent with Armijo
backtracking, then dilates the minimizer so its total mass is ``|phi|``.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .errors import ValidationError
from .geometry import Cone, QuadratureGrid, omega_area, sphere_grid
from .measures import DiscreteMeasure, check_support, dual_curvature, dual_volume
from .pseudocone import PseudoCone, distance_from_origin, from_arrays, scale, with_depths

log = logging.getLogger(__name__)

Status = Literal["converged", "max_iter", "line_search_failure"]

# Largest change of any log-depth in one trial step (a factor e^4 in depth).
MAX_LOG_STEP = 4.0


@dataclass
class SolverOptions:
    max_iter: int = 10_000
    grad_tol: float = 1e-6
    armijo_c: float = 1e-4
    shrink: float = 0.5
    initial_step: float = 1.0
    grid_n: int = 100_000
    seed: int | None = None
    min_step: float = 1e-14
    bb_step: bool = True

    def __post_init__(self):
        for name in ("max_iter", "grad_tol", "armijo_c", "shrink", "initial_step", "grid_n", "min_step"):
            if not getattr(self, name) > 0:
                raise ValidationError(f"solver option {name} must be positive")
        if not self.grad_tol < 1:
            raise ValidationError("grad_tol must be < 1")
        if not self.shrink < 1 or not self.armijo_c < 1:
            raise ValidationError("armijo constants must lie in (0, 1)")


@dataclass
class TraceRow:
    iteration: int
    phi: float
    grad_norm: float
    residual: float
    step: float


@dataclass
class SolverResult:
    solution: PseudoCone
    iterations: int
    grad_norm: float
    residual: float
    status: Status
    phi_trace: list[float]
    trace: list[TraceRow] = field(default_factory=list)
    c2: float = math.nan
    min_distance: float = math.nan
    max_distance: float = math.nan
    runtime: float = 0.0
    grid: QuadratureGrid | None = None

    @property
    def converged(self) -> bool:
        return self.status == "converged"


def lemma41_bounds(C: Cone, q: float, n: int | None = None) -> float:
    """Explicit upper bound ``c2`` on ``b(K)`` over ``{V_q(K) = 1}``.

    From ``1 = V_q(K) <= r0^q |Omega_C| / n`` with ``q < 0`` one gets
    ``r0 <= (n / |Omega_C|)^(1/q)``. The matching lower bound exists but has no
    explicit value.
    """
    q = float(q)
    if not q < 0:
        raise ValidationError(f"bound needs q < 0, got {q!r}")
    n = C.n if n is None else int(n)
    if n != C.n:
        raise ValidationError(f"dimension mismatch: cone has n={C.n}, got n={n}")
    return (n / omega_area(C)) ** (1.0 / q)


def normalize(K: PseudoCone, q: float, grid: QuadratureGrid) -> PseudoCone:
    """Dilate ``K`` so that ``V_q(K) = 1``."""
    return scale(K, dual_volume(K, q, grid) ** (-1.0 / q))


def residual(K: PseudoCone, phi: DiscreteMeasure, q: float, grid: QuadratureGrid) -> float:
    """``max_i |C_q(K, {u_i}) - phi_i| / |phi|``."""
    c = dual_curvature(K, q, grid)
    return float(np.max(np.abs(c.weights - phi.weights))) / phi.total


def _check_target(C: Cone, phi: DiscreteMeasure, q: float) -> float:
    q = float(q)
    if not q < 0:
        raise ValidationError(f"the solver handles q < 0 only, got q={q!r}")
    if phi.atoms.shape[1] != C.n:
        raise ValidationError("measure atoms and cone have different dimensions")
    if not (np.isfinite(phi.total) and phi.total > 0):
        raise ValidationError("target measure must be nonzero and finite")
    if np.any(phi.weights <= 0):
        bad = int(np.flatnonzero(phi.weights <= 0)[0])
        raise ValidationError(f"atom {bad} has nonpositive weight")
    check_support(phi, C)
    return q


def _state(K: PseudoCone, phi: DiscreteMeasure, q: float, grid: QuadratureGrid):
    """Phi, its log-depth gradient and V_q at ``K`` from one quadrature pass."""
    c = dual_curvature(K, q, grid)
    f = -float(np.sum(phi.weights * np.log(K.depths))) / phi.total + math.log(c.total) / q
    return f, -phi.weights / phi.total + c.weights / c.total, c.total


def solve_dual_minkowski(
    C: Cone,
    phi: DiscreteMeasure,
    q: float,
    opts: SolverOptions | None = None,
    grid: QuadratureGrid | None = None,
) -> SolverResult:
    """Find ``K`` with ``C_q(K, .) ≈ phi`` by minimizing ``Phi``.

    Iterates live on ``{V_q = 1}``; the step is taken in log-depth space along
    the negative gradient projected onto zero-sum vectors (``Phi`` is constant
    along uniform dilation). Trial steps start from ``initial_step`` and, when
    ``opts.bb_step`` is set, from the Barzilai-Borwein estimate afterwards;
    every step must pass the Armijo test, so recorded Phi values decrease.
    Stops when the projected gradient's max-norm is at most ``grad_tol``. A
    failed line search returns the last iterate with
    ``status="line_search_failure"``.
    """
    opts = opts or SolverOptions()
    q = _check_target(C, phi, q)
    started = time.perf_counter()
    if grid is None:
        grid = sphere_grid(C, opts.grid_n, seed=opts.seed)
    c2 = lemma41_bounds(C, q)

    K = from_arrays(C, phi.atoms, np.ones(len(phi)))
    f, raw, vol = _state(K, phi, q, grid)
    K = scale(K, vol ** (-1.0 / q))
    distances = [distance_from_origin(K, grid)]
    trace: list[TraceRow] = []
    status: Status = "max_iter"
    step = opts.initial_step
    prev_x = prev_grad = None
    gnorm = math.inf

    for it in range(opts.max_iter + 1):
        grad = raw - raw.mean()
        gnorm = float(np.max(np.abs(grad)))
        trace.append(TraceRow(it, f, gnorm, float(np.max(np.abs(raw))), step))
        if gnorm <= opts.grad_tol:
            status = "converged"
            break
        if it == opts.max_iter:
            break
        x = np.log(K.depths)
        step = opts.initial_step
        if opts.bb_step and prev_x is not None:
            s_vec = x - prev_x
            s_vec -= s_vec.mean()
            y_vec = grad - prev_grad
            sy = float(s_vec @ y_vec)
            if sy > 0:
                step = min(max(float(s_vec @ s_vec) / sy, 1e-6), 1e6)
        step = min(step, MAX_LOG_STEP / gnorm)
        slope = float(grad @ grad)
        while True:
            trial = with_depths(K, np.exp(x - step * grad))
            f_trial, raw_trial, vol_trial = _state(trial, phi, q, grid)
            if math.isfinite(f_trial) and f_trial <= f - opts.armijo_c * step * slope:
                break
            step *= opts.shrink
            if step < opts.min_step:
                status = "line_search_failure"
                break
        if status == "line_search_failure":
            log.warning("line search failed at iteration %d (grad norm %.3g)", it, gnorm)
            break
        prev_x, prev_grad = x, grad
        # Phi and its gradient are dilation invariant; only the depths are rescaled.
        K = scale(trial, vol_trial ** (-1.0 / q))
        f, raw = f_trial, raw_trial
        distances.append(distance_from_origin(K, grid))

    # Dilate so the total dual curvature mass equals |phi|.
    lam = (phi.total / dual_volume(K, q, grid)) ** (1.0 / q)
    solution = scale(K, lam)
    return SolverResult(
        solution=solution,
        iterations=trace[-1].iteration,
        grad_norm=gnorm,
        residual=residual(solution, phi, q, grid),
        status=status,
        phi_trace=[row.phi for row in trace],
        trace=trace,
        c2=c2,
        min_distance=min(distances),
        max_distance=max(distances),
        runtime=time.perf_counter() - started,
        grid=grid,
    )
