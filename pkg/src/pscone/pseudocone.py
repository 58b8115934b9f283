"""Finite-facet C-pseudo-cones built as Wulff shapes.

A pseudo-cone here is ``K = C ∩ ⋂_i {y : <y, u_i> <= -h_i}`` with unit normals
``u_i`` in the dual cone and positive depths ``h_i``. Its radial function on
Omega_C is the upper envelope ``rho_K(v) = max_i h_i / |<v, u_i>|``, and the
maximizing facet is the outer normal at ``rho_K(v) v`` (the radial Gauss map).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import linprog

from .errors import DomainError, ValidationError
from .geometry import Cone, QuadratureGrid, arc_bounds, contains, dual_cone

FACET_TOL = 1e-9
DOT_GUARD = 1e-14
DEFAULT_TIE_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class PseudoCone:
    """Immutable finite-facet pseudo-cone; build it with :func:`wulff_shape`."""

    cone: Cone
    normals: np.ndarray
    depths: np.ndarray

    @property
    def n(self) -> int:
        return self.cone.n

    @property
    def m(self) -> int:
        return len(self.depths)

    @property
    def facets(self) -> list[tuple[np.ndarray, float]]:
        return [(u.copy(), float(h)) for u, h in zip(self.normals, self.depths)]

    def __repr__(self) -> str:
        return f"PseudoCone(n={self.n}, facets={self.m}, depths={np.round(self.depths, 6).tolist()})"


@dataclass(frozen=True)
class RadialGaussResult:
    index: int
    tie_indices: tuple[int, ...]
    is_tie: bool


def _validate_facets(C: Cone, normals: np.ndarray, depths: np.ndarray) -> None:
    if normals.ndim != 2 or len(normals) == 0:
        raise ValidationError("facet list must be nonempty")
    if normals.shape[1] != C.n:
        raise ValidationError(f"facet normals have dimension {normals.shape[1]}, cone has n={C.n}")
    if depths.shape != (len(normals),):
        raise ValidationError("one depth per facet normal is required")
    dual = dual_cone(C)
    for i, (u, h) in enumerate(zip(normals, depths)):
        if not np.all(np.isfinite(u)) or abs(np.linalg.norm(u) - 1.0) > FACET_TOL:
            raise ValidationError(f"facet {i}: normal must be a finite unit vector")
        if not contains(dual, u, strict=False, tol=FACET_TOL):
            raise ValidationError(f"facet {i}: normal lies outside the dual cone")
        if not (np.isfinite(h) and h > 0):
            raise ValidationError(f"facet {i}: depth must be positive and finite, got {h!r}")
    for i in range(len(normals)):
        for j in range(i):
            cos = float(np.clip(normals[i] @ normals[j], -1.0, 1.0))
            if math.acos(cos) <= FACET_TOL:
                raise ValidationError(f"facet {i}: duplicates the normal of facet {j}")


def from_arrays(C: Cone, normals, depths) -> PseudoCone:
    """Validated pseudo-cone from a normal matrix and a depth vector."""
    U = np.array(normals, dtype=float, ndmin=2)
    h = np.array(depths, dtype=float, ndmin=1)
    _validate_facets(C, U, h)
    U = U / np.linalg.norm(U, axis=1, keepdims=True)
    U.setflags(write=False)
    h.setflags(write=False)
    return PseudoCone(C, U, h)


def wulff_shape(C: Cone, facets: Iterable[tuple[Sequence[float], float]]) -> PseudoCone:
    """Wulff shape of the finitely supported depth function ``u_i -> h_i``."""
    facets = list(facets)
    if not facets:
        raise ValidationError("facet list must be nonempty")
    return from_arrays(C, [u for u, _ in facets], [h for _, h in facets])


def facet_ratios(K: PseudoCone, V: np.ndarray, check: bool = True) -> np.ndarray:
    """Matrix of ``h_i / |<v, u_i>|`` for each row ``v`` of ``V``."""
    V = np.atleast_2d(np.asarray(V, dtype=float))
    if check:
        inside = contains(K.cone, V, strict=True)
        if not np.all(inside):
            bad = int(np.flatnonzero(~inside)[0])
            raise DomainError(f"direction {V[bad].tolist()} is not strictly inside the cone")
    dots = np.abs(V @ K.normals.T)
    if np.any(dots < DOT_GUARD):
        raise DomainError("direction is (numerically) orthogonal to a facet normal; radial value overflows")
    return K.depths / dots


def radial(K: PseudoCone, v):
    """Radial function ``min{r > 0 : r v in K}`` at one direction or a stack."""
    single = np.ndim(v) == 1
    rho = facet_ratios(K, v).max(axis=1)
    return float(rho[0]) if single else rho


def gauss_indices(
    K: PseudoCone,
    V: np.ndarray,
    tie_tol: float = DEFAULT_TIE_TOL,
    tie_rule: str = "first",
    check: bool = True,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Radial values, Gauss-map facet indices and tie flags for many directions.

    ``tie_rule`` picks the smallest (``"first"``) or largest (``"last"``) index
    among facets within relative ``tie_tol`` of the maximum.
    """
    R = facet_ratios(K, V, check=check)
    rho = R.max(axis=1)
    near = R >= rho[:, None] * (1.0 - tie_tol)
    if tie_rule == "first":
        idx = near.argmax(axis=1)
    elif tie_rule == "last":
        idx = K.m - 1 - near[:, ::-1].argmax(axis=1)
    else:
        raise ValueError(f"unknown tie rule {tie_rule!r}")
    return rho, idx, near.sum(axis=1) > 1


def radial_gauss(K: PseudoCone, v, tie_tol: float = DEFAULT_TIE_TOL) -> RadialGaussResult:
    """Facet whose normal is the outer normal of ``K`` at ``rho_K(v) v``."""
    r = facet_ratios(K, np.asarray(v, dtype=float)[None, :])[0]
    top = r.max()
    ties = tuple(int(i) for i in np.flatnonzero(r >= top * (1.0 - tie_tol)))
    return RadialGaussResult(index=ties[0], tie_indices=ties, is_tie=len(ties) > 1)


def _wrap(angle: float) -> float:
    return (angle + math.pi) % (2 * math.pi) - math.pi


def gauss_arcs(K: PseudoCone) -> list[tuple[float, float, int]]:
    """Partition of the arc Omega_C (n = 2) by the radial Gauss map.

    Returns ``(start, end, facet)`` triples in arc-length coordinates measured
    from :func:`arc_bounds` ``[0]``. Along the arc ``log(h_i / cos(phi - b_i))``
    minus the same for facet ``k`` is monotone, so facets take over in order of
    decreasing ``b`` and each pair crosses at most once; breakpoints solve
    ``h_c cos(phi - b_k) = h_k cos(phi - b_c)`` in closed form.
    """
    if K.n != 2:
        raise ValidationError("Gauss-map arcs are only defined for n = 2")
    start, span = arc_bounds(K.cone)
    beta = np.array([_wrap(math.atan2(-u[1], -u[0]) - start) for u in K.normals])
    cosines = np.cos(beta)
    if np.any(cosines <= 1e-15):
        # A normal orthogonal to the arc's start direction: infinite radial value there.
        current = int(np.argmin(cosines))
    else:
        vals = K.depths / cosines
        top = vals.max()
        tied = np.flatnonzero(vals >= top * (1 - 1e-15))
        current = int(tied[np.argmin(beta[tied])])
    pos = 0.0
    arcs = []
    while True:
        best, best_phi = None, span
        for k in np.flatnonzero(beta < beta[current]):
            hc, hk = K.depths[current], K.depths[k]
            A = hc * math.cos(beta[k]) - hk * math.cos(beta[current])
            B = hc * math.sin(beta[k]) - hk * math.sin(beta[current])
            base = math.atan2(-A, B)
            for shift in (-2, -1, 0, 1, 2):
                phi = base + shift * math.pi
                if pos - 1e-15 <= phi < best_phi or (
                    best is not None and phi == best_phi and beta[k] < beta[best]
                ):
                    best, best_phi = int(k), max(phi, pos)
        arcs.append((pos, best_phi, current))
        if best is None:
            return arcs
        current, pos = best, best_phi


def _check_dual_member(K: PseudoCone, u: np.ndarray) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    if abs(np.linalg.norm(u) - 1.0) > FACET_TOL:
        raise DomainError("support direction must be a unit vector")
    if not contains(dual_cone(K.cone), u, strict=False, tol=FACET_TOL):
        raise DomainError(f"support direction {u.tolist()} lies outside the dual cone")
    return u


def support(K: PseudoCone, u, grid: QuadratureGrid) -> float:
    """Grid estimate of ``h̄_K(u) = min over boundary points x of |<x, u>|``.

    The minimum is taken over the boundary points ``rho_K(v) v`` at the grid
    nodes, so the value is biased upward by at most O(grid spacing).
    """
    u = _check_dual_member(K, u)
    rho = radial(K, grid.nodes)
    return float(np.min(rho * np.abs(grid.nodes @ u)))


def support_exact(K: PseudoCone, u) -> float:
    """Exact ``h̄_K(u)`` for a polyhedral ambient cone (linear program).

    The optimal vertex is re-solved from its active constraints so the value
    is accurate to rounding rather than to the LP tolerance.
    """
    if K.cone.kind != "polyhedral":
        raise ValidationError("exact support evaluation needs a polyhedral cone")
    u = _check_dual_member(K, u)
    A = np.vstack([K.normals, K.cone.facet_normals])
    b = np.concatenate([-K.depths, np.zeros(len(K.cone.facet_normals))])
    res = linprog(-u, A_ub=A, b_ub=b, bounds=[(None, None)] * K.n, method="highs")
    if res.status != 0:
        raise DomainError(f"support LP failed: {res.message}")
    y = res.x
    active = np.abs(A @ y - b) <= 1e-7 * (1.0 + np.abs(b))
    if np.linalg.matrix_rank(A[active]) == K.n:
        y = np.linalg.lstsq(A[active], b[active], rcond=None)[0]
    return float(-(u @ y))


def distance_from_origin(K: PseudoCone, grid: QuadratureGrid) -> float:
    """Grid estimate of ``b(K)``: the smallest radial value over the nodes."""
    return float(np.min(radial(K, grid.nodes)))


def inactive_facets(K: PseudoCone, grid: QuadratureGrid) -> list[int]:
    """Facets that never attain the radial maximum on the grid."""
    _, idx, _ = gauss_indices(K, grid.nodes, check=False)
    hit = np.bincount(idx, minlength=K.m) > 0
    return [int(i) for i in np.flatnonzero(~hit)]


def scale(K: PseudoCone, lam: float) -> PseudoCone:
    """The dilate ``lam * K``."""
    if not (np.isfinite(lam) and lam > 0):
        raise ValidationError(f"scale factor must be positive, got {lam!r}")
    h = K.depths * lam
    h.setflags(write=False)
    return PseudoCone(K.cone, K.normals, h)


def with_depths(K: PseudoCone, depths) -> PseudoCone:
    """Same normals, new depths (validated)."""
    h = np.array(depths, dtype=float)
    if h.shape != K.depths.shape or not np.all(np.isfinite(h) & (h > 0)):
        raise ValidationError("depths must be positive, finite and one per facet")
    h.setflags(write=False)
    return PseudoCone(K.cone, K.normals, h)


def perturb(K: PseudoCone, g, t: float) -> PseudoCone:
    """Wulff shape of ``h_i * exp(t * g_i)``; ``perturb(K, g, 0)`` is ``K``."""
    g = np.asarray(g, dtype=float)
    if g.shape != K.depths.shape:
        raise ValidationError(f"need one perturbation value per facet ({K.m}), got shape {g.shape}")
    if not np.all(np.isfinite(g)):
        raise ValidationError("perturbation values must be finite")
    if abs(t) > 1:
        raise ValidationError("perturbation parameter must satisfy |t| <= 1")
    if t == 0:
        return K
    return with_depths(K, K.depths * np.exp(t * g))
