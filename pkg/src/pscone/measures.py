"""Decay pairs, the functional J_G, dual volumes and radial/dual curvature measures.

All integrals over Omega_C are quadrature sums over a :class:`QuadratureGrid`.
On planar midpoint grids the few cells cut by a Gauss-map breakpoint are split
at the breakpoint; everywhere else a node carries its whole cell weight to the
facet attaining the radial maximum there.
Reductions are numpy's pairwise sums over a fixed summand order, so two
quantities built from the same summands (a measure's total and the matching
dual volume) agree bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Literal

import numpy as np

from .errors import ValidationError
from .geometry import GOLDEN, Cone, QuadratureGrid, arc_bounds, contains, dual_cone
from .pseudocone import PseudoCone, facet_ratios, gauss_arcs, gauss_indices

DecayKind = Literal["power", "exponential", "custom"]


@dataclass(frozen=True, eq=False)
class DecayPair:
    """``G`` strictly decreasing and positive on (0, inf), ``F(x) = -x G'(x)``."""

    G: Callable[[np.ndarray], np.ndarray]
    F: Callable[[np.ndarray], np.ndarray]
    kind: DecayKind
    q: float | None = None

    def describe(self) -> dict:
        out = {"kind": self.kind}
        if self.q is not None:
            out["q"] = self.q
        return out


def power_pair(q: float) -> DecayPair:
    """``G(x) = x**q`` and ``F(x) = |q| x**q`` for ``q < 0``."""
    q = float(q)
    if not q < 0:
        raise ValidationError(f"power decay needs q < 0, got {q!r}")
    return DecayPair(G=lambda x: np.power(x, q), F=lambda x: abs(q) * np.power(x, q), kind="power", q=q)


def exponential_pair() -> DecayPair:
    """``G(x) = exp(-x)`` and ``F(x) = x exp(-x)``."""
    return DecayPair(G=lambda x: np.exp(-x), F=lambda x: x * np.exp(-x), kind="exponential")


def check_decay_pair(D: DecayPair, xs=None, rtol: float = 1e-6) -> None:
    """Validate ``F = -x G'`` by central differences with step ``1e-6 x``."""
    xs = np.logspace(-1, 1, 17) if xs is None else np.asarray(xs, dtype=float)
    G = np.asarray(D.G(xs), dtype=float)
    F = np.asarray(D.F(xs), dtype=float)
    if not np.all(np.isfinite(G) & (G > 0)):
        raise ValidationError("G must be positive and finite on (0, inf)")
    if not np.all(np.isfinite(F) & (F > 0)):
        raise ValidationError("F must be positive and finite on (0, inf)")
    eps = 1e-6 * xs
    fd = -xs * (np.asarray(D.G(xs + eps)) - np.asarray(D.G(xs - eps))) / (2 * eps)
    err = np.abs(fd - F) / np.abs(F)
    if np.any(err > rtol):
        worst = int(np.argmax(err))
        raise ValidationError(
            f"F is not -x G'(x): relative mismatch {err[worst]:.3g} at x={xs[worst]:.6g}"
        )


def custom_pair(G, F) -> DecayPair:
    """User-supplied pair, checked by finite differences."""
    D = DecayPair(G=G, F=F, kind="custom")
    check_decay_pair(D)
    return D


@dataclass(frozen=True, eq=False)
class DiscreteMeasure:
    """Finitely supported nonnegative measure on the closed dual region."""

    atoms: np.ndarray
    weights: np.ndarray
    total: float

    def __len__(self) -> int:
        return len(self.weights)

    def __repr__(self) -> str:
        return f"DiscreteMeasure(atoms={len(self)}, total={self.total:.12g})"


def discrete_measure(atoms, weights) -> DiscreteMeasure:
    """Validated measure; ``total`` is the exactly rounded sum of the weights."""
    A = np.array(atoms, dtype=float, ndmin=2)
    w = np.array(weights, dtype=float, ndmin=1)
    if len(A) == 0 or w.shape != (len(A),):
        raise ValidationError("a measure needs one weight per atom and at least one atom")
    if not np.all(np.isfinite(w)) or np.any(w < 0):
        raise ValidationError("measure weights must be finite and nonnegative")
    norms = np.linalg.norm(A, axis=1)
    if np.any(np.abs(norms - 1.0) > 1e-9):
        raise ValidationError("measure atoms must be unit vectors")
    A = A / norms[:, None]
    for i in range(len(A)):
        for j in range(i):
            if np.linalg.norm(A[i] - A[j]) <= 1e-9:
                raise ValidationError(f"atom {i} duplicates atom {j}")
    A.setflags(write=False)
    w.setflags(write=False)
    return DiscreteMeasure(A, w, math.fsum(w))


def check_support(phi: DiscreteMeasure, C: Cone, tol: float = 1e-9) -> None:
    """Every atom must lie in the closed dual cone."""
    inside = contains(dual_cone(C), phi.atoms, strict=False, tol=tol)
    if not np.all(inside):
        bad = int(np.flatnonzero(~inside)[0])
        raise ValidationError(f"atom {bad} lies outside the dual cone")


def _check_q(q: float) -> float:
    q = float(q)
    if not q < 0:
        raise ValidationError(f"only negative exponents are supported, got q={q!r}")
    return q


def _total(values: np.ndarray) -> float:
    return float(np.sum(values))


def _grouped(values: np.ndarray, idx: np.ndarray, m: int) -> np.ndarray:
    order = np.argsort(idx, kind="stable")
    bounds = np.searchsorted(idx[order], np.arange(m + 1))
    v = values[order]
    return np.array([np.sum(v[bounds[i] : bounds[i + 1]]) for i in range(m)])


def _wrap_to(angle: float) -> float:
    return math.atan2(math.sin(angle), math.cos(angle))


def _split_pieces(K: PseudoCone, grid: QuadratureGrid, R: np.ndarray):
    """Nodes of a planar midpoint grid, with breakpoint cells split in two or more.

    A cell containing a Gauss-map breakpoint is replaced by one sub-interval
    per facet, each evaluated at its own midpoint. This keeps the quadrature
    continuously differentiable in the depths.
    """
    start, span = arc_bounds(K.cone)
    N = grid.size
    width = span / N
    arcs = gauss_arcs(K)
    breaks = np.array([a[0] for a in arcs[1:]])
    facet_of_arc = np.array([a[2] for a in arcs])
    node_phi = (np.arange(N) + 0.5) * width
    idx = facet_of_arc[np.searchsorted(breaks, node_phi, side="right")]
    rho = R[np.arange(N), idx]
    w = np.asarray(grid.weights)
    first = grid.nodes[0]
    if abs(math.atan2(first[1], first[0]) - _wrap_to(start + 0.5 * width)) > 1e-9:
        raise ValidationError("split-cell quadrature needs a midpoint grid built on this cone")

    cells = sorted({min(int(b // width), N - 1) for b in breaks if 0.0 < b < span})
    if not cells:
        return w, rho, idx
    keep = np.ones(N, dtype=bool)
    keep[cells] = False
    pw, pr, pi = [], [], []
    for c in cells:
        lo, hi = c * width, (c + 1) * width
        for a_lo, a_hi, f in arcs:
            left, right = max(lo, a_lo), min(hi, a_hi)
            if right <= left:
                continue
            mid = start + 0.5 * (left + right)
            v = np.array([math.cos(mid), math.sin(mid)])
            pw.append(right - left)
            pr.append(K.depths[f] / abs(v @ K.normals[f]))
            pi.append(f)
    return (
        np.concatenate([w[keep], pw]),
        np.concatenate([rho[keep], pr]),
        np.concatenate([idx[keep], np.array(pi, dtype=int)]),
    )


def _tangent_frames(V: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    k = np.argmin(np.abs(V), axis=1)
    a = np.zeros_like(V)
    a[np.arange(len(V)), k] = 1.0
    e1 = a - np.sum(a * V, axis=1, keepdims=True) * V
    e1 /= np.linalg.norm(e1, axis=1, keepdims=True)
    return e1, np.cross(V, e1)


def refine_grid(K: PseudoCone, grid: QuadratureGrid, subdivisions: int = 64) -> QuadratureGrid:
    """Copy of a spatial grid with cells near a Gauss-map switch subdivided.

    A node's cell is modelled as the cap of its own area around it. Since
    ``|d log(h_i / |<v, u_i>|) / d angle|`` is at most the tangent of the
    angle between ``v`` and ``-u_i``, a node whose top two log-ratios differ
    by more than the cap radius times twice that bound keeps its facet over
    the whole cap. Every other node is replaced by ``subdivisions`` sunflower
    points in its cap sharing its weight. The result does not depend on the
    depths once built, so it can serve as a fixed quadrature for ``K`` and
    its small perturbations. Planar grids are returned unchanged.
    """
    if grid.n != 3 or K.m < 2:
        return grid
    if K.n != 3:
        raise ValidationError(f"grid dimension {grid.n} does not match n={K.n}")
    V = grid.nodes
    r = math.sqrt(grid.omega_area / grid.size / math.pi)
    dots = np.abs(V @ K.normals.T)
    log_r = np.log(K.depths) - np.log(dots)
    top2 = np.partition(log_r, -2, axis=1)[:, -2:]
    c = np.clip(dots, 1e-300, 1.0)
    lip = np.max(np.sqrt(1.0 - c**2) / c, axis=1)
    flag = top2[:, 1] - top2[:, 0] <= 2.2 * r * lip
    if not np.any(flag):
        return grid
    j = np.arange(subdivisions)
    s = r * np.sqrt((j + 0.5) / subdivisions)
    ang = j * 2.0 * math.pi / GOLDEN**2
    e1, e2 = _tangent_frames(V[flag])
    d = np.cos(ang)[None, :, None] * e1[:, None, :] + np.sin(ang)[None, :, None] * e2[:, None, :]
    sub = np.cos(s)[None, :, None] * V[flag][:, None, :] + np.sin(s)[None, :, None] * d
    ok = contains(grid.cone or K.cone, sub.reshape(-1, 3), strict=True).reshape(sub.shape[:2])
    kept = ok.sum(axis=1)
    w = grid.weights[flag]
    nodes = np.vstack([V[~flag], sub[ok]])
    weights = np.concatenate([grid.weights[~flag], np.repeat(w / np.maximum(kept, 1), kept)])
    # A cell whose sub-points all fell outside keeps its original node.
    lost = kept == 0
    if np.any(lost):
        nodes = np.vstack([nodes, V[flag][lost]])
        weights = np.concatenate([weights, w[lost]])
    nodes.setflags(write=False)
    weights.setflags(write=False)
    meta = {**grid.meta, "refined_cells": int(flag.sum()), "subdivisions": subdivisions, "parent_size": grid.size}
    return QuadratureGrid(
        nodes, weights, grid.omega_area, grid.scheme, grid.resolution, grid.seed, cone=grid.cone, meta=meta
    )


def _profile(K: PseudoCone, grid: QuadratureGrid, tie_rule: str = "first"):
    """Quadrature pieces ``(weights, rho, facet)`` for integrals over Omega_C."""
    if grid.n != K.n:
        raise ValidationError(f"grid dimension {grid.n} does not match n={K.n}")
    check = grid.cone is not K.cone
    if grid.split_cells:
        return _split_pieces(K, grid, facet_ratios(K, grid.nodes, check=check))
    rho, idx, _ = gauss_indices(K, grid.nodes, tie_rule=tie_rule, check=check)
    return grid.weights, rho, idx


def j_g(K: PseudoCone, D: DecayPair, grid: QuadratureGrid) -> float:
    """``J_G(K) = ∫ G(rho_K(v)) dv`` over Omega_C."""
    w, rho, _ = _profile(K, grid)
    return _total(w * D.G(rho))


def dual_volume(K: PseudoCone, q: float, grid: QuadratureGrid) -> float:
    """``(1/n) ∫ rho_K^q dv``."""
    q = _check_q(q)
    w, rho, _ = _profile(K, grid)
    return _total(w * rho**q) / K.n


def radial_measure(K: PseudoCone, D: DecayPair, grid: QuadratureGrid, tie_rule: str = "first") -> DiscreteMeasure:
    """Push-forward of ``F(rho_K) dv`` under the radial Gauss map.

    Atoms are the facet normals of ``K`` (in facet order).
    """
    w, rho, idx = _profile(K, grid, tie_rule)
    s = w * D.F(rho)
    return DiscreteMeasure(K.normals, _grouped(s, idx, K.m), _total(s))


def dual_curvature(
    K: PseudoCone,
    q: float,
    grid: QuadratureGrid,
    decay: DecayPair | None = None,
    tie_rule: str = "first",
) -> DiscreteMeasure:
    """``q``-th dual curvature measure, atomic on the facet normals.

    The total is the same sum as :func:`dual_volume`, hence equal to it
    exactly. ``decay`` (optional) is cross-checked against ``q``.
    """
    q = _check_q(q)
    if decay is not None and (decay.kind != "power" or decay.q != q):
        raise ValidationError(f"decay pair {decay.describe()} does not match q={q}")
    w, rho, idx = _profile(K, grid, tie_rule)
    s = w * rho**q
    return DiscreteMeasure(K.normals, _grouped(s, idx, K.m) / K.n, _total(s) / K.n)


def integrate(measure: DiscreteMeasure, g) -> float:
    """``∫ g d(measure)`` for per-atom values ``g``."""
    g = np.asarray(g, dtype=float)
    if g.shape != measure.weights.shape:
        raise ValidationError("need one function value per atom")
    return _total(g * measure.weights)


def pullback_integral(K: PseudoCone, g, q: float, grid: QuadratureGrid) -> float:
    """``(1/n) ∫ g(alpha_K(v)) rho_K(v)^q dv``, the node-side of the transform formula."""
    q = _check_q(q)
    w, rho, idx = _profile(K, grid)
    g = np.asarray(g, dtype=float)
    return _total(w * g[idx] * rho**q) / K.n
