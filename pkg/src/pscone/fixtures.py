"""Reference shapes with closed-form answers and seeded random instances."""

from __future__ import annotations

import math

import numpy as np

from .errors import ValidationError
from .geometry import Cone, QuadratureGrid, contains, dual_cone, make_polyhedral_cone
from .measures import dual_curvature
from .pseudocone import PseudoCone, from_arrays, gauss_arcs, wulff_shape

SQRT_HALF = math.sqrt(0.5)


def quadrant() -> Cone:
    return make_polyhedral_cone([[1.0, 0.0], [0.0, 1.0]])


def octant() -> Cone:
    return make_polyhedral_cone(np.eye(3))


def half_plane(C: Cone | None = None, depth: float = 1.0) -> PseudoCone:
    """``{x + y >= sqrt(2) depth}`` inside the quadrant."""
    return wulff_shape(C or quadrant(), [([-SQRT_HALF, -SQRT_HALF], depth)])


def translated_cone(C: Cone, z) -> PseudoCone:
    """``C + z`` for polyhedral ``C`` and ``z`` in its interior.

    One facet per facet of ``C``, at depth ``|<z, f>|``.
    """
    if C.kind != "polyhedral":
        raise ValidationError("translated_cone needs a polyhedral cone")
    z = np.asarray(z, dtype=float)
    if not contains(C, z, strict=True):
        raise ValidationError("translation vector must lie in the interior of the cone")
    return from_arrays(C, C.facet_normals, np.abs(C.facet_normals @ z))


def _dual_directions(C: Cone, rng: np.random.Generator, count: int) -> np.ndarray:
    D = dual_cone(C)
    center = D.interior_direction()
    out = []
    while len(out) < count:
        z = rng.standard_normal((4 * count + 16, C.n))
        z /= np.linalg.norm(z, axis=1, keepdims=True)
        z = z[(z @ center > 0) & contains(D, z, strict=True)]
        out.extend(z)
    return np.array(out[:count])


def random_pseudocone(
    C: Cone,
    m: int,
    rng: np.random.Generator,
    depth_range: tuple[float, float] = (0.5, 2.0),
    grid: QuadratureGrid | None = None,
    min_share: float = 0.0,
    max_tries: int = 10_000,
) -> PseudoCone:
    """Random facets with normals uniform in the dual region.

    With ``grid`` the draw is repeated until every facet is active, that is
    carries positive dual curvature mass (``q = -1``), and at least
    ``min_share`` of the total. In the plane activity is first screened
    exactly from the Gauss-map arcs, which is much cheaper than a quadrature.
    """
    for _ in range(max_tries):
        U = _dual_directions(C, rng, m)
        if C.n == 2:
            U = U[np.argsort(np.arctan2(U[:, 1], U[:, 0]))]
        K = from_arrays(C, U, rng.uniform(*depth_range, size=m))
        if grid is None:
            return K
        if C.n == 2 and len({f for lo, hi, f in gauss_arcs(K) if hi > lo}) < m:
            continue
        c = dual_curvature(K, -1.0, grid)
        if c.weights.min() > 0 and c.weights.min() >= min_share * c.total:
            return K
    raise ValidationError(f"no instance with every facet share >= {min_share} after {max_tries} draws")


def _inner_distance(C: Cone, z: np.ndarray) -> float:
    """Distance from an interior point ``z`` to the boundary of ``C``."""
    if C.kind == "polyhedral":
        return float(np.min(np.abs(C.facet_normals @ z)))
    r = np.linalg.norm(z)
    angle = math.acos(float(np.clip(z @ C.axis / r, -1.0, 1.0)))
    return r * math.sin(C.half_angle - angle)


def tangent_pseudocone(C: Cone, m: int, rng: np.random.Generator) -> PseudoCone:
    """Random pseudo-cone whose facets all touch a ball inside ``C``.

    The normals are drawn as in :func:`random_pseudocone`; facet ``i`` gets the
    depth of the supporting plane of a ball ``B(z, r)`` in the interior of
    ``C``. Distinct normals touch the ball at distinct interior points, so
    every facet is active by construction.
    """
    D = dual_cone(C)
    while True:
        z = _dual_directions(D, rng, 1)[0] * rng.uniform(1.0, 2.0)
        dist = _inner_distance(C, z)
        if dist > 1e-3:
            break
    r = rng.uniform(0.2, 0.8) * dist
    U = _dual_directions(C, rng, m)
    if C.n == 2:
        U = U[np.argsort(np.arctan2(U[:, 1], U[:, 0]))]
    return from_arrays(C, U, np.abs(U @ z) - r)
