"""Pointed convex cones, their duals, and equal-weight quadrature on Omega_C.

Two cone families are supported:

* circular cones ``{x : angle(x, axis) <= half_angle}`` in any dimension;
* polyhedral cones given by generators, restricted to ``n in {2, 3}``.

``Omega_C`` is the open spherical region ``S^{n-1} ∩ int C``. Quadrature grids
only ever contain nodes strictly inside it.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np
from scipy.optimize import linprog
from scipy.special import betainc, gammaln

from .errors import GridError, ValidationError

UNIT_TOL = 1e-9
MEMBERSHIP_TOL = 1e-9
GOLDEN = (1.0 + math.sqrt(5.0)) / 2.0

ConeKind = Literal["circular", "polyhedral"]
GridScheme = Literal["auto", "midpoint", "fibonacci", "random"]


@dataclass(frozen=True, eq=False)
class Cone:
    """A closed convex cone that is pointed and has nonempty interior.

    Use :func:`make_circular_cone` or :func:`make_polyhedral_cone` rather than
    constructing this directly; the factories enforce the invariants.
    """

    kind: ConeKind
    n: int
    axis: np.ndarray | None = None
    half_angle: float | None = None
    generators: np.ndarray | None = None
    facet_normals: np.ndarray | None = None

    @property
    def facets_enumerable(self) -> bool:
        return self.facet_normals is not None

    def interior_direction(self) -> np.ndarray:
        """A unit vector in the interior of the cone."""
        if self.kind == "circular":
            return self.axis.copy()
        s = self.generators.sum(axis=0)
        return s / np.linalg.norm(s)

    def __repr__(self) -> str:
        if self.kind == "circular":
            return (
                f"Cone(circular, n={self.n}, axis={np.round(self.axis, 6).tolist()}, "
                f"half_angle={self.half_angle:.6g})"
            )
        return f"Cone(polyhedral, n={self.n}, generators={len(self.generators)}, facets={len(self.facet_normals)})"


@dataclass(frozen=True, eq=False)
class QuadratureGrid:
    """Equal-weight nodes strictly inside Omega_C.

    ``weights`` sum to ``omega_area`` (up to rounding of ``N`` equal summands).
    """

    nodes: np.ndarray
    weights: np.ndarray
    omega_area: float
    scheme: str
    resolution: int
    seed: int | None = None
    cone: Cone | None = None
    split_cells: bool = False
    meta: dict = field(default_factory=dict)

    @property
    def size(self) -> int:
        return len(self.weights)

    @property
    def n(self) -> int:
        return self.nodes.shape[1]


def _as_unit(vec, name: str) -> np.ndarray:
    v = np.asarray(vec, dtype=float)
    if v.ndim != 1:
        raise ValidationError(f"{name} must be a 1-d vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValidationError(f"{name} has non-finite entries")
    norm = np.linalg.norm(v)
    if abs(norm - 1.0) > UNIT_TOL:
        raise ValidationError(f"{name} must have unit norm (|{name}| = {norm:.12g})")
    return v / norm


def make_circular_cone(axis: Sequence[float], half_angle: float, n: int | None = None) -> Cone:
    """Circular cone of the given axis and half opening angle."""
    a = _as_unit(axis, "axis")
    if n is None:
        n = a.size
    if n < 2:
        raise ValidationError("dimension must be at least 2")
    if a.size != n:
        raise ValidationError(f"axis has dimension {a.size}, expected n={n}")
    half_angle = float(half_angle)
    if not (0.0 < half_angle < math.pi / 2):
        raise ValidationError(
            f"half_angle must lie in (0, pi/2) for a pointed cone with interior, got {half_angle!r}"
        )
    a.setflags(write=False)
    return Cone(kind="circular", n=int(n), axis=a, half_angle=half_angle)


def _perp2(g: np.ndarray) -> np.ndarray:
    return np.array([-g[1], g[0]])


def _dedupe(vectors: list[np.ndarray], tol: float = 1e-9) -> list[np.ndarray]:
    out: list[np.ndarray] = []
    for v in vectors:
        if all(np.linalg.norm(v - w) > tol for w in out):
            out.append(v)
    return out


def _facets_of_hull(gens: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Outward unit facet normals of the conic hull of ``gens`` (n = 2 or 3).

    Brute force over hyperplanes spanned by ``n - 1`` generators; a plane is a
    facet when every generator lies on its inner side.
    """
    n = gens.shape[1]
    candidates: list[np.ndarray] = []
    if n == 2:
        for g in gens:
            p = _perp2(g)
            candidates.extend([p, -p])
    else:
        for ga, gb in itertools.combinations(gens, 2):
            c = np.cross(ga, gb)
            norm = np.linalg.norm(c)
            if norm < 1e-12:
                continue
            c = c / norm
            candidates.extend([c, -c])
    facets = [c for c in candidates if np.all(gens @ c <= tol)]
    return np.array(_dedupe(facets))


def _extreme_rays(gens: np.ndarray, facets: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    n = gens.shape[1]
    rays = []
    for g in gens:
        on = facets[np.abs(facets @ g) <= tol]
        if len(on) and np.linalg.matrix_rank(on, tol=1e-9) >= n - 1:
            rays.append(g)
    return np.array(_dedupe(rays))


def make_polyhedral_cone(generators: Sequence[Sequence[float]]) -> Cone:
    """Conic hull of unit generators, with facet normals computed.

    Raises :class:`ValidationError` naming the violated invariant when the
    hull contains a line or is lower-dimensional.
    """
    if len(generators) == 0:
        raise ValidationError("generator list is empty")
    gens = np.array([_as_unit(g, f"generators[{i}]") for i, g in enumerate(generators)])
    n = gens.shape[1]
    if n not in (2, 3):
        raise ValidationError(f"polyhedral cones are supported for n in {{2, 3}} only, got n={n}")

    # Pointed iff some x has <g, x> >= 1 for every generator.
    lp = linprog(
        np.zeros(n), A_ub=-gens, b_ub=-np.ones(len(gens)), bounds=[(None, None)] * n, method="highs"
    )
    if lp.status != 0:
        raise ValidationError("pointedness violated: the generators' conic hull contains a line")
    if np.linalg.matrix_rank(gens, tol=1e-9) < n:
        raise ValidationError("nonempty interior violated: generators span a lower-dimensional cone")

    facets = _facets_of_hull(gens)
    rays = _extreme_rays(gens, facets)
    if n == 2:
        # Fix orientation so the hull runs counterclockwise from rays[0] to rays[1].
        if rays[0][0] * rays[1][1] - rays[0][1] * rays[1][0] < 0:
            rays = rays[::-1].copy()
    facets = facets + 0.0  # drop signed zeros
    rays = rays + 0.0
    facets.setflags(write=False)
    rays.setflags(write=False)
    return Cone(kind="polyhedral", n=n, generators=rays, facet_normals=facets)


def cone_from_dict(spec: dict) -> Cone:
    """Build a cone from its JSON dictionary form."""
    kind = spec.get("kind")
    if kind == "circular":
        return make_circular_cone(spec["axis"], spec["half_angle"], spec.get("n"))
    if kind == "polyhedral":
        return make_polyhedral_cone(spec["generators"])
    raise ValidationError(f"unknown cone kind {kind!r}")


def dual_cone(C: Cone) -> Cone:
    """The dual cone ``{x : <x, y> <= 0 for all y in C}``."""
    if C.kind == "circular":
        return make_circular_cone(-C.axis, math.pi / 2 - C.half_angle, C.n)
    # Outward facet normals of C generate its dual.
    return make_polyhedral_cone(C.facet_normals)


def contains(C: Cone, x, strict: bool = False, tol: float = MEMBERSHIP_TOL):
    """Membership of ``x`` (a vector or a stack of row vectors) in ``C``.

    ``strict`` tests interior membership. The slack of the defining
    inequalities is compared against ``tol * |x|``.
    """
    X = np.asarray(x, dtype=float)
    single = X.ndim == 1
    X = np.atleast_2d(X)
    norms = np.linalg.norm(X, axis=1)
    if C.kind == "circular":
        slack = X @ C.axis - norms * math.cos(C.half_angle)
        ok = slack > tol * norms if strict else slack >= -tol * norms
    else:
        worst = np.max(X @ C.facet_normals.T, axis=1)
        ok = worst < -tol * norms if strict else worst <= tol * norms
    return bool(ok[0]) if single else ok


def _sphere_area(n: int) -> float:
    return 2.0 * math.exp(0.5 * n * math.log(math.pi) - gammaln(0.5 * n))


def _cap_area(n: int, angle: float) -> float:
    if angle <= math.pi / 2:
        return 0.5 * _sphere_area(n) * float(betainc(0.5 * (n - 1), 0.5, math.sin(angle) ** 2))
    return _sphere_area(n) - _cap_area(n, math.pi - angle)


def omega_area(C: Cone, n: int | None = None) -> float:
    """Spherical Lebesgue measure of Omega_C.

    Closed form for circular cones (regularized incomplete beta) and for
    polyhedral cones in the plane (opening angle) and in space (spherical
    excess of the polygon cut out on the sphere).
    """
    if n is not None and n != C.n:
        raise ValidationError(f"dimension mismatch: cone has n={C.n}, got n={n}")
    if C.kind == "circular":
        return _cap_area(C.n, C.half_angle)
    if C.n == 2:
        g1, g2 = C.generators
        return math.acos(float(np.clip(g1 @ g2, -1.0, 1.0)))
    # n == 3: Girard. Each extreme ray sits on exactly two facets; the polygon's
    # interior angle there is pi minus the angle between the outward normals.
    total = 0.0
    for g in C.generators:
        on = C.facet_normals[np.abs(C.facet_normals @ g) <= 1e-9]
        a, b = on[0], on[1]
        total += math.pi - math.acos(float(np.clip(a @ b, -1.0, 1.0)))
    return total - (len(C.generators) - 2) * math.pi


def _uniform_sphere(rng: np.random.Generator, size: int, n: int) -> np.ndarray:
    z = rng.standard_normal((size, n))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def omega_area_mc(C: Cone, samples: int = 200_000, seed: int = 0) -> tuple[float, float]:
    """Monte Carlo estimate of Omega_C's area with its standard error."""
    rng = np.random.default_rng(seed)
    pts = _uniform_sphere(rng, samples, C.n)
    hit = contains(C, pts, strict=True).astype(float)
    p = hit.mean()
    total = _sphere_area(C.n)
    return total * p, total * math.sqrt(p * (1.0 - p) / samples)


def _frame(axis: np.ndarray) -> np.ndarray:
    """Orthonormal basis whose last row is ``axis``."""
    n = axis.size
    basis = np.linalg.qr(np.column_stack([axis, np.eye(n)]))[0][:, :n]
    basis[:, 0] *= np.sign(basis[:, 0] @ axis)
    return np.vstack([basis[:, 1:].T, axis])


def _bounding_cap(C: Cone) -> tuple[np.ndarray, float]:
    if C.kind == "circular":
        return C.axis, C.half_angle
    c = C.interior_direction()
    angle = max(math.acos(float(np.clip(g @ c, -1.0, 1.0))) for g in C.generators)
    if angle >= math.pi / 2:
        angle = math.pi
    return c, min(angle * (1 + 1e-9), math.pi)


def _fibonacci_cap(axis: np.ndarray, angle: float, count: int, offset: float) -> np.ndarray:
    i = np.arange(count, dtype=float)
    z = 1.0 - (1.0 - math.cos(angle)) * (i + 0.5) / count
    r = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
    phi = 2.0 * math.pi * i / GOLDEN + offset
    local = np.column_stack([r * np.cos(phi), r * np.sin(phi), z])
    return local @ _frame(axis)


def _random_cap(rng: np.random.Generator, axis: np.ndarray, angle: float, count: int) -> np.ndarray:
    n = axis.size
    out = []
    have = 0
    cos_a = math.cos(angle)
    while have < count:
        pts = _uniform_sphere(rng, max(4 * count, 1024), n)
        pts = pts[pts @ axis >= cos_a]
        out.append(pts)
        have += len(pts)
    return np.vstack(out)[:count]


def arc_bounds(C: Cone) -> tuple[float, float]:
    """Start angle and length of the arc Omega_C for a planar cone."""
    if C.n != 2:
        raise ValidationError("arc parametrization needs n = 2")
    if C.kind == "circular":
        center = math.atan2(C.axis[1], C.axis[0])
        return center - C.half_angle, 2.0 * C.half_angle
    g1 = C.generators[0]
    return math.atan2(g1[1], g1[0]), omega_area(C)


def sphere_grid(
    C: Cone,
    resolution: int,
    scheme: GridScheme = "auto",
    seed: int | None = None,
    split_cells: bool = True,
) -> QuadratureGrid:
    """Equal-weight quadrature grid on Omega_C.

    In the plane ``scheme="midpoint"`` splits the arc into ``resolution``
    equal sub-arcs. In space ``"fibonacci"`` lays a golden-angle spiral on a
    cap enclosing Omega_C, sized so that about ``resolution`` nodes survive the
    strict-interior filter; ``seed`` rotates the spiral. ``"random"`` draws
    exactly ``resolution`` uniform nodes (any dimension). Every kept node gets
    weight ``omega_area / N_kept``.

    ``split_cells`` (midpoint grids only) lets integrals split a node's cell
    where the integrand switches facets, see :mod:`pscone.measures`.
    """
    resolution = int(resolution)
    if resolution < 1:
        raise GridError("resolution must be a positive node count")
    if scheme == "auto":
        scheme = "midpoint" if C.n == 2 else ("fibonacci" if C.n == 3 else "random")
    if scheme == "midpoint" and C.n != 2:
        raise GridError("the midpoint scheme is only defined for n = 2")
    if scheme == "fibonacci" and C.n != 3:
        raise GridError("the fibonacci scheme is only defined for n = 3")

    area = omega_area(C)
    if scheme == "midpoint":
        start, span = arc_bounds(C)
        theta = start + span * (np.arange(resolution) + 0.5) / resolution
        nodes = np.column_stack([np.cos(theta), np.sin(theta)])
    else:
        axis, angle = _bounding_cap(C)
        if scheme == "fibonacci":
            offset = 0.0 if seed is None else float(np.random.default_rng(seed).uniform(0, 2 * math.pi))
            count = int(math.ceil(resolution * _cap_area(3, angle) / area))
            nodes = _fibonacci_cap(axis, angle, count, offset)
        elif scheme == "random":
            rng = np.random.default_rng(0 if seed is None else seed)
            nodes = np.empty((0, C.n))
            while len(nodes) < resolution:
                cand = _random_cap(rng, axis, angle, resolution)
                nodes = np.vstack([nodes, cand[contains(C, cand, strict=True)]])
            nodes = nodes[:resolution]
        else:
            raise GridError(f"unknown grid scheme {scheme!r}")

    nodes = nodes[contains(C, nodes, strict=True)]
    if len(nodes) == 0:
        raise GridError(
            f"no grid node lies strictly inside the cone at resolution {resolution}; "
            "increase the resolution"
        )
    weights = np.full(len(nodes), area / len(nodes))
    nodes.setflags(write=False)
    weights.setflags(write=False)
    split = bool(split_cells) and scheme == "midpoint"
    return QuadratureGrid(nodes, weights, area, scheme, resolution, seed, cone=C, split_cells=split)
