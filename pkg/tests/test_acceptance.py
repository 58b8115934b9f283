"""Acceptance gate: one test and one printed pass/fail line per criterion.

Run with ``pytest tests/test_acceptance.py -v``; the lines are repeated in the
"acceptance criteria" section of the terminal summary.
"""

import math
import time

import numpy as np

from pscone.fixtures import (
    half_plane,
    octant,
    quadrant,
    random_pseudocone,
    tangent_pseudocone,
    translated_cone,
)
from pscone.geometry import contains, dual_cone, make_circular_cone, make_polyhedral_cone, sphere_grid
from pscone.measures import (
    discrete_measure,
    dual_curvature,
    dual_volume,
    exponential_pair,
    power_pair,
    radial_measure,
)
from pscone.pseudocone import distance_from_origin, radial, scale, support_exact, wulff_shape
from pscone.solver import SolverOptions, lemma41_bounds, normalize, solve_dual_minkowski
from pscone.variational import jg_derivative_fd, phi_gradient_of, phi_of

SEED = 20240611


def test_1_first_variation_identity(criterion):
    started = time.perf_counter()
    cones = [
        (quadrant(), 100_000),
        (make_circular_cone([0.6, 0.8], 0.5), 100_000),
        (octant(), 200_000),
        (make_circular_cone([0, 0, 1], 0.6), 200_000),
    ]
    grids = [(C, sphere_grid(C, N)) for C, N in cones]
    decays = [power_pair(-1.0), power_pair(-0.5), exponential_pair()]
    rng = np.random.default_rng(SEED)
    worst, failures = 0.0, 0
    for i in range(50):
        C, grid = grids[i % len(grids)]
        m = int(rng.integers(2, 7))
        K = random_pseudocone(C, m, rng)
        # Magnitudes bounded away from 0 with random signs.
        g = rng.uniform(0.5, 1.5, m) * rng.choice([-1.0, 1.0], m)
        rep = jg_derivative_fd(K, g, decays[i % 3], grid, t_values=[1e-4])
        worst = max(worst, rep.relative_errors[0])
        failures += rep.relative_errors[0] > 1e-3
    elapsed = time.perf_counter() - started
    ok = failures == 0 and elapsed < 60
    assert criterion(1, "first-variation identity, 50 instances", ok, f"worst rel err {worst:.2e}, {elapsed:.1f}s")


def test_2_closed_form_fixtures(criterion):
    C = quadrant()
    rows = []
    for name, K, expected in (
        ("half-plane", half_plane(C), 1 / math.sqrt(2)),
        ("C+(1,1)", translated_cone(C, [1.0, 1.0]), 1 - math.sqrt(2) / 2),
    ):
        started = time.perf_counter()
        value = dual_volume(K, -1.0, sphere_grid(C, 100_000))
        elapsed = time.perf_counter() - started
        rows.append((name, abs(value - expected), elapsed))
    ok = all(err <= 1e-4 and t < 1.0 for _, err, t in rows)
    detail = ", ".join(f"{n}: err {e:.1e} in {t:.3f}s" for n, e, t in rows)
    assert criterion(2, "closed-form dual volumes", ok, detail)


def test_3_exact_identities(criterion):
    rng = np.random.default_rng(SEED + 3)
    worst = dict(total=0.0, eq21=0.0, homog=0.0, phi=0.0, gsum=0.0)
    for C, N in ((quadrant(), 100_000), (octant(), 200_000)):
        grid = sphere_grid(C, N)
        for _ in range(5):
            m = int(rng.integers(2, 7))
            K = random_pseudocone(C, m, rng)
            for q in (-1.0, -0.5, -2.0):
                c = dual_curvature(K, q, grid)
                V = dual_volume(K, q, grid)
                worst["total"] = max(worst["total"], abs(c.total - V) / V)
                mu = radial_measure(K, power_pair(q), grid)
                scaled = abs(q) * C.n * c.weights
                worst["eq21"] = max(worst["eq21"], float(np.max(np.abs(mu.weights - scaled))) / mu.total)
                for lam in (0.5, 2.0):
                    Kl = scale(K, lam)
                    cl = dual_curvature(Kl, q, grid)
                    rel_v = abs(dual_volume(Kl, q, grid) - lam**q * V) / (lam**q * V)
                    rel_c = float(np.max(np.abs(cl.weights - lam**q * c.weights))) / (lam**q * c.total)
                    worst["homog"] = max(worst["homog"], rel_v, rel_c)
            target = discrete_measure(K.normals, rng.uniform(0.1, 1.0, m))
            f0 = phi_of(K, target, -1.0, grid)
            for lam in (0.5, 2.0, 10.0):
                worst["phi"] = max(worst["phi"], abs(phi_of(scale(K, lam), target, -1.0, grid) - f0))
            worst["gsum"] = max(worst["gsum"], abs(float(phi_gradient_of(K, target, -1.0, grid).sum())))
    ok = (
        worst["total"] <= 1e-12
        and worst["eq21"] <= 1e-12
        and worst["homog"] <= 1e-12
        and worst["phi"] <= 1e-10
        and worst["gsum"] <= 1e-14
    )
    detail = ", ".join(f"{k} {v:.1e}" for k, v in worst.items())
    assert criterion(3, "exact identities", ok, detail)


def test_4_translated_cone_boundary_mass(criterion):
    rng = np.random.default_rng(SEED + 4)
    worst_inside, checked = 0.0, 0
    for C, N in ((quadrant(), 100_000), (octant(), 200_000)):
        grid = sphere_grid(C, N)
        D = dual_cone(C)
        for _ in range(3):
            z = rng.uniform(0.2, 2.0, C.n)
            K = translated_cone(C, z)
            for decay in (power_pair(-1.0), exponential_pair()):
                mu = radial_measure(K, decay, grid)
                interior = contains(D, mu.atoms, strict=True)
                worst_inside = max(worst_inside, float(mu.weights[interior].sum()) / mu.total)
                checked += 1
    ok = worst_inside == 0.0
    assert criterion(4, "translated cones: all mass on boundary normals", ok, f"{checked} measures, interior share {worst_inside}")


def test_5_distance_bound(criterion):
    C = quadrant()
    grid = sphere_grid(C, 100_000)
    c2 = lemma41_bounds(C, -1.0)
    rng = np.random.default_rng(SEED + 5)
    worst = 0.0
    for _ in range(100):
        K = normalize(random_pseudocone(C, int(rng.integers(1, 7)), rng), -1.0, grid)
        worst = max(worst, distance_from_origin(K, grid) / c2)
    ok = worst <= 1.01
    assert criterion(5, "b(K) <= pi/4 on normalized pseudo-cones", ok, f"max b(K)/c2 = {worst:.4f} over 100")


def test_6_solver_round_trip(criterion):
    started = time.perf_counter()
    C = quadrant()
    grid = sphere_grid(C, 100_000)
    K0 = random_pseudocone(C, 4, np.random.default_rng(SEED + 6), grid=grid)
    target = dual_curvature(K0, -1.0, grid)
    res = solve_dual_minkowski(C, target, -1.0, SolverOptions(grad_tol=1e-6, max_iter=10_000), grid=grid)
    elapsed = time.perf_counter() - started
    monotone = all(b <= a for a, b in zip(res.phi_trace, res.phi_trace[1:]))
    ok = res.converged and res.iterations <= 500 and res.residual <= 1e-2 and elapsed < 30 and monotone
    detail = f"{res.status} in {res.iterations} it, residual {res.residual:.1e}, {elapsed:.1f}s, monotone {monotone}"
    assert criterion(6, "solver round trip", ok, detail)


def test_7_single_atom(criterion):
    C = quadrant()
    s = 1 / math.sqrt(2)
    target = discrete_measure([[-s, -s]], [s])
    res = solve_dual_minkowski(C, target, -1.0, grid=sphere_grid(C, 100_000))
    err = abs(res.solution.depths[0] - 1.0)
    assert criterion(7, "single-atom solve recovers depth 1", err <= 1e-3, f"|h - 1| = {err:.1e}")


def test_8_wulff_reconstruction(criterion):
    rng = np.random.default_rng(SEED + 8)
    pyramid = np.array([[1, 1, 1], [1, -1, 1], [-1, -1, 1], [-1, 1, 1]], dtype=float) / math.sqrt(3)
    cones = [(quadrant(), 100_000), (octant(), 200_000), (make_polyhedral_cone(pyramid), 200_000)]
    worst, count = 0.0, 0
    for C, N in cones:
        grid = sphere_grid(C, N)
        for _ in range(5):
            K = tangent_pseudocone(C, int(rng.integers(2, 7)), rng)
            rebuilt = wulff_shape(C, [(u, support_exact(K, u)) for u in K.normals])
            r0, r1 = radial(K, grid.nodes), radial(rebuilt, grid.nodes)
            worst = max(worst, float(np.max(np.abs(r1 - r0) / r0)))
            count += 1
    assert criterion(8, "Wulff reconstruction from exact supports", worst <= 1e-12, f"{count} shapes, max rel diff {worst:.1e}")
