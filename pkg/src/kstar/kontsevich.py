"""Kontsevich weights at orders <= 2 and the order-2 Kontsevich product.

This is the only module that uses floating point. Aerial points are placed
with the gauge q1 = 0, q2 = 1 and parametrized by the angles
theta0 = arg(p), theta1 = arg(p - 1), which fill the triangle
0 < theta0 < theta1 < pi exactly once.
"""

from __future__ import annotations

import cmath
import functools
import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

import numpy as np

from .bidiff import BiDiffOp, compile_graph
from .exactmath import ORDINARY, Poly
from .graphs import GraphClass, KGraph, enumerate_graphs
from .poisson import PoissonTensor, ordinary_tensor

TERRESTRIAL = {"q1": 0.0, "q2": 1.0}
MIN_SEPARATION = 1e-6
SNAP_DENOMINATOR = 48
DEFAULT_SAMPLES = 10**7
DEFAULT_BATCHES = 64
_TRIANGLE_AREA = math.pi**2 / 2


@dataclass(frozen=True)
class HPoint:
    x: float
    y: float

    def __post_init__(self):
        if not self.y > 0:
            raise ValueError("aerial points lie strictly in the upper half-plane")

    @property
    def z(self) -> complex:
        return complex(self.x, self.y)


def _as_complex(p) -> complex:
    if isinstance(p, HPoint):
        return p.z
    z = complex(p)
    if z.imag < 0:
        raise ValueError("points must lie in the closed upper half-plane")
    return z


def angle(p, q) -> float:
    """phi(p, q) = arg((q - p) / (q - conj p)), in (-pi, pi]."""
    zp, zq = _as_complex(p), _as_complex(q)
    if zp == zq:
        raise ValueError("angle is undefined at coincident points")
    return cmath.phase((zq - zp) / (zq - zp.conjugate()))


# ---------------------------------------------------------------------------
# Vectorized integrand
# ---------------------------------------------------------------------------


def _point(t0, t1):
    """p(theta0, theta1) and its two partial derivatives."""
    s = np.sin(t1 - t0)
    r = np.sin(t1) / s
    e = np.exp(1j * t0)
    dr0 = np.sin(t1) * np.cos(t1 - t0) / s**2
    dr1 = -np.sin(t0) / s**2
    return r * e, (dr0 + 1j * r) * e, dr1 * e


def _dphi(p, q, dp, dq):
    return np.imag((dq - dp) / (q - p)) - np.imag((dq - np.conj(dp)) / (q - np.conj(p)))


def _validate_for_integration(graph: KGraph) -> None:
    if graph.has_loop():
        raise ValueError(f"the angle form is undefined for graphs with loops: {graph}")
    if graph.n_aerial > 2 or graph.m_terrestrial != 2:
        raise ValueError("weights are implemented for n <= 2 aerial and 2 terrestrial vertices")


def _integrand(graph: KGraph, angles: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """det of d(edge angles)/d(aerial coordinates); angles has shape (N, 2n).
    Also returns the minimum pairwise distance per sample."""
    n = graph.n_aerial
    pts, derivs = [], []
    for k in range(n):
        p, d0, d1 = _point(angles[:, 2 * k], angles[:, 2 * k + 1])
        pts.append(p)
        derivs.append((d0, d1))
    size = len(angles)
    jac = np.zeros((size, 2 * n, 2 * n))
    for k, pair in enumerate(graph.edges):
        for e, target in enumerate(pair):
            row = 2 * k + e
            if target in TERRESTRIAL:
                m, q = None, np.full(size, TERRESTRIAL[target], dtype=complex)
            else:
                m = int(target[1:]) - 1
                q = pts[m]
            for col in range(2 * n):
                owner, which = divmod(col, 2)
                if owner not in (k, m):
                    continue
                dp = derivs[k][which] if owner == k else 0
                dq = derivs[m][which] if owner == m else 0
                jac[:, row, col] = _dphi(pts[k], q, dp, dq)
    det = np.linalg.det(jac)
    sep = np.full(size, np.inf)
    for k in range(n):
        for x in TERRESTRIAL.values():
            sep = np.minimum(sep, np.abs(pts[k] - x))
        for m in range(k):
            sep = np.minimum(sep, np.abs(pts[k] - pts[m]))
    return det, sep


def _normalization(graph_class: GraphClass) -> float:
    n = graph_class.representative.n_aerial
    return _TRIANGLE_AREA**n / ((2 * math.pi) ** (2 * n) * graph_class.automorphisms)


def _to_triangle(u: np.ndarray) -> np.ndarray:
    # (N, 2n) uniform in the unit cube -> per vertex sorted pair scaled by pi
    out = np.empty_like(u)
    for k in range(u.shape[1] // 2):
        a, b = u[:, 2 * k], u[:, 2 * k + 1]
        out[:, 2 * k] = np.minimum(a, b) * math.pi
        out[:, 2 * k + 1] = np.maximum(a, b) * math.pi
    return out


def _batch(args) -> tuple[float, float, int]:
    graph, seed_seq, pairs = args
    rng = np.random.default_rng(seed_seq)
    u = rng.random((pairs, 2 * graph.n_aerial))
    vals, keep = [], np.ones(pairs, dtype=bool)
    for cube in (u, 1.0 - u):
        det, sep = _integrand(graph, _to_triangle(cube))
        vals.append(det)
        keep &= sep >= MIN_SEPARATION
    # a pair with either member too close to another point is dropped whole
    paired = 0.5 * (vals[0] + vals[1])[keep]
    return float(paired.sum()), float((paired**2).sum()), int(keep.sum())


@dataclass(frozen=True)
class WeightEstimate:
    graph: str
    estimate: float
    std_error: float
    snapped: Fraction | None

    def to_json(self) -> dict:
        return {
            "graph": self.graph,
            "estimate": self.estimate,
            "std_error": self.std_error,
            "snapped": None if self.snapped is None else str(self.snapped),
        }


def snap(estimate: float, std_error: float, max_denominator: int = SNAP_DENOMINATOR) -> Fraction | None:
    candidate = Fraction(estimate).limit_denominator(max_denominator)
    # an exactly constant integrand has zero spread; allow rounding noise then
    tolerance = max(3 * std_error, 1e-12)
    return candidate if abs(float(candidate) - estimate) < tolerance else None


def weight_estimate(
    graph_class: GraphClass,
    samples: int = DEFAULT_SAMPLES,
    seed: int = 0,
    workers: int = 1,
    batches: int = DEFAULT_BATCHES,
) -> WeightEstimate:
    """Monte Carlo weight with antithetic pairs; deterministic for a given (seed, samples, batches)."""
    graph = graph_class.representative
    _validate_for_integration(graph)
    pairs_total = max(samples // 2, batches)
    sizes = [pairs_total // batches + (1 if k < pairs_total % batches else 0) for k in range(batches)]
    seeds = np.random.SeedSequence(seed).spawn(batches)
    jobs = [(graph, s, n) for s, n in zip(seeds, sizes)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_batch, jobs))
    else:
        results = [_batch(job) for job in jobs]
    total = sum(r[0] for r in results)
    squares = sum(r[1] for r in results)
    count = sum(r[2] for r in results)
    if not count:
        raise ValueError("every sample was rejected as too close to a coincidence")
    mean = total / count
    var = max(squares / count - mean**2, 0.0)
    scale = _normalization(graph_class)
    estimate = mean * scale
    std_error = math.sqrt(var / count) * scale
    return WeightEstimate(graph.text(), estimate, std_error, snap(estimate, std_error))


def _gauss(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    return (x + 1) / 2, w / 2


def _triangle_rule(n: int):
    # 0 < theta0 < theta1 < pi via theta1 = pi s, theta0 = pi s t
    x, w = _gauss(n)
    s, t = np.meshgrid(x, x, indexing="ij")
    pts = np.stack([np.pi * s * t, np.pi * s], -1).reshape(-1, 2)
    return pts, (np.outer(w, w) * np.pi**2 * s).reshape(-1)


def _duffy(apex: np.ndarray, q: np.ndarray, r: np.ndarray, n: int):
    # triangle (apex, q, r) with the singular corner at apex collapsed by s * t
    x, w = _gauss(n)
    s, t = np.meshgrid(x, x, indexing="ij")
    pts = apex + s[..., None] * (q - apex) + (s * t)[..., None] * (r - q)
    area2 = abs((q - apex)[0] * (r - q)[1] - (q - apex)[1] * (r - q)[0])
    return pts.reshape(-1, 2), (np.outer(w, w) * s * area2).reshape(-1)


_CORNERS = (np.array([0.0, 0.0]), np.array([0.0, np.pi]), np.array([np.pi, np.pi]))


def weight_quadrature(graph_class: GraphClass, nodes: int = 30) -> float:
    """Deterministic Gauss-Legendre weight; for n = 2 the inner triangle is split
    into three Duffy pieces with apex at the outer point, where the integrand
    is singular."""
    graph = graph_class.representative
    _validate_for_integration(graph)
    scale = _normalization(graph_class) / _TRIANGLE_AREA**graph.n_aerial
    outer, wo = _triangle_rule(nodes)
    if graph.n_aerial == 1:
        det, _ = _integrand(graph, outer)
        return float(np.sum(wo * det)) * scale
    total = 0.0
    for point, weight in zip(outer, wo):
        inner_pts, inner_w = [], []
        for k in range(3):
            pts, w = _duffy(point, _CORNERS[k], _CORNERS[(k + 1) % 3], nodes)
            inner_pts.append(pts)
            inner_w.append(w)
        pts, w = np.concatenate(inner_pts), np.concatenate(inner_w)
        angles = np.concatenate([np.broadcast_to(point, pts.shape), pts], axis=1)
        det, _ = _integrand(graph, angles)
        total += weight * float(np.sum(w * det))
    return total * scale


# ---------------------------------------------------------------------------
# Exact weights and the order-2 product
# ---------------------------------------------------------------------------


def order2_classes() -> list[GraphClass]:
    """Standard classes of G_{2,2} whose operators are not identically zero."""
    return [c for c in enumerate_graphs(2, 2, generalized=False) if not c.vanishing]


def first_order_operator(tensor: PoissonTensor) -> BiDiffOp:
    """C1 = (1/2) Lam^{ij} d_i (x) d_j, the wedge with weight 1/2."""
    wedge = KGraph(1, 2, (("q1", "q2"),), generalized=False)
    return compile_graph(wedge, tensor).scale(Fraction(1, 2))


@dataclass(frozen=True)
class Order2Product:
    c1: BiDiffOp
    c2: BiDiffOp
    weights: Mapping[str, Fraction]

    def cochains(self) -> list:
        return [None, self.c1, self.c2]


def order2_product(tensor: PoissonTensor, weights: Mapping[str, Fraction]) -> Order2Product:
    classes = order2_classes()
    c2 = BiDiffOp.zero(tensor.chart)
    for cls in classes:
        key = cls.text()
        if key not in weights:
            raise KeyError(f"missing weight for class {key}")
        c2 = c2 + compile_graph(cls.representative, tensor).scale(Fraction(weights[key]))
    return Order2Product(first_order_operator(tensor), c2, dict(weights))


def star_coefficients(c1: BiDiffOp, c2: BiDiffOp, f: Poly, g: Poly) -> list[Poly]:
    return [f * g, c1.apply(f, g), c2.apply(f, g)]


def associativity_defect_t2(c1: BiDiffOp, c2: BiDiffOp, f: Poly, g: Poly, h: Poly) -> Poly:
    """t^2 coefficient of (f*g)*h - f*(g*h)."""
    return (
        c2.apply(f, g) * h
        + c1.apply(c1.apply(f, g), h)
        + c2.apply(f * g, h)
        - f * c2.apply(g, h)
        - c1.apply(f, c1.apply(g, h))
        - c2.apply(f, g * h)
    )


def _probe_triples(seed: int = 7, count: int = 40) -> list[tuple[Poly, Poly, Poly]]:
    rng = np.random.default_rng(seed)
    monos = [e for e in itertools.product(range(3), repeat=4) if 1 <= sum(e) <= 2]
    out = []
    for _ in range(count):
        triple = []
        for _ in range(3):
            picks = rng.choice(len(monos), size=2, replace=False)
            coeffs = rng.integers(1, 5, size=2)
            triple.append(sum((Poly.monomial(ORDINARY, monos[i], int(c)) for i, c in zip(picks, coeffs)), Poly.zero(ORDINARY)))
        out.append(tuple(triple))
    return out


@dataclass(frozen=True)
class SolvedWeights:
    weights: Mapping[str, Fraction]
    free_classes: tuple[str, ...]
    pinned_by_quadrature: Mapping[str, float]


def solve_weights(tensor: PoissonTensor | None = None, quadrature_nodes: int = 30) -> SolvedWeights:
    """Exact order-2 weights from (i) t^2 associativity on probe triples and
    (ii) symmetry of the order-2 cochain under swapping its arguments.

    Directions left free by (i) and (ii) are coboundaries; their weights are
    fixed by deterministic quadrature and snapped to small-denominator rationals.
    """
    if tensor is None:
        return _solve_default(quadrature_nodes)
    return _solve(tensor, quadrature_nodes)


@functools.lru_cache(maxsize=None)
def _solve_default(quadrature_nodes: int) -> SolvedWeights:
    return _solve(ordinary_tensor(), quadrature_nodes)


def _solve(tensor: PoissonTensor, quadrature_nodes: int) -> SolvedWeights:
    from . import solver

    classes = order2_classes()
    labels = tuple(c.text() for c in classes)
    c1 = first_order_operator(tensor)
    ops = [compile_graph(c.representative, tensor) for c in classes]
    system = solver.LinSystem(labels)
    for k, (f, g, h) in enumerate(_probe_triples()):
        base = associativity_defect_t2(c1, BiDiffOp.zero(tensor.chart), f, g, h)
        parts = [associativity_defect_t2(c1, op, f, g, h) - base for op in ops]
        monos = set(base.terms)
        for p in parts:
            monos |= set(p.terms)
        for m in sorted(monos):
            system.add_row([p.coeff(m) for p in parts], -base.coeff(m), f"associativity probe {k} monomial {m}")
    antisym = [op.antisymmetric_part() for op in ops]
    keys = set()
    for op in antisym:
        keys |= set(op.terms)
    for key in sorted(keys):
        coeff_polys = [op.terms.get(key, Poly.zero(tensor.chart)) for op in antisym]
        monos = set()
        for p in coeff_polys:
            monos |= set(p.terms)
        for m in sorted(monos):
            system.add_row([p.coeff(m) for p in coeff_polys], 0, f"symmetry {key} monomial {m}")
    result = solver.solve_or_certificate(system)
    if not isinstance(result, solver.Solution):
        raise RuntimeError("order-2 weight constraints are inconsistent")
    weights = dict(result.assignment)
    pinned = {}
    free = tuple(labels[i] for i in result.free_columns)
    if free:
        # each free column is a coboundary direction: pin it by quadrature, re-solve
        for i in result.free_columns:
            value = weight_quadrature(classes[i], quadrature_nodes)
            pinned[labels[i]] = value
            row = [0] * len(labels)
            row[i] = 1
            system.add_row(row, Fraction(value).limit_denominator(SNAP_DENOMINATOR), f"quadrature {labels[i]}")
        result = solver.solve_or_certificate(system)
        if not isinstance(result, solver.Solution) or result.nullity:
            raise RuntimeError("quadrature-pinned weights are inconsistent")
        weights = dict(result.assignment)
    return SolvedWeights(weights, free, pinned)
