"""Poisson tensors on the two GL(2) charts.

The ordinary chart carries the quadratic tensor of the standard Poisson-Lie
structure. The exponential chart tensor is obtained by transporting it
through T = e^X, inverted by formal reversion.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from .exactmath import (
    CENTRED,
    EXACT,
    EXPONENTIAL,
    ORDINARY,
    Chart,
    Poly,
    TSeries,
    render_poly,
    series_substitute,
)

MAX_EXP_FUNCTION_DEGREE = 4
MAX_EXP_TENSOR_DEGREE = 3


@dataclass(frozen=True)
class PoissonTensor:
    """Antisymmetric bivector; only the upper triangle (i < j) is stored."""

    chart: Chart
    upper: Mapping[tuple[int, int], Poly]
    trusted_degree: float = EXACT

    def __post_init__(self):
        for (i, j), p in self.upper.items():
            if not i < j:
                raise ValueError(f"only upper-triangle entries are stored, got {(i, j)}")
            if p.chart != self.chart and not p.is_constant():
                raise ValueError(f"entry {(i, j)} is over chart {p.chart.name!r}")

    @classmethod
    def from_entries(cls, chart: Chart, entries: Mapping[tuple[str, str], Poly], trusted_degree=EXACT):
        upper = {}
        for (u, v), p in entries.items():
            i, j = chart.index(u), chart.index(v)
            if i > j:
                i, j, p = j, i, -p
            upper[(i, j)] = p.lift(chart).truncate(trusted_degree)
        return cls(chart, upper, trusted_degree)

    @classmethod
    def zero(cls, chart: Chart) -> "PoissonTensor":
        return cls(chart, {})

    def entry(self, i: int | str, j: int | str) -> Poly:
        if isinstance(i, str):
            i = self.chart.index(i)
        if isinstance(j, str):
            j = self.chart.index(j)
        if i == j:
            return Poly.zero(self.chart)
        if i < j:
            return self.upper.get((i, j), Poly.zero(self.chart))
        return -self.upper.get((j, i), Poly.zero(self.chart))

    def series(self, i: int, j: int) -> TSeries:
        """Entry as a t-free series carrying the trusted degree."""
        return TSeries([self.entry(i, j)], self.trusted_degree, self.chart)

    def matrix(self) -> list[list[Poly]]:
        n = self.chart.dim
        return [[self.entry(i, j) for j in range(n)] for i in range(n)]

    def jacobi_defect(self) -> dict[tuple[int, int, int], TSeries]:
        """Cyclic sums Lam^{li} d_l Lam^{jk} + (cyclic) for i < j < k, with their trusted degree."""
        n = self.chart.dim
        out = {}
        for i, j, k in itertools.combinations(range(n), 3):
            total = TSeries([Poly.zero(self.chart)], EXACT, self.chart)
            for l in range(n):
                for x, y, z in ((i, j, k), (j, k, i), (k, i, j)):
                    total = total + self.series(l, x) * self.series(y, z).diff(l)
            out[(i, j, k)] = total
        return out

    def is_poisson(self) -> bool:
        return all(not d[0] for d in self.jacobi_defect().values())

    def to_json(self) -> dict:
        names = self.chart.variables
        entries = {
            f"{names[i]},{names[j]}": render_poly(self.entry(i, j))
            for i, j in itertools.combinations(range(self.chart.dim), 2)
        }
        trusted = "exact" if self.trusted_degree == EXACT else self.trusted_degree
        return {"chart": self.chart.name, "trusted_degree": trusted, "entries": entries}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2)


def ordinary_tensor() -> PoissonTensor:
    a, b, c, d = (Poly.var(ORDINARY, v) for v in "abcd")
    return PoissonTensor.from_entries(
        ORDINARY,
        {
            ("a", "b"): a * b,
            ("a", "c"): a * c,
            ("a", "d"): b * c * 2,
            ("b", "c"): Poly.zero(ORDINARY),
            ("b", "d"): b * d,
            ("c", "d"): c * d,
        },
    )


def _mat_mul(x, y, degree):
    return [
        [sum((x[i][k] * y[k][j] for k in range(2)), Poly.zero(x[0][0].chart)).truncate(degree) for j in range(2)]
        for i in range(2)
    ]


def exp_chart_functions(coord_degree: int = 3) -> dict[str, TSeries]:
    """a, b, c, d as truncated series in alpha, beta, gamma, delta from T = e^X."""
    if not 0 <= coord_degree <= MAX_EXP_FUNCTION_DEGREE:
        raise ValueError(f"coordinate degree must be in 0..{MAX_EXP_FUNCTION_DEGREE}")
    al, be, ga, de = (Poly.var(EXPONENTIAL, v) for v in EXPONENTIAL.variables)
    x = [[al, be], [ga, de]]
    one, zero = Poly.const(1, EXPONENTIAL), Poly.zero(EXPONENTIAL)
    term = [[one, zero], [zero, one]]
    total = [row[:] for row in term]
    for k in range(1, coord_degree + 1):
        term = _mat_mul(term, x, coord_degree)
        term = [[p / k for p in row] for row in term]
        total = [[total[i][j] + term[i][j] for j in range(2)] for i in range(2)]
    flat = {"a": total[0][0], "b": total[0][1], "c": total[1][0], "d": total[1][1]}
    return {k: TSeries([v], coord_degree, EXPONENTIAL) for k, v in flat.items()}


def _centred_shift(functions: Mapping[str, TSeries]) -> dict[str, TSeries]:
    # centred coordinates vanish at the identity: u11 = a - 1, u12 = b, u21 = c, u22 = d - 1
    return {
        "u11": functions["a"] - 1,
        "u12": functions["b"],
        "u21": functions["c"],
        "u22": functions["d"] - 1,
    }


def log_chart_inverse(degree: int = MAX_EXP_FUNCTION_DEGREE) -> dict[str, Poly]:
    """Formal reversion of the exponential chart: xi^k as polynomials in the
    centred coordinates, exact through ``degree``.

    Writes u = xi + N(xi) with N of order >= 2 and iterates xi <- u - N(xi);
    each pass fixes one more degree, so the result is built degree by degree.
    """
    forward = _centred_shift(exp_chart_functions(degree))
    higher = {}
    for name, var in zip(CENTRED.variables, EXPONENTIAL.variables):
        higher[name] = forward[name][0] - Poly.var(EXPONENTIAL, var)
    u = {name: Poly.var(CENTRED, name) for name in CENTRED.variables}
    xi = dict(zip(EXPONENTIAL.variables, u.values()))
    for _ in range(degree):
        nxt = {}
        for name, var in zip(CENTRED.variables, EXPONENTIAL.variables):
            correction = series_substitute(higher[name], {v: TSeries([xi[v]], degree, CENTRED) for v in xi})
            nxt[var] = (u[name] - correction[0]).truncate(degree)
        xi = nxt
    return xi


def exp_chart_tensor(coord_degree: int = MAX_EXP_TENSOR_DEGREE) -> PoissonTensor:
    """Ordinary tensor pushed to the exponential chart:
    Lam_exp^{kl} = sum_ij (d xi^k / d x_i)(d xi^l / d x_j) Lam_ord^{ij}, all composed with e^X."""
    if not 0 <= coord_degree <= MAX_EXP_TENSOR_DEGREE:
        raise ValueError(
            f"exponential tensor is implemented through degree {MAX_EXP_TENSOR_DEGREE}, got {coord_degree}"
        )
    depth = coord_degree + 1
    xi = log_chart_inverse(depth)
    forward = exp_chart_functions(depth)
    centred_images = _centred_shift(forward)
    # Jacobian d xi^k / d u_i, re-expressed on the exponential chart
    jac = [
        [
            series_substitute(xi[k].diff(u), centred_images).truncate(coord_degree)
            for u in CENTRED.variables
        ]
        for k in EXPONENTIAL.variables
    ]
    lam = ordinary_tensor()
    lam_at = [
        [series_substitute(lam.entry(i, j), forward).truncate(coord_degree) for j in range(4)] for i in range(4)
    ]
    upper = {}
    for k, l in itertools.combinations(range(4), 2):
        total = TSeries([Poly.zero(EXPONENTIAL)], coord_degree, EXPONENTIAL)
        for i in range(4):
            for j in range(4):
                if lam_at[i][j][0]:
                    total = total + jac[k][i] * jac[l][j] * lam_at[i][j]
        upper[(k, l)] = total[0].truncate(coord_degree)
    return PoissonTensor(EXPONENTIAL, upper, coord_degree)


def pushforward_residual(tensor: PoissonTensor, degree: int | None = None) -> dict[tuple[str, str], Poly]:
    """{u, v} o e^X - sum_kl du/dxi^k dv/dxi^l Lam^{kl} for coordinate pairs u < v,
    truncated to ``degree`` (default: the tensor's trusted degree, as far as the
    coordinate functions are available)."""
    if degree is None:
        degree = min(tensor.trusted_degree, MAX_EXP_FUNCTION_DEGREE - 1)
    if degree + 1 > MAX_EXP_FUNCTION_DEGREE:
        raise ValueError(f"residual is available through degree {MAX_EXP_FUNCTION_DEGREE - 1}")
    functions = exp_chart_functions(min(degree + 1, MAX_EXP_FUNCTION_DEGREE))
    lam = ordinary_tensor()
    names = ORDINARY.variables
    out = {}
    for i, j in itertools.combinations(range(4), 2):
        lhs = series_substitute(lam.entry(i, j), functions)[0].truncate(degree)
        rhs = Poly.zero(EXPONENTIAL)
        for k in range(4):
            for l in range(4):
                entry = tensor.entry(k, l)
                if entry:
                    rhs = rhs + functions[names[i]][0].diff(k) * functions[names[j]][0].diff(l) * entry
        out[(names[i], names[j])] = (lhs - rhs.truncate(degree)).truncate(degree)
    return out
