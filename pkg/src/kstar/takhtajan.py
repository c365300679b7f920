"""The quantum-group star product on GL(2) coordinates, T1*T2 = F^-1 (T (x) T) F.

F is expanded as an exact t-series of 4x4 rational matrices; the coordinate
products are read entry by entry from the conjugated tensor square of the
matrix of coordinate functions.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .exactmath import (
    EXPONENTIAL,
    ORDINARY,
    Chart,
    Poly,
    TSeries,
    cosh_series,
    exp_series,
    reciprocal,
    render_poly,
    series_substitute,
    sinh_series,
    sqrt,
)
from .poisson import exp_chart_functions, ordinary_tensor

COORDS = ORDINARY.variables
_MAT_INDEX = {(0, 0): "a", (0, 1): "b", (1, 0): "c", (1, 1): "d"}
_NAME_INDEX = {v: k for k, v in _MAT_INDEX.items()}
# permutation operator on C^2 (x) C^2 in the basis e1e1, e1e2, e2e1, e2e2
_P = [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]]

PRODUCT_CHART = Chart("product", tuple(f"{v}{k}" for k in (1, 2) for v in COORDS))


def _zero4():
    return [[Fraction(0)] * 4 for _ in range(4)]


def _identity4():
    m = _zero4()
    for i in range(4):
        m[i][i] = Fraction(1)
    return m


class MatSeries:
    """4x4 matrix of scalar t-series, stored as one rational matrix per power of t."""

    def __init__(self, orders: Sequence[Sequence[Sequence[Fraction]]]):
        self.orders = [[[Fraction(x) for x in row] for row in m] for m in orders]

    @property
    def t_order(self) -> int:
        return len(self.orders) - 1

    @classmethod
    def identity(cls, t_order: int) -> "MatSeries":
        return cls([_identity4()] + [_zero4() for _ in range(t_order)])

    @classmethod
    def from_entries(cls, entries: Sequence[Sequence[TSeries | None]], t_order: int) -> "MatSeries":
        orders = []
        for n in range(t_order + 1):
            m = _zero4()
            for i in range(4):
                for j in range(4):
                    s = entries[i][j]
                    if s is not None:
                        m[i][j] = s.scalars()[n]
            orders.append(m)
        return cls(orders)

    def entry(self, i: int, j: int) -> TSeries:
        return TSeries.from_scalars([m[i][j] for m in self.orders])

    def __matmul__(self, other: "MatSeries") -> "MatSeries":
        n = min(self.t_order, other.t_order)
        out = []
        for k in range(n + 1):
            acc = _zero4()
            for p in range(k + 1):
                x, y = self.orders[p], other.orders[k - p]
                for i in range(4):
                    for j in range(4):
                        acc[i][j] += sum(x[i][r] * y[r][j] for r in range(4))
            out.append(acc)
        return MatSeries(out)

    def inverse(self) -> "MatSeries":
        """Formal inverse, requiring the t^0 part to be the identity."""
        if self.orders[0] != _identity4():
            raise ValueError("formal inverse needs an identity constant term")
        inv = [_identity4()]
        for n in range(1, self.t_order + 1):
            acc = _zero4()
            for k in range(1, n + 1):
                x, y = self.orders[k], inv[n - k]
                for i in range(4):
                    for j in range(4):
                        acc[i][j] -= sum(x[i][r] * y[r][j] for r in range(4))
            inv.append(acc)
        return MatSeries(inv)

    def __eq__(self, other):
        return isinstance(other, MatSeries) and self.orders == other.orders

    __hash__ = None


def f_matrix(t_order: int = 2) -> MatSeries:
    """F = exp(-tP/2) M with M the lower-triangular block matrix in q = e^t, u, v."""
    if not 2 <= t_order <= 4:
        raise ValueError("t_order must be between 2 and 4")
    half = Fraction(1, 2)
    ch, sh = cosh_series(t_order, half), sinh_series(t_order, half)
    # exp(-tP/2) = cosh(t/2) I - sinh(t/2) P since P^2 = I
    e = [[None] * 4 for _ in range(4)]
    for i in range(4):
        for j in range(4):
            e[i][j] = ch * int(i == j) - sh * _P[i][j]
    root_q = exp_series(half, t_order)
    cosh_t = cosh_series(t_order)
    u = sqrt(reciprocal(cosh_t))
    u_inv = sqrt(cosh_t)
    v = sinh_series(t_order) * u
    m = [[None] * 4 for _ in range(4)]
    m[0][0], m[1][1], m[2][1], m[2][2], m[3][3] = root_q, u_inv, v, u, root_q
    return MatSeries.from_entries(e, t_order) @ MatSeries.from_entries(m, t_order)


def _coordinate_square() -> list[list[Poly]]:
    # (T (x) T)_{(ik),(jl)} = t_ij t_kl
    out = [[None] * 4 for _ in range(4)]
    for i, k, j, l in itertools.product(range(2), repeat=4):
        out[2 * i + k][2 * j + l] = Poly.var(ORDINARY, _MAT_INDEX[(i, j)]) * Poly.var(ORDINARY, _MAT_INDEX[(k, l)])
    return out


@dataclass(frozen=True)
class StarTable:
    """u * v for every ordered pair of coordinate functions."""

    t_order: int
    products: Mapping[tuple[str, str], TSeries]

    def __getitem__(self, pair: tuple[str, str]) -> TSeries:
        return self.products[pair]

    def pairs(self):
        return list(self.products)

    def to_json(self) -> dict:
        return {f"{u}*{v}": s.render() for (u, v), s in self.products.items()}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2)


def star_table(t_order: int = 2) -> StarTable:
    f = f_matrix(t_order)
    finv = f.inverse()
    tt = _coordinate_square()
    products = {}
    conj = []
    for n in range(t_order + 1):
        acc = [[Poly.zero(ORDINARY) for _ in range(4)] for _ in range(4)]
        for p in range(n + 1):
            left, right = finv.orders[p], f.orders[n - p]
            for r in range(4):
                for c in range(4):
                    total = acc[r][c]
                    for r2 in range(4):
                        if not left[r][r2]:
                            continue
                        for c2 in range(4):
                            if right[c2][c]:
                                total = total + tt[r2][c2] * (left[r][r2] * right[c2][c])
                    acc[r][c] = total
        conj.append(acc)
    for u, v in itertools.product(COORDS, repeat=2):
        i, j = _NAME_INDEX[u]
        k, l = _NAME_INDEX[v]
        r, c = 2 * i + k, 2 * j + l
        products[(u, v)] = TSeries([conj[n][r][c] for n in range(t_order + 1)], chart=ORDINARY)
    return StarTable(t_order, products)


# ---------------------------------------------------------------------------
# Cochains
# ---------------------------------------------------------------------------


def _unit(k: int) -> tuple[int, ...]:
    return tuple(int(i == k) for i in range(4))


class TableCochain:
    """A cochain known on coordinate pairs, extended bilinearly to affine-linear
    functions (constants are killed, as for any cochain of positive order)."""

    def __init__(self, values: Mapping[tuple[str, str], Poly], chart: Chart = ORDINARY):
        self.values = dict(values)
        self.chart = chart

    def apply(self, f: Poly, g: Poly) -> Poly:
        for h in (f, g):
            if h.total_degree > 1:
                raise ValueError("table cochains accept affine-linear arguments only")
        f, g = f.lift(ORDINARY), g.lift(ORDINARY)
        total = Poly.zero(self.chart)
        for k, u in enumerate(COORDS):
            cu = f.coeff(_unit(k))
            if not cu:
                continue
            for l, v in enumerate(COORDS):
                cv = g.coeff(_unit(l))
                if cv:
                    total = total + self.values[(u, v)] * (cu * cv)
        return total

    __call__ = apply


@dataclass(frozen=True)
class CochainSet:
    chart: Chart
    c1: Mapping[tuple[str, str], Poly]
    c2: Mapping[tuple[str, str], Poly]
    ct: Mapping[tuple[str, str], Poly]
    trusted_degree: float

    def c1_cochain(self) -> TableCochain:
        return TableCochain(self.c1, self.chart)

    def ct_cochain(self) -> TableCochain:
        return TableCochain(self.ct, self.chart)

    def to_json(self) -> dict:
        return {
            "chart": self.chart.name,
            "trusted_degree": "exact" if self.trusted_degree == float("inf") else self.trusted_degree,
            "C1": {f"{u},{v}": render_poly(p) for (u, v), p in self.c1.items()},
            "C_T": {f"{u},{v}": render_poly(p) for (u, v), p in self.ct.items()},
        }


def extract_cochains(table: StarTable, chart: Chart = ORDINARY, coord_degree: int = 2) -> CochainSet:
    """C1 = t-coefficient; C_T = symmetric part of the t^2-coefficient; in either chart."""
    if table.t_order < 2:
        raise ValueError("cochain extraction needs t_order >= 2")
    c1 = {pair: s[1] for pair, s in table.products.items()}
    c2 = {pair: s[2] for pair, s in table.products.items()}
    ct = {(u, v): (c2[(u, v)] + c2[(v, u)]) / 2 for (u, v) in c2}
    if chart == ORDINARY:
        return CochainSet(ORDINARY, c1, c2, ct, float("inf"))
    if chart == EXPONENTIAL:
        functions = exp_chart_functions(coord_degree + 1)

        def move(p: Poly) -> Poly:
            return series_substitute(p, functions).truncate(coord_degree)[0]

        return CochainSet(
            EXPONENTIAL,
            {k: move(p) for k, p in c1.items()},
            {k: move(p) for k, p in c2.items()},
            {k: move(p) for k, p in ct.items()},
            coord_degree,
        )
    raise ValueError(f"unknown chart {chart.name!r}")


# ---------------------------------------------------------------------------
# Axioms
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AxiomFailure:
    axiom: str
    subject: str
    order: int
    detail: str


@dataclass
class AxiomReport:
    t_order: int
    checks: list[dict] = field(default_factory=list)
    failures: list[AxiomFailure] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    def add(self, name: str, failures: list[AxiomFailure], detail: str) -> None:
        self.failures.extend(failures)
        status = "pass" if not failures else "fail"
        if failures:
            detail = "; ".join(f"{f.subject} at t^{f.order}: {f.detail}" for f in failures[:5])
        self.checks.append({"name": name, "status": status, "detail": detail})


def _series_diff(x: TSeries, y: TSeries, subject: str, axiom: str) -> list[AxiomFailure]:
    out = []
    for n in range(min(x.t_order, y.t_order) + 1):
        if x[n] != y[n]:
            out.append(AxiomFailure(axiom, subject, n, f"{render_poly(x[n])} != {render_poly(y[n])}"))
    return out


def _counit(table: StarTable) -> list[AxiomFailure]:
    at_identity = {"a": 1, "b": 0, "c": 0, "d": 1}
    out = []
    for (u, v), s in table.products.items():
        for n in range(table.t_order + 1):
            got = s[n].evaluate(at_identity)
            want = at_identity[u] * at_identity[v] if n == 0 else 0
            if got != want:
                out.append(AxiomFailure("counit", f"{u}*{v}", n, f"value {got} at the identity, expected {want}"))
    return out


def _bracket(table: StarTable) -> list[AxiomFailure]:
    lam = ordinary_tensor()
    out = []
    for u, v in itertools.product(COORDS, repeat=2):
        commutator = table[(u, v)][1] - table[(v, u)][1]
        want = lam.entry(u, v)
        if commutator != want:
            out.append(AxiomFailure("bracket", f"({u},{v})", 1, f"{render_poly(commutator)} != {render_poly(want)}"))
        if table[(u, v)][0] != Poly.var(ORDINARY, u) * Poly.var(ORDINARY, v):
            out.append(AxiomFailure("bracket", f"({u},{v})", 0, "order-0 part is not the pointwise product"))
    return out


class _WordAlgebra:
    """Free algebra on a, b, c, d modulo the rewriting rules x_j x_i -> (normal words)
    for j > i, read off the table; coefficients are t-series truncated at t_order."""

    def __init__(self, table: StarTable):
        self.n = table.t_order
        self.normal = [(k, l) for k in range(4) for l in range(k, 4)]
        self.rules = self._rules(table)

    def _mono_vector(self, s: TSeries) -> list[list[Fraction]]:
        # per t-order, coefficients on the commutative monomials x_k x_l (k <= l)
        out = []
        for n in range(self.n + 1):
            row = []
            for k, l in self.normal:
                exps = [0] * 4
                exps[k] += 1
                exps[l] += 1
                row.append(s[n].coeff(exps))
            out.append(row)
        return out

    def _rules(self, table: StarTable) -> dict:
        size = len(self.normal)
        # A[n][w][m]: coefficient of monomial m in the product word w at order n
        a = [[[Fraction(0)] * size for _ in range(size)] for _ in range(self.n + 1)]
        for w, (k, l) in enumerate(self.normal):
            vec = self._mono_vector(table[(COORDS[k], COORDS[l])])
            for n in range(self.n + 1):
                a[n][w] = vec[n]
        # monomials in terms of words: B = A^-1 as a t-series of matrices (A_0 = I)
        ident = [[Fraction(int(i == j)) for j in range(size)] for i in range(size)]
        if a[0] != ident:
            raise ValueError("order-0 products are not the commutative monomials")
        b = [ident]
        for n in range(1, self.n + 1):
            acc = [[Fraction(0)] * size for _ in range(size)]
            for k in range(1, n + 1):
                for i in range(size):
                    for j in range(size):
                        acc[i][j] -= sum(b[n - k][i][r] * a[k][r][j] for r in range(size))
            b.append(acc)
        # word w = sum_m A[w][m] m, hence m = sum_w B[m][w] w; substitute into x_j * x_i
        rules = {}
        for j, i in itertools.product(range(4), repeat=2):
            if j <= i:
                continue
            vec = self._mono_vector(table[(COORDS[j], COORDS[i])])
            out = {}
            for w in range(size):
                coeffs = []
                for n in range(self.n + 1):
                    total = Fraction(0)
                    for p in range(n + 1):
                        total += sum(vec[p][m] * b[n - p][m][w] for m in range(size))
                    coeffs.append(total)
                if any(coeffs):
                    out[self.normal[w]] = coeffs
            rules[(j, i)] = out
        return rules

    def _mul(self, x: list[Fraction], y: list[Fraction]) -> list[Fraction]:
        return [sum(x[p] * y[n - p] for p in range(n + 1)) for n in range(self.n + 1)]

    def rewrite_at(self, element: dict, pos: int) -> dict:
        out: dict = {}
        for word, coeffs in element.items():
            pair = word[pos : pos + 2]
            if len(pair) == 2 and pair[0] > pair[1]:
                for repl, rc in self.rules[pair].items():
                    new = word[:pos] + repl + word[pos + 2 :]
                    self._acc(out, new, self._mul(coeffs, rc))
            else:
                self._acc(out, word, coeffs)
        return out

    def _acc(self, out, word, coeffs):
        cur = out.get(word, [Fraction(0)] * (self.n + 1))
        out[word] = [x + y for x, y in zip(cur, coeffs)]
        if not any(out[word]):
            del out[word]

    def normal_form(self, element: dict) -> dict:
        while True:
            pending = None
            for word in sorted(element):
                for pos in range(len(word) - 1):
                    if word[pos] > word[pos + 1]:
                        pending = pos
                        break
                if pending is not None:
                    break
            if pending is None:
                return element
            element = self.rewrite_at(element, pending)


def _associativity(table: StarTable) -> list[AxiomFailure]:
    algebra = _WordAlgebra(table)
    one = [Fraction(1)] + [Fraction(0)] * table.t_order
    out = []
    for triple in itertools.product(range(4), repeat=3):
        word = {tuple(triple): one}
        left = algebra.normal_form(algebra.rewrite_at(word, 0))
        right = algebra.normal_form(algebra.rewrite_at(word, 1))
        if left != right:
            zero = [0] * (table.t_order + 1)
            orders = sorted(
                n
                for w in set(left) | set(right)
                for n in range(table.t_order + 1)
                if left.get(w, zero)[n] != right.get(w, zero)[n]
            )
            name = "".join(COORDS[k] for k in triple)
            out.append(AxiomFailure("associativity", name, orders[0], "the two bracketings reduce differently"))
    return out


def _delta_images() -> dict[str, Poly]:
    images = {}
    for (i, j), name in _MAT_INDEX.items():
        total = Poly.zero(PRODUCT_CHART)
        for k in range(2):
            total = total + Poly.var(PRODUCT_CHART, f"{_MAT_INDEX[(i, k)]}1") * Poly.var(
                PRODUCT_CHART, f"{_MAT_INDEX[(k, j)]}2"
            )
        images[name] = total
    return images


def _copy(series: TSeries, suffix: str) -> TSeries:
    images = {v: Poly.var(PRODUCT_CHART, f"{v}{suffix}") for v in COORDS}
    return TSeries(
        [series_substitute(c, images)[0] if c else Poly.zero(PRODUCT_CHART) for c in series.coeffs],
        chart=PRODUCT_CHART,
    )


def delta_compatibility(table: StarTable, u: str, v: str) -> tuple[TSeries, TSeries]:
    """(Delta(u*v), Delta u * Delta v) on G x G, both as t-series in eight variables."""
    images = _delta_images()
    lhs = TSeries(
        [series_substitute(c, images)[0] if c else Poly.zero(PRODUCT_CHART) for c in table[(u, v)].coeffs],
        chart=PRODUCT_CHART,
    )
    i, j = _NAME_INDEX[u]
    k, l = _NAME_INDEX[v]
    rhs = TSeries.const(0, table.t_order, PRODUCT_CHART)
    for r, s in itertools.product(range(2), repeat=2):
        first = _copy(table[(_MAT_INDEX[(i, r)], _MAT_INDEX[(k, s)])], "1")
        second = _copy(table[(_MAT_INDEX[(r, j)], _MAT_INDEX[(s, l)])], "2")
        rhs = rhs + first * second
    return lhs, rhs


def _delta(table: StarTable) -> list[AxiomFailure]:
    out = []
    for u, v in itertools.product(COORDS, repeat=2):
        lhs, rhs = delta_compatibility(table, u, v)
        out.extend(_series_diff(lhs, rhs, f"({u},{v})", "delta"))
    return out


def check_axioms(table: StarTable) -> AxiomReport:
    """Unit, counit, bracket, associativity (by confluence of the word
    reductions) and coproduct compatibility, all through the table's t_order."""
    if table.t_order < 2:
        raise ValueError("axiom checks need t_order >= 2")
    report = AxiomReport(table.t_order)
    # the unit is adjoined as the empty word, so 1*u = u*1 = u holds by construction
    report.add("unit", [], "1 acts as the empty word on all coordinates")
    report.add("counit", _counit(table), "products evaluate to e(u)e(v) at the identity at every order")
    report.add("bracket", _bracket(table), "(u*v - v*u)/t -> {u,v} on all 16 pairs")
    report.add("associativity", _associativity(table), "all 64 coordinate triples reduce confluently")
    report.add("delta", _delta(table), "Delta(u*v) = Delta u * Delta v on all 16 pairs")
    return report
