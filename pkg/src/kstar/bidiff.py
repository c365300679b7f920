"""Differential and bidifferential operators with polynomial coefficients.

Operators are stored expanded: a map from derivative multi-indices to
coefficient polynomials, with the trusted coordinate degree of those
coefficients. Unknown weights are carried as labelled combinations: a dict
from a monomial label in the unknowns ("1", "K1", "K1^2", ...) to an
operator or polynomial.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Protocol, Sequence, Union

from .exactmath import EXACT, Chart, ChartMismatchError, Poly, TSeries, render_poly
from .graphs import KGraph, Schema, schema_from_graph
from .poisson import PoissonTensor


class MultiIndex(tuple):
    """Per-variable derivative counts."""

    def __new__(cls, counts: Iterable[int]):
        counts = tuple(int(c) for c in counts)
        if any(c < 0 for c in counts):
            raise ValueError("derivative counts must be non-negative")
        return super().__new__(cls, counts)

    @classmethod
    def zero(cls, dim: int) -> "MultiIndex":
        return cls((0,) * dim)

    @classmethod
    def from_indices(cls, dim: int, indices: Iterable[int]) -> "MultiIndex":
        counts = [0] * dim
        for i in indices:
            counts[i] += 1
        return cls(counts)

    @property
    def order(self) -> int:
        return sum(self)

    def __add__(self, other) -> "MultiIndex":
        return MultiIndex(x + y for x, y in zip(self, other))

    def __sub__(self, other) -> "MultiIndex":
        return MultiIndex(x - y for x, y in zip(self, other))

    def factorial(self) -> int:
        return math.prod(math.factorial(c) for c in self)

    def sub_indices(self):
        """All beta <= self."""
        for beta in itertools.product(*[range(c + 1) for c in self]):
            yield MultiIndex(beta)

    def binomial(self, beta: "MultiIndex") -> int:
        return math.prod(math.comb(c, b) for c, b in zip(self, beta))

    def render(self, chart: Chart) -> str:
        parts = [v if c == 1 else f"{v}^{c}" for v, c in zip(chart.variables, self) if c]
        return "d(" + "*".join(parts) + ")" if parts else "1"


def _ts(p: Poly, trusted, t_order: int = 0) -> TSeries:
    return TSeries.from_poly(p, t_order, trusted)


def _as_series(f: Poly | TSeries) -> TSeries:
    return f if isinstance(f, TSeries) else TSeries.from_poly(f)


def _derivative(f: TSeries, mi: MultiIndex) -> TSeries:
    return f.diff_multi(mi) if mi.order else f


def _split3(alpha: MultiIndex):
    """All (beta, gamma, delta) with beta + gamma + delta = alpha and the multinomial weight."""
    per_var = []
    for c in alpha:
        opts = []
        for b in range(c + 1):
            for g in range(c - b + 1):
                d = c - b - g
                opts.append((b, g, d, math.factorial(c) // (math.factorial(b) * math.factorial(g) * math.factorial(d))))
        per_var.append(opts)
    for combo in itertools.product(*per_var):
        yield (
            MultiIndex(x[0] for x in combo),
            MultiIndex(x[1] for x in combo),
            MultiIndex(x[2] for x in combo),
            math.prod(x[3] for x in combo),
        )


class _OpBase:
    chart: Chart
    terms: dict
    trusted_degree: float

    def _check_chart(self, other):
        if other.chart != self.chart:
            raise ChartMismatchError(self.chart, other.chart)

    def is_zero(self) -> bool:
        return not self.terms

    def max_coeff_degree(self) -> float:
        return max((c.total_degree for c in self.terms.values()), default=-math.inf)


class UnaryDiffOp(_OpBase):
    """sum_alpha c_alpha d^alpha, alpha = 0 being the identity-type term."""

    def __init__(self, chart: Chart, terms: Mapping[MultiIndex, Poly] | None = None, trusted_degree=EXACT):
        self.chart = chart
        self.trusted_degree = trusted_degree
        self.terms = {}
        for mi, c in (terms or {}).items():
            if len(mi) != chart.dim:
                raise ValueError("multi-index does not fit the chart")
            c = c.lift(chart).truncate(trusted_degree)
            if c:
                self.terms[MultiIndex(mi)] = c

    @classmethod
    def identity(cls, chart: Chart) -> "UnaryDiffOp":
        return cls(chart, {MultiIndex.zero(chart.dim): Poly.const(1, chart)})

    @classmethod
    def zero(cls, chart: Chart) -> "UnaryDiffOp":
        return cls(chart)

    def has_identity_term(self) -> bool:
        return self.terms.get(MultiIndex.zero(self.chart.dim)) == Poly.const(1, self.chart)

    def vanishes_on_constants(self) -> bool:
        return MultiIndex.zero(self.chart.dim) not in self.terms

    def __add__(self, other: "UnaryDiffOp") -> "UnaryDiffOp":
        self._check_chart(other)
        terms = dict(self.terms)
        for mi, c in other.terms.items():
            terms[mi] = terms.get(mi, Poly.zero(self.chart)) + c
        return UnaryDiffOp(self.chart, terms, min(self.trusted_degree, other.trusted_degree))

    def scale(self, k) -> "UnaryDiffOp":
        return UnaryDiffOp(self.chart, {mi: c * k for mi, c in self.terms.items()}, self.trusted_degree)

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def __eq__(self, other):
        return isinstance(other, UnaryDiffOp) and self.chart == other.chart and self.terms == other.terms

    __hash__ = None

    def apply(self, f: Poly | TSeries) -> Poly | TSeries:
        fs = _as_series(f)
        total = TSeries([Poly.zero(self.chart)] * (fs.t_order + 1), self.trusted_degree, self.chart)
        for mi, c in self.terms.items():
            total = total + _ts(c, self.trusted_degree, fs.t_order) * _derivative(fs, mi)
        if isinstance(f, Poly) and total.trusted_degree == EXACT:
            return total[0]
        return total

    __call__ = apply

    def compose(self, other: "UnaryDiffOp") -> "UnaryDiffOp":
        """self o other."""
        self._check_chart(other)
        out: dict = {}
        trusted = EXACT
        for alpha, u in self.terms.items():
            for beta, v in other.terms.items():
                for gamma in alpha.sub_indices():
                    coeff = _ts(u, self.trusted_degree) * _derivative(_ts(v, other.trusted_degree), gamma)
                    coeff = coeff * alpha.binomial(gamma)
                    trusted = min(trusted, coeff.trusted_degree)
                    key = beta + (alpha - gamma)
                    out[key] = out.get(key, Poly.zero(self.chart)) + coeff[0]
        return UnaryDiffOp(self.chart, out, trusted)

    def to_json(self) -> list[dict]:
        return [
            {"coeff": render_poly(c), "multiindex": list(mi)}
            for mi, c in sorted(self.terms.items())
        ]

    def __repr__(self):
        return "UnaryDiffOp(" + " + ".join(f"({c}){mi.render(self.chart)}" for mi, c in sorted(self.terms.items())) + ")"


class BiDiffOp(_OpBase):
    """sum c_{L,R} d^L (x) d^R acting on ordered pairs of functions."""

    def __init__(
        self,
        chart: Chart,
        terms: Mapping[tuple[MultiIndex, MultiIndex], Poly] | None = None,
        trusted_degree=EXACT,
    ):
        self.chart = chart
        self.trusted_degree = trusted_degree
        self.terms = {}
        for (left, right), c in (terms or {}).items():
            if len(left) != chart.dim or len(right) != chart.dim:
                raise ValueError("multi-index does not fit the chart")
            c = c.lift(chart).truncate(trusted_degree)
            if c:
                self.terms[(MultiIndex(left), MultiIndex(right))] = c

    @classmethod
    def product(cls, chart: Chart) -> "BiDiffOp":
        z = MultiIndex.zero(chart.dim)
        return cls(chart, {(z, z): Poly.const(1, chart)})

    @classmethod
    def zero(cls, chart: Chart) -> "BiDiffOp":
        return cls(chart)

    def __add__(self, other: "BiDiffOp") -> "BiDiffOp":
        self._check_chart(other)
        terms = dict(self.terms)
        for key, c in other.terms.items():
            terms[key] = terms.get(key, Poly.zero(self.chart)) + c
        return BiDiffOp(self.chart, terms, min(self.trusted_degree, other.trusted_degree))

    def scale(self, k) -> "BiDiffOp":
        return BiDiffOp(self.chart, {key: c * k for key, c in self.terms.items()}, self.trusted_degree)

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def __eq__(self, other):
        return isinstance(other, BiDiffOp) and self.chart == other.chart and self.terms == other.terms

    __hash__ = None

    def truncate(self, degree) -> "BiDiffOp":
        return BiDiffOp(self.chart, self.terms, min(self.trusted_degree, degree))

    def swap(self) -> "BiDiffOp":
        return BiDiffOp(self.chart, {(r, l): c for (l, r), c in self.terms.items()}, self.trusted_degree)

    def symmetric_part(self) -> "BiDiffOp":
        return (self + self.swap()).scale(Fraction(1, 2))

    def antisymmetric_part(self) -> "BiDiffOp":
        return (self - self.swap()).scale(Fraction(1, 2))

    def is_symmetric(self) -> bool:
        return self == self.swap()

    def differentiates_both(self) -> bool:
        """Every term differentiates each argument at least once, so B(1, .) = B(., 1) = 0."""
        return all(l.order >= 1 and r.order >= 1 for l, r in self.terms)

    def apply(self, f: Poly | TSeries, g: Poly | TSeries) -> Poly | TSeries:
        return apply_bi(self, f, g)

    __call__ = apply

    def to_json(self) -> list[dict]:
        return [
            {"coeff": render_poly(c), "left_multiindex": list(l), "right_multiindex": list(r)}
            for (l, r), c in sorted(self.terms.items())
        ]

    def __repr__(self):
        body = " + ".join(
            f"({c}){l.render(self.chart)}(x){r.render(self.chart)}" for (l, r), c in sorted(self.terms.items())
        )
        return f"BiDiffOp({body or '0'})"


def apply_bi(op: BiDiffOp, f: Poly | TSeries, g: Poly | TSeries) -> Poly | TSeries:
    """sum c * d^L f * d^R g with trusted-degree propagation."""
    for h in (f, g):
        if h.chart != op.chart and not (isinstance(h, Poly) and h.is_constant()):
            raise ChartMismatchError(op.chart, h.chart)
    fs, gs = _as_series(f), _as_series(g)
    t_order = min(fs.t_order, gs.t_order)
    cache_f: dict = {}
    cache_g: dict = {}
    # coefficient errors sit above the operator's trusted degree whatever the arguments
    total = TSeries([Poly.zero(op.chart)] * (t_order + 1), op.trusted_degree, op.chart)
    for (left, right), c in op.terms.items():
        if left not in cache_f:
            cache_f[left] = _derivative(fs, left)
        if right not in cache_g:
            cache_g[right] = _derivative(gs, right)
        df, dg = cache_f[left], cache_g[right]
        if not any(df.coeffs) and df.trusted_degree == EXACT:
            continue
        if not any(dg.coeffs) and dg.trusted_degree == EXACT:
            continue
        total = total + _ts(c, op.trusted_degree, t_order) * df * dg
    if isinstance(f, Poly) and isinstance(g, Poly) and total.trusted_degree == EXACT:
        return total[0]
    return total


# ---------------------------------------------------------------------------
# Compilation
# ---------------------------------------------------------------------------


class _TensorDerivatives:
    def __init__(self, tensor: PoissonTensor):
        self.tensor = tensor
        self.cache: dict = {}

    def get(self, i: int, j: int, derivs: tuple[int, ...]) -> TSeries:
        key = (i, j, tuple(sorted(derivs)))
        if key not in self.cache:
            s = self.tensor.series(i, j)
            for k in key[2]:
                s = s.diff(k)
            self.cache[key] = s
        return self.cache[key]


def operator_from_schema(schema: Schema, tensor: PoissonTensor) -> BiDiffOp | UnaryDiffOp:
    """Sum the schema's contraction over every assignment of indices to chart variables."""
    chart = tensor.chart
    n = chart.dim
    derivs = _TensorDerivatives(tensor)
    acc: dict = {}
    trusted = EXACT
    for term in schema.terms:
        names = term.indices()
        for values in itertools.product(range(n), repeat=len(names)):
            idx = dict(zip(names, values))
            coeff = TSeries([Poly.const(term.coeff, chart)], EXACT, chart)
            for factor in term.factors:
                coeff = coeff * derivs.get(idx[factor.upper[0]], idx[factor.upper[1]], tuple(idx[s] for s in factor.derivs))
            trusted = min(trusted, coeff.trusted_degree)
            if not coeff[0]:
                continue
            key = tuple(MultiIndex.from_indices(n, (idx[s] for s in slot)) for slot in term.slots)
            acc[key] = acc.get(key, Poly.zero(chart)) + coeff[0]
    if schema.arity == 1:
        return UnaryDiffOp(chart, {k[0]: c for k, c in acc.items()}, trusted)
    if schema.arity == 2:
        return BiDiffOp(chart, acc, trusted)
    raise ValueError("only one- and two-argument schemata are supported")


def compile_graph(graph: KGraph, tensor: PoissonTensor) -> BiDiffOp | UnaryDiffOp:
    """B_Gamma for a single graph with its own edge order."""
    return operator_from_schema(schema_from_graph(graph), tensor)


# ---------------------------------------------------------------------------
# Composition
# ---------------------------------------------------------------------------


def compose_unary_bi(u: UnaryDiffOp, b: BiDiffOp) -> BiDiffOp:
    """(f, g) -> U(B(f, g)), expanded by the Leibniz rule."""
    if u.chart != b.chart:
        raise ChartMismatchError(u.chart, b.chart)
    out: dict = {}
    trusted = EXACT
    for alpha, uc in u.terms.items():
        for (left, right), bc in b.terms.items():
            for beta, gamma, delta, mult in _split3(alpha):
                coeff = _ts(uc, u.trusted_degree) * _derivative(_ts(bc, b.trusted_degree), beta) * mult
                trusted = min(trusted, coeff.trusted_degree)
                key = (left + gamma, right + delta)
                out[key] = out.get(key, Poly.zero(b.chart)) + coeff[0]
    return BiDiffOp(b.chart, out, trusted)


def compose_bi_unary(b: BiDiffOp, u: UnaryDiffOp, v: UnaryDiffOp) -> BiDiffOp:
    """(f, g) -> B(U f, V g)."""
    for op in (u, v):
        if op.chart != b.chart:
            raise ChartMismatchError(b.chart, op.chart)
    out: dict = {}
    trusted = EXACT
    for (left, right), bc in b.terms.items():
        for alpha, uc in u.terms.items():
            for lam in left.sub_indices():
                du = _derivative(_ts(uc, u.trusted_degree), lam) * left.binomial(lam)
                for beta, vc in v.terms.items():
                    for mu in right.sub_indices():
                        dv = _derivative(_ts(vc, v.trusted_degree), mu) * right.binomial(mu)
                        coeff = _ts(bc, b.trusted_degree) * du * dv
                        trusted = min(trusted, coeff.trusted_degree)
                        key = (alpha + (left - lam), beta + (right - mu))
                        out[key] = out.get(key, Poly.zero(b.chart)) + coeff[0]
    return BiDiffOp(b.chart, out, trusted)


# ---------------------------------------------------------------------------
# Labelled combinations and the equivalence defect
# ---------------------------------------------------------------------------

ONE = "1"


def _label_factors(label: str) -> Counter:
    if label == ONE:
        return Counter()
    out: Counter = Counter()
    for part in label.split("*"):
        name, _, power = part.partition("^")
        out[name] += int(power) if power else 1
    return out


def _label_render(factors: Counter) -> str:
    if not factors:
        return ONE
    return "*".join(n if k == 1 else f"{n}^{k}" for n, k in sorted(factors.items()) if k)


def label_product(x: str, y: str) -> str:
    """Product of two unknown monomials, e.g. K1 * K1 -> 'K1^2'."""
    return _label_render(_label_factors(x) + _label_factors(y))


def _lc_add(acc: dict, label: str, value, zero):
    acc[label] = acc.get(label, zero) + value


class Cochain(Protocol):
    def apply(self, f: Poly, g: Poly) -> Poly: ...


Labelled = Mapping[str, object]


def _labelled(x) -> dict:
    if x is None:
        return {}
    if isinstance(x, Mapping):
        return dict(x)
    return {ONE: x}


def _check_T(T: Sequence) -> None:
    if not T:
        raise ValueError("equivalence operator is empty")
    t0 = _labelled(T[0])
    if set(t0) != {ONE} or not isinstance(t0[ONE], UnaryDiffOp) or not (
        t0[ONE] == UnaryDiffOp.identity(t0[ONE].chart)
    ):
        raise ValueError("equivalence operator must start with the identity term")
    for k, part in enumerate(T[1:], start=1):
        for label, op in _labelled(part).items():
            if not op.vanishes_on_constants():
                raise ValueError(f"order-{k} part {label!r} does not vanish on constants")


def equivalence_defect(T: Sequence, star_a: Sequence, star_b: Sequence, max_order: int = 2) -> list[dict[str, BiDiffOp]]:
    """Operator-level defects D_k = sum_{p+q=k} T_p C^A_q - sum_{p+q+r=k} C^B_p (T_q x T_r).

    ``T``, ``star_a``, ``star_b`` are indexed by t-order; each entry is an
    operator or a {label: operator} map. ``star_x[0]`` may be None for the
    pointwise product.
    """
    _check_T(T)
    chart = _labelled(T[0])[ONE].chart
    prod = BiDiffOp.product(chart)

    def part(seq, k, default=None):
        if k < len(seq) and seq[k] is not None:
            return _labelled(seq[k])
        return {ONE: default} if default is not None else {}

    out = []
    for k in range(max_order + 1):
        acc: dict = {}
        zero = BiDiffOp.zero(chart)
        for p in range(k + 1):
            for lt, top in part(T, p).items():
                for lc, c in part(star_a, k - p, prod if k - p == 0 else None).items():
                    _lc_add(acc, label_product(lt, lc), compose_unary_bi(top, c), zero)
        for p in range(k + 1):
            for q in range(k - p + 1):
                r = k - p - q
                for lc, c in part(star_b, p, prod if p == 0 else None).items():
                    for lq, tq in part(T, q).items():
                        for lr, tr in part(T, r).items():
                            label = label_product(lc, label_product(lq, lr))
                            _lc_add(acc, label, -compose_bi_unary(c, tq, tr), zero)
        out.append({lab: op for lab, op in sorted(acc.items()) if not op.is_zero()})
    return out


def _apply_cochain(c, f: Poly, g: Poly) -> Poly:
    value = c.apply(f, g)
    return value[0] if isinstance(value, TSeries) else value


def equivalence_defect_on_pairs(
    T: Sequence,
    star_a: Sequence,
    star_b: Sequence,
    pairs: Iterable[tuple[Poly, Poly]],
    order: int = 2,
) -> list[dict[str, Poly]]:
    """The order-``order`` defect evaluated on each pair (f, g).

    Only needs ``apply`` on the cochains, so cochains known solely on
    coordinate functions (extended bilinearly) can take part.
    """
    _check_T(T)

    def part(seq, k):
        if k < len(seq) and seq[k] is not None:
            return _labelled(seq[k])
        return {}

    results = []
    for f, g in pairs:
        chart = f.chart
        zero = Poly.zero(chart)
        acc: dict = {}

        def cochain(seq, k, x, y):
            if k == 0:
                return {ONE: x * y}
            return {lab: _apply_cochain(c, x, y) for lab, c in part(seq, k).items()}

        def t_apply(k, x):
            if k == 0:
                return {ONE: x}
            return {lab: op.apply(x) for lab, op in part(T, k).items()}

        for p in range(order + 1):
            for lc, val in cochain(star_a, order - p, f, g).items():
                for lt, top in ({ONE: None} if p == 0 else part(T, p)).items():
                    image = val if p == 0 else top.apply(val)
                    _lc_add(acc, label_product(lt, lc), image, zero)
        for p in range(order + 1):
            for q in range(order - p + 1):
                r = order - p - q
                for lq, tf in t_apply(q, f).items():
                    for lr, tg in t_apply(r, g).items():
                        for lc, val in cochain(star_b, p, tf, tg).items():
                            label = label_product(lc, label_product(lq, lr))
                            _lc_add(acc, label, -val, zero)
        results.append({lab: v for lab, v in sorted(acc.items()) if v})
    return results
