"""Exact rational arithmetic: sparse multivariate polynomials and doubly
truncated series (powers of the deformation parameter ``t`` times
polynomial coefficients that are trusted only up to a coordinate degree).

Rationals are :class:`fractions.Fraction` throughout; there is no floating
point anywhere in this module.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence, Union

Rational = Fraction
Number = Union[int, Fraction]

#: Sentinel trusted degree for series whose coefficients are exact in every degree.
EXACT = math.inf


class ChartMismatchError(ValueError):
    def __init__(self, first: "Chart", second: "Chart"):
        super().__init__(f"chart mismatch: {first.name!r} vs {second.name!r}")
        self.first = first
        self.second = second


@dataclass(frozen=True)
class Chart:
    """A named coordinate system; variable order is the tie-break order everywhere."""

    name: str
    variables: tuple[str, ...]

    def __post_init__(self):
        if len(set(self.variables)) != len(self.variables):
            raise ValueError(f"duplicate variable names in chart {self.name!r}")

    @property
    def dim(self) -> int:
        return len(self.variables)

    def index(self, var: str) -> int:
        try:
            return self.variables.index(var)
        except ValueError:
            raise KeyError(f"{var!r} is not a variable of chart {self.name!r}") from None

    def __repr__(self):
        return f"Chart({self.name!r})"


SCALAR = Chart("scalar", ())
ORDINARY = Chart("ordinary", ("a", "b", "c", "d"))
EXPONENTIAL = Chart("exponential", ("alpha", "beta", "gamma", "delta"))
#: Coordinates centred at the identity matrix: u11 = a - 1, u12 = b, u21 = c, u22 = d - 1.
CENTRED = Chart("centred", ("u11", "u12", "u21", "u22"))


def _join_charts(p: Chart, q: Chart) -> Chart:
    if p == q:
        return p
    # constants carry the variable-free chart and combine with anything
    if p == SCALAR:
        return q
    if q == SCALAR:
        return p
    raise ChartMismatchError(p, q)


def _grlex_key(exps: tuple[int, ...]):
    return (sum(exps), exps)


class Poly:
    """Sparse polynomial with Fraction coefficients over a :class:`Chart`.

    Immutable: every operation returns a new Poly. Zero coefficients are never
    stored, so equality is equality of the term maps.
    """

    __slots__ = ("chart", "_terms", "_hash")

    def __init__(self, chart: Chart, terms: Mapping[tuple[int, ...], Number] | None = None):
        self.chart = chart
        clean = {}
        for exps, coeff in (terms or {}).items():
            if len(exps) != chart.dim:
                raise ValueError(f"exponent vector {exps} does not fit chart {chart.name!r}")
            if any(e < 0 for e in exps):
                raise ValueError(f"negative exponent in {exps}")
            coeff = Fraction(coeff)
            if coeff:
                clean[tuple(exps)] = coeff
        self._terms = clean
        self._hash = None

    @classmethod
    def _raw(cls, chart: Chart, terms: dict) -> "Poly":
        p = object.__new__(cls)
        p.chart = chart
        p._terms = terms
        p._hash = None
        return p

    # -- constructors -----------------------------------------------------
    @classmethod
    def zero(cls, chart: Chart = SCALAR) -> "Poly":
        return cls._raw(chart, {})

    @classmethod
    def const(cls, value: Number, chart: Chart = SCALAR) -> "Poly":
        value = Fraction(value)
        return cls._raw(chart, {(0,) * chart.dim: value} if value else {})

    @classmethod
    def var(cls, chart: Chart, name: str) -> "Poly":
        exps = [0] * chart.dim
        exps[chart.index(name)] = 1
        return cls._raw(chart, {tuple(exps): Fraction(1)})

    @classmethod
    def monomial(cls, chart: Chart, exps: Sequence[int], coeff: Number = 1) -> "Poly":
        return cls(chart, {tuple(exps): coeff})

    # -- inspection --------------------------------------------------------
    @property
    def terms(self) -> dict[tuple[int, ...], Fraction]:
        return dict(self._terms)

    def items(self):
        """Terms in graded-lex order (highest degree first)."""
        return sorted(self._terms.items(), key=lambda kv: _grlex_key(kv[0]), reverse=True)

    def coeff(self, exps: Sequence[int]) -> Fraction:
        return self._terms.get(tuple(exps), Fraction(0))

    def is_zero(self) -> bool:
        return not self._terms

    def is_constant(self) -> bool:
        return all(sum(e) == 0 for e in self._terms)

    def constant_term(self) -> Fraction:
        return self._terms.get((0,) * self.chart.dim, Fraction(0))

    @property
    def total_degree(self) -> float:
        """Largest exponent sum; ``-inf`` for the zero polynomial."""
        return max((sum(e) for e in self._terms), default=-math.inf)

    @property
    def min_degree(self) -> float:
        """Smallest exponent sum; ``+inf`` for the zero polynomial."""
        return min((sum(e) for e in self._terms), default=math.inf)

    def homogeneous(self, degree: int) -> "Poly":
        return Poly._raw(self.chart, {e: c for e, c in self._terms.items() if sum(e) == degree})

    def truncate(self, degree: float) -> "Poly":
        """Drop every term of total degree above ``degree``."""
        if degree == EXACT:
            return self
        return Poly._raw(self.chart, {e: c for e, c in self._terms.items() if sum(e) <= degree})

    def lift(self, chart: Chart) -> "Poly":
        if chart == self.chart:
            return self
        if self.chart != SCALAR:
            raise ChartMismatchError(self.chart, chart)
        return Poly.const(self.constant_term(), chart)

    # -- arithmetic ----------------------------------------------------------
    def _coerce(self, other) -> "Poly":
        if isinstance(other, Poly):
            return other
        if isinstance(other, (int, Fraction)):
            return Poly.const(other, self.chart)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        chart = _join_charts(self.chart, other.chart)
        a, b = self.lift(chart), other.lift(chart)
        out = dict(a._terms)
        for e, c in b._terms.items():
            s = out.get(e, 0) + c
            if s:
                out[e] = s
            else:
                out.pop(e, None)
        return Poly._raw(chart, out)

    __radd__ = __add__

    def __neg__(self):
        return Poly._raw(self.chart, {e: -c for e, c in self._terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            if not other:
                return Poly.zero(self.chart)
            other = Fraction(other)
            return Poly._raw(self.chart, {e: c * other for e, c in self._terms.items()})
        if not isinstance(other, Poly):
            return NotImplemented
        chart = _join_charts(self.chart, other.chart)
        a, b = self.lift(chart), other.lift(chart)
        out: dict = {}
        for ea, ca in a._terms.items():
            for eb, cb in b._terms.items():
                e = tuple(x + y for x, y in zip(ea, eb))
                out[e] = out.get(e, 0) + ca * cb
        return Poly._raw(chart, {e: c for e, c in out.items() if c})

    __rmul__ = __mul__

    def __truediv__(self, other: Number):
        return self * (Fraction(1) / Fraction(other))

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative powers are not polynomials")
        result = Poly.const(1, self.chart)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def diff(self, var: str | int) -> "Poly":
        k = var if isinstance(var, int) else self.chart.index(var)
        out = {}
        for e, c in self._terms.items():
            if e[k]:
                ne = list(e)
                ne[k] -= 1
                out[tuple(ne)] = c * e[k]
        return Poly._raw(self.chart, out)

    def diff_multi(self, counts: Sequence[int]) -> "Poly":
        """Apply prod_k (d/dx_k)^counts[k]."""
        out = {}
        for e, c in self._terms.items():
            if any(x < k for x, k in zip(e, counts)):
                continue
            factor = 1
            for x, k in zip(e, counts):
                for j in range(k):
                    factor *= x - j
            out[tuple(x - k for x, k in zip(e, counts))] = c * factor
        return Poly._raw(self.chart, out)

    def evaluate(self, values: Mapping[str, Number]) -> Fraction:
        total = Fraction(0)
        xs = [Fraction(values[v]) for v in self.chart.variables] if self._terms else []
        for e, c in self._terms.items():
            term = c
            for x, k in zip(xs, e):
                if k:
                    term *= x**k
            total += term
        return total

    # -- comparison / hashing -------------------------------------------------
    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Poly.const(other, self.chart)
        if not isinstance(other, Poly):
            return NotImplemented
        if self.chart != other.chart:
            # a constant means the same thing on every chart
            both = self.is_constant() and other.is_constant()
            return both and self.constant_term() == other.constant_term()
        return self._terms == other._terms

    def __hash__(self):
        if self._hash is None:
            # constants hash alike in every chart because they compare equal across charts
            if self.is_constant():
                self._hash = hash(self.constant_term())
            else:
                self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    def __bool__(self):
        return bool(self._terms)

    def __repr__(self):
        return f"Poly({self.chart.name}: {self})"

    def __str__(self):
        return render_poly(self)


def _render_coeff(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def render_poly(p: Poly) -> str:
    """Canonical text: graded-lex order, ``p/q`` rationals, ``x^k`` powers."""
    if p.is_zero():
        return "0"
    pieces = []
    for exps, c in p.items():
        mono = "*".join(
            v if k == 1 else f"{v}^{k}" for v, k in zip(p.chart.variables, exps) if k
        )
        mag = abs(c)
        if not mono:
            body = _render_coeff(mag)
        elif mag == 1:
            body = mono
        else:
            body = f"{_render_coeff(mag)}*{mono}"
        sign = "-" if c < 0 else "+"
        if not pieces:
            pieces.append(body if sign == "+" else "-" + body)
        else:
            pieces.append(f" {sign} {body}")
    return "".join(pieces)


def monomials_upto(chart: Chart, degree: int) -> list[tuple[int, ...]]:
    """All exponent vectors of total degree <= degree, in graded-lex order (ascending)."""
    out = []

    def rec(prefix, left, slots):
        if slots == 0:
            out.append(tuple(prefix))
            return
        for k in range(left + 1):
            rec(prefix + [k], left - k, slots - 1)

    rec([], degree, chart.dim)
    return sorted(out, key=_grlex_key)


def check_chart(p: Poly, chart: Chart) -> None:
    if p.chart != chart and p.chart != SCALAR:
        raise ChartMismatchError(p.chart, chart)


# ---------------------------------------------------------------------------
# Truncated series
# ---------------------------------------------------------------------------


def _trusted_product(da, ma, db, mb):
    # errors of a sit above degree da; multiplied by b they land above da + min_deg(b),
    # and the product of the two error tails starts above da + db + 1
    bound = min(da + mb, db + ma, da + db + 1)
    return EXACT if bound == math.inf else bound


class TSeries:
    """Series sum_k t^k coeffs[k] for k <= t_order, coefficients Polys.

    ``trusted_degree`` is the coordinate degree through which every stored
    coefficient is known exactly; terms above it are never stored.
    """

    __slots__ = ("coeffs", "trusted_degree", "chart")

    def __init__(self, coeffs: Sequence[Poly], trusted_degree: float = EXACT, chart: Chart | None = None):
        if not coeffs:
            raise ValueError("a series needs at least the t^0 coefficient")
        chart = chart or SCALAR
        for c in coeffs:
            chart = _join_charts(chart, c.chart)
        if trusted_degree != EXACT:
            if trusted_degree < 0 or int(trusted_degree) != trusted_degree:
                raise ValueError(f"trusted degree must be a non-negative integer, got {trusted_degree}")
            trusted_degree = int(trusted_degree)
        self.chart = chart
        self.trusted_degree = trusted_degree
        self.coeffs = tuple(c.lift(chart).truncate(trusted_degree) for c in coeffs)

    # -- constructors -----------------------------------------------------
    @classmethod
    def from_poly(cls, p: Poly, t_order: int = 0, trusted_degree: float = EXACT) -> "TSeries":
        return cls([p] + [Poly.zero(p.chart)] * t_order, trusted_degree, p.chart)

    @classmethod
    def from_scalars(cls, values: Iterable[Number]) -> "TSeries":
        return cls([Poly.const(v) for v in values])

    @classmethod
    def const(cls, value: Number, t_order: int, chart: Chart = SCALAR) -> "TSeries":
        return cls.from_poly(Poly.const(value, chart), t_order)

    # -- inspection --------------------------------------------------------
    @property
    def t_order(self) -> int:
        return len(self.coeffs) - 1

    @property
    def min_degree(self) -> float:
        return min(c.min_degree for c in self.coeffs)

    def scalars(self) -> list[Fraction]:
        """Coefficients of a series whose coefficients are all constants."""
        if not all(c.is_constant() for c in self.coeffs):
            raise ValueError("series has non-constant coefficients")
        return [c.constant_term() for c in self.coeffs]

    def __getitem__(self, k: int) -> Poly:
        return self.coeffs[k]

    def truncate_t(self, t_order: int) -> "TSeries":
        coeffs = list(self.coeffs[: t_order + 1])
        coeffs += [Poly.zero(self.chart)] * (t_order + 1 - len(coeffs))
        return TSeries(coeffs, self.trusted_degree, self.chart)

    def truncate(self, degree: float) -> "TSeries":
        return TSeries(self.coeffs, min(self.trusted_degree, degree), self.chart)

    # -- arithmetic ----------------------------------------------------------
    def _coerce(self, other) -> "TSeries":
        if isinstance(other, TSeries):
            return other
        if isinstance(other, Poly):
            return TSeries.from_poly(other, self.t_order)
        if isinstance(other, (int, Fraction)):
            return TSeries.const(other, self.t_order, self.chart)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        n = min(self.t_order, other.t_order)
        chart = _join_charts(self.chart, other.chart)
        return TSeries(
            [self.coeffs[k] + other.coeffs[k] for k in range(n + 1)],
            min(self.trusted_degree, other.trusted_degree),
            chart,
        )

    __radd__ = __add__

    def __neg__(self):
        return TSeries([-c for c in self.coeffs], self.trusted_degree, self.chart)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return TSeries([c * other for c in self.coeffs], self.trusted_degree, self.chart)
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        n = min(self.t_order, other.t_order)
        chart = _join_charts(self.chart, other.chart)
        trusted = _trusted_product(self.trusted_degree, self.min_degree, other.trusted_degree, other.min_degree)
        a = [c.truncate(trusted) for c in self.coeffs]
        b = [c.truncate(trusted) for c in other.coeffs]
        out = []
        for k in range(n + 1):
            acc = Poly.zero(chart)
            for i in range(k + 1):
                if a[i] and b[k - i]:
                    acc = acc + (a[i] * b[k - i]).truncate(trusted)
            out.append(acc)
        return TSeries(out, trusted, chart)

    __rmul__ = __mul__

    def __truediv__(self, other: Number):
        return self * (Fraction(1) / Fraction(other))

    def __pow__(self, n: int):
        result = TSeries.const(1, self.t_order, self.chart)
        for _ in range(n):
            result = result * self
        return result

    def diff(self, var: str | int) -> "TSeries":
        if self.trusted_degree == 0:
            raise ValueError("trusted degree underflow: derivative of a series trusted only through degree 0")
        trusted = self.trusted_degree if self.trusted_degree == EXACT else self.trusted_degree - 1
        return TSeries([c.diff(var) for c in self.coeffs], trusted, self.chart)

    def diff_multi(self, counts: Sequence[int]) -> "TSeries":
        out = self
        for k, n in enumerate(counts):
            for _ in range(n):
                out = out.diff(k)
        return out

    def shift(self, power: int) -> "TSeries":
        """Multiply by t^power, keeping the same t_order."""
        zero = Poly.zero(self.chart)
        coeffs = [zero] * power + list(self.coeffs)
        return TSeries(coeffs[: self.t_order + 1], self.trusted_degree, self.chart)

    def odd_part(self) -> "TSeries":
        return TSeries(
            [c if k % 2 else Poly.zero(self.chart) for k, c in enumerate(self.coeffs)],
            self.trusted_degree,
            self.chart,
        )

    def reflect(self) -> "TSeries":
        """Series in -t."""
        return TSeries([c * (-1) ** k for k, c in enumerate(self.coeffs)], self.trusted_degree, self.chart)

    # -- comparison -------------------------------------------------------
    def __eq__(self, other):
        if not isinstance(other, TSeries):
            other = self._coerce(other)
            if other is NotImplemented:
                return NotImplemented
        n = min(self.t_order, other.t_order)
        d = min(self.trusted_degree, other.trusted_degree)
        return all(self.coeffs[k].truncate(d) == other.coeffs[k].truncate(d) for k in range(n + 1))

    __hash__ = None

    def __repr__(self):
        return f"TSeries(t_order={self.t_order}, trusted={self.trusted_degree}, {self.render()})"

    def render(self) -> list[str]:
        return [render_poly(c) for c in self.coeffs]


# ---------------------------------------------------------------------------
# Scalar t-series of fixed closed forms
# ---------------------------------------------------------------------------


def exp_series(k: Number, t_order: int) -> TSeries:
    """exp(k t)."""
    k = Fraction(k)
    return TSeries.from_scalars([k**n / math.factorial(n) for n in range(t_order + 1)])


def cosh_series(t_order: int, k: Number = 1) -> TSeries:
    return (exp_series(k, t_order) + exp_series(-Fraction(k), t_order)) / 2


def sinh_series(t_order: int, k: Number = 1) -> TSeries:
    return (exp_series(k, t_order) - exp_series(-Fraction(k), t_order)) / 2


def _require_unit_constant(g: TSeries, what: str) -> None:
    if g.coeffs[0] != Poly.const(1, g.chart):
        raise ValueError(f"{what} needs a series with constant term 1, got {render_poly(g.coeffs[0])}")


def reciprocal(g: TSeries) -> TSeries:
    """1/g by the recursion h_n = -sum_{k>=1} g_k h_{n-k}."""
    _require_unit_constant(g, "reciprocal")
    h = [Poly.const(1, g.chart)]
    for n in range(1, g.t_order + 1):
        acc = Poly.zero(g.chart)
        for k in range(1, n + 1):
            acc = acc - g.coeffs[k] * h[n - k]
        h.append(acc.truncate(g.trusted_degree))
    return TSeries(h, g.trusted_degree, g.chart)


def sqrt(g: TSeries) -> TSeries:
    """Formal square root with constant term 1: 2 s_n = g_n - sum_{0<k<n} s_k s_{n-k}."""
    _require_unit_constant(g, "sqrt")
    s = [Poly.const(1, g.chart)]
    for n in range(1, g.t_order + 1):
        acc = g.coeffs[n]
        for k in range(1, n):
            acc = acc - s[k] * s[n - k]
        s.append((acc / 2).truncate(g.trusted_degree))
    return TSeries(s, g.trusted_degree, g.chart)


def tanh_series(t_order: int) -> TSeries:
    return sinh_series(t_order) * reciprocal(cosh_series(t_order))


def sech_series(t_order: int) -> TSeries:
    """2/(e^t + e^-t)."""
    return reciprocal(cosh_series(t_order))


def sqrt_ratio_series(t_order: int) -> TSeries:
    """sqrt(2/(1 + e^{-2t}))."""
    half_sum = (TSeries.const(1, t_order) + exp_series(-2, t_order)) / 2
    return sqrt(reciprocal(half_sum))


_NAMED: dict[str, Callable[..., TSeries]] = {
    "exp": lambda t_order, k=1: exp_series(k, t_order),
    "cosh": lambda t_order, k=1: cosh_series(t_order, k),
    "sinh": lambda t_order, k=1: sinh_series(t_order, k),
    "tanh": lambda t_order: tanh_series(t_order),
    "sech": lambda t_order: sech_series(t_order),
    "sqrt_ratio": lambda t_order: sqrt_ratio_series(t_order),
}


def scalar_series_expand(name: str, t_order: int, *args, **kwargs) -> TSeries:
    """Expand one of the fixed closed forms, or combine series.

    ``name`` is one of exp, cosh, sinh, tanh, sech, sqrt_ratio (closed forms
    of ``t``) or reciprocal, sqrt, product, sum (taking TSeries arguments).
    """
    if name in _NAMED:
        return _NAMED[name](t_order, *args, **kwargs)
    if name == "reciprocal":
        return reciprocal(args[0]).truncate_t(t_order)
    if name == "sqrt":
        return sqrt(args[0]).truncate_t(t_order)
    if name == "product":
        out = TSeries.const(1, t_order)
        for g in args:
            out = out * g
        return out.truncate_t(t_order)
    if name == "sum":
        out = TSeries.const(0, t_order)
        for g in args:
            out = out + g
        return out.truncate_t(t_order)
    raise ValueError(f"unknown closed form {name!r}")


# ---------------------------------------------------------------------------
# Substitution
# ---------------------------------------------------------------------------


def series_substitute(target: Poly, images: Mapping[str, TSeries | Poly]) -> TSeries:
    """Replace each variable of ``target`` by its image series.

    All images must share one chart; the trusted degree of the result follows
    from the product/sum propagation rules.
    """
    chart = target.chart
    imgs: dict[int, TSeries] = {}
    t_order = None
    for k, v in enumerate(chart.variables):
        if any(e[k] for e in target.terms):
            if v not in images:
                raise KeyError(f"no image given for variable {v!r}")
            img = images[v]
            if isinstance(img, Poly):
                img = TSeries.from_poly(img)
            imgs[k] = img
            t_order = img.t_order if t_order is None else min(t_order, img.t_order)
    out_chart = SCALAR
    for img in imgs.values():
        out_chart = _join_charts(out_chart, img.chart)
    if t_order is None:
        # constant target (or zero): nothing to substitute
        t_order = min((i.t_order for i in images.values() if isinstance(i, TSeries)), default=0)
    powers: dict[tuple[int, int], TSeries] = {}

    def power(k, n):
        if (k, n) not in powers:
            powers[(k, n)] = imgs[k] if n == 1 else power(k, n - 1) * imgs[k]
        return powers[(k, n)]

    total = TSeries.const(0, t_order, out_chart)
    for exps, c in target.items():
        term = TSeries.const(c, t_order, out_chart)
        for k, n in enumerate(exps):
            if n:
                term = term * power(k, n)
        total = total + term
    return total
