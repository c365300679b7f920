"""Published comparison values, kept as data.

Nothing in the computation pipeline reads these; they exist so that reports
and tests can compare computed objects against the values printed in the
literature and flag disagreements.
"""

from __future__ import annotations

from fractions import Fraction as Q

from .exactmath import EXPONENTIAL, ORDINARY, Poly, TSeries, scalar_series_expand
from .poisson import PoissonTensor

_al, _be, _ga, _de = (Poly.var(EXPONENTIAL, v) for v in EXPONENTIAL.variables)
_a, _b, _c, _d = (Poly.var(ORDINARY, v) for v in ORDINARY.variables)

#: Exponential-chart tensor as printed, through degree 3.
PRINTED_EXP_TENSOR = PoissonTensor.from_entries(
    EXPONENTIAL,
    {
        ("alpha", "beta"): _be + _be**2 * _ga / 3 + _be * _al**2 / 3,
        ("alpha", "gamma"): _ga + _be * _ga**2 / 3 + _ga * _al**2 / 3,
        ("beta", "delta"): _be + _be**2 * _ga / 3 + _be * _de**2 / 3,
        ("gamma", "delta"): _ga + _be * _ga**2 / 3 + _ga * _de**2 / 3,
        ("beta", "gamma"): Poly.zero(EXPONENTIAL),
        ("alpha", "delta"): _be * _ga * _al + _be * _ga * _de,
    },
    trusted_degree=3,
)

#: Printed cubic parts of a and d in the exponential chart (b and c agree with e^X).
PRINTED_EXP_CUBIC = {
    "a": (_al**3 + _be * _ga * _al + _be * _ga * _de) / 6,
    "d": (_de**3 + _be * _ga * _de + _be * _ga * _al) / 6,
}

#: B_Gamma_i(a, d) in the exponential chart through degree 2, i = 1..6.
PRINTED_B_AD = (
    -2 - 2 * _al - 2 * _de - 2 * _al * _de - Q(5, 3) * _al**2 - Q(5, 3) * _de**2 - Q(10, 3) * _be * _ga,
    -4 - 4 * _al - 4 * _de - 4 * _al * _de - Q(10, 3) * _al**2 - Q(10, 3) * _de**2 - Q(32, 3) * _be * _ga,
    -Q(28, 3) * _be * _ga,
    2 * _be * _ga,
    Q(8, 3) * _be * _ga,
    Q(16, 3) * _be * _ga,
)

#: Printed exponential-chart rows over (a_G1..a_G6 | rhs).
PRINTED_EXP_ROWS = (
    ((1, 2, 0, 0, 0, 0), 0),
    ((10, 32, 28, -6, -8, -16), 0),
    ((0, 0, 8, 0, 1, 4), 0),
    ((0, 0, 8, 0, 2, 4), Q(-3, 2)),
    ((0, 0, 0, 0, 1, 2), Q(-1, 8)),
    ((-1, -2, -6, 0, 4, 8), Q(-9, 16)),
    ((-1, 2, 2, 0, 2, 4), Q(-3, 16)),
)

#: Printed ordinary-chart rows over (K1..K6, K1^2 | rhs).
PRINTED_ORDINARY_ROWS = (
    ((0, 0, 2, 1, 0, 0, 0), Q(7, 48)),
    ((0, 0, 1, 2, 0, 0, 0), Q(1, 6)),
    ((0, 0, 0, 1, 0, 0, 0), Q(1, 12)),
    ((0, 0, 0, 1, 0, 0, 0), Q(1, 12) - Q(1, 8)),
    ((0, 2, 0, 1, 0, 0, 1), Q(1, 12)),
)

#: Printed Poisson relations on the ordinary chart.
PRINTED_BRACKETS = {
    ("a", "b"): _a * _b,
    ("a", "c"): _a * _c,
    ("b", "c"): Poly.zero(ORDINARY),
    ("b", "d"): _b * _d,
    ("c", "d"): _c * _d,
    ("a", "d"): 2 * _b * _c,
}


def printed_star_relations(t_order: int) -> dict[tuple[str, str], TSeries]:
    """The nine printed product relations, closed forms expanded in t."""
    one = TSeries.const(1, t_order, ORDINARY)
    root = scalar_series_expand("sqrt_ratio", t_order)
    sech = scalar_series_expand("sech", t_order)
    tanh = scalar_series_expand("tanh", t_order)
    out = {(v, v): one * (Poly.var(ORDINARY, v) ** 2) for v in ORDINARY.variables}
    for u, v in (("a", "b"), ("a", "c"), ("b", "d"), ("c", "d")):
        out[(u, v)] = root * (Poly.var(ORDINARY, u) * Poly.var(ORDINARY, v))
    out[("b", "c")] = sech * (_b * _c)
    out[("a", "d")] = one * (_a * _d) + tanh * (_b * _c)
    return out
