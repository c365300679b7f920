import itertools
from fractions import Fraction

import pytest
from hypothesis import given, settings

from kstar.exactmath import EXPONENTIAL, ORDINARY, ChartMismatchError, Poly
from kstar.liealg import (
    BASIS,
    E11,
    E22,
    H,
    R_TILDE,
    X_MINUS,
    X_PLUS,
    Mat2,
    TensorElem,
    cybe_defect,
    invariant_field_apply,
    is_r_matrix,
    r_bracket,
)
from kstar.poisson import ordinary_tensor
from kstar.reference import PRINTED_BRACKETS

from .conftest import polys

a, b, c, d = (Poly.var(ORDINARY, v) for v in "abcd")


# independent oracle: tensors as 8x8 matrices of the defining representation
def _kron(*mats):
    out = [[Fraction(1)]]
    for m in mats:
        rows = len(out) * 2
        out = [
            [out[i // 2][j // 2] * m[(i % 2, j % 2)] for j in range(rows)]
            for i in range(rows)
        ]
    return out


def _mat_add(x, y, k=1):
    return [[p + k * q for p, q in zip(rx, ry)] for rx, ry in zip(x, y)]


def _mat_mul(x, y):
    n = len(x)
    return [[sum(x[i][k] * y[k][j] for k in range(n)) for j in range(n)] for i in range(n)]


def _zero8():
    return [[Fraction(0)] * 8 for _ in range(8)]


def _as_matrix(t: TensorElem):
    total = _zero8()
    for key, coeff in t.terms.items():
        total = _mat_add(total, _kron(*(BASIS[k] for k in key)), coeff)
    return total


def _leg(r: TensorElem, legs):
    ident = Mat2.of([[1, 0], [0, 1]])
    total = _zero8()
    for (i, j), coeff in r.terms.items():
        mats = [ident, ident, ident]
        mats[legs[0]], mats[legs[1]] = BASIS[i], BASIS[j]
        total = _mat_add(total, _kron(*mats), coeff)
    return total


def _comm(x, y):
    return _mat_add(_mat_mul(x, y), _mat_mul(y, x), -1)


def _oracle_defect(r):
    r12, r13, r23 = _leg(r, (0, 1)), _leg(r, (0, 2)), _leg(r, (1, 2))
    return _mat_add(_mat_add(_comm(r12, r13), _comm(r12, r23)), _comm(r13, r23))


def test_cybe_matches_matrix_oracle():
    defect = cybe_defect(R_TILDE)
    assert _as_matrix(defect.I123) == _oracle_defect(R_TILDE)


def test_cybe_rtilde_properties():
    defect = cybe_defect(R_TILDE)
    assert not defect.I123.is_zero()
    assert defect.alternating
    assert defect.invariant


def test_cybe_is_alternation_of_h_xp_xm():
    defect = cybe_defect(R_TILDE)
    base = TensorElem.from_mats([(1, (H, X_PLUS, X_MINUS))])
    # brute-force the scalar: the defect is 6 times the antisymmetrization
    assert defect.I123 == base.antisymmetrize().scale(6)


def test_cybe_zero():
    defect = cybe_defect(TensorElem(2))
    assert defect.I123.is_zero() and defect.alternating and defect.invariant


def test_cybe_other_r_matrices_match_oracle():
    r = TensorElem.from_mats([(1, (H, X_PLUS)), (-1, (X_PLUS, H)), (2, (E11, E22)), (-2, (E22, E11))])
    assert _as_matrix(cybe_defect(r).I123) == _oracle_defect(r)


def test_cybe_rejects_symmetric():
    with pytest.raises(ValueError):
        cybe_defect(TensorElem.from_mats([(1, (X_PLUS, X_MINUS)), (1, (X_MINUS, X_PLUS))]))
    assert is_r_matrix(R_TILDE)


@pytest.mark.parametrize(
    "x, side, p, expected",
    [
        (X_PLUS, "left", a, 0),
        (X_PLUS, "left", b, a),
        (X_MINUS, "right", b, 0),
        (X_MINUS, "right", d, b),
    ],
)
def test_invariant_fields_on_coordinates(x, side, p, expected):
    assert invariant_field_apply(x, side, p) == expected


@pytest.mark.parametrize("side", ["left", "right"])
def test_invariant_fields_kill_constants(side):
    for x in BASIS:
        assert invariant_field_apply(x, side, Poly.const(1, ORDINARY)).is_zero()


def test_invariant_fields_reject_other_charts():
    with pytest.raises(ChartMismatchError):
        invariant_field_apply(X_PLUS, "left", Poly.var(EXPONENTIAL, "alpha"))
    with pytest.raises(ValueError):
        invariant_field_apply(X_PLUS, "up", a)


def test_left_and_right_fields_commute():
    for x, y in itertools.product(BASIS, repeat=2):
        for p in (a, b, c, d, a * d - b * c):
            lr = invariant_field_apply(x, "left", invariant_field_apply(y, "right", p))
            rl = invariant_field_apply(y, "right", invariant_field_apply(x, "left", p))
            assert lr == rl


def test_bracket_literal_reading_is_negated():
    # taken exactly as written the formula gives the relations with the opposite sign
    for (u, v), rel in PRINTED_BRACKETS.items():
        x, y = Poly.var(ORDINARY, u), Poly.var(ORDINARY, v)
        assert r_bracket(R_TILDE, x, y) == -rel


def test_bracket_with_opposite_r_gives_relations():
    lam = ordinary_tensor()
    for (u, v), rel in PRINTED_BRACKETS.items():
        x, y = Poly.var(ORDINARY, u), Poly.var(ORDINARY, v)
        assert r_bracket(R_TILDE.scale(-1), x, y) == rel
        assert lam.entry(u, v) == rel


def _jacobi(f, g, h, r=R_TILDE):
    br = lambda x, y: r_bracket(r, x, y)  # noqa: E731
    return br(f, br(g, h)) + br(g, br(h, f)) + br(h, br(f, g))


def test_jacobi_on_coordinate_triples():
    for f, g, h in itertools.combinations_with_replacement((a, b, c, d), 3):
        assert _jacobi(f, g, h).is_zero()


@settings(max_examples=40, deadline=None)
@given(polys(), polys(), polys())
def test_bracket_properties(f, g, h):
    br = lambda x, y: r_bracket(R_TILDE, x, y)  # noqa: E731
    assert br(f, f).is_zero()
    assert br(f, g) == -br(g, f)
    assert br(f, g * h) == br(f, g) * h + g * br(f, h)
    assert _jacobi(f, g, h).is_zero()


def test_render_format():
    t = TensorElem.from_mats([(1, (X_PLUS, X_MINUS))])
    assert t.render() == "+1·(E12, E21)"
