"""gl(2) tensor calculus: r-matrices, the modified Yang-Baxter defect,
invariant vector fields on matrix coordinates and the r-matrix bracket."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .exactmath import ORDINARY, ChartMismatchError, Poly

# basis order is fixed: E11, E12, E21, E22
BASIS_NAMES = ("E11", "E12", "E21", "E22")
_BASIS_POS = ((0, 0), (0, 1), (1, 0), (1, 1))
_COORDS = {(0, 0): "a", (0, 1): "b", (1, 0): "c", (1, 1): "d"}


@dataclass(frozen=True)
class Mat2:
    entries: tuple[tuple[Fraction, Fraction], tuple[Fraction, Fraction]]

    @classmethod
    def of(cls, rows: Sequence[Sequence[int | Fraction]]) -> "Mat2":
        return cls(tuple(tuple(Fraction(x) for x in row) for row in rows))

    @classmethod
    def from_vector(cls, v: Sequence[int | Fraction]) -> "Mat2":
        return cls.of([[v[0], v[1]], [v[2], v[3]]])

    def vector(self) -> tuple[Fraction, ...]:
        return tuple(self.entries[i][j] for i, j in _BASIS_POS)

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def __add__(self, other: "Mat2") -> "Mat2":
        return Mat2.from_vector([x + y for x, y in zip(self.vector(), other.vector())])

    def __sub__(self, other: "Mat2") -> "Mat2":
        return Mat2.from_vector([x - y for x, y in zip(self.vector(), other.vector())])

    def scale(self, k) -> "Mat2":
        return Mat2.from_vector([k * x for x in self.vector()])

    def __matmul__(self, other: "Mat2") -> "Mat2":
        e, f = self.entries, other.entries
        return Mat2.of([[sum(e[i][k] * f[k][j] for k in range(2)) for j in range(2)] for i in range(2)])

    def bracket(self, other: "Mat2") -> "Mat2":
        return (self @ other) - (other @ self)


E11 = Mat2.of([[1, 0], [0, 0]])
E12 = Mat2.of([[0, 1], [0, 0]])
E21 = Mat2.of([[0, 0], [1, 0]])
E22 = Mat2.of([[0, 0], [0, 1]])
BASIS = (E11, E12, E21, E22)
X_PLUS = E12
X_MINUS = E21
H = E11 - E22


def _structure_constants() -> dict[tuple[int, int], dict[int, Fraction]]:
    table = {}
    for x, y in itertools.product(range(4), repeat=2):
        v = BASIS[x].bracket(BASIS[y]).vector()
        table[(x, y)] = {k: c for k, c in enumerate(v) if c}
    return table


STRUCTURE = _structure_constants()


class TensorElem:
    """Element of gl(2)^{(x)k}, k in {2, 3}, as a map from basis-index tuples to rationals."""

    __slots__ = ("arity", "terms")

    def __init__(self, arity: int, terms: Mapping[tuple[int, ...], int | Fraction] | None = None):
        if arity not in (2, 3):
            raise ValueError("only arity 2 and 3 tensors are supported")
        clean = {}
        for key, c in (terms or {}).items():
            if len(key) != arity or any(not 0 <= k < 4 for k in key):
                raise ValueError(f"bad basis index tuple {key}")
            c = Fraction(c)
            if c:
                clean[tuple(key)] = c
        self.arity = arity
        self.terms = clean

    @classmethod
    def from_mats(cls, parts: Iterable[tuple[int | Fraction, Sequence[Mat2]]]) -> "TensorElem":
        """Sum of coeff * M1 (x) M2 (x) ... expanded on the basis."""
        terms: dict = {}
        arity = None
        for coeff, mats in parts:
            arity = len(mats)
            vecs = [m.vector() for m in mats]
            for key in itertools.product(range(4), repeat=arity):
                c = Fraction(coeff)
                for v, k in zip(vecs, key):
                    c *= v[k]
                if c:
                    terms[key] = terms.get(key, 0) + c
        return cls(arity or 2, terms)

    def __add__(self, other: "TensorElem") -> "TensorElem":
        out = dict(self.terms)
        for k, c in other.terms.items():
            out[k] = out.get(k, 0) + c
        return TensorElem(self.arity, out)

    def __neg__(self):
        return TensorElem(self.arity, {k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, k) -> "TensorElem":
        return TensorElem(self.arity, {key: k * c for key, c in self.terms.items()})

    def __eq__(self, other):
        return isinstance(other, TensorElem) and self.arity == other.arity and self.terms == other.terms

    def __hash__(self):
        return hash((self.arity, frozenset(self.terms.items())))

    def is_zero(self) -> bool:
        return not self.terms

    def permute(self, perm: Sequence[int]) -> "TensorElem":
        """Move slot s to position perm[s]."""
        out = {}
        for key, c in self.terms.items():
            new = [0] * self.arity
            for s, k in enumerate(key):
                new[perm[s]] = k
            out[tuple(new)] = out.get(tuple(new), 0) + c
        return TensorElem(self.arity, out)

    def flip(self) -> "TensorElem":
        if self.arity != 2:
            raise ValueError("flip is defined for arity 2")
        return self.permute((1, 0))

    def antisymmetrize(self) -> "TensorElem":
        total = TensorElem(self.arity)
        perms = list(itertools.permutations(range(self.arity)))
        for perm in perms:
            total = total + self.permute(perm).scale(_parity(perm))
        return total.scale(Fraction(1, len(perms)))

    def is_alternating(self) -> bool:
        return self.antisymmetrize() == self

    def ad_slot(self, x: int, slot: int) -> "TensorElem":
        """Apply ad(basis[x]) in a single slot."""
        out: dict = {}
        for key, c in self.terms.items():
            for k, s in STRUCTURE[(x, key[slot])].items():
                new = key[:slot] + (k,) + key[slot + 1 :]
                out[new] = out.get(new, 0) + c * s
        return TensorElem(self.arity, out)

    def ad_diagonal(self, x: int) -> "TensorElem":
        """[Delta^(k)(X), e] for the k-fold coproduct of a primitive X."""
        total = TensorElem(self.arity)
        for slot in range(self.arity):
            total = total + self.ad_slot(x, slot)
        return total

    def render(self, names: Sequence[str] = BASIS_NAMES) -> str:
        if not self.terms:
            return "0"
        parts = []
        for key in sorted(self.terms):
            c = self.terms[key]
            sign = "+" if c > 0 else "-"
            mag = abs(c)
            mag_s = str(mag.numerator) if mag.denominator == 1 else f"{mag.numerator}/{mag.denominator}"
            parts.append(f"{sign}{mag_s}·({', '.join(names[k] for k in key)})")
        return " ".join(parts)

    def __repr__(self):
        return f"TensorElem({self.render()})"


def _parity(perm: Sequence[int]) -> int:
    sign = 1
    seen = list(perm)
    for i in range(len(seen)):
        for j in range(i + 1, len(seen)):
            if seen[i] > seen[j]:
                sign = -sign
    return sign


# r~ = X+ (x) X- - X- (x) X+
R_TILDE = TensorElem.from_mats([(1, (X_PLUS, X_MINUS)), (-1, (X_MINUS, X_PLUS))])


def is_r_matrix(r: TensorElem) -> bool:
    return r.arity == 2 and (r + r.flip()).is_zero()


def _legs(r: TensorElem, legs: tuple[int, int]) -> dict[tuple, Fraction]:
    # slots outside ``legs`` hold the unit, written None
    out = {}
    for (x, y), c in r.terms.items():
        key = [None, None, None]
        key[legs[0]], key[legs[1]] = x, y
        out[tuple(key)] = c
    return out


def _leg_commutator(p: dict, q: dict) -> TensorElem:
    """[p, q] for two leg-embedded 2-tensors sharing exactly one slot."""
    terms: dict = {}
    for kp, cp in p.items():
        for kq, cq in q.items():
            shared = [s for s in range(3) if kp[s] is not None and kq[s] is not None]
            if len(shared) != 1:
                raise ValueError("leg embeddings must overlap in exactly one slot")
            s = shared[0]
            for k, sc in STRUCTURE[(kp[s], kq[s])].items():
                key = tuple(k if i == s else (kp[i] if kp[i] is not None else kq[i]) for i in range(3))
                terms[key] = terms.get(key, 0) + cp * cq * sc
    return TensorElem(3, terms)


@dataclass(frozen=True)
class CYBEDefect:
    I123: TensorElem
    alternating: bool
    invariant: bool


def cybe_defect(r: TensorElem) -> CYBEDefect:
    """Yang-Baxter defect [r12, r13] + [r12, r23] + [r13, r23] and its two properties."""
    if not is_r_matrix(r):
        raise ValueError("r must be an antisymmetric 2-tensor")
    r12, r13, r23 = _legs(r, (0, 1)), _legs(r, (0, 2)), _legs(r, (1, 2))
    defect = _leg_commutator(r12, r13) + _leg_commutator(r12, r23) + _leg_commutator(r13, r23)
    invariant = all(defect.ad_diagonal(x).is_zero() for x in range(4))
    return CYBEDefect(defect, defect.is_alternating(), invariant)


def invariant_field_apply(x: Mat2, side: str, p: Poly) -> Poly:
    """Left-invariant (side='left', t -> t X) or right-invariant (side='right', t -> X t)
    vector field of ``x`` acting on a polynomial in the matrix coordinates."""
    if p.chart != ORDINARY:
        if p.is_constant():
            return Poly.zero(ORDINARY)
        raise ChartMismatchError(p.chart, ORDINARY)
    if side not in ("left", "right"):
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    total = Poly.zero(ORDINARY)
    for (i, j), name in _COORDS.items():
        image = Poly.zero(ORDINARY)
        for k in range(2):
            if side == "left":
                coeff, coord = x[(k, j)], _COORDS[(i, k)]
            else:
                coeff, coord = x[(i, k)], _COORDS[(k, j)]
            if coeff:
                image = image + Poly.var(ORDINARY, coord) * coeff
        if image:
            total = total + image * p.diff(name)
    return total


def r_bracket(r: TensorElem, phi: Poly, psi: Poly) -> Poly:
    """sum r^{ij} (X_i^l phi X_j^l psi - X_i^r phi X_j^r psi), signs exactly as written."""
    for p in (phi, psi):
        if p.chart != ORDINARY and not p.is_constant():
            raise ChartMismatchError(p.chart, ORDINARY)
    total = Poly.zero(ORDINARY)
    for (i, j), c in r.terms.items():
        left = invariant_field_apply(BASIS[i], "left", phi) * invariant_field_apply(BASIS[j], "left", psi)
        right = invariant_field_apply(BASIS[i], "right", phi) * invariant_field_apply(BASIS[j], "right", psi)
        total = total + (left - right) * c
    return total
