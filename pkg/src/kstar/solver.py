"""Coefficient-matching systems and their exact solution or refutation."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .bidiff import ONE, UnaryDiffOp, equivalence_defect_on_pairs, operator_from_schema
from .exactmath import EXPONENTIAL, ORDINARY, Poly, TSeries, render_poly
from .graphs import symmetric_basis, unary_basis
from .poisson import PoissonTensor, exp_chart_functions, exp_chart_tensor, ordinary_tensor
from .takhtajan import COORDS, TableCochain, extract_cochains, star_table

EXP_UNKNOWNS = tuple(f"a_G{i}" for i in range(1, 7))
ORDINARY_UNKNOWNS = ("K1", "K2", "K3", "K4", "K5", "K6", "K1^2")


@dataclass
class Row:
    coeffs: tuple[Fraction, ...]
    rhs: Fraction
    provenance: list[str] = field(default_factory=list)

    def is_trivial(self) -> bool:
        return not any(self.coeffs) and not self.rhs


def _normalize(coeffs: Sequence[Fraction], rhs: Fraction) -> tuple[tuple[Fraction, ...], Fraction, Fraction]:
    """Scale so the first nonzero coefficient is 1 (or the rhs, for 0 = c rows)."""
    lead = next((c for c in coeffs if c), rhs or Fraction(1))
    return tuple(c / lead for c in coeffs), rhs / lead, lead


class LinSystem:
    """Rows sum_j coeffs[j] * x_j = rhs over the ordered ``unknowns``.

    Rows are stored normalized (leading coefficient 1); rows that coincide after
    normalization are merged and keep every provenance string.
    """

    def __init__(self, unknowns: Sequence[str], notes: Sequence[str] = ()):
        self.unknowns = tuple(unknowns)
        self.rows: list[Row] = []
        self.notes = list(notes)
        self._index: dict[tuple, int] = {}

    def add_row(self, coeffs: Sequence, rhs, provenance: str) -> None:
        if len(coeffs) != len(self.unknowns):
            raise ValueError("row length does not match the unknowns")
        coeffs = tuple(Fraction(c) for c in coeffs)
        rhs = Fraction(rhs)
        if not any(coeffs) and not rhs:
            return
        coeffs, rhs, lead = _normalize(coeffs, rhs)
        note = provenance if lead == 1 else f"{provenance} (divided by {lead})"
        key = (coeffs, rhs)
        if key in self._index:
            self.rows[self._index[key]].provenance.append(note)
            return
        self._index[key] = len(self.rows)
        self.rows.append(Row(coeffs, rhs, [note]))

    def __len__(self) -> int:
        return len(self.rows)

    def permuted(self, order: Sequence[int]) -> "LinSystem":
        out = LinSystem(self.unknowns, self.notes)
        for i in order:
            r = self.rows[i]
            out._index[(r.coeffs, r.rhs)] = len(out.rows)
            out.rows.append(Row(r.coeffs, r.rhs, list(r.provenance)))
        return out

    def render_row(self, row: Row) -> str:
        parts = []
        for c, name in zip(row.coeffs, self.unknowns):
            if c:
                parts.append(f"{c}*{name}")
        lhs = " + ".join(parts).replace("+ -", "- ") or "0"
        return f"{lhs} = {row.rhs}"

    def to_json(self) -> dict:
        return {
            "unknowns": list(self.unknowns),
            "notes": list(self.notes),
            "rows": [
                {"coeffs": [str(c) for c in r.coeffs], "rhs": str(r.rhs), "provenance": list(r.provenance)}
                for r in self.rows
            ],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True)


@dataclass(frozen=True)
class Solution:
    assignment: Mapping[str, Fraction]
    nullity: int
    free_columns: tuple[int, ...]

    def to_json(self) -> dict:
        return {
            "assignment": {k: str(v) for k, v in self.assignment.items()},
            "nullity": self.nullity,
        }


@dataclass(frozen=True)
class InfeasibilityCertificate:
    multipliers: tuple[Fraction, ...]
    combined_rhs: Fraction

    def support(self) -> list[int]:
        return [i for i, m in enumerate(self.multipliers) if m]

    def to_json(self) -> dict:
        return {
            "multipliers": {str(i): str(m) for i, m in enumerate(self.multipliers) if m},
            "combined_rhs": str(self.combined_rhs),
        }


def _integer_row(row: Row) -> tuple[list[int], int]:
    scale = math.lcm(*(c.denominator for c in row.coeffs), row.rhs.denominator)
    return [int(c * scale) for c in row.coeffs] + [int(row.rhs * scale)], scale


def _eliminate(system: LinSystem):
    """Bareiss elimination on [A | b | I]; returns (matrix, pivots, scales)."""
    n_rows, n_cols = len(system.rows), len(system.unknowns)
    matrix, scales = [], []
    for i, row in enumerate(system.rows):
        ints, scale = _integer_row(row)
        matrix.append(ints + [1 if j == i else 0 for j in range(n_rows)])
        scales.append(scale)
    width = n_cols + 1 + n_rows
    pivots: list[tuple[int, int]] = []
    prev = 1
    r = 0
    for col in range(n_cols):
        pick = next((i for i in range(r, n_rows) if matrix[i][col]), None)
        if pick is None:
            continue
        matrix[r], matrix[pick] = matrix[pick], matrix[r]
        piv = matrix[r][col]
        for i in range(r + 1, n_rows):
            factor = matrix[i][col]
            new = []
            for j in range(width):
                num = piv * matrix[i][j] - factor * matrix[r][j]
                q, rem = divmod(num, prev)
                if rem:
                    raise ArithmeticError("Bareiss division was not exact")
                new.append(q)
            matrix[i] = new
        pivots.append((r, col))
        prev = piv
        r += 1
    return matrix, pivots, scales


def verify_certificate(system: LinSystem, cert: InfeasibilityCertificate) -> bool:
    """Recompute sum lambda_k * row_k from the stored rows."""
    if len(cert.multipliers) != len(system.rows):
        return False
    combined = [Fraction(0)] * len(system.unknowns)
    rhs = Fraction(0)
    for lam, row in zip(cert.multipliers, system.rows):
        if not lam:
            continue
        for j, c in enumerate(row.coeffs):
            combined[j] += lam * c
        rhs += lam * row.rhs
    return not any(combined) and rhs != 0 and rhs == cert.combined_rhs


def solve_or_certificate(system: LinSystem) -> Solution | InfeasibilityCertificate:
    n_rows, n_cols = len(system.rows), len(system.unknowns)
    if not n_rows:
        return Solution({u: Fraction(0) for u in system.unknowns}, n_cols, tuple(range(n_cols)))
    matrix, pivots, scales = _eliminate(system)
    rank = len(pivots)
    for i in range(rank, n_rows):
        if matrix[i][n_cols]:
            # the identity block records which integer-scaled input rows were combined
            ident = matrix[i][n_cols + 1 :]
            lam = tuple(Fraction(ident[k] * scales[k]) for k in range(n_rows))
            g = math.gcd(*(x.numerator for x in lam if x)) or 1
            lam = tuple(x / g for x in lam)
            rhs = sum((x * row.rhs for x, row in zip(lam, system.rows)), Fraction(0))
            cert = InfeasibilityCertificate(lam, rhs)
            if not verify_certificate(system, cert):
                raise ArithmeticError("elimination produced an invalid certificate")
            return cert
    values = [Fraction(0)] * n_cols
    for r, col in reversed(pivots):
        acc = Fraction(matrix[r][n_cols])
        for j in range(col + 1, n_cols):
            acc -= matrix[r][j] * values[j]
        values[col] = acc / matrix[r][col]
    pivot_cols = {c for _, c in pivots}
    free = tuple(j for j in range(n_cols) if j not in pivot_cols)
    return Solution(dict(zip(system.unknowns, values)), n_cols - rank, free)


def rank(rows: Sequence[Sequence[Fraction]]) -> int:
    """Rank over the rationals, by plain Gauss-Jordan (independent of Bareiss)."""
    work = [[Fraction(x) for x in r] for r in rows]
    r = 0
    width = len(work[0]) if work else 0
    for col in range(width):
        pick = next((i for i in range(r, len(work)) if work[i][col]), None)
        if pick is None:
            continue
        work[r], work[pick] = work[pick], work[r]
        inv = 1 / work[r][col]
        work[r] = [x * inv for x in work[r]]
        for i in range(len(work)):
            if i != r and work[i][col]:
                f = work[i][col]
                work[i] = [x - f * y for x, y in zip(work[i], work[r])]
        r += 1
    return r


def in_row_space(system: LinSystem, coeffs: Sequence, rhs) -> tuple[bool, bool]:
    """(augmented row in the augmented row space, coefficient part in the coefficient row space)."""
    aug = [list(r.coeffs) + [r.rhs] for r in system.rows]
    coef = [list(r.coeffs) for r in system.rows]
    new_aug = [Fraction(c) for c in coeffs] + [Fraction(rhs)]
    new_coef = new_aug[:-1]
    return rank(aug + [new_aug]) == rank(aug), rank(coef + [new_coef]) == rank(coef)


def find_contradictory_pairs(system: LinSystem) -> list[tuple[int, int, InfeasibilityCertificate]]:
    """Pairs of rows with equal (normalized) coefficients and different rhs."""
    by_coeffs: dict[tuple, list[int]] = {}
    for i, r in enumerate(system.rows):
        if any(r.coeffs):
            by_coeffs.setdefault(r.coeffs, []).append(i)
    out = []
    for idx in by_coeffs.values():
        for x in range(len(idx)):
            for y in range(x + 1, len(idx)):
                i, j = idx[x], idx[y]
                lam = [Fraction(0)] * len(system.rows)
                lam[i], lam[j] = Fraction(1), Fraction(-1)
                cert = InfeasibilityCertificate(tuple(lam), system.rows[i].rhs - system.rows[j].rhs)
                out.append((i, j, cert))
    return out


def forward_substitution(rows: Sequence[tuple[Sequence, Fraction]], check: int) -> dict:
    """Solve the rows before ``check`` (any particular solution) and evaluate row ``check``."""
    system = LinSystem(EXP_UNKNOWNS[: len(rows[0][0])])
    for k, (coeffs, rhs) in enumerate(rows[:check]):
        system.add_row(coeffs, rhs, f"row {k + 1}")
    sol = solve_or_certificate(system)
    if not isinstance(sol, Solution):
        raise ValueError("the leading rows are already inconsistent")
    coeffs, rhs = rows[check]
    value = sum((Fraction(c) * sol.assignment[u] for c, u in zip(coeffs, system.unknowns)), Fraction(0))
    return {"assignment": dict(sol.assignment), "lhs": value, "rhs": Fraction(rhs)}


# ---------------------------------------------------------------------------
# Assembly
# ---------------------------------------------------------------------------


def _mono_text(chart, exps) -> str:
    return render_poly(Poly.monomial(chart, exps, 1))


def _value(x) -> Poly:
    return x[0] if isinstance(x, TSeries) else x


def b_gamma_values(tensor: PoissonTensor, u: str, v: str, degree: int = 2) -> list[Poly]:
    """B_Gamma_i(u, v) for the six symmetric schemata, with u, v ordinary coordinates
    written in the exponential chart, truncated at ``degree``."""
    functions = exp_chart_functions(3)
    out = []
    for schema in symmetric_basis():
        value = operator_from_schema(schema, tensor).apply(functions[u], functions[v])
        if value.trusted_degree < degree:
            raise ValueError(f"trusted degree {value.trusted_degree} is below {degree}")
        out.append(value.truncate(degree)[0])
    return out


def assemble_exponential_system(tensor: PoissonTensor | None = None) -> LinSystem:
    tensor = tensor if tensor is not None else exp_chart_tensor(3)
    if tensor.chart != EXPONENTIAL:
        raise ValueError("the exponential system needs an exponential-chart tensor")
    if tensor.trusted_degree < 3:
        raise ValueError(f"tensor trusted through degree {tensor.trusted_degree}; degree 3 is required")
    ct = extract_cochains(star_table(2), EXPONENTIAL, 2).ct
    system = LinSystem(EXP_UNKNOWNS)
    for u in COORDS:
        for v in COORDS:
            values = b_gamma_values(tensor, u, v)
            target = ct[(u, v)]
            monos = set(target.terms)
            for p in values:
                monos |= set(p.terms)
            for m in sorted(monos, key=lambda e: (sum(e), tuple(-x for x in e))):
                system.add_row(
                    [p.coeff(m) for p in values],
                    target.coeff(m),
                    f"pair ({u},{v}) monomial {_mono_text(EXPONENTIAL, m)} order t^2",
                )
    return system


def equivalence_operator() -> list:
    """T = Id + t K1 T1 + t^2 sum K_i T_i, as labelled unary operators."""
    tensor = ordinary_tensor()
    ops = {s.name: operator_from_schema(s, tensor) for s in unary_basis()}
    first = {"K1": ops.pop("K1")}
    return [UnaryDiffOp.identity(ORDINARY), first, ops]


def assemble_ordinary_system(weights: Mapping[str, Fraction] | None = None, rhs: str = "takhtajan") -> LinSystem:
    """Order-t^2 equivalence defect between the Kontsevich product (with the given
    weights) and the target product, matched per coordinate pair and monomial.

    K1^2 is lifted to an independent unknown; the side condition K1^2 = K1*K1 is
    recorded in the notes, not enforced.
    """
    from .kontsevich import order2_product, solve_weights

    if weights is None:
        weights = solve_weights().weights
    product = order2_product(ordinary_tensor(), weights)
    kont = product.cochains()
    if rhs == "takhtajan":
        cs = extract_cochains(star_table(2), ORDINARY)
        target = [None, cs.c1_cochain(), TableCochain(cs.c2, ORDINARY)]
    elif rhs == "kontsevich":
        target = kont
    else:
        raise ValueError(f"unknown right-hand side {rhs!r}")
    pairs = [(Poly.var(ORDINARY, u), Poly.var(ORDINARY, v)) for u in COORDS for v in COORDS]
    defects = equivalence_defect_on_pairs(equivalence_operator(), kont, target, pairs, order=2)
    system = LinSystem(ORDINARY_UNKNOWNS, notes=["K1^2 is an independent unknown; K1^2 = K1*K1 is not enforced"])
    for (f, g), defect in zip(pairs, defects):
        unknown = set(defect) - set(ORDINARY_UNKNOWNS) - {ONE}
        if unknown:
            raise ValueError(f"unexpected labels in the defect: {sorted(unknown)}")
        monos = set()
        for p in defect.values():
            monos |= set(p.terms)
        for m in sorted(monos, key=lambda e: (sum(e), tuple(-x for x in e))):
            coeffs = [defect[u].coeff(m) if u in defect else 0 for u in ORDINARY_UNKNOWNS]
            const = defect[ONE].coeff(m) if ONE in defect else 0
            system.add_row(
                coeffs,
                -const,
                f"pair ({render_poly(f)},{render_poly(g)}) monomial {_mono_text(ORDINARY, m)} order t^2",
            )
    return system

