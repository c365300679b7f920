"""Kontsevich graphs, their classes up to aerial relabelling, and the
contraction schemata that turn them into (bi)differential operators.

Vertices are written ``p1..pn`` (aerial) and ``q1..qm`` (terrestrial).
Each aerial vertex emits an ordered pair of edges; swapping the pair flips
the sign of the associated operator.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

MAX_AERIAL = 3


@dataclass(frozen=True, order=True)
class KGraph:
    n_aerial: int
    m_terrestrial: int
    edges: tuple[tuple[str, str], ...]
    generalized: bool = True

    def __post_init__(self):
        if len(self.edges) != self.n_aerial:
            raise ValueError("one edge pair per aerial vertex is required")
        valid = set(self.vertices())
        for k, (first, second) in enumerate(self.edges, start=1):
            for target in (first, second):
                if target not in valid:
                    raise ValueError(f"unknown target {target!r} from p{k}")
            if first == second:
                raise ValueError(f"double edge from p{k}")
            if not self.generalized and f"p{k}" in (first, second):
                raise ValueError(f"loop at p{k} in a standard graph")

    def vertices(self) -> list[str]:
        return [f"p{k}" for k in range(1, self.n_aerial + 1)] + [f"q{k}" for k in range(1, self.m_terrestrial + 1)]

    def hits_every_terrestrial(self) -> bool:
        hit = {t for pair in self.edges for t in pair}
        return all(f"q{k}" in hit for k in range(1, self.m_terrestrial + 1))

    def has_loop(self) -> bool:
        return any(f"p{k}" in pair for k, pair in enumerate(self.edges, start=1))

    def text(self) -> str:
        body = "; ".join(f"p{k}->({a},{b})" for k, (a, b) in enumerate(self.edges, start=1))
        head = f"n={self.n_aerial} m={self.m_terrestrial}"
        return f"{head}; {body}" if body else head

    __str__ = text

    @classmethod
    def parse(cls, text: str, generalized: bool = True) -> "KGraph":
        parts = [p.strip() for p in text.split(";")]
        m = re.fullmatch(r"n=(\d+)\s+m=(\d+)", parts[0])
        if not m:
            raise ValueError(f"bad graph header {parts[0]!r}")
        n, mm = int(m.group(1)), int(m.group(2))
        edges = []
        for k, part in enumerate(parts[1:], start=1):
            e = re.fullmatch(r"p(\d+)->\((\w+),(\w+)\)", part)
            if not e or int(e.group(1)) != k:
                raise ValueError(f"bad edge text {part!r}")
            edges.append((e.group(2), e.group(3)))
        return cls(n, mm, tuple(edges), generalized)

    def relabel(self, perm: Sequence[int]) -> "KGraph":
        """Aerial vertex k becomes vertex perm[k] (0-based)."""

        def ren(v):
            return f"p{perm[int(v[1:]) - 1] + 1}" if v[0] == "p" else v

        new = [None] * self.n_aerial
        for k, (a, b) in enumerate(self.edges):
            new[perm[k]] = (ren(a), ren(b))
        return KGraph(self.n_aerial, self.m_terrestrial, tuple(new), self.generalized)

    def swap_edges(self, mask: Sequence[bool]) -> "KGraph":
        new = tuple((b, a) if flip else (a, b) for (a, b), flip in zip(self.edges, mask))
        return KGraph(self.n_aerial, self.m_terrestrial, new, self.generalized)

    def mirror(self) -> "KGraph":
        """Swap the two terrestrial vertices."""
        if self.m_terrestrial != 2:
            raise ValueError("mirror needs two terrestrial vertices")
        sw = {"q1": "q2", "q2": "q1"}
        new = tuple((sw.get(a, a), sw.get(b, b)) for a, b in self.edges)
        return KGraph(self.n_aerial, self.m_terrestrial, new, self.generalized)

    def variants(self):
        """All (graph, sign) reachable by aerial relabelling and edge swaps."""
        for perm in itertools.permutations(range(self.n_aerial)):
            base = self.relabel(perm)
            for mask in itertools.product((False, True), repeat=self.n_aerial):
                yield base.swap_edges(mask), (-1) ** sum(mask)


@dataclass(frozen=True)
class GraphClass:
    """Graphs equal up to aerial relabelling and edge order.

    ``members`` lists every ordered-edge graph of the class with the sign
    relating its operator to the representative's. ``vanishing`` is set when
    some relabelling maps the representative to itself with sign -1.
    """

    representative: KGraph
    members: tuple[tuple[KGraph, int], ...]
    vanishing: bool
    automorphisms: int
    mirror: KGraph | None = None
    mirror_sign: int = 0

    @property
    def self_mirror(self) -> bool:
        return self.mirror == self.representative

    @property
    def symmetric(self) -> bool:
        """Operator is symmetric on its own, or pairs with a distinct mirror class."""
        if self.mirror is None or self.vanishing:
            return False
        return not self.self_mirror or self.mirror_sign == 1

    @property
    def antisymmetric(self) -> bool:
        return self.self_mirror and self.mirror_sign == -1 and not self.vanishing

    def sign_of(self, graph: KGraph) -> int:
        for member, sign in self.members:
            if member == graph:
                return sign
        raise KeyError(f"{graph} is not in this class")

    def text(self) -> str:
        return self.representative.text()


def canonical_form(graph: KGraph) -> tuple[KGraph, int]:
    """Lexicographically least variant and the sign taking ``graph``'s operator to it."""
    return min(graph.variants(), key=lambda gs: gs[0].edges)


def _make_class(rep: KGraph) -> GraphClass:
    members: dict = {}
    vanishing = False
    autos = 0
    for g, s in rep.variants():
        if g in members and members[g] != s:
            vanishing = True
        members.setdefault(g, s)
        if g == rep:
            autos += 1
    mirror, mirror_sign = None, 0
    if rep.m_terrestrial == 2:
        mirror, mirror_sign = canonical_form(rep.mirror())
    ordered = tuple(sorted(members.items(), key=lambda gs: gs[0].edges))
    return GraphClass(rep, ordered, vanishing, autos, mirror, mirror_sign)


def enumerate_graphs(n: int, m: int, generalized: bool = True) -> list[GraphClass]:
    """Classes of graphs with n aerial and m terrestrial vertices in which every
    terrestrial vertex receives an edge, in canonical order."""
    if not 0 <= n <= MAX_AERIAL or m not in (1, 2):
        raise ValueError(f"enumeration supports 0 <= n <= {MAX_AERIAL} and m in (1, 2), got n={n}, m={m}")
    verts = [f"p{k}" for k in range(1, n + 1)] + [f"q{k}" for k in range(1, m + 1)]

    def choices(k):
        targets = [v for v in verts if generalized or v != f"p{k}"]
        return list(itertools.combinations(targets, 2))

    reps = set()
    for edges in itertools.product(*[choices(k) for k in range(1, n + 1)]):
        g = KGraph(n, m, tuple(edges), generalized)
        if n == 0 or not g.hits_every_terrestrial():
            continue
        reps.add(canonical_form(g)[0])
    return [_make_class(rep) for rep in sorted(reps, key=lambda g: g.edges)]


def count_ordered_graphs(n: int, m: int, generalized: bool = True) -> int:
    """Number of ordered-edge graphs up to aerial relabelling only."""
    total = 0
    for cls in enumerate_graphs(n, m, generalized):
        seen = set()
        for g, _ in cls.members:
            seen.add(min(g.relabel(p).edges for p in itertools.permutations(range(n))))
        total += len(seen)
    return total


# ---------------------------------------------------------------------------
# Schemata
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Factor:
    """Lam^{upper[0] upper[1]} differentiated along ``derivs``."""

    upper: tuple[str, str]
    derivs: tuple[str, ...] = ()


@dataclass(frozen=True)
class SchemaTerm:
    factors: tuple[Factor, ...]
    slots: tuple[tuple[str, ...], ...]
    coeff: Fraction = Fraction(1)

    def indices(self) -> list[str]:
        seen = []
        for f in self.factors:
            for s in f.upper:
                if s not in seen:
                    seen.append(s)
        return seen

    def validate(self) -> None:
        uppers = [s for f in self.factors for s in f.upper]
        lowers = [s for f in self.factors for s in f.derivs] + [s for slot in self.slots for s in slot]
        if sorted(uppers) != sorted(lowers) or len(set(uppers)) != len(uppers):
            raise ValueError("each index must appear once up and once down")

    def graph(self) -> KGraph:
        """Edges: vertex k sends its upper indices to wherever they are differentiated."""
        where = {}
        for k, f in enumerate(self.factors, start=1):
            for s in f.derivs:
                where[s] = f"p{k}"
        for k, slot in enumerate(self.slots, start=1):
            for s in slot:
                where[s] = f"q{k}"
        edges = tuple((where[f.upper[0]], where[f.upper[1]]) for f in self.factors)
        return KGraph(len(self.factors), len(self.slots), edges, True)


@dataclass(frozen=True)
class Schema:
    name: str
    weight: str
    terms: tuple[SchemaTerm, ...]
    order: int = 2

    @property
    def arity(self) -> int:
        return len(self.terms[0].slots)

    def graphs(self) -> list[KGraph]:
        return [term.graph() for term in self.terms]


def schema_from_graph(graph: KGraph, name: str | None = None, weight: str | None = None) -> Schema:
    """Index pattern of the operator B_Gamma: vertex k carries Lam^{i_k j_k};
    edge targets decide where each index is differentiated."""
    factors_derivs = {f"p{k}": [] for k in range(1, graph.n_aerial + 1)}
    slots = {f"q{k}": [] for k in range(1, graph.m_terrestrial + 1)}
    uppers = []
    for k, (first, second) in enumerate(graph.edges, start=1):
        i, j = f"i{k}", f"j{k}"
        uppers.append((i, j))
        for idx, target in ((i, first), (j, second)):
            (factors_derivs if target[0] == "p" else slots)[target].append(idx)
    factors = tuple(
        Factor(up, tuple(factors_derivs[f"p{k}"])) for k, up in enumerate(uppers, start=1)
    )
    term = SchemaTerm(factors, tuple(tuple(slots[f"q{k}"]) for k in range(1, graph.m_terrestrial + 1)))
    return Schema(name or graph.text(), weight or f"w[{graph.text()}]", (term,), graph.n_aerial)


def _t(factors, slots, coeff=1):
    term = SchemaTerm(
        tuple(Factor(tuple(up), tuple(dv)) for up, dv in factors), tuple(tuple(s) for s in slots), Fraction(coeff)
    )
    term.validate()
    return term


def symmetric_basis() -> list[Schema]:
    """The six argument-symmetric order-2 schemata on two functions."""
    return [
        Schema("Gamma1", "a_G1", (_t([(("i2", "j2"), ["j1"]), (("i1", "j1"), ["j2"])], [["i1"], ["i2"]]),)),
        Schema("Gamma2", "a_G2", (_t([(("i1", "j1"), ["j1"]), (("i2", "j2"), ["j2"])], [["i1"], ["i2"]]),)),
        Schema(
            "Gamma3",
            "a_G3",
            (
                _t([(("i1", "j1"), []), (("i2", "j2"), ["j1", "j2"])], [["i1"], ["i2"]]),
                _t([(("i1", "j1"), []), (("i2", "j2"), ["j1", "j2"])], [["i2"], ["i1"]]),
            ),
        ),
        Schema("Gamma4", "a_G4", (_t([(("i1", "j1"), []), (("i2", "j2"), [])], [["i2", "i1"], ["j2", "j1"]]),)),
        Schema(
            "Gamma5",
            "a_G5",
            (
                _t([(("i1", "j1"), []), (("i2", "j2"), ["j1"])], [["i2", "i1"], ["j2"]]),
                _t([(("i1", "j1"), []), (("i2", "j2"), ["j1"])], [["j2"], ["i2", "i1"]]),
            ),
        ),
        Schema(
            "Gamma6",
            "a_G6",
            (
                _t([(("i2", "j2"), []), (("i1", "j1"), ["j1"])], [["i2", "i1"], ["j2"]]),
                _t([(("i2", "j2"), []), (("i1", "j1"), ["j1"])], [["j2"], ["i2", "i1"]]),
            ),
        ),
    ]


def unary_basis() -> list[Schema]:
    """Schemata of the equivalence operator: K1 at order t, K2..K6 at order t^2."""
    return [
        Schema("K1", "K1", (_t([(("i1", "j1"), ["j1"])], [["i1"]]),), order=1),
        Schema("K2", "K2", (_t([(("i2", "j2"), ["j2"]), (("i1", "j1"), ["j1"])], [["i1", "i2"]]),)),
        Schema("K3", "K3", (_t([(("i2", "j2"), []), (("i1", "j1"), ["j1", "j2"])], [["i1", "i2"]]),)),
        Schema("K4", "K4", (_t([(("i2", "j2"), ["j1"]), (("i1", "j1"), ["j2"])], [["i1", "i2"]]),)),
        Schema("K5", "K5", (_t([(("i1", "j1"), ["i1"]), (("i2", "j2"), ["j2", "j1"])], [["i2"]]),)),
        Schema("K6", "K6", (_t([(("i1", "j1"), ["j2", "j1"]), (("i2", "j2"), ["i1"])], [["i2"]]),)),
    ]


def class_of(graph: KGraph, classes: Sequence[GraphClass]) -> tuple[GraphClass, int]:
    """Class containing ``graph`` (with loops allowed) and the sign relating them."""
    g = KGraph(graph.n_aerial, graph.m_terrestrial, graph.edges, True)
    for cls in classes:
        for member, sign in cls.members:
            if KGraph(member.n_aerial, member.m_terrestrial, member.edges, True) == g:
                return cls, sign
    raise KeyError(f"{graph} matches no class")
