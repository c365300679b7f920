import json
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kstar.poisson import exp_chart_tensor
from kstar.reference import PRINTED_EXP_ROWS
from kstar.solver import (
    EXP_UNKNOWNS,
    ORDINARY_UNKNOWNS,
    InfeasibilityCertificate,
    LinSystem,
    Solution,
    assemble_exponential_system,
    assemble_ordinary_system,
    find_contradictory_pairs,
    forward_substitution,
    in_row_space,
    rank,
    solve_or_certificate,
    verify_certificate,
)

from .conftest import small_fractions

Q = Fraction


def _system(rows, unknowns=("x", "y", "z")):
    s = LinSystem(unknowns)
    for k, (coeffs, rhs) in enumerate(rows):
        s.add_row(coeffs, rhs, f"r{k}")
    return s


def test_empty_system_is_fully_free():
    sol = solve_or_certificate(LinSystem(("x", "y")))
    assert isinstance(sol, Solution)
    assert sol.nullity == 2


def test_zero_row_is_dropped():
    s = _system([((0, 0, 0), 0), ((1, 0, 0), 2), ((0, 1, 0), 3)])
    assert len(s) == 2
    sol = solve_or_certificate(s)
    assert sol.nullity == 1
    assert sol.assignment["x"] == 2 and sol.assignment["y"] == 3


def test_zero_equals_nonzero_is_infeasible():
    s = _system([((0, 0, 0), 5)])
    cert = solve_or_certificate(s)
    assert isinstance(cert, InfeasibilityCertificate)
    assert verify_certificate(s, cert)


def test_rows_are_normalized_and_merged():
    s = _system([((2, 4, 0), 6), ((1, 2, 0), 3), ((-1, -2, 0), -3)])
    assert len(s) == 1
    assert s.rows[0].coeffs == (1, 2, 0) and s.rows[0].rhs == 3
    assert s.rows[0].provenance == ["r0 (divided by 2)", "r1", "r2 (divided by -1)"]


def test_row_length_is_checked():
    with pytest.raises(ValueError):
        _system([((1, 2), 0)])


def test_certificate_for_a_simple_contradiction():
    s = _system([((1, 1, 0), 1), ((0, 1, 1), 1), ((1, 2, 1), 3)])
    cert = solve_or_certificate(s)
    assert isinstance(cert, InfeasibilityCertificate)
    assert verify_certificate(s, cert)
    assert cert.support() == [0, 1, 2]


def test_tampered_certificate_is_rejected():
    s = _system([((1, 1, 0), 1), ((0, 1, 1), 1), ((1, 2, 1), 3)])
    cert = solve_or_certificate(s)
    bad = InfeasibilityCertificate(cert.multipliers[:-1] + (cert.multipliers[-1] * 2,), cert.combined_rhs)
    assert not verify_certificate(s, bad)
    assert not verify_certificate(s, InfeasibilityCertificate(cert.multipliers[:-1], cert.combined_rhs))


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(st.tuples(small_fractions, small_fractions, small_fractions), small_fractions), min_size=1, max_size=6))
def test_solutions_satisfy_and_certificates_verify(rows):
    s = _system(rows)
    result = solve_or_certificate(s)
    if isinstance(result, Solution):
        x = [result.assignment[u] for u in s.unknowns]
        for r in s.rows:
            assert sum(c * v for c, v in zip(r.coeffs, x)) == r.rhs
        assert result.nullity == len(s.unknowns) - rank([list(r.coeffs) for r in s.rows])
    else:
        assert verify_certificate(s, result)
        coef = [list(r.coeffs) for r in s.rows]
        aug = [list(r.coeffs) + [r.rhs] for r in s.rows]
        assert rank(aug) == rank(coef) + 1


def test_verdict_is_invariant_under_row_permutation(exp_system):
    rng = random.Random(4)
    for _ in range(5):
        order = list(range(len(exp_system)))
        rng.shuffle(order)
        shuffled = exp_system.permuted(order)
        cert = solve_or_certificate(shuffled)
        assert isinstance(cert, InfeasibilityCertificate)
        assert verify_certificate(shuffled, cert)


def test_rank_and_row_space():
    s = _system([((1, 0, 1), 1), ((0, 1, 1), 2)])
    assert rank([list(r.coeffs) for r in s.rows]) == 2
    assert in_row_space(s, (1, 1, 2), 3) == (True, True)
    assert in_row_space(s, (1, 1, 2), 4) == (False, True)
    assert in_row_space(s, (0, 0, 1), 0) == (False, False)


def test_exponential_system_is_infeasible(exp_system):
    assert exp_system.unknowns == EXP_UNKNOWNS
    cert = solve_or_certificate(exp_system)
    assert isinstance(cert, InfeasibilityCertificate)
    assert verify_certificate(exp_system, cert)
    assert cert.combined_rhs != 0


def test_exponential_rows_carry_provenance(exp_system):
    for row in exp_system.rows:
        assert row.provenance
        assert all(p.startswith("pair (") and "order t^2" in p for p in row.provenance)


def test_exponential_system_rejects_low_trust_tensor():
    low = exp_chart_tensor(2)
    with pytest.raises(ValueError, match="trusted"):
        assemble_exponential_system(low)


def test_exponential_system_rejects_ordinary_tensor():
    from kstar.poisson import ordinary_tensor

    with pytest.raises(ValueError):
        assemble_exponential_system(ordinary_tensor())


def test_forward_substitution_on_printed_rows():
    out = forward_substitution(PRINTED_EXP_ROWS, 5)
    assert out["lhs"] == Q(7, 16)
    assert out["rhs"] == Q(-9, 16)


def test_forward_substitution_rejects_inconsistent_prefix():
    rows = (((1, 0, 0, 0, 0, 0), 0), ((1, 0, 0, 0, 0, 0), 1), ((0, 1, 0, 0, 0, 0), 0))
    with pytest.raises(ValueError):
        forward_substitution(rows, 2)


def test_ordinary_system_has_a_contradictory_pair(ordinary_system):
    assert ordinary_system.unknowns == ORDINARY_UNKNOWNS
    assert any("K1*K1" in n for n in ordinary_system.notes)
    pairs = find_contradictory_pairs(ordinary_system)
    assert pairs
    for i, j, cert in pairs:
        assert verify_certificate(ordinary_system, cert)
    gaps = {abs(cert.combined_rhs) for _, _, cert in pairs}
    assert gaps == {Q(1, 8)}
    cert = solve_or_certificate(ordinary_system)
    assert isinstance(cert, InfeasibilityCertificate)
    assert verify_certificate(ordinary_system, cert)


def test_ordinary_self_comparison_is_feasible(solved):
    system = assemble_ordinary_system(solved.weights, rhs="kontsevich")
    sol = solve_or_certificate(system)
    assert isinstance(sol, Solution)
    # T = Id solves it
    assert all(v == 0 for v in sol.assignment.values())


def test_ordinary_system_rejects_unknown_target(solved):
    with pytest.raises(ValueError):
        assemble_ordinary_system(solved.weights, rhs="other")


def test_system_json_round_trip(exp_system):
    data = json.loads(exp_system.dumps())
    assert data["unknowns"] == list(EXP_UNKNOWNS)
    assert len(data["rows"]) == len(exp_system)
    rebuilt = LinSystem(data["unknowns"])
    for r in data["rows"]:
        rebuilt.add_row([Q(c) for c in r["coeffs"]], Q(r["rhs"]), r["provenance"][0])
    assert [r.coeffs for r in rebuilt.rows] == [r.coeffs for r in exp_system.rows]
    assert exp_system.dumps() == assemble_exponential_system().dumps()


def test_certificate_json(exp_system):
    cert = solve_or_certificate(exp_system)
    data = cert.to_json()
    assert Q(data["combined_rhs"]) == cert.combined_rhs
    assert {int(k) for k in data["multipliers"]} == set(cert.support())
