from fractions import Fraction

import pytest
from hypothesis import strategies as st

from kstar.exactmath import ORDINARY, Poly

small_fractions = st.fractions(min_value=-5, max_value=5, max_denominator=6)


@st.composite
def polys(draw, chart=ORDINARY, max_degree=2, max_terms=4):
    terms = {}
    for _ in range(draw(st.integers(0, max_terms))):
        exps = tuple(draw(st.integers(0, max_degree)) for _ in chart.variables)
        if sum(exps) <= max_degree:
            terms[exps] = draw(small_fractions)
    return Poly(chart, terms)


@pytest.fixture(scope="session")
def table2():
    from kstar.takhtajan import star_table

    return star_table(2)


@pytest.fixture(scope="session")
def exp_tensor():
    from kstar.poisson import exp_chart_tensor

    return exp_chart_tensor(3)


@pytest.fixture(scope="session")
def solved():
    from kstar.kontsevich import solve_weights

    return solve_weights()


@pytest.fixture(scope="session")
def exp_system():
    from kstar.solver import assemble_exponential_system

    return assemble_exponential_system()


@pytest.fixture(scope="session")
def ordinary_system(solved):
    from kstar.solver import assemble_ordinary_system

    return assemble_ordinary_system(solved.weights)


def frac(x) -> Fraction:
    return Fraction(x)
