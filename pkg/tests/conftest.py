import numpy as np
import pytest

from acpoisson import connection as cn
from acpoisson import strata as st
from acpoisson import triple as tr
from acpoisson.fields import ConstField, ExprField

BOX = [(-1, 1), (-1, 1), (-1.2, 1.2), (-1.2, 1.2), (-1.2, 1.2)]
WIDE_BOX = [(-2, 2)] * 5


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)


@pytest.fixture
def pts():
    return st.halton_points(100, BOX)


@pytest.fixture
def wide_pts():
    return st.halton_points(200, WIDE_BOX)


@pytest.fixture
def sec5():
    """Quadratic example: kappa = y1^2 - x1^2 - x2^2, beta = y1^2 eta^1."""
    conn = cn.Connection([["0", "-1", "-1"], ["0", "-1", "-1"]])
    return tr.PoissonTriple(
        conn, ExprField("y1^2 - x1^2 - x2^2"), tr.VerticalOneForm(["y1^2", "0", "0"])
    )


@pytest.fixture
def so3():
    """Purely vertical cyclic structure."""
    return tr.PoissonTriple(
        cn.Connection.flat(), ConstField(0.0), tr.VerticalOneForm(["y1", "y2", "y3"])
    )


@pytest.fixture
def so3_coupled():
    """Cyclic vertical structure with a nowhere-vanishing Casimir factor."""
    return tr.PoissonTriple(
        cn.Connection.flat(),
        ExprField("1 + y1^2 + y2^2 + y3^2"),
        tr.VerticalOneForm(["y1", "y2", "y3"]),
    )
