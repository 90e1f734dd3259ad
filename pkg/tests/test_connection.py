import numpy as np

from acpoisson import calculus as ca
from acpoisson import connection as cn
from acpoisson import fuzz
from acpoisson.fields import ConstField, ExprField
from acpoisson.graded import GradedElement, interior
from acpoisson.strata import halton_points


def test_flat_horizontal_lift(pts):
    flat = cn.Connection.flat()
    v = cn.horizontal_lift(1, flat).values(pts)
    assert np.all(v[0] == 1.0) and np.max(np.abs(v[1:])) == 0.0


def test_example_horizontal_lift(sec5, pts):
    # gamma_i^a = -1 for a in {2,3}: hor_i = d/dx_i + d/dy2 + d/dy3
    for i in (1, 2):
        v = cn.horizontal_lift(i, sec5.conn).values(pts)
        assert np.all(v[i - 1] == 1.0)
        assert np.max(np.abs(v[2])) == 0.0
        assert np.all(v[3] == 1.0) and np.all(v[4] == 1.0)


def test_deformed_lift_components(so3_coupled, pts):
    # mu = (y3, 0) shifts hor_1 by eps(y2 d/dy1 - y1 d/dy2)
    from acpoisson import gauge as ga

    G = ga.GaugeData(mu=(ExprField("y3"), ConstField(0.0)), c=ConstField(0.0))
    Tg = ga.family(so3_coupled, G, 0.05, probe=pts)
    v = cn.horizontal_lift(1, Tg.conn).values(pts)
    np.testing.assert_allclose(v[2], 0.05 * pts[3], atol=1e-15)
    np.testing.assert_allclose(v[3], -0.05 * pts[2], atol=1e-15)
    assert np.max(np.abs(v[4])) == 0.0


def test_theta_zero_cases(sec5, pts):
    assert cn.theta(sec5.conn).at(pts).norm() == 0.0
    assert cn.theta(cn.Connection.flat()).at(pts).norm() == 0.0


def test_theta_zero_for_closed_beta_deformation(so3_coupled, pts):
    from acpoisson import gauge as ga

    G = ga.GaugeData(mu=(ExprField("x1*y3 + y1*y2"), ExprField("y2^2")), c=ConstField(0.0))
    Tg = ga.family(so3_coupled, G, 0.05, probe=pts)
    assert cn.theta(Tg.conn).at(pts).norm() <= 1e-12


def test_rho_flat_and_constant(sec5, pts):
    assert cn.rho(cn.Connection.flat()).at(pts).norm() == 0.0
    assert cn.rho(sec5.conn).at(pts).norm() == 0.0


def test_theta_rho_dual_formula_campaign(rng):
    # volume route equals component route for random polynomial connections
    worst_t = worst_r = 0.0
    for k in range(100):
        conn = fuzz.random_connection(rng)
        pts = halton_points(50, [(-1, 1)] * 5, seed=k)
        worst_t = max(worst_t, (cn.theta(conn).at(pts) - cn.theta_from_volume(conn, pts)).norm())
        worst_r = max(worst_r, (cn.rho(conn).at(pts) - cn.rho_from_volume(conn, pts)).norm())
    assert worst_t <= 1e-10 and worst_r <= 1e-10


def test_f4_identities_campaign(rng):
    worst = 0.0
    for k in range(50):
        conn = fuzz.random_connection(rng)
        pts = halton_points(50, [(-1, 1)] * 5, seed=k)
        worst = max(worst, max(cn.f4_residuals(conn, pts)))
    assert worst <= 1e-10


def test_curvature_flat_zero(pts):
    assert np.max(np.abs(cn.curvature(cn.Connection.flat(), pts))) == 0.0


def test_curvature_commutator_vs_components(rng):
    worst = 0.0
    for k in range(50):
        conn = fuzz.random_connection(rng)
        pts = halton_points(50, [(-1, 1)] * 5, seed=k)
        curv = cn.curvature(conn, pts)
        rc = np.stack([f.at(pts, 0).value for f in cn.rho_components(conn)])
        worst = max(worst, float(np.max(np.abs(curv - rc))))
    assert worst <= 1e-10


def test_curvature_single_component_case(pts):
    conn = cn.Connection([["y2", "0", "0"], ["0", "0", "0"]])
    curv = cn.curvature(conn, pts)
    rc = np.stack([f.at(pts, 0).value for f in cn.rho_components(conn)])
    assert np.max(np.abs(curv - rc)) == 0.0


def test_curvature_volume_identity(rng):
    # i_{Curv} Omega_V + Omega_H(hor_1, hor_2) rho = 0, with the pairing = 1
    for k in range(10):
        conn = fuzz.random_connection(rng)
        pts = halton_points(20, [(-1, 1)] * 5, seed=k)
        curv = cn.curvature(conn, pts)
        icurv = interior(
            GradedElement.multivector(
                {((), (1,)): curv[0], ((), (2,)): curv[1], ((), (3,)): curv[2]}
            ),
            GradedElement.form({((), (1, 2, 3)): np.ones(pts.shape[1])}),
        )
        assert (icurv + cn.rho(conn).at(pts)).norm() <= 1e-12


def test_shift_identity_and_additivity(rng, pts):
    conn = fuzz.random_connection(rng)
    zero = cn.ConnectionShift.zero()
    same = cn.shift(conn, zero)
    assert np.max(np.abs(same.gamma_values(pts) - conn.gamma_values(pts))) == 0.0
    x1 = cn.ConnectionShift([[fuzz.random_poly_expr(rng) for _ in range(3)] for _ in range(2)])
    x2 = cn.ConnectionShift([[fuzz.random_poly_expr(rng) for _ in range(3)] for _ in range(2)])
    once = cn.shift(cn.shift(conn, x1), x2)
    both = cn.shift(conn, x1 + x2)
    assert np.max(np.abs(once.gamma_values(pts) - both.gamma_values(pts))) <= 1e-12


def test_gauge_shift_reproduces_deformed_components(so3, pts):
    # Xi = -(vertical sharp)(d_(0,1) mu) against beta gives the
    # bilinear eps^{abc} (dmu_i/dy^b) beta_c components
    mu = (ExprField("y3"), ConstField(0.0))
    xi = cn.ConnectionShift.gauge(mu, so3.beta, epsilon=1.0)
    shifted = cn.shift(cn.Connection.flat(), xi)
    gv = shifted.gamma_values(pts)
    expect = np.zeros_like(gv)
    expect[0, 0] = -pts[3]
    expect[0, 1] = pts[2]
    assert np.max(np.abs(gv - expect)) == 0.0


def test_horizontal_rank_invariant_under_shift(rng, pts):
    # the (2,0) block of any bivector is unchanged by re-bigrading
    for _ in range(20):
        T = fuzz.random_flat_casimir_triple(rng)
        xi = cn.ConnectionShift(
            [[fuzz.random_poly_expr(rng, scale=0.5) for _ in range(3)] for _ in range(2)]
        )
        shifted = cn.shift(T.conn, xi)
        mov = ca.coord_to_moving_bivector(T.pi_coord(), shifted)
        before = np.asarray(T.kappa_values(pts))
        after = np.asarray(mov.coeffs[((1, 2), ())].at(pts, 0).value)
        assert np.array_equal(before, after)
        rank_before = 2 * (np.abs(before) > 1e-9)
        rank_after = 2 * (np.abs(after) > 1e-9)
        assert np.array_equal(rank_before, rank_after)
