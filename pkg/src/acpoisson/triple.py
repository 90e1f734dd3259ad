"""Poisson triples (connection, scalar factor, vertical 1-form).

The bivector assembled from a triple is Pi = kappa hor_1 ^ hor_2 + P_beta
with P_beta = beta_1 dy2^dy3 + beta_2 dy3^dy1 + beta_3 dy1^dy2.  The triple
is Poisson exactly when the three integrability residuals vanish; that
equivalence (checked against the raw Schouten Jacobiator) is the backbone of
the verification suite.
"""

from __future__ import annotations

import numpy as np

from . import calculus as ca
from . import connection as cn
from .calculus import CoordVector, FieldElement
from .errors import (
    NotAlmostCoupling,
    NotCasimir,
    NotFlat,
    NotPoissonConnection,
    OutsideCouplingDomain,
)
from .fields import ConstField, as_field
from .graded import GradedElement
from .reports import CheckBlock, VerificationReport, residual_block

Y_SLOTS = (2, 3, 4)


class VerticalOneForm:
    """beta = beta_a eta^a, stored by its three coefficient fields."""

    def __init__(self, comps):
        if len(comps) != 3:
            raise ValueError("a vertical 1-form has three components")
        self.comps = [as_field(c) for c in comps]

    @classmethod
    def zero(cls):
        return cls([0.0, 0.0, 0.0])

    def as_form(self) -> FieldElement:
        return FieldElement.form({((), (a,)): self.comps[a - 1] for a in (1, 2, 3)})

    def values(self, p):
        return np.stack([c.at(p, 0).value for c in self.comps])

    def norm_values(self, p):
        return np.sqrt(np.sum(self.values(p) ** 2, axis=0))


class Section:
    """A section y = s(x): three fields depending on the base variables only."""

    def __init__(self, comps):
        self.comps = [as_field(c) for c in comps]
        probe = np.zeros((5, 4))
        probe[2:] = np.arange(12).reshape(3, 4)
        base = np.stack([c.at(probe, 0).value for c in self.comps])
        if np.ptp(base, axis=1).max() > 0:
            raise ValueError("section components must depend on x1, x2 only")

    def graph_points(self, xs):
        """Lift base points (2, n) to chart points (5, n) on the graph."""
        xs = np.asarray(xs, dtype=float)
        pts = np.zeros((5,) + xs.shape[1:])
        pts[0], pts[1] = xs[0], xs[1]
        for a in range(3):
            pts[2 + a] = self.comps[a].at(pts, 0).value
        return pts


def vertical_poisson(beta: VerticalOneForm) -> FieldElement:
    """Vertical bivector with {y1,y2} = beta_3, {y2,y3} = beta_1, {y3,y1} = beta_2."""
    from .calculus import _is_zero_const

    coeffs = {}
    for key, comp, sign in (
        (((), (2, 3)), beta.comps[0], 1.0),
        (((), (1, 3)), beta.comps[1], -1.0),
        (((), (1, 2)), beta.comps[2], 1.0),
    ):
        if _is_zero_const(comp):
            continue
        coeffs[key] = comp if sign > 0 else comp * -1.0
    return FieldElement.multivector(coeffs)


class PoissonTriple:
    """Triple (gamma, kappa, beta); Poisson-ness is verified, not assumed.

    ``domain`` optionally carries a denominator field whose zero set bounds
    the region where the triple is defined (gauge images use this).
    """

    def __init__(self, conn: cn.Connection, kappa, beta: VerticalOneForm, domain=None):
        self.conn = conn
        self.kappa = as_field(kappa)
        self.beta = beta if isinstance(beta, VerticalOneForm) else VerticalOneForm(beta)
        self.domain = domain
        self._pi_coord = None
        self._pi_matrix = None

    # assembled tensors ----------------------------------------------------

    def pi_moving(self) -> FieldElement:
        out = vertical_poisson(self.beta)
        out._add(((1, 2), ()), self.kappa)
        return out

    def pi_coord(self) -> FieldElement:
        if self._pi_coord is None:
            self._pi_coord = ca.moving_to_coord_bivector(self.pi_moving(), self.conn)
        return self._pi_coord

    def pi_matrix(self):
        if self._pi_matrix is None:
            self._pi_matrix = ca.bivector_matrix_fields(self.pi_coord())
        return self._pi_matrix

    def p_beta_matrix(self):
        return ca.bivector_matrix_fields(vertical_poisson(self.beta))

    def kappa_values(self, p):
        return self.kappa.at(p, 0).value

    def kappa_tol(self, p, base=1e-9):
        """Coupling-domain tolerance scaled by the sampled magnitude of kappa."""
        scale = float(np.max(np.abs(self.kappa_values(p)))) if np.size(p) else 0.0
        return base * (1.0 + scale)

    def coupling_mask(self, p, kappa_tol=None):
        kv = self.kappa_values(p)
        tol = self.kappa_tol(p) if kappa_tol is None else kappa_tol
        return np.abs(kv) > tol

    def domain_mask(self, p, tol=1e-9):
        if self.domain is None:
            return np.ones(np.shape(np.asarray(p)[0]), dtype=bool)
        return np.abs(self.domain.at(p, 0).value) > tol


def assemble_pi(triple: PoissonTriple) -> FieldElement:
    """Coordinate-frame bivector of the triple."""
    return triple.pi_coord()


def recover_triple(pi: FieldElement, conn: cn.Connection, probe=None, tol=1e-9):
    """Invert assembly: kappa from the horizontal block, beta from the vertical.

    ``pi`` is a coordinate-frame bivector; the mixed component must vanish in
    the bigrading of ``conn`` (checked on ``probe`` points).
    """
    mov = ca.coord_to_moving_bivector(pi, conn)
    if probe is None:
        from .strata import halton_points

        probe = halton_points(64, [(-1.0, 1.0)] * 5)
    mixed = 0.0
    for key, f in mov.coeffs.items():
        if (len(key[0]), len(key[1])) == (1, 1):
            mixed = max(mixed, float(np.max(np.abs(f.at(probe, 0).value))))
    if mixed > tol:
        raise NotAlmostCoupling(mixed)
    kappa = mov.coeffs.get(((1, 2), ()), ConstField(0.0))
    beta = VerticalOneForm(
        [
            mov.coeffs.get(((), (2, 3)), ConstField(0.0)),
            mov.coeffs.get(((), (1, 3)), ConstField(0.0)) * -1.0,
            mov.coeffs.get(((), (1, 2)), ConstField(0.0)),
        ]
    )
    return kappa, beta


# residuals ------------------------------------------------------------------


def jacobiator(triple: PoissonTriple, p):
    """Schouten bracket of Pi with itself at p: 10 trivector components."""
    m = triple.pi_matrix()
    return ca.schouten_bivectors(m, m, p)


def jacobiator_norm(triple: PoissonTriple, p):
    comps = jacobiator(triple, p)
    return np.max(np.stack([np.abs(np.asarray(v)) for v in comps.values()]), axis=0)


def ic_residuals(triple: PoissonTriple, p):
    """The three integrability residual groups at p (coordinate formulas)."""
    g = [[triple.conn.gamma[i][a] for a in range(3)] for i in range(2)]
    bj = [triple.beta.comps[a].at(p, 1) for a in range(3)]
    bv = [j.value for j in bj]
    kj = triple.kappa.at(p, 1)
    rho_v = [f.at(p, 0).value for f in cn.rho_components(triple.conn)]
    gv = [[g[i][a].at(p, 1) for a in range(3)] for i in range(2)]

    def dyb(jet, a):
        return jet.grad[Y_SLOTS[a]]

    # ic1: cyclic sum of (d beta_a / dy^b - d beta_b / dy^a) beta_c
    ic1 = 0.0
    for a, b, c in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
        ic1 = ic1 + (dyb(bj[a], b) - dyb(bj[b], a)) * bv[c]

    # ic2[i][a] = kappa (d beta_a/dx^i - g_i^b d beta_a/dy^b
    #                    - beta_b d g_i^b/dy^a + beta_a d g_i^b/dy^b)
    ic2 = np.zeros((2, 3) + np.shape(kj.value))
    for i in range(2):
        for a in range(3):
            term = bj[a].grad[i]
            for b in range(3):
                term = term - gv[i][b].value * dyb(bj[a], b)
                term = term - bv[b] * dyb(gv[i][b], a)
                term = term + bv[a] * dyb(gv[i][b], b)
            ic2[i, a] = kj.value * term

    # ic3 over pairs (a,b): dk/dy^a beta_b - dk/dy^b beta_a + eps_abc k^2 rho^c
    k2 = kj.value**2
    ic3 = np.zeros((3,) + np.shape(kj.value))
    for idx, (a, b, c, sign) in enumerate([(0, 1, 2, 1.0), (0, 2, 1, -1.0), (1, 2, 0, 1.0)]):
        ic3[idx] = dyb(kj, a) * bv[b] - dyb(kj, b) * bv[a] + sign * k2 * rho_v[c]
    return {"ic1": np.abs(ic1), "ic2": np.abs(ic2), "ic3": np.abs(ic3)}


def ic_norm(triple: PoissonTriple, p):
    r = ic_residuals(triple, p)
    return np.max(
        np.stack([r["ic1"], r["ic2"].max(axis=(0, 1)), r["ic3"].max(axis=0)]), axis=0
    )


def verdict_scale(triple: PoissonTriple, p):
    """1 + max magnitude of the kappa/beta/gamma 1-jets at p."""
    mags = []
    for f in [triple.kappa, *triple.beta.comps, *triple.conn.gamma[0], *triple.conn.gamma[1]]:
        jet = f.at(p, 1)
        mags.append(np.abs(jet.value))
        mags.append(np.max(np.abs(jet.grad), axis=0))
    return 1.0 + np.max(np.stack(mags), axis=0)


def equivalence_check(triple: PoissonTriple, samples, tol=1e-9) -> VerificationReport:
    """Pointwise agreement of the integrability verdict and the Jacobiator verdict."""
    pts = np.asarray(samples, dtype=float)
    mask = triple.domain_mask(pts)
    pts = pts[:, mask] if pts.ndim == 2 else pts
    ic = ic_norm(triple, pts)
    jac = jacobiator_norm(triple, pts)
    scale = verdict_scale(triple, pts)
    ic_pass = ic <= tol
    jac_pass = jac <= tol * scale
    disagree = ic_pass != jac_pass
    report = VerificationReport(name="equivalence")
    report.add(residual_block("integrability", ic, pts, tol))
    report.add(
        CheckBlock(
            check_id="jacobiator",
            max_residual=float(np.max(jac)),
            mean_residual=float(np.mean(jac)),
            tol=tol,
            passed=bool(np.all(jac_pass)),
            worst_point=pts[:, int(np.argmax(jac))].tolist() if pts.ndim == 2 else None,
            n_samples=int(np.size(jac)),
            note="tolerance scaled by 1 + jet magnitudes",
        )
    )
    if np.any(disagree):
        idx = np.nonzero(disagree)[0]
        report.disagreements = [
            {
                "point": pts[:, i].tolist(),
                "ic": float(ic[i]),
                "jacobiator": float(jac[i]),
            }
            for i in idx[:32]
        ]
    report.meta["both_fail_fraction"] = float(np.mean(~ic_pass & ~jac_pass))
    return report


# brackets and Hamiltonian fields ---------------------------------------------


def poisson_bracket(triple: PoissonTriple, f, g, p):
    """{f, g} by the split formula: horizontal ratio plus vertical triple product.

    The ratio of a (2,0)-form by Omega_H is the unique scalar multiple; the
    vertical term is the determinant of the vertical gradients against beta.
    """
    f, g = as_field(f), as_field(g)
    jf, jg = f.at(p, 1), g.at(p, 1)
    hf = [ca.hor_apply(triple.conn, i, f).at(p, 0).value for i in (1, 2)]
    hg = [ca.hor_apply(triple.conn, i, g).at(p, 0).value for i in (1, 2)]
    horizontal = triple.kappa_values(p) * (hf[0] * hg[1] - hf[1] * hg[0])
    bv = triple.beta.values(p)
    vertical = np.einsum("a...,a...->...", jf.grad[2:], np.cross(jg.grad[2:], bv, axis=0))
    return horizontal + vertical


def poisson_bracket_direct(triple: PoissonTriple, f, g, p):
    """{f, g} = Pi(df, dg) from the assembled coordinate bivector."""
    f, g = as_field(f), as_field(g)
    gf = f.at(p, 1).grad
    gg = g.at(p, 1).grad
    vals = ca.matrix_values(triple.pi_matrix(), p, order=0)
    return np.einsum("mn...,m...,n...->...", vals, gf, gg)


def hamiltonian_field(triple: PoissonTriple, F) -> CoordVector:
    """X_F = i_{dF} Pi as a coordinate vector field: X^m = sum_n Pi^{nm} dF/dn."""
    F = as_field(F)
    m = triple.pi_matrix()
    comps = [ConstField(0.0)] * 5
    for (mu, nu), f in m.items():
        comps[nu] = comps[nu] + f * F.partial(mu)
        comps[mu] = comps[mu] - f * F.partial(nu)
    return CoordVector(comps)


def hamiltonian_parts(triple: PoissonTriple, F, p):
    """Bigraded pieces of X_F: hor-frame pair and vertical triple."""
    F = as_field(F)
    kv = triple.kappa_values(p)
    h1F = ca.hor_apply(triple.conn, 1, F).at(p, 0).value
    h2F = ca.hor_apply(triple.conn, 2, F).at(p, 0).value
    hor_part = np.stack([-kv * h2F, kv * h1F])  # coefficients of hor_1, hor_2
    bv = triple.beta.values(p)
    dFv = F.at(p, 1).grad[2:]
    vert = np.cross(bv, dFv, axis=0)
    return hor_part, vert


def casimir_residual(triple: PoissonTriple, c, p):
    """Pair (|kappa d_{1,0} c|, |d_{0,1} c ^ beta|), max-norms at p."""
    c = as_field(c)
    kv = triple.kappa_values(p)
    r1 = np.max(
        np.stack([np.abs(kv * ca.hor_apply(triple.conn, i, c).at(p, 0).value) for i in (1, 2)]),
        axis=0,
    )
    dcv = c.at(p, 1).grad[2:]
    bv = triple.beta.values(p)
    r2 = np.max(np.abs(np.cross(dcv, bv, axis=0)), axis=0)
    return r1, r2


# coupling-domain identities ---------------------------------------------------


def _require_coupling(triple, p, kappa_tol=None):
    mask = triple.coupling_mask(p, kappa_tol)
    if not np.all(mask):
        raise OutsideCouplingDomain("kappa vanishes at a requested point")


def poisson_connection_residual(triple: PoissonTriple, p, kappa_tol=None):
    """Max over u in {dx1, dx2} of |L_{hor u} P_beta| at p."""
    _require_coupling(triple, p, kappa_tol)
    pb = triple.p_beta_matrix()
    worst = 0.0
    for i in (1, 2):
        comps = ca.lie_derivative_bivector(cn.horizontal_lift(i, triple.conn), pb, p)
        worst = np.maximum(worst, np.max(np.stack([np.abs(v) for v in comps.values()]), axis=0))
    return worst


def cocycle_residual(triple: PoissonTriple, p, kappa_tol=None):
    """Max-norm of the Schouten bracket of Q_H with P_beta at p."""
    _require_coupling(triple, p, kappa_tol)
    qh = ca.moving_to_coord_bivector(
        FieldElement.multivector({((1, 2), ()): -1.0}), triple.conn
    )
    comps = ca.schouten_bivectors(qh, triple.p_beta_matrix(), p)
    return np.max(np.stack([np.abs(v) for v in comps.values()]), axis=0)


def curvature_identity_residual(triple: PoissonTriple, p, kappa_tol=None):
    """Curvature vs -P_beta-sharp d(1/kappa) at coupling-domain points.

    The gap is normalized by the natural magnitude of the 1/kappa^2 terms so
    the check stays meaningful arbitrarily close to the domain boundary,
    where the raw quotient amplifies rounding noise without bound.
    """
    _require_coupling(triple, p, kappa_tol)
    curv = cn.curvature(triple.conn, p)
    kj = triple.kappa.at(p, 1)
    bv = triple.beta.values(p)
    k2 = kj.value**2
    rhs = np.cross(bv, kj.grad[2:], axis=0) / k2
    scale = 1.0 + np.abs(curv) + _cross_magnitude(bv, kj.grad[2:]) / k2
    return np.max(np.abs(curv - rhs) / scale, axis=0)


def _cross_magnitude(u, v):
    """Entrywise magnitude bound of the cross product (no cancellation)."""
    au, av = np.abs(u), np.abs(v)
    return np.stack(
        [
            au[1] * av[2] + au[2] * av[1],
            au[2] * av[0] + au[0] * av[2],
            au[0] * av[1] + au[1] * av[0],
        ]
    )


def c2_residual(triple: PoissonTriple, p):
    """|d_{1,0} beta + beta ^ theta| componentwise max at p."""
    beta_form = triple.beta.as_form()
    d10 = ca.d_component(beta_form, triple.conn, (1, 0))
    th = cn.theta(triple.conn)
    return (d10 + beta_form.wedge(th)).at(p).norm()


def c3_residual(triple: PoissonTriple, p, kappa_tol=None):
    """d_{0,1}(1/kappa) ^ beta + rho at coupling-domain points.

    Residuals are normalized by the uncancelled magnitude of the quotient
    terms (see curvature_identity_residual) to stay well conditioned near
    the boundary of the coupling domain.
    """
    _require_coupling(triple, p, kappa_tol)
    kj = triple.kappa.at(p, 1)
    k2 = kj.value**2
    dinv = -kj.grad[2:] / k2  # vertical gradient of 1/kappa
    bv = triple.beta.values(p)
    rho_v = np.stack([f.at(p, 0).value for f in cn.rho_components(triple.conn)])
    # (0,2) pairs (a,b) with the matching rho component carrying -eps_{abc}
    pairs = [(1, 2, 0, -1.0), (0, 2, 1, 1.0), (0, 1, 2, -1.0)]
    worst = 0.0
    for a, b, c, sign in pairs:
        wedge_ab = dinv[a] * bv[b] - dinv[b] * bv[a]
        scale = 1.0 + np.abs(dinv[a] * bv[b]) + np.abs(dinv[b] * bv[a]) + np.abs(rho_v[c])
        worst = np.maximum(worst, np.abs(wedge_ab + sign * rho_v[c]) / scale)
    return worst


def c5_residual(triple: PoissonTriple, p):
    """|d_{0,1} kappa ^ beta| at p (meaningful near the kappa zero set)."""
    kj = triple.kappa.at(p, 1)
    bv = triple.beta.values(p)
    return np.max(np.abs(np.cross(kj.grad[2:], bv, axis=0)), axis=0)


def coupling_form(triple: PoissonTriple, p, kappa_tol=None) -> GradedElement:
    """(1/kappa) Omega_H at p; defined on the coupling domain."""
    _require_coupling(triple, p, kappa_tol)
    return GradedElement.form({((1, 2), ()): 1.0 / triple.kappa_values(p)})


def coupling_form_residual(triple: PoissonTriple, p, kappa_tol=None):
    """Defining identity: i_{i_alpha Pi_20} sigma = -alpha for alpha in {dx1, dx2}."""
    _require_coupling(triple, p, kappa_tol)
    kv = triple.kappa_values(p)
    sigma = GradedElement.form({((1, 2), ()): 1.0 / kv})
    from .graded import interior

    worst = 0.0
    pi20 = GradedElement.multivector({((1, 2), ()): kv})
    for i, alpha_key in ((1, ((1,), ())), (2, ((2,), ()))):
        alpha = GradedElement.form({alpha_key: np.ones_like(kv)})
        v = interior(alpha, pi20)
        res = interior(v, sigma) + alpha
        worst = np.maximum(worst, res.norm())
    return worst


# constructors and submanifolds -------------------------------------------------


def flat_triple(conn: cn.Connection, kappa0, beta: VerticalOneForm, samples, tol=1e-8):
    """Build a triple from a flat structure-preserving connection and a Casimir factor.

    Verifies flatness, the connection-preservation property, and the Casimir
    property of kappa0 on the sample set; raises otherwise.
    """
    kappa0 = as_field(kappa0)
    beta = beta if isinstance(beta, VerticalOneForm) else VerticalOneForm(beta)
    pts = np.asarray(samples, dtype=float)
    curv = np.max(np.abs(cn.curvature(conn, pts)), axis=0)
    if np.max(curv) > tol:
        i = int(np.argmax(curv))
        raise NotFlat(float(np.max(curv)), pts[:, i].tolist())
    pb = ca.bivector_matrix_fields(vertical_poisson(beta))
    worst = 0.0
    for i in (1, 2):
        comps = ca.lie_derivative_bivector(cn.horizontal_lift(i, conn), pb, pts)
        worst = np.maximum(worst, np.max(np.stack([np.abs(v) for v in comps.values()]), axis=0))
    if np.max(worst) > tol:
        i = int(np.argmax(worst))
        raise NotPoissonConnection(float(np.max(worst)), pts[:, i].tolist())
    dk = kappa0.at(pts, 1).grad[2:]
    bv = beta.values(pts)
    cas = np.max(np.abs(np.cross(dk, bv, axis=0)), axis=0)
    if np.max(cas) > tol:
        i = int(np.argmax(cas))
        raise NotCasimir(float(np.max(cas)), pts[:, i].tolist())
    return PoissonTriple(conn, kappa0, beta)


def submanifold_check(triple: PoissonTriple, section: Section, xs, tol=1e-9) -> VerificationReport:
    """Check the graph of a section for the invariance + vertical-vanishing pair."""
    pts = section.graph_points(xs)
    kv = triple.kappa_values(pts)
    gv = triple.conn.gamma_values(pts)  # (2, 3, n)
    n = pts.shape[1] if pts.ndim == 2 else 1
    # tangent frame of the graph: tau_i = dx_i + ds^a/dx_i dy_a
    slopes = np.stack(
        [np.stack([section.comps[a].at(pts, 1).grad[i] for a in range(3)]) for i in range(2)]
    )  # (2, 3, n)
    res1 = np.zeros(np.shape(kv))
    for i in (1, 2):
        # Pi_20-sharp dx^i: kappa hor_2 for i=1, -kappa hor_1 for i=2
        j = 2 if i == 1 else 1
        sign = 1.0 if i == 1 else -1.0
        vec = np.zeros((5,) + np.shape(kv))
        vec[j - 1] = sign * kv
        for a in range(3):
            vec[2 + a] = -sign * kv * gv[j - 1, a]
        res1 = np.maximum(res1, _distance_from_graph_tangent(vec, slopes))
    pb_vals = np.stack(
        [np.abs(np.asarray(f.at(pts, 0).value)) for f in triple.beta.comps]
    )
    res2 = np.max(pb_vals, axis=0)
    report = VerificationReport(name="poisson-submanifold")
    report.add(residual_block("horizontal-tangency", res1, pts, tol))
    report.add(residual_block("vertical-vanishing", res2, pts, tol))
    return report


def _distance_from_graph_tangent(vec, slopes):
    """Distance of vec (5,n) from span{dx_i + slopes_i} via least squares."""
    vecs = np.atleast_2d(vec.T).reshape(-1, 5)
    n = vecs.shape[0]
    out = np.zeros(n)
    for k in range(n):
        basis = np.zeros((5, 2))
        basis[0, 0] = 1.0
        basis[1, 1] = 1.0
        basis[2:, 0] = slopes[0, :, k] if slopes.ndim == 3 else slopes[0]
        basis[2:, 1] = slopes[1, :, k] if slopes.ndim == 3 else slopes[1]
        coef, *_ = np.linalg.lstsq(basis, vecs[k], rcond=None)
        out[k] = np.linalg.norm(vecs[k] - basis @ coef)
    return out if vec.ndim == 2 else out[0]
