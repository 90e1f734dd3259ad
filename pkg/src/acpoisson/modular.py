"""Modular vector fields and unimodularity certificates.

The modular field of the assembled bivector relative to the chart volume
(scaled by a positive factor a) has components div_a(X_{coordinate}).  Its
bigraded form

    Z_(1,0) = -i_{kappa theta + d_(1,0)kappa} hor_1^hor_2,
    Z_(0,1) = i_{d_(0,1)beta + kappa rho} Q_V

is checked against the direct divergence route; certificates (h, K, and an
optional Casimir factor kappa0) are verified, never solved for.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import calculus as ca
from . import connection as cn
from . import triple as tr
from .calculus import CoordVector
from .errors import MissingCertificate, ZeroVolumeFactor
from .fields import ConstField, Field, FuncField, as_field
from .reports import VerificationReport, residual_block

Y_SLOTS = (2, 3, 4)


@dataclass
class VolumeFactor:
    """Nowhere-vanishing scale factor for the chart volume."""

    a: Field

    def __post_init__(self):
        self.a = as_field(self.a)

    def check_nonvanishing(self, pts):
        vals = self.a.at(pts, 0).value
        if np.any(vals == 0.0):
            raise ZeroVolumeFactor("volume factor vanishes on the sample set")


@dataclass
class UnimodularityCertificate:
    """Candidate data (h, K, kappa0) for the unimodularity criteria."""

    h: Field
    K: Field | None = None
    kappa0: Field | None = None

    def __post_init__(self):
        self.h = as_field(self.h)
        if self.K is not None:
            self.K = as_field(self.K)
        if self.kappa0 is not None:
            self.kappa0 = as_field(self.kappa0)


def modular_direct_fields(triple: tr.PoissonTriple, a=None) -> CoordVector:
    """Components of the modular field as fields: Z^m = (1/a) d_l (a Pi^{ml})."""
    m = triple.pi_matrix()
    comps = [ConstField(0.0)] * 5
    for (mu, nu), f in m.items():
        comps[mu] = comps[mu] + f.partial(nu)
        comps[nu] = comps[nu] - f.partial(mu)
        if a is not None:
            comps[mu] = comps[mu] + f * a.partial(nu) / a
            comps[nu] = comps[nu] - f * a.partial(mu) / a
    return CoordVector(comps)


def modular_direct(triple: tr.PoissonTriple, a, p):
    """Modular field values at p relative to the volume scaled by ``a``."""
    a = None if a is None else as_field(a)
    if a is not None and isinstance(a, ConstField) and a.c == 1.0:
        a = None
    if a is not None and np.any(a.at(p, 0).value == 0.0):
        raise ZeroVolumeFactor("volume factor vanishes at a requested point")
    return modular_direct_fields(triple, a).values(p)


def modular_bigraded(triple: tr.PoissonTriple, p):
    """Bigraded components: (hor-frame pair, vertical triple)."""
    conn = triple.conn
    kj = triple.kappa.at(p, 1)
    th = [f.at(p, 0).value for f in _theta_fields(conn)]
    alpha = [kj.value * th[i] + ca.hor_apply(conn, i + 1, triple.kappa).at(p, 0).value for i in range(2)]
    hor_part = np.stack([alpha[1], -np.asarray(alpha[0])])
    # nu = d_(0,1) beta + kappa rho on the pairs (2,3), (1,3), (1,2)
    bj = [c.at(p, 1) for c in triple.beta.comps]
    rho_v = [f.at(p, 0).value for f in cn.rho_components(conn)]
    rho_pairs = {(1, 2): -np.asarray(rho_v[0]), (0, 2): np.asarray(rho_v[1]), (0, 1): -np.asarray(rho_v[2])}
    nu = {}
    for (a, b), rv in rho_pairs.items():
        dab = bj[b].grad[Y_SLOTS[a]] - bj[a].grad[Y_SLOTS[b]]
        nu[(a, b)] = dab + kj.value * rv
    vert = np.stack([nu[(1, 2)], -nu[(0, 2)], nu[(0, 1)]])
    return hor_part, vert


def _theta_fields(conn):
    out = []
    for i in (1, 2):
        acc = ConstField(0.0)
        for a in range(3):
            acc = acc - conn.gamma[i - 1][a].partial(Y_SLOTS[a])
        out.append(acc)
    return out


def bigraded_to_coordinates(triple: tr.PoissonTriple, hor_part, vert, p):
    """Convert (hor-frame, vertical) components to the coordinate frame."""
    gv = triple.conn.gamma_values(p)  # (2, 3, ...)
    out = np.zeros((5,) + np.shape(hor_part[0]))
    out[0], out[1] = hor_part[0], hor_part[1]
    for a in range(3):
        out[2 + a] = vert[a] - hor_part[0] * gv[0, a] - hor_part[1] * gv[1, a]
    return out


def bigraded_vs_direct_residual(triple: tr.PoissonTriple, p):
    hor_part, vert = modular_bigraded(triple, p)
    direct = modular_direct(triple, None, p)
    return np.max(np.abs(bigraded_to_coordinates(triple, hor_part, vert, p) - direct), axis=0)


def renormalization_check(triple: tr.PoissonTriple, a, p):
    """Residual of Z^{a Omega} = Z^Omega - (1/a) i_{da} Pi at p."""
    a = as_field(a)
    av = a.at(p, 0).value
    if np.any(av == 0.0):
        raise ZeroVolumeFactor("volume factor vanishes at a requested point")
    za = modular_direct(triple, a, p)
    z1 = modular_direct(triple, None, p)
    xa = tr.hamiltonian_field(triple, a).values(p)
    return np.max(np.abs(za - (z1 - xa / av)), axis=0)


def closedness_check(triple: tr.PoissonTriple, p):
    """Residuals (|d_(0,1)beta|, theta-coefficients-Casimir, |d_(1,0)theta|)."""
    bj = [c.at(p, 1) for c in triple.beta.comps]
    dbeta = 0.0
    for a in range(3):
        for b in range(a + 1, 3):
            dbeta = np.maximum(dbeta, np.abs(bj[b].grad[Y_SLOTS[a]] - bj[a].grad[Y_SLOTS[b]]))
    thf = _theta_fields(triple.conn)
    bv = triple.beta.values(p)
    th_cas = 0.0
    for f in thf:
        grad_v = f.at(p, 1).grad[2:]
        th_cas = np.maximum(th_cas, np.max(np.abs(np.cross(grad_v, bv, axis=0)), axis=0))
    dtheta = np.abs(
        ca.hor_apply(triple.conn, 1, thf[1]).at(p, 0).value
        - ca.hor_apply(triple.conn, 2, thf[0]).at(p, 0).value
    )
    return {"dbeta": dbeta, "theta_casimir": th_cas, "dtheta": dtheta}


def _coordinate_fields():
    from .fields import CoordField

    return [CoordField(k) for k in range(5)]


def test_hamiltonians(seed=7):
    """Five coordinate functions plus three seeded random cubic polynomials."""
    from .fields import ExprField

    rng = np.random.default_rng(seed)
    names = ["x1", "x2", "y1", "y2", "y3"]
    polys = []
    for _ in range(3):
        terms = []
        for _ in range(4):
            c = rng.uniform(-1, 1)
            picks = rng.choice(names, size=rng.integers(1, 4), replace=True)
            terms.append(f"{c:.6f}*" + "*".join(picks))
        polys.append(ExprField(" + ".join(terms)))
    return _coordinate_fields() + polys


def invariant_divergence_residual(triple: tr.PoissonTriple, density, p, hamiltonians=None):
    """Max over test Hamiltonians of |div_(density)(X_F)| at p."""
    hams = hamiltonians if hamiltonians is not None else test_hamiltonians()
    worst = 0.0
    for F in hams:
        X = tr.hamiltonian_field(triple, F)
        worst = np.maximum(worst, np.abs(ca.divergence(X, p, density)))
    return worst


def unimod_coupling_check(
    triple: tr.PoissonTriple, cert: UnimodularityCertificate, pts, tol=1e-9, div_tol=1e-6
) -> VerificationReport:
    """Coupling-domain criterion: theta exact, h a Casimir, volume invariant."""
    if cert is None or cert.h is None:
        raise MissingCertificate("the coupling-domain check needs a primitive h")
    mask = triple.coupling_mask(pts)
    pts = pts[:, mask]
    report = VerificationReport(name="unimodularity-coupling")
    thf = _theta_fields(triple.conn)
    exact = 0.0
    for i in (1, 2):
        resid = thf[i - 1] + ca.hor_apply(triple.conn, i, cert.h)
        exact = np.maximum(exact, np.abs(resid.at(pts, 0).value))
    report.add(residual_block("theta-exactness", exact, pts, tol))
    _, h_cas = tr.casimir_residual(triple, cert.h, pts)
    report.add(residual_block("h-casimir", h_cas, pts, tol))
    density = FuncField("exp", cert.h) / triple.kappa
    div = invariant_divergence_residual(triple, density, pts)
    report.add(residual_block("invariant-volume-divergence", div, pts, div_tol))
    return report


def unimod_global_check(
    triple: tr.PoissonTriple, cert: UnimodularityCertificate, pts, tol=1e-9, div_tol=1e-6
) -> VerificationReport:
    """Global criterion: coupling check, kappa factorization, K Casimir, invariance."""
    if cert is None or cert.K is None:
        raise MissingCertificate("the global check needs a factor K")
    report = unimod_coupling_check(triple, cert, pts, tol=tol, div_tol=div_tol)
    report.name = "unimodularity-global"
    kv = triple.kappa_values(pts)
    mask = triple.coupling_mask(pts)
    kappa0 = cert.kappa0 if cert.kappa0 is not None else ConstField(1.0)
    factor = FuncField("exp", cert.h) * kappa0 * cert.K
    K_vals = cert.K.at(pts, 0).value
    if np.any(K_vals == 0.0):
        raise ZeroVolumeFactor("certificate factor K vanishes on the sample set")
    fact_res = np.abs(kv - factor.at(pts, 0).value)[mask]
    report.add(residual_block("kappa-factorization", fact_res, pts[:, mask], tol))
    zero_mask = ~mask
    if np.any(zero_mask):
        _, k_cas = tr.casimir_residual(triple, cert.K, pts[:, zero_mask])
        report.add(residual_block("K-casimir-on-zero-set", k_cas, pts[:, zero_mask], tol))
    div = invariant_divergence_residual(triple, ConstField(1.0) / cert.K, pts)
    report.add(residual_block("global-volume-divergence", div, pts, div_tol))
    return report
