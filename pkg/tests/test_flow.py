import numpy as np

from acpoisson import connection as cn
from acpoisson import flow as fl
from acpoisson import triple as tr
from acpoisson.fields import ConstField, ExprField

CASIMIR = "y1^2 + y2^2 + y3^2"


def test_casimir_flow_is_stationary(so3):
    traj = fl.integrate(so3, ExprField(CASIMIR), [0, 0, 0.6, -0.2, 0.3], dt=1e-2, n=50)
    drift = np.max(np.abs(traj.states - traj.states[:, :1]))
    assert drift == 0.0


def test_so3_circle_and_conservation(so3):
    traj = fl.integrate(so3, ExprField("y3"), [0, 0, 1, 0, 0], dt=1e-3, n=2000)
    # exact solution rotates (y1, y2) with angular rate 1
    t = traj.times
    np.testing.assert_allclose(traj.states[2], np.cos(t), atol=1e-9)
    np.testing.assert_allclose(traj.states[3], -np.sin(t), atol=1e-9)
    report = fl.conservation_report(so3, traj, casimirs=[ExprField(CASIMIR)], casimir_tol=1e-9)
    assert report.passed
    assert traj.halving_error is not None and traj.halving_error <= 1e-10


def test_casimir_drift_no_secular_growth(so3):
    traj = fl.integrate(
        so3, ExprField("y1^2/2 + y2^2/3 + y3^2/4"), [0, 0, 1, 0.7, -0.4],
        dt=1e-3, n=10000, halving_check=False,
    )
    c = ExprField(CASIMIR).at(traj.states, 0).value
    drift = np.abs(c - c[0])
    assert np.max(drift) <= 1e-9
    # comparing window maxima guards against secular accumulation
    early = np.max(drift[: len(drift) // 2])
    late = np.max(drift[len(drift) // 2 :])
    assert late <= max(10 * early, 1e-12)


def test_energy_drift_fourth_order(so3):
    F = ExprField("y1^2/2 + y2^2/3 + y3^2/4")
    p0 = [0, 0, 1.0, 0.7, -0.4]
    drifts = []
    for dt, n in ((0.02, 200), (0.01, 400)):
        traj = fl.integrate(so3, F, p0, dt=dt, n=n, halving_check=False)
        f = F.at(traj.states, 0).value
        drifts.append(np.max(np.abs(f - f[0])))
    ratio = drifts[0] / drifts[1]
    assert 8.0 <= ratio <= 32.0


def test_sec5_horizontal_motion(sec5):
    # X_{x1} = kappa hor_2 at the start point
    p0 = np.array([0.0, 0.0, 1.5, 0.0, 0.0])
    traj = fl.integrate(sec5, ExprField("x1"), p0, dt=1e-3, n=10, halving_check=False)
    kv = float(sec5.kappa_values(p0))
    velocity = (traj.states[:, 1] - traj.states[:, 0]) / 1e-3
    np.testing.assert_allclose(velocity, [0.0, kv, 0.0, kv, kv], atol=1e-3)


def test_kappa_sign_constant_along_flows(sec5):
    rng = np.random.default_rng(11)
    starts = []
    while len(starts) < 20:
        p = rng.uniform(-1, 1, size=5)
        p[2] = rng.uniform(1.2, 1.8) * rng.choice([-1, 1])  # kappa > 0 region
        if sec5.kappa_values(p) > 0.2:
            starts.append(p)
    p0s = np.stack(starts, axis=1)
    states = fl.integrate_batch(sec5, ExprField("x1 + y2"), p0s, dt=1e-3, n=2000)
    kv = sec5.kappa_values(states.reshape(5, -1)).reshape(20, -1)
    assert np.min(kv) > 0.0


def test_trajectory_truncated_on_domain_error():
    T = tr.PoissonTriple(
        cn.Connection.flat(), ConstField(0.0), tr.VerticalOneForm(["0", "1", "0"])
    )
    # X_F drives y1 downward while F needs ln(y1)
    F = ExprField("0 - y3 - 0.001*ln(y1)")
    traj = fl.integrate(T, F, [0, 0, 0.5, 0, 0], dt=0.01, n=200, halving_check=False)
    assert traj.truncated
    assert traj.states.shape[1] < 201
    assert np.all(traj.states[2] > 0)


def test_conservation_report_with_invariant_volume(so3):
    traj = fl.integrate(so3, ExprField("y3"), [0, 0, 1, 0, 0], dt=1e-2, n=200, halving_check=False)
    report = fl.conservation_report(
        so3, traj, casimirs=[ExprField(CASIMIR)], volume_factor=ConstField(1.0)
    )
    assert report.block("invariant-volume-divergence").passed


def test_trajectory_csv(tmp_path, so3):
    traj = fl.integrate(so3, ExprField("y3"), [0, 0, 1, 0, 0], dt=1e-2, n=5, halving_check=False)
    path = tmp_path / "traj.csv"
    fl.trajectory_to_csv(traj, [ExprField(CASIMIR)], path)
    lines = path.read_text().splitlines()
    assert lines[0] == "t,x1,x2,y1,y2,y3,F,casimir_1"
    assert len(lines) == 7


def test_divergence_accumulation_with_certificate_volume():
    # the deformed compact-support family is unimodular for the flat chart
    # volume, so divergence accumulates to zero along its flows
    from acpoisson import model as md

    model = md.resolve("br3_unimodular")
    T = model.effective_triple()
    traj = fl.integrate(
        T, ExprField("y3 + 0.2*x1"), [0.1, 0.0, 0.4, 0.2, 0.1], dt=1e-2, n=300,
        halving_check=False,
    )
    report = fl.conservation_report(T, traj, volume_factor=ConstField(1.0), div_tol=1e-6)
    block = report.block("invariant-volume-divergence")
    assert block.passed and block.mean_residual <= 1e-6
