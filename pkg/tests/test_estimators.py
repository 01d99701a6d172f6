import numpy as np
import pytest

from tfdiffuse import arrays, directivity as dv
from tfdiffuse import benchmarks as bm
from tfdiffuse import estimators as es
from tfdiffuse import wavefield as wf
from tfdiffuse.errors import ConfigError, DomainError, UndefinedFieldError
from tfdiffuse.spatial import TF24_AXES, angle_between, direction_from_angles


def test_a_to_b_examples():
    np.testing.assert_allclose(es.a_to_b([1, 1, 1, 1]), [2, 0, 0, 0])
    np.testing.assert_allclose(es.a_to_b([1, 1, -1, -1]), [0, 2, 0, 0])
    np.testing.assert_allclose(es.a_to_b(np.zeros(4)), 0)


def test_foa_pressure_only(medium):
    q = es.foa_from_b([1, 0, 0, 0], medium)
    assert np.all(q.u == 0) and np.all(q.I == 0)
    assert q.E == pytest.approx(1 / (4 * medium.rho * medium.c**2))


def test_ideal_cardioid_plane_wave_is_traveling(medium):
    # capsules at the origin: only directivity matters
    a = arrays.make_afmt()
    s = direction_from_angles(70, 40)
    D = dv.evaluate(dv.CARDIOID, a.orientations @ s)
    q = es.foa_from_b(es.a_to_b(D), medium)
    assert q.p == pytest.approx(1.0)
    np.testing.assert_allclose(q.u, -s / medium.Z0, atol=1e-15)
    assert es.psi_ie(q.I, q.E, medium) < 1e-6
    assert angle_between(es.doa_from_intensity(q.I), s) < 1e-6


def test_conjugation_leaves_I_E(medium):
    b = np.array([0.3 + 0.2j, 0.1 - 0.4j, -0.2 + 0.1j, 0.05j])
    q1, q2 = es.foa_from_b(b, medium), es.foa_from_b(np.conj(b), medium)
    np.testing.assert_allclose(q1.I, q2.I)
    assert q1.E == pytest.approx(q2.E)


def test_cc_pair_examples(medium):
    q = es.cc_pair(1.0, 0.0, medium)
    assert q.I == pytest.approx(1 / (2 * medium.Z0))
    q = es.cc_pair(1.0, 1.0, medium)
    assert q.u == 0 and q.I == 0
    assert q.E == pytest.approx(1 / (medium.rho * medium.c**2))
    a, b = es.cc_pair(0.3 + 0.1j, -0.5j, medium), es.cc_pair(-0.5j, 0.3 + 0.1j, medium)
    assert a.I == pytest.approx(-b.I)
    assert a.E == pytest.approx(b.E)


def test_tf_collapse_examples():
    np.testing.assert_allclose(es.tf_collapse(TF24_AXES @ [1.0, 0, 0], TF24_AXES), [1, 0, 0], atol=1e-15)
    # equal values collapse onto the column sums of the axis matrix
    w = 0.7
    out = es.tf_collapse(np.full(12, w), TF24_AXES)
    assert out[2] == pytest.approx(w * (8 / np.sqrt(2)) / 4)
    np.testing.assert_allclose(out, w * TF24_AXES.sum(axis=0) / 4, atol=1e-15)
    np.testing.assert_allclose(es.tf_collapse(np.zeros(12), TF24_AXES), 0)


def test_tf_collapse_non_tight_warns():
    R = np.array([[1.0, 0, 0], [0, 1.0, 0], [0, 0, 1.0], [1 / np.sqrt(2), 1 / np.sqrt(2), 0]])
    v = R @ [0.2, -0.3, 0.5]
    with pytest.warns(es.FrameWarning):
        out = es.tf_collapse(v, R)
    np.testing.assert_allclose(out, [0.2, -0.3, 0.5])


def test_cardioid_pairs_reconstruct_plane_wave(medium):
    s = direction_from_angles(200, 120)
    c = TF24_AXES @ s
    q = es.cc_pair(0.5 + 0.5 * c, 0.5 - 0.5 * c, medium)
    np.testing.assert_allclose(-es.tf_collapse(q.u, TF24_AXES), -s / medium.Z0, atol=1e-15)
    np.testing.assert_allclose(-es.tf_collapse(q.I, TF24_AXES), -s / (2 * medium.Z0), atol=1e-15)


def test_psi_ie_examples(medium):
    assert es.psi_ie(np.zeros(3), 1.0, medium) == 1.0
    E = 1.0
    assert es.psi_ie([medium.c * E, 0, 0], E, medium) == pytest.approx(0.0)
    assert es.psi_ie([2 * medium.c, 0, 0], 1.0, medium) == 0.0
    assert es.psi_ie([2 * medium.c, 0, 0], 1.0, medium, clamp=False) == pytest.approx(-1.0)
    with pytest.raises(UndefinedFieldError):
        es.psi_ie(np.zeros(3), 0.0, medium)


def test_psi_ie_diffuse_fibo64(fibo64, medium):
    # 100k fixed rays with 1000 independent gain/phase draws at the band centre
    rng = wf.make_rng(7)
    rays = wf.diffuse_rays(100_000, rng)
    R = wf.sensor_response(fibo64, rays.incidence, 500.0, medium)
    P = []
    for _ in range(10):
        amp = wf.random_gains(rng, (100, len(R))) * np.exp(2j * np.pi * rng.random((100, len(R))))
        P.append(amp @ R)
    rep = es.analyze_band(fibo64, np.concatenate(P), np.full(1000, 500.0), 500.0, medium)
    assert rep.indices["psi_ie"] >= 0.95


def _dirq(psi, w):
    z = np.zeros(len(psi))
    return es.DirectionalQuantities(z, z, z, np.ones(len(psi)), np.asarray(psi, float), np.asarray(w, float))


def test_psi_ave_examples():
    assert es.psi_ave(_dirq(np.full(12, 0.37), np.arange(1, 13))) == pytest.approx(0.37)
    psi = np.zeros(12)
    psi[0] = 1.0
    w = np.zeros(12)
    w[0] = 1.0
    assert es.psi_ave(_dirq(psi, w)) == 1.0
    with pytest.raises(UndefinedFieldError):
        es.psi_ave(_dirq(psi, np.zeros(12)))
    with pytest.raises(DomainError):
        es.psi_ave(_dirq(psi, w), weighting="nope")


def test_psi_ave_velocity_vs_energy_weighting():
    # mostly-beam mix at 2 kHz on the tight-frame array
    cfg = bm.CaseConfig.for_profile(
        2, "tf24", bands=(2000.0,), etas=(0.95,), trials=1, tones=30, diffuse_rays=3000, beam_rays=3000, pu_whitening=False
    )
    array = cfg.make_array()
    res = bm.run_case2(cfg)
    assert len(res.records) == 1
    rep = res.records[0][1]
    cfg_e = bm.CaseConfig.from_dict(dict(cfg.to_dict(), ave_weighting="energy"))
    rep_e = bm.run_case2(cfg_e).records[0][1]
    assert abs(rep.indices["psi_ave"] - rep_e.indices["psi_ave"]) <= 0.1
    assert array.name == "tf24"


def test_accumulate_cov_examples():
    np.testing.assert_allclose(es.accumulate_cov([[1.0, 0, 0]]), np.diag([1.0, 0, 0]))
    rng = np.random.default_rng(0)
    n = 20000
    ph = np.exp(2j * np.pi * rng.random((n, 2)))
    samples = np.zeros((n, 3), complex)
    samples[: n // 2, 0] = ph[: n // 2, 0]
    samples[n // 2 :, 1] = ph[n // 2 :, 1]
    np.testing.assert_allclose(es.accumulate_cov(samples), np.diag([0.5, 0.5, 0]), atol=1e-2)
    u = rng.standard_normal((5, 3)) + 1j * rng.standard_normal((5, 3))
    np.testing.assert_allclose(es.accumulate_cov(2j * u), 4 * es.accumulate_cov(u))


def test_accumulator_errors():
    with pytest.raises(UndefinedFieldError):
        es.CovarianceAccumulator(3).covariance()
    with pytest.raises(DomainError):
        es.CovarianceAccumulator(3).add(np.ones(4))


def test_eig3_examples():
    np.testing.assert_allclose(es.eig3(np.diag([1.0, 3.0, 2.0])), [3, 2, 1])
    u = np.ones(3)
    np.testing.assert_allclose(es.eig3(np.outer(u, u)), [3, 0, 0], atol=1e-14)
    with pytest.raises(DomainError):
        es.eig3(np.array([[1.0, 1.0, 0], [0, 1.0, 0], [0, 0, 1.0]]))
    with pytest.raises(DomainError):
        es.eig3(np.eye(4))


def test_eig3_residual():
    rng = np.random.default_rng(5)
    X = rng.standard_normal((3, 6)) + 1j * rng.standard_normal((3, 6))
    C = X @ X.conj().T
    lam = es.eig3(C)
    for l in lam:
        # smallest singular value of C - l I is the eigen-residual
        assert np.linalg.svd(C - l * np.eye(3), compute_uv=False)[-1] < 1e-10 * np.linalg.norm(C)


@pytest.mark.parametrize(
    "lam, raw, norm",
    [((1, 0, 0), 1 / 3, 0.0), ((1, 1, 1), 1.0, 1.0), ((1, 1, 0), 2 / 3, 0.5)],
)
def test_psi_pr_examples(lam, raw, norm):
    pr = es.psi_pr(lam)
    assert pr.raw == pytest.approx(raw, abs=1e-15)
    assert pr.normalized == pytest.approx(norm, abs=1e-15)


@pytest.mark.parametrize("lam, expected", [((1, 0, 0), 0.0), ((1, 1, 1), 1.0), ((1, 1, 0), 0.5)])
def test_psi_com_examples(lam, expected):
    assert es.psi_com(lam) == pytest.approx(expected, abs=1e-15)


def test_printed_factor_variant_not_calibrated():
    # the fixed sqrt(3/2) multiplier overshoots below zero for rank one (clamped)
    # and misses the two-equal-eigenvalue midpoint
    assert es.psi_com((1, 0, 0), printed_factor=True) == 0.0
    assert es.psi_com((1, 1, 0), printed_factor=True) == pytest.approx(1 - np.sqrt(3) / 2)


def test_eigen_indices_zero_spectrum():
    with pytest.raises(UndefinedFieldError):
        es.psi_pr((0, 0, 0))
    with pytest.raises(UndefinedFieldError):
        es.psi_com((0, 0, 0))


def test_four_component_anchors():
    assert es.psi_com((1, 0, 0, 0)) == pytest.approx(0.0, abs=1e-15)
    assert es.psi_com((1, 1, 1, 1)) == pytest.approx(1.0)
    assert es.psi_pr((1, 0, 0, 0)).raw == pytest.approx(0.25)
    assert es.psi_pr((1, 0, 0, 0)).normalized == pytest.approx(0.0, abs=1e-15)


def test_doa_from_intensity():
    np.testing.assert_allclose(es.doa_from_intensity([0, 0, -2.0]), [0, 0, 1])
    with pytest.raises(UndefinedFieldError):
        es.doa_from_intensity(np.zeros(3))


def test_whitener_self_consistency(afmt, medium):
    from tfdiffuse.spatial import uniform_sphere

    inc = uniform_sphere(wf.make_rng(1), 20000)
    wh = es.reference_whitener(afmt, 1000.0, inc, medium=medium)
    np.testing.assert_allclose(wh.scales / wh.scales[0], es.Whitener.ideal(medium).scales, rtol=0.05)
    resp = wf.sensor_response(afmt, inc, 1000.0, medium)
    fe = es.estimate_fields(afmt, resp, np.full(len(inc), 1000.0), medium)
    w = es.pu_samples(fe.foa.p, fe.foa.u)
    r = es.eigen_indices(wh.apply(w.T @ w.conj() / len(w)))
    assert r.eigenvalues.min() >= 0.95 * r.eigenvalues.max()
    assert r.psi_com >= 0.95


def test_pu_single_plane_wave_rank_one(afmt, medium):
    s = direction_from_angles(30, 80)
    P = wf.sensor_response(afmt, np.repeat(s[None], 50, 0), np.linspace(900, 1100, 50), medium)
    P = P * np.exp(2j * np.pi * np.random.default_rng(0).random(50))[:, None]
    fe = es.estimate_fields(afmt, P, np.linspace(900, 1100, 50), medium)
    r = es.cov_pu_whitened(fe.foa.p, fe.foa.u, es.Whitener.ideal(medium))
    assert r.psi_com <= 0.05


def test_pu_opposing_waves_intermediate(tf24, medium):
    cfg = bm.CaseConfig.for_profile(3, "tf24", bands=(1000.0,), case3_angles=(180.0,), realizations=400)
    rep = bm.run_case3(cfg).records[0][1]
    assert 0.1 <= rep.indices["psi_com_pu"] <= 0.4


def test_cov_pu_needs_whitener():
    with pytest.raises(ConfigError):
        es.cov_pu_whitened(np.ones(3), np.ones((3, 3)), None)


@pytest.mark.parametrize("name", ["afmt", "fibo64", "tf24"])
def test_single_plane_wave_band_indices(name, medium):
    a = arrays.make_array(name)
    s = direction_from_angles(33, 71)
    sc = wf.band_noise_scenes(wf.BandSpec(1000.0), lambda r: [s], seed=4)
    P = wf.synthesize(a, sc, medium)
    rep = es.analyze_band(a, P, [x.frequency for x in sc], 1000.0, medium)
    assert rep.indices["psi_pr"] <= 5e-4
    assert rep.indices["psi_com"] <= 5e-4
    limit = {"afmt": 0.5, "fibo64": 0.01, "tf24": 3.0}[name]
    assert rep.doa_error(s) < limit


def test_fibo64_doa_1khz_many_directions(fibo64, medium):
    from tfdiffuse.spatial import fibonacci_sphere

    dirs = fibonacci_sphere(200)
    P = wf.sensor_response(fibo64, dirs, 1000.0, medium)
    fe = es.estimate_fields(fibo64, P, np.full(len(dirs), 1000.0), medium)
    doa = es.doa_from_intensity(fe.foa.I)
    assert np.max(angle_between(doa, dirs)) < 1.0


def test_report_rows_schema(afmt, medium):
    s = direction_from_angles(10, 20)
    P = wf.sensor_response(afmt, s[None], 1000.0, medium)
    rep = es.analyze_band(afmt, P, [1000.0], 1000.0, medium)
    rows = list(rep.rows())
    assert [r["index_name"] for r in rows] == ["psi_ie", "psi_pr", "psi_com"]
    assert set(rows[0]) == {
        "band_hz", "array", "index_name", "value", "eigenvalues", "I_x", "I_y", "I_z", "doa_az", "doa_zen", "clamp_count",
    }


def test_estimate_fields_rejects_channel_mismatch(tf24):
    with pytest.raises(DomainError):
        es.estimate_fields(tf24, np.zeros((2, 5)), [1000.0, 1000.0])
