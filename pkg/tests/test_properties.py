"""Property tests for the estimator chain: scale invariance, rotation
equivariance, eigenvalue accuracy and covariance accumulation."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tfdiffuse import estimators as es
from tfdiffuse import wavefield as wf
from tfdiffuse.spatial import direction_from_angles, rotation_matrix

azimuth = st.floats(0.0, 360.0)
zenith = st.floats(1.0, 179.0)
direction = st.builds(direction_from_angles, azimuth, zenith)
waves = st.lists(
    st.tuples(direction, st.floats(0.1, 2.0), st.floats(0.0, 2 * np.pi)), min_size=1, max_size=4
)
alpha = st.tuples(st.floats(0.01, 100.0), st.floats(0.0, 2 * np.pi)).map(lambda t: t[0] * np.exp(1j * t[1]))


def _pressures(array, scene_waves, freqs, medium, Q=np.eye(3)):
    """One snapshot per frequency; each snapshot gets its own phase rotation of the waves."""
    inc = np.array([Q @ d for d, _, _ in scene_waves])
    amp = np.array([a * np.exp(1j * ph) for _, a, ph in scene_waves])
    rows = []
    for i, f in enumerate(freqs):
        spin = np.exp(1j * 0.7 * i * np.arange(len(amp)))
        rows.append((amp * spin) @ wf.sensor_response(array, inc, f, medium))
    return np.array(rows)


def _whitener(array, medium):
    from tfdiffuse.spatial import fibonacci_sphere

    return es.reference_whitener(array, 1000.0, fibonacci_sphere(400), medium=medium)


FREQS = np.array([800.0, 950.0, 1100.0, 1300.0])


@pytest.mark.parametrize("name", ["afmt", "fibo64", "tf24"])
@settings(max_examples=15, deadline=None)
@given(scene=waves, a=alpha)
def test_scale_invariance(name, scene, a, medium, afmt, fibo64, tf24):
    array = {"afmt": afmt, "fibo64": fibo64, "tf24": tf24}[name]
    wh = _whitener(array, medium)
    P = _pressures(array, scene, FREQS, medium)
    try:
        r1 = es.analyze_band(array, P, FREQS, 1000.0, medium, whitener=wh)
    except es.UndefinedFieldError:
        return
    r2 = es.analyze_band(array, a * P, FREQS, 1000.0, medium, whitener=wh)
    for k, v in r1.indices.items():
        assert r2.indices[k] == pytest.approx(v, abs=1e-9), k
    if np.linalg.norm(r1.intensity) > 1e-12 * r1.energy * medium.c:
        np.testing.assert_allclose(r2.doa, r1.doa, atol=1e-9)


TF24_SYMMETRIES = [
    rotation_matrix([0, 0, 1], 45),
    rotation_matrix([0, 0, 1], 90),
    rotation_matrix([0, 0, 1], 180),
    rotation_matrix([1, 0, 0], 180),
    rotation_matrix([1, 1, 0], 180),
]


@pytest.mark.parametrize("qi", range(len(TF24_SYMMETRIES)))
@settings(max_examples=10, deadline=None)
@given(scene=waves)
def test_tf24_rotation_equivariance(qi, scene, tf24, medium):
    # the sensor set maps onto itself, so only the scene is rotated
    Q = TF24_SYMMETRIES[qi]
    r1 = es.analyze_band(tf24, _pressures(tf24, scene, FREQS, medium), FREQS, 1000.0, medium)
    r2 = es.analyze_band(tf24, _pressures(tf24, scene, FREQS, medium, Q), FREQS, 1000.0, medium)
    for k, v in r1.indices.items():
        assert r2.indices[k] == pytest.approx(v, abs=1e-9), k
    np.testing.assert_allclose(r2.intensity, Q @ r1.intensity, atol=1e-9 * np.abs(r1.intensity).max() + 1e-300)
    np.testing.assert_allclose(r2.eigenvalues, r1.eigenvalues, rtol=1e-9, atol=1e-12 * r1.eigenvalues.max())


@pytest.mark.parametrize("name", ["afmt", "fibo64"])
@settings(max_examples=10, deadline=None)
@given(scene=waves, axis=direction, angle=st.floats(0.0, 360.0))
def test_rigid_rotation_equivariance(name, scene, axis, angle, afmt, fibo64, medium):
    array = {"afmt": afmt, "fibo64": fibo64}[name]
    Q = rotation_matrix(axis, angle)
    r1 = es.analyze_band(array, _pressures(array, scene, FREQS, medium), FREQS, 1000.0, medium)
    turned = array.rotated(Q)
    r2 = es.analyze_band(turned, _pressures(turned, scene, FREQS, medium, Q), FREQS, 1000.0, medium)
    for k in ("psi_ie", "psi_pr", "psi_com"):
        assert r2.indices[k] == pytest.approx(r1.indices[k], abs=1e-9), k
    np.testing.assert_allclose(r2.intensity, Q @ r1.intensity, atol=1e-9 * np.abs(r1.intensity).max())


def test_eig3_matches_characteristic_roots():
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(1000):
        k = rng.integers(3, 8)
        X = rng.standard_normal((3, k)) + 1j * rng.standard_normal((3, k))
        X *= rng.uniform(0.1, 10.0, (3, 1))
        C = X @ X.conj().T
        tr = np.trace(C).real
        c2 = 0.5 * (tr**2 - np.trace(C @ C).real)
        det = np.linalg.det(C).real
        roots = np.sort(np.roots([1.0, -tr, c2, -det]).real)[::-1]
        lam = es.eig3(C)
        worst = max(worst, np.max(np.abs(lam - roots)) / lam[0])
    assert worst < 1e-9


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**31), sizes=st.lists(st.integers(1, 40), min_size=2, max_size=6))
def test_accumulator_order(seed, sizes):
    rng = np.random.default_rng(seed)
    chunks = [rng.standard_normal((n, 4)) + 1j * rng.standard_normal((n, 4)) for n in sizes]

    def run(order):
        acc = es.CovarianceAccumulator(4)
        for i in order:
            acc.add(chunks[i])
        return acc

    fixed = list(range(len(chunks)))
    assert np.array_equal(run(fixed).covariance(), run(fixed).covariance())
    parts = []
    for c in chunks:
        a = es.CovarianceAccumulator(4)
        a.add(c)
        parts.append(a)
    left = parts[0]
    for p in parts[1:]:
        left = left + p
    right = parts[-1]
    for p in reversed(parts[:-1]):
        right = p + right
    shuffled = [parts[i] for i in rng.permutation(len(parts))]
    mixed = shuffled[0]
    for p in shuffled[1:]:
        mixed = mixed.merge(p)
    ref = run(fixed).covariance()
    scale = np.abs(ref).max()
    for acc in (left, right, mixed):
        np.testing.assert_allclose(acc.covariance(), ref, atol=1e-12 * scale)
    assert mixed.count == sum(sizes)


@pytest.mark.parametrize("name", ["afmt", "fibo64", "tf24"])
@settings(max_examples=15, deadline=None)
@given(d=direction, f=st.floats(100.0, 4000.0), amp=alpha)
def test_single_plane_wave_not_diffuse(name, d, f, amp, afmt, fibo64, tf24, medium):
    array = {"afmt": afmt, "fibo64": fibo64, "tf24": tf24}[name]
    freqs = f * np.array([0.9, 1.0, 1.1])
    P = amp * wf.sensor_response(array, np.repeat(d[None], 3, 0), freqs, medium)
    P = P * np.exp(1j * np.array([0.0, 2.0, 4.0]))[:, None]
    r = es.analyze_band(array, P, freqs, 1000.0, medium)
    assert r.indices["psi_pr"] <= 5e-4
    assert r.indices["psi_com"] <= 5e-4
