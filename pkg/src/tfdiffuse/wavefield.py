"""Frequency-domain synthesis of sensor pressures for plane-wave scenes.

Time convention is ``exp(+j omega t)``. A :class:`PlaneWave` stores its
*propagation* direction; the direction the sound arrives from (incidence) is
the negative of it. A unit wave arriving from ``s`` has pressure
``exp(+j k s.r)`` at position ``r``, and a directional sensor pointing along
``d`` sees it with gain ``D(d.s)``.
"""

import csv
import json
from dataclasses import dataclass

import numpy as np
from . import sh
from .errors import DomainError, WrongModelError
from .medium import Medium
from .spatial import normalize, uniform_cap, uniform_sphere

OCTAVE_CENTERS = (63.0, 125.0, 250.0, 500.0, 1000.0, 2000.0, 4000.0, 8000.0, 16000.0)

# Largest number of (wave, sensor) products evaluated in one block.
_BLOCK = 1 << 20


@dataclass(frozen=True)
class PlaneWave:
    direction: np.ndarray
    amplitude: float = 1.0
    phase: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "direction", normalize(self.direction))
        if self.amplitude < 0:
            raise DomainError("plane-wave amplitude must be non-negative")

    @property
    def incidence(self):
        return -self.direction


def wave_from_incidence(direction, amplitude=1.0, phase=0.0):
    """Plane wave arriving from ``direction`` (propagating toward ``-direction``)."""
    return PlaneWave(-normalize(direction), amplitude, phase)


@dataclass(frozen=True, eq=False)
class WaveSet:
    """A batch of plane waves stored column-wise (propagation directions)."""

    directions: np.ndarray
    amplitudes: np.ndarray
    phases: np.ndarray

    def __post_init__(self):
        d = np.atleast_2d(np.asarray(self.directions, dtype=float)).reshape(-1, 3)
        a = np.atleast_1d(np.asarray(self.amplitudes, dtype=float))
        ph = np.atleast_1d(np.asarray(self.phases, dtype=float))
        if not (len(d) == len(a) == len(ph)):
            raise DomainError("directions, amplitudes and phases must have equal length")
        if np.any(a < 0):
            raise DomainError("plane-wave amplitudes must be non-negative")
        object.__setattr__(self, "directions", d)
        object.__setattr__(self, "amplitudes", a)
        object.__setattr__(self, "phases", ph)

    @classmethod
    def from_waves(cls, waves):
        waves = list(waves)
        if not waves:
            return cls(np.zeros((0, 3)), np.zeros(0), np.zeros(0))
        return cls(
            np.array([w.direction for w in waves]),
            np.array([w.amplitude for w in waves]),
            np.array([w.phase for w in waves]),
        )

    @classmethod
    def from_incidence(cls, incidence, amplitudes=None, phases=None):
        inc = np.atleast_2d(np.asarray(incidence, dtype=float))
        n = len(inc)
        amps = np.ones(n) if amplitudes is None else amplitudes
        ph = np.zeros(n) if phases is None else phases
        return cls(-inc, amps, ph)

    def __len__(self):
        return len(self.amplitudes)

    def __iter__(self):
        for d, a, p in zip(self.directions, self.amplitudes, self.phases):
            yield PlaneWave(d, float(a), float(p))

    @property
    def incidence(self):
        return -self.directions

    @property
    def complex_amplitudes(self):
        return self.amplitudes * np.exp(1j * self.phases)

    @property
    def energy(self):
        return float(np.sum(self.amplitudes**2))

    def scaled(self, factor):
        return WaveSet(self.directions, self.amplitudes * factor, self.phases)

    def __add__(self, other):
        return WaveSet(
            np.concatenate([self.directions, other.directions]),
            np.concatenate([self.amplitudes, other.amplitudes]),
            np.concatenate([self.phases, other.phases]),
        )


@dataclass(frozen=True, eq=False)
class Scene:
    """One monochromatic plane-wave superposition."""

    waves: WaveSet
    frequency: float

    def __post_init__(self):
        if not self.frequency > 0:
            raise DomainError(f"scene frequency must be positive, got {self.frequency}")
        if not isinstance(self.waves, WaveSet):
            object.__setattr__(self, "waves", WaveSet.from_waves(self.waves))

    def wavenumber(self, medium):
        return float(medium.wavenumber(self.frequency))

    def to_dict(self):
        w = self.waves
        return {
            "frequency": self.frequency,
            "directions": w.directions.tolist(),
            "amplitudes": w.amplitudes.tolist(),
            "phases": w.phases.tolist(),
        }

    @classmethod
    def from_dict(cls, obj):
        return cls(WaveSet(obj["directions"], obj["amplitudes"], obj["phases"]), float(obj["frequency"]))


def save_scenes(path, scenes):
    with open(path, "w") as fh:
        json.dump([s.to_dict() for s in scenes], fh)
        fh.write("\n")


def load_scenes(path):
    with open(path) as fh:
        return [Scene.from_dict(o) for o in json.load(fh)]


@dataclass(frozen=True, eq=False)
class PressureSnapshot:
    values: np.ndarray
    frequency: float

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["sensor", "re", "im"])
            for i, v in enumerate(np.asarray(self.values)):
                w.writerow([i, repr(float(v.real)), repr(float(v.imag))])

    @classmethod
    def from_csv(cls, path, frequency):
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        return cls(np.array([float(r["re"]) + 1j * float(r["im"]) for r in rows]), frequency)


@dataclass(frozen=True)
class BandSpec:
    center: float
    fraction: int = 1
    tones: int = 100

    def __post_init__(self):
        if float(self.center) not in OCTAVE_CENTERS:
            raise DomainError(f"band center must be one of {OCTAVE_CENTERS}, got {self.center}")
        if self.fraction != 1:
            raise DomainError("only full-octave bands are supported")
        if self.tones < 1:
            raise DomainError("need at least one tone per band")

    @property
    def edges(self):
        return self.center / np.sqrt(2.0), self.center * np.sqrt(2.0)


# --- sensor responses -------------------------------------------------------


def free_field_response(array, incidence, frequency, medium=Medium()):
    """Sensor responses ``(K, M)`` to unit plane waves arriving from ``incidence`` ``(K, 3)``.

    ``frequency`` is a scalar or one value per wave.
    """
    inc = np.atleast_2d(incidence)
    f = np.broadcast_to(np.asarray(frequency, dtype=float), (len(inc),))
    k = medium.wavenumber(f)
    cos_t = inc @ array.orientations.T
    gain = array.directivity.gain(cos_t, f)
    phase = np.exp(1j * k[:, None] * (inc @ array.positions.T))
    return array.sensitivities * gain * phase


def default_order(ka_max):
    """Series truncation: last order with ``|b_n| >= 1e-8 max|b|`` (at least 30 searched)."""
    n_cap = max(30, int(np.ceil(ka_max)) + 30)
    mags = np.abs(sh.radial_filters(max(ka_max, 1e-6), n_cap))
    keep = np.nonzero(mags >= 1e-8 * mags.max())[0]
    return int(keep[-1])


def rigid_sphere_response(array, incidence, frequency, medium=Medium(), order=None):
    """Surface pressure ``(K, M)`` on a rigid sphere for unit plane waves from ``incidence``.

    Uses the addition theorem, ``sum_n j^n (2n+1) R_n(ka) P_n(cos gamma)``,
    which equals ``sum_nm a_nm b_n Y_nm`` with the package's SH conventions.
    """
    if not array.is_baffled:
        raise WrongModelError(f"array {array.name!r} has no rigid baffle")
    a = array.baffle_radius
    r = np.linalg.norm(array.positions, axis=1)
    if np.any(np.abs(r - a) > 1e-9):
        raise DomainError("rigid-sphere sensors must lie on the sphere surface")
    inc = np.atleast_2d(incidence)
    f = np.broadcast_to(np.asarray(frequency, dtype=float), (len(inc),))
    ka = medium.wavenumber(f) * a
    N = default_order(float(ka.max())) if order is None else int(order)
    n = np.arange(N + 1)
    # coefficients (K, N+1): j^n (2n+1) R_n(ka)
    coef = sh.radial_filters(ka, N) * (2 * n + 1) / (4.0 * np.pi)
    cos_g = np.clip(inc @ (array.positions / a).T, -1.0, 1.0)
    out = np.zeros(cos_g.shape, dtype=complex)
    p_prev = np.ones_like(cos_g)
    p_cur = cos_g.copy()
    out += coef[:, 0:1] * p_prev
    if N >= 1:
        out += coef[:, 1:2] * p_cur
    for m in range(2, N + 1):
        p_prev, p_cur = p_cur, ((2 * m - 1) * cos_g * p_cur - (m - 1) * p_prev) / m
        out += coef[:, m : m + 1] * p_cur
    return array.sensitivities * out


def sensor_response(array, incidence, frequency, medium=Medium(), order=None):
    if array.is_baffled:
        return rigid_sphere_response(array, incidence, frequency, medium, order)
    return free_field_response(array, incidence, frequency, medium)


def _scene_pressure(array, scene, medium, order):
    w = scene.waves
    p = np.zeros(array.n_sensors, dtype=complex)
    if len(w) == 0:
        return p
    step = max(1, _BLOCK // array.n_sensors)
    for s in range(0, len(w), step):
        resp = sensor_response(array, w.incidence[s : s + step], scene.frequency, medium, order)
        p += w.complex_amplitudes[s : s + step] @ resp
    return p


def synth_free(array, scene, medium=Medium()):
    """Sensor pressures for an unbaffled array of directional sensors."""
    if array.is_baffled:
        raise WrongModelError(f"array {array.name!r} is baffled; use synth_rigid")
    return PressureSnapshot(_scene_pressure(array, scene, medium, None), scene.frequency)


def synth_rigid(array, scene, medium=Medium(), order=None):
    """Sensor pressures on a rigid sphere; ``order=None`` applies the automatic truncation."""
    if not array.is_baffled:
        raise WrongModelError(f"array {array.name!r} has no rigid baffle; use synth_free")
    return PressureSnapshot(_scene_pressure(array, scene, medium, order), scene.frequency)


def synthesize(array, scenes, medium=Medium(), order=None):
    """Pressures ``(T, M)`` for a list of scenes, dispatching on the array's baffle.

    Single-wave scenes are batched into one response evaluation.
    """
    scenes = list(scenes)
    if scenes and all(len(s.waves) == 1 for s in scenes):
        inc = np.concatenate([s.waves.incidence for s in scenes])
        amp = np.concatenate([s.waves.complex_amplitudes for s in scenes])
        f = np.array([s.frequency for s in scenes])
        return amp[:, None] * sensor_response(array, inc, f, medium, order)
    return np.array([_scene_pressure(array, s, medium, order) for s in scenes]).reshape(len(scenes), array.n_sensors)


# --- stochastic scene generators -------------------------------------------


def make_rng(seed, *key):
    """Counter-style generator keyed by ``(seed, *key)``; independent of call order."""
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key)))


def random_gains(rng, n, spread_db=3.0):
    """Amplitudes log-uniform within ``+/- spread_db`` dB."""
    return 10.0 ** (rng.uniform(-spread_db, spread_db, n) / 20.0)


def random_phases(rng, n):
    return rng.uniform(0.0, 2.0 * np.pi, n)


def band_frequencies(band, rng):
    lo, hi = band.edges
    return np.exp(rng.uniform(np.log(lo), np.log(hi), band.tones))


def band_noise_scenes(band, waves_template, seed, key=()):
    """``band.tones`` scenes at log-uniform random frequencies within the octave.

    ``waves_template(rng)`` returns the incidence directions ``(W, 3)`` for one
    scene; every wave then gets a random phase and a +/-3 dB random amplitude.
    """
    rng = make_rng(seed, *key)
    freqs = band_frequencies(band, rng)
    scenes = []
    for f in freqs:
        inc = np.atleast_2d(waves_template(rng))
        n = len(inc)
        scenes.append(Scene(WaveSet.from_incidence(inc, random_gains(rng, n), random_phases(rng, n)), float(f)))
    return scenes


def cap_half_angle(solid_angle_fraction):
    """Half-angle (rad) of the cap covering ``fraction`` of the sphere: ``arccos(1 - 2 fraction)``."""
    if not 0.0 < solid_angle_fraction <= 1.0:
        raise DomainError("solid-angle fraction must lie in (0, 1]")
    return float(np.arccos(1.0 - 2.0 * solid_angle_fraction))


def diffuse_rays(n, seed, key=()):
    """``n`` rays from directions uniform over the sphere, random phase and +/-3 dB amplitude."""
    if n < 1:
        raise DomainError("need at least one ray")
    rng = seed if isinstance(seed, np.random.Generator) else make_rng(seed, *key)
    inc = uniform_sphere(rng, n)
    return WaveSet.from_incidence(inc, random_gains(rng, n), random_phases(rng, n))


def beam_rays(n, center, solid_angle_fraction, seed, key=()):
    """``n`` rays arriving from within a cap of ``fraction * 4 pi`` sr around ``center``."""
    if n < 1:
        raise DomainError("need at least one ray")
    alpha = cap_half_angle(solid_angle_fraction)
    rng = seed if isinstance(seed, np.random.Generator) else make_rng(seed, *key)
    inc = uniform_cap(rng, n, normalize(center), alpha)
    return WaveSet.from_incidence(inc, random_gains(rng, n), random_phases(rng, n))


def mix_energy(beam, diffuse, eta):
    """Scale two wave sets so ``E_beam / (E_beam + E_diffuse) = eta`` with unit total energy."""
    if not 0.0 <= eta <= 1.0:
        raise DomainError("energy ratio must lie in [0, 1]")
    return beam.scaled(np.sqrt(eta / beam.energy)) + diffuse.scaled(np.sqrt((1.0 - eta) / diffuse.energy))
