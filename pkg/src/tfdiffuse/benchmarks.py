"""The three simulation benchmarks: single plane wave, beam plus diffuse mix, two waves.

Every task draws from a generator keyed by ``(seed, case, band index, grid
index)`` so results do not depend on execution order or the number of jobs.
"""

import dataclasses
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import arrays as arr_mod
from . import directivity as dv
from . import estimators as es
from .errors import ConfigError
from .medium import Medium
from .spatial import direction_from_angles, uniform_sphere
from .wavefield import (
    OCTAVE_CENTERS,
    BandSpec,
    band_frequencies,
    beam_rays,
    diffuse_rays,
    make_rng,
    random_gains,
    random_phases,
    sensor_response,
)

PROFILES = ("ci", "paper")

_PROFILE_DEFAULTS = {
    "ci": dict(
        azimuths=tuple(float(a) for a in range(0, 360, 30)),
        zeniths=tuple(float(z) for z in np.linspace(5.0, 175.0, 7)),
        diffuse_rays=10_000,
        beam_rays=10_000,
        trials=5,
        realizations=200,
        case3_angles=tuple(float(a) for a in range(0, 181, 15)),
        whitener_rays=5_000,
    ),
    "paper": dict(
        azimuths=tuple(float(a) for a in range(0, 360, 5)),
        zeniths=tuple(float(z) for z in range(5, 176, 5)),
        diffuse_rays=100_000,
        beam_rays=100_000,
        trials=10,
        realizations=1000,
        case3_angles=tuple(float(a) for a in range(0, 181, 5)),
        whitener_rays=100_000,
    ),
}


@dataclass(frozen=True)
class CaseConfig:
    """Fully resolved benchmark configuration (echoed verbatim into the outputs)."""

    case: int
    array: str
    bands: tuple = OCTAVE_CENTERS
    profile: str = "ci"
    seed: int = 0
    tones: int = 100
    azimuths: tuple = _PROFILE_DEFAULTS["ci"]["azimuths"]
    zeniths: tuple = _PROFILE_DEFAULTS["ci"]["zeniths"]
    etas: tuple = tuple(round(0.05 * i, 2) for i in range(21))
    beam_center: tuple = (3.0, 87.0)
    beam_fraction: float = 0.005
    diffuse_rays: int = _PROFILE_DEFAULTS["ci"]["diffuse_rays"]
    beam_rays: int = _PROFILE_DEFAULTS["ci"]["beam_rays"]
    trials: int = _PROFILE_DEFAULTS["ci"]["trials"]
    realizations: int = _PROFILE_DEFAULTS["ci"]["realizations"]
    case3_angles: tuple = _PROFILE_DEFAULTS["ci"]["case3_angles"]
    secondary_azimuth: float = 0.0
    whitener_rays: int = _PROFILE_DEFAULTS["ci"]["whitener_rays"]
    pu_whitening: bool = True
    hoa_diagnostic: bool = True
    synthesis_order: int = None
    ave_weighting: str = "velocity"
    printed_factor: bool = False
    directivity: str = None
    rho: float = 1.21
    c: float = 343.0
    jobs: int = 1

    def __post_init__(self):
        if self.case not in (1, 2, 3):
            raise ConfigError(f"case must be 1, 2 or 3, got {self.case}")
        if self.array not in arr_mod.ARRAY_NAMES:
            raise ConfigError(f"unknown array {self.array!r}; expected one of {arr_mod.ARRAY_NAMES}")
        if self.profile not in PROFILES:
            raise ConfigError(f"unknown profile {self.profile!r}; expected one of {PROFILES}")
        for b in self.bands:
            if float(b) not in OCTAVE_CENTERS:
                raise ConfigError(f"band {b} is not an octave centre {OCTAVE_CENTERS}")
        if any(not 0.0 <= e <= 1.0 for e in self.etas):
            raise ConfigError("energy ratios must lie in [0, 1]")
        if self.ave_weighting not in es.AVE_WEIGHTS:
            raise ConfigError(f"ave_weighting must be one of {es.AVE_WEIGHTS}")
        if self.jobs < 1:
            raise ConfigError("jobs must be >= 1")
        for name in ("tones", "diffuse_rays", "beam_rays", "trials", "realizations", "whitener_rays"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")
        object.__setattr__(self, "bands", tuple(float(b) for b in self.bands))

    @classmethod
    def for_profile(cls, case, array, profile="ci", **overrides):
        if profile not in PROFILES:
            raise ConfigError(f"unknown profile {profile!r}; expected one of {PROFILES}")
        values = dict(_PROFILE_DEFAULTS[profile])
        values.update(overrides)
        return cls.from_dict(dict(values, case=case, array=array, profile=profile))

    @classmethod
    def from_dict(cls, obj):
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(obj) - known)
        if unknown:
            raise ConfigError(f"unknown configuration key(s): {', '.join(unknown)}")
        vals = {k: tuple(v) if isinstance(v, list) else v for k, v in obj.items()}
        return cls(**vals)

    def to_dict(self):
        return {k: list(v) if isinstance(v, tuple) else v for k, v in dataclasses.asdict(self).items()}

    @property
    def medium(self):
        return Medium(self.rho, self.c)

    def make_array(self):
        d = None if self.directivity is None else dv.load_coefficients(self.directivity)
        return arr_mod.make_array(self.array, d)


@dataclass(eq=False)
class CaseResult:
    """Grid-point reports and per-(band, index) summaries of one run.

    ``kind`` is ``1``, ``2``, ``3`` or ``"irmix"``; energy-ratio runs (case 2
    and ``irmix``) get ``max_abs_err`` and ``pearson_r`` against ``1 - eta``.
    """

    kind: object
    array: str
    bands: tuple
    grid_keys: tuple
    extra_keys: tuple = ()
    config: dict = field(default_factory=dict)
    records: list = field(default_factory=list)

    @property
    def has_eta(self):
        return "eta" in self.grid_keys

    def rows(self):
        """Long-format result rows: grid coordinates, the report schema, then extras."""
        for grid, rep, extra in self.records:
            for row in rep.rows():
                yield {**grid, **row, **extra}

    def _select(self, band):
        return [rec for rec in self.records if band is None or rec[1].band_hz == float(band)]

    def values(self, index, band=None):
        """Index values in grid order, optionally restricted to one band."""
        return np.array([r.indices[index] for _, r, _ in self._select(band)])

    def grid_values(self, key, band=None):
        return np.array([g[key] for g, _, _ in self._select(band)])

    def extras(self, key, band=None):
        return np.array([x[key] for _, _, x in self._select(band)])

    def index_names(self, band=None):
        names = []
        for _, r, _ in self._select(band):
            names += [n for n in r.indices if n not in names]
        return names

    def summary(self):
        """One row per (band, index) with n/mean/min/max (and eta errors for mixing runs)."""
        out = []
        for band in self.bands:
            if not self._select(band):
                continue
            for name in self.index_names(band) + list(self.extra_keys):
                v = self.extras(name, band) if name in self.extra_keys else self.values(name, band)
                row = {
                    "band_hz": float(band),
                    "array": self.array,
                    "index_name": name,
                    "n": int(v.size),
                    "mean": float(np.mean(v)),
                    "min": float(np.min(v)),
                    "max": float(np.max(v)),
                    "max_abs_err": "",
                    "pearson_r": "",
                }
                if self.has_eta and name not in self.extra_keys:
                    target = 1.0 - self.grid_values("eta", band)
                    row["max_abs_err"] = float(np.max(np.abs(v - target)))
                    row["pearson_r"] = _pearson(v, target)
                out.append(row)
        return out


def _pearson(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if np.std(a) == 0 or np.std(b) == 0:
        return float("nan")
    return float(np.corrcoef(a, b)[0, 1])


def _whitener(cfg, array, band_index, frequency):
    if not cfg.pu_whitening:
        return None
    rng = make_rng(cfg.seed, 0, band_index)
    inc = uniform_sphere(rng, cfg.whitener_rays)
    return es.reference_whitener(array, frequency, inc, medium=cfg.medium, order=cfg.synthesis_order)


def _analyze(cfg, array, P, freqs, band, whitener=None):
    return es.analyze_band(
        array,
        P,
        freqs,
        band,
        medium=cfg.medium,
        whitener=whitener,
        hoa_diagnostic=cfg.hoa_diagnostic,
        ave_weighting=cfg.ave_weighting,
        printed_factor=cfg.printed_factor,
    )


def _case1_band(cfg, band_index):
    array = cfg.make_array()
    band = cfg.bands[band_index]
    spec = BandSpec(band, tones=cfg.tones)
    az, zen = np.meshgrid(cfg.azimuths, cfg.zeniths, indexing="ij")
    az, zen = az.ravel(), zen.ravel()
    incidence = direction_from_angles(az, zen)
    out = []
    for g, s in enumerate(incidence):
        rng = make_rng(cfg.seed, 1, band_index, g)
        f = band_frequencies(spec, rng)
        amp = random_gains(rng, cfg.tones) * np.exp(1j * random_phases(rng, cfg.tones))
        P = amp[:, None] * sensor_response(array, np.repeat(s[None], cfg.tones, 0), f, cfg.medium, cfg.synthesis_order)
        rep = _analyze(cfg, array, P, f, band)
        out.append(({"azimuth_deg": float(az[g]), "zenith_deg": float(zen[g])}, rep, {"doa_error_deg": rep.doa_error(s)}))
    return out


def _unit_energy_pressures(array, waves, f, medium, order):
    """Sensor pressures of ``waves`` scaled so the ray energies sum to one."""
    resp = sensor_response(array, waves.incidence, f, medium, order)
    return (waves.complex_amplitudes @ resp) / np.sqrt(waves.energy)


def _case2_band(cfg, band_index):
    array = cfg.make_array()
    band = cfg.bands[band_index]
    spec = BandSpec(band, tones=cfg.tones)
    center = direction_from_angles(*cfg.beam_center)
    Pb, Pd, F = [], [], []
    for trial in range(cfg.trials):
        rng = make_rng(cfg.seed, 2, band_index, trial)
        freqs = band_frequencies(spec, rng)
        for f in freqs:
            beam = beam_rays(cfg.beam_rays, center, cfg.beam_fraction, rng)
            diff = diffuse_rays(cfg.diffuse_rays, rng)
            Pb.append(_unit_energy_pressures(array, beam, f, cfg.medium, cfg.synthesis_order))
            Pd.append(_unit_energy_pressures(array, diff, f, cfg.medium, cfg.synthesis_order))
        F.append(freqs)
    Pb, Pd, F = np.array(Pb), np.array(Pd), np.concatenate(F)
    wh = _whitener(cfg, array, band_index, band)
    out = []
    for eta in cfg.etas:
        P = np.sqrt(eta) * Pb + np.sqrt(1.0 - eta) * Pd
        rep = _analyze(cfg, array, P, F, band, wh)
        out.append(({"eta": float(eta)}, rep, {}))
    return out


def _case3_band(cfg, band_index):
    array = cfg.make_array()
    band = cfg.bands[band_index]
    primary = sensor_response(array, np.array([[0.0, 0.0, 1.0]]), band, cfg.medium, cfg.synthesis_order)[0]
    wh = _whitener(cfg, array, band_index, band)
    freqs = np.full(cfg.realizations, band)
    out = []
    for g, ang in enumerate(cfg.case3_angles):
        rng = make_rng(cfg.seed, 3, band_index, g)
        s2 = direction_from_angles(cfg.secondary_azimuth, ang)
        second = sensor_response(array, s2[None], band, cfg.medium, cfg.synthesis_order)[0]
        amp = random_gains(rng, cfg.realizations) * np.exp(1j * random_phases(rng, cfg.realizations))
        P = primary[None, :] + amp[:, None] * second[None, :]
        rep = _analyze(cfg, array, P, freqs, band, wh)
        out.append(({"angle_deg": float(ang)}, rep, {}))
    return out


_RUNNERS = {
    1: (_case1_band, ("azimuth_deg", "zenith_deg"), ("doa_error_deg",)),
    2: (_case2_band, ("eta",), ()),
    3: (_case3_band, ("angle_deg",), ()),
}


def _run_band(args):
    cfg, band_index = args
    return _RUNNERS[cfg.case][0](cfg, band_index)


def run_case(cfg):
    """Run all bands of ``cfg``; bands execute in parallel when ``cfg.jobs > 1``."""
    tasks = [(cfg, i) for i in range(len(cfg.bands))]
    if cfg.jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            parts = list(pool.map(_run_band, tasks))
    else:
        parts = [_run_band(t) for t in tasks]
    _, grid_keys, extra_keys = _RUNNERS[cfg.case]
    res = CaseResult(cfg.case, cfg.array, cfg.bands, grid_keys, extra_keys, cfg.to_dict())
    for p in parts:
        res.records.extend(p)
    return res


def run_case1(cfg):
    """Single plane wave from every grid direction; reports indices and DOA error."""
    if cfg.case != 1:
        raise ConfigError("run_case1 needs a case-1 configuration")
    return run_case(cfg)


def run_case2(cfg):
    """Beam (0.5 % cap) plus isotropic diffuse rays mixed at each energy ratio ``eta``."""
    if cfg.case != 2:
        raise ConfigError("run_case2 needs a case-2 configuration")
    return run_case(cfg)


def run_case3(cfg):
    """Primary wave from the zenith plus a randomized secondary wave at each angle."""
    if cfg.case != 3:
        raise ConfigError("run_case3 needs a case-3 configuration")
    return run_case(cfg)
