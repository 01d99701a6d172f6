"""Microphone directivity as a power series in cos(theta).

A single-band model is :class:`DirectivityPolynomial`; per-octave models are
grouped in :class:`BandedDirectivity`, which picks the band nearest (in log
frequency) to the requested frequency. Gains are real and may go negative
between sample points; fitted lobes are not clipped.
"""

import csv
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .errors import DomainError, FitError, FormatError

MAX_ORDER = 8


@dataclass(frozen=True)
class DirectivityPolynomial:
    """``D(theta) = sum_n coeffs[n] * cos(theta)**n``."""

    coeffs: tuple
    residual_rms: float = field(default=0.0, compare=False)

    def __post_init__(self):
        c = tuple(float(a) for a in np.atleast_1d(self.coeffs))
        if not c:
            raise DomainError("directivity needs at least one coefficient")
        object.__setattr__(self, "coeffs", c)

    @property
    def order(self):
        return len(self.coeffs) - 1

    def __call__(self, cos_theta):
        return evaluate(self, cos_theta)


def evaluate(model, cos_theta):
    """Evaluate ``model`` at ``cos_theta`` (Horner scheme, broadcasting)."""
    x = np.asarray(cos_theta, dtype=float)
    out = np.full(x.shape, model.coeffs[-1])
    for a in model.coeffs[-2::-1]:
        out = out * x + a
    return out


OMNI = DirectivityPolynomial((1.0,))
CARDIOID = DirectivityPolynomial((0.5, 0.5))


@dataclass(frozen=True)
class PatternSamples:
    """Measured magnitude pattern of one band: linear magnitude vs. angle from axis."""

    angles_deg: np.ndarray
    magnitudes: np.ndarray

    def __post_init__(self):
        ang = np.asarray(self.angles_deg, dtype=float)
        mag = np.asarray(self.magnitudes, dtype=float)
        if ang.shape != mag.shape or ang.ndim != 1:
            raise DomainError("angles and magnitudes must be 1-D and equally long")
        if np.any(ang < 0.0) or np.any(ang > 180.0):
            raise DomainError("pattern angles must lie in [0, 180] degrees")
        if np.any(mag < 0.0):
            raise DomainError("pattern magnitudes must be non-negative")
        object.__setattr__(self, "angles_deg", ang)
        object.__setattr__(self, "magnitudes", mag)


def fit(samples, order):
    """Least-squares power-series fit of a sampled pattern.

    The returned polynomial carries the RMS residual in ``residual_rms``.
    """
    if not 0 <= order <= MAX_ORDER:
        raise FitError(f"order must be in [0, {MAX_ORDER}], got {order}")
    x = np.cos(np.deg2rad(samples.angles_deg))
    if np.unique(np.round(x, 12)).size < order + 1:
        raise FitError(f"need at least {order + 1} distinct angles for an order-{order} fit")
    V = np.vander(x, order + 1, increasing=True)
    coeffs, *_ = np.linalg.lstsq(V, samples.magnitudes, rcond=None)
    if np.linalg.matrix_rank(V) < order + 1:
        raise FitError("rank-deficient sample set")
    resid = V @ coeffs - samples.magnitudes
    return DirectivityPolynomial(tuple(coeffs), residual_rms=float(np.sqrt(np.mean(resid**2))))


@dataclass(frozen=True)
class PairPatterns:
    sum_pattern: DirectivityPolynomial
    difference_pattern: DirectivityPolynomial


def pair_patterns(model):
    """Sum and difference of a pattern with its back-to-back twin.

    ``sum(theta) = D(theta) + D(pi - theta)`` keeps only even powers (doubled),
    ``diff(theta) = D(theta) - D(pi - theta)`` only odd powers. Both are
    returned as polynomials in cos(theta).
    """
    a = np.asarray(model.coeffs)
    n = np.arange(a.size)
    even = np.where(n % 2 == 0, 2.0 * a, 0.0)
    odd = np.where(n % 2 == 1, 2.0 * a, 0.0)
    return PairPatterns(DirectivityPolynomial(tuple(even)), DirectivityPolynomial(tuple(odd)))


@dataclass(frozen=True)
class BandedDirectivity:
    """Per-band polynomials with nearest-band (log-frequency) lookup."""

    name: str
    bands: tuple
    models: tuple

    def __post_init__(self):
        bands = tuple(float(b) for b in self.bands)
        if len(bands) != len(self.models) or not bands:
            raise DomainError("bands and models must be non-empty and of equal length")
        if any(b <= 0 for b in bands):
            raise DomainError("band frequencies must be positive")
        order = np.argsort(bands)
        object.__setattr__(self, "bands", tuple(bands[i] for i in order))
        object.__setattr__(self, "models", tuple(self.models[i] for i in order))

    @classmethod
    def constant(cls, name, model):
        return cls(name, (1000.0,), (model,))

    def band_index(self, frequency):
        f = np.asarray(frequency, dtype=float)
        logb = np.log(np.asarray(self.bands))
        return np.argmin(np.abs(np.log(f)[..., None] - logb), axis=-1)

    def model_for(self, frequency):
        return self.models[int(self.band_index(frequency))]

    def gain(self, cos_theta, frequency):
        """Gain for ``cos_theta`` of shape ``(K, ...)`` at per-row frequencies ``(K,)``.

        A scalar frequency applies to every row.
        """
        cos_theta = np.asarray(cos_theta, dtype=float)
        if len(self.models) == 1:
            return evaluate(self.models[0], cos_theta)
        if np.ndim(frequency) == 0:
            return evaluate(self.model_for(frequency), cos_theta)
        idx = self.band_index(frequency)
        out = np.empty_like(cos_theta)
        for b in np.unique(idx):
            rows = idx == b
            out[rows] = evaluate(self.models[b], cos_theta[rows])
        return out


OMNI_BANDED = BandedDirectivity.constant("omni", OMNI)
CARDIOID_BANDED = BandedDirectivity.constant("cardioid", CARDIOID)


def directivity_to_dict(d):
    return {
        "name": d.name,
        "bands": list(d.bands),
        "coeffs": [list(m.coeffs) for m in d.models],
    }


def directivity_from_dict(obj):
    try:
        models = tuple(DirectivityPolynomial(tuple(c)) for c in obj["coeffs"])
        return BandedDirectivity(obj["name"], tuple(obj["bands"]), models)
    except (KeyError, TypeError) as exc:
        raise FormatError(f"malformed directivity record: {exc}") from exc


def save_coefficients(path, directivity):
    """Write a ``band_hz, a0..a8`` table (missing high orders written as 0)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["band_hz"] + [f"a{n}" for n in range(MAX_ORDER + 1)])
        for band, m in zip(directivity.bands, directivity.models):
            c = list(m.coeffs) + [0.0] * (MAX_ORDER + 1 - len(m.coeffs))
            w.writerow([f"{band:g}"] + [repr(float(a)) for a in c])


def _read_coefficients(fh, name):
    rows = list(csv.reader(fh))
    if not rows or rows[0][0].strip() != "band_hz":
        raise FormatError("coefficient table must start with a 'band_hz, a0, ...' header")
    bands, models = [], []
    for row in rows[1:]:
        if not row or row[0].startswith("#"):
            continue
        try:
            vals = [float(v) for v in row]
        except ValueError as exc:
            raise FormatError(f"non-numeric coefficient row {row}") from exc
        coeffs = np.trim_zeros(np.array(vals[1:]), "b")
        bands.append(vals[0])
        models.append(DirectivityPolynomial(tuple(coeffs) if coeffs.size else (0.0,)))
    return BandedDirectivity(name, tuple(bands), tuple(models))


def load_coefficients(path, name=None):
    with open(path, newline="") as fh:
        return _read_coefficients(fh, name or str(path))


def load_fixture(name):
    """Load a directivity table shipped in ``tfdiffuse/data`` (e.g. ``"tf24_dpa4017_like"``)."""
    ref = resources.files("tfdiffuse") / "data" / f"{name}.csv"
    with ref.open("r", newline="") as fh:
        return _read_coefficients(fh, name)


def save_pattern_samples(path, samples_by_band):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["band_hz", "angle_deg", "magnitude"])
        for band, s in sorted(samples_by_band.items()):
            for ang, mag in zip(s.angles_deg, s.magnitudes):
                w.writerow([f"{band:g}", repr(float(ang)), repr(float(mag))])


def load_pattern_samples(path):
    """Read ``band_hz, angle_deg, magnitude`` rows into ``{band: PatternSamples}``."""
    groups = {}
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            try:
                band = float(row["band_hz"])
                groups.setdefault(band, []).append((float(row["angle_deg"]), float(row["magnitude"])))
            except (KeyError, ValueError) as exc:
                raise FormatError(f"bad pattern row {row}: {exc}") from exc
    return {b: PatternSamples(*map(np.array, zip(*rows))) for b, rows in groups.items()}


def fit_bands(samples_by_band, order, name="fitted"):
    bands = sorted(samples_by_band)
    return BandedDirectivity(name, tuple(bands), tuple(fit(samples_by_band[b], order) for b in bands))
