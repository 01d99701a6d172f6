"""Measured multichannel impulse responses: WAV ingestion, band spectra and energy-ratio mixing.

Band analysis uses one full-length real FFT without windowing; every bin in
``[fc/sqrt(2), fc*sqrt(2))`` is treated as one monochromatic scene so the
estimator path is the same as for simulated data.
"""

import struct
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.io import wavfile

from . import estimators as es
from .errors import DomainError, FormatError, TruncatedFileError
from .medium import Medium
from .wavefield import BandSpec, sensor_response

_PCM_SCALE = {np.dtype("int16"): 2.0**15, np.dtype("int32"): 2.0**31}


@dataclass(frozen=True, eq=False)
class MultichannelIr:
    """Impulse responses ``samples`` ``(n_samples, n_channels)`` at ``rate`` Hz.

    ``channel_map[i]`` is the array sensor index fed by channel ``i``.
    """

    rate: float
    samples: np.ndarray
    channel_map: tuple = None
    bits: int = None

    def __post_init__(self):
        x = np.asarray(self.samples, dtype=float)
        if x.ndim == 1:
            x = x[:, None]
        if x.ndim != 2:
            raise DomainError("samples must be (n_samples, n_channels)")
        if not self.rate > 0:
            raise DomainError("sample rate must be positive")
        cmap = tuple(range(x.shape[1])) if self.channel_map is None else tuple(int(c) for c in self.channel_map)
        if len(cmap) != x.shape[1]:
            raise DomainError("channel map length must equal the channel count")
        object.__setattr__(self, "samples", x)
        object.__setattr__(self, "channel_map", cmap)

    @property
    def n_channels(self):
        return self.samples.shape[1]

    @property
    def n_samples(self):
        return self.samples.shape[0]

    def for_array(self, array):
        """Check the channel count against ``array`` and return sensor-ordered samples."""
        if self.n_channels != array.n_sensors:
            raise DomainError(f"IR has {self.n_channels} channels but {array.name!r} has {array.n_sensors} sensors")
        out = np.empty_like(self.samples)
        out[:, list(self.channel_map)] = self.samples
        return out


def load_wav(path, channel_map=None):
    """Read a PCM16/24/32 or float32 WAV file as floats in ``[-1, 1)``."""
    with warnings.catch_warnings():
        # scipy only warns on a short data chunk; treat it as an I/O failure
        warnings.filterwarnings("error", message=".*EOF", category=wavfile.WavFileWarning)
        try:
            rate, data = wavfile.read(path)
        except (wavfile.WavFileWarning, struct.error) as exc:
            raise TruncatedFileError(f"{path}: truncated file ({exc})") from exc
        except ValueError as exc:
            if "reshape" in str(exc):
                raise TruncatedFileError(f"{path}: truncated file ({exc})") from exc
            raise FormatError(f"{path}: {exc}") from exc
    if data.dtype == np.float32 or data.dtype == np.float64:
        x, bits = data.astype(float), 8 * data.dtype.itemsize
    elif data.dtype in _PCM_SCALE:
        # scipy returns 24-bit data left-justified in int32
        x, bits = data.astype(float) / _PCM_SCALE[data.dtype], 8 * data.dtype.itemsize
    else:
        raise FormatError(f"{path}: unsupported sample format {data.dtype}")
    return MultichannelIr(float(rate), x, channel_map, bits)


def save_wav(path, ir, dtype="float32"):
    """Write ``ir`` as float32 or int16 PCM."""
    x = ir.samples
    if dtype == "float32":
        wavfile.write(path, int(ir.rate), x.astype(np.float32))
    elif dtype == "int16":
        wavfile.write(path, int(ir.rate), np.clip(np.round(x * 2**15), -(2**15), 2**15 - 1).astype(np.int16))
    else:
        raise FormatError(f"unsupported output format {dtype!r}")


@dataclass(frozen=True, eq=False)
class BandSpectra:
    """FFT bins of one band: ``values`` ``(n_bins, n_channels)`` at ``frequencies``."""

    band_hz: float
    frequencies: np.ndarray
    values: np.ndarray

    @property
    def energy(self):
        return float(np.sum(np.abs(self.values) ** 2))


def band_spectra(ir, band, array=None):
    """Spectral bins of ``ir`` inside the octave ``band`` (a :class:`BandSpec` or centre in Hz).

    ``energy`` of the result uses the one-sided Parseval weighting so that the
    band energies of all octaves sum to at most the signal energy.
    """
    spec = band if isinstance(band, BandSpec) else BandSpec(float(band))
    lo, hi = spec.edges
    if lo >= ir.rate / 2:
        raise DomainError(f"band {spec.center} Hz lies above the Nyquist frequency {ir.rate / 2} Hz")
    if ir.n_samples < ir.rate / lo:
        raise DomainError("impulse response is shorter than one period of the band's lower edge")
    x = ir.samples if array is None else ir.for_array(array)
    n = ir.n_samples
    X = np.fft.rfft(x, axis=0)
    f = np.fft.rfftfreq(n, 1.0 / ir.rate)
    sel = (f >= lo) & (f < hi) & (f > 0)
    # one-sided weighting: bins other than DC/Nyquist stand for two conjugate bins
    w = np.where((f == 0) | ((n % 2 == 0) & (f == ir.rate / 2)), 1.0, 2.0)
    vals = X[sel] * np.sqrt(w[sel] / n)[:, None]
    return BandSpectra(spec.center, f[sel], vals)


def mix_by_ratio(beam, diffuse, eta):
    """Scale two band spectra so the beam carries ``eta`` of the total energy, then sum.

    Each input is first normalized to unit band energy.
    """
    if not 0.0 <= eta <= 1.0:
        raise DomainError("energy ratio must lie in [0, 1]")
    if beam.values.shape != diffuse.values.shape or not np.allclose(beam.frequencies, diffuse.frequencies):
        raise DomainError("beam and diffuse spectra must share bins and channels")
    Eb, Ed = beam.energy, diffuse.energy
    if (eta > 0 and Eb == 0) or (eta < 1 and Ed == 0):
        raise DomainError("cannot normalize a zero-energy input")
    vb = beam.values * np.sqrt(eta / Eb) if eta > 0 else np.zeros_like(beam.values)
    vd = diffuse.values * np.sqrt((1.0 - eta) / Ed) if eta < 1 else np.zeros_like(diffuse.values)
    return BandSpectra(beam.band_hz, beam.frequencies, vb + vd)


def analyze_spectra(array, spectra, medium=Medium(), whitener=None):
    """Run the band estimator on the bins of ``spectra`` (one scene per bin)."""
    return es.analyze_band(array, spectra.values, spectra.frequencies, spectra.band_hz, medium, whitener=whitener)


def check_compatible(ir_beam, ir_diffuse):
    if ir_beam.rate != ir_diffuse.rate:
        raise DomainError("sample rates differ")
    if ir_beam.channel_map != ir_diffuse.channel_map:
        raise DomainError("channel maps differ")
    if ir_beam.n_samples != ir_diffuse.n_samples:
        raise DomainError("impulse responses differ in length; pad or trim first")


def irmix(ir_beam, ir_diffuse, array, etas, bands, medium=Medium()):
    """Indices for every ``(band, eta)`` of the mixed measured responses.

    Returns a list of ``({"eta": eta}, DiffusenessReport)`` pairs in band-major order.
    """
    check_compatible(ir_beam, ir_diffuse)
    out = []
    for band in bands:
        sb = band_spectra(ir_beam, band, array)
        sd = band_spectra(ir_diffuse, band, array)
        for eta in etas:
            rep = analyze_spectra(array, mix_by_ratio(sb, sd, float(eta)), medium)
            out.append(({"eta": float(eta)}, rep))
    return out


def impulse_responses_from_snapshots(array, incidence, rate, n_samples, medium=Medium(), delay=0.0):
    """Synthetic free-field IRs of a plane wave, built by inverse FFT of per-bin responses.

    Used to check that the measured-data path reproduces the frequency-domain
    estimates. ``delay`` (s) shifts the wave in time.
    """
    f = np.fft.rfftfreq(n_samples, 1.0 / rate)
    H = np.zeros((len(f), array.n_sensors), dtype=complex)
    pos = f > 0
    inc = np.repeat(np.atleast_2d(incidence), pos.sum(), axis=0)
    # exp(+j w t) convention: a delay multiplies by exp(-j w tau)
    H[pos] = sensor_response(array, inc, f[pos], medium) * np.exp(-2j * np.pi * f[pos] * delay)[:, None]
    # numpy's inverse FFT synthesizes with exp(+j w t), matching the phasor model
    x = np.fft.irfft(H, n=n_samples, axis=0)
    return MultichannelIr(float(rate), x)
