"""Pressure, velocity, intensity and energy estimates and diffuseness indices.

Sign chain
----------
Incidence ``s`` is the direction the sound comes from. For a unit plane wave
every estimator here yields ``p = 1`` and ``u = -s / Z0``, so the active
intensity ``I = Re(p u*) / 2`` points along the propagation direction and the
direction of arrival is ``-I / |I|``.

For tight-frame pairs the per-axis quantities keep the raw pair formulas
(``u_r = (M+ - M-) / Z0`` is positive when the ``+`` end faces the source);
the Cartesian vectors are ``u = -R^T u_r / A`` and ``I = -R^T I_r / A``.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np

from . import sh
from .errors import ConfigError, DomainError, UndefinedFieldError
from .arrays import AFMT_AXES
from .medium import Medium
from .spatial import angle_between, angles_of, frame_constant
from .wavefield import sensor_response

#: A-format capsule signals (FLU, FRD, BLD, BRU) -> W, X, Y, Z.
A_TO_B = 0.5 * np.array(
    [
        [1.0, 1.0, 1.0, 1.0],
        [1.0, 1.0, -1.0, -1.0],
        [1.0, -1.0, 1.0, -1.0],
        [1.0, -1.0, -1.0, 1.0],
    ]
)
A_TO_B.setflags(write=False)

HERMITIAN_TOL = 1e-12


class FrameWarning(UserWarning):
    """Direction matrix is not a tight frame; a pseudoinverse was used instead."""


def clamp_unit(x):
    """Clamp to ``[0, 1]``; returns ``(value, n_clamped)``."""
    x = np.asarray(x, dtype=float)
    out = np.clip(x, 0.0, 1.0)
    return out, int(np.count_nonzero(out != x))


# --- first-order quantities -------------------------------------------------


@dataclass(frozen=True, eq=False)
class FoaQuantities:
    """Pressure ``p (...)``, particle velocity ``u (..., 3)``, intensity ``I`` and energy density ``E``."""

    p: np.ndarray
    u: np.ndarray
    I: np.ndarray
    E: np.ndarray


def energy_density(p, u, medium=Medium()):
    """``|p|^2 / (4 rho c^2) + rho |u|^2 / 4``; ``u`` has the vector axis last (or is scalar)."""
    u = np.asarray(u)
    u2 = np.abs(u) ** 2 if u.ndim == np.ndim(p) else np.sum(np.abs(u) ** 2, axis=-1)
    return np.abs(p) ** 2 / (4.0 * medium.rho * medium.c**2) + medium.rho * u2 / 4.0


def foa_quantities(p, u, medium=Medium()):
    p = np.asarray(p, dtype=complex)
    u = np.asarray(u, dtype=complex)
    I = 0.5 * np.real(p[..., None] * np.conj(u))
    return FoaQuantities(p, u, I, energy_density(p, u, medium))


def a_to_b(D):
    """A-format capsule signals ``(..., 4)`` to B-format ``(..., 4)`` ordered W, X, Y, Z."""
    return np.asarray(D) @ A_TO_B.T


def foa_from_b(wxyz, medium=Medium()):
    """``p = W`` and ``u = -(sqrt(3) / Z0) [X, Y, Z]``."""
    b = np.asarray(wxyz, dtype=complex)
    return foa_quantities(b[..., 0], -np.sqrt(3.0) / medium.Z0 * b[..., 1:], medium)


# --- tight-frame pair quantities --------------------------------------------


@dataclass(frozen=True, eq=False)
class PairQuantities:
    """Per-axis pseudo quantities ``(..., n_pairs)`` from back-to-back pairs."""

    p: np.ndarray
    u: np.ndarray
    I: np.ndarray
    E: np.ndarray


def cc_pair(m_plus, m_minus, medium=Medium()):
    """Sum/difference pair quantities.

    ``p = M+ + M-``, ``u = (M+ - M-) / Z0``, ``I = (|M+|^2 - |M-|^2) / (2 Z0)``
    and ``E`` from the usual energy-density formula.
    """
    mp = np.asarray(m_plus, dtype=complex)
    mm = np.asarray(m_minus, dtype=complex)
    Z0 = medium.Z0
    p = mp + mm
    u = (mp - mm) / Z0
    I = (np.abs(mp) ** 2 - np.abs(mm) ** 2) / (2.0 * Z0)
    return PairQuantities(p, u, I, energy_density(p, u, medium))


def tf_collapse(values, R, tol=1e-10):
    """Cartesian vector from per-axis projections, ``R^T v / A`` for a tight frame.

    ``values`` has the axis dimension last. A non-tight ``R`` falls back to the
    least-squares pseudoinverse and emits :class:`FrameWarning`.
    """
    R = np.asarray(R, dtype=float)
    v = np.asarray(values)
    chk = frame_constant(R, tol)
    if chk.is_tight:
        return v @ R / chk.A
    warnings.warn(f"direction matrix is not tight (deviation {chk.max_offdiag:.3g}); using pseudoinverse", FrameWarning)
    return v @ np.linalg.pinv(R).T


@dataclass(frozen=True, eq=False)
class DirectionalQuantities:
    """Band-aggregated per-axis quantities and the per-axis pseudo diffuseness."""

    p: np.ndarray
    u: np.ndarray
    I: np.ndarray
    E: np.ndarray
    psi: np.ndarray
    weight_u2: np.ndarray
    clamp_count: int = 0


def directional_quantities(pairs, medium=Medium()):
    """Aggregate per-scene :class:`PairQuantities` ``(T, n_pairs)`` over scenes.

    ``I`` and ``E`` are summed over scenes; the velocity weights are summed
    ``|u_r|^2``. Per-axis ``psi = 1 - |I_r| / (c E_r)`` is clamped to ``[0, 1]``.
    """
    I = np.sum(np.atleast_2d(pairs.I), axis=0)
    E = np.sum(np.atleast_2d(pairs.E), axis=0)
    if np.any(E <= 0):
        raise UndefinedFieldError("zero energy on a pair axis")
    psi, n = clamp_unit(1.0 - np.abs(I) / (medium.c * E))
    w = np.sum(np.abs(np.atleast_2d(pairs.u)) ** 2, axis=0)
    return DirectionalQuantities(
        np.atleast_2d(pairs.p), np.atleast_2d(pairs.u), I, E, psi, w, n
    )


# --- scalar indices ---------------------------------------------------------


def psi_ie(I, E, medium=Medium(), clamp=True):
    """``1 - |I| / (c E)``, clamped to ``[0, 1]`` unless ``clamp=False``."""
    E = float(E)
    if not E > 0:
        raise UndefinedFieldError("energy density is zero; diffuseness undefined")
    raw = 1.0 - float(np.linalg.norm(I)) / (medium.c * E)
    return float(np.clip(raw, 0.0, 1.0)) if clamp else raw


AVE_WEIGHTS = ("velocity", "energy", "intensity")


def psi_ave(dirq, weighting="velocity"):
    """Weighted mean of the per-axis pseudo diffuseness.

    ``weighting`` selects ``|u_r|^2`` (default), ``E_r`` or ``|I_r|``.
    """
    if weighting == "velocity":
        w = dirq.weight_u2
    elif weighting == "energy":
        w = dirq.E
    elif weighting == "intensity":
        w = np.abs(dirq.I)
    else:
        raise DomainError(f"unknown weighting {weighting!r}; expected one of {AVE_WEIGHTS}")
    w = np.asarray(w, dtype=float)
    if not np.sum(w) > 0:
        raise UndefinedFieldError("all pair weights are zero")
    return float(np.sum(dirq.psi * w) / np.sum(w))


# --- covariance and eigen-analysis ------------------------------------------


class CovarianceAccumulator:
    """Running ``sum u u^H`` and sample count; partial accumulators merge associatively."""

    def __init__(self, dim):
        self.dim = int(dim)
        self.total = np.zeros((self.dim, self.dim), dtype=complex)
        self.count = 0

    def add(self, samples):
        """Add samples ``(n, dim)`` (or one ``(dim,)`` sample)."""
        x = np.atleast_2d(np.asarray(samples, dtype=complex))
        if x.shape[1] != self.dim:
            raise DomainError(f"expected {self.dim}-dimensional samples, got {x.shape[1]}")
        self.total = self.total + x.T @ np.conj(x)
        self.count += len(x)
        return self

    def merge(self, other):
        if other.dim != self.dim:
            raise DomainError("cannot merge accumulators of different dimension")
        out = CovarianceAccumulator(self.dim)
        out.total = self.total + other.total
        out.count = self.count + other.count
        return out

    def __add__(self, other):
        return self.merge(other)

    def covariance(self):
        if self.count == 0:
            raise UndefinedFieldError("no samples accumulated")
        C = self.total / self.count
        return 0.5 * (C + C.conj().T)


def accumulate_cov(samples):
    """Sample covariance ``(1/M) sum u u^H`` of ``(M, K)`` samples."""
    return CovarianceAccumulator(np.shape(np.atleast_2d(samples))[1]).add(samples).covariance()


def eig_sorted(C, tol=HERMITIAN_TOL):
    """Eigenvalues of a Hermitian matrix in descending order.

    Raises :class:`DomainError` if ``C`` deviates from Hermitian by more than
    ``tol`` relative to its largest entry.
    """
    C = np.asarray(C, dtype=complex)
    if C.ndim != 2 or C.shape[0] != C.shape[1]:
        raise DomainError(f"expected a square matrix, got shape {C.shape}")
    scale = max(float(np.max(np.abs(C))), np.finfo(float).tiny)
    if np.max(np.abs(C - C.conj().T)) > tol * scale:
        raise DomainError("matrix is not Hermitian")
    return np.linalg.eigvalsh(0.5 * (C + C.conj().T))[::-1]


def eig3(C, tol=HERMITIAN_TOL):
    """``lambda_1 >= lambda_2 >= lambda_3`` of a 3 x 3 Hermitian matrix."""
    if np.shape(C) != (3, 3):
        raise DomainError(f"expected a 3 x 3 matrix, got {np.shape(C)}")
    return eig_sorted(C, tol)


def _spectrum(lam):
    lam = np.clip(np.asarray(lam, dtype=float), 0.0, None)
    if lam.size < 2:
        raise DomainError("need at least two eigenvalues")
    if not lam.sum() > 0:
        raise UndefinedFieldError("all eigenvalues are zero")
    return lam


@dataclass(frozen=True)
class ParticipationRatio:
    raw: float
    normalized: float


def psi_pr(lam):
    """Participation ratio ``(sum l)^2 / (K sum l^2)`` and its ``[0, 1]`` rescaling.

    Tiny negative eigenvalues from round-off are treated as zero.
    """
    lam = _spectrum(lam)
    K = lam.size
    raw = float(lam.sum() ** 2 / (K * np.sum(lam**2)))
    return ParticipationRatio(raw, float((K * raw - 1.0) / (K - 1.0)))


def psi_com(lam, printed_factor=False):
    """Eigenvalue-dispersion diffuseness ``1 - (sigma / mean) / sqrt(K - 1)``, clamped.

    ``sigma`` is the population standard deviation, so a rank-1 spectrum maps
    to 0 and an isotropic one to 1. ``printed_factor=True`` uses the fixed
    ``sqrt(3/2)`` multiplier instead of ``1/sqrt(K - 1)`` (not calibrated).
    """
    lam = _spectrum(lam)
    K = lam.size
    delta = float(np.std(lam) / np.mean(lam))
    factor = np.sqrt(1.5) if printed_factor else 1.0 / np.sqrt(K - 1.0)
    return float(np.clip(1.0 - factor * delta, 0.0, 1.0))


@dataclass(frozen=True, eq=False)
class EigenIndices:
    eigenvalues: np.ndarray
    psi_pr: float
    psi_pr_raw: float
    psi_com: float


def eigen_indices(C, printed_factor=False):
    lam = eig_sorted(C)
    pr = psi_pr(lam)
    return EigenIndices(lam, pr.normalized, pr.raw, psi_com(lam, printed_factor))


@dataclass(frozen=True, eq=False)
class Whitener:
    """Diagonal scaling applied to ``[p, u_x, u_y, u_z]`` before the eigen-analysis."""

    scales: np.ndarray

    @classmethod
    def from_reference(cls, C_ref):
        """Scales ``1 / sqrt(diag(C_ref))`` from a reference diffuse-field covariance."""
        d = np.real(np.diag(np.asarray(C_ref)))
        if np.any(d <= 0):
            raise UndefinedFieldError("reference covariance has a zero diagonal entry")
        return cls(1.0 / np.sqrt(d))

    @classmethod
    def ideal(cls, medium=Medium()):
        """Analytic whitener of an ideal first-order probe: ``diag(1, sqrt(3) Z0, ...)``."""
        z = np.sqrt(3.0) * medium.Z0
        return cls(np.array([1.0, z, z, z]))

    def apply(self, C):
        W = np.diag(self.scales)
        return W @ np.asarray(C) @ W.conj().T


def pu_samples(p, u):
    """Stack pressure ``(T,)`` and velocity ``(T, 3)`` into ``(T, 4)``."""
    return np.concatenate([np.asarray(p, dtype=complex)[:, None], np.asarray(u, dtype=complex)], axis=1)


def cov_pu_whitened(p, u, whitener, printed_factor=False):
    """Eigen indices of the whitened 4 x 4 pressure-velocity covariance."""
    if whitener is None:
        raise ConfigError("pressure-velocity covariance needs a whitener")
    C = whitener.apply(accumulate_cov(pu_samples(p, u)))
    return eigen_indices(C, printed_factor)


def doa_from_intensity(I):
    """Incidence direction ``-I / |I|``."""
    I = np.asarray(I, dtype=float)
    n = np.linalg.norm(I, axis=-1, keepdims=True)
    if np.any(n == 0):
        raise UndefinedFieldError("zero intensity; direction undefined")
    return -I / n


# --- per-array field estimation ---------------------------------------------


@dataclass(frozen=True, eq=False)
class FieldEstimate:
    """Per-scene estimates for one array: FOA quantities plus pair or HOA data."""

    foa: FoaQuantities
    pairs: PairQuantities = None
    hoa: sh.HoaCoefficients = None


def _capsule_frame(array):
    """Local-to-world map (row-vector form) of a rotated tetrahedron, or None if canonical."""
    ori = np.asarray(array.orientations)
    if np.allclose(ori, AFMT_AXES, rtol=0.0, atol=1e-12):
        return None
    M = np.linalg.lstsq(AFMT_AXES, ori, rcond=None)[0]
    if not np.allclose(M.T @ M, np.eye(3), atol=1e-9):
        raise DomainError(f"capsule orientations of {array.name!r} are not a rotated tetrahedron")
    return M


def estimate_fields(array, pressures, frequencies, medium=Medium(), hoa_order=sh.HOA_ORDER, reg=sh.HOA_REG):
    """Per-scene ``p, u, I, E`` from sensor pressures ``(T, M)`` at frequencies ``(T,)``.

    * arrays with back-to-back pairs: pair quantities collapsed through the
      tight frame; the pressure is the mean pair sum;
    * rigid-sphere arrays: regularized SH fit, first-order terms;
    * four-capsule arrays: A-to-B conversion.
    """
    P = np.atleast_2d(np.asarray(pressures, dtype=complex))
    if P.shape[1] != array.n_sensors:
        raise DomainError(f"expected {array.n_sensors} channels, got {P.shape[1]}")
    if array.pairs:
        pq = cc_pair(P[:, array.plus_index], P[:, array.minus_index], medium)
        u = -tf_collapse(pq.u, array.axes)
        p = np.mean(pq.p, axis=1)
        foa = foa_quantities(p, u, medium)
        I = -tf_collapse(pq.I, array.axes)
        foa = FoaQuantities(foa.p, foa.u, I, foa.E)
        return FieldEstimate(foa, pairs=pq)
    if array.is_baffled:
        hoa = sh.estimate_hoa(P, array, np.broadcast_to(frequencies, (len(P),)), hoa_order, reg, medium)
        p, u = sh.foa_from_hoa(hoa, medium)
        return FieldEstimate(foa_quantities(p, u, medium), hoa=hoa)
    if array.n_sensors == 4:
        foa = foa_from_b(a_to_b(P), medium)
        M = _capsule_frame(array)
        if M is not None:
            foa = FoaQuantities(foa.p, foa.u @ M, foa.I @ M, foa.E)
        return FieldEstimate(foa)
    raise DomainError(f"no estimator for array {array.name!r}")


# --- band report ------------------------------------------------------------

INDEX_NAMES = ("psi_ie", "psi_ave", "psi_pr", "psi_com", "psi_pr_pu", "psi_com_pu", "psi_pr_hoa", "psi_com_hoa")


@dataclass(eq=False)
class DiffusenessReport:
    """Indices and band-level vectors for one (array, band) analysis."""

    band_hz: float
    array: str
    indices: dict
    eigenvalues: np.ndarray
    intensity: np.ndarray
    energy: float
    doa: np.ndarray
    psi_pr_raw: float
    clamp_count: int = 0
    extra: dict = field(default_factory=dict)

    @property
    def doa_angles(self):
        az, zen = angles_of(self.doa)
        return float(az), float(zen)

    def doa_error(self, incidence):
        return float(angle_between(self.doa, incidence))

    def rows(self):
        """One flat record per index (the CSV/JSON schema)."""
        az, zen = self.doa_angles
        for name, value in self.indices.items():
            yield {
                "band_hz": self.band_hz,
                "array": self.array,
                "index_name": name,
                "value": value,
                "eigenvalues": " ".join(repr(float(v)) for v in self.eigenvalues),
                "I_x": float(self.intensity[0]),
                "I_y": float(self.intensity[1]),
                "I_z": float(self.intensity[2]),
                "doa_az": az,
                "doa_zen": zen,
                "clamp_count": self.clamp_count,
            }


def analyze_band(
    array,
    pressures,
    frequencies,
    band_hz,
    medium=Medium(),
    whitener=None,
    hoa_diagnostic=False,
    ave_weighting="velocity",
    printed_factor=False,
    fields=None,
):
    """Band-level indices from per-scene pressures ``(T, M)``.

    Intensity and energy are summed over scenes; covariances are averaged.
    ``psi_ave`` is reported for pair arrays, ``*_pu`` when a whitener is
    given and ``*_hoa`` (orthonormal coefficients, order 4) on request for
    rigid-sphere arrays.
    """
    fe = estimate_fields(array, pressures, frequencies, medium) if fields is None else fields
    foa = fe.foa
    I = np.sum(np.atleast_2d(foa.I), axis=0)
    E = float(np.sum(foa.E))
    if not E > 0:
        raise UndefinedFieldError("zero energy in band")
    raw_ie = psi_ie(I, E, medium, clamp=False)
    ie, clamps = clamp_unit(raw_ie)
    idx = {"psi_ie": float(ie)}
    if fe.pairs is not None:
        dq = directional_quantities(fe.pairs, medium)
        idx["psi_ave"] = psi_ave(dq, ave_weighting)
        clamps += dq.clamp_count
    eig = eigen_indices(accumulate_cov(np.atleast_2d(foa.u)), printed_factor)
    idx["psi_pr"] = eig.psi_pr
    idx["psi_com"] = eig.psi_com
    if whitener is not None:
        pu = cov_pu_whitened(foa.p, foa.u, whitener, printed_factor)
        idx["psi_pr_pu"] = pu.psi_pr
        idx["psi_com_pu"] = pu.psi_com
    if hoa_diagnostic and fe.hoa is not None:
        hoa = eigen_indices(accumulate_cov(np.atleast_2d(fe.hoa.to_n3d().values)), printed_factor)
        idx["psi_pr_hoa"] = hoa.psi_pr
        idx["psi_com_hoa"] = hoa.psi_com
    n = np.linalg.norm(I)
    doa = -I / n if n > 0 else np.full(3, np.nan)
    return DiffusenessReport(
        band_hz=float(band_hz),
        array=array.name,
        indices=idx,
        eigenvalues=eig.eigenvalues,
        intensity=I,
        energy=E,
        doa=doa,
        psi_pr_raw=eig.psi_pr_raw,
        clamp_count=clamps,
        extra={"psi_ie_raw": raw_ie},
    )


def reference_whitener(array, frequency, incidence, powers=None, medium=Medium(), order=None):
    """Whitener from the phase-expected pressure-velocity covariance of a diffuse ray set.

    ``C_ref = sum_i |A_i|^2 w_i w_i^H`` with ``w_i`` the ``[p, u]`` estimate for
    a unit wave from ``incidence[i]``.
    """
    inc = np.atleast_2d(incidence)
    pw = np.ones(len(inc)) if powers is None else np.asarray(powers, dtype=float)
    resp = sensor_response(array, inc, frequency, medium, order)
    fe = estimate_fields(array, resp, np.full(len(inc), frequency), medium)
    w = pu_samples(fe.foa.p, fe.foa.u)
    C = (w * pw[:, None]).T @ np.conj(w) / pw.sum()
    return Whitener.from_reference(C)
