"""Real spherical harmonics, rigid-sphere radial filters and HOA estimation.

Conventions
-----------
Real SH in ACN order (channel ``n*n + n + m``) with SN3D normalization,
including the ``1/sqrt(4 pi)`` factor, so ``Y_00 = 1/sqrt(4 pi)`` and

    sum_m Y_nm(a) Y_nm(b) = P_n(a.b) / (4 pi).

No Condon-Shortley phase: ``Y_11`` is proportional to ``+x``, ``Y_1,-1`` to
``+y`` and ``Y_10`` to ``+z``.

With time dependence ``exp(+j omega t)`` a unit plane wave arriving from ``s``
expands as ``exp(j k s.r) = sum_nm a_nm b_n(kr) Y_nm(r_hat)`` with
``a_nm = (2n + 1) Y_nm(s)`` and, on a rigid sphere of radius ``r``,

    b_n(x) = 4 pi j^n [ j_n(x) - j_n'(x) / h_n'(x) * h_n(x) ],

where ``h_n = j_n - j y_n`` is the outgoing (second-kind) Hankel function.
"""

import csv
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import factorial, lpmv, spherical_jn, spherical_yn

from .errors import DomainError, FormatError
from .medium import Medium

HOA_ORDER = 4
HOA_REG = 1e-4


def n_channels(N):
    return (N + 1) ** 2


def acn(n, m):
    return n * n + n + m


def acn_degree_order(k):
    """``(n, m)`` for ACN channel index ``k``."""
    n = int(np.floor(np.sqrt(k)))
    return n, k - n * n - n


def acn_orders(N):
    """Degree ``n`` of every ACN channel up to order ``N``."""
    return np.repeat(np.arange(N + 1), 2 * np.arange(N + 1) + 1)


def sh_matrix(directions, N):
    """SN3D/ACN real SH evaluated at unit ``directions`` ``(Q, 3)`` -> ``(Q, (N+1)**2)``."""
    if N < 0:
        raise DomainError("SH order must be non-negative")
    d = np.atleast_2d(np.asarray(directions, dtype=float))
    cos_t = np.clip(d[:, 2], -1.0, 1.0)
    phi = np.arctan2(d[:, 1], d[:, 0])
    Y = np.empty((len(d), n_channels(N)))
    for n in range(N + 1):
        for m in range(0, n + 1):
            # lpmv includes the Condon-Shortley phase; undo it.
            P = (-1) ** m * lpmv(m, n, cos_t)
            norm = np.sqrt((2.0 - (m == 0)) * factorial(n - m) / factorial(n + m) / (4.0 * np.pi))
            Y[:, acn(n, m)] = norm * P * np.cos(m * phi)
            if m > 0:
                Y[:, acn(n, -m)] = norm * P * np.sin(m * phi)
    return Y


def _hankel2(n, x, derivative=False):
    return spherical_jn(n, x, derivative) - 1j * spherical_yn(n, x, derivative)


def radial_filters(ka, N):
    """Rigid-sphere modal gains ``b_n(ka)`` for ``n = 0..N``.

    ``ka`` may be an array; the result has shape ``ka.shape + (N + 1,)``.
    """
    x = np.asarray(ka, dtype=float)
    if np.any(x <= 0):
        raise DomainError("ka must be positive")
    n = np.arange(N + 1)
    xx = x[..., None]
    jn = spherical_jn(n, xx)
    djn = spherical_jn(n, xx, derivative=True)
    hn = _hankel2(n, xx)
    dhn = _hankel2(n, xx, derivative=True)
    return 4.0 * np.pi * (1j**n) * (jn - djn / dhn * hn)


def radial_filters_wronskian(ka, N):
    """Same as :func:`radial_filters` via the Wronskian: ``4 pi j^n (-j) / (x**2 h_n'(x))``."""
    x = np.asarray(ka, dtype=float)
    if np.any(x <= 0):
        raise DomainError("ka must be positive")
    n = np.arange(N + 1)
    xx = x[..., None]
    return 4.0 * np.pi * (1j**n) * (-1j) / (xx**2 * _hankel2(n, xx, derivative=True))


def plane_wave_coefficients(incidence, N, amplitude=1.0, phase=0.0):
    """``a_nm = A exp(j phi) (2n + 1) Y_nm(s)`` for a wave arriving from ``s``."""
    Y = sh_matrix(np.atleast_2d(incidence), N)
    scale = np.asarray(amplitude) * np.exp(1j * np.asarray(phase))
    return (np.reshape(scale, (-1, 1)) * (2 * acn_orders(N) + 1) * Y).squeeze()


@dataclass(frozen=True, eq=False)
class HoaCoefficients:
    """SH coefficients ``(..., (N+1)**2)`` in ACN order with SN3D normalization."""

    values: np.ndarray
    order: int
    normalization: str = "sn3d"

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.shape[-1] != n_channels(self.order):
            raise DomainError(f"order {self.order} needs {n_channels(self.order)} channels, got {v.shape[-1]}")
        if self.normalization not in ("sn3d", "n3d"):
            raise DomainError(f"unknown normalization {self.normalization!r}")
        object.__setattr__(self, "values", v)

    def to_n3d(self):
        """Rescale to orthonormal (N3D) coefficients, for which diffuse fields are white."""
        if self.normalization == "n3d":
            return self
        return HoaCoefficients(self.values / np.sqrt(2 * acn_orders(self.order) + 1), self.order, "n3d")

    def to_csv(self, path):
        v = np.atleast_2d(self.values)
        if len(v) != 1:
            raise DomainError("CSV export expects a single coefficient vector")
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["acn", "re", "im"])
            for k, c in enumerate(v[0]):
                w.writerow([k, repr(float(c.real)), repr(float(c.imag))])

    @classmethod
    def from_csv(cls, path, normalization="sn3d"):
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        try:
            vals = np.array([float(r["re"]) + 1j * float(r["im"]) for r in rows])
        except (KeyError, ValueError) as exc:
            raise FormatError(f"{path}: {exc}") from exc
        N = int(round(np.sqrt(len(vals)))) - 1
        return cls(vals, N, normalization)


@lru_cache(maxsize=32)
def _angular_inverse(directions_bytes, n_dirs, N, reg):
    d = np.frombuffer(directions_bytes).reshape(n_dirs, 3)
    Y = sh_matrix(d, N)
    return np.linalg.solve(Y.T @ Y + reg * np.eye(Y.shape[1]), Y.T)


def angular_inverse(directions, N=HOA_ORDER, reg=HOA_REG):
    """Tikhonov-regularized left inverse ``(Y^T Y + reg I)^-1 Y^T`` (cached, read-only)."""
    d = np.ascontiguousarray(directions, dtype=float)
    out = _angular_inverse(d.tobytes(), len(d), int(N), float(reg))
    out.setflags(write=False)
    return out


def estimate_hoa(pressures, array, frequency, N=HOA_ORDER, reg=HOA_REG, medium=Medium()):
    """Regularized SH fit of rigid-sphere pressures followed by radial equalization.

    ``pressures`` is ``(M,)`` or ``(T, M)``; ``frequency`` a scalar or ``(T,)``.
    Returns :class:`HoaCoefficients` with values ``(..., (N+1)**2)``.
    """
    if not array.is_baffled:
        raise DomainError(f"array {array.name!r} is not a rigid-sphere array")
    p = np.asarray(pressures, dtype=complex)
    if p.shape[-1] != array.n_sensors:
        raise DomainError(f"expected {array.n_sensors} sensor values, got {p.shape[-1]}")
    dirs = array.positions / array.baffle_radius
    P = angular_inverse(dirs, N, reg)
    fit = p @ P.T
    ka = medium.wavenumber(frequency) * array.baffle_radius
    b = radial_filters(ka, N)[..., acn_orders(N)]
    if p.ndim == 2 and b.ndim == 1:
        b = b[None, :]
    return HoaCoefficients(fit / b, N)


def foa_from_hoa(coeffs, medium=Medium()):
    """Pressure and particle velocity at the array centre from SN3D coefficients.

    ``p = sqrt(4 pi) a_00`` and ``u = -sqrt(4 pi) / (3 rho c) [a_11, a_1-1, a_10]``
    (x, y, z from ACN channels 3, 1, 2). Returns ``(p, u)`` with ``u`` of shape
    ``(..., 3)``.

    The constants follow from a unit plane wave arriving from ``s``: its SN3D
    coefficients are ``a_00 = 1 / sqrt(4 pi)`` and ``a_1 = 3 s / sqrt(4 pi)``,
    and the wave has ``p = 1`` and ``u = -s / (rho c)`` at the origin.
    """
    if coeffs.order < 1:
        raise DomainError("first-order coefficients are required for particle velocity")
    a = coeffs if coeffs.normalization == "sn3d" else HoaCoefficients(
        coeffs.values * np.sqrt(2 * acn_orders(coeffs.order) + 1), coeffs.order
    )
    v = a.values
    p = np.sqrt(4.0 * np.pi) * v[..., 0]
    u = -np.sqrt(4.0 * np.pi) / (3.0 * medium.Z0) * v[..., [3, 1, 2]]
    return p, u
