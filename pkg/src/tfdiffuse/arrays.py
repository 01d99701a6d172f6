"""Geometry of the three arrays: Afmt, Fibo64 and TF24."""

import json
from dataclasses import dataclass, field, replace

import numpy as np

from . import directivity as dv
from .errors import DomainError, FormatError
from .spatial import TF24_AXES, fibonacci_sphere

AFMT_RADIUS = 0.006
FIBO64_RADIUS = 0.042
TF24_RADIUS = 0.010

#: Capsule axes FLU, FRD, BLD, BRU.
AFMT_AXES = np.array([[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]], dtype=float) / np.sqrt(3.0)
AFMT_AXES.setflags(write=False)

TF24_FIXTURE = "tf24_dpa4017_like"


def _frozen(a, dtype=float):
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class PairEntry:
    axis: np.ndarray
    plus: int
    minus: int


@dataclass(frozen=True, eq=False)
class ArraySpec:
    """Sensor positions (m), unit orientations, a shared directivity model and optional baffle.

    ``pairs`` is non-empty only for arrays processed as back-to-back pairs (TF24).
    """

    name: str
    positions: np.ndarray
    orientations: np.ndarray
    directivity: dv.BandedDirectivity
    sensitivities: np.ndarray = None
    baffle_radius: float = None
    pairs: tuple = field(default=())

    def __post_init__(self):
        pos = _frozen(self.positions)
        ori = _frozen(self.orientations)
        if pos.ndim != 2 or pos.shape[1] != 3 or ori.shape != pos.shape:
            raise DomainError("positions and orientations must both be M x 3")
        if np.any(np.abs(np.linalg.norm(ori, axis=1) - 1.0) > 1e-12):
            raise DomainError("orientations must be unit vectors")
        sens = np.ones(len(pos)) if self.sensitivities is None else self.sensitivities
        sens = _frozen(sens)
        if sens.shape != (len(pos),):
            raise DomainError("one sensitivity per sensor required")
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "orientations", ori)
        object.__setattr__(self, "sensitivities", sens)

    @property
    def n_sensors(self):
        return len(self.positions)

    @property
    def is_baffled(self):
        return self.baffle_radius is not None

    @property
    def axes(self):
        """Pair axes as an ``(n_pairs, 3)`` direction matrix."""
        return np.array([p.axis for p in self.pairs])

    @property
    def plus_index(self):
        return np.array([p.plus for p in self.pairs], dtype=int)

    @property
    def minus_index(self):
        return np.array([p.minus for p in self.pairs], dtype=int)

    def with_directivity(self, directivity):
        return replace(self, directivity=directivity)

    def rotated(self, Q):
        """Rigidly rotate the array by the orthogonal matrix ``Q``."""
        Q = np.asarray(Q, dtype=float)
        pairs = tuple(PairEntry(_frozen(Q @ p.axis), p.plus, p.minus) for p in self.pairs)
        return replace(self, positions=self.positions @ Q.T, orientations=self.orientations @ Q.T, pairs=pairs)


def make_afmt(directivity=None):
    """Tetrahedral A-format array, capsules 6 mm from the origin (ideal cardioids by default)."""
    d = dv.CARDIOID_BANDED if directivity is None else directivity
    return ArraySpec("afmt", AFMT_RADIUS * AFMT_AXES, AFMT_AXES, d)


def make_fibo64():
    """64 omnidirectional sensors on a rigid sphere of radius 42 mm at Fibonacci-lattice points."""
    pos = FIBO64_RADIUS * fibonacci_sphere(64)
    return ArraySpec("fibo64", pos, pos / FIBO64_RADIUS, dv.OMNI_BANDED, baffle_radius=FIBO64_RADIUS)


def make_tf24(directivity=None):
    """12 back-to-back pairs along the tight-frame axes, 10 mm from the origin (20 mm spacing).

    Sensor ``2i`` is the ``+`` end of axis ``i`` and ``2i + 1`` the ``-`` end.
    The default directivity is the shipped narrow-lobe fixture.
    """
    d = dv.load_fixture(TF24_FIXTURE) if directivity is None else directivity
    axes = np.asarray(TF24_AXES)
    ori = np.empty((24, 3))
    ori[0::2] = axes
    ori[1::2] = -axes
    pairs = tuple(PairEntry(_frozen(axes[i]), 2 * i, 2 * i + 1) for i in range(12))
    return ArraySpec("tf24", TF24_RADIUS * ori, ori, d, pairs=pairs)


ARRAY_NAMES = ("afmt", "fibo64", "tf24")


def make_array(name, directivity=None):
    if name == "afmt":
        return make_afmt(directivity)
    if name == "fibo64":
        if directivity is not None:
            raise DomainError("fibo64 sensors are omnidirectional; no directivity override")
        return make_fibo64()
    if name == "tf24":
        return make_tf24(directivity)
    raise DomainError(f"unknown array {name!r}; expected one of {ARRAY_NAMES}")


def array_to_dict(spec):
    return {
        "name": spec.name,
        "sensors": [
            {"position": list(map(float, p)), "orientation": list(map(float, o)), "sensitivity": float(s)}
            for p, o, s in zip(spec.positions, spec.orientations, spec.sensitivities)
        ],
        "directivity": dv.directivity_to_dict(spec.directivity),
        "baffle": None if spec.baffle_radius is None else {"type": "rigid_sphere", "radius": spec.baffle_radius},
        "pairs": [{"axis": list(map(float, p.axis)), "plus": p.plus, "minus": p.minus} for p in spec.pairs],
    }


def array_from_dict(obj):
    try:
        sensors = obj["sensors"]
        baffle = obj.get("baffle")
        return ArraySpec(
            name=obj["name"],
            positions=[s["position"] for s in sensors],
            orientations=[s["orientation"] for s in sensors],
            sensitivities=[s.get("sensitivity", 1.0) for s in sensors],
            directivity=dv.directivity_from_dict(obj["directivity"]),
            baffle_radius=None if baffle is None else float(baffle["radius"]),
            pairs=tuple(PairEntry(_frozen(p["axis"]), int(p["plus"]), int(p["minus"])) for p in obj.get("pairs", [])),
        )
    except (KeyError, TypeError) as exc:
        raise FormatError(f"malformed array layout: {exc}") from exc


def save_array(path, spec):
    with open(path, "w") as fh:
        json.dump(array_to_dict(spec), fh, indent=2)
        fh.write("\n")


def load_array(path):
    with open(path) as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FormatError(f"{path}: {exc}") from exc
    return array_from_dict(obj)
