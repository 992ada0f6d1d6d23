"""Pure-state representations and the maps between them.

A pure state of an n-level system is a ray of C^n.  On the chart U_j
(where the j-th amplitude is nonzero) it is described by the n-1 complex
homogeneous coordinates ``z^k = psi^k / psi^j`` for k != j, stored in
increasing k with the pivot entry removed.  Charts are numbered 1..n.
Chart n is the reference chart: the chart-n point ``z`` corresponds to the
normalized vector ``(z, 1) / sqrt(1 + |z|^2)``.
"""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ChartSingular, DimensionMismatch

#: |psi^j| below this fraction of ||psi|| makes chart j inadmissible.
CHART_THRESHOLD = 1e-12


def as_hilbert_vector(psi) -> np.ndarray:
    """Validate and return ``psi`` as a complex vector of length n >= 2."""
    psi = np.asarray(psi, dtype=complex)
    if psi.ndim != 1 or psi.size < 2:
        raise DimensionMismatch(f"expected a vector with at least 2 components, got shape {psi.shape}")
    if not np.all(np.isfinite(psi)):
        raise ValueError("Hilbert vector has non-finite components")
    if not np.any(psi):
        raise ValueError("the zero vector does not represent a state")
    return psi


@dataclass(frozen=True, eq=False)
class ProjectiveState:
    """A point of CP(H_0) given by its chart index and homogeneous coordinates."""

    chart: int
    z: np.ndarray

    def __post_init__(self):
        z = np.array(self.z, dtype=complex).reshape(-1)
        z.setflags(write=False)
        object.__setattr__(self, "z", z)
        if z.size < 1:
            raise DimensionMismatch("a projective state needs at least one coordinate")
        if not 1 <= self.chart <= z.size + 1:
            raise ValueError(f"chart {self.chart} out of range 1..{z.size + 1}")
        if not np.all(np.isfinite(z)):
            raise ChartSingular(f"coordinates in chart {self.chart} are not finite")

    @property
    def n(self) -> int:
        return self.z.size + 1

    @property
    def norm_sq(self) -> float:
        """|z|^2 in this chart."""
        return float(np.vdot(self.z, self.z).real)

    def homogeneous(self) -> np.ndarray:
        """Unnormalized vector with the pivot amplitude set to 1."""
        return np.insert(self.z, self.chart - 1, 1.0)

    def isclose(self, other: "ProjectiveState", tol: float = 1e-12) -> bool:
        if self.n != other.n:
            return False
        try:
            other = chart_transition(other, self.chart)
        except ChartSingular:
            return False
        scale = max(1.0, float(np.max(np.abs(self.z))))
        return bool(np.max(np.abs(self.z - other.z)) <= tol * scale)

    def __eq__(self, other):
        if not isinstance(other, ProjectiveState):
            return NotImplemented
        return self.isclose(other)

    __hash__ = None

    def __repr__(self):
        return f"ProjectiveState(chart={self.chart}, z={np.array2string(self.z, precision=6)})"


@dataclass(frozen=True, eq=False)
class ExtendedState:
    """A point of CP(H_0) x R: projective state plus the fiber coordinate S."""

    state: ProjectiveState
    S: float = 0.0

    @property
    def chart(self) -> int:
        return self.state.chart

    @property
    def z(self) -> np.ndarray:
        return self.state.z

    @property
    def n(self) -> int:
        return self.state.n

    def __eq__(self, other):
        if not isinstance(other, ExtendedState):
            return NotImplemented
        return self.S == other.S and self.state == other.state

    __hash__ = None


class BlochPoint(NamedTuple):
    x1: float
    x2: float
    x3: float


def _check_pivot(psi, chart):
    if not 1 <= chart <= psi.size:
        raise ValueError(f"chart {chart} out of range 1..{psi.size}")
    if abs(psi[chart - 1]) < CHART_THRESHOLD * np.linalg.norm(psi):
        raise ChartSingular(f"component {chart} vanishes; chart {chart} is not admissible")


def project(psi, chart: int) -> ProjectiveState:
    """Homogeneous coordinates of the ray through ``psi`` in the given chart."""
    psi = as_hilbert_vector(psi)
    _check_pivot(psi, chart)
    z = np.delete(psi, chart - 1) / psi[chart - 1]
    return ProjectiveState(chart, z)


def best_chart(psi) -> int:
    """Chart whose pivot is the largest-magnitude component (1-based)."""
    psi = as_hilbert_vector(psi)
    return int(np.argmax(np.abs(psi))) + 1


def project_auto(psi) -> ProjectiveState:
    return project(psi, best_chart(psi))


def normalized_representative(s: ProjectiveState) -> np.ndarray:
    psi = s.homogeneous()
    return psi / np.sqrt(1.0 + s.norm_sq)


def density_matrix(s: ProjectiveState) -> np.ndarray:
    """Rank-one projector onto the ray ``s``."""
    psi = normalized_representative(s)
    return np.outer(psi, psi.conj())


def chart_transition(s: ProjectiveState, new_chart: int) -> ProjectiveState:
    if new_chart == s.chart:
        return s
    return project(s.homogeneous(), new_chart)


def reference_chart(s: ProjectiveState) -> ProjectiveState:
    """Re-express ``s`` in chart n (raises ChartSingular on the hyperplane psi^n = 0)."""
    return chart_transition(s, s.n)


def bloch(s: ProjectiveState) -> BlochPoint:
    """Bloch-sphere point by stereographic projection from the north pole (n = 2).

    The north pole (0, 0, 1) is the excited level |1>, reached only in chart 1.
    """
    if s.n != 2:
        raise DimensionMismatch(f"Bloch coordinates need n = 2, got n = {s.n}")
    if s.chart == 2:
        z = s.z[0]
        d = 1.0 + abs(z) ** 2
        return BlochPoint(2 * z.real / d, 2 * z.imag / d, (abs(z) ** 2 - 1.0) / d)
    psi = normalized_representative(s)
    c = psi[0] * np.conj(psi[1])
    return BlochPoint(2 * c.real, 2 * c.imag, abs(psi[0]) ** 2 - abs(psi[1]) ** 2)


def random_state(n: int, rng: np.random.Generator, chart: int | None = None) -> ProjectiveState:
    """Haar-random pure state, expressed in ``chart`` (default: chart n)."""
    psi = rng.normal(size=n) + 1j * rng.normal(size=n)
    return project(psi, n if chart is None else chart)
