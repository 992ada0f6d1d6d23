"""Critical points, linearization and phase portraits of qubit flows; trajectory observables.

Qubit flows are written in the two charts of CP^1: chart 2 (the plane
z = psi^1/psi^2, Bloch sphere minus the north pole |1>) and chart 1
(zeta = psi^2/psi^1, sphere minus the south pole |2>).  Planar vector
fields are complex functions F(z, zbar); their linearization uses the
Wirtinger derivatives F_z, F_zbar.
"""

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import minimize_scalar

from .dynamics import ContactHamiltonianSpec, LinearDissipation, StepControl, Trajectory, integrate
from .errors import DegenerateV, DimensionMismatch, StepFailure, UnsupportedScenario
from .states import BlochPoint, ExtendedState, ProjectiveState, bloch, normalized_representative

CLASSIFICATIONS = ("center", "stable focus", "unstable focus", "stable node", "unstable node", "saddle",
                   "non-hyperbolic")


# -- linearization -------------------------------------------------------------------

def real_jacobian(fz: complex, fzb: complex) -> np.ndarray:
    """Real 2x2 Jacobian of a planar field F from its Wirtinger derivatives."""
    dx = fz + fzb
    dy = 1j * (fz - fzb)
    return np.array([[dx.real, dy.real], [dx.imag, dy.imag]])


def numeric_jacobian(F, z: complex, h: Optional[float] = None) -> np.ndarray:
    """Central-difference real Jacobian of the complex function ``F`` at ``z``."""
    h = 1e-6 * max(1.0, abs(z)) if h is None else h
    dx = (F(z + h) - F(z - h)) / (2 * h)
    dy = (F(z + 1j * h) - F(z - 1j * h)) / (2 * h)
    return np.array([[dx.real, dy.real], [dx.imag, dy.imag]])


def classify_eigenvalues(eigenvalues, tol: float = 1e-9) -> str:
    """Standard planar classification of a critical point from its two eigenvalues."""
    l1, l2 = (complex(x) for x in eigenvalues)
    t = tol * max(1.0, abs(l1), abs(l2))
    re1, re2 = (0.0 if abs(l.real) <= t else l.real for l in (l1, l2))
    oscillating = abs(l1.imag) > t or abs(l2.imag) > t
    if re1 == 0.0 and re2 == 0.0:
        return "center" if oscillating else "non-hyperbolic"
    if re1 == 0.0 or re2 == 0.0:
        return "non-hyperbolic"
    if oscillating:
        return "stable focus" if re1 < 0 else "unstable focus"
    if re1 < 0 and re2 < 0:
        return "stable node"
    if re1 > 0 and re2 > 0:
        return "unstable node"
    return "saddle"


def _sorted_eigs(M) -> tuple:
    ev = np.linalg.eigvals(M)
    return tuple(sorted((complex(x) for x in ev), key=lambda c: (c.real, c.imag)))


@dataclass(frozen=True)
class CriticalPoint:
    z: complex
    eigenvalues: tuple
    classification: str
    chart: int = 2
    label: str = ""

    @property
    def bloch(self) -> BlochPoint:
        return bloch(ProjectiveState(self.chart, [self.z]))


# -- the qubit field ---------------------------------------------------------------------

@dataclass(frozen=True)
class QubitField:
    """Contact flow of e_H - gamma S for H = [[H1, V], [conj V, H2]], in either chart.

    With ``pole_singular`` the chart-1 field has the term (gamma/2)(1 + |zeta|^2)/conj(zeta),
    so the north pole is a source (gamma > 0) or sink (gamma < 0) rather than a regular point.
    """

    H1: float
    H2: float
    V: complex
    gamma: float = 0.0
    hbar: float = 1.0

    @classmethod
    def from_spec(cls, spec: ContactHamiltonianSpec) -> "QubitField":
        if spec.n != 2:
            raise DimensionMismatch("phase portraits are defined for qubits (n = 2)")
        if not isinstance(spec.fiber, LinearDissipation):
            raise UnsupportedScenario("the planar z-flow decouples from S only for linear dissipation")
        H = spec.H
        return cls(float(H[0, 0].real), float(H[1, 1].real), complex(H[0, 1]), spec.fiber.gamma, spec.hbar)

    @property
    def spec(self) -> ContactHamiltonianSpec:
        H = np.array([[self.H1, self.V], [np.conj(self.V), self.H2]])
        return ContactHamiltonianSpec(H, LinearDissipation(self.gamma), self.hbar)

    @property
    def pole_singular(self) -> bool:
        return self.gamma != 0.0

    def rhs(self, z: complex, chart: int = 2) -> complex:
        i_h = 1j / self.hbar
        V, Vb, d, g = self.V, np.conj(self.V), self.H1 - self.H2, self.gamma
        if chart == 2:
            return complex(i_h * (Vb * z * z - d * z - V) - 0.5 * g * z * (1.0 + abs(z) ** 2))
        if chart == 1:
            f = -i_h * (Vb + (-d) * z - V * z * z)
            if g:
                f = f + 0.5 * g * (1.0 / np.conj(z) + z)
            return complex(f)
        raise ValueError("qubit charts are 1 and 2")

    def wirtinger(self, z: complex, chart: int = 2) -> tuple[complex, complex]:
        """(F_z, F_zbar) of the chart field at ``z``."""
        i_h = 1j / self.hbar
        V, Vb, d, g = self.V, np.conj(self.V), self.H1 - self.H2, self.gamma
        if chart == 2:
            return (complex(i_h * (2 * Vb * z - d) - 0.5 * g * (1.0 + 2 * abs(z) ** 2)),
                    complex(-0.5 * g * z * z))
        if chart == 1:
            fz = -i_h * (-d - 2 * V * z) + 0.5 * g
            fzb = -0.5 * g / np.conj(z) ** 2 if g else 0.0
            return complex(fz), complex(fzb)
        raise ValueError("qubit charts are 1 and 2")

    def jacobian(self, z: complex, chart: int = 2) -> np.ndarray:
        return real_jacobian(*self.wirtinger(z, chart))

    def linearize(self, z: complex, chart: int = 2, label: str = "") -> CriticalPoint:
        eigs = _sorted_eigs(self.jacobian(z, chart))
        return CriticalPoint(complex(z), eigs, classify_eigenvalues(eigs), chart, label)

    def pole_point(self) -> Optional[CriticalPoint]:
        """The north pole as a singular critical point of the sphere flow (None if it is regular)."""
        if not self.pole_singular:
            return None
        # radial speed d|zeta|/dt ~ gamma/(2|zeta|) dominates; rotation comes from H1 - H2
        omega = (self.H1 - self.H2) / self.hbar
        r = math.copysign(math.inf, self.gamma)
        eigs = (complex(r, -omega), complex(r, omega)) if omega else (complex(r, 0), complex(r, 0))
        kind = "focus" if omega else "node"
        stability = "unstable" if self.gamma > 0 else "stable"
        return CriticalPoint(0j, eigs, f"{stability} {kind}", 1, "north pole")


# -- conservative qubit ----------------------------------------------------------------------

def degenerate_critical_points(H1, H2, hbar: float = 1.0) -> list[CriticalPoint]:
    """Critical points of the uncoupled (V = 0) qubit: the south pole z = 0 and the north pole."""
    if H1 == H2:
        raise DegenerateV("H = H1 * identity: every state is a critical point")
    q = QubitField(H1, H2, 0j, 0.0, hbar)
    return [q.linearize(0j, 2, "south pole"), q.linearize(0j, 1, "north pole")]


def conservative_critical_points(H1, H2, V, hbar: float = 1.0) -> list[CriticalPoint]:
    """The two roots of the Riccati equation conj(V) z^2 - (H1 - H2) z - V = 0, both centers.

    For V = 0 raises DegenerateV; the exception's ``points`` attribute holds the
    special-case critical points (z = 0 and the north pole) when they are isolated.
    """
    V = complex(V)
    if V == 0:
        exc = DegenerateV("V = 0: the closed-form roots divide by conj(V)")
        exc.points = degenerate_critical_points(H1, H2, hbar) if H1 != H2 else []
        raise exc
    d = H1 - H2
    root = math.sqrt(d * d + 4 * abs(V) ** 2)
    q = QubitField(H1, H2, V, 0.0, hbar)
    return [q.linearize((d + s * root) / (2 * np.conj(V)), 2, label)
            for s, label in ((1, "z+"), (-1, "z-"))]


# -- dissipative qubit ----------------------------------------------------------------------

@dataclass(frozen=True)
class BifurcationReport:
    delta_minus: float
    regime: str
    sub_case: Optional[str] = None  # "foci" or "nodes" in regime iii


def _delta_minus(V, gamma, hbar):
    return 4 * abs(V) ** 2 - (hbar * gamma) ** 2


def classify_bifurcation(V, gamma, hbar: float = 1.0) -> BifurcationReport:
    """Regime i/ii/iii of the H1 = H2 dissipative qubit from the sign of 4|V|^2 - hbar^2 gamma^2."""
    dm = _delta_minus(V, gamma, hbar)
    eps = 1e-12 * 4 * abs(V) ** 2
    if abs(dm) <= eps:
        return BifurcationReport(dm, "ii")
    if dm < 0:
        return BifurcationReport(dm, "i")
    return BifurcationReport(dm, "iii", "foci" if dm / hbar ** 2 - gamma ** 2 / 4 > 0 else "nodes")


def dissipative_eigenvalues(V, gamma, hbar: float = 1.0) -> dict:
    """Closed-form eigenvalues: 'z12' (only if 4|V|^2 >= hbar^2 gamma^2) and 'z3'."""
    report = classify_bifurcation(V, gamma, hbar)
    dm = 0.0 if report.regime == "ii" else report.delta_minus
    out = {}
    if report.regime != "i":
        w = np.sqrt(complex(dm / hbar ** 2 - gamma ** 2 / 4))
        out["z12"] = (complex(-gamma / 2 - 1j * w), complex(-gamma / 2 + 1j * w))
    # dm = 4|V|^2 - hbar^2 gamma^2 exactly at regime ii
    four_v2 = dm + (hbar * gamma) ** 2
    out["z3"] = tuple(complex(-((hbar * gamma) ** 2 + s * four_v2) / (2 * hbar ** 2 * gamma)) for s in (1, -1))
    return out


def dissipative_critical_points(H1, H2, V, gamma, hbar: float = 1.0) -> list[CriticalPoint]:
    """Critical points of the H1 = H2 dissipative qubit in chart 2.

    Returns z_s^(1), z_s^(2) (merged into one point when they coincide, regime ii)
    followed by z_s^(3) = -2iV/(hbar gamma).  Eigenvalues are the closed forms.
    """
    if H1 != H2:
        raise UnsupportedScenario("closed-form dissipative critical points need H1 = H2")
    V = complex(V)
    if V == 0:
        raise DegenerateV("V = 0: no isolated in-plane critical points besides the origin")
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    report = classify_bifurcation(V, gamma, hbar)
    eigs = dissipative_eigenvalues(V, gamma, hbar)
    Vb = np.conj(V)
    points = []
    if report.regime == "iii":
        root = math.sqrt(report.delta_minus)
        for s, label in ((1, "z1"), (-1, "z2")):
            points.append(CriticalPoint(complex((-1j * hbar * gamma + s * root) / (2 * Vb)), eigs["z12"],
                                        classify_eigenvalues(eigs["z12"]), 2, label))
    elif report.regime == "ii":
        points.append(CriticalPoint(complex(-1j * hbar * gamma / (2 * Vb)), eigs["z12"],
                                    classify_eigenvalues(eigs["z12"]), 2, "z12"))
    z3 = complex(-2j * V / (hbar * gamma))
    points.append(CriticalPoint(z3, eigs["z3"], classify_eigenvalues(eigs["z3"]), 2, "z3"))
    return points


# -- phase portraits ---------------------------------------------------------------------------

@dataclass
class PhasePortrait:
    """Field samples over a window in both charts, streamlines and the critical-point census."""

    chart: np.ndarray
    x: np.ndarray
    y: np.ndarray
    dz: np.ndarray
    bloch: np.ndarray
    critical_points: list
    streamlines: list = field(default_factory=list)

    def census(self) -> dict:
        counts = {}
        for p in self.critical_points:
            counts[p.classification] = counts.get(p.classification, 0) + 1
        return counts


def _newton(q: QubitField, z0: complex, chart: int, tol: float, max_iter: int = 60):
    z = complex(z0)
    for _ in range(max_iter):
        F = q.rhs(z, chart)
        if not np.isfinite(F):
            return None
        J = q.jacobian(z, chart)
        if abs(F) < tol:
            # one polishing step; keep it only if it helps
            try:
                dx, dy = np.linalg.solve(J, [-F.real, -F.imag])
            except np.linalg.LinAlgError:
                return z
            z2 = z + complex(dx, dy)
            return z2 if abs(q.rhs(z2, chart)) < abs(F) else z
        try:
            dx, dy = np.linalg.solve(J, [-F.real, -F.imag])
        except np.linalg.LinAlgError:
            return None
        z += complex(dx, dy)
    F = q.rhs(z, chart)
    return z if np.isfinite(F) and abs(F) < tol else None


def _local_minima(mag: np.ndarray):
    rows, cols = mag.shape
    padded = np.pad(mag, 1, constant_values=np.inf)
    out = []
    for i in range(rows):
        for j in range(cols):
            if mag[i, j] <= padded[i:i + 3, j:j + 3].min():
                out.append((i, j))
    return out


def phase_portrait(field, window=(-3.0, 3.0, -3.0, 3.0), grid=(41, 41), streamline_seeds: int = 0,
                   streamline_time: float = 2.0, tol: float = 1e-10) -> PhasePortrait:
    """Sample the qubit flow on ``grid`` points of ``window`` in chart 2 and chart 1.

    ``field`` is a QubitField or a qubit ContactHamiltonianSpec with linear dissipation.
    Critical points are located from local minima of |F| on each chart's grid,
    refined by Newton's method, merged across charts on the Bloch sphere and
    classified from the Wirtinger Jacobian.  A singular north pole is added
    with the source/sink rule of QubitField.pole_point.
    """
    q = field if isinstance(field, QubitField) else QubitField.from_spec(field)
    x0, x1, y0, y1 = map(float, window)
    nx, ny = map(int, grid)
    if nx < 2 or ny < 2 or not (x1 > x0 and y1 > y0):
        raise ValueError("window must be non-empty and grid at least 2x2")
    xs, ys = np.linspace(x0, x1, nx), np.linspace(y0, y1, ny)
    charts, X, Y, D, B = [], [], [], [], []
    candidates = []
    for chart in (2, 1):
        mag = np.empty((ny, nx))
        for i, y in enumerate(ys):
            for j, x in enumerate(xs):
                z = complex(x, y)
                F = q.rhs(z, chart) if (chart == 2 or z != 0 or not q.pole_singular) else complex(np.nan, np.nan)
                mag[i, j] = abs(F) if np.isfinite(F) else np.inf
                charts.append(chart)
                X.append(x)
                Y.append(y)
                D.append(F)
                B.append(bloch(ProjectiveState(chart, [z])))
        for i, j in _local_minima(mag):
            if np.isfinite(mag[i, j]):
                candidates.append((chart, complex(xs[j], ys[i])))
    found = []
    for chart, z0 in candidates:
        z = _newton(q, z0, chart, tol)
        if z is None:
            continue
        if chart == 1 and q.pole_singular and abs(z) < 1e-6:
            continue
        # keep a point in chart 2 when that chart contains it with moderate coordinates
        if chart == 1 and z != 0 and abs(1 / z) < 1e3:
            z2 = _newton(q, 1 / z, 2, tol)
            if z2 is not None:
                chart, z = 2, z2
        bp = np.array(bloch(ProjectiveState(chart, [z])))
        if any(np.linalg.norm(bp - np.array(p.bloch)) < 1e-6 for p in found):
            continue
        found.append(q.linearize(z, chart))
    pole = q.pole_point()
    if pole is not None:
        found.append(pole)
    lines = _streamlines(q, window, streamline_seeds, streamline_time) if streamline_seeds else []
    return PhasePortrait(np.array(charts), np.array(X), np.array(Y), np.array(D, dtype=complex),
                         np.array(B), found, lines)


def _streamlines(q: QubitField, window, seeds: int, t_end: float) -> list:
    """Short chart-2 trajectories from a uniform seed lattice (as arrays of Bloch points)."""
    x0, x1, y0, y1 = window
    k = max(1, int(round(math.sqrt(seeds))))
    spec = q.spec
    lines = []
    for x in np.linspace(x0, x1, k + 2)[1:-1]:
        for y in np.linspace(y0, y1, k + 2)[1:-1]:
            e0 = ExtendedState(ProjectiveState(2, [complex(x, y)]))
            try:
                traj = integrate(spec, e0, (0.0, t_end), StepControl(rtol=1e-6, atol=1e-9),
                                 t_eval=np.linspace(0.0, t_end, 50))
            except StepFailure:
                continue
            lines.append(np.array([bloch(e.state) for e in traj.states]))
    return lines


# -- trajectory observables -------------------------------------------------------------------------

@dataclass
class ObservableTable:
    t: np.ndarray
    chart: np.ndarray
    e_H: np.ndarray
    var_H: np.ndarray
    P: np.ndarray
    bloch: np.ndarray  # shape (samples, 3); NaN unless n = 2


def _moments(H, s: ProjectiveState):
    psi = normalized_representative(s)
    Hpsi = H @ psi
    e = float(np.vdot(psi, Hpsi).real)
    r = Hpsi - e * psi
    return e, float(np.vdot(r, r).real), psi


def trajectory_observables(traj: Trajectory, H, reference_level: int = 1) -> ObservableTable:
    """Per-sample e_H, variance of H, population of ``reference_level`` and Bloch point."""
    H = np.asarray(H, dtype=complex)
    k = len(traj.states)
    e_H, var_H, P = np.empty(k), np.empty(k), np.empty(k)
    B = np.full((k, 3), np.nan)
    for i, e in enumerate(traj.states):
        e_H[i], var_H[i], psi = _moments(H, e.state)
        P[i] = abs(psi[reference_level - 1]) ** 2
        if e.n == 2:
            B[i] = bloch(e.state)
    return ObservableTable(np.asarray(traj.times, dtype=float), np.array([e.chart for e in traj.states]),
                           e_H, var_H, P, B)


def uncertainty_peak(traj: Trajectory, H) -> tuple[float, float]:
    """(t, max variance of H) refined on the trajectory's dense output."""
    H = np.asarray(H, dtype=complex)
    table = trajectory_observables(traj, H)
    k = int(np.argmax(table.var_H))
    lo = table.t[max(k - 1, 0)]
    hi = table.t[min(k + 1, len(table.t) - 1)]
    if hi <= lo:
        return float(table.t[k]), float(table.var_H[k])
    res = minimize_scalar(lambda t: -_moments(H, traj.state_at(t).state)[1], bounds=(lo, hi),
                          method="bounded", options={"xatol": 1e-10})
    if -res.fun >= table.var_H[k]:
        return float(res.x), float(-res.fun)
    return float(table.t[k]), float(table.var_H[k])
