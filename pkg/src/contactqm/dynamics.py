"""Hamiltonian, gradient and contact-Hamiltonian flows on CP(H_0) (x R).

The contact Hamiltonian is ``e_H + f(S)``.  Its vector field is defined
through the contact form built on chart n (the reference chart); in any
other chart the field is obtained by pushing that vector field forward, so
trajectories that switch charts follow one global flow.  The pushed-forward
dissipative term is singular on the hyperplane psi^n = 0 (for a qubit: the
north pole), which is a source of the flow when f'(S) < 0.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from numpy.polynomial import Polynomial
from scipy.integrate import solve_ivp

from .errors import ChartSingular, DimensionMismatch, DomainError, StepFailure
from .geometry import (ScalarField, TangentVector, _ext, _proj, expectation,
                       expectation_dzbar, poisson)
from .states import ExtendedState, ProjectiveState, best_chart, chart_transition, density_matrix

log = logging.getLogger(__name__)

__all__ = [
    "LinearDissipation", "GeneralDissipation", "ContactHamiltonianSpec",
    "expectation", "hamiltonian_field", "gradient_field", "contact_vector_field",
    "contact_field", "extended_gradient", "observable_rate", "decay_closed_form",
    "decay_parameters", "excited_state", "StepControl", "Trajectory", "integrate",
]


# -- contact Hamiltonian description -------------------------------------------

@dataclass(frozen=True)
class LinearDissipation:
    """f(S) = -gamma S."""

    gamma: float = 0.0

    def f(self, S: float) -> float:
        return -self.gamma * S

    def df(self, S: float) -> float:
        return -self.gamma


@dataclass(frozen=True)
class GeneralDissipation:
    """Arbitrary f(S) with its derivative."""

    f: Callable[[float], float]
    df: Callable[[float], float]
    coeffs: Optional[tuple] = None

    @classmethod
    def polynomial(cls, coeffs: Sequence[float]) -> "GeneralDissipation":
        """f(S) = sum_k coeffs[k] S^k."""
        p = Polynomial(np.asarray(coeffs, dtype=float))
        dp = p.deriv()
        return cls(lambda S: float(p(S)), lambda S: float(dp(S)), tuple(float(c) for c in coeffs))


@dataclass(frozen=True, eq=False)
class ContactHamiltonianSpec:
    H: np.ndarray
    fiber: object = field(default_factory=LinearDissipation)
    hbar: float = 1.0

    def __post_init__(self):
        H = np.array(self.H, dtype=complex)
        if H.ndim != 2 or H.shape[0] != H.shape[1] or H.shape[0] < 2:
            raise DimensionMismatch(f"Hamiltonian must be square with n >= 2, got {H.shape}")
        if not np.allclose(H, H.conj().T, atol=1e-12, rtol=0):
            raise ValueError("Hamiltonian is not Hermitian")
        H.setflags(write=False)
        object.__setattr__(self, "H", H)
        if not self.hbar > 0:
            raise ValueError("hbar must be positive")

    @property
    def n(self) -> int:
        return self.H.shape[0]

    @property
    def is_linear(self) -> bool:
        return isinstance(self.fiber, LinearDissipation)

    @property
    def gamma(self) -> float:
        if not self.is_linear:
            raise AttributeError("gamma is defined only for linear dissipation")
        return self.fiber.gamma

    def value(self, e: ExtendedState) -> float:
        return expectation(self.H, e.state) + self.fiber.f(e.S)

    def as_field(self) -> ScalarField:
        return ScalarField.expectation(self.H) + ScalarField.fiber(self.fiber.f, self.fiber.df)


# -- symplectic vector fields ----------------------------------------------------

def _riccati(H, s: ProjectiveState, hbar):
    # (-i/hbar)[(H psi)_k - z_k (H psi)_pivot]; the matrix Riccati equation in any chart
    psi = s.homogeneous()
    Hpsi = np.asarray(H) @ psi
    j = s.chart - 1
    return -1j / hbar * (np.delete(Hpsi, j) - s.z * Hpsi[j])


def hamiltonian_field(H, s, hbar: float = 1.0) -> TangentVector:
    p = _proj(s)
    if np.shape(H) != (p.n, p.n):
        raise DimensionMismatch(f"operator shape {np.shape(H)} does not match n = {p.n}")
    return TangentVector(_riccati(H, p, hbar), 0.0)


def gradient_field(H, s, hbar: float = 1.0) -> TangentVector:
    X = hamiltonian_field(H, s, hbar)
    return TangentVector(X.dz / 1j, 0.0)


# -- contact vector fields ---------------------------------------------------------

def contact_vector_field(Hc: ScalarField, e, hbar: float = 1.0) -> TangentVector:
    """Contact Hamiltonian vector field of an arbitrary function, in the chart of ``e``."""
    e = _ext(e)
    z = e.z
    N = 1.0 + e.state.norm_sq
    hzb = Hc.grad_zbar(e)
    hS = Hc.grad_S(e)
    zb_h = np.dot(z.conj(), hzb)
    dz = -1j / hbar * N * (hzb + z * zb_h) + 0.5 * z * N * hS
    dS = -Hc(e) - N * np.real(zb_h)
    return TangentVector(dz, dS)


def contact_field(spec: ContactHamiltonianSpec, e: ExtendedState) -> TangentVector:
    """Vector field of the contact Hamiltonian ``spec`` at ``e``."""
    e = _ext(e)
    n = spec.n
    if e.n != n:
        raise DimensionMismatch(f"state has n = {e.n}, Hamiltonian has n = {n}")
    hbar = spec.hbar
    fprime = spec.fiber.df(e.S)
    s = e.state
    z = s.z
    N = 1.0 + s.norm_sq
    energy = spec.value(e)
    if s.chart == n:
        hzb = expectation_dzbar(spec.H, s)
        zb_h = np.dot(z.conj(), hzb)
        dz = -1j / hbar * N * (hzb + z * zb_h) + 0.5 * z * N * fprime
        dS = -energy - N * np.real(zb_h)
        return TangentVector(dz, dS)
    # push-forward of the reference-chart field
    dz = _riccati(spec.H, s, hbar)
    psi = s.homogeneous()
    if fprime != 0.0:
        dz = dz.copy()
        dz[-1] -= 0.5 * fprime * N / np.conj(z[-1])
    Hpsi = spec.H @ psi
    e_H = np.vdot(psi, Hpsi).real / N
    dS = -energy + np.real((Hpsi[-1] - e_H * psi[-1]) / psi[-1])
    return TangentVector(dz, dS)


def extended_gradient(A: ScalarField, e, hbar: float = 1.0) -> TangentVector:
    """Gradient of ``A`` with respect to the extended metric g_ext."""
    e = _ext(e)
    z = e.z
    N = 1.0 + e.state.norm_sq
    q = N - 1.0
    a, ab = A.grad_z(e), A.grad_zbar(e)
    aS = A.grad_S(e)
    dz = -N / hbar * (ab + z * np.dot(z.conj(), ab)) + z / 2j * N * aS
    dS = (N / 2j * (np.dot(z, a) - np.dot(z.conj(), ab))).real + hbar / 2 * (1.0 - q) * aS
    return TangentVector(dz, dS)


def observable_rate(A, spec: ContactHamiltonianSpec, e: ExtendedState) -> float:
    """Time derivative of e_A along the contact flow."""
    e = _ext(e)
    eA = ScalarField.expectation(A)
    try:
        r = ExtendedState(chart_transition(e.state, spec.n), e.S)
    except ChartSingular:
        X = contact_field(spec, e)
        return eA.differential(e, X)
    z = r.z
    N = 1.0 + r.state.norm_sq
    a = eA.grad_z(r)
    radial = 2.0 * np.real(np.dot(z, a))
    eH = ScalarField.expectation(spec.H)
    return poisson(eA, eH, r, spec.hbar) + 0.5 * N * radial * spec.fiber.df(r.S)


# -- radiative decay ----------------------------------------------------------------

def decay_closed_form(H1, H2, gamma, kappa0, phi0, t, hbar: float = 1.0) -> ProjectiveState:
    """Exact chart-2 solution of the decay flow for a diagonal qubit Hamiltonian."""
    x = gamma * t + 2.0 * kappa0
    radicand = math.expm1(x)
    if not radicand > 0:
        raise DomainError(f"exp(gamma t + 2 kappa0) - 1 = {radicand} is not positive")
    z = np.exp(1j * phi0) / math.sqrt(radicand) * np.exp(-1j / hbar * (H1 - H2) * t)
    return ProjectiveState(2, [z])


def decay_parameters(z0: complex) -> tuple[float, float]:
    """(kappa0, phi0) reproducing the chart-2 initial point ``z0``."""
    r2 = abs(z0) ** 2
    if r2 == 0:
        raise DomainError("z0 = 0 is the ground state, not on a decay trajectory")
    return 0.5 * math.log1p(1.0 / r2), float(np.angle(z0))


def excited_state(n: int, kappa: float = 1e-12, phase: float = 0.0, S0: float = 0.0) -> ExtendedState:
    """State close to the excited level |1>, expressed in chart 1.

    The last amplitude relative to the first is sqrt(expm1(2 kappa)) e^{-i phase};
    for a qubit this is the decay trajectory with parameters (kappa, phase).
    ``kappa = 0`` gives the exact level |1>.
    """
    if kappa < 0:
        raise DomainError("kappa must be non-negative")
    zeta = np.zeros(n - 1, dtype=complex)
    zeta[-1] = math.sqrt(math.expm1(2.0 * kappa)) * np.exp(-1j * phase)
    return ExtendedState(ProjectiveState(1, zeta), S0)


# -- integration ------------------------------------------------------------------------

@dataclass(frozen=True)
class StepControl:
    rtol: float = 1e-10
    # 1e-10 leaves ~5e-8 relative error in z near the ground state
    atol: float = 1e-12
    method: str = "DOP853"
    switch_radius: float = 10.0
    max_step: float = np.inf


@dataclass
class _Segment:
    t0: float
    t1: float
    chart: int
    sol: object


@dataclass
class Trajectory:
    times: np.ndarray
    states: list
    chart_switch_events: list = field(default_factory=list)
    segments: list = field(default_factory=list, repr=False)

    def __len__(self):
        return len(self.times)

    @property
    def n(self) -> int:
        return self.states[0].n

    def state_at(self, t: float) -> ExtendedState:
        """Dense-output state at an arbitrary time inside the integrated span."""
        for seg in self.segments:
            if seg.t0 <= t <= seg.t1:
                return _unpack(seg.sol(t), seg.chart)
        raise ValueError(f"t = {t} outside the integrated span")

    def density_matrices(self) -> np.ndarray:
        return np.array([density_matrix(e.state) for e in self.states])


def _real_rhs(spec: ContactHamiltonianSpec, chart: int):
    """contact_field on packed real arrays (same formulas, without per-call object construction)."""
    H, hbar, n = np.asarray(spec.H), spec.hbar, spec.n
    f, df = spec.fiber.f, spec.fiber.df
    m, j = n - 1, chart - 1
    others = np.array([k for k in range(n) if k != j])
    psi = np.empty(n, dtype=complex)

    def rhs(_t, y):
        z = y[:m] + 1j * y[m:2 * m]
        S = y[-1]
        psi[j] = 1.0
        psi[others] = z
        Hpsi = H @ psi
        N = 1.0 + float(np.dot(y[:2 * m], y[:2 * m]))
        eH = np.vdot(psi, Hpsi).real / N
        fprime = df(S)
        energy = eH + f(S)
        if chart == n:
            hzb = (Hpsi[:m] - eH * z) / N
            zb_h = np.vdot(z, hzb)
            dz = -1j / hbar * N * (hzb + z * zb_h) + 0.5 * N * fprime * z
            dS = -energy - N * zb_h.real
        else:
            dz = -1j / hbar * (Hpsi[others] - z * Hpsi[j])
            if fprime != 0.0:
                dz[-1] -= 0.5 * fprime * N / np.conj(z[-1])
            dS = -energy + ((Hpsi[-1] - eH * psi[-1]) / psi[-1]).real
        out = np.empty(2 * m + 1)
        out[:m] = dz.real
        out[m:2 * m] = dz.imag
        out[-1] = dS
        return out

    return rhs


def _unpack(y, chart) -> ExtendedState:
    m = (y.size - 1) // 2
    return ExtendedState(ProjectiveState(chart, y[:m] + 1j * y[m:2 * m]), float(y[-1]))


def _pack(e: ExtendedState) -> np.ndarray:
    return np.concatenate([e.z.real, e.z.imag, [e.S]])


def integrate(spec: ContactHamiltonianSpec, e0: ExtendedState, t_span, step_control: StepControl = StepControl(),
              t_eval=None) -> Trajectory:
    """Integrate the contact flow from ``e0`` over ``t_span``.

    The state is re-expressed in the chart of its largest homogeneous
    component whenever |z| exceeds ``step_control.switch_radius``.  With
    ``t_eval`` the trajectory is sampled from the dense output at those
    times; otherwise the accepted solver steps are returned.
    """
    t0, t1 = map(float, t_span)
    if not (np.isfinite(t0) and np.isfinite(t1)) or t1 <= t0:
        raise ValueError("t_span must be finite and increasing")
    if e0.n != spec.n:
        raise DimensionMismatch(f"initial state has n = {e0.n}, Hamiltonian has n = {spec.n}")
    if t_eval is not None:
        t_eval = np.asarray(t_eval, dtype=float)
        if np.any(np.diff(t_eval) <= 0) or t_eval[0] < t0 or t_eval[-1] > t1:
            raise ValueError("t_eval must be strictly increasing inside t_span")

    R2 = step_control.switch_radius ** 2
    e = e0
    if e.state.norm_sq > R2:
        e = ExtendedState(chart_transition(e.state, best_chart(e.state.homogeneous())), e.S)
    t = t0
    times, states, events, segments = [], [], [], []
    m = spec.n - 1

    def radius_event(_t, y):
        return float(np.dot(y[:2 * m], y[:2 * m])) - R2

    radius_event.terminal = True
    radius_event.direction = 1

    while True:
        chart = e.chart
        rhs = _real_rhs(spec, chart)

        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            try:
                sol = solve_ivp(rhs, (t, t1), _pack(e), method=step_control.method, rtol=step_control.rtol,
                                atol=step_control.atol, max_step=step_control.max_step, events=radius_event,
                                dense_output=True)
            except (ChartSingular, ValueError, ZeroDivisionError) as exc:
                raise StepFailure(f"integration failed at t = {t}: {exc}", t, e) from exc
        if sol.status == -1 or not np.all(np.isfinite(sol.y[:, -1])):
            good = np.all(np.isfinite(sol.y), axis=0)
            k = int(np.nonzero(good)[0][-1]) if good.any() else 0
            last = _unpack(sol.y[:, k], chart) if good.any() else e
            raise StepFailure(f"integrator failed: {sol.message}", float(sol.t[k]), last)
        t_end = float(sol.t[-1])
        segments.append(_Segment(t, t_end, chart, sol.sol))
        if t_eval is None:
            first = 0 if not times else 1
            for k in range(first, sol.t.size):
                times.append(float(sol.t[k]))
                states.append(_unpack(sol.y[:, k], chart))
        else:
            lo = t if not times else np.nextafter(times[-1], np.inf)
            mask = (t_eval >= lo) & (t_eval <= t_end)
            for ts in t_eval[mask]:
                times.append(float(ts))
                states.append(_unpack(sol.sol(ts), chart))
        if sol.status == 1:
            here = _unpack(sol.y[:, -1], chart)
            new_chart = best_chart(here.state.homogeneous())
            if new_chart == chart:
                raise StepFailure("chart switch did not reduce the coordinate radius", t_end, here)
            e = ExtendedState(chart_transition(here.state, new_chart), here.S)
            events.append((t_end, chart, new_chart))
            log.debug("chart switch %d -> %d at t=%.6g", chart, new_chart, t_end)
            t = t_end
            if t >= t1:
                break
            continue
        break
    return Trajectory(np.asarray(times), states, events, segments)
