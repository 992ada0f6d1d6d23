"""Density-operator form of the contact dynamics.

For a contact Hamiltonian linear in S the pure-state density matrix obeys

    drho/dt = (i/hbar) [rho, H] + f'(S) {rho, A(z)}

where A(z) is the dissipative potential.  Its upper-left block is a free
Hermitian matrix (default zero); the other blocks are fixed by z.  All block
matrices here are written in chart n.
"""

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .dynamics import ContactHamiltonianSpec, LinearDissipation, StepControl, integrate
from .errors import ChartSingular, DimensionMismatch, NonMarkovian
from .geometry import _ext, expectation_dzbar
from .states import (CHART_THRESHOLD, ExtendedState, ProjectiveState, as_hilbert_vector,
                     chart_transition, density_matrix, project)


def _reference(s) -> ProjectiveState:
    s = s.state if isinstance(s, ExtendedState) else s
    return chart_transition(s, s.n)


def _blocks(upper_left, col, corner):
    m = col.size
    out = np.empty((m + 1, m + 1), dtype=complex)
    out[:m, :m] = upper_left
    out[:m, m] = col
    out[m, :m] = col.conj()
    out[m, m] = corner
    return out


@dataclass(frozen=True, eq=False)
class DissipativePotential:
    Abb: np.ndarray
    w: np.ndarray
    A: float

    @property
    def assembled(self) -> np.ndarray:
        return _blocks(self.Abb, self.w, self.A)


def dissipative_potential(Abb, s) -> DissipativePotential:
    """Dissipative potential A(z) for the free Hermitian block ``Abb``."""
    p = _reference(s)
    z = p.z
    m = z.size
    Abb = np.asarray(Abb, dtype=complex).reshape(m, m) if np.size(Abb) == m * m else None
    if Abb is None:
        raise DimensionMismatch(f"free block must be {m}x{m}")
    if not np.allclose(Abb, Abb.conj().T, atol=1e-12, rtol=0):
        raise ValueError("free block of the dissipative potential must be Hermitian")
    q = p.norm_sq
    N = 1.0 + q
    I = np.eye(m)
    zAz = float(np.vdot(z, Abb @ z).real)
    w = (I - np.outer(z, z.conj()) / N) @ ((0.5 * N - zAz) * I - Abb) @ z
    return DissipativePotential(Abb, w, zAz - q)


def dissipation_matrix(s) -> np.ndarray:
    """The block matrix multiplying f'(S) in the raw density evolution."""
    p = _reference(s)
    z = p.z
    q = p.norm_sq
    N = 1.0 + q
    return _blocks(np.outer(z, z.conj()), 0.5 * z * (1.0 - q), -q) / N


def anticommutator_identity_check(Abb, s) -> float:
    """Frobenius norm of {rho, A(z)} minus its closed block form."""
    p = _reference(s)
    rho = density_matrix(p)
    A = dissipative_potential(Abb, p).assembled
    return float(np.linalg.norm(rho @ A + A @ rho - dissipation_matrix(p)))


def rho_dot_raw(spec: ContactHamiltonianSpec, e: ExtendedState) -> np.ndarray:
    """drho/dt from the coordinate flow, valid for any f(S)."""
    e = _ext(e)
    p = _reference(e.state)
    z = p.z
    hzb = expectation_dzbar(spec.H, p)
    hz = hzb.conj()
    m = z.size
    M = np.empty((m + 1, m + 1), dtype=complex)
    M[:m, :m] = np.outer(z, hz) - np.outer(hzb, z.conj())
    M[:m, m] = -hzb - z * np.dot(z, hz)
    M[m, :m] = hz + z.conj() * np.dot(z.conj(), hzb)
    M[m, m] = -np.dot(z, hz) + np.dot(z.conj(), hzb)
    return 1j / spec.hbar * M + spec.fiber.df(e.S) * dissipation_matrix(p)


def von_neumann(rho, H, hbar: float = 1.0) -> np.ndarray:
    return 1j / hbar * (rho @ H - H @ rho)


def contact_master_rhs(spec: ContactHamiltonianSpec, e: ExtendedState, Abb=None) -> np.ndarray:
    """Right-hand side of the contact master equation (linear-in-S only)."""
    if not isinstance(spec.fiber, LinearDissipation):
        raise NonMarkovian("the master-equation form needs a contact Hamiltonian linear in S")
    e = _ext(e)
    p = _reference(e.state)
    if Abb is None:
        Abb = np.zeros((p.n - 1, p.n - 1))
    rho = density_matrix(p)
    A = dissipative_potential(Abb, p).assembled
    return von_neumann(rho, spec.H, spec.hbar) - spec.gamma * (rho @ A + A @ rho)


# -- comparators ------------------------------------------------------------------

def scully_lamb_rho_rhs(rho, H, Gamma, hbar: float = 1.0) -> np.ndarray:
    """Phenomenological decay equation with anticommutator loss term (not trace preserving)."""
    return von_neumann(rho, H, hbar) - 0.5 / hbar * (rho @ Gamma + Gamma @ rho)


def scully_lamb_z_rhs(H1, H2, V, gamma1, gamma2, z, hbar: float = 1.0) -> complex:
    """Projective (chart-2) form of the decay equation with rates ``gamma1``, ``gamma2``."""
    if not (gamma1 > 0 and gamma2 > 0):
        raise ValueError("decay rates must be positive")
    riccati = 1j / hbar * (np.conj(V) * z * z - (H1 - H2) * z - V)
    return complex(riccati - (gamma1 - gamma2) * z / (2.0 * hbar))


def qubit_contact_z_rhs(H1, H2, V, gamma, z, hbar: float = 1.0) -> complex:
    return complex(1j / hbar * (np.conj(V) * z * z - (H1 - H2) * z - V) - 0.5 * gamma * z * (1.0 + abs(z) ** 2))


def scully_lamb_contact_gap(H1, H2, V, gamma1, gamma2, z, hbar: float = 1.0) -> complex:
    """Contact RHS minus the decay-equation RHS at gamma = (gamma1 - gamma2)/hbar.

    Equals the nonlinear term -(gamma/2) z |z|^2.
    """
    gamma = (gamma1 - gamma2) / hbar
    return qubit_contact_z_rhs(H1, H2, V, gamma, z, hbar) - scully_lamb_z_rhs(H1, H2, V, gamma1, gamma2, z, hbar)


# -- nonlinear Schrodinger lifts ------------------------------------------------------

def schrodinger_lift_rhs(variant: int, psi, H, gamma: float, hbar: float = 1.0) -> np.ndarray:
    """d psi/dt for the two 2x2 nonlinear Schrodinger equations whose projection is the contact flow.

    Both have the form d psi/dt = -(i/hbar) H psi - (gamma/2) D(psi) psi.
    """
    p1, p2 = psi
    r = np.conj(p1) / np.conj(p2)
    if variant == 1:
        D = np.array([[1.0, p1 / p2], [-r, 1.0]])
    elif variant == 2:
        D = np.array([[0.5, 0.0], [-r, -0.5]])
    else:
        raise ValueError("variant must be 1 or 2")
    return -1j / hbar * (H @ psi) - 0.5 * gamma * (D @ psi)


def schrodinger_lift_check(variant: int, psi0, t_span, H1=3.0, H2=3.0, V=1 + 1j, gamma=1.0, hbar=1.0,
                           samples: int = 101, tol: float = 1e-12) -> float:
    """Max |z_lift(t) - z_contact(t)| on a uniform grid over ``t_span`` (chart 2)."""
    psi0 = as_hilbert_vector(psi0)
    if psi0.size != 2:
        raise DimensionMismatch("the Schrodinger lifts are defined for qubits only")
    if abs(psi0[1]) <= CHART_THRESHOLD * np.linalg.norm(psi0):
        raise ChartSingular("the lifts need a nonzero second amplitude")
    H = np.array([[H1, V], [np.conj(V), H2]], dtype=complex)
    ts = np.linspace(t_span[0], t_span[1], samples)

    def rhs(_t, y):
        psi = y[:2] + 1j * y[2:]
        d = schrodinger_lift_rhs(variant, psi, H, gamma, hbar)
        return np.concatenate([d.real, d.imag])

    def psi2_event(_t, y):
        return float(np.hypot(y[1], y[3]) - CHART_THRESHOLD * np.linalg.norm(y))

    psi2_event.terminal = True
    with np.errstate(divide="ignore", invalid="ignore"):
        sol = solve_ivp(rhs, (ts[0], ts[-1]), np.concatenate([psi0.real, psi0.imag]), method="DOP853",
                        rtol=tol, atol=tol * 1e-2, t_eval=ts, events=psi2_event)
    if sol.status == 1 or sol.y.shape[1] < ts.size:
        raise ChartSingular("second amplitude of the lifted state crossed zero")
    z_lift = np.array([project(y[:2] + 1j * y[2:], 2).z[0] for y in sol.y.T])

    spec = ContactHamiltonianSpec(H, LinearDissipation(gamma), hbar)
    traj = integrate(spec, ExtendedState(project(psi0, 2)), (ts[0], ts[-1]),
                     StepControl(rtol=tol, atol=tol * 1e-2), t_eval=ts)
    z_contact = np.array([chart_transition(e.state, 2).z[0] for e in traj.states])
    return float(np.max(np.abs(z_lift - z_contact)))
