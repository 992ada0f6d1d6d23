"""Fubini-Study and contact structures on CP(H_0) and CP(H_0) x R.

All tensors are evaluated in the homogeneous coordinates of the chart the
state is expressed in.  A tangent vector is stored by its holomorphic
components ``dz`` (the antiholomorphic ones are their conjugates) and a real
fiber component ``dS``.

Sign conventions follow the coordinate expressions used throughout the
package: the metric ``g_fs`` carries an overall ``-hbar`` prefactor and is
therefore negative definite, which is what makes the variance identity
``var(A) = -(hbar/2) {e_A, e_A}_g`` come out positive.
"""

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import DimensionMismatch
from .states import ExtendedState, ProjectiveState

FD_STEP = 1e-6


def _ext(s) -> ExtendedState:
    return s if isinstance(s, ExtendedState) else ExtendedState(s, 0.0)


def _proj(s) -> ProjectiveState:
    return s.state if isinstance(s, ExtendedState) else s


@dataclass(frozen=True, eq=False)
class TangentVector:
    dz: np.ndarray
    dS: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "dz", np.asarray(self.dz, dtype=complex).reshape(-1))
        object.__setattr__(self, "dS", float(self.dS))

    @property
    def dzbar(self) -> np.ndarray:
        return self.dz.conj()

    def __add__(self, other):
        return TangentVector(self.dz + other.dz, self.dS + other.dS)

    def __sub__(self, other):
        return TangentVector(self.dz - other.dz, self.dS - other.dS)

    def __neg__(self):
        return TangentVector(-self.dz, -self.dS)

    def __mul__(self, c: float):
        return TangentVector(self.dz * c, self.dS * c)

    __rmul__ = __mul__

    def norm(self) -> float:
        """Euclidean norm of the real components (for residual reporting)."""
        return float(np.sqrt(np.vdot(self.dz, self.dz).real + self.dS ** 2))

    def to_real(self) -> np.ndarray:
        return np.concatenate([self.dz.real, self.dz.imag, [self.dS]])

    @classmethod
    def from_real(cls, x) -> "TangentVector":
        x = np.asarray(x, dtype=float)
        m = (x.size - 1) // 2
        return cls(x[:m] + 1j * x[m:2 * m], x[-1])


def real_basis(m: int) -> list[TangentVector]:
    """The 2m+1 coordinate directions d/dx^k, d/dy^k, d/dS."""
    basis = []
    for k in range(m):
        e = np.zeros(m, dtype=complex)
        e[k] = 1.0
        basis.append(TangentVector(e))
    for k in range(m):
        e = np.zeros(m, dtype=complex)
        e[k] = 1j
        basis.append(TangentVector(e))
    basis.append(TangentVector(np.zeros(m, dtype=complex), 1.0))
    return basis


def reeb(s) -> TangentVector:
    """Reeb field: the unit fiber direction d/dS."""
    return TangentVector(np.zeros(_proj(s).n - 1, dtype=complex), 1.0)


# -- scalar fields -----------------------------------------------------------

def expectation(A, s) -> float:
    """Expectation value of the observable ``A`` at the pure state ``s``."""
    s = _proj(s)
    A = np.asarray(A)
    if A.shape != (s.n, s.n):
        raise DimensionMismatch(f"operator shape {A.shape} does not match n = {s.n}")
    psi = s.homogeneous()
    return float((np.vdot(psi, A @ psi) / (1.0 + s.norm_sq)).real)


def expectation_dzbar(A, s) -> np.ndarray:
    """Wirtinger derivatives d e_A / d zbar_k in the chart of ``s``."""
    s = _proj(s)
    A = np.asarray(A)
    if A.shape != (s.n, s.n):
        raise DimensionMismatch(f"operator shape {A.shape} does not match n = {s.n}")
    psi = s.homogeneous()
    N = 1.0 + s.norm_sq
    Apsi = A @ psi
    e = np.vdot(psi, Apsi).real / N
    return np.delete(Apsi - e * psi, s.chart - 1) / N


@dataclass(frozen=True, eq=False)
class ScalarField:
    """Real function on CP(H_0) x R with optional analytic derivatives.

    ``dz`` returns the array of d/dz^k; ``dS`` returns d/dS.  Missing
    evaluators fall back to central differences on each real coordinate.
    """

    value: Callable[[ExtendedState], float]
    dz: Optional[Callable[[ExtendedState], np.ndarray]] = None
    dS: Optional[Callable[[ExtendedState], float]] = None

    def __call__(self, s) -> float:
        return float(self.value(_ext(s)))

    def grad_z(self, s) -> np.ndarray:
        e = _ext(s)
        if self.dz is not None:
            return np.asarray(self.dz(e), dtype=complex)
        z = e.z
        out = np.empty(z.size, dtype=complex)
        for k in range(z.size):
            parts = []
            for step in (FD_STEP, 1j * FD_STEP):
                zp, zm = z.copy(), z.copy()
                zp[k] += step
                zm[k] -= step
                fp = self.value(ExtendedState(ProjectiveState(e.chart, zp), e.S))
                fm = self.value(ExtendedState(ProjectiveState(e.chart, zm), e.S))
                parts.append((fp - fm) / (2 * FD_STEP))
            out[k] = 0.5 * (parts[0] - 1j * parts[1])
        return out

    def grad_zbar(self, s) -> np.ndarray:
        return self.grad_z(s).conj()

    def grad_S(self, s) -> float:
        e = _ext(s)
        if self.dS is not None:
            return float(self.dS(e))
        fp = self.value(ExtendedState(e.state, e.S + FD_STEP))
        fm = self.value(ExtendedState(e.state, e.S - FD_STEP))
        return (fp - fm) / (2 * FD_STEP)

    def differential(self, s, v: TangentVector) -> float:
        """dF(v)."""
        return float(2 * np.real(np.dot(self.grad_z(s), v.dz)) + self.grad_S(s) * v.dS)

    def __add__(self, other: "ScalarField") -> "ScalarField":
        def dz(e):
            return self.grad_z(e) + other.grad_z(e)

        def dS(e):
            return self.grad_S(e) + other.grad_S(e)

        return ScalarField(lambda e: self.value(e) + other.value(e), dz, dS)

    @classmethod
    def expectation(cls, A) -> "ScalarField":
        A = np.asarray(A, dtype=complex)
        return cls(lambda e: expectation(A, e.state),
                   lambda e: expectation_dzbar(A, e.state).conj(),
                   lambda e: 0.0)

    @classmethod
    def fiber(cls, f: Callable[[float], float], df: Optional[Callable[[float], float]] = None) -> "ScalarField":
        """Field depending on S only."""
        def dz(e):
            return np.zeros(e.n - 1, dtype=complex)
        return cls(lambda e: f(e.S), dz, None if df is None else (lambda e: df(e.S)))


# -- Kahler structure --------------------------------------------------------

def _alpha(z, v):
    # zbar_k dz^k + z^k dzbar_k
    return 2.0 * np.real(np.dot(z.conj(), v.dz))


def _beta(z, v):
    # zbar_k dz^k - z^k dzbar_k
    return 2j * np.imag(np.dot(z.conj(), v.dz))


def theta_fs(s, v: TangentVector, hbar: float = 1.0) -> float:
    p = _proj(s)
    return float((hbar / 2j * _beta(p.z, v) / (1.0 + p.norm_sq)).real)


def omega_fs(s, v: TangentVector, w: TangentVector, hbar: float = 1.0) -> float:
    p = _proj(s)
    z, N = p.z, 1.0 + p.norm_sq
    t1 = np.dot(v.dzbar, w.dz) - np.dot(v.dz, w.dzbar)
    t2 = _alpha(z, v) * _beta(z, w) - _alpha(z, w) * _beta(z, v)
    return float((-1j * hbar / N ** 2 * (N * t1 - 0.5 * t2)).real)


def g_fs(s, v: TangentVector, w: TangentVector, hbar: float = 1.0) -> float:
    p = _proj(s)
    z, N = p.z, 1.0 + p.norm_sq
    t1 = 2.0 * np.real(np.dot(v.dzbar, w.dz))
    t2 = 0.5 * _beta(z, v) * _beta(z, w) - 0.5 * _alpha(z, v) * _alpha(z, w)
    return float((-hbar / N ** 2 * (N * t1 + t2)).real)


def j_fs(s, v: TangentVector) -> TangentVector:
    """Complex structure: dz -> dz / i on the projective directions."""
    return TangentVector(v.dz / 1j, 0.0)


# -- contact / Sasakian structure ----------------------------------------------

def eta(s, v: TangentVector, hbar: float = 1.0) -> float:
    return v.dS - theta_fs(s, v, hbar)


def g_ext(s, v: TangentVector, w: TangentVector, hbar: float = 1.0) -> float:
    return g_fs(s, v, w, hbar) + 2.0 / hbar * eta(s, v, hbar) * eta(s, w, hbar)


def phi(s, v: TangentVector, hbar: float = 1.0) -> TangentVector:
    p = _proj(s)
    N = 1.0 + p.norm_sq
    return TangentVector(v.dz / 1j, -hbar / (2.0 * N) * _alpha(p.z, v))


def d_eta(s, v: TangentVector, w: TangentVector, hbar: float = 1.0) -> float:
    """Exterior derivative of the contact form, d(eta) = -omega_FS."""
    return -omega_fs(s, v, w, hbar)


def contact_volume_matrix(s, hbar: float = 1.0) -> np.ndarray:
    """Bordered matrix [[d eta, eta^T], [-eta, 0]] in the real coordinate basis.

    eta ^ (d eta)^(n-1) is nonzero exactly when this (2n) x (2n) matrix is
    nonsingular.
    """
    m = _proj(s).n - 1
    basis = real_basis(m)
    k = len(basis)
    out = np.zeros((k + 1, k + 1))
    for i, u in enumerate(basis):
        for j, v in enumerate(basis):
            out[i, j] = d_eta(s, u, v, hbar)
        out[i, k] = eta(s, u, hbar)
        out[k, i] = -out[i, k]
    return out


# -- brackets ------------------------------------------------------------------

def _bracket_terms(A: ScalarField, B: ScalarField, s):
    p = _proj(s)
    z = p.z
    a, b = A.grad_z(s), B.grad_z(s)
    ab, bb = a.conj(), b.conj()
    return p, z, a, ab, b, bb


def poisson(A: ScalarField, B: ScalarField, s, hbar: float = 1.0) -> float:
    p, z, a, ab, b, bb = _bracket_terms(A, B, s)
    N = 1.0 + p.norm_sq
    val = (np.dot(a, bb) - np.dot(ab, b)) + np.dot(z, a) * np.dot(z.conj(), bb) - np.dot(z.conj(), ab) * np.dot(z, b)
    return float((-1j / hbar * N * val).real)


def jordan(A: ScalarField, B: ScalarField, s, hbar: float = 1.0) -> float:
    p, z, a, ab, b, bb = _bracket_terms(A, B, s)
    N = 1.0 + p.norm_sq
    val = (np.dot(a, bb) + np.dot(ab, b)) + np.dot(z, a) * np.dot(z.conj(), bb) + np.dot(z.conj(), ab) * np.dot(z, b)
    return float((-N / hbar * val).real)


def extended_jordan(A: ScalarField, B: ScalarField, e, hbar: float = 1.0) -> float:
    e = _ext(e)
    p, z, a, ab, b, bb = _bracket_terms(A, B, e)
    q = p.norm_sq
    N = 1.0 + q
    aS, bS = A.grad_S(e), B.grad_S(e)
    mixed = aS * (np.dot(z, b) - np.dot(z.conj(), bb)) + bS * (np.dot(z, a) - np.dot(z.conj(), ab))
    return float(jordan(A, B, e, hbar) + (N / 2j * mixed).real + hbar / 2 * (1.0 - q) * aS * bS)


def variance(A, s, hbar: float = 1.0) -> float:
    """Variance of the observable ``A`` from the Jordan bracket."""
    eA = ScalarField.expectation(A)
    return -hbar / 2 * jordan(eA, eA, s, hbar)


def correlation(A, B, s, hbar: float = 1.0) -> float:
    return -hbar / 2 * jordan(ScalarField.expectation(A), ScalarField.expectation(B), s, hbar)


def contact_variance(A: ScalarField, e, hbar: float = 1.0) -> float:
    return -hbar / 2 * extended_jordan(A, A, e, hbar)


def contact_correlation(A: ScalarField, B: ScalarField, e, hbar: float = 1.0) -> float:
    return -hbar / 2 * extended_jordan(A, B, e, hbar)
