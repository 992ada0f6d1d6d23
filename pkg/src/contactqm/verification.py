"""Property and oracle checks behind ``contactqm verify`` and the acceptance suite.

Every block returns a list of Check records holding the worst residual seen
and its tolerance.  Random samples come from one numpy Generator per block,
seeded from the user seed and the block name, so ``--only`` does not change
the numbers a block sees.
"""

import math
import zlib
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import analysis, master
from .dynamics import (ContactHamiltonianSpec, GeneralDissipation, LinearDissipation, StepControl,
                       decay_closed_form, excited_state, integrate)
from .geometry import ScalarField, correlation, expectation, jordan, poisson, variance
from .scenario import bundled, bundled_names, load
from .states import ExtendedState, ProjectiveState, chart_transition


@dataclass(frozen=True)
class Check:
    block: str
    name: str
    residual: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.residual) and self.residual <= self.tolerance)


# -- random samples ------------------------------------------------------------------

def random_hermitian(n: int, rng: np.random.Generator) -> np.ndarray:
    """Hermitian matrix with complex-Gaussian entries of unit variance."""
    M = (rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))) / 2.0
    return M + M.conj().T


def random_point(n: int, rng: np.random.Generator) -> ProjectiveState:
    """Chart-n point with independent standard complex-Gaussian coordinates."""
    return ProjectiveState(n, (rng.normal(size=n - 1) + 1j * rng.normal(size=n - 1)) / math.sqrt(2.0))


def _rng(seed: int, block: str) -> np.random.Generator:
    return np.random.default_rng([seed, zlib.crc32(block.encode())])


# -- blocks ---------------------------------------------------------------------------

def check_brackets(seed: int = 0, cases: int = 500, hbar: float = 1.0) -> list[Check]:
    """Poisson bracket vs commutator and Jordan bracket vs anticommutator, n <= 5."""
    rng = _rng(seed, "brackets")
    worst = {"poisson-commutator": 0.0, "jordan-anticommutator": 0.0, "poisson-antisymmetry": 0.0,
             "jordan-symmetry": 0.0, "variance-nonnegative": 0.0}
    for _ in range(cases):
        n = int(rng.integers(2, 6))
        A, B = random_hermitian(n, rng), random_hermitian(n, rng)
        s = random_point(n, rng)
        eA, eB = ScalarField.expectation(A), ScalarField.expectation(B)
        pab = poisson(eA, eB, s, hbar)
        comm = expectation((A @ B - B @ A) / (1j * hbar), s)
        worst["poisson-commutator"] = max(worst["poisson-commutator"], abs(pab - comm))
        worst["poisson-antisymmetry"] = max(worst["poisson-antisymmetry"], abs(pab + poisson(eB, eA, s, hbar)))
        anti = expectation((A @ B + B @ A) / 2, s) - expectation(A, s) * expectation(B, s)
        worst["jordan-anticommutator"] = max(worst["jordan-anticommutator"], abs(correlation(A, B, s, hbar) - anti))
        worst["jordan-symmetry"] = max(worst["jordan-symmetry"], abs(jordan(eA, eB, s, hbar) - jordan(eB, eA, s, hbar)))
        worst["variance-nonnegative"] = max(worst["variance-nonnegative"], -variance(A, s, hbar))
    return [Check("brackets", k, v, 1e-10) for k, v in worst.items()]


def check_appendix_a(seed: int = 0, cases: int = 1000) -> list[Check]:
    """{rho, A(z)} against its block form for random free blocks, n = 2..6."""
    rng = _rng(seed, "appendix-a")
    worst = herm = 0.0
    for k in range(cases):
        n = 2 + k % 5
        s = random_point(n, rng)
        Abb = random_hermitian(n - 1, rng)
        worst = max(worst, master.anticommutator_identity_check(Abb, s))
        M = master.dissipative_potential(Abb, s).assembled
        herm = max(herm, float(np.linalg.norm(M - M.conj().T)))
    return [Check("appendix-a", "anticommutator-residual", worst, 1e-12),
            Check("appendix-a", "potential-hermitian", herm, 1e-12)]


def check_master_equation(seed: int = 0, cases: int = 500) -> list[Check]:
    """Master equation vs the density evolution of the coordinate flow; trace and Hermiticity."""
    rng = _rng(seed, "master-equation")
    agree = trace = trace_general = herm = 0.0
    for _ in range(cases):
        n = int(rng.integers(2, 7))
        H = random_hermitian(n, rng)
        e = ExtendedState(random_point(n, rng), float(rng.normal()))
        spec = ContactHamiltonianSpec(H, LinearDissipation(float(rng.uniform(0.0, 3.0))))
        raw = master.rho_dot_raw(spec, e)
        for _ in range(2):
            rhs = master.contact_master_rhs(spec, e, random_hermitian(n - 1, rng))
            agree = max(agree, float(np.linalg.norm(rhs - raw)))
        trace = max(trace, abs(np.trace(raw)))
        herm = max(herm, float(np.linalg.norm(raw - raw.conj().T)))
        general = ContactHamiltonianSpec(H, GeneralDissipation.polynomial(rng.normal(size=4)))
        trace_general = max(trace_general, abs(np.trace(master.rho_dot_raw(general, e))))
    return [Check("master-equation", "contact-vs-raw", agree, 1e-12),
            Check("master-equation", "trace-linear", trace, 1e-13),
            Check("master-equation", "trace-general-f", trace_general, 1e-13),
            Check("master-equation", "hermitian", herm, 1e-12)]


def decay_oracle(H1=4.0, H2=2.0, gamma=1.0, kappa0=1e-3, t_end=10.0, samples=201, rtol=1e-10,
                 atol=1e-12) -> dict:
    """Worst deviations of the integrated decay from its closed form."""
    spec = ContactHamiltonianSpec(np.diag([H1, H2]), LinearDissipation(gamma))
    ts = np.linspace(0.0, t_end, samples)
    traj = integrate(spec, excited_state(2, kappa0), (0.0, t_end), StepControl(rtol=rtol, atol=atol), t_eval=ts)
    table = analysis.trajectory_observables(traj, spec.H)
    z_err = 0.0
    for t, e in zip(ts, traj.states):
        exact = decay_closed_form(H1, H2, gamma, kappa0, 0.0, t).z[0]
        z = chart_transition(e.state, 2).z[0]
        z_err = max(z_err, abs(z - exact) / abs(exact))
    decay = np.exp(-(gamma * ts + 2 * kappa0))
    eH_exact = H2 + (H1 - H2) * decay
    var_exact = (H1 - H2) ** 2 * decay * (1 - decay)
    return {"z-relative": z_err,
            "e_H": float(np.max(np.abs(table.e_H - eH_exact))),
            "var_H": float(np.max(np.abs(table.var_H - var_exact))),
            "P": float(np.max(np.abs(table.P - decay)))}


def check_closed_form(seed: int = 0, rtol: float = 1e-10) -> list[Check]:
    return [Check("closed-form", k, v, 1e-8) for k, v in decay_oracle(rtol=rtol).items()]


def check_uncertainty_peak(seed: int = 0, rtol: float = 1e-10, H1=4.0, H2=2.0, gamma=1.0) -> list[Check]:
    """Variance maximum (H1-H2)^2/4 at t = ln 2/gamma from a start next to level 1."""
    spec = ContactHamiltonianSpec(np.diag([H1, H2]), LinearDissipation(gamma))
    t_end = 10.0 / gamma
    traj = integrate(spec, excited_state(2), (0.0, t_end), StepControl(rtol=rtol),
                     t_eval=np.linspace(0.0, t_end, 401))
    t_peak, v_peak = analysis.uncertainty_peak(traj, spec.H)
    return [Check("uncertainty-peak", "max-value", abs(v_peak - (H1 - H2) ** 2 / 4), 1e-6),
            Check("uncertainty-peak", "time", abs(t_peak - math.log(2) / gamma), 1e-4)]


def check_conservative(seed: int = 0, rtol: float = 1e-10) -> list[Check]:
    """Energy conservation over [0, 20] for the conservative_qubit scenario and the center character of both roots."""
    sc = load(bundled("conservative_qubit"))
    spec = sc.to_spec()
    H1, H2, V = float(sc.H[0, 0].real), float(sc.H[1, 1].real), complex(sc.H[0, 1])
    traj = integrate(spec, sc.initial_state(), (0.0, 20.0), StepControl(rtol=rtol, atol=sc.atol),
                     t_eval=np.linspace(0.0, 20.0, 401))
    eH = np.array([expectation(spec.H, e.state) for e in traj.states])
    drift = float(np.max(np.abs(eH - eH[0])))
    points = analysis.conservative_critical_points(H1, H2, V)
    q = analysis.QubitField(H1, H2, V)
    real_part = max(abs(l.real) for p in points for l in p.eigenvalues)
    field = max(abs(q.rhs(p.z)) for p in points)
    centers = sum(p.classification == "center" for p in points)
    return [Check("conservative", "e_H-drift", drift, 1e-9),
            Check("conservative", "center-real-part", real_part, 1e-10),
            Check("conservative", "root-residual", field, 1e-12),
            Check("conservative", "centers-missing", float(2 - centers), 0.0)]


BIFURCATION_CASES = ((1.0, "iii", 3), (2 * math.sqrt(2), "ii", 2), (3.0, "i", 1))


def check_bifurcation(seed: int = 0, V=1 + 1j, H=3.0, hbar: float = 1.0) -> list[Check]:
    """Regimes, point counts and eigenvalues at gamma in {1, 2 sqrt 2, 3}; the dissipative_qubit portrait census."""
    checks = []
    for gamma, regime, count in BIFURCATION_CASES:
        tag = f"gamma={gamma:.6g}"
        report = analysis.classify_bifurcation(V, gamma, hbar)
        ok = report.regime == regime and (regime != "iii" or report.sub_case == "foci")
        points = analysis.dissipative_critical_points(H, H, V, gamma, hbar)
        q = analysis.QubitField(H, H, V, gamma, hbar)
        eig_err = 0.0
        for p in points:
            numeric = q.linearize(p.z).eigenvalues
            closed = sorted(p.eigenvalues, key=lambda c: (c.real, c.imag))
            eig_err = max(eig_err, max(abs(a - b) for a, b in zip(numeric, closed)))
        residual = max(abs(q.rhs(p.z)) for p in points)
        checks += [Check("bifurcation", f"{tag} regime-mismatch", 0.0 if ok else 1.0, 0.0),
                   Check("bifurcation", f"{tag} count-mismatch", float(abs(len(points) - count)), 0.0),
                   Check("bifurcation", f"{tag} eigenvalues", eig_err, 1e-8),
                   Check("bifurcation", f"{tag} rhs-residual", residual, 1e-10)]
    census = analysis.phase_portrait(analysis.QubitField(H, H, V, 1.0, hbar)).census()
    expected = {"stable focus": 2, "saddle": 1, "unstable node": 1}
    checks.append(Check("bifurcation", "dissipative-census-mismatch", 0.0 if census == expected else 1.0, 0.0))
    return checks


def check_purity(seed: int = 0, rtol: float = 1e-10) -> list[Check]:
    """Trace and idempotency of rho at every sample of every bundled scenario."""
    tr = idem = 0.0
    for name in bundled_names():
        sc = load(bundled(name))
        spec = sc.to_spec()
        traj = integrate(spec, sc.initial_state(), (0.0, sc.t_end), StepControl(rtol=rtol, atol=sc.atol),
                         t_eval=sc.times())
        for rho in traj.density_matrices():
            tr = max(tr, abs(np.trace(rho).real - 1.0))
            idem = max(idem, float(np.linalg.norm(rho @ rho - rho)))
    return [Check("purity", "trace", tr, 1e-9), Check("purity", "idempotency", idem, 1e-8)]


def check_schrodinger_lifts(seed: int = 0) -> list[Check]:
    psi0 = np.array([1.0, 1.0]) / math.sqrt(2.0)
    return [Check("schrodinger-lifts", f"variant-{v}", master.schrodinger_lift_check(v, psi0, (0.0, 5.0)), 1e-6)
            for v in (1, 2)]


def check_scully_lamb(seed: int = 0, cases: int = 200) -> list[Check]:
    """The contact flow differs from the phenomenological decay equation by -(gamma/2) z|z|^2."""
    rng = _rng(seed, "scully-lamb")
    worst = 0.0
    for _ in range(cases):
        z = complex(rng.normal(), rng.normal())
        H1, H2 = rng.normal(size=2)
        V = complex(rng.normal(), rng.normal())
        g1, g2 = rng.uniform(0.1, 3.0, size=2)
        gap = master.scully_lamb_contact_gap(H1, H2, V, g1, g2, z)
        worst = max(worst, abs(gap + 0.5 * (g1 - g2) * z * abs(z) ** 2) / max(1.0, abs(z) ** 3))
    return [Check("scully-lamb", "nonlinear-gap", worst, 1e-14)]


BLOCKS: dict[str, Callable[..., list[Check]]] = {
    "brackets": check_brackets,
    "appendix-a": check_appendix_a,
    "master-equation": check_master_equation,
    "closed-form": check_closed_form,
    "uncertainty-peak": check_uncertainty_peak,
    "conservative": check_conservative,
    "bifurcation": check_bifurcation,
    "purity": check_purity,
    "schrodinger-lifts": check_schrodinger_lifts,
    "scully-lamb": check_scully_lamb,
}
_INTEGRATING = {"closed-form", "uncertainty-peak", "conservative", "purity"}


def run(seed: int = 0, only=None, rtol: float = 1e-10) -> list[Check]:
    """Run the selected blocks (all by default) and return every check."""
    names = list(BLOCKS) if not only else list(only)
    unknown = [n for n in names if n not in BLOCKS]
    if unknown:
        raise KeyError(f"unknown verification block {unknown[0]!r}; choose from {', '.join(BLOCKS)}")
    checks = []
    for name in names:
        kwargs = {"rtol": rtol} if name in _INTEGRATING else {}
        checks += BLOCKS[name](seed, **kwargs)
    return checks
