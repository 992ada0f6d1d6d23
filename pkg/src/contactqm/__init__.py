"""Contact-Hamiltonian dissipative dynamics of pure quantum states on CP(H_0) x R."""

from .analysis import (BifurcationReport, CriticalPoint, PhasePortrait, QubitField, classify_bifurcation,
                       conservative_critical_points, dissipative_critical_points, phase_portrait,
                       trajectory_observables, uncertainty_peak)
from .dynamics import (ContactHamiltonianSpec, GeneralDissipation, LinearDissipation, StepControl, Trajectory,
                       contact_field, decay_closed_form, excited_state, integrate)
from .errors import (ChartSingular, ContactQMError, DegenerateV, DimensionMismatch, DomainError, NonMarkovian,
                     ScenarioError, StepFailure, UnsupportedScenario)
from .master import contact_master_rhs, dissipative_potential, rho_dot_raw
from .scenario import Scenario
from .states import BlochPoint, ExtendedState, ProjectiveState, bloch, density_matrix, project

__version__ = "0.1.0"

__all__ = [
    "BifurcationReport",
    "CriticalPoint",
    "PhasePortrait",
    "QubitField",
    "classify_bifurcation",
    "conservative_critical_points",
    "dissipative_critical_points",
    "phase_portrait",
    "trajectory_observables",
    "uncertainty_peak",
    "ContactHamiltonianSpec",
    "GeneralDissipation",
    "LinearDissipation",
    "StepControl",
    "Trajectory",
    "contact_field",
    "decay_closed_form",
    "excited_state",
    "integrate",
    "ChartSingular",
    "ContactQMError",
    "DegenerateV",
    "DimensionMismatch",
    "DomainError",
    "NonMarkovian",
    "ScenarioError",
    "StepFailure",
    "UnsupportedScenario",
    "contact_master_rhs",
    "dissipative_potential",
    "rho_dot_raw",
    "Scenario",
    "BlochPoint",
    "ExtendedState",
    "ProjectiveState",
    "bloch",
    "density_matrix",
    "project",
]
