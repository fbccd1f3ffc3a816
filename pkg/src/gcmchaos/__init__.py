"""Quantum spectra, Peres lattices, and classical chaos for the quartic
collective model of nuclear quadrupole vibrations (nonrotating regime)."""

__version__ = "0.1.0"

from .model import (
    ModelParams,
    QuadraticWell,
    StationaryPoint,
    accessible_domain,
    potential,
    potential_cartesian,
    quadratic_well,
    resonance_perturbation_strength,
    stationary_points,
)
from .basis2d import Basis2D, BasisState2D, assemble_matrix_2d, enumerate_basis_2d
from .basis5d import Basis5D, BasisState5D, assemble_matrix_5d, enumerate_basis_5d
from .spectra import (
    EigenSolution,
    PeresLattice,
    check_identity_hprime,
    convergence_study,
    expectation,
    peres_lattice,
    solve,
    wavefunction_density,
)
from .classical import (
    PhasePoint,
    TrajectoryRecord,
    classical_peres_average,
    freg,
    hamiltonian_classical,
    integrate,
    l2_bounds,
    l2_section_map,
    poincare_section,
    sali,
)
from .stats import SpacingSample, BrodyFit, brody_fit, unfold

__all__ = [
    "ModelParams", "QuadraticWell", "StationaryPoint", "accessible_domain",
    "potential", "potential_cartesian", "quadratic_well",
    "resonance_perturbation_strength", "stationary_points",
    "Basis2D", "BasisState2D", "assemble_matrix_2d", "enumerate_basis_2d",
    "Basis5D", "BasisState5D", "assemble_matrix_5d", "enumerate_basis_5d",
    "EigenSolution", "PeresLattice", "check_identity_hprime",
    "convergence_study", "expectation", "peres_lattice", "solve",
    "wavefunction_density",
    "PhasePoint", "TrajectoryRecord", "classical_peres_average", "freg",
    "hamiltonian_classical", "integrate", "l2_bounds", "l2_section_map",
    "poincare_section", "sali",
    "SpacingSample", "BrodyFit", "brody_fit", "unfold",
]
