"""Decoherence of a two-branch massive superposition coupled to a bosonic field."""

from .dynamics import (PulseSequence, displacement_free, displacement_profile,
                       displacement_sequenced, overlap)
from .fock import FockConfig, OracleResult, evolve_truncated, truncation_bound
from .model import (SI, CouplingProfile, DomainError, EnvironmentState, Mode, ModeGrid,
                    PhysicalConstants, PlanckScales, SpectralDensity, build_mode_grid,
                    planck_scales, quadrupole_coupling, sequential_profiles, symmetric_profiles)
from .protocols import (ClassicalDephasing, Collapse, Entangling, ExperimentKind, Verdict,
                        VisibilityTrace, classical_fringe, classify, fake_decoherence_demo,
                        simulate_experiment)
from .thresholds import (baym_condition, christoffel_fluctuation, em_to_gravity,
                         quadrupole_emission)
from .visibility import (DimensionalParams, RateEstimate, VisibilityResult, dimensional_rate,
                         penrose_rate, rate_integral, visibility)

__version__ = "0.1.0"
