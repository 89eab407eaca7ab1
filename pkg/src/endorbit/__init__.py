"""Exact evaluation of relative orbital integrals on U(3)/SO(3) over a p-adic field,
by closed forms and by lattice oracles."""
from .closed_form import Case, dispatch_case, eval_kappa_orbital, eval_orbital, kappa_corollary
from .harness import ComparisonRecord, GridConfig, default_grid, emit_report, run_comparison, run_grid
from .oracle import OracleConfig, raw_orbital_oracle, reduced_orbital_oracle
from .orbits import EndoscopicGroup, KappaCharacter, SymmetricPoint, TorusType, invariants
from .padic import FieldContext, PadicScalar, Twist
from .sampler import SampleSpec, sample_gamma

__version__ = "0.1.0"
