"""Spin(7) four-forms with a three-torus action and their tri-symplectic quotients."""
from .errors import (
    ContractViolation,
    CosymplecticViolation,
    FactorizationError,
    FlowDegenerateError,
    IntervalBoundaryError,
    NotLocallyFreeError,
    NumericalError,
    SingularGramError,
    Spin7Error,
    WeakCoherenceError,
)
from .exterior import ExteriorForm, Metric, contract, hodge, interior, pullback, wedge
from .flow import FlowConfig, FlowState, Trajectory, closed_form, completeness_classify, integrate, max_interval
from .reduction import ReductionState, TorusFrame, reduce_triple
from .report import Check, Report
from .spin7 import build_phi0, g2_pair_from_bundle_data

__version__ = "0.1.0"
