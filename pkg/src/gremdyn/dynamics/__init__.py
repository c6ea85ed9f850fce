"""Event-driven hopping dynamics: rates, engines, oracles, experiments."""
from .engine import TrajectoryReport, build_tables, simulate
from .experiments import (
    OccupationReport,
    RenewalReport,
    VisitReport,
    occupation_experiment,
    occupation_prediction,
    renewal_experiment,
    visit_experiment,
    visit_mean_prediction,
)
from .generator import GeneratorSolution, exact_generator, gibbs_law, mean_hitting_times
from .rates import DynState, Rates, TrajectoryStream, mu_geometric, rates, step, uniform_state
from .timescales import TimeScales, scale_log, timescales
from .tracking import TrackedClass, TrackedSet, build_tracked, distinct_classes

__all__ = [
    "DynState",
    "GeneratorSolution",
    "OccupationReport",
    "Rates",
    "RenewalReport",
    "TimeScales",
    "TrackedClass",
    "TrackedSet",
    "TrajectoryReport",
    "TrajectoryStream",
    "VisitReport",
    "build_tables",
    "build_tracked",
    "distinct_classes",
    "exact_generator",
    "gibbs_law",
    "mean_hitting_times",
    "mu_geometric",
    "occupation_experiment",
    "occupation_prediction",
    "rates",
    "renewal_experiment",
    "scale_log",
    "simulate",
    "step",
    "timescales",
    "uniform_state",
    "visit_experiment",
    "visit_mean_prediction",
]
