"""Recurrent random walks in i.i.d. random environments: simulation and estimation."""
from .environment import Environment, PotentialProfile, potential, reversible_measure, sample_environment
from .estimators import Estimate, ae_estimator_temkin, mle, mple, naive_estimator
from .likelihood import (
    beta_thresholds, classify_sites, criterion_K, expansion, log_likelihood,
    pseudo_likelihood_L, remainder,
)
from .model import (
    FamilyKind, ModelFamily, ThetaParams, entropy, entropy_vec, family_to_theta, kl, kl_vec,
    recurrence_defect,
)
from .walk import WalkStats, simulate_walk, stats_from_path

__version__ = "0.1.0"
