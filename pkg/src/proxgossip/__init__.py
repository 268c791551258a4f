"""Decentralized proximal Langevin sampling over gossip networks.

A simulation library for constrained Bayesian sampling where the data is
sharded across agents that communicate through a doubly-stochastic gossip
matrix.  Constraints enter through the Moreau envelope of the set indicator
(a quadratic distance penalty), so every update stays gradient-based and
unadjusted.

Subpackages:
    topology     gossip graphs, mixing matrices, and their validation
    constraints  convex sets, projections, and the Moreau envelope
    models       target potentials, data sharding, minibatch gradients
    samplers     the decentralized sampler and centralized baselines
    metrics      Wasserstein / consensus / feasibility / accuracy metrics
    harness      experiment orchestration and CSV emission
    cli          the ``proxgossip`` command-line entry point
"""

__version__ = "0.1.0"

from .constraints import (ConvexSet, IntervalBox, L1Ball, L2Ball, ProxParams,
                          distance, interval_box, l1_ball, l2_ball,
                          moreau_envelope, moreau_gradient, project)
from .errors import ConfigError, DataError, InvalidArgumentError, NumericError
from .metrics import (Quantile1D, RunTrace, classification_accuracy,
                      consensus_distance, feasibility_stats, posterior_summary,
                      predictive_accuracy, true_quantile_1d, wasserstein2_1d,
                      wasserstein2_1d_empirical)
from .models import (DataSet, Potential, fit_logreg_mle, fit_ols,
                     generate_blr_data, linreg_potential, load_wdbc,
                     logreg_potential, quartic_1d, stochastic_gradient)
from .samplers import (NetworkState, SamplerConfig, StreamPlan, consensus_bound,
                       depsgld_step, max_stepsize, pla_mean_chain_step,
                       projected_lmc_step, psgld_step, run_centralized,
                       run_depsgld, sgld_step)
from .topology import (Graph, MixingMatrix, build_graph, laplacian,
                       mixing_matrix, validate_mixing)

__all__ = [
    "__version__",
    "ConvexSet", "IntervalBox", "L1Ball", "L2Ball", "ProxParams",
    "distance", "interval_box", "l1_ball", "l2_ball",
    "moreau_envelope", "moreau_gradient", "project",
    "ConfigError", "DataError", "InvalidArgumentError", "NumericError",
    "Quantile1D", "RunTrace", "classification_accuracy", "consensus_distance",
    "feasibility_stats", "posterior_summary", "predictive_accuracy",
    "true_quantile_1d", "wasserstein2_1d", "wasserstein2_1d_empirical",
    "DataSet", "Potential", "fit_logreg_mle", "fit_ols", "generate_blr_data",
    "linreg_potential", "load_wdbc", "logreg_potential", "quartic_1d",
    "stochastic_gradient",
    "NetworkState", "SamplerConfig", "StreamPlan", "consensus_bound",
    "depsgld_step", "max_stepsize", "pla_mean_chain_step",
    "projected_lmc_step", "psgld_step", "run_centralized", "run_depsgld",
    "sgld_step",
    "Graph", "MixingMatrix", "build_graph", "laplacian", "mixing_matrix",
    "validate_mixing",
]
