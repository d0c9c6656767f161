"""Active clustering that spends a budget of pairwise oracle queries
aggregating pure clusters and splitting impure ones."""

from .constraints import ConstraintStore, ContradictionError, Relation
from .data import (Clustering, Dataset, NeighborGraph, build_neighbor_graph,
                   medoid, radius_sample)
from .engine import Engine, RunResult, SessionConfig, resume_session, run_session
from .init import InitConfig, initialize, probabilistic_cluster
from .metrics import (MetricsReport, ari, compute_report, entropy, entropy_ratio,
                      fission_rate, nmi, purity)
from .oracle import BudgetExceededError, OracleSession, ReplayOracle, SimulatedOracle
from .pairwise import (EPSILON, IsotonicModel, PairProbabilityStore, build_store,
                       build_training_pairs, calibrate, fit_isotonic, fuse_views,
                       generate_pseudo_labels, predict_pair_probability)
from .purity_split import (PurityVerdict, SubclusterResult, choose_tau,
                           density_value, purity_test, subcluster_partition)
from .strategy import (CandidateIndex, CandidatePair, aggregation_probability,
                       aggregation_probability_knn, check_aggregation_guarantee,
                       delta_entropy, expected_nmi_gain, select_candidate)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
