"""Markov blanket discovery with Minimum Message Length scores."""

__version__ = "0.1.0"

from .core import (
    BayesianNetwork,
    ContingencyTable,
    Dag,
    DataError,
    DiscreteDataset,
    MarkovBlanket,
    StructureError,
    Variable,
    build_contingency,
    markov_blanket_of,
    topological_order,
)
from .iamb import CiTestResult, conditional_mi, iamb
from .polytree import MbPolytree, count_mbp, enumerate_mbp, is_valid_mbp, sample_mbp_uniform, unrank_mbp
from .scoring import DirichletPrior, cpt_mml, mbp_mml, multistate_mml, nb_mml
from .search import (
    MarkovBlanketSet,
    SearchConfig,
    discover_all,
    discover_mb,
    discover_mb_fixed,
    discover_mb_mbp,
    enforce_symmetry,
)
from .synth import NetworkSpec, ancestral_sample, generate_network, random_dag, random_parameters
from .evaluation import aggregate, run_experiment, score_mb
