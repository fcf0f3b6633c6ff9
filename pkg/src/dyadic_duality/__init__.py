"""Numerical laboratory for the Bellman-function proof of dyadic H^1-BMO duality."""

__version__ = "0.1.0"

from .bellman import (
    BellmanCandidate,
    GridSpec,
    family_candidate,
    optimize_family,
    sample_candidate,
    verify_conditions,
)
from .haar import (
    HaarCoefficients,
    StepFunction,
    bmo_norm,
    expand,
    haar_coefficient,
    make_atom,
    reconstruct,
    tl_norm,
)
from .lattice import LatticeSpec, NodeId
from .lemma import (
    AdmissiblePair,
    NodeFunctional,
    build_pair,
    check_admissibility,
    duality_sum,
    verify_key_lemma,
    verify_node_inequality,
)
from .search import SearchConfig, certify, ratio, search

__all__ = [
    "AdmissiblePair",
    "BellmanCandidate",
    "GridSpec",
    "HaarCoefficients",
    "LatticeSpec",
    "NodeFunctional",
    "NodeId",
    "SearchConfig",
    "StepFunction",
    "bmo_norm",
    "build_pair",
    "certify",
    "check_admissibility",
    "duality_sum",
    "expand",
    "family_candidate",
    "haar_coefficient",
    "make_atom",
    "optimize_family",
    "ratio",
    "reconstruct",
    "sample_candidate",
    "search",
    "tl_norm",
    "verify_conditions",
    "verify_key_lemma",
    "verify_node_inequality",
]
