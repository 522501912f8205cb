"""Exact idealness checks for mixed-binary rectangle packing formulations."""
from .experiments import GenSpec, build_spp, export, generate, greedy_pack, summarize, validate_layout
from .formulations import KINDS, build, sequence_pair_cuts
from .idealness import (Ideal, NotIdeal, build_iom, build_separation, check_ideal, enumerate_extreme_points,
                        max_phi_over_vertices, spark_circuits)
from .lemmas import LemmaSpec, verify_lemma
from .mblp import MblpModel, compose_relaxation, phi, Phi
from .rational import Rat, RatMatrix, left_nullspace, rank, solve_square
from .rpp import RppInstance, RppObject, classify, derive_params, pair_instance
from .selectors import selector_eval

__version__ = "0.1.0"

__all__ = [
    "GenSpec", "build_spp", "export", "generate", "greedy_pack", "summarize", "validate_layout",
    "KINDS", "build", "sequence_pair_cuts",
    "Ideal", "NotIdeal", "build_iom", "build_separation", "check_ideal", "enumerate_extreme_points",
    "max_phi_over_vertices", "spark_circuits",
    "LemmaSpec", "verify_lemma",
    "MblpModel", "compose_relaxation", "phi", "Phi",
    "Rat", "RatMatrix", "left_nullspace", "rank", "solve_square",
    "RppInstance", "RppObject", "classify", "derive_params", "pair_instance",
    "selector_eval",
]
