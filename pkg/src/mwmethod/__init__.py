"""Finite-group toolkit for covering/thickness constants, largeness systems and
certified descents toward finite models of approximate subgroups."""

from .approx import (
    CoverWitness,
    ThicknessWitness,
    approximate_constant,
    covering_number,
    s_operator,
    thickness_cover_bridge,
    thickness_number,
)
from .descent import (
    ChainCertificate,
    DescentCertificate,
    DescentParams,
    QuotientModel,
    basic_descent,
    extract_model,
    recursive_chain,
)
from .errors import MWError
from .estimators import BasicDescent, RecursiveChain
from .groups import (
    ActionTable,
    ESet,
    GroupTable,
    GSet,
    act_set,
    build_group,
    generated_subgroup,
    inverse_set,
    power_set,
    product_set,
    symmetrize,
    translate,
)
from .measure import MeanSpace, check_mean_axioms, mu, overlap_inequality_check
from .scenario import Scenario, load_scenario, parse_scenario
from .systems import LevelSet, MWSystem, mu_thickness_bound_check
from .verify import Verdict, verify_certificate

__version__ = "0.1.0"

__all__ = [
    "ActionTable", "BasicDescent", "ChainCertificate", "CoverWitness", "DescentCertificate",
    "DescentParams", "ESet", "GSet", "GroupTable", "LevelSet", "MWError", "MWSystem",
    "MeanSpace", "QuotientModel", "RecursiveChain", "Scenario", "ThicknessWitness", "Verdict",
    "act_set", "approximate_constant", "basic_descent", "build_group", "check_mean_axioms",
    "covering_number", "extract_model", "generated_subgroup", "inverse_set", "load_scenario",
    "mu", "mu_thickness_bound_check", "overlap_inequality_check", "parse_scenario",
    "power_set", "product_set", "recursive_chain", "s_operator", "symmetrize",
    "thickness_cover_bridge", "thickness_number", "translate", "verify_certificate",
]
