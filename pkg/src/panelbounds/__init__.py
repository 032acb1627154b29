"""Sharp identified sets for short panels with unrestricted unit-level latents.

Workflow: describe a model family (:class:`ModelSpec`), a parameter value
(:class:`Theta`), and covariate cells; build u-compatible sets and their core
determining collection; then check the containment inequalities of a
candidate structure against observed or simulated conditional outcome laws,
or scan a parameter grid for the identified, outer, or profile-bound sets.
"""

from .distributions import CondOutcomeDist, LatentDist, estimate_F, measure, prob_Y_in
from .identify import (
    CheckReport,
    IdentifiedSetGrid,
    artstein_bruteforce,
    check_structure,
    identified_set_scan,
    linear_panel_beta,
    outer_set_scan,
    profile_bounds_2p_binary,
)
from .models import (
    CovariateCell,
    ModelSpec,
    OutcomeSeq,
    StructuralIndex,
    Theta,
    enumerate_outcomes,
    structural_residual,
)
from .polyhedra import (
    LinExpr,
    LinIneq,
    LinIneqSystem,
    RegionUnion,
    canonical_key,
    fourier_motzkin_eliminate,
    is_empty,
    is_subset,
)
from .randomsets import (
    CdcItem,
    CdcResult,
    UStarSet,
    containment_outcomes,
    core_determining_collection,
    outcome_supportable,
    union_region,
    ustar,
    ystar,
)
from .simulate import DgpSpec, exact_F, simulate_panel

__version__ = "0.1.0"

__all__ = [
    "CdcItem",
    "CdcResult",
    "CheckReport",
    "CondOutcomeDist",
    "CovariateCell",
    "DgpSpec",
    "IdentifiedSetGrid",
    "LatentDist",
    "LinExpr",
    "LinIneq",
    "LinIneqSystem",
    "ModelSpec",
    "OutcomeSeq",
    "RegionUnion",
    "StructuralIndex",
    "Theta",
    "UStarSet",
    "artstein_bruteforce",
    "canonical_key",
    "check_structure",
    "containment_outcomes",
    "core_determining_collection",
    "enumerate_outcomes",
    "estimate_F",
    "exact_F",
    "fourier_motzkin_eliminate",
    "identified_set_scan",
    "is_empty",
    "is_subset",
    "linear_panel_beta",
    "measure",
    "outcome_supportable",
    "outer_set_scan",
    "prob_Y_in",
    "profile_bounds_2p_binary",
    "simulate_panel",
    "structural_residual",
    "union_region",
    "ustar",
    "ystar",
]
