"""Exact homological algebra over small categories.

Complexes of modules over Z, Q, F_p and graded polynomial rings; diagrams of
complexes over finite categories with their Kan extensions and derived
versions; Koszul-based local cohomology; and group cohomology with the
Lyndon-Hochschild-Serre spectral sequence.
"""
from .errors import *  # noqa: F401,F403
from .exactalg import (  # noqa: F401
    GF, QQ, ZZ, ExactMatrix, GradedPoly, ModulePresentation, Subquotient, parse_ring,
)
from .complexes import ChainMap, Complex, Homotopy, cone, homology, hom_complex, tensor  # noqa: F401
from .smallcat import BG, CatFunctor, FinCat, builtin  # noqa: F401
from .diagrams import DiagramComplex, DiagramMap, colim, lan, lim, ran  # noqa: F401
from .resolve import (  # noqa: F401
    beck_chevalley_check, derived_lan, derived_ran, derivator_cone, hocolim, holim,
    is_cartesian, is_cocartesian, projective_resolution, rectify_square,
)
from .koszul import (  # noqa: F401
    Covector, SpecClosedSpec, check_characterization, check_idempotence, gamma, local_cohomology,
)
from .groupcoh import (  # noqa: F401
    FiniteGroup, Representation, group_cohomology, group_homology, lhs_E2, lhs_double_complex,
    named_group, shapiro_check, ss_run,
)

__version__ = "0.1.0"
