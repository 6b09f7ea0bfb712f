"""Spectral truncation of (twisted) operator families into graded vectorial bundles."""

from .approx import (FamilyApproximation, FredholmFamily, SpectralTruncation, TwistedFamilyData,
                     approximate_family, approximate_single, approximate_twisted_family,
                     compare_cutoffs, index_of_family, kernel_bundle_family, kernel_line_transitions)
from .cech import (DDClass, U1Cochain, UnitaryLiftSystem, chern_number, connecting_to_integer,
                   dd_class, dd_cocycle, rank_obstruction, solve_u1_coboundary, u1_delta)
from .config import DEFAULT_TOL, Tolerances
from .exceptions import ComputationError, InputError, VectkError
from .graded import (GradedSpace, GradedSubspace, OddMap, hat, hermitian_eig, low_spectrum,
                     orthogonal_project, select_gap)
from .ledger import (FormalDifference, KClassDescriptor, Ledger, Verdict, add, class_of, equals, negate,
                     subtract)
from .scenarios import builtin_scenario
from .simplicial import (IntegerCochain, SimplicialComplex, StarCover, build_complex,
                         coboundary_matrix, cohomology, integer_class, star_cover)
from .smith import smith_normal_form
from .vectorial import (VectorialBundle, direct_sum, doteq_check, graded_index, support,
                        verify, verify_homomorphism, verify_isomorphism, verify_twisted,
                        verify_vectorial)

__version__ = "0.1.0"
