"""Exact-arithmetic toolkit for self-maps fixing a hypersurface.

Classifies germs (contact order, tangentiality, dicriticality), extracts the
canonical section and its singular points, computes point residues, and
verifies the global index identities on blow-up exceptional divisors, all
over the Gaussian rationals with no floating point.
"""

from .algebra import (
    G_I,
    G_ONE,
    G_ZERO,
    GaussianRational,
    LaurentSeries,
    PolySeries,
    RatPoly,
    format_polynomial,
    laurent_residue,
    parse_polynomial,
    parse_scalar,
    ps_compose,
    ps_divide_exact,
    restrict_to_hyperplane,
)
from .germs import (
    AdaptedChart,
    ContactProfile,
    MapGerm,
    check_comfortable_pair,
    check_splitting_pair,
    contact_profile,
    dicritical_test,
    vanishing_order,
)
from .sections import (
    ActionCoefficients,
    SectionData,
    SingularLocus,
    action_coefficients,
    extract_section,
    singular_directions,
    singular_points,
    verify_chart_covariance,
)
from .blowup import BlowupChart, LiftedGerm, blow_up_linear_center, blow_up_point
from .residues import (
    BranchParametrization,
    ResidueValue,
    residue_cs_grothendieck,
    residue_cs_n2_smooth,
    residue_cs_singular_curve,
    residue_ls_phi,
    residue_sum_check,
)
from .index_theorems import (
    CompactGeometry,
    IndexVerdict,
    corollary81_report,
    euler_count_check,
    geometry,
    verify_index_theorem,
)

__version__ = "0.1.0"
