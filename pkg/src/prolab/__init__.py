"""prolongation-lab: exact formal geometry of PDE systems.

Jet charts, contact systems, prolongation, Spencer cohomology, Pfaffian
derived flags, and rule-based plus gate-based local equivalence tests,
all in exact rational arithmetic.
"""

from .algebra import ExactMatrix, Poly, RatFunc, generic_rank, kernel_basis
from .contact import (
    ContactSystem,
    contact_generators,
    is_holonomic_integral,
    restrict_contact,
    total_lie_derivative,
)
from .equivalence import (
    EquivalenceVerdict,
    FiberedMap,
    GateReport,
    NECESSITY_CAVEAT,
    conjugation_membership,
    gate,
    ode_nonsingular_rule,
    pfaff_rules,
    verify_absolute,
    verify_merihedric,
)
from .forms import DiffForm, differential, exterior_derivative
from .jets import (
    InvertibleMap,
    JetChart,
    JetOfMap,
    PolyMap,
    PolySection,
    conjugate_jet,
    enumerate_multi_indices,
    holonomic_jet,
    identity_jet,
    jet_compose,
    jet_dimension,
    jet_invert,
    total_derivative,
)
from .pfaffian import (
    DerivedFlag,
    PfaffSystem,
    characteristic_space,
    darboux_system,
    derived_flag,
    derived_system,
    flag_classify,
    frobenius_test,
    goursat_model,
    rank_corank,
)
from .spencer import (
    GENERIC,
    SpencerReport,
    SymbolSpace,
    cartan_characters,
    delta_matrix,
    spencer_cohomology,
    symbol,
)
from .systems import (
    PdeSystem,
    generic_dimension,
    is_solution,
    prolong,
    prolongation_report,
    regularity_check,
    sample_on_locus,
    tangency_oracle,
)

__version__ = "0.1.0"
