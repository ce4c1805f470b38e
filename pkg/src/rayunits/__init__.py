"""Ray class groups, Siegel-unit invariants, and generation checks for
imaginary quadratic fields."""

from .abgroup import FinAbGroup, GroupHom, Subgroup, decompose, index_in, intersect, join, subgroup_lattice
from .chars import (
    Character,
    NoAdmissibleCharacter,
    all_characters,
    conductor,
    count_G1_G2,
    extend_character,
    find_admissible_character,
    primitive_character,
    trivial_character,
)
from .clgroup import ClassGroup, QForm, class_group, principal_generator_fast
from .conjecture import (
    ConjectureReport,
    SubfieldSpec,
    assumption_check,
    check_subfield,
    h_set,
    make_subfield_spec,
    norm_to_L,
    small_quotient_table_scan,
    small_gp_listed,
    verify_generation,
)
from .kronecker import (
    DegenerateEulerFactor,
    LimitFormulaContext,
    find_gamma,
    gauss_sum,
    kronecker_rhs,
    l_partial_sum,
    level_lowering_identity,
    level_lowering_identity_as_stated,
    make_limit_context,
    stickelberger,
)
from .qfield import (
    FracIdeal,
    Ideal,
    QuadField,
    QuadInt,
    QuadRat,
    ResourceLimitError,
    different,
    factor_ideal,
    kronecker_symbol,
    parse_ideal,
    principal_generator,
    quad_field,
)
from .rayclass import RayClassGroup, ResidueRing, build_rayclass, g_p, ray_class_group
from .siegel import InvariantSpec, bernoulli2, invariant, invariant_log, invariant_spec, siegel_g

__version__ = "0.1.0"
