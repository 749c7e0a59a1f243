"""cuspcount: exact computations with even lattices and their discriminant
forms, up to the orbit/double-coset counts classifying derived partners and
boundary components of the associated modular quotients."""

from .counting import (
    CountReport,
    IsotropicOrbitDatum,
    K3Model,
    OMGenerators,
    RouteCrosscheck,
    count_cusps_zero_dim,
    count_fm,
    count_fm_elliptic,
    count_fm_elliptic_sec,
    derive_orbit_data,
    euler_phi,
    gamma_image,
    mu1_fiber_ur,
    route_crosscheck,
    ur_example,
)
from .discriminant import (
    DEFAULT_BUDGET,
    FiniteQuadraticForm,
    FqfIsometry,
    FqfSubgroup,
    aut_group,
    discriminant_form,
    double_coset_count,
    fqf_isomorphism,
    fqf_subgroup,
    is_isogenus,
    isotropic_elements,
    isotropic_subgroups,
    min_generators,
    natural_map,
    overlattice,
    plus_minus_subgroup,
    resolve_budget,
    trivial_subgroup,
)
from .errors import (
    BadParams,
    BoundTooSmall,
    BudgetExceeded,
    Degenerate,
    DegenerateSublattice,
    DivisorNotOne,
    DoesNotFixL,
    FImagesDiffer,
    HypothesisFails,
    IncompleteInputs,
    LatticeError,
    NonIntegralRescale,
    NoneFoundInWindow,
    NotIsometry,
    NotIsotropic,
    NotIsotropicPlane,
    NotPrimitive,
    NotRank2,
    NotSymmetric,
    OddDiagonal,
    ParseError,
    SubgroupNotContained,
    UnknownName,
    VectorNotInComplement,
    ZeroVector,
)
from .genus import GenusQuery, equivalent_rank2, genus_representatives_rank2, nikulin_unique
from .isotropic import (
    HyperbolicSplit,
    IsotropicOrbitClass,
    IsotropicPlane,
    IsotropicVector,
    check_div_square,
    classify_i1_orbits,
    enumerate_isotropic,
    hyperbolic_completion,
    is_standard_plane,
    projection_isometry,
    quotient_lattice,
    split_from_pair,
    stabilizer_compose,
    stabilizer_decompose,
    transvection,
)
from .lattices import (
    Embedding,
    EvenLattice,
    LatticeIsometry,
    LatticeMap,
    direct_sum,
    divisor,
    is_primitive,
    make_lattice,
    named_lattice,
    orthogonal_complement,
    rescale,
    signature,
    smith_normal_form,
)

__version__ = "0.1.0"
