"""Row contractions on the unit ball: invariants, characteristic functions,
ball automorphisms and their projective representation, at desk scale."""

from .numerics import (
    DEFAULT_TOL,
    Subspace,
    ToleranceConfig,
    col_space,
    compress,
    null_space,
    ortho_complement_in,
    psd_sqrt,
    subspace_intersect,
    subspace_sum,
)
from .fock import FockContext, RowSymbol, concat, creation_ops, eval_symbol, reverse, words_of_length
from .contraction import (
    CPLimit,
    DefectData,
    PoissonKernelMatrix,
    RowTuple,
    cp_limit,
    defects,
    hc_subspace,
    is_pure,
    new_row_tuple,
    poisson_kernel,
)
from .charfun import (
    CharFun,
    DegreeReport,
    Witness,
    charfun_coeffs,
    charfun_degree,
    charfun_eval,
    coincidence_search,
    coincidence_verify,
    factorization_residual,
)
from .invariants import (
    Decomposition,
    GammaValue,
    ModelTuple,
    RealizedModel,
    WoldResult,
    classify,
    decompose,
    gamma,
    gamma_structural,
    realize,
    wold,
)
from .mobius import (
    AutElement,
    aut_apply,
    apply_point,
    compose,
    dE,
    identity_element,
    invert,
    psi_eval,
    sup_norm_est,
)
from .projrep import (
    Cocycle,
    ProjRepElement,
    boundary_function,
    cocycle,
    continuity_probe,
    intertwining_residual,
    u_operator,
)

__version__ = "0.1.0"
