"""Exact symbolic computation for differential nonassociative identities.

The package represents free differential algebras over declared operation
alphabets, verifies and discovers identity certificates by exact linear
algebra over the rationals, converts between one-operation and two-operation
presentations, and checks everything on concrete finite-dimensional models.
"""

from .engine import (
    Certificate,
    CertificatePart,
    InstanceOptions,
    NotInSlice,
    check_implication,
    derive,
    instances,
    verify_certificate,
)
from .models import (
    TableAlgebra,
    check_axioms,
    eval_identity,
    extend_derivation,
    find_countermodel,
    free_zinbiel_model,
    integral_zinbiel_model,
    leibniz_defects,
    random_commassoc_der,
    truncated_poly_model,
    unital_poisson_model,
    zero_model,
)
from .terms import (
    Apply,
    Monomial,
    OperationSignature,
    Poly,
    SliceBasis,
    Var,
    apply_op,
    d_apply,
    enumerate_basis,
    from_vector,
    normalize,
    signature,
    substitute,
    to_vector,
    var,
)
from .transforms import (
    PolarizationMap,
    depolarize,
    depolarize_model,
    derived_bracket,
    polarize,
    polarize_model,
    zinbiel_polarization,
    zinbiel_star,
)
from .varieties import Variety, builtin, delete_derivation, multilinearize

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
