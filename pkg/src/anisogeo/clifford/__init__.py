"""Clifford algebra kernel and sigma-matrix systems."""

from .algebra import (
    CliffordElement,
    GradedTensor,
    Signature,
    SignatureMismatchError,
    chevalley_isomorphism_check,
    classify_small,
    geometric_product,
    grade_involution,
    graded_tensor_product,
    grading,
    quadratic_form,
    reversal,
    spinor_norm,
    twisted_group_membership,
    upsilon,
    zeta,
)
from .sigma import (
    SigmaSystem,
    epsilon_objects,
    fundamental_spinor_check,
    sigma_dimension,
    sigma_system,
    standard_metric,
    symmetry_class,
    symmetry_cross_check,
)
