"""Exact arithmetic for the tail-rigid transformations of a tree boundary.

The package models the boundary of the regular tree in which every vertex
has valence n+1, and the group of homeomorphisms of that boundary given by
finite prefix-exchange tables.  It provides:

- ``tree``: addresses, balls, and clopen boundary sets in normal form;
- ``element``: group arithmetic for prefix-exchange tables;
- ``thorn``: reduced thorns — the orbit invariants of clopen sets;
- ``bithorn``: minimal matched thorn pairs — double-coset canonical forms;
- ``orbitstats``: exact class-transition counts for a group element;
- ``spherical``: positive-definite function evaluation and certification;
- ``textio``/``cli``: plain-text formats and the command-line front end.
"""

from .errors import DomainError, InternalError, SpherotreeError, ValidationError
from .tree import (
    Address,
    Ball,
    ClopenSet,
    ROOT,
    balls_disjoint,
    down,
    format_address,
    parse_address,
    parse_ball,
    refine,
    root_code,
    up,
    upsilon,
    validate_prefix_code,
)
from .element import (
    Spheromorphism,
    act_on_ball,
    act_on_clopen,
    compose,
    conjugate,
    displacement_parity,
    equals,
    finitary_automorphism,
    from_pieces,
    identity,
    invert,
    is_identity,
    power,
    preserves_all_balls,
    random_element,
    thompson_generators,
    truncated_action,
    witness_nonautomorphism,
    witness_translation,
)
from .thorn import (
    SubThorn,
    ThornCode,
    UP,
    canonical_code,
    classify_clopen,
    clopen_of_subthorn,
    empty_subthorn,
    enumerate_class_codes,
    enumerate_embeddings,
    is_class_code,
    maximal_ball_thorn,
    reduce_subthorn,
    require_class_code,
    subthorn_from_balls,
)
from .bithorn import (
    BiThorn,
    CosetCode,
    bithorn_of,
    canonical_coset_code,
    coset_code,
    is_automorphism,
    minimal_bithorn,
    reduce_bithorn,
)
from .orbitstats import (
    ClassTable,
    LUMP_LABEL,
    MovedSet,
    TransitionCounts,
    moved_sets,
    theta,
    theta_bruteforce,
)
from .spherical import (
    DEFAULT_PSD_TOL,
    GramReport,
    SpecReport,
    SphericalSpec,
    TensorSpec,
    TensorValue,
    gram_psd_check,
    nessonov_evaluator,
    phi_l2,
    phi_nessonov,
    phi_product,
    phi_tensor,
    symmetric_eigenvalues,
    tensor_evaluator,
    validate_spec,
)

__all__ = [
    "Address",
    "Ball",
    "BiThorn",
    "ClassTable",
    "ClopenSet",
    "CosetCode",
    "DEFAULT_PSD_TOL",
    "DomainError",
    "GramReport",
    "InternalError",
    "LUMP_LABEL",
    "MovedSet",
    "ROOT",
    "SpecReport",
    "SphericalSpec",
    "Spheromorphism",
    "SpherotreeError",
    "SubThorn",
    "TensorSpec",
    "TensorValue",
    "ThornCode",
    "TransitionCounts",
    "UP",
    "ValidationError",
    "act_on_ball",
    "act_on_clopen",
    "balls_disjoint",
    "bithorn_of",
    "canonical_code",
    "canonical_coset_code",
    "classify_clopen",
    "clopen_of_subthorn",
    "compose",
    "conjugate",
    "coset_code",
    "displacement_parity",
    "down",
    "empty_subthorn",
    "enumerate_class_codes",
    "enumerate_embeddings",
    "equals",
    "finitary_automorphism",
    "format_address",
    "from_pieces",
    "gram_psd_check",
    "identity",
    "invert",
    "is_automorphism",
    "is_class_code",
    "is_identity",
    "maximal_ball_thorn",
    "minimal_bithorn",
    "moved_sets",
    "nessonov_evaluator",
    "parse_address",
    "parse_ball",
    "phi_l2",
    "phi_nessonov",
    "phi_product",
    "phi_tensor",
    "power",
    "preserves_all_balls",
    "random_element",
    "reduce_bithorn",
    "reduce_subthorn",
    "refine",
    "require_class_code",
    "root_code",
    "subthorn_from_balls",
    "symmetric_eigenvalues",
    "tensor_evaluator",
    "theta",
    "theta_bruteforce",
    "thompson_generators",
    "truncated_action",
    "up",
    "upsilon",
    "validate_prefix_code",
    "validate_spec",
    "witness_nonautomorphism",
    "witness_translation",
]
