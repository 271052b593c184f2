"""The deconfounder claim as a checkable object, plus its counterexample fixtures."""

from ci_lab.claims.fixtures import (
    build_ce1,
    build_ce2,
    build_cluster_instance,
    build_overlap_variant,
    build_xor_triple,
    with_constant_u,
)
from ci_lab.claims.instance import (
    ClaimInstance,
    check_conclusion,
    check_overlap,
    check_premises,
    instance_from_document,
    instance_to_document,
    instance_to_json,
    verify_claim,
)

__all__ = [
    "ClaimInstance",
    "build_ce1",
    "build_ce2",
    "build_cluster_instance",
    "build_overlap_variant",
    "build_xor_triple",
    "check_conclusion",
    "check_overlap",
    "check_premises",
    "instance_from_document",
    "instance_to_document",
    "instance_to_json",
    "verify_claim",
    "with_constant_u",
]
