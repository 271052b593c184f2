"""
Built-in claim instances.

- build_ce1: XOR triple (A1, A2, W) times an independent fair coin Z; U absent.
- build_ce2: XOR triple on {0,1} when Z=0, on {0,2} when Z=1; U = Z.
- build_overlap_variant: CE1 plus extra fair-coin causes, Z a function of the extras.
- build_cluster_instance: a cluster label drives every cause and W; the claim's
  conclusion holds here (clustering-indicator confounding).
"""

from __future__ import annotations

import itertools
from fractions import Fraction

from ci_lab.claims.instance import ClaimInstance
from ci_lab.prob_core import (
    JointTable,
    Schema,
    extend_independent,
    make_table,
    push_forward_deterministic,
)

BINARY = ("0", "1")
FAIR = (Fraction(1, 2), Fraction(1, 2))

XOR_ROWS = (("0", "0", "0"), ("0", "1", "1"), ("1", "0", "1"), ("1", "1", "0"))
XOR_ROWS_02 = (("0", "0", "0"), ("0", "2", "1"), ("2", "0", "1"), ("2", "2", "0"))


def build_xor_triple() -> JointTable:
    """(A1, A2, W) uniform on the four even-parity rows: pairwise but not jointly independent."""
    schema = Schema.of(("A1", BINARY), ("A2", BINARY), ("W", BINARY))
    return make_table(
        schema,
        [({"A1": a1, "A2": a2, "W": w}, Fraction(1, 4)) for a1, a2, w in XOR_ROWS],
    )


def build_ce1() -> ClaimInstance:
    """XOR triple independent of Z ~ Ber(1/2); U is null."""
    table = extend_independent(build_xor_triple(), ("Z", BINARY), FAIR)
    return ClaimInstance(table=table, causes=("A1", "A2"), w="W", u=None, z="Z")


def build_ce2() -> ClaimInstance:
    """U = Z ~ Ber(1/2); the XOR triple lives on {0,1} or {0,2} depending on Z."""
    trinary = ("0", "1", "2")
    schema = Schema.of(("A1", trinary), ("A2", trinary), ("W", BINARY), ("Z", BINARY))
    entries = [
        ({"A1": a1, "A2": a2, "W": w, "Z": z}, Fraction(1, 8))
        for z, rows in (("0", XOR_ROWS), ("1", XOR_ROWS_02))
        for a1, a2, w in rows
    ]
    return ClaimInstance(table=make_table(schema, entries), causes=("A1", "A2"), w="W", u="Z", z="Z")


def build_overlap_variant(extra_causes: int = 1) -> ClaimInstance:
    """
    CE1 with `extra_causes` additional fair-coin causes A3, A4, ...

    Z is A3 when there is one extra cause, otherwise the joint label of the
    extras (e.g. "01"). Every (A1, A2, Z) cell has positive probability.

    Raises:
        ValueError: extra_causes < 1
    """
    if extra_causes < 1:
        raise ValueError(f"extra_causes must be >= 1, got {extra_causes}")
    table = build_xor_triple()
    extras = tuple(f"A{3 + i}" for i in range(extra_causes))
    for name in extras:
        table = extend_independent(table, (name, BINARY), FAIR)
    if extra_causes == 1:
        table = push_forward_deterministic(table, "Z", lambda a: a["A3"], support=BINARY)
    else:
        labels = tuple("".join(bits) for bits in itertools.product(BINARY, repeat=extra_causes))
        table = push_forward_deterministic(
            table, "Z", lambda a: "".join(a[name] for name in extras), support=labels
        )
    return ClaimInstance(table=table, causes=("A1", "A2") + extras, w="W", u=None, z="Z")


def build_cluster_instance(
    n_causes: int = 2,
    p_low: Fraction = Fraction(1, 4),
    p_high: Fraction = Fraction(3, 4),
) -> ClaimInstance:
    """
    Two equally likely clusters Z; given the cluster every cause and W are
    independent Bernoulli(p_low) in cluster 0 and Bernoulli(p_high) in cluster 1.

    Here Z captures the common structure, so the conclusion holds (U = Z).
    """
    if n_causes < 2:
        raise ValueError(f"n_causes must be >= 2, got {n_causes}")
    causes = tuple(f"A{i + 1}" for i in range(n_causes))
    names = causes + ("W",)
    schema = Schema.of(*((name, BINARY) for name in names), ("Z", BINARY))
    entries = []
    for z, p in (("0", p_low), ("1", p_high)):
        for bits in itertools.product(BINARY, repeat=len(names)):
            prob = Fraction(1, 2)
            for bit in bits:
                prob *= p if bit == "1" else 1 - p
            assignment = dict(zip(names, bits))
            assignment["Z"] = z
            entries.append((assignment, prob))
    return ClaimInstance(table=make_table(schema, entries), causes=causes, w="W", u="Z", z="Z")


def with_constant_u(inst: ClaimInstance, name: str = "U") -> ClaimInstance:
    """Materialise an absent U as a one-point column."""
    table = extend_independent(inst.table, (name, ("0",)), [1])
    return ClaimInstance(table=table, causes=inst.causes, w=inst.w, u=name, z=inst.z)
