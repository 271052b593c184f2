"""
Exact conditional-independence oracle.

Provides:
- is_ci: X _||_ Y | Z on an exact table
- is_mutually_independent: full factorization of several groups given Z
- pairwise_joint_report: the pairwise-true / joint-false gap diagnostic
- minimality_check: no proper coarsening of U already yields mutual independence

Conditioning strata with probability zero are vacuously independent.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Iterable, Iterator, Sequence
from dataclasses import dataclass, field
from fractions import Fraction

from ci_lab.config import get_settings
from ci_lab.exceptions import (
    OverlappingSetsException,
    SupportTooLargeException,
    TableValidationException,
)
from ci_lab.prob_core import JointTable, Schema, marginal, push_forward_deterministic
from ci_lab.validation.models import GroupVerdict, PairwiseJointReport

logger = logging.getLogger(__name__)

Key = tuple[str, ...]


def _names(values: Iterable[str]) -> frozenset[str]:
    if isinstance(values, str):
        return frozenset([values])
    return frozenset(values)


def _render(names: Iterable[str]) -> str:
    return ",".join(sorted(names))


@dataclass(frozen=True)
class CIStatement:
    """
    The claim x _||_ y | given.

    Disjointness and name validity are checked against a schema at evaluation
    time (validate), not at construction, so a parsed statement such as
    `A1 _||_ A1 | Z` exists until it is evaluated.
    """

    x: frozenset[str]
    y: frozenset[str]
    given: frozenset[str] = field(default_factory=frozenset)

    def __post_init__(self) -> None:
        object.__setattr__(self, "x", _names(self.x))
        object.__setattr__(self, "y", _names(self.y))
        object.__setattr__(self, "given", _names(self.given))
        if not self.x or not self.y:
            raise ValueError("CI statement sides must be non-empty")

    def validate(self, schema: Schema) -> None:
        """
        Raises:
            UnknownVariableException: A name is not in the schema
            OverlappingSetsException: x, y, given are not pairwise disjoint
        """
        schema.require(sorted(self.x | self.y | self.given))
        overlap = (self.x & self.y) | (self.x & self.given) | (self.y & self.given)
        if overlap:
            raise OverlappingSetsException(f"Statement sets overlap: {self}", overlap=overlap)

    @property
    def content(self) -> tuple[frozenset[frozenset[str]], frozenset[str]]:
        """Symmetric content: x _||_ y | z and y _||_ x | z compare equal."""
        return frozenset([self.x, self.y]), self.given

    def __str__(self) -> str:
        return f"{_render(self.x)} _||_ {_render(self.y)} | {_render(self.given)}".rstrip()


@dataclass(frozen=True)
class MutualStatement:
    """groups are mutually independent given `given`."""

    groups: tuple[frozenset[str], ...]
    given: frozenset[str] = field(default_factory=frozenset)

    def __post_init__(self) -> None:
        object.__setattr__(self, "groups", tuple(_names(g) for g in self.groups))
        object.__setattr__(self, "given", _names(self.given))
        if len(self.groups) < 2:
            raise ValueError("Mutual independence needs at least two groups")
        if any(not g for g in self.groups):
            raise ValueError("Groups must be non-empty")

    def validate(self, schema: Schema) -> None:
        _check_groups(schema, self.groups, self.given)

    @property
    def content(self) -> tuple[frozenset[frozenset[str]], frozenset[str]]:
        return frozenset(self.groups), self.given

    def __str__(self) -> str:
        groups = " ; ".join(_render(g) for g in self.groups)
        return f"mutual({groups}) | {_render(self.given)}".rstrip()


@dataclass(frozen=True)
class Partition:
    """A coarsening of a variable's support: disjoint non-empty blocks covering it."""

    blocks: tuple[frozenset[str], ...]

    def validate(self, support: Sequence[str]) -> None:
        seen: set[str] = set()
        for block in self.blocks:
            if not block:
                raise TableValidationException("Partition blocks must be non-empty")
            if seen & block:
                raise TableValidationException(
                    "Partition blocks must be disjoint", value=sorted(seen & block)
                )
            seen |= block
        if seen != set(support):
            raise TableValidationException(
                "Partition must cover the support", value=sorted(seen ^ set(support))
            )

    def block_of(self, label: str) -> int:
        for i, block in enumerate(self.blocks):
            if label in block:
                return i
        raise KeyError(label)


def _check_groups(
    schema: Schema, groups: Sequence[frozenset[str]], given: frozenset[str]
) -> None:
    schema.require(sorted(set().union(*groups) | given))
    seen: set[str] = set(given)
    for group in groups:
        overlap = seen & group
        if overlap:
            raise OverlappingSetsException("Groups overlap each other or the conditioning set", overlap)
        seen |= group


def _project(key: Key, positions: Sequence[int]) -> Key:
    return tuple(key[i] for i in positions)


@dataclass
class StrataMasses:
    """Joint mass of (given, x, y) accumulated in one pass over the table."""

    z: dict[Key, Fraction]
    xz: dict[tuple[Key, Key], Fraction]
    yz: dict[tuple[Key, Key], Fraction]
    xyz: dict[tuple[Key, Key, Key], Fraction]


def strata_masses(table: JointTable, s: CIStatement) -> StrataMasses:
    s.validate(table.schema)
    xs = table.positions(sorted(s.x))
    ys = table.positions(sorted(s.y))
    zs = table.positions(sorted(s.given))
    acc = StrataMasses({}, {}, {}, {})
    for key, p in table.entries.items():
        z, x, y = _project(key, zs), _project(key, xs), _project(key, ys)
        acc.z[z] = acc.z.get(z, Fraction(0)) + p
        acc.xz[(z, x)] = acc.xz.get((z, x), Fraction(0)) + p
        acc.yz[(z, y)] = acc.yz.get((z, y), Fraction(0)) + p
        acc.xyz[(z, x, y)] = acc.xyz.get((z, x, y), Fraction(0)) + p
    return acc


def is_ci(table: JointTable, s: CIStatement) -> bool:
    """
    Exact test of s.x _||_ s.y | s.given.

    Checks P(x,y,z)P(z) = P(x,z)P(y,z) on positive cells only: the products
    P(x,z)P(y,z)/P(z) sum to P(z) over all (x, y), so equality on every
    positive cell forces the remaining products to be zero.

    Raises:
        UnknownVariableException, OverlappingSetsException
    """
    acc = strata_masses(table, s)
    for (z, x, y), pxyz in acc.xyz.items():
        if pxyz * acc.z[z] != acc.xz[(z, x)] * acc.yz[(z, y)]:
            return False
    return True


def is_mutually_independent(
    table: JointTable,
    groups: Sequence[Iterable[str]],
    given: Iterable[str] = (),
) -> bool:
    """
    Full factorization of the groups' conditional joint, per positive stratum.

    Raises:
        ValueError: Fewer than two groups
        UnknownVariableException, OverlappingSetsException
    """
    statement = MutualStatement(tuple(_names(g) for g in groups), _names(given))
    statement.validate(table.schema)
    zs = table.positions(sorted(statement.given))
    group_positions = [table.positions(sorted(g)) for g in statement.groups]
    m = len(group_positions)

    pz: dict[Key, Fraction] = {}
    pg: list[dict[tuple[Key, Key], Fraction]] = [{} for _ in group_positions]
    joint: dict[tuple[Key, tuple[Key, ...]], Fraction] = {}
    for key, p in table.entries.items():
        z = _project(key, zs)
        values = tuple(_project(key, pos) for pos in group_positions)
        pz[z] = pz.get(z, Fraction(0)) + p
        for i, v in enumerate(values):
            pg[i][(z, v)] = pg[i].get((z, v), Fraction(0)) + p
        joint[(z, values)] = joint.get((z, values), Fraction(0)) + p

    # Same positive-cell argument as is_ci: the product terms sum to P(z).
    for (z, values), p in joint.items():
        product = math.prod((pg[i][(z, v)] for i, v in enumerate(values)), start=Fraction(1))
        if p * pz[z] ** (m - 1) != product:
            return False
    return True


def pairwise_joint_report(
    table: JointTable,
    groups: Sequence[Iterable[str]],
    target: Iterable[str],
    given: Iterable[str] = (),
) -> PairwiseJointReport:
    """
    Compare per-group CI with the joint CI of all groups against `target`.

    The gap is flagged when every group is independent of the target but the
    union of the groups is not.
    """
    target_set = _names(target)
    given_set = _names(given)
    group_sets = [_names(g) for g in groups]
    pairwise = [
        GroupVerdict(
            group=sorted(g), independent=is_ci(table, CIStatement(g, target_set, given_set))
        )
        for g in group_sets
    ]
    union = frozenset().union(*group_sets)
    joint = is_ci(table, CIStatement(union, target_set, given_set))
    mutual = (
        is_mutually_independent(table, group_sets, given_set) if len(group_sets) >= 2 else None
    )
    gap = all(v.independent for v in pairwise) and not joint
    if gap:
        logger.info("Pairwise-true / joint-false gap for target %s", _render(target_set))
    return PairwiseJointReport(
        target=sorted(target_set),
        given=sorted(given_set),
        pairwise=pairwise,
        joint=joint,
        mutual=mutual,
        gap=gap,
    )


def set_partitions(items: Sequence[str]) -> Iterator[list[list[str]]]:
    """All set partitions of `items` (Bell(len(items)) of them)."""
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for smaller in set_partitions(rest):
        for i in range(len(smaller)):
            yield smaller[:i] + [[first] + smaller[i]] + smaller[i + 1 :]
        yield [[first]] + smaller


def minimality_check(
    table: JointTable,
    u: str,
    groups: Sequence[Iterable[str]],
    max_support: int | None = None,
) -> bool:
    """
    True iff no proper coarsening of u's effective support renders the groups
    mutually independent.

    The effective support is the set of u-labels with positive probability.
    The one-block coarsening is the unconditional case.

    Raises:
        UnknownVariableException: u or a group variable is unknown
        OverlappingSetsException: Groups overlap or contain u
        SupportTooLargeException: Effective support exceeds the configured bound
    """
    group_sets = [_names(g) for g in groups]
    _check_groups(table.schema, group_sets, frozenset([u]))
    bound = max_support if max_support is not None else get_settings().max_partition_support

    u_marginal = marginal(table, {u})
    effective = [key[0] for key, _ in u_marginal.items()]
    if len(effective) > bound:
        raise SupportTooLargeException(
            f"Too many support points of {u} to enumerate coarsenings",
            limit=bound,
            actual=len(effective),
        )

    reduced = marginal(table, set().union(*group_sets) | {u})
    coarse = f"{u}__coarse"
    while coarse in reduced.schema:
        coarse += "_"
    for blocks in set_partitions(effective):
        if len(blocks) >= len(effective):
            continue
        partition = Partition(tuple(frozenset(b) for b in blocks))
        extended = push_forward_deterministic(
            reduced, coarse, lambda a, part=partition: str(part.block_of(a[u]))
        )
        if is_mutually_independent(extended, group_sets, {coarse}):
            logger.debug("Coarsening %s of %s already yields independence", blocks, u)
            return False
    return True
