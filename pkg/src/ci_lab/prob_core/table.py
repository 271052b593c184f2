"""
Exact finite joint distributions.

A JointTable is a sparse map from full assignments (one outcome label per
schema variable, in schema order) to positive Fractions. Absent assignments
have probability zero. Every value is immutable after construction.

Usage:
    from ci_lab.prob_core import Schema, make_table, marginal, condition

    schema = Schema.of(("A", ["0", "1"]), ("B", ["0", "1"]))
    table = make_table(schema, [({"A": "0", "B": "0"}, "1/2"), ({"A": "1", "B": "1"}, "1/2")])
    marginal(table, {"A"})
"""

from __future__ import annotations

import itertools
from collections.abc import Callable, Iterable, Iterator, Mapping, Sequence
from dataclasses import dataclass
from fractions import Fraction
from types import MappingProxyType

from ci_lab.exceptions import (
    DuplicateAssignmentException,
    DuplicateVariableException,
    MissingValueException,
    NegativeProbabilityException,
    SumNotOneException,
    TableValidationException,
    UnknownOutcomeException,
    UnknownVariableException,
    ZeroProbabilityEventException,
)
from ci_lab.prob_core.rational import as_rational

Assignment = Mapping[str, str]
Key = tuple[str, ...]


@dataclass(frozen=True)
class Variable:
    """A named variable with an ordered, finite support of outcome labels."""

    name: str
    support: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.name:
            raise TableValidationException("Variable name must be non-empty", field="name")
        object.__setattr__(self, "support", tuple(self.support))
        if not self.support:
            raise TableValidationException(
                "Support must be non-empty", field=self.name, constraint="len(support) >= 1"
            )
        if len(set(self.support)) != len(self.support):
            raise TableValidationException(
                "Support labels must be distinct",
                field=self.name,
                value=list(self.support),
                constraint="distinct labels",
            )


@dataclass(frozen=True)
class Schema:
    """Ordered list of variables with unique names."""

    variables: tuple[Variable, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "variables", tuple(self.variables))
        seen: set[str] = set()
        for var in self.variables:
            if var.name in seen:
                raise DuplicateVariableException(
                    "Variable names must be unique", field=var.name, constraint="unique names"
                )
            seen.add(var.name)

    @classmethod
    def of(cls, *pairs: tuple[str, Sequence[str]]) -> Schema:
        """Build a schema from (name, support) pairs."""
        return cls(tuple(Variable(name, tuple(support)) for name, support in pairs))

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(var.name for var in self.variables)

    def __contains__(self, name: object) -> bool:
        return any(var.name == name for var in self.variables)

    def __len__(self) -> int:
        return len(self.variables)

    def index(self, name: str) -> int:
        for i, var in enumerate(self.variables):
            if var.name == name:
                return i
        raise UnknownVariableException(name)

    def variable(self, name: str) -> Variable:
        return self.variables[self.index(name)]

    def support(self, name: str) -> tuple[str, ...]:
        return self.variable(name).support

    def require(self, names: Iterable[str]) -> None:
        """Raise UnknownVariableException for the first unknown name."""
        for name in names:
            if name not in self:
                raise UnknownVariableException(name)

    def restrict(self, names: Iterable[str]) -> Schema:
        """Sub-schema over `names`, kept in this schema's order."""
        wanted = set(names)
        self.require(sorted(wanted))
        return Schema(tuple(var for var in self.variables if var.name in wanted))

    @property
    def cell_count(self) -> int:
        count = 1
        for var in self.variables:
            count *= len(var.support)
        return count

    def cells(self) -> Iterator[Key]:
        """All full assignments, in canonical (support-index lexicographic) order."""
        return itertools.product(*(var.support for var in self.variables))

    def check_assignment(self, assignment: Assignment, *, full: bool) -> None:
        """Validate names and labels; with full=True every variable must be assigned."""
        for name, label in assignment.items():
            var = self.variable(name)
            if label not in var.support:
                raise UnknownOutcomeException(
                    "Outcome label not in support",
                    field=name,
                    value=label,
                    constraint=f"label in {list(var.support)}",
                )
        if full and len(assignment) != len(self.variables):
            missing = [name for name in self.names if name not in assignment]
            raise TableValidationException(
                "Assignment must be full", field=",".join(missing), constraint="full assignment"
            )

    def key(self, assignment: Assignment) -> Key:
        self.check_assignment(assignment, full=True)
        return tuple(assignment[name] for name in self.names)

    def sort_key(self, key: Key) -> tuple[int, ...]:
        return tuple(var.support.index(label) for var, label in zip(self.variables, key))


@dataclass(frozen=True, eq=False)
class JointTable:
    """
    Exact joint probability table over a Schema.

    Only positive-probability assignments are stored; the entries sum to 1.
    Build with make_table(); the constructor trusts its inputs.
    """

    schema: Schema
    entries: Mapping[Key, Fraction]

    def __post_init__(self) -> None:
        object.__setattr__(self, "entries", MappingProxyType(dict(self.entries)))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, JointTable):
            return NotImplemented
        return self.schema == other.schema and dict(self.entries) == dict(other.entries)

    def __hash__(self) -> int:
        return hash((self.schema, frozenset(self.entries.items())))

    def items(self) -> list[tuple[Key, Fraction]]:
        """Entries in canonical order."""
        return sorted(self.entries.items(), key=lambda item: self.schema.sort_key(item[0]))

    def assignments(self) -> Iterator[tuple[dict[str, str], Fraction]]:
        """Positive-probability entries as (assignment dict, probability), canonical order."""
        names = self.schema.names
        for key, p in self.items():
            yield dict(zip(names, key)), p

    def positions(self, names: Iterable[str]) -> tuple[int, ...]:
        return tuple(self.schema.index(name) for name in names)

    def __repr__(self) -> str:
        return f"JointTable(variables={list(self.schema.names)}, entries={len(self.entries)})"


def _from_mass(schema: Schema, mass: Mapping[Key, Fraction]) -> JointTable:
    return JointTable(schema, {key: p for key, p in mass.items() if p != 0})


def make_table(
    schema: Schema,
    entries: Iterable[tuple[Assignment, Fraction | int | str]],
) -> JointTable:
    """
    Build a validated JointTable.

    Args:
        schema: Variables and supports
        entries: (full assignment, probability) pairs; omitted assignments are 0

    Returns:
        Validated JointTable (zero entries dropped)

    Raises:
        UnknownVariableException: Assignment names an unknown variable
        UnknownOutcomeException: Label outside its variable's support
        DuplicateAssignmentException: Same assignment listed twice
        NegativeProbabilityException: Probability < 0
        SumNotOneException: Exact sum differs from 1
    """
    mass: dict[Key, Fraction] = {}
    for assignment, raw in entries:
        key = schema.key(assignment)
        if key in mass:
            raise DuplicateAssignmentException(
                "Assignment listed twice", field=",".join(key), constraint="distinct assignments"
            )
        p = as_rational(raw)
        if p < 0:
            raise NegativeProbabilityException(
                "Probability must be nonnegative", field=",".join(key), value=p, constraint="p >= 0"
            )
        mass[key] = p
    total = sum(mass.values(), Fraction(0))
    if total != 1:
        raise SumNotOneException(
            "Probabilities must sum to exactly 1", value=total, constraint="sum == 1"
        )
    return _from_mass(schema, mass)


def point_mass(schema: Schema, assignment: Assignment) -> JointTable:
    """Degenerate table putting probability 1 on one full assignment."""
    return make_table(schema, [(assignment, 1)])


def product_table(factors: Sequence[tuple[Variable, Sequence[Fraction | int | str]]]) -> JointTable:
    """Fully independent joint of the given marginals."""
    if not factors:
        raise TableValidationException("At least one factor is required", field="factors")
    first_var, first_dist = factors[0]
    table = _single(first_var, first_dist)
    for var, dist in factors[1:]:
        table = extend_independent(table, var, dist)
    return table


def _single(var: Variable, dist: Sequence[Fraction | int | str]) -> JointTable:
    probs = _check_dist(var, dist)
    return _from_mass(Schema((var,)), {(label,): p for label, p in zip(var.support, probs)})


def _check_dist(var: Variable, dist: Sequence[Fraction | int | str]) -> list[Fraction]:
    if len(dist) != len(var.support):
        raise TableValidationException(
            "Distribution length must match support",
            field=var.name,
            value=len(dist),
            constraint=f"len == {len(var.support)}",
        )
    probs = [as_rational(p) for p in dist]
    for label, p in zip(var.support, probs):
        if p < 0:
            raise NegativeProbabilityException(
                "Probability must be nonnegative", field=f"{var.name}={label}", value=p
            )
    total = sum(probs, Fraction(0))
    if total != 1:
        raise SumNotOneException(
            "Distribution must sum to exactly 1", field=var.name, value=total, constraint="sum == 1"
        )
    return probs


def probability(table: JointTable, assignment: Assignment) -> Fraction:
    """Exact probability of a (partial) assignment."""
    table.schema.check_assignment(assignment, full=False)
    positions = [(table.schema.index(name), label) for name, label in assignment.items()]
    return sum(
        (p for key, p in table.entries.items() if all(key[i] == label for i, label in positions)),
        Fraction(0),
    )


def marginal(table: JointTable, vars: Iterable[str]) -> JointTable:
    """
    Exact marginal over `vars` (kept in schema order).

    Raises:
        UnknownVariableException: A name is not in the schema
        TableValidationException: `vars` is empty
    """
    names = set(vars)
    if not names:
        raise TableValidationException("Marginal needs at least one variable", field="vars")
    sub = table.schema.restrict(names)
    if sub == table.schema:
        return table
    positions = table.positions(sub.names)
    mass: dict[Key, Fraction] = {}
    for key, p in table.entries.items():
        projected = tuple(key[i] for i in positions)
        mass[projected] = mass.get(projected, Fraction(0)) + p
    return _from_mass(sub, mass)


def condition(table: JointTable, on: Assignment) -> JointTable:
    """
    Exact conditional distribution of the remaining variables given `on`.

    Raises:
        UnknownVariableException / UnknownOutcomeException: Invalid assignment
        ZeroProbabilityEventException: P(on) = 0, the conditional is undefined
    """
    if not on:
        return table
    table.schema.check_assignment(on, full=False)
    fixed = [(table.schema.index(name), label) for name, label in on.items()]
    rest = Schema(tuple(var for var in table.schema.variables if var.name not in on))
    keep = table.positions(rest.names)
    mass: dict[Key, Fraction] = {}
    total = Fraction(0)
    for key, p in table.entries.items():
        if all(key[i] == label for i, label in fixed):
            projected = tuple(key[i] for i in keep)
            mass[projected] = mass.get(projected, Fraction(0)) + p
            total += p
    if total == 0:
        raise ZeroProbabilityEventException(
            "Conditioning event has probability zero", event=dict(on)
        )
    return _from_mass(rest, {key: p / total for key, p in mass.items()})


def numeric_label(var: str, label: str) -> Fraction:
    """Default value map: the label read as a rational number."""
    try:
        return as_rational(label)
    except ValueError as e:
        raise MissingValueException(
            "Label has no numeric value; supply a value map", field=var, value=label
        ) from e


def expectation(
    table: JointTable,
    var: str,
    value_map: Mapping[str, Fraction | int | str] | None = None,
) -> Fraction:
    """
    Exact expectation of value_map(var); labels are read as numbers by default.

    Raises:
        UnknownVariableException: `var` not in schema
        MissingValueException: value_map does not cover the support
    """
    support = table.schema.support(var)
    values: dict[str, Fraction] = {}
    for label in support:
        if value_map is None:
            values[label] = numeric_label(var, label)
        elif label in value_map:
            values[label] = as_rational(value_map[label])
        else:
            raise MissingValueException(
                "Value map does not cover support", field=var, value=label
            )
    i = table.schema.index(var)
    return sum((values[key[i]] * p for key, p in table.entries.items()), Fraction(0))


def extend_independent(
    table: JointTable,
    var: Variable | tuple[str, Sequence[str]],
    dist: Sequence[Fraction | int | str],
) -> JointTable:
    """
    Add a new variable independent of all existing ones.

    Raises:
        DuplicateVariableException: Name already used
        SumNotOneException / NegativeProbabilityException: Invalid `dist`
    """
    new_var = var if isinstance(var, Variable) else Variable(var[0], tuple(var[1]))
    if new_var.name in table.schema:
        raise DuplicateVariableException("Variable already exists", field=new_var.name)
    probs = _check_dist(new_var, dist)
    schema = Schema(table.schema.variables + (new_var,))
    mass = {
        key + (label,): p * q
        for key, p in table.entries.items()
        for label, q in zip(new_var.support, probs)
    }
    return _from_mass(schema, mass)


def push_forward_deterministic(
    table: JointTable,
    new_var: str,
    f: Callable[[dict[str, str]], str] | Mapping[Key, str],
    support: Sequence[str] | None = None,
) -> JointTable:
    """
    Add new_var = f(existing variables).

    Args:
        table: Source table
        new_var: Name of the derived variable
        f: Callable on assignment dicts, or a map from full keys (schema order) to labels
        support: Support order for new_var (default: sorted images of f)

    Raises:
        DuplicateVariableException: Name already used
        TableValidationException: f undefined on a positive-probability assignment
        UnknownOutcomeException: f produces a label outside `support`
    """
    if new_var in table.schema:
        raise DuplicateVariableException("Variable already exists", field=new_var)
    names = table.schema.names
    images: dict[Key, str] = {}
    for key in table.entries:
        if callable(f):
            label = f(dict(zip(names, key)))
        elif key in f:
            label = f[key]
        else:
            raise TableValidationException(
                "Function is not total on the table support", field=",".join(key)
            )
        images[key] = str(label)
    labels = tuple(support) if support is not None else tuple(sorted(set(images.values())))
    for label in images.values():
        if label not in labels:
            raise UnknownOutcomeException(
                "Image outside declared support", field=new_var, value=label
            )
    schema = Schema(table.schema.variables + (Variable(new_var, labels),))
    return _from_mass(schema, {key + (images[key],): p for key, p in table.entries.items()})


def rename_variables(table: JointTable, mapping: Mapping[str, str]) -> JointTable:
    """Rename variables; names absent from `mapping` are kept."""
    table.schema.require(mapping)
    schema = Schema(
        tuple(Variable(mapping.get(v.name, v.name), v.support) for v in table.schema.variables)
    )
    return JointTable(schema, table.entries)


def relabel_outcomes(table: JointTable, var: str, mapping: Mapping[str, str]) -> JointTable:
    """Apply a bijective relabelling to one variable's outcome labels."""
    i = table.schema.index(var)
    old = table.schema.variables[i]
    new_support = tuple(mapping.get(label, label) for label in old.support)
    variables = list(table.schema.variables)
    variables[i] = Variable(var, new_support)
    translate = dict(zip(old.support, new_support))
    mass = {key[:i] + (translate[key[i]],) + key[i + 1 :]: p for key, p in table.entries.items()}
    return JointTable(Schema(tuple(variables)), mass)
