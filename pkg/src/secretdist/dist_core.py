"""Exact joint distributions over named discrete variables with party ownership.

Probabilities are :class:`fractions.Fraction` throughout. A distribution
stores a dense table over the full product alphabet, so ``prob`` never has to
guess about absent outcomes and equality is plain table equality.
"""

from __future__ import annotations

import itertools
from collections.abc import Callable, Iterable, Mapping, Sequence
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

from .errors import (
    ArityMismatch,
    DuplicateOutcome,
    EmptySelection,
    NegativeProbability,
    NotNormalized,
    OwnershipViolation,
    PartialFunction,
    UnknownSymbol,
    UnknownVariable,
    ZeroProbabilityEvent,
)

Outcome = tuple[str, ...]


class Party(str, Enum):
    ALICE = "alice"
    BOB = "bob"
    EVE = "eve"
    CHARLIE = "charlie"

    @classmethod
    def parse(cls, value: Party | str) -> Party:
        if isinstance(value, Party):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(f"unknown party {value!r}") from None


@dataclass(frozen=True)
class VariableDef:
    name: str
    alphabet: tuple[str, ...]
    owner: Party

    def __post_init__(self):
        if not self.name.isidentifier():
            raise ValueError(f"variable name {self.name!r} is not an identifier")
        object.__setattr__(self, "alphabet", tuple(str(s) for s in self.alphabet))
        object.__setattr__(self, "owner", Party.parse(self.owner))
        if not self.alphabet:
            raise ValueError(f"variable {self.name}: empty alphabet")
        if len(set(self.alphabet)) != len(self.alphabet):
            raise ValueError(f"variable {self.name}: repeated symbols in alphabet")

    def with_owner(self, owner: Party) -> VariableDef:
        return VariableDef(self.name, self.alphabet, owner)


def as_fraction(p) -> Fraction:
    """Coerce ``p`` to a Fraction; floats are rejected to keep tables exact."""
    if isinstance(p, Fraction):
        return p
    if isinstance(p, int):
        return Fraction(p)
    if isinstance(p, str):
        return parse_rational(p)
    raise TypeError(f"probability must be exact (Fraction, int or 'n/d'), got {type(p).__name__}")


def parse_rational(text: str) -> Fraction:
    text = text.strip()
    num, sep, den = text.partition("/")
    try:
        if not sep:
            return Fraction(int(num))
        return Fraction(int(num), int(den))
    except (ValueError, ZeroDivisionError):
        raise ValueError(f"not a rational string: {text!r}") from None


def format_rational(p: Fraction) -> str:
    return str(p.numerator) if p.denominator == 1 else f"{p.numerator}/{p.denominator}"


class JointDistribution:
    """Immutable exact probability table over ordered variables.

    Build one with :func:`build_distribution`; the constructor trusts its
    arguments and is meant for internal use by operations that already
    preserve the invariants.
    """

    __slots__ = ("_variables", "_table", "_index")

    def __init__(self, variables: Sequence[VariableDef], table: Mapping[Outcome, Fraction]):
        self._variables = tuple(variables)
        self._index = {v.name: i for i, v in enumerate(self._variables)}
        dense = {}
        for outcome in itertools.product(*(v.alphabet for v in self._variables)):
            dense[outcome] = table.get(outcome, Fraction(0))
        self._table = dense

    @property
    def variables(self) -> tuple[VariableDef, ...]:
        return self._variables

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self._variables)

    def variable(self, name: str) -> VariableDef:
        return self._variables[self.position(name)]

    def position(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise UnknownVariable(f"no variable named {name!r} (have {', '.join(self.names) or 'none'})") from None

    def owner(self, name: str) -> Party:
        return self.variable(name).owner

    def owned_by(self, party: Party | str) -> tuple[str, ...]:
        party = Party.parse(party)
        return tuple(v.name for v in self._variables if v.owner is party)

    def prob(self, outcome: Sequence[str]) -> Fraction:
        return self._table.get(tuple(outcome), Fraction(0))

    def items(self) -> Iterable[tuple[Outcome, Fraction]]:
        return self._table.items()

    def support(self) -> list[tuple[Outcome, Fraction]]:
        return [(o, p) for o, p in self._table.items() if p]

    def total(self) -> Fraction:
        return sum(self._table.values(), Fraction(0))

    def __eq__(self, other):
        if not isinstance(other, JointDistribution):
            return NotImplemented
        return self._variables == other._variables and self._table == other._table

    def __hash__(self):
        return hash((self._variables, tuple(self.support())))

    def same_table(self, other: JointDistribution) -> bool:
        """Equality of names, alphabets and probabilities, ignoring ownership."""
        mine = [(v.name, v.alphabet) for v in self._variables]
        theirs = [(v.name, v.alphabet) for v in other._variables]
        return mine == theirs and self._table == other._table

    def __repr__(self):
        rows = ", ".join(f"{','.join(o)}:{format_rational(p)}" for o, p in self.support())
        return f"JointDistribution({', '.join(self.names)} | {rows})"


def build_distribution(variables: Sequence[VariableDef], entries: Iterable[tuple[Sequence[str], object]]) -> JointDistribution:
    """Validate ``entries`` against ``variables`` and return the distribution.

    Outcomes not listed get probability zero. Raises one of the
    :mod:`secretdist.errors` types for negative, unnormalized, malformed or
    duplicated rows.
    """
    variables = tuple(variables)
    names = [v.name for v in variables]
    if len(set(names)) != len(names):
        raise ValueError(f"duplicate variable names in {names}")
    table: dict[Outcome, Fraction] = {}
    for outcome, p in entries:
        outcome = tuple(str(s) for s in outcome)
        if len(outcome) != len(variables):
            raise ArityMismatch(f"outcome {outcome} has {len(outcome)} symbols, expected {len(variables)}")
        for var, sym in zip(variables, outcome):
            if sym not in var.alphabet:
                raise UnknownSymbol(f"symbol {sym!r} not in alphabet of {var.name} {list(var.alphabet)}")
        if outcome in table:
            raise DuplicateOutcome(f"outcome {outcome} listed twice")
        p = as_fraction(p)
        if p < 0:
            raise NegativeProbability(f"outcome {outcome} has probability {p}")
        table[outcome] = p
    total = sum(table.values(), Fraction(0))
    if total != 1:
        raise NotNormalized(total)
    return JointDistribution(variables, table)


# Rows of the three protocol tables; Eve's column is part of the published data.
_SIXTH = Fraction(1, 6)
_STAGE_ROWS = {
    "initial": [
        ("0", "0", "0", "e0"),
        ("0", "1", "0", "e01"),
        ("1", "0", "0", "e10"),
        ("1", "1", "0", "e0"),
        ("0", "0", "1", "f0"),
        ("1", "1", "1", "f1"),
    ],
    "after_alice_cnot": [
        ("0", "0", "0", "e0"),
        ("0", "1", "0", "e01"),
        ("1", "0", "1", "e10"),
        ("1", "1", "1", "e0"),
        ("0", "0", "1", "f0"),
        ("1", "1", "0", "f1"),
    ],
    "final": [
        ("0", "0", "0", "e0"),
        ("0", "1", "1", "e01"),
        ("1", "0", "1", "e10"),
        ("1", "1", "0", "e0"),
        ("0", "0", "1", "f0"),
        ("1", "1", "1", "f1"),
    ],
}
STAGES = tuple(_STAGE_ROWS)
EVE_ALPHABET = ("e0", "e01", "e10", "f0", "f1")


def paper_distribution(stage: str) -> JointDistribution:
    """The four-variable table (A, B, C, E) at ``stage``.

    ``stage`` is ``"initial"``, ``"after_alice_cnot"`` or ``"final"``. C is
    Alice's until the final stage, when it has been sent to Bob.
    """
    if stage not in _STAGE_ROWS:
        raise ValueError(f"stage must be one of {STAGES}, got {stage!r}")
    c_owner = Party.BOB if stage == "final" else Party.ALICE
    variables = [
        VariableDef("A", ("0", "1"), Party.ALICE),
        VariableDef("B", ("0", "1"), Party.BOB),
        VariableDef("C", ("0", "1"), c_owner),
        VariableDef("E", EVE_ALPHABET, Party.EVE),
    ]
    return build_distribution(variables, [(row, _SIXTH) for row in _STAGE_ROWS[stage]])


def _check_names(dist: JointDistribution, names: Iterable[str]) -> list[str]:
    names = list(names)
    for n in names:
        dist.position(n)
    return names


def marginal(dist: JointDistribution, keep: Iterable[str]) -> JointDistribution:
    """Exact marginal on ``keep``; variables stay in their original order."""
    keep = set(_check_names(dist, keep))
    if not keep:
        raise EmptySelection("marginal needs at least one variable")
    positions = [i for i, v in enumerate(dist.variables) if v.name in keep]
    table: dict[Outcome, Fraction] = {}
    for outcome, p in dist.support():
        key = tuple(outcome[i] for i in positions)
        table[key] = table.get(key, Fraction(0)) + p
    return JointDistribution([dist.variables[i] for i in positions], table)


def condition(dist: JointDistribution, var: str, symbol: str) -> tuple[JointDistribution, Fraction]:
    """Distribution of the other variables given ``var == symbol``, and P(var == symbol)."""
    pos = dist.position(var)
    if symbol not in dist.variables[pos].alphabet:
        raise UnknownSymbol(f"{symbol!r} not in alphabet of {var}")
    event = Fraction(0)
    kept: dict[Outcome, Fraction] = {}
    for outcome, p in dist.support():
        if outcome[pos] == symbol:
            event += p
            key = outcome[:pos] + outcome[pos + 1:]
            kept[key] = kept.get(key, Fraction(0)) + p
    if event == 0:
        raise ZeroProbabilityEvent(f"P({var}={symbol}) = 0")
    rest = [v for i, v in enumerate(dist.variables) if i != pos]
    return JointDistribution(rest, {k: p / event for k, p in kept.items()}), event


def _require_owner(dist: JointDistribution, party: Party, names: Iterable[str]):
    for n in names:
        owner = dist.owner(n)
        if owner is not party:
            raise OwnershipViolation(f"{n} is held by {owner.value}, not {party.value}")


def apply_local_function(
    dist: JointDistribution,
    party: Party | str,
    target: str,
    inputs: Sequence[str],
    fn: Mapping[tuple[str, ...], str] | Callable[..., str],
) -> JointDistribution:
    """Overwrite ``target`` with ``fn(inputs)``, a deterministic local action by ``party``.

    ``fn`` is either a mapping from input-symbol tuples to a target symbol or
    a callable taking the input symbols positionally. Either way it must be
    total on the product of the input alphabets.
    """
    party = Party.parse(party)
    inputs = list(inputs)
    _check_names(dist, [target, *inputs])
    _require_owner(dist, party, [target, *inputs])
    target_var = dist.variable(target)
    lookup: dict[tuple[str, ...], str] = {}
    for args in itertools.product(*(dist.variable(n).alphabet for n in inputs)):
        try:
            out = fn[args] if isinstance(fn, Mapping) else fn(*args)
        except KeyError:
            raise PartialFunction(f"function undefined on {dict(zip(inputs, args))}") from None
        if out not in target_var.alphabet:
            raise PartialFunction(f"function maps {args} to {out!r}, outside the alphabet of {target}")
        lookup[args] = out
    tpos = dist.position(target)
    ipos = [dist.position(n) for n in inputs]
    table: dict[Outcome, Fraction] = {}
    for outcome, p in dist.support():
        new = list(outcome)
        new[tpos] = lookup[tuple(outcome[i] for i in ipos)]
        key = tuple(new)
        table[key] = table.get(key, Fraction(0)) + p
    return JointDistribution(dist.variables, table)


def transfer_ownership(dist: JointDistribution, var: str, sender: Party | str, receiver: Party | str) -> JointDistribution:
    sender, receiver = Party.parse(sender), Party.parse(receiver)
    _require_owner(dist, sender, [var])
    variables = [v.with_owner(receiver) if v.name == var else v for v in dist.variables]
    return JointDistribution(variables, dict(dist.support()))
