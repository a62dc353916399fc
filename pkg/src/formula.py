"""
Formula core: literals, clauses, CNF formulae and the literal weight table.

Literals use the DIMACS convention: variable ``v`` (1-based) appears as ``v``
when positive and ``-v`` when negative. Internal per-literal arrays are indexed
by ``lit_index(lit)``, which maps ``v`` to ``2v`` and ``-v`` to ``2v + 1``.

Instance file format::

    c comment
    p cnf <num_vars> <num_clauses>
    1 -2 0
    w 1 0.6
    w -1 0.4

Weight lines may appear anywhere after the header. Literals without a weight
line default to 1.0, independently per polarity.
"""

import io
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, TextIO, Tuple, Union

import numpy as np

try:
    from .constants import DefaultValues
    from .exceptions import (DuplicateWeight, IncompleteAssignment,
                             InstanceFormatError, InvalidWeight)
except ImportError:
    from constants import DefaultValues
    from exceptions import (DuplicateWeight, IncompleteAssignment,
                            InstanceFormatError, InvalidWeight)

logger = logging.getLogger(__name__)

Literal = int
Clause = Tuple[Literal, ...]


def var_of(lit: Literal) -> int:
    """Variable index of a literal."""
    return lit if lit > 0 else -lit


def negate(lit: Literal) -> Literal:
    return -lit


def lit_index(lit: Literal) -> int:
    """Array slot of a literal: 2v for v, 2v + 1 for -v."""
    return 2 * lit if lit > 0 else 1 - 2 * lit


def normalize_clause(lits: Iterable[Literal]) -> Optional[Clause]:
    """
    Remove duplicate literals, keeping first occurrences in order.

    Returns:
        The cleaned clause, or None if the clause is a tautology.
    """
    seen = set()
    cleaned: List[Literal] = []
    for lit in lits:
        if -lit in seen:
            return None
        if lit not in seen:
            seen.add(lit)
            cleaned.append(lit)
    return tuple(cleaned)


@dataclass(frozen=True)
class CnfFormula:
    """A CNF formula over variables 1..num_vars."""

    num_vars: int
    clauses: Tuple[Clause, ...] = ()

    def __post_init__(self):
        if self.num_vars < 0:
            raise InstanceFormatError(f"Negative variable count: {self.num_vars}")
        for clause in self.clauses:
            for lit in clause:
                if lit == 0 or var_of(lit) > self.num_vars:
                    raise InstanceFormatError(
                        f"Literal {lit} outside variable range 1..{self.num_vars}")

    @classmethod
    def build(cls, num_vars: int, clauses: Iterable[Iterable[Literal]]) -> "CnfFormula":
        """Create a formula with tautologies and duplicate literals removed."""
        kept = []
        for clause in clauses:
            normalized = normalize_clause(clause)
            if normalized is not None:
                kept.append(normalized)
        return cls(num_vars, tuple(kept))

    @property
    def num_clauses(self) -> int:
        return len(self.clauses)

    def with_clauses(self, extra: Iterable[Iterable[Literal]]) -> "CnfFormula":
        """Return a copy of the formula with extra clauses appended."""
        return CnfFormula.build(self.num_vars, list(self.clauses) + [list(c) for c in extra])

    def is_satisfied_by(self, model: Sequence[Literal]) -> bool:
        """Evaluate the formula clause by clause under a total assignment."""
        true_lits = set(model)
        return all(any(lit in true_lits for lit in clause) for clause in self.clauses)


@dataclass
class WeightTable:
    """
    Literal weight function w: L -> R>0 with cached best(A) = max(w(A), w(-A)).

    Only explicitly declared weights are stored as fields; the dense NumPy
    arrays and the per-literal lists used by the solver hot loops are derived
    in __post_init__.
    """

    num_vars: int
    declared: Dict[Literal, float] = field(default_factory=dict)
    declared_text: Dict[Literal, str] = field(default_factory=dict, compare=False)
    log_domain: bool = True

    def __post_init__(self):
        positive = np.full(self.num_vars + 1, DefaultValues.DEFAULT_WEIGHT)
        negative = np.full(self.num_vars + 1, DefaultValues.DEFAULT_WEIGHT)
        for lit, weight in self.declared.items():
            if lit == 0 or var_of(lit) > self.num_vars:
                raise InstanceFormatError(
                    f"Weight declared for literal {lit} outside variable range 1..{self.num_vars}")
            if not math.isfinite(weight) or weight <= 0.0:
                raise InvalidWeight(f"Weight of literal {lit} must be a positive finite real, got {weight}")
            if lit > 0:
                positive[lit] = weight
            else:
                negative[-lit] = weight

        self.positive = positive
        self.negative = negative
        self.best = np.maximum(positive, negative)
        self.log_positive = np.log(positive)
        self.log_negative = np.log(negative)
        self.log_best = np.log(self.best)

        # Interleaved per-literal views indexed by lit_index
        self.literal_weights: List[float] = np.column_stack([positive, negative]).ravel().tolist()
        self.literal_log_weights: List[float] = np.column_stack(
            [self.log_positive, self.log_negative]).ravel().tolist()
        self.best_weights: List[float] = self.best.tolist()
        self.log_best_weights: List[float] = self.log_best.tolist()

    @classmethod
    def unit(cls, num_vars: int, log_domain: bool = True) -> "WeightTable":
        """All literals at weight 1.0 (plain AllSAT)."""
        return cls(num_vars, log_domain=log_domain)

    @classmethod
    def from_pairs(cls, pairs: Sequence[Tuple[float, float]], log_domain: bool = True) -> "WeightTable":
        """Build a table from (w(A), w(-A)) pairs for variables 1..len(pairs)."""
        declared = {}
        for var, (pos, neg) in enumerate(pairs, start=1):
            declared[var] = float(pos)
            declared[-var] = float(neg)
        return cls(len(pairs), declared, {lit: repr(w) for lit, w in declared.items()}, log_domain)

    def with_log_domain(self, log_domain: bool) -> "WeightTable":
        return WeightTable(self.num_vars, dict(self.declared), dict(self.declared_text), log_domain)

    def weight(self, lit: Literal) -> float:
        return self.literal_weights[lit_index(lit)]

    def log_weight(self, lit: Literal) -> float:
        return self.literal_log_weights[lit_index(lit)]

    def best_of(self, var: int) -> float:
        return self.best_weights[var]

    def log_best_of(self, var: int) -> float:
        return self.log_best_weights[var]

    def has_equal_polarities(self, var: int) -> bool:
        """True iff both polarities of var carry bitwise-equal weights."""
        return bool(self.positive[var] == self.negative[var])


def model_weight(table: WeightTable, model: Sequence[Literal], log_domain: Optional[bool] = None) -> float:
    """
    Compute w(model), the product of the weights of its literals.

    In log-domain mode the product is evaluated as an exactly rounded sum of
    logs and exponentiated at the boundary.

    Raises:
        IncompleteAssignment: if the model does not assign every variable once.
    """
    if log_domain is None:
        log_domain = table.log_domain
    _check_total(table.num_vars, model)
    if log_domain:
        return math.exp(model_log_weight(table, model))
    weights = table.literal_weights
    return math.prod(weights[lit_index(lit)] for lit in sorted(model, key=var_of))


def model_log_weight(table: WeightTable, model: Sequence[Literal]) -> float:
    """Natural log of w(model)."""
    _check_total(table.num_vars, model)
    log_weights = table.literal_log_weights
    return math.fsum(log_weights[lit_index(lit)] for lit in model)


def _check_total(num_vars: int, model: Sequence[Literal]) -> None:
    assigned = {var_of(lit) for lit in model}
    if len(model) != num_vars or len(assigned) != num_vars or (
            assigned and (min(assigned) < 1 or max(assigned) > num_vars)):
        raise IncompleteAssignment(
            f"Model assigns {len(assigned)} distinct variables, expected all {num_vars}")


# =========================================================================
# INSTANCE FILE FORMAT
# =========================================================================

def parse_instance(text: Union[str, TextIO], log_domain: bool = True) -> Tuple[CnfFormula, WeightTable]:
    """
    Parse a DIMACS CNF stream with optional `w <lit> <weight>` lines.

    Args:
        text: Instance text or a readable text stream
        log_domain: Internal weight representation of the returned table

    Returns:
        The validated formula and its weight table

    Raises:
        InstanceFormatError: malformed header, clause data before the header,
            non-integer tokens or literals outside 1..num_vars
        InvalidWeight: a non-positive, non-finite or unparsable weight
        DuplicateWeight: a second declaration for the same literal
    """
    stream = io.StringIO(text) if isinstance(text, str) else text
    num_vars: Optional[int] = None
    declared_clauses: Optional[int] = None
    clauses: List[List[Literal]] = []
    current: List[Literal] = []
    declared: Dict[Literal, float] = {}
    declared_text: Dict[Literal, str] = {}

    for line_number, raw in enumerate(stream, start=1):
        line = raw.strip()
        if not line or line.startswith('c') or line.startswith('%'):
            continue

        if line.startswith('p'):
            if num_vars is not None:
                raise InstanceFormatError("Duplicate header", line_number)
            num_vars, declared_clauses = _parse_header(line, line_number)
            continue

        if num_vars is None:
            raise InstanceFormatError(f'Expected header "p cnf <vars> <clauses>", got: "{line}"', line_number)

        if line.startswith('w'):
            lit, weight_text, weight = _parse_weight_line(line, line_number, num_vars)
            if lit in declared:
                raise DuplicateWeight(f"Literal {lit} already has weight {declared_text[lit]}", line_number)
            declared[lit] = weight
            declared_text[lit] = weight_text
            continue

        for token in line.split():
            try:
                lit = int(token)
            except ValueError:
                raise InstanceFormatError(f'Invalid literal "{token}"', line_number) from None
            if lit == 0:
                clauses.append(current)
                current = []
            elif abs(lit) > num_vars:
                raise InstanceFormatError(f"Literal {lit} exceeds declared variable count {num_vars}", line_number)
            else:
                current.append(lit)

    if num_vars is None:
        raise InstanceFormatError("Missing header")
    if current:
        clauses.append(current)

    formula = CnfFormula.build(num_vars, clauses)
    if declared_clauses != len(clauses):
        logger.warning(f"Header declares {declared_clauses} clauses but the file contains {len(clauses)}")
    dropped = len(clauses) - formula.num_clauses
    if dropped:
        logger.debug(f"Removed {dropped} tautological clauses")

    return formula, WeightTable(num_vars, declared, declared_text, log_domain)


def _parse_header(line: str, line_number: int) -> Tuple[int, int]:
    parts = line.split()
    if len(parts) != 4 or parts[0] != 'p' or parts[1] != 'cnf':
        raise InstanceFormatError(f'Malformed header: "{line}"', line_number)
    try:
        num_vars, num_clauses = int(parts[2]), int(parts[3])
    except ValueError:
        raise InstanceFormatError(f'Malformed header: "{line}"', line_number) from None
    if num_vars < 0 or num_clauses < 0:
        raise InstanceFormatError(f'Negative count in header: "{line}"', line_number)
    return num_vars, num_clauses


def _parse_weight_line(line: str, line_number: int, num_vars: int) -> Tuple[Literal, str, float]:
    parts = line.split()
    if len(parts) != 3 or parts[0] != 'w':
        raise InstanceFormatError(f'Malformed weight line: "{line}"', line_number)
    try:
        lit = int(parts[1])
    except ValueError:
        raise InstanceFormatError(f'Invalid literal "{parts[1]}"', line_number) from None
    if lit == 0 or abs(lit) > num_vars:
        raise InstanceFormatError(f"Weight literal {lit} outside variable range 1..{num_vars}", line_number)
    try:
        weight = float(parts[2])
    except ValueError:
        raise InvalidWeight(f'Unparsable weight "{parts[2]}"', line_number) from None
    if not math.isfinite(weight) or weight <= 0.0:
        raise InvalidWeight(f"Weight of literal {lit} must be positive, got {parts[2]}", line_number)
    return lit, parts[2], weight


def read_instance(path: str, log_domain: bool = True) -> Tuple[CnfFormula, WeightTable]:
    """Parse an instance file from disk."""
    logger.info(f"Reading instance {path}")
    with open(path, 'r') as f:
        return parse_instance(f, log_domain)


def serialize_instance(formula: CnfFormula, table: WeightTable, comments: Sequence[str] = ()) -> str:
    """
    Write a formula and its declared weights in the instance file format.

    Weight text is reproduced exactly as it was parsed; weights without
    recorded text are written with repr(), which round-trips doubles.
    """
    lines = [f"c {comment}" for comment in comments]
    lines.append(f"p cnf {formula.num_vars} {formula.num_clauses}")
    lines.extend(" ".join(str(lit) for lit in clause) + " 0" for clause in formula.clauses)
    for lit in sorted(table.declared, key=lambda l: (var_of(l), l < 0)):
        text = table.declared_text.get(lit, repr(table.declared[lit]))
        lines.append(f"w {lit} {text}")
    return "\n".join(lines) + "\n"


def write_instance(path: str, formula: CnfFormula, table: WeightTable, comments: Sequence[str] = ()) -> None:
    with open(path, 'w') as f:
        f.write(serialize_instance(formula, table, comments))
