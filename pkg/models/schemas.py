"""
Pydantic models for the engine's values, results and configuration.

All models are frozen: once built, a system, matrix or result never changes,
so values can be shared freely between worker processes.
State indices are 0-based inside these models; reports and files use 1-based
indices.
"""
from enum import Enum
from fractions import Fraction
from typing import Dict, Iterator, List, Optional, Tuple

from pydantic import BaseModel, BeforeValidator, ConfigDict, Field, model_validator
from typing_extensions import Annotated

from utils.rationals import format_rational, to_fraction

Rational = Annotated[Fraction, BeforeValidator(to_fraction)]
Matrix = Tuple[Tuple[Rational, ...], ...]
Pair = Tuple[int, int]

ZERO = Fraction(0)
ONE = Fraction(1)


class FrozenModel(BaseModel):
    """Base for immutable engine values."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)


def _check_square(values: Matrix, size: int, what: str) -> None:
    if len(values) != size:
        raise ValueError(f"{what} has {len(values)} rows, expected {size}")
    for index, row in enumerate(values):
        if len(row) != size:
            raise ValueError(f"{what} row {index + 1} has {len(row)} entries, expected {size}")


class StateKind(str, Enum):
    """Whether a state can move (row sum 1) or is stuck (row sum 0)."""
    LIVE = "live"
    STUCK = "stuck"


class PTS(FrozenModel):
    """Finite probabilistic transition system with a rational matrix pi."""
    n_states: int = Field(..., ge=1)
    labels: Optional[Tuple[str, ...]] = None
    pi: Matrix

    @model_validator(mode="after")
    def _check_shape(self) -> "PTS":
        _check_square(self.pi, self.n_states, "transition matrix")
        if self.labels is not None and len(self.labels) != self.n_states:
            raise ValueError(f"{len(self.labels)} labels given for {self.n_states} states")
        return self

    @classmethod
    def from_rows(cls, rows, labels=None) -> "PTS":
        return cls(n_states=len(rows), pi=rows, labels=labels)

    def row(self, i: int) -> Tuple[Fraction, ...]:
        return self.pi[i]

    def row_sum(self, i: int) -> Fraction:
        return sum(self.pi[i], ZERO)

    def is_live(self, i: int) -> bool:
        return self.row_sum(i) == ONE

    def successors(self, i: int) -> List[int]:
        return [j for j, p in enumerate(self.pi[i]) if p > 0]

    def name(self, i: int) -> str:
        return self.labels[i] if self.labels else f"s{i + 1}"


class DistanceMatrix(FrozenModel):
    """Square matrix of distances; pseudometric laws are checked by the validator service."""
    values: Matrix

    @model_validator(mode="after")
    def _check_shape(self) -> "DistanceMatrix":
        _check_square(self.values, len(self.values), "distance matrix")
        return self

    @property
    def size(self) -> int:
        return len(self.values)

    def __getitem__(self, key: Pair) -> Fraction:
        i, j = key
        return self.values[i][j]

    def pairs(self) -> Iterator[Pair]:
        """Upper-triangle pairs (i < j)."""
        for i in range(self.size):
            for j in range(i + 1, self.size):
                yield i, j

    @classmethod
    def top(cls, n: int) -> "DistanceMatrix":
        """All-zero matrix: the top element of the reversed order."""
        return cls(values=tuple(tuple(ZERO for _ in range(n)) for _ in range(n)))

    @classmethod
    def bottom(cls, n: int) -> "DistanceMatrix":
        """Discrete metric: 0 on the diagonal, 1 elsewhere."""
        return cls(values=tuple(tuple(ZERO if i == j else ONE for j in range(n)) for i in range(n)))

    @classmethod
    def from_pairs(cls, n: int, entries: Dict[Pair, Fraction]) -> "DistanceMatrix":
        """Symmetric matrix from unordered pair entries; missing pairs are 0."""
        rows = [[ZERO] * n for _ in range(n)]
        for (i, j), value in entries.items():
            if i != j:
                rows[i][j] = value
                rows[j][i] = value
        return cls(values=tuple(tuple(row) for row in rows))

    def with_entries(self, entries: Dict[Pair, Fraction]) -> "DistanceMatrix":
        rows = [list(row) for row in self.values]
        for (i, j), value in entries.items():
            rows[i][j] = value
            rows[j][i] = value
        return DistanceMatrix(values=tuple(tuple(row) for row in rows))

    def leq(self, other: "DistanceMatrix") -> bool:
        """Entrywise <=."""
        return all(
            a <= b
            for row_a, row_b in zip(self.values, other.values)
            for a, b in zip(row_a, row_b)
        )


class Coupling(FrozenModel):
    """
    Joint distribution with prescribed marginals.

    plan[r][c] is the mass moved between state r (row side) and state c
    (column side).
    """
    plan: Matrix
    row_marginal: Tuple[Rational, ...]
    col_marginal: Tuple[Rational, ...]

    @model_validator(mode="after")
    def _check_marginals(self) -> "Coupling":
        n = len(self.row_marginal)
        if len(self.col_marginal) != n:
            raise ValueError("marginals have different lengths")
        _check_square(self.plan, n, "coupling")
        for r, row in enumerate(self.plan):
            if any(v < 0 for v in row):
                raise ValueError(f"negative mass in coupling row {r + 1}")
            if sum(row, ZERO) != self.row_marginal[r]:
                raise ValueError(f"coupling row {r + 1} does not sum to its marginal")
        for c in range(n):
            if sum((self.plan[r][c] for r in range(n)), ZERO) != self.col_marginal[c]:
                raise ValueError(f"coupling column {c + 1} does not sum to its marginal")
        return self

    def cost(self, cost: Matrix) -> Fraction:
        return sum(
            (mass * cost[r][c]
             for r, row in enumerate(self.plan)
             for c, mass in enumerate(row) if mass),
            ZERO,
        )

    def support(self) -> List[Tuple[int, int, Fraction]]:
        return [
            (r, c, mass)
            for r, row in enumerate(self.plan)
            for c, mass in enumerate(row) if mass
        ]


class Violation(FrozenModel):
    """A single failed check. Indices are 1-based."""
    kind: str
    message: str
    indices: Tuple[int, ...] = ()
    value: Optional[Rational] = None


class ValidationReport(FrozenModel):
    """Outcome of a validator: violations are data, not exceptions."""
    violations: Tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations


class Partition(FrozenModel):
    """Disjoint, nonempty, covering blocks of state indices."""
    blocks: Tuple[Tuple[int, ...], ...]

    @model_validator(mode="after")
    def _check_blocks(self) -> "Partition":
        seen = set()
        for block in self.blocks:
            if not block:
                raise ValueError("empty block in partition")
            for state in block:
                if state in seen:
                    raise ValueError(f"state s{state + 1} appears in two blocks")
                seen.add(state)
        if seen != set(range(len(seen))):
            raise ValueError("partition does not cover states 1..N")
        return self

    @property
    def n_states(self) -> int:
        return sum(len(block) for block in self.blocks)

    @property
    def block_of(self) -> Tuple[int, ...]:
        lookup = [0] * self.n_states
        for index, block in enumerate(self.blocks):
            for state in block:
                lookup[state] = index
        return tuple(lookup)

    @classmethod
    def singletons(cls, n: int) -> "Partition":
        return cls(blocks=tuple((i,) for i in range(n)))


class QuotientResult(FrozenModel):
    """Quotient system over blocks plus the state-to-block projection."""
    quotient: PTS
    projection: Tuple[int, ...]
    partition: Partition


class TerminationVector(FrozenModel):
    """Probability of eventually reaching a stuck state, per state."""
    values: Tuple[Rational, ...]

    @model_validator(mode="after")
    def _check_range(self) -> "TerminationVector":
        for i, value in enumerate(self.values):
            if not ZERO <= value <= ONE:
                raise ValueError(f"termination probability of s{i + 1} outside [0,1]")
        return self

    def __getitem__(self, i: int) -> Fraction:
        return self.values[i]


class KnownDistances(FrozenModel):
    """Partial distance matrix: exactly known pairs (i < j); the diagonal is implicitly 0."""
    n_states: int
    values: Dict[Pair, Rational] = Field(default_factory=dict)

    @model_validator(mode="before")
    @classmethod
    def _normalise_keys(cls, data):
        if isinstance(data, dict) and "values" in data:
            data = dict(data)
            data["values"] = {
                (min(i, j), max(i, j)): value
                for (i, j), value in dict(data["values"]).items() if i != j
            }
        return data

    def get(self, i: int, j: int) -> Optional[Fraction]:
        if i == j:
            return ZERO
        return self.values.get((min(i, j), max(i, j)))

    def is_known(self, i: int, j: int) -> bool:
        return self.get(i, j) is not None

    def unknown_pairs(self) -> List[Pair]:
        return [
            (i, j)
            for i in range(self.n_states)
            for j in range(i + 1, self.n_states)
            if (i, j) not in self.values
        ]


class Relation(str, Enum):
    LE = "<="
    EQ = "="
    GE = ">="


class Sense(str, Enum):
    MAX = "max"
    MIN = "min"


class Constraint(FrozenModel):
    coefficients: Tuple[Rational, ...]
    relation: Relation
    rhs: Rational


class VariableBound(FrozenModel):
    lower: Rational = ZERO
    upper: Optional[Rational] = None


class LinearProgram(FrozenModel):
    """Objective plus constraint rows over exact rationals."""
    objective: Tuple[Rational, ...]
    sense: Sense = Sense.MAX
    constraints: Tuple[Constraint, ...] = ()
    bounds: Optional[Tuple[VariableBound, ...]] = None

    @property
    def n_variables(self) -> int:
        return len(self.objective)


class LpStatus(str, Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


class LpOutcome(FrozenModel):
    status: LpStatus
    value: Optional[Rational] = None
    solution: Optional[Tuple[Rational, ...]] = None


class DeltaCase(str, Enum):
    BOTH_LIVE = "both_live"
    BOTH_STUCK = "both_stuck"
    MIXED = "mixed"


class DeltaValue(FrozenModel):
    """One entry of the functional, with the witness that attains it."""
    pair: Pair
    value: Rational
    case: DeltaCase
    coupling: Optional[Coupling] = None
    witness: Optional[Tuple[Rational, ...]] = None


class PostFixedViolation(FrozenModel):
    pair: Pair
    current: Rational
    image: Rational

    @property
    def excess(self) -> Fraction:
        return self.image - self.current


class PostFixedReport(FrozenModel):
    violations: Tuple[PostFixedViolation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations


class CertificateMethod(str, Enum):
    EXACT = "exact_solve"
    INFLATION = "inflation"
    DISCRETE = "discrete"


class BoundsResult(FrozenModel):
    """Certified enclosure lower <= d <= upper of the behavioural distances."""
    lower: DistanceMatrix
    upper: DistanceMatrix
    exact_pairs: Tuple[Pair, ...]
    certificate: DistanceMatrix
    iterations: int
    gap: Rational
    certified: bool
    method: CertificateMethod
    delta: Rational
    epsilon: Rational
    quotiented: bool = False
    notes: Tuple[str, ...] = ()


class Valuation(FrozenModel):
    """Real-valued interpretation of one formula at every state."""
    values: Tuple[Rational, ...]

    def __getitem__(self, i: int) -> Fraction:
        return self.values[i]


class EmitFormat(str, Enum):
    SMT2 = "smt2"
    MATHEMATICA = "mathematica"


class OracleKind(str, Enum):
    INTERNAL = "internal"
    EXTERNAL = "external"


class OracleConfig(FrozenModel):
    """How sentences get decided: internal bounds or an external command."""
    kind: OracleKind = OracleKind.INTERNAL
    command: Optional[str] = None
    timeout: float = Field(default=60.0, gt=0)
    tmp_dir: Optional[str] = None
    format: EmitFormat = EmitFormat.SMT2

    @classmethod
    def parse(cls, value: str, **kwargs) -> "OracleConfig":
        """Build from the CLI form `internal` or `cmd:<template>`."""
        if value == "internal":
            return cls(kind=OracleKind.INTERNAL, **kwargs)
        if value.startswith("cmd:") and value[4:].strip():
            return cls(kind=OracleKind.EXTERNAL, command=value[4:].strip(), **kwargs)
        raise ValueError(f"oracle must be 'internal' or 'cmd:<template>', got {value!r}")


class DecisionOutcome(str, Enum):
    TRUE = "true"
    FALSE = "false"
    UNKNOWN = "unknown"


class Provenance(str, Enum):
    INTERNAL = "internal"
    EXTERNAL = "external"


class Decision(FrozenModel):
    outcome: DecisionOutcome
    provenance: Provenance
    diagnostics: str = ""
    verdict_line: Optional[str] = None
    failed: bool = False


class IntervalMethod(str, Enum):
    BISECTION = "bisection"
    BOUNDS = "bounds"


class BisectionStep(FrozenModel):
    bound: Rational
    outcome: DecisionOutcome


class PairInterval(FrozenModel):
    """Enclosure [lower, upper] of one distance found by bisection."""
    pair: Pair
    lower: Rational
    upper: Rational
    method: IntervalMethod
    steps: Tuple[BisectionStep, ...] = ()
    diagnostics: str = ""


class Report(FrozenModel):
    human: str
    machine: str


class OutputFormat(str, Enum):
    HUMAN = "human"
    JSON = "json"


class CliConfig(FrozenModel):
    """Validated command-line configuration."""
    subcommand: str
    input_path: str
    delta: Rational = ONE
    epsilon: Rational = Fraction(1, 1000)
    output_format: OutputFormat = OutputFormat.HUMAN
    oracle: OracleConfig = Field(default_factory=OracleConfig)
    budget: Optional[int] = Field(default=None, ge=1)
    workers: int = Field(default=1, ge=1)
    precision: int = Field(default=6, ge=0, le=60)
    use_quotient: bool = True

    @model_validator(mode="after")
    def _check_ranges(self) -> "CliConfig":
        if not ZERO < self.delta <= ONE:
            raise ValueError(f"delta must lie in (0,1], got {format_rational(self.delta)}")
        if self.epsilon <= ZERO:
            raise ValueError(f"epsilon must be positive, got {format_rational(self.epsilon)}")
        return self
