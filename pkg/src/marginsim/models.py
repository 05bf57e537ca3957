"""Domain models for marginsim.

All public models use Pydantic v2 for validation and serialization.
Candidate ordinals are 1-based inside the library, so candidate ``i``
is ``c_i``. Exported formats (coordinate arrays, bit strings) are laid
out in lexicographic pair order ``(1,2), (1,3), ..., (l-1,l)`` and are
0-based by position.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from enum import Enum
from typing import TYPE_CHECKING, Any

from pydantic import BaseModel, Field, field_validator, model_validator

from marginsim.config import (
    DEFAULT_SAMPLES,
    DEFAULT_SEED,
    MAX_CANDIDATES,
    MIN_CANDIDATES,
)

if TYPE_CHECKING:
    import numpy as np
    from numpy.typing import NDArray

# ---------------------------------------------------------------------------
# Errors
# ---------------------------------------------------------------------------


class MarginsimError(Exception):
    """Base class for all marginsim errors."""


class DomainError(MarginsimError, ValueError):
    """Raised when an input violates an operation's precondition."""


class TieError(DomainError):
    """Raised when a margin is zero or two absolute margins coincide."""


class UnsupportedSizeError(MarginsimError):
    """Raised when a request exceeds a factorial or enumeration budget."""


def check_ell(ell: int) -> int:
    """Validate a candidate count and return it.

    Raises:
        DomainError: If ``ell`` is outside ``[3, 64]``.
    """
    if not MIN_CANDIDATES <= ell <= MAX_CANDIDATES:
        msg = (
            f"Candidate count must be in [{MIN_CANDIDATES}, {MAX_CANDIDATES}], "
            f"got {ell}"
        )
        raise DomainError(msg)
    return ell


def num_edges(ell: int) -> int:
    """Number of candidate pairs, ``l(l-1)/2``."""
    return ell * (ell - 1) // 2


# ---------------------------------------------------------------------------
# Edge space
# ---------------------------------------------------------------------------


class EdgeVector(BaseModel):
    """A real labeling of the oriented edges of the complete graph K_l.

    ``coords[flat(i, j)]`` holds ``x_(i,j)`` for ``i < j``. The reverse
    orientation is never stored: ``x_(j,i) = -x_(i,j)`` is applied by
    :meth:`get`.

    Attributes:
        ell: Number of candidates.
        coords: One value per pair in lexicographic order.
    """

    ell: int
    coords: tuple[float, ...]

    model_config = {"frozen": True}

    @field_validator("ell")
    @classmethod
    def _valid_ell(cls, v: int) -> int:
        return check_ell(v)

    @model_validator(mode="after")
    def _valid_coords(self) -> EdgeVector:
        expected = num_edges(self.ell)
        if len(self.coords) != expected:
            msg = (
                f"Expected {expected} coordinates for ell={self.ell}, "
                f"got {len(self.coords)}"
            )
            raise ValueError(msg)
        if not all(math.isfinite(c) for c in self.coords):
            msg = "EdgeVector coordinates must be finite"
            raise ValueError(msg)
        return self

    @classmethod
    def from_array(cls, ell: int, values: Sequence[float] | NDArray[Any]) -> EdgeVector:
        """Build from any flat sequence or 1-D array of coordinates."""
        import numpy as np

        arr = np.asarray(values, dtype=np.float64).reshape(-1)
        return cls(ell=ell, coords=tuple(arr.tolist()))

    @classmethod
    def zeros(cls, ell: int) -> EdgeVector:
        """The zero labeling."""
        return cls(ell=ell, coords=(0.0,) * num_edges(ell))

    @classmethod
    def from_edges(cls, ell: int, edges: dict[tuple[int, int], float]) -> EdgeVector:
        """Build from ``{(i, j): value}`` with any orientation.

        >>> EdgeVector.from_edges(3, {(2, 1): 1.0}).coords
        (-1.0, 0.0, 0.0)
        """
        from marginsim.edge_space import edge_index

        coords = [0.0] * num_edges(check_ell(ell))
        for (i, j), value in edges.items():
            flat, sign = edge_index(i, j, ell)
            coords[flat] += sign * value
        return cls(ell=ell, coords=tuple(coords))

    def get(self, i: int, j: int) -> float:
        """Value of the oriented edge ``i -> j`` under the sign convention."""
        from marginsim.edge_space import edge_index

        flat, sign = edge_index(i, j, self.ell)
        return sign * self.coords[flat]

    def to_array(self) -> NDArray[np.float64]:
        """Coordinates as a fresh float64 array."""
        import numpy as np

        return np.array(self.coords, dtype=np.float64)

    def dot(self, other: EdgeVector) -> float:
        """Standard inner product, edges as an orthonormal basis."""
        self._same_space(other)
        return math.fsum(a * b for a, b in zip(self.coords, other.coords))

    def norm_sq(self) -> float:
        """Squared Euclidean norm."""
        return math.fsum(c * c for c in self.coords)

    def scale(self, factor: float) -> EdgeVector:
        """Multiply every coordinate by ``factor``."""
        return EdgeVector(ell=self.ell, coords=tuple(factor * c for c in self.coords))

    def __add__(self, other: EdgeVector) -> EdgeVector:
        self._same_space(other)
        return EdgeVector(
            ell=self.ell,
            coords=tuple(a + b for a, b in zip(self.coords, other.coords)),
        )

    def __sub__(self, other: EdgeVector) -> EdgeVector:
        self._same_space(other)
        return EdgeVector(
            ell=self.ell,
            coords=tuple(a - b for a, b in zip(self.coords, other.coords)),
        )

    def __neg__(self) -> EdgeVector:
        return self.scale(-1.0)

    def _same_space(self, other: EdgeVector) -> None:
        if other.ell != self.ell:
            msg = f"Edge spaces differ: ell={self.ell} vs ell={other.ell}"
            raise DomainError(msg)


# ---------------------------------------------------------------------------
# Covariance model
# ---------------------------------------------------------------------------


class CovarianceModel(BaseModel):
    """The Impartial Culture covariance model on the edge space.

    Stores the scalar spectral data; the dense matrices are built on
    demand by :mod:`marginsim.ic_model` and cached per ``ell``.

    Attributes:
        ell: Number of candidates.
        lambda_cycle: Eigenvalue of Sigma on the cycle space (1/3).
        lambda_cut: Eigenvalue of Sigma on the cut space ((l+1)/3).
        dim_cycle: Dimension of the cycle space, ``(l-1)(l-2)/2``.
        dim_cut: Dimension of the cut space, ``l-1``.
        det_sigma: Determinant of Sigma (underflows to 0.0 for very large
            ``ell``; use ``log_det_sigma`` there).
        log_det_sigma: Natural log of the determinant.
    """

    ell: int
    lambda_cycle: float
    lambda_cut: float
    dim_cycle: int
    dim_cut: int
    det_sigma: float
    log_det_sigma: float

    model_config = {"frozen": True}

    @field_validator("ell")
    @classmethod
    def _valid_ell(cls, v: int) -> int:
        return check_ell(v)

    @property
    def dim(self) -> int:
        """Dimension of the edge space."""
        return num_edges(self.ell)

    @property
    def sigma(self) -> NDArray[np.float64]:
        """Covariance matrix (read-only)."""
        from marginsim.ic_model import sigma_matrix

        return sigma_matrix(self.ell)

    @property
    def gamma(self) -> NDArray[np.float64]:
        """Precision matrix, the inverse of Sigma (read-only)."""
        from marginsim.ic_model import precision

        return precision(self.ell)


# ---------------------------------------------------------------------------
# Ballots, profiles, margin graphs
# ---------------------------------------------------------------------------


class Ballot(BaseModel):
    """One voter's strict ranking, best candidate first.

    Attributes:
        ranking: A permutation of ``1..l``.
    """

    ranking: tuple[int, ...]

    model_config = {"frozen": True}

    @field_validator("ranking")
    @classmethod
    def _is_permutation(cls, v: tuple[int, ...]) -> tuple[int, ...]:
        if sorted(v) != list(range(1, len(v) + 1)):
            msg = f"Ballot must be a permutation of 1..{len(v)}, got {v}"
            raise ValueError(msg)
        check_ell(len(v))
        return v

    @property
    def ell(self) -> int:
        """Number of candidates ranked."""
        return len(self.ranking)

    def prefers(self, i: int, j: int) -> bool:
        """Whether candidate ``i`` is ranked above ``j``."""
        return self.ranking.index(i) < self.ranking.index(j)


class Profile(BaseModel):
    """A sequence of ballots over a common candidate set.

    Attributes:
        ell: Number of candidates.
        ballots: One ballot per voter (at least one).
    """

    ell: int
    ballots: tuple[Ballot, ...] = Field(min_length=1)

    model_config = {"frozen": True}

    @model_validator(mode="after")
    def _same_candidates(self) -> Profile:
        check_ell(self.ell)
        bad = [b.ranking for b in self.ballots if b.ell != self.ell]
        if bad:
            msg = f"Ballots must rank {self.ell} candidates; got {bad[0]}"
            raise ValueError(msg)
        return self

    @property
    def voters(self) -> int:
        """Number of voters ``n``."""
        return len(self.ballots)


class MarginGraph(BaseModel):
    """Integer head-to-head margins of an n-voter profile.

    ``margins[flat(i, j)] = Margin(c_i, c_j)`` for ``i < j``.

    Attributes:
        ell: Number of candidates.
        margins: One integer margin per pair in lexicographic order.
        voters: Number of voters ``n``.
    """

    ell: int
    margins: tuple[int, ...]
    voters: int = Field(ge=1)

    model_config = {"frozen": True}

    @model_validator(mode="after")
    def _parity_and_bound(self) -> MarginGraph:
        check_ell(self.ell)
        if len(self.margins) != num_edges(self.ell):
            msg = f"Expected {num_edges(self.ell)} margins, got {len(self.margins)}"
            raise ValueError(msg)
        for m in self.margins:
            if abs(m) > self.voters:
                msg = f"Margin {m} exceeds voter count {self.voters}"
                raise ValueError(msg)
            if (m - self.voters) % 2:
                msg = f"Margin {m} has different parity from n={self.voters}"
                raise ValueError(msg)
        return self

    def margin(self, i: int, j: int) -> int:
        """``Margin(c_i, c_j)`` under the sign convention."""
        from marginsim.edge_space import edge_index

        flat, sign = edge_index(i, j, self.ell)
        return sign * self.margins[flat]

    def as_edge_vector(self) -> EdgeVector:
        """The margins as a real edge labeling."""
        return EdgeVector(ell=self.ell, coords=tuple(float(m) for m in self.margins))


# ---------------------------------------------------------------------------
# Tournaments
# ---------------------------------------------------------------------------


class Tournament(BaseModel):
    """A complete tournament stored as one direction bit per pair.

    Bit ``flat(i, j)`` (``i < j``) is set when ``c_i`` beats ``c_j``.

    Attributes:
        ell: Number of candidates.
        bits: Direction bits packed into an integer, bit 0 = pair (1, 2).
    """

    ell: int
    bits: int = Field(ge=0)

    model_config = {"frozen": True}

    @model_validator(mode="after")
    def _bits_in_range(self) -> Tournament:
        check_ell(self.ell)
        if self.bits >> num_edges(self.ell):
            msg = f"Direction bits exceed {num_edges(self.ell)} pairs"
            raise ValueError(msg)
        return self

    def beats(self, i: int, j: int) -> bool:
        """Whether ``c_i`` beats ``c_j`` head-to-head."""
        from marginsim.edge_space import edge_index

        flat, sign = edge_index(i, j, self.ell)
        forward = bool(self.bits >> flat & 1)
        return forward if sign > 0 else not forward

    def out_degrees(self) -> list[int]:
        """Out-degree of each candidate, indexed from candidate 1."""
        return [
            sum(self.beats(v, u) for u in range(1, self.ell + 1) if u != v)
            for v in range(1, self.ell + 1)
        ]

    def to_bit_string(self) -> str:
        """Direction bits as ``'0'/'1'`` characters in lexicographic pair order.

        >>> Tournament(ell=3, bits=0b011).to_bit_string()
        '110'
        """
        k = num_edges(self.ell)
        return "".join("1" if self.bits >> e & 1 else "0" for e in range(k))

    @classmethod
    def from_bit_string(cls, ell: int, text: str) -> Tournament:
        """Inverse of :meth:`to_bit_string`."""
        if len(text) != num_edges(ell) or set(text) - {"0", "1"}:
            msg = f"Expected {num_edges(ell)} binary digits, got {text!r}"
            raise DomainError(msg)
        return cls(ell=ell, bits=sum(1 << e for e, ch in enumerate(text) if ch == "1"))


class QualitativeMarginGraph(BaseModel):
    """A tournament plus a strict total order of its edges by margin size.

    Attributes:
        tournament: The majority graph.
        edge_rank: ``edge_rank[flat]`` is the rank of that pair's edge,
            0 for the smallest absolute margin.
    """

    tournament: Tournament
    edge_rank: tuple[int, ...]

    model_config = {"frozen": True}

    @model_validator(mode="after")
    def _rank_is_permutation(self) -> QualitativeMarginGraph:
        k = num_edges(self.tournament.ell)
        if sorted(self.edge_rank) != list(range(k)):
            msg = f"edge_rank must be a permutation of 0..{k - 1}"
            raise ValueError(msg)
        return self

    def edges_ascending(self) -> list[tuple[int, int]]:
        """Winning-direction edges ``(winner, loser)`` from weakest to strongest."""
        from marginsim.edge_space import edge_pairs

        pairs = edge_pairs(self.tournament.ell)
        order = sorted(range(len(pairs)), key=lambda e: self.edge_rank[e])
        out: list[tuple[int, int]] = []
        for e in order:
            i, j = pairs[e]
            out.append((i, j) if self.tournament.beats(i, j) else (j, i))
        return out

    def key(self) -> str:
        """Compact string identity: direction bits then ranks."""
        ranks = ",".join(str(r) for r in self.edge_rank)
        return f"{self.tournament.to_bit_string()}|{ranks}"


class TournamentType(BaseModel):
    """An isomorphism class of tournaments on ``ell`` vertices.

    Attributes:
        ell: Number of candidates.
        canonical: Lexicographically minimal bit string over relabelings.
        score_sequence: Out-degrees sorted in descending order.
        linearity: Sum of squared out-degrees.
        labelings: Number of labeled tournaments in the class.
    """

    ell: int
    canonical: str
    score_sequence: tuple[int, ...]
    linearity: int
    labelings: int = Field(ge=1)

    model_config = {"frozen": True}

    @property
    def automorphisms(self) -> int:
        """Order of the automorphism group, ``l! / labelings``."""
        return math.factorial(self.ell) // self.labelings


# ---------------------------------------------------------------------------
# Estimates and tables
# ---------------------------------------------------------------------------


class ProbEstimate(BaseModel):
    """A Monte Carlo probability with its Wald standard error.

    Attributes:
        p_hat: Estimated probability.
        std_err: ``sqrt(p_hat (1 - p_hat) / samples)``.
        samples: Number of draws.
        seed: Master seed of the run.
        shards: Number of independent RNG streams the draws came from.
    """

    p_hat: float = Field(ge=0.0, le=1.0)
    std_err: float = Field(ge=0.0)
    samples: int = Field(ge=1)
    seed: int
    shards: int = Field(default=1, ge=1)

    model_config = {"frozen": True}

    @classmethod
    def from_counts(
        cls, hits: int, samples: int, *, seed: int, shards: int = 1
    ) -> ProbEstimate:
        """Frequency estimate from an integer hit count.

        >>> ProbEstimate.from_counts(50, 100, seed=0).std_err
        0.05
        """
        p = hits / samples
        return cls(
            p_hat=p,
            std_err=math.sqrt(p * (1.0 - p) / samples),
            samples=samples,
            seed=seed,
            shards=shards,
        )

    def within(self, target: float, sigmas: float) -> bool:
        """Whether ``target`` lies within ``sigmas`` standard errors."""
        return abs(self.p_hat - target) <= sigmas * self.std_err


class TypeProbRow(BaseModel):
    """One isomorphism type with its labeled and type probabilities."""

    type_id: str
    tournament_type: TournamentType
    labeled_prob: ProbEstimate
    type_prob: ProbEstimate

    model_config = {"frozen": True}


class TypeProbTable(BaseModel):
    """Estimated probability of every tournament type for one ``ell``.

    Attributes:
        ell: Number of candidates.
        rows: One row per isomorphism type, ordered by descending linearity.
    """

    ell: int
    rows: list[TypeProbRow]

    def row(self, type_id: str) -> TypeProbRow:
        """Look up a row by its ``T<k>`` label."""
        for r in self.rows:
            if r.type_id == type_id:
                return r
        msg = f"No type {type_id!r} for ell={self.ell}"
        raise KeyError(msg)

    def total(self) -> float:
        """Sum of type probabilities (1 up to rounding)."""
        return math.fsum(r.type_prob.p_hat for r in self.rows)

    def summary(self) -> str:
        """Return a human-readable table."""
        lines = [
            f"Tournament types, {self.ell} candidates",
            "=" * 60,
        ]
        for r in self.rows:
            t = r.tournament_type
            score = ",".join(str(s) for s in t.score_sequence)
            lines.append(
                f"  {r.type_id:<4} {score:<12} lin={t.linearity:<3} "
                f"x{t.labelings:<4} {r.labeled_prob.p_hat:.7f} {r.type_prob.p_hat:.5f}"
            )
        return "\n".join(lines)


class OrderingVerdict(str, Enum):
    """Outcome of comparing two types against the linearity ordering."""

    CONSISTENT = "consistent"
    VIOLATED = "violated"
    WITHIN_NOISE = "within_noise"


class LinearityComparison(BaseModel):
    """A pair of types with different linearity and the observed ordering.

    ``higher`` has the larger linearity; the ordering predicts its labeled
    probability is the larger one.
    """

    higher: str
    lower: str
    gap: float
    combined_se: float
    verdict: OrderingVerdict

    model_config = {"frozen": True}


# ---------------------------------------------------------------------------
# Voting
# ---------------------------------------------------------------------------


class VotingMethod(str, Enum):
    """Margin-based voting methods."""

    MINIMAX = "minimax"
    SPLIT_CYCLE = "splitcycle"

    @classmethod
    def all(cls) -> list[VotingMethod]:
        """Return all method values."""
        return list(cls)


class WinningSet(BaseModel):
    """The set of winners a method selects.

    Attributes:
        winners: Sorted 1-based candidate ordinals (nonempty).
        method: Which method produced the set.
    """

    winners: tuple[int, ...] = Field(min_length=1)
    method: VotingMethod

    model_config = {"frozen": True}

    @field_validator("winners")
    @classmethod
    def _sorted_positive(cls, v: tuple[int, ...]) -> tuple[int, ...]:
        if any(w < 1 for w in v) or len(set(v)) != len(v):
            msg = f"Winners must be distinct positive ordinals, got {v}"
            raise ValueError(msg)
        return tuple(sorted(v))

    @property
    def size(self) -> int:
        """Number of winners."""
        return len(self.winners)


class SizeHistogram(BaseModel):
    """Distribution of winning-set sizes over Monte Carlo draws.

    Attributes:
        method: Voting method evaluated.
        ell: Number of candidates.
        counts: ``counts[size]`` draws whose winning set had that size.
        samples: Total draws.
        seed: Master seed.
        shards: Independent RNG streams used.
    """

    method: VotingMethod
    ell: int
    counts: dict[int, int]
    samples: int = Field(ge=1)
    seed: int
    shards: int = Field(default=1, ge=1)

    def estimate(self, size: int) -> ProbEstimate:
        """Fraction of draws with exactly ``size`` winners."""
        return ProbEstimate.from_counts(
            self.counts.get(size, 0), self.samples, seed=self.seed, shards=self.shards
        )

    def multiple_winners(self) -> ProbEstimate:
        """Fraction of draws with more than one winner."""
        hits = sum(c for s, c in self.counts.items() if s > 1)
        return ProbEstimate.from_counts(
            hits, self.samples, seed=self.seed, shards=self.shards
        )

    def summary(self) -> str:
        """Return a human-readable summary string."""
        lines = [
            f"{self.method.value} winning-set sizes, {self.ell} candidates",
            "=" * 40,
        ]
        for size in sorted(self.counts):
            est = self.estimate(size)
            lines.append(f"  {size}: {est.p_hat:.4%} (+/- {est.std_err:.4%})")
        lines.append(f"  multiple: {self.multiple_winners().p_hat:.4%}")
        return "\n".join(lines)


# ---------------------------------------------------------------------------
# CLI configuration
# ---------------------------------------------------------------------------


class Command(str, Enum):
    """Batch jobs exposed on the command line."""

    COVARIANCE = "covariance"
    EIGEN = "eigen"
    SAMPLE_MARGINS = "sample-margins"
    TYPE_PROBS = "type-probs"
    EXACT_ORTHANT3 = "exact-orthant3"
    EXACT_TABLE1 = "exact-table1"
    WINNING_SETS = "winning-sets"
    QUALITATIVE_COVERAGE = "qualitative-coverage"
    LEVELSET = "levelset"
    CONDORCET_PROB = "condorcet-prob"


class OutputFormat(str, Enum):
    """Serialization for command output."""

    CSV = "csv"
    JSON = "json"


class RunConfig(BaseModel):
    """A validated, reproducible batch job.

    Attributes:
        command: Which job to run.
        ell: Number of candidates.
        samples: Monte Carlo draws (or points for ``levelset``).
        seed: Master seed.
        shards: Independent RNG streams.
        voters: Voter count for exact sampling/enumeration (odd).
        method: Voting method for ``winning-sets``.
        output_path: Destination file; ``None`` writes to stdout.
        format: CSV or JSON.
    """

    command: Command
    ell: int = 3
    samples: int = Field(default=DEFAULT_SAMPLES, ge=1)
    seed: int = DEFAULT_SEED
    shards: int = Field(default=1, ge=1)
    voters: int | None = None
    method: VotingMethod | None = None
    output_path: str | None = None
    format: OutputFormat = OutputFormat.CSV

    model_config = {"frozen": True}

    @field_validator("ell")
    @classmethod
    def _valid_ell(cls, v: int) -> int:
        return check_ell(v)

    @field_validator("voters")
    @classmethod
    def _odd_voters(cls, v: int | None) -> int | None:
        if v is not None and (v < 1 or v % 2 == 0):
            msg = f"voters must be a positive odd number, got {v}"
            raise ValueError(msg)
        return v

    def provenance(self) -> dict[str, Any]:
        """Fields that pin the output of this run."""
        from marginsim import __version__

        return {
            "command": self.command.value,
            "ell": self.ell,
            "samples": self.samples,
            "seed": self.seed,
            "shards": self.shards,
            "voters": self.voters,
            "method": self.method.value if self.method else None,
            "version": __version__,
        }
