"""Tournament and event probabilities: closed forms, Monte Carlo, exact counts.

Monte Carlo estimators draw CLT margin vectors in fixed-size batches and
evaluate *batch events*: callables ``event(values, ell)`` that take an
``(m, k)`` array of labelings and return a boolean mask of length ``m``.
:func:`pointwise` lifts a predicate on a single :class:`EdgeVector`.

Every estimator accepts ``shards``. With one shard the given stream is
used directly; with more, shard ``i`` draws from ``RngStream(rng.seed, i)``
and integer counts are merged in shard order.
"""

from __future__ import annotations

import math
from collections import Counter
from collections.abc import Callable
from fractions import Fraction
from itertools import combinations, combinations_with_replacement, permutations

import numpy as np
from loguru import logger
from numpy.typing import NDArray

from marginsim.config import (
    EXACT_ENUMERATION_BUDGET,
    FLOAT_TOLERANCE,
    MAX_BALLOT_TYPES,
    MAX_COVERAGE_CANDIDATES,
    ORDERING_SIGMAS,
)
from marginsim.edge_space import endpoints
from marginsim.ic_model import sigma_fractions
from marginsim.models import (
    CovarianceModel,
    DomainError,
    EdgeVector,
    LinearityComparison,
    MarginGraph,
    OrderingVerdict,
    ProbEstimate,
    QualitativeMarginGraph,
    Tournament,
    TypeProbRow,
    TypeProbTable,
    UnsupportedSizeError,
    check_ell,
    num_edges,
)
from marginsim.sampling import (
    RngStream,
    batch_rows,
    exact_margins_array,
    iter_clt_batches,
    run_sharded,
)
from marginsim.tournaments import (
    condorcet_winner,
    enumerate_types,
    is_transitive,
    out_degrees_array,
    tournament_codes,
    tournament_of,
    type_id,
    type_lookup,
)

BatchEvent = Callable[[NDArray[np.float64], int], NDArray[np.bool_]]

# ---------------------------------------------------------------------------
# Closed forms
# ---------------------------------------------------------------------------


def orthant_exact_2(rho: float) -> float:
    """Positive-quadrant probability of a standard bivariate normal.

    >>> orthant_exact_2(0.0)
    0.25
    """
    if not -1.0 <= rho <= 1.0:
        msg = f"Correlation must be in [-1, 1], got {rho}"
        raise DomainError(msg)
    return 0.25 + math.asin(rho) / (2.0 * math.pi)


def orthant_exact_3(rho12: float, rho13: float, rho23: float) -> float:
    """Positive-orthant probability of a standard trivariate normal.

    Uses ``1/8 + (asin r12 + asin r13 + asin r23) / (4 pi)``.

    Raises:
        DomainError: If the three values do not form a positive
            semi-definite correlation matrix.

    Examples:
        >>> orthant_exact_3(0.0, 0.0, 0.0)
        0.125
    """
    rhos = (rho12, rho13, rho23)
    if any(not -1.0 <= r <= 1.0 for r in rhos):
        msg = f"Correlations must be in [-1, 1], got {rhos}"
        raise DomainError(msg)
    det = 1.0 - rho12**2 - rho13**2 - rho23**2 + 2.0 * rho12 * rho13 * rho23
    if det < -FLOAT_TOLERANCE:
        msg = f"Correlations {rhos} do not form a positive semi-definite matrix"
        raise DomainError(msg)
    return 0.125 + sum(math.asin(r) for r in rhos) / (4.0 * math.pi)


def _orthant_correlations(t: Tournament) -> list[float]:
    """Correlations of the sign-oriented coordinates ``s_e Y_e`` of ``t``'s orthant."""
    k = num_edges(t.ell)
    signs = [1 if t.bits >> e & 1 else -1 for e in range(k)]
    sigma = sigma_fractions(t.ell)
    return [
        float(signs[a] * signs[b] * sigma[a][b]) for a, b in combinations(range(k), 2)
    ]


def tournament_prob_exact_3(t: Tournament) -> float:
    """Limiting probability that ``t`` is the majority graph, for 3 candidates.

    Raises:
        UnsupportedSizeError: If ``t`` is not on 3 candidates.
    """
    if t.ell != 3:
        msg = f"Closed-form tournament probabilities need 3 candidates, got {t.ell}"
        raise UnsupportedSizeError(msg)
    r12, r13, r23 = _orthant_correlations(t)
    return orthant_exact_3(r12, r13, r23)


def condorcet_winner_prob_exact(ell: int) -> float:
    """Limiting probability of a Condorcet winner, for 3 or 4 candidates.

    A fixed candidate's ``l - 1`` margins have pairwise correlation ``1/3``,
    so this is ``l`` times a bivariate or trivariate orthant probability.

    Raises:
        UnsupportedSizeError: For ``ell`` other than 3 or 4.
    """
    third = 1.0 / 3.0
    if ell == 3:
        return 3 * orthant_exact_2(third)
    if ell == 4:
        return 4 * orthant_exact_3(third, third, third)
    msg = f"Closed-form Condorcet probabilities cover 3 or 4 candidates, got {ell}"
    raise UnsupportedSizeError(msg)


# ---------------------------------------------------------------------------
# Batch events
# ---------------------------------------------------------------------------


def always_event(values: NDArray[np.float64], ell: int) -> NDArray[np.bool_]:
    """True for every draw."""
    return np.ones(np.atleast_2d(values).shape[0], dtype=bool)


def condorcet_winner_event(values: NDArray[np.float64], ell: int) -> NDArray[np.bool_]:
    """Some candidate beats every other candidate."""
    result: NDArray[np.bool_] = (out_degrees_array(values, ell) == ell - 1).any(axis=1)
    return result


def transitive_event(values: NDArray[np.float64], ell: int) -> NDArray[np.bool_]:
    """The majority graph is a linear order (out-degrees all distinct)."""
    degrees = np.sort(out_degrees_array(values, ell), axis=1)
    result: NDArray[np.bool_] = (degrees == np.arange(ell)).all(axis=1)
    return result


def pointwise(predicate: Callable[[EdgeVector], bool]) -> BatchEvent:
    """Lift a predicate on a single labeling to a batch event."""

    def event(values: NDArray[np.float64], ell: int) -> NDArray[np.bool_]:
        rows = np.atleast_2d(values)
        return np.array(
            [predicate(EdgeVector.from_array(ell, row)) for row in rows], dtype=bool
        )

    return event


def has_condorcet_winner(g: MarginGraph) -> bool:
    """Whether an odd-voter margin graph has a Condorcet winner."""
    return condorcet_winner(tournament_of(g)) is not None


def has_transitive_majority(g: MarginGraph) -> bool:
    """Whether an odd-voter margin graph has a transitive majority graph."""
    return is_transitive(tournament_of(g))


# ---------------------------------------------------------------------------
# Monte Carlo
# ---------------------------------------------------------------------------


def estimate_event(
    model: CovarianceModel,
    samples: int,
    rng: RngStream,
    event: BatchEvent,
    *,
    shards: int = 1,
) -> ProbEstimate:
    """Frequency of ``event`` over CLT margin vectors, with its standard error."""

    def worker(stream: RngStream, count: int) -> int:
        return sum(
            int(np.count_nonzero(event(batch, model.ell)))
            for batch in iter_clt_batches(stream, model, count)
        )

    hits = sum(run_sharded(rng, samples, shards, worker))
    logger.debug(f"Event hit {hits}/{samples} CLT draws at ell={model.ell}")
    return ProbEstimate.from_counts(hits, samples, seed=rng.seed, shards=shards)


def estimate_event_exact(
    ell: int,
    n: int,
    samples: int,
    rng: RngStream,
    event: BatchEvent,
    *,
    shards: int = 1,
) -> ProbEstimate:
    """Frequency of ``event`` over margin graphs of ``n`` sampled ballots.

    Raises:
        DomainError: If ``n`` is not a positive odd number.
    """
    check_ell(ell)
    if n < 1 or n % 2 == 0:
        msg = f"Number of voters must be odd, got {n}"
        raise DomainError(msg)
    k = num_edges(ell)

    def worker(stream: RngStream, count: int) -> int:
        hits = 0
        rows = batch_rows(k)
        for start in range(0, count, rows):
            size = min(rows, count - start)
            batch = np.empty((size, k), dtype=np.float64)
            for row in range(size):
                batch[row] = exact_margins_array(stream, n, ell)
            hits += int(np.count_nonzero(event(batch, ell)))
        return hits

    hits = sum(run_sharded(rng, samples, shards, worker))
    return ProbEstimate.from_counts(hits, samples, seed=rng.seed, shards=shards)


def _labeled_counts(
    model: CovarianceModel, samples: int, rng: RngStream, shards: int
) -> NDArray[np.int64]:
    size = 1 << model.dim

    def worker(stream: RngStream, count: int) -> NDArray[np.int64]:
        counts = np.zeros(size, dtype=np.int64)
        for batch in iter_clt_batches(stream, model, count):
            counts += np.bincount(tournament_codes(batch), minlength=size)
        return counts

    total = np.zeros(size, dtype=np.int64)
    for part in run_sharded(rng, samples, shards, worker):
        total += part
    return total


def estimate_type_table(
    model: CovarianceModel,
    samples: int,
    rng: RngStream,
    *,
    shards: int = 1,
) -> TypeProbTable:
    """Estimate the probability of every tournament type as the majority graph.

    The labeled probability of a type pools its draws over all labelings:
    type frequency and standard error, each divided by the labeling count.

    Raises:
        UnsupportedSizeError: If ``model.ell`` exceeds 5.
    """
    types = enumerate_types(model.ell)
    lookup = type_lookup(model.ell)
    labeled = _labeled_counts(model, samples, rng, shards)
    per_type = np.bincount(
        lookup, weights=labeled.astype(np.float64), minlength=len(types)
    )
    rows: list[TypeProbRow] = []
    for position, tt in enumerate(types):
        type_prob = ProbEstimate.from_counts(
            int(round(per_type[position])), samples, seed=rng.seed, shards=shards
        )
        labeled_prob = ProbEstimate(
            p_hat=type_prob.p_hat / tt.labelings,
            std_err=type_prob.std_err / tt.labelings,
            samples=samples,
            seed=rng.seed,
            shards=shards,
        )
        rows.append(
            TypeProbRow(
                type_id=type_id(position, model.ell),
                tournament_type=tt,
                labeled_prob=labeled_prob,
                type_prob=type_prob,
            )
        )
    logger.info(
        f"Classified {samples} draws into {len(types)} types at ell={model.ell}"
    )
    return TypeProbTable(ell=model.ell, rows=rows)


def condorcet_share(table: TypeProbTable) -> float:
    """Total probability of the types that have a Condorcet winner."""
    return math.fsum(
        r.type_prob.p_hat
        for r in table.rows
        if r.tournament_type.score_sequence[0] == table.ell - 1
    )


def check_linearity_ordering(
    table: TypeProbTable, sigmas: float = ORDERING_SIGMAS
) -> list[LinearityComparison]:
    """Compare labeled probabilities of every pair of types with different linearity.

    The higher-linearity type is expected to be more probable. A pair whose
    gap is within ``sigmas`` combined standard errors is reported as noise.
    """
    out: list[LinearityComparison] = []
    for a, b in combinations(table.rows, 2):
        lin_a = a.tournament_type.linearity
        lin_b = b.tournament_type.linearity
        if lin_a == lin_b:
            continue
        high, low = (a, b) if lin_a > lin_b else (b, a)
        gap = high.labeled_prob.p_hat - low.labeled_prob.p_hat
        combined = math.hypot(high.labeled_prob.std_err, low.labeled_prob.std_err)
        if abs(gap) <= sigmas * combined:
            verdict = OrderingVerdict.WITHIN_NOISE
        elif gap > 0:
            verdict = OrderingVerdict.CONSISTENT
        else:
            verdict = OrderingVerdict.VIOLATED
            logger.warning(
                f"{high.type_id} (lin {high.tournament_type.linearity}) less probable "
                f"than {low.type_id} (lin {low.tournament_type.linearity})"
            )
        out.append(
            LinearityComparison(
                higher=high.type_id,
                lower=low.type_id,
                gap=gap,
                combined_se=combined,
                verdict=verdict,
            )
        )
    return out


# ---------------------------------------------------------------------------
# Qualitative margin graphs
# ---------------------------------------------------------------------------


def qualitative_type_count(ell: int) -> int:
    """Number of qualitative margin graphs with a total edge order."""
    k = num_edges(check_ell(ell))
    return (1 << k) * math.factorial(k)


def qualitative_coverage(
    model: CovarianceModel,
    samples: int,
    rng: RngStream,
    *,
    shards: int = 1,
) -> dict[QualitativeMarginGraph, int]:
    """Histogram of the qualitative margin graphs seen in CLT draws.

    Draws with a zero margin or two equal absolute margins are skipped and
    logged.

    Raises:
        UnsupportedSizeError: If ``model.ell`` exceeds 4.
    """
    if model.ell > MAX_COVERAGE_CANDIDATES:
        msg = (
            f"Qualitative coverage is limited to {MAX_COVERAGE_CANDIDATES} "
            f"candidates, got {model.ell}"
        )
        raise UnsupportedSizeError(msg)

    def worker(stream: RngStream, count: int) -> tuple[Counter[tuple[int, ...]], int]:
        seen: Counter[tuple[int, ...]] = Counter()
        ties = 0
        for batch in iter_clt_batches(stream, model, count):
            magnitudes = np.abs(batch)
            ordered = np.sort(magnitudes, axis=1)
            clean = (ordered[:, 0] > 0) & (np.diff(ordered, axis=1) > 0).all(axis=1)
            ties += int(np.count_nonzero(~clean))
            kept = batch[clean]
            if not len(kept):
                continue
            ranks = np.argsort(np.argsort(magnitudes[clean], axis=1), axis=1)
            keys = np.column_stack([tournament_codes(kept), ranks])
            rows, counts = np.unique(keys, axis=0, return_counts=True)
            seen.update(dict(zip(map(tuple, rows.tolist()), counts.tolist())))
        return seen, ties

    merged: Counter[tuple[int, ...]] = Counter()
    rejected = 0
    for seen, ties in run_sharded(rng, samples, shards, worker):
        merged.update(seen)
        rejected += ties
    if rejected:
        logger.warning(f"Skipped {rejected} draws with tied absolute margins")
    logger.info(
        f"Observed {len(merged)} of {qualitative_type_count(model.ell)} "
        f"qualitative margin graphs at ell={model.ell}"
    )
    return {
        QualitativeMarginGraph(
            tournament=Tournament(ell=model.ell, bits=key[0]),
            edge_rank=tuple(key[1:]),
        ): count
        for key, count in sorted(merged.items())
    }


# ---------------------------------------------------------------------------
# Exact finite-voter enumeration
# ---------------------------------------------------------------------------


def _ballot_contributions(ell: int) -> NDArray[np.int64]:
    """``(l!, k)`` array: the +-1 margin vector of every ranking."""
    tails, heads = endpoints(ell)
    rows = []
    for ranking in permutations(range(ell)):
        position = np.empty(ell, dtype=np.intp)
        position[list(ranking)] = np.arange(ell)
        rows.append(np.where(position[tails] < position[heads], 1, -1))
    return np.array(rows, dtype=np.int64)


def exact_finite_prob(
    ell: int, n: int, event: Callable[[MarginGraph], bool]
) -> Fraction:
    """Exact probability of ``event`` for ``n`` voters under Impartial Culture.

    Profiles are exchangeable, so the enumeration runs over multisets of
    ballot types weighted by multinomial coefficients, and ``event`` is
    evaluated once per distinct margin graph.

    Raises:
        DomainError: If ``n`` is not a positive odd number.
        UnsupportedSizeError: If ``l!`` exceeds the ballot-type limit or
            ``(l!)^n`` exceeds the enumeration budget.

    Examples:
        >>> exact_finite_prob(3, 3, has_condorcet_winner)
        Fraction(17, 18)
    """
    check_ell(ell)
    if n < 1 or n % 2 == 0:
        msg = f"Number of voters must be odd, got {n}"
        raise DomainError(msg)
    orders = math.factorial(ell)
    if orders > MAX_BALLOT_TYPES:
        msg = (
            f"Exact enumeration tabulates all {orders} rankings of {ell} "
            f"candidates; the limit is {MAX_BALLOT_TYPES}"
        )
        raise UnsupportedSizeError(msg)
    profiles = orders**n
    if profiles > EXACT_ENUMERATION_BUDGET:
        msg = (
            f"Exact enumeration of ({orders})^{n} = {profiles} profiles exceeds "
            f"the budget of {EXACT_ENUMERATION_BUDGET}"
        )
        raise UnsupportedSizeError(msg)

    contributions = _ballot_contributions(ell)
    n_factorial = math.factorial(n)
    weights: Counter[tuple[int, ...]] = Counter()
    for combo in combinations_with_replacement(range(orders), n):
        multiplicity = Counter(combo).values()
        weight = n_factorial // math.prod(math.factorial(c) for c in multiplicity)
        margins = contributions[list(combo)].sum(axis=0)
        weights[tuple(margins.tolist())] += weight

    hits = sum(
        weight
        for margins, weight in weights.items()
        if event(MarginGraph(ell=ell, margins=margins, voters=n))
    )
    logger.debug(f"{len(weights)} distinct margin graphs for ell={ell}, n={n}")
    return Fraction(hits, profiles)
