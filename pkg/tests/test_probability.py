"""Tests for marginsim.probability."""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest
from numpy.typing import NDArray

from marginsim.models import (
    CovarianceModel,
    DomainError,
    EdgeVector,
    OrderingVerdict,
    ProbEstimate,
    QualitativeMarginGraph,
    Tournament,
    TournamentType,
    TypeProbRow,
    TypeProbTable,
    UnsupportedSizeError,
)
from marginsim.probability import (
    always_event,
    check_linearity_ordering,
    condorcet_share,
    condorcet_winner_event,
    condorcet_winner_prob_exact,
    estimate_event,
    estimate_event_exact,
    estimate_type_table,
    exact_finite_prob,
    has_condorcet_winner,
    has_transitive_majority,
    orthant_exact_2,
    orthant_exact_3,
    pointwise,
    qualitative_coverage,
    qualitative_type_count,
    tournament_prob_exact_3,
    transitive_event,
)
from marginsim.sampling import RngStream, sample_margin_clt_batch
from marginsim.tournaments import (
    condorcet_winner,
    dual,
    enumerate_types,
    tournament_codes,
    tournament_of,
)

LINEAR_ORDER_3 = 0.1520433
CYCLE_3 = 0.0438701
CONDORCET_3 = 0.91226
CONDORCET_4 = 0.82452
CONDORCET_5 = 0.74861
TRANSITIVE_4 = 0.7395
LABELED_4 = (0.030813, 0.010628, 0.010628, 0.0037692)


class TestClosedForms:
    def test_bivariate(self) -> None:
        assert orthant_exact_2(1.0) == pytest.approx(0.5)
        assert orthant_exact_2(-1.0) == pytest.approx(0.0)

    def test_bivariate_range(self) -> None:
        with pytest.raises(DomainError):
            orthant_exact_2(1.5)

    def test_trivariate_not_psd(self) -> None:
        with pytest.raises(DomainError):
            orthant_exact_3(0.9, 0.9, -0.9)

    def test_linear_order(self) -> None:
        p = tournament_prob_exact_3(Tournament(ell=3, bits=0b111))
        assert p == pytest.approx(LINEAR_ORDER_3, abs=1e-7)

    def test_cycle(self) -> None:
        p = tournament_prob_exact_3(Tournament(ell=3, bits=0b101))
        assert p == pytest.approx(CYCLE_3, abs=1e-7)

    def test_labeled_probabilities_sum_to_one(self) -> None:
        total = math.fsum(
            tournament_prob_exact_3(Tournament(ell=3, bits=b)) for b in range(8)
        )
        assert total == pytest.approx(1.0)

    def test_isomorphic_tournaments_agree(self) -> None:
        for b in range(8):
            p = tournament_prob_exact_3(Tournament(ell=3, bits=b))
            expected = CYCLE_3 if b in (0b010, 0b101) else LINEAR_ORDER_3
            assert p == pytest.approx(expected, abs=1e-7)

    def test_only_three_candidates(self) -> None:
        with pytest.raises(UnsupportedSizeError):
            tournament_prob_exact_3(Tournament(ell=4, bits=0))

    def test_condorcet(self) -> None:
        assert condorcet_winner_prob_exact(3) == pytest.approx(CONDORCET_3, abs=1e-5)
        assert condorcet_winner_prob_exact(4) == pytest.approx(CONDORCET_4, abs=1e-5)
        with pytest.raises(UnsupportedSizeError):
            condorcet_winner_prob_exact(5)


class TestEvents:
    def test_batch_events(
        self, transitive4: EdgeVector, minimax_example: EdgeVector
    ) -> None:
        batch = np.vstack([transitive4.to_array(), minimax_example.to_array()])
        assert condorcet_winner_event(batch, 4).tolist() == [True, False]
        assert transitive_event(batch, 4).tolist() == [True, False]
        assert always_event(batch, 4).tolist() == [True, True]

    def test_pointwise_matches_batch(self, model4: CovarianceModel) -> None:
        batch = sample_margin_clt_batch(RngStream(5), model4, 200)
        lifted = pointwise(lambda x: condorcet_winner(tournament_of(x)) is not None)
        assert np.array_equal(lifted(batch, 4), condorcet_winner_event(batch, 4))


class TestMonteCarlo:
    def test_condorcet_three(self, model3: CovarianceModel, rng: RngStream) -> None:
        est = estimate_event(model3, 20_000, rng, condorcet_winner_event)
        assert est.samples == 20_000
        assert est.seed == 42
        assert est.within(CONDORCET_3, 4.0)

    def test_transitive_four(self, model4: CovarianceModel, rng: RngStream) -> None:
        est = estimate_event(model4, 20_000, rng, transitive_event)
        assert est.within(TRANSITIVE_4, 4.0)

    def test_reproducible(self, model4: CovarianceModel) -> None:
        a = estimate_event(model4, 5_000, RngStream(9), condorcet_winner_event)
        b = estimate_event(model4, 5_000, RngStream(9), condorcet_winner_event)
        assert a == b

    def test_sharded_reproducible(self, model4: CovarianceModel) -> None:
        a = estimate_event(model4, 5_000, RngStream(9), transitive_event, shards=3)
        b = estimate_event(model4, 5_000, RngStream(9), transitive_event, shards=3)
        assert a.p_hat == b.p_hat
        assert a.shards == 3

    def test_certain_event(self, model3: CovarianceModel, rng: RngStream) -> None:
        est = estimate_event(model3, 1_000, rng, always_event)
        assert est.p_hat == 1.0
        assert est.std_err == 0.0

    def test_exact_voters(self) -> None:
        est = estimate_event_exact(3, 101, 800, RngStream(1), condorcet_winner_event)
        assert est.within(CONDORCET_3, 4.0)

    def test_exact_voters_even(self) -> None:
        with pytest.raises(DomainError):
            estimate_event_exact(3, 10, 10, RngStream(1), condorcet_winner_event)


class TestTypeTable:
    def test_three(self, model3: CovarianceModel, rng: RngStream) -> None:
        table = estimate_type_table(model3, 20_000, rng)
        assert [r.type_id for r in table.rows] == ["T1", "T2"]
        assert table.total() == pytest.approx(1.0)
        assert table.row("T1").labeled_prob.within(LINEAR_ORDER_3, 4.0)
        assert table.row("T2").labeled_prob.within(CYCLE_3, 4.0)

    def test_four(self, model4: CovarianceModel, rng: RngStream) -> None:
        table = estimate_type_table(model4, 20_000, rng)
        assert len(table.rows) == 4
        for r, expected in zip(table.rows, LABELED_4):
            assert r.labeled_prob.within(expected, 4.0)
            assert r.labeled_prob.p_hat == pytest.approx(
                r.type_prob.p_hat / r.tournament_type.labelings
            )
        assert condorcet_share(table) == pytest.approx(CONDORCET_4, abs=0.015)

    def test_linearity_ordering(self, model4: CovarianceModel, rng: RngStream) -> None:
        table = estimate_type_table(model4, 20_000, rng)
        comparisons = check_linearity_ordering(table)
        assert len(comparisons) == 5
        assert all(c.verdict is OrderingVerdict.CONSISTENT for c in comparisons)
        assert ("T2", "T3") not in {(c.higher, c.lower) for c in comparisons}

    def test_ordering_violation(self) -> None:
        high, low = enumerate_types(3)

        def row(tid: str, tt: TournamentType, hits: int) -> TypeProbRow:
            est = ProbEstimate.from_counts(hits, 10_000, seed=0)
            return TypeProbRow(
                type_id=tid, tournament_type=tt, labeled_prob=est, type_prob=est
            )

        table = TypeProbTable(ell=3, rows=[row("T1", high, 100), row("T2", low, 900)])
        (comparison,) = check_linearity_ordering(table)
        assert comparison.verdict is OrderingVerdict.VIOLATED
        assert comparison.gap < 0

    def test_too_many_candidates(self, rng: RngStream) -> None:
        from marginsim.ic_model import covariance

        with pytest.raises(UnsupportedSizeError):
            estimate_type_table(covariance(6), 10, rng)


class TestQualitative:
    def test_type_count(self) -> None:
        assert qualitative_type_count(3) == 48
        assert qualitative_type_count(4) == 46_080

    def test_coverage_three(self, model3: CovarianceModel, rng: RngStream) -> None:
        seen = qualitative_coverage(model3, 20_000, rng)
        assert len(seen) == 48
        assert sum(seen.values()) == 20_000

    def test_coverage_keys(self, model4: CovarianceModel, rng: RngStream) -> None:
        seen = qualitative_coverage(model4, 2_000, rng, shards=2)
        assert sum(seen.values()) == 2_000
        for q in seen:
            assert q.tournament.ell == 4
            assert sorted(q.edge_rank) == list(range(6))

    def test_limit(self, model5: CovarianceModel, rng: RngStream) -> None:
        with pytest.raises(UnsupportedSizeError):
            qualitative_coverage(model5, 10, rng)


class TestExactFinite:
    def test_three_voters(self) -> None:
        assert exact_finite_prob(3, 3, has_condorcet_winner) == Fraction(17, 18)
        assert exact_finite_prob(3, 3, has_transitive_majority) == Fraction(17, 18)

    def test_one_voter(self) -> None:
        assert exact_finite_prob(4, 1, has_condorcet_winner) == 1

    @pytest.mark.parametrize(
        ("ell", "n", "expected"),
        [(3, 5, 0.93056), (3, 7, 0.92498), (4, 3, 0.88889)],
    )
    def test_condorcet_cells(self, ell: int, n: int, expected: float) -> None:
        assert float(exact_finite_prob(ell, n, has_condorcet_winner)) == pytest.approx(
            expected, abs=5e-6
        )

    @pytest.mark.slow
    def test_five_candidates(self) -> None:
        p = exact_finite_prob(5, 3, has_condorcet_winner)
        assert float(p) == pytest.approx(0.84, abs=5e-6)

    def test_even_voters(self) -> None:
        with pytest.raises(DomainError):
            exact_finite_prob(3, 4, has_condorcet_winner)

    def test_budget(self) -> None:
        with pytest.raises(UnsupportedSizeError):
            exact_finite_prob(5, 5, has_condorcet_winner)

    def test_ballot_type_limit(self) -> None:
        with pytest.raises(UnsupportedSizeError):
            exact_finite_prob(9, 1, has_condorcet_winner)


# (type id, printed type probability, half a unit in its last printed digit)
FIVE_CANDIDATE_TYPES = (
    ("T1", 0.527, 5e-4),
    ("T2", 0.0708, 5e-5),
    ("T3", 0.0677, 5e-5),
    ("T4", 0.0677, 5e-5),
    ("T5", 0.0834, 5e-5),
    ("T6", 0.0834, 5e-5),
    ("T7", 0.0329, 5e-5),
    ("T8", 0.0317, 5e-5),
    ("T10", 0.00471, 5e-6),
    ("T12", 0.00139, 5e-6),
)
# Two 120-labeling types with scores (3, 2, 2, 2, 1) whose printed values
# are one unit apart; compared as a sorted pair.
SHARED_SCORE_PAIR = (("T11", 0.0148), ("T9", 0.0147))


def _close(est: ProbEstimate, target: float, half_unit: float) -> bool:
    return abs(est.p_hat - target) <= 4.0 * est.std_err + half_unit


@pytest.mark.slow
class TestAcceptance:
    def test_five_candidate_types(self, model5: CovarianceModel) -> None:
        table = estimate_type_table(model5, 1_000_000, RngStream(42), shards=4)
        ids = [r.type_id for r in table.rows]
        assert ids == [f"T{i}" for i in (1, 2, 3, 4, 5, 6, 7, 8, 11, 9, 10, 12)]
        for tid, p, half_unit in FIVE_CANDIDATE_TYPES:
            assert _close(table.row(tid).type_prob, p, half_unit), tid
        observed = sorted(
            (table.row(tid).type_prob for tid, _ in SHARED_SCORE_PAIR),
            key=lambda e: e.p_hat,
        )
        printed = sorted(p for _, p in SHARED_SCORE_PAIR)
        for est, p in zip(observed, printed):
            assert _close(est, p, 5e-5)
        assert condorcet_share(table) == pytest.approx(CONDORCET_5, abs=0.002)

    def test_five_candidate_linearity(self, model5: CovarianceModel) -> None:
        table = estimate_type_table(model5, 1_000_000, RngStream(42), shards=4)
        comparisons = check_linearity_ordering(table)
        assert comparisons
        assert all(c.verdict is not OrderingVerdict.VIOLATED for c in comparisons)

    def test_four_candidate_labeled(self, model4: CovarianceModel) -> None:
        table = estimate_type_table(model4, 1_000_000, RngStream(42), shards=4)
        for r, expected in zip(table.rows, LABELED_4):
            assert r.labeled_prob.within(expected, 4.0)

    def test_four_candidate_duals(self, model4: CovarianceModel) -> None:
        table = estimate_type_table(model4, 1_000_000, RngStream(42), shards=4)
        t2 = table.row("T2").labeled_prob
        t3 = table.row("T3").labeled_prob
        combined = math.hypot(t2.std_err, t3.std_err)
        assert abs(t2.p_hat - t3.p_hat) <= 3.0 * combined

    def test_four_candidate_transitive(self, model4: CovarianceModel) -> None:
        est = estimate_event(
            model4, 1_000_000, RngStream(42), transitive_event, shards=4
        )
        assert est.p_hat == pytest.approx(TRANSITIVE_4, abs=0.004)

    def test_three_candidate_closed_form(self, model3: CovarianceModel) -> None:
        table = estimate_type_table(model3, 1_000_000, RngStream(42), shards=4)
        codes = tournament_codes(
            sample_margin_clt_batch(RngStream(7), model3, 1_000_000)
        )
        counts = np.bincount(codes, minlength=8)
        for bits in range(8):
            p = tournament_prob_exact_3(Tournament(ell=3, bits=bits))
            est = ProbEstimate.from_counts(int(counts[bits]), 1_000_000, seed=7)
            assert est.within(p, 4.0), bits
        assert table.row("T1").labeled_prob.within(LINEAR_ORDER_3, 4.0)
        assert table.row("T2").labeled_prob.within(CYCLE_3, 4.0)

    def test_exact_sampler_matches_limit(self, model3: CovarianceModel) -> None:
        clt = np.bincount(
            tournament_codes(sample_margin_clt_batch(RngStream(3), model3, 1_000_000)),
            minlength=8,
        )
        for bits in range(8):

            def event(
                values: NDArray[np.float64], ell: int, bits: int = bits
            ) -> NDArray[np.bool_]:
                result: NDArray[np.bool_] = tournament_codes(values) == bits
                return result

            exact = estimate_event_exact(3, 1001, 50_000, RngStream(11 + bits), event)
            limit = ProbEstimate.from_counts(int(clt[bits]), 1_000_000, seed=3)
            combined = math.hypot(exact.std_err, limit.std_err)
            assert abs(exact.p_hat - limit.p_hat) <= 3.0 * combined, bits

    def test_coverage_four(self, model4: CovarianceModel) -> None:
        seen = qualitative_coverage(model4, 1_000_000, RngStream(42), shards=4)
        assert len(seen) <= qualitative_type_count(4)
        assert sum(seen.values()) == 1_000_000

    def test_dual_qualitative_graphs(self, model3: CovarianceModel) -> None:
        seen = qualitative_coverage(model3, 1_000_000, RngStream(42), shards=4)
        assert len(seen) == 48
        for q, count in seen.items():
            mirror = QualitativeMarginGraph(
                tournament=dual(q.tournament), edge_rank=q.edge_rank
            )
            other = seen[mirror]
            combined = math.sqrt(count + other)
            assert abs(count - other) <= 5.0 * combined, q.key()
