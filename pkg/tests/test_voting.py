"""Tests for marginsim.voting."""

from __future__ import annotations

from itertools import combinations

import networkx as nx
import numpy as np
import pytest

from marginsim.edge_space import edge_pairs
from marginsim.ic_model import covariance
from marginsim.models import (
    CovarianceModel,
    DomainError,
    EdgeVector,
    MarginGraph,
    VotingMethod,
)
from marginsim.probability import estimate_event
from marginsim.sampling import RngStream, sample_margin_clt_batch
from marginsim.voting import (
    margin_matrices,
    minimax_condorcet_loser_event,
    minimax_winners,
    multiple_winners_event,
    parse_method,
    split_cycle_winners,
    voting_batch_size,
    widest_paths,
    winning_set_distribution,
)


def _split_cycle_oracle(x: EdgeVector) -> tuple[int, ...]:
    """Split Cycle by removing the weakest edges of every simple majority cycle."""
    graph = nx.DiGraph()
    graph.add_nodes_from(range(1, x.ell + 1))
    for i, j in combinations(range(1, x.ell + 1), 2):
        m = x.get(i, j)
        if m > 0:
            graph.add_edge(i, j, weight=m)
        elif m < 0:
            graph.add_edge(j, i, weight=-m)
    defeats = set(graph.edges)
    for cycle in nx.simple_cycles(graph):
        edges = list(zip(cycle, cycle[1:] + cycle[:1]))
        weakest = min(graph.edges[e]["weight"] for e in edges)
        defeats -= {e for e in edges if graph.edges[e]["weight"] == weakest}
    beaten = {head for _, head in defeats}
    return tuple(v for v in range(1, x.ell + 1) if v not in beaten)


def _minimax_oracle(x: EdgeVector) -> tuple[int, ...]:
    worst = {
        a: max([x.get(b, a) for b in range(1, x.ell + 1) if b != a] + [0.0])
        for a in range(1, x.ell + 1)
    }
    best = min(worst.values())
    return tuple(a for a, w in worst.items() if w == best)


class TestMarginMatrices:
    def test_antisymmetric(self, minimax_example: EdgeVector) -> None:
        (m,) = margin_matrices(minimax_example.to_array(), 4)
        assert np.array_equal(m, -m.T)
        for i, j in edge_pairs(4):
            assert m[i - 1, j - 1] == minimax_example.get(i, j)

    def test_widest_paths(self, minimax_example: EdgeVector) -> None:
        m = margin_matrices(minimax_example.to_array(), 4)
        (s,) = widest_paths(np.maximum(m, 0.0))
        # A -> B -> C has strength 7; C -> A -> B has strength 7.
        assert s[0, 2] == 7.0
        assert s[2, 1] == 7.0
        # Nothing leaves D.
        assert not s[3].any()


class TestWinners:
    def test_minimax_example(self, minimax_example: EdgeVector) -> None:
        assert minimax_winners(minimax_example).winners == (4,)

    def test_split_cycle_example(self, minimax_example: EdgeVector) -> None:
        result = split_cycle_winners(minimax_example)
        assert result.winners == (2,)
        assert result.method is VotingMethod.SPLIT_CYCLE

    def test_margin_graph_input(self, minimax_example_graph: MarginGraph) -> None:
        assert minimax_winners(minimax_example_graph).winners == (4,)
        assert split_cycle_winners(minimax_example_graph).winners == (2,)

    def test_condorcet_winner(self, transitive4: EdgeVector) -> None:
        assert minimax_winners(transitive4).winners == (1,)
        assert split_cycle_winners(transitive4).winners == (1,)

    def test_equal_margin_cycle(self, three_cycle: EdgeVector) -> None:
        assert minimax_winners(three_cycle).winners == (1, 2, 3)
        assert split_cycle_winners(three_cycle).winners == (1, 2, 3)

    def test_zero_margins(self) -> None:
        zero = EdgeVector.zeros(4)
        assert minimax_winners(zero).size == 4
        assert split_cycle_winners(zero).size == 4

    @pytest.mark.parametrize("ell", [4, 5, 6])
    def test_against_oracles(self, ell: int) -> None:
        from marginsim.ic_model import covariance

        batch = sample_margin_clt_batch(RngStream(ell), covariance(ell), 60)
        for row in batch:
            x = EdgeVector.from_array(ell, row)
            assert split_cycle_winners(x).winners == _split_cycle_oracle(x)
            assert minimax_winners(x).winners == _minimax_oracle(x)

    def test_scale_invariant(self, minimax_example: EdgeVector) -> None:
        scaled = minimax_example.scale(0.01)
        assert minimax_winners(scaled).winners == (4,)
        assert split_cycle_winners(scaled).winners == (2,)

    def test_condorcet_winner_selected(self) -> None:
        from marginsim.ic_model import covariance
        from marginsim.tournaments import condorcet_winner, tournament_of

        batch = sample_margin_clt_batch(RngStream(9), covariance(5), 2_000)
        for row in batch:
            x = EdgeVector.from_array(5, row)
            winner = condorcet_winner(tournament_of(x))
            if winner is not None:
                assert split_cycle_winners(x).winners == (winner,)
                assert minimax_winners(x).winners == (winner,)

    def test_split_cycle_ties(self) -> None:
        # Integer margins with equal weakest edges in overlapping cycles.
        x = EdgeVector.from_edges(
            4,
            {(1, 2): 3, (2, 3): 3, (3, 1): 5, (3, 4): 3, (4, 1): 3, (2, 4): 1},
        )
        assert split_cycle_winners(x).winners == _split_cycle_oracle(x)

    def test_parse_method(self) -> None:
        assert parse_method("minimax") is VotingMethod.MINIMAX
        assert parse_method(VotingMethod.SPLIT_CYCLE) is VotingMethod.SPLIT_CYCLE
        with pytest.raises(DomainError):
            parse_method("borda")


class TestEvents:
    def test_condorcet_loser(
        self, minimax_example: EdgeVector, transitive4: EdgeVector
    ) -> None:
        batch = np.vstack([minimax_example.to_array(), transitive4.to_array()])
        assert minimax_condorcet_loser_event(batch, 4).tolist() == [True, False]

    def test_multiple_winners(
        self, three_cycle: EdgeVector, minimax_example: EdgeVector
    ) -> None:
        assert multiple_winners_event(three_cycle.to_array(), 3).tolist() == [True]
        assert multiple_winners_event(minimax_example.to_array(), 4).tolist() == [False]
        assert not multiple_winners_event(
            minimax_example.to_array(), 4, VotingMethod.MINIMAX
        ).any()


class TestDistribution:
    def test_batch_size(self) -> None:
        assert voting_batch_size(10) == 50_000
        assert voting_batch_size(10_000) == 1

    @pytest.mark.parametrize("method", list(VotingMethod))
    def test_three_candidates_unique(
        self, method: VotingMethod, model3: CovarianceModel, rng: RngStream
    ) -> None:
        hist = winning_set_distribution(method, model3, 3_000, rng)
        assert hist.counts == {1: 3_000}
        assert hist.multiple_winners().p_hat == 0.0

    def test_counts_total(self, model5: CovarianceModel, rng: RngStream) -> None:
        hist = winning_set_distribution("splitcycle", model5, 4_000, rng, shards=2)
        assert sum(hist.counts.values()) == 4_000
        assert hist.shards == 2
        assert hist.method is VotingMethod.SPLIT_CYCLE
        assert min(hist.counts) >= 1

    def test_reproducible(self, model4: CovarianceModel) -> None:
        a = winning_set_distribution("minimax", model4, 2_000, RngStream(3), shards=2)
        b = winning_set_distribution("minimax", model4, 2_000, RngStream(3), shards=2)
        assert a.counts == b.counts

    def test_unknown_method(self, model4: CovarianceModel, rng: RngStream) -> None:
        with pytest.raises(DomainError):
            winning_set_distribution("borda", model4, 10, rng)


@pytest.mark.slow
class TestAcceptance:
    def test_split_cycle_five(self, model5: CovarianceModel) -> None:
        hist = winning_set_distribution(
            "splitcycle", model5, 1_000_000, RngStream(42), shards=4
        )
        assert 100 * hist.estimate(1).p_hat == pytest.approx(96.7964, abs=0.2)
        assert 100 * hist.multiple_winners().p_hat == pytest.approx(3.2036, abs=0.2)

    @pytest.mark.parametrize(
        ("ell", "percent", "tol"), [(7, 7.8150, 0.25), (10, 14.7409, 0.35)]
    )
    def test_split_cycle_multiple_winners(
        self, ell: int, percent: float, tol: float
    ) -> None:
        hist = winning_set_distribution(
            "splitcycle", covariance(ell), 1_000_000, RngStream(42), shards=4
        )
        assert 100 * hist.multiple_winners().p_hat == pytest.approx(percent, abs=tol)

    def test_four_candidate_witnesses(self, model4: CovarianceModel) -> None:
        loser = estimate_event(
            model4, 1_000_000, RngStream(42), minimax_condorcet_loser_event, shards=4
        )
        tied = estimate_event(
            model4, 1_000_000, RngStream(42), multiple_winners_event, shards=4
        )
        assert loser.p_hat > 0.0
        assert tied.p_hat > 0.0
