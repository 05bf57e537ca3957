"""Shared test fixtures for marginsim."""

from __future__ import annotations

import pytest

from marginsim.ic_model import covariance
from marginsim.models import CovarianceModel, EdgeVector, MarginGraph
from marginsim.sampling import RngStream

# Candidates A, B, C, D are 1, 2, 3, 4.
MINIMAX_EXAMPLE_EDGES = {
    (1, 2): 7,
    (1, 4): 3,
    (2, 3): 9,
    (2, 4): 1,
    (3, 1): 11,
    (3, 4): 5,
}


def _float_edges() -> dict[tuple[int, int], float]:
    return {k: float(v) for k, v in MINIMAX_EXAMPLE_EDGES.items()}


@pytest.fixture()
def minimax_example() -> EdgeVector:
    """A 4-candidate margin graph where Minimax and Split Cycle disagree."""
    return EdgeVector.from_edges(4, _float_edges())


@pytest.fixture()
def minimax_example_graph() -> MarginGraph:
    """The same margins as an integer margin graph with 11 voters."""
    ev = EdgeVector.from_edges(4, _float_edges())
    return MarginGraph(ell=4, margins=tuple(int(c) for c in ev.coords), voters=11)


@pytest.fixture()
def three_cycle() -> EdgeVector:
    """1 -> 2 -> 3 -> 1 with unit margins."""
    return EdgeVector.from_edges(3, {(1, 2): 1.0, (2, 3): 1.0, (3, 1): 1.0})


@pytest.fixture()
def transitive4() -> EdgeVector:
    """1 > 2 > 3 > 4 with distinct margins."""
    return EdgeVector(ell=4, coords=(6.0, 5.0, 4.0, 3.0, 2.0, 1.0))


@pytest.fixture()
def model3() -> CovarianceModel:
    return covariance(3)


@pytest.fixture()
def model4() -> CovarianceModel:
    return covariance(4)


@pytest.fixture()
def model5() -> CovarianceModel:
    return covariance(5)


@pytest.fixture()
def rng() -> RngStream:
    return RngStream(42)
