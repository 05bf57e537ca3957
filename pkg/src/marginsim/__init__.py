"""marginsim: margin graphs of random elections under Impartial Culture.

Quick start::

    from marginsim import RngStream, covariance, estimate_event
    from marginsim import condorcet_winner_event

    model = covariance(5)
    est = estimate_event(model, 100_000, RngStream(42), condorcet_winner_event)
    print(f"{est.p_hat:.4f} +/- {est.std_err:.4f}")
"""

from marginsim.ic_model import covariance, density, precision, spectral_factor_apply
from marginsim.models import (
    Ballot,
    CovarianceModel,
    DomainError,
    EdgeVector,
    MarginGraph,
    MarginsimError,
    ProbEstimate,
    Profile,
    QualitativeMarginGraph,
    TieError,
    Tournament,
    TournamentType,
    TypeProbTable,
    UnsupportedSizeError,
    VotingMethod,
    WinningSet,
)
from marginsim.probability import (
    condorcet_winner_event,
    estimate_event,
    estimate_type_table,
    exact_finite_prob,
    orthant_exact_3,
)
from marginsim.sampling import RngStream, sample_margin_clt, sample_margin_exact
from marginsim.tournaments import enumerate_types, qualitative_of, tournament_of
from marginsim.voting import minimax_winners, split_cycle_winners

__all__ = [
    "Ballot",
    "CovarianceModel",
    "DomainError",
    "EdgeVector",
    "MarginGraph",
    "MarginsimError",
    "ProbEstimate",
    "Profile",
    "QualitativeMarginGraph",
    "RngStream",
    "TieError",
    "Tournament",
    "TournamentType",
    "TypeProbTable",
    "UnsupportedSizeError",
    "VotingMethod",
    "WinningSet",
    "condorcet_winner_event",
    "covariance",
    "density",
    "enumerate_types",
    "estimate_event",
    "estimate_type_table",
    "exact_finite_prob",
    "minimax_winners",
    "orthant_exact_3",
    "precision",
    "qualitative_of",
    "sample_margin_clt",
    "sample_margin_exact",
    "spectral_factor_apply",
    "split_cycle_winners",
    "tournament_of",
]

__version__ = "0.1.0"
