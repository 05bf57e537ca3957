"""Margin-based voting methods: Minimax and Split Cycle.

Both methods read only the margin graph. A zero margin is not a defeat.
Batch functions take labelings of shape ``(m, k)`` and return a boolean
winner mask of shape ``(m, l)``; the single-graph functions wrap them.

Split Cycle uses the widest-path form of its defeat relation: ``b``
defeats ``a`` when ``Margin(b, a) > 0`` and ``Margin(b, a)`` is strictly
larger than the strength of the strongest path from ``a`` back to ``b``,
where a path's strength is its weakest positive margin.
"""

from __future__ import annotations

from collections import Counter

import numpy as np
from loguru import logger
from numpy.typing import NDArray

from marginsim.config import VOTING_BATCH_CELLS
from marginsim.edge_space import endpoints
from marginsim.models import (
    CovarianceModel,
    DomainError,
    EdgeVector,
    MarginGraph,
    SizeHistogram,
    VotingMethod,
    WinningSet,
)
from marginsim.sampling import RngStream, iter_clt_batches, run_sharded


def margin_matrices(values: NDArray[np.float64], ell: int) -> NDArray[np.float64]:
    """Antisymmetric ``(m, l, l)`` margin matrices, ``M[a, b] = Margin(a, b)``."""
    values = np.atleast_2d(np.asarray(values, dtype=np.float64))
    tails, heads = endpoints(ell)
    m = np.zeros((values.shape[0], ell, ell), dtype=np.float64)
    m[:, tails, heads] = values
    m[:, heads, tails] = -values
    return m


def minimax_mask(values: NDArray[np.float64], ell: int) -> NDArray[np.bool_]:
    """Minimax winners: smallest greatest margin of defeat."""
    positive = np.maximum(margin_matrices(values, ell), 0.0)
    worst_defeat = positive.max(axis=1)
    mask: NDArray[np.bool_] = worst_defeat == worst_defeat.min(axis=1, keepdims=True)
    return mask


def widest_paths(positive: NDArray[np.float64]) -> NDArray[np.float64]:
    """All-pairs widest-path strengths over a batch of non-negative matrices.

    ``S[a, b]`` is the largest, over directed paths from ``a`` to ``b``, of
    the smallest edge weight on the path; 0 when no path exists.
    """
    strength = positive.copy()
    for k in range(strength.shape[-1]):
        via = np.minimum(strength[:, :, k : k + 1], strength[:, k : k + 1, :])
        np.maximum(strength, via, out=strength)
    return strength


def split_cycle_mask(values: NDArray[np.float64], ell: int) -> NDArray[np.bool_]:
    """Split Cycle winners: candidates no one defeats."""
    m = margin_matrices(values, ell)
    strength = widest_paths(np.maximum(m, 0.0))
    # defeats[:, b, a]: b defeats a; strength is read from a back to b.
    defeats = (m > 0) & (m > np.swapaxes(strength, 1, 2))
    mask: NDArray[np.bool_] = ~defeats.any(axis=1)
    return mask


def winner_mask(
    method: VotingMethod, values: NDArray[np.float64], ell: int
) -> NDArray[np.bool_]:
    """Dispatch to the batch winner mask of ``method``."""
    if method is VotingMethod.MINIMAX:
        return minimax_mask(values, ell)
    return split_cycle_mask(values, ell)


def _as_values(x: EdgeVector | MarginGraph) -> NDArray[np.float64]:
    if isinstance(x, MarginGraph):
        return np.asarray(x.margins, dtype=np.float64)
    return x.to_array()


def _winning_set(method: VotingMethod, x: EdgeVector | MarginGraph) -> WinningSet:
    mask = winner_mask(method, _as_values(x), x.ell)[0]
    winners = tuple(int(v) + 1 for v in np.flatnonzero(mask))
    return WinningSet(winners=winners, method=method)


def minimax_winners(x: EdgeVector | MarginGraph) -> WinningSet:
    """Candidates whose greatest margin of defeat is the least.

    Examples:
        >>> g = EdgeVector.from_edges(3, {(1, 2): 1, (2, 3): 1, (3, 1): 1})
        >>> minimax_winners(g).winners
        (1, 2, 3)
    """
    return _winning_set(VotingMethod.MINIMAX, x)


def split_cycle_winners(x: EdgeVector | MarginGraph) -> WinningSet:
    """Candidates undefeated once every majority cycle is split at its weakest edges."""
    return _winning_set(VotingMethod.SPLIT_CYCLE, x)


def parse_method(method: VotingMethod | str) -> VotingMethod:
    """Normalize a method tag.

    Raises:
        DomainError: If the tag names no supported method.
    """
    if isinstance(method, VotingMethod):
        return method
    try:
        return VotingMethod(method)
    except ValueError:
        known = ", ".join(m.value for m in VotingMethod.all())
        msg = f"Unknown voting method {method!r}; expected one of: {known}"
        raise DomainError(msg) from None


# ---------------------------------------------------------------------------
# Batch events
# ---------------------------------------------------------------------------


def minimax_condorcet_loser_event(
    values: NDArray[np.float64], ell: int
) -> NDArray[np.bool_]:
    """Minimax picks a unique winner who loses to every other candidate."""
    mask = minimax_mask(values, ell)
    unique = mask.sum(axis=1) == 1
    m = margin_matrices(values, ell)
    # Row a all negative off the diagonal: a loses every contest.
    off_diag = ~np.eye(ell, dtype=bool)
    loser = np.all((m < 0) | ~off_diag, axis=2)
    result: NDArray[np.bool_] = unique & np.any(mask & loser, axis=1)
    return result


def multiple_winners_event(
    values: NDArray[np.float64],
    ell: int,
    method: VotingMethod = VotingMethod.SPLIT_CYCLE,
) -> NDArray[np.bool_]:
    """The method returns more than one winner."""
    result: NDArray[np.bool_] = winner_mask(method, values, ell).sum(axis=1) > 1
    return result


# ---------------------------------------------------------------------------
# Winning-set experiments
# ---------------------------------------------------------------------------


def voting_batch_size(ell: int) -> int:
    """Rows per batch so the margin matrices stay within a fixed cell budget."""
    return max(1, VOTING_BATCH_CELLS // (ell * ell))


def winning_set_distribution(
    method: VotingMethod | str,
    model: CovarianceModel,
    samples: int,
    rng: RngStream,
    *,
    shards: int = 1,
) -> SizeHistogram:
    """Histogram of winning-set sizes over CLT margin graphs.

    With ``shards > 1`` the draws come from streams ``RngStream(rng.seed, i)``
    and the counts are merged in shard order.

    Raises:
        DomainError: If ``method`` is not a supported tag.
    """
    tag = parse_method(method)
    batch_size = voting_batch_size(model.ell)

    def worker(stream: RngStream, count: int) -> Counter[int]:
        sizes: Counter[int] = Counter()
        for batch in iter_clt_batches(stream, model, count, batch_size):
            per_draw = winner_mask(tag, batch, model.ell).sum(axis=1)
            values, counts = np.unique(per_draw, return_counts=True)
            sizes.update(dict(zip(values.tolist(), counts.tolist())))
        return sizes

    total: Counter[int] = Counter()
    for part in run_sharded(rng, samples, shards, worker):
        total.update(part)
    logger.info(
        f"{tag.value}: {samples} draws at ell={model.ell}, "
        f"{samples - total.get(1, 0)} with multiple winners"
    )
    return SizeHistogram(
        method=tag,
        ell=model.ell,
        counts=dict(sorted(total.items())),
        samples=samples,
        seed=rng.seed,
        shards=shards,
    )
