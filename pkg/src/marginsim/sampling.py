"""Random ballots, profiles, and margin graphs under Impartial Culture.

Two samplers produce margin graphs:

- :func:`sample_margin_exact` tallies ``n`` uniform ballots, streamed in
  chunks so the profile is never stored.
- :func:`sample_margin_clt` draws the large-``n`` limit ``Y ~ N(0, Sigma)``
  as ``A Z`` for a vector ``Z`` of independent standard normals. ``Y`` is
  the ``sqrt(n)``-normalized margin vector; it is not scaled back up.

Random streams are numpy ``PCG64`` generators keyed by
``SeedSequence(seed, spawn_key=(stream_id,))``. Normal variates come from
``Generator.standard_normal`` (ziggurat) and ballots from
``Generator.permuted``; both are fixed for a given numpy major version,
so pinned seeds reproduce exactly.
"""

from __future__ import annotations

from collections.abc import Callable, Iterator
from concurrent.futures import ThreadPoolExecutor
from typing import TypeVar

import numpy as np
from loguru import logger
from numpy.typing import NDArray

from marginsim.config import BATCH_CELLS, BATCH_SIZE, VOTER_CHUNK
from marginsim.edge_space import endpoints
from marginsim.ic_model import spectral_factor_array
from marginsim.models import (
    Ballot,
    CovarianceModel,
    DomainError,
    EdgeVector,
    MarginGraph,
    Profile,
    check_ell,
)

_T = TypeVar("_T")

_UINT64_MAX = 2**64 - 1


class RngStream:
    """A seeded random stream; output is a pure function of ``(seed, stream_id)``.

    A stream holds mutable generator state and must be used by one worker
    at a time. Distinct ``stream_id`` values give independent streams.

    Attributes:
        seed: Master seed (64-bit).
        stream_id: Stream index (64-bit), the shard number in sharded runs.
        generator: The underlying numpy generator.
    """

    def __init__(self, seed: int, stream_id: int = 0) -> None:
        for name, value in (("seed", seed), ("stream_id", stream_id)):
            if not 0 <= value <= _UINT64_MAX:
                msg = f"{name} must be a 64-bit unsigned value, got {value}"
                raise DomainError(msg)
        self.seed = seed
        self.stream_id = stream_id
        sequence = np.random.SeedSequence(seed, spawn_key=(stream_id,))
        self.generator = np.random.Generator(np.random.PCG64(sequence))

    def spawn(self, shards: int) -> list[RngStream]:
        """Independent streams ``0..shards-1`` under the same master seed."""
        return [RngStream(self.seed, i) for i in range(shards)]

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id})"


# ---------------------------------------------------------------------------
# Ballots and profiles
# ---------------------------------------------------------------------------


def sample_ballot(rng: RngStream, ell: int) -> Ballot:
    """A uniformly random ranking of ``ell`` candidates."""
    check_ell(ell)
    return Ballot(ranking=tuple((rng.generator.permutation(ell) + 1).tolist()))


def sample_profile(rng: RngStream, n: int, ell: int) -> Profile:
    """``n`` independent uniform ballots."""
    if n < 1:
        msg = f"A profile needs at least one voter, got {n}"
        raise DomainError(msg)
    return Profile(ell=ell, ballots=tuple(sample_ballot(rng, ell) for _ in range(n)))


def _tally_positions(positions: NDArray[np.intp], ell: int) -> NDArray[np.int64]:
    """Margins from a ``(voters, l)`` array of ballot positions (0 = top)."""
    tails, heads = endpoints(ell)
    wins = (positions[:, tails] < positions[:, heads]).sum(axis=0, dtype=np.int64)
    result: NDArray[np.int64] = 2 * wins - positions.shape[0]
    return result


def margin_graph(p: Profile) -> MarginGraph:
    """Tally a profile into its margin graph.

    ``Margin(c_i, c_j)`` is the number of voters ranking ``i`` above ``j``
    minus the number ranking ``j`` above ``i``.
    """
    rankings = np.array([b.ranking for b in p.ballots], dtype=np.intp) - 1
    positions = np.argsort(rankings, axis=1)
    margins = _tally_positions(positions, p.ell)
    return MarginGraph(ell=p.ell, margins=tuple(margins.tolist()), voters=p.voters)


# ---------------------------------------------------------------------------
# Margin graph samplers
# ---------------------------------------------------------------------------


def exact_margins_array(rng: RngStream, n: int, ell: int) -> NDArray[np.int64]:
    """Integer margins of ``n`` uniform ballots, tallied chunk by chunk."""
    margins = np.zeros(ell * (ell - 1) // 2, dtype=np.int64)
    base = np.arange(ell, dtype=np.intp)
    remaining = n
    while remaining:
        chunk = min(remaining, VOTER_CHUNK)
        # A uniform permutation read as positions is itself a uniform ballot.
        positions = rng.generator.permuted(np.tile(base, (chunk, 1)), axis=1)
        margins += _tally_positions(positions, ell)
        remaining -= chunk
    return margins


def sample_margin_exact(rng: RngStream, n: int, ell: int) -> MarginGraph:
    """Margin graph of ``n`` i.i.d. uniform ballots, without storing them.

    Raises:
        DomainError: If ``n`` is not a positive odd number.
    """
    check_ell(ell)
    if n < 1 or n % 2 == 0:
        msg = f"Number of voters must be odd, got {n}"
        raise DomainError(msg)
    margins = exact_margins_array(rng, n, ell)
    return MarginGraph(ell=ell, margins=tuple(margins.tolist()), voters=n)


def sample_margin_clt_batch(
    rng: RngStream, model: CovarianceModel, size: int
) -> NDArray[np.float64]:
    """``size`` draws of ``Y ~ N(0, Sigma)`` as rows of a ``(size, k)`` array."""
    w = rng.generator.standard_normal((size, model.dim))
    return spectral_factor_array(model, w)


def sample_margin_clt(rng: RngStream, model: CovarianceModel) -> EdgeVector:
    """One draw of the limiting normalized margin vector ``Y = A Z``."""
    return EdgeVector.from_array(model.ell, sample_margin_clt_batch(rng, model, 1)[0])


def batch_rows(dim: int) -> int:
    """Rows per batch for ``dim`` edges, within the :data:`BATCH_CELLS` budget.

    >>> batch_rows(10), batch_rows(2016)
    (50000, 992)
    """
    return max(1, min(BATCH_SIZE, BATCH_CELLS // dim))


def iter_clt_batches(
    rng: RngStream,
    model: CovarianceModel,
    count: int,
    batch_size: int | None = None,
) -> Iterator[NDArray[np.float64]]:
    """Yield ``count`` CLT draws in batches of at most ``batch_size`` rows.

    The default batch is :func:`batch_rows` of the model's edge count.
    """
    if batch_size is None:
        batch_size = batch_rows(model.dim)
    remaining = count
    while remaining > 0:
        size = min(remaining, batch_size)
        yield sample_margin_clt_batch(rng, model, size)
        remaining -= size


# ---------------------------------------------------------------------------
# Sharding
# ---------------------------------------------------------------------------


def shard_counts(samples: int, shards: int) -> list[int]:
    """Split ``samples`` across ``shards``; earlier shards take the remainder.

    >>> shard_counts(10, 4)
    [3, 3, 2, 2]
    """
    if samples < 1 or shards < 1:
        msg = f"samples and shards must be positive, got {samples} and {shards}"
        raise DomainError(msg)
    base, extra = divmod(samples, shards)
    return [base + (1 if i < extra else 0) for i in range(shards)]


def map_shards(
    seed: int,
    samples: int,
    shards: int,
    worker: Callable[[RngStream, int], _T],
) -> list[_T]:
    """Run ``worker(stream, count)`` on every shard; results in shard order.

    Shard ``i`` draws from ``RngStream(seed, i)``, so results depend on
    ``(seed, shards)`` and not on thread scheduling.
    """
    counts = shard_counts(samples, shards)
    streams = RngStream(seed).spawn(shards)
    logger.debug(f"Dispatching {samples} samples over {shards} shards (seed={seed})")
    if shards == 1:
        return [worker(streams[0], counts[0])]
    with ThreadPoolExecutor(max_workers=shards) as pool:
        futures = [pool.submit(worker, s, c) for s, c in zip(streams, counts) if c > 0]
        return [f.result() for f in futures]


def run_sharded(
    rng: RngStream,
    samples: int,
    shards: int,
    worker: Callable[[RngStream, int], _T],
) -> list[_T]:
    """Run ``worker`` on ``rng`` alone, or over ``shards`` streams keyed by its seed."""
    if shards == 1:
        return [worker(rng, samples)]
    return map_shards(rng.seed, samples, shards, worker)
