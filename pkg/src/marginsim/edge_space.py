"""The edge space of the complete graph K_l and its cycle/cut decomposition.

Every pair of candidates ``i < j`` is an oriented edge ``i -> j``. Edges
are numbered lexicographically, ``(1,2), (1,3), ..., (1,l), (2,3), ...``,
and a labeling stores one value per edge; the reverse orientation carries
the negated value.

The cut space is the image of the transpose of the vertex/edge incidence
matrix and the cycle space is its orthogonal complement. Projection onto
the cut space only needs vertex flows::

    z_(i,j) = (flow(i) - flow(j)) / l

Array helpers (``*_array``) accept a single coordinate vector or a batch
of shape ``(m, k)`` and are what the samplers call in their hot loops.
"""

from __future__ import annotations

from functools import lru_cache
from itertools import combinations

import numpy as np
from numpy.typing import NDArray

from marginsim.models import DomainError, EdgeVector, check_ell, num_edges

# ---------------------------------------------------------------------------
# Indexing
# ---------------------------------------------------------------------------


def edge_index(i: int, j: int, ell: int) -> tuple[int, int]:
    """Flat index and orientation sign of the edge ``i -> j``.

    Args:
        i: Source candidate ordinal (1-based).
        j: Target candidate ordinal (1-based).
        ell: Number of candidates.

    Returns:
        ``(flat, sign)`` with ``sign = +1`` if ``i < j`` else ``-1``.

    Raises:
        DomainError: If ``i == j`` or either ordinal is out of range.

    Examples:
        >>> edge_index(1, 2, 4)
        (0, 1)
        >>> edge_index(2, 1, 4)
        (0, -1)
        >>> edge_index(3, 4, 4)
        (5, 1)
    """
    if not (1 <= i <= ell and 1 <= j <= ell):
        msg = f"Candidate ordinals must be in 1..{ell}, got ({i}, {j})"
        raise DomainError(msg)
    if i == j:
        msg = f"No edge from candidate {i} to itself"
        raise DomainError(msg)
    a, b = (i, j) if i < j else (j, i)
    flat = (a - 1) * (2 * ell - a) // 2 + (b - a - 1)
    return flat, 1 if i < j else -1


@lru_cache(maxsize=None)
def edge_pairs(ell: int) -> tuple[tuple[int, int], ...]:
    """All pairs ``(i, j)``, ``i < j``, in flat-index order."""
    check_ell(ell)
    return tuple(combinations(range(1, ell + 1), 2))


@lru_cache(maxsize=None)
def endpoints(ell: int) -> tuple[NDArray[np.intp], NDArray[np.intp]]:
    """0-based tail and head vertex of every edge, as read-only arrays."""
    pairs = np.array(edge_pairs(ell), dtype=np.intp) - 1
    tails = pairs[:, 0].copy()
    heads = pairs[:, 1].copy()
    tails.setflags(write=False)
    heads.setflags(write=False)
    return tails, heads


@lru_cache(maxsize=None)
def incidence(ell: int) -> NDArray[np.int64]:
    """Vertex/edge incidence matrix ``D`` (``l x k``): +1 at tails, -1 at heads."""
    tails, heads = endpoints(ell)
    k = num_edges(ell)
    d = np.zeros((ell, k), dtype=np.int64)
    d[tails, np.arange(k)] = 1
    d[heads, np.arange(k)] = -1
    d.setflags(write=False)
    return d


# ---------------------------------------------------------------------------
# Flows and projections
# ---------------------------------------------------------------------------


def flow(x: EdgeVector, v: int) -> float:
    """Net flow out of candidate ``v``: ``sum_{j != v} x_(v,j)``.

    Examples:
        >>> flow(EdgeVector.from_edges(3, {(1, 2): 1, (1, 3): 1}), 1)
        2.0
    """
    if not 1 <= v <= x.ell:
        msg = f"Candidate ordinal must be in 1..{x.ell}, got {v}"
        raise DomainError(msg)
    return float(sum(x.get(v, j) for j in range(1, x.ell + 1) if j != v))


def flows_array(values: NDArray[np.float64], ell: int) -> NDArray[np.float64]:
    """Vertex flows of one labeling ``(k,)`` or a batch ``(m, k)``."""
    values = np.asarray(values, dtype=np.float64)
    if values.ndim == 1:
        tails, heads = endpoints(ell)
        out = np.bincount(tails, weights=values, minlength=ell)
        out -= np.bincount(heads, weights=values, minlength=ell)
        return out
    return values @ incidence(ell).T.astype(np.float64)


def project_cut_array(values: NDArray[np.float64], ell: int) -> NDArray[np.float64]:
    """Cut-space component of one labeling or a batch of labelings."""
    values = np.asarray(values, dtype=np.float64)
    _check_width(values, ell)
    f = flows_array(values, ell)
    tails, heads = endpoints(ell)
    result: NDArray[np.float64] = (f[..., tails] - f[..., heads]) / ell
    return result


def project_cut(x: EdgeVector) -> EdgeVector:
    """Orthogonal projection onto the cut space.

    Returns ``z`` with ``z_(i,j) = (flow(i) - flow(j)) / l``; ``x - z`` lies
    in the cycle space.
    """
    return EdgeVector.from_array(x.ell, project_cut_array(x.to_array(), x.ell))


def project_cycle(x: EdgeVector) -> EdgeVector:
    """Orthogonal projection onto the cycle space, ``x - project_cut(x)``."""
    return x - project_cut(x)


def cut_norm_sq(x: EdgeVector) -> float:
    """Squared norm of the cut part, from the edge values alone.

    Evaluates ``(2/l) * (sum_e x_e^2 + sum x_(v,j) x_(v,k))`` where the
    second sum runs over every vertex ``v`` and unordered pair of other
    vertices ``{j, k}``, both edges read as leaving ``v``.
    """
    ell = x.ell
    squares = x.norm_sq()
    shared = 0.0
    for v in range(1, ell + 1):
        others = [u for u in range(1, ell + 1) if u != v]
        for j, k in combinations(others, 2):
            shared += x.get(v, j) * x.get(v, k)
    return 2.0 / ell * (squares + shared)


# ---------------------------------------------------------------------------
# Bases
# ---------------------------------------------------------------------------


def fundamental_cycle_basis(ell: int) -> list[EdgeVector]:
    """Fundamental cycles of the star spanning tree rooted at candidate 1.

    One vector ``e(1,i) + e(i,j) - e(1,j)`` per ``2 <= i < j <= l``,
    ``(l-1)(l-2)/2`` in total.
    """
    check_ell(ell)
    return [
        EdgeVector.from_edges(ell, {(1, i): 1.0, (i, j): 1.0, (j, 1): 1.0})
        for i, j in combinations(range(2, ell + 1), 2)
    ]


def star_cut_basis(ell: int) -> list[EdgeVector]:
    """Star cuts ``sum_{j != i} e(i,j)`` for ``i = 2..l``."""
    check_ell(ell)
    return [
        EdgeVector.from_edges(ell, {(i, j): 1.0 for j in range(1, ell + 1) if j != i})
        for i in range(2, ell + 1)
    ]


def _check_width(values: NDArray[np.float64], ell: int) -> None:
    if values.shape[-1] != num_edges(ell):
        msg = (
            f"Expected {num_edges(ell)} coordinates for ell={ell}, "
            f"got {values.shape[-1]}"
        )
        raise DomainError(msg)
