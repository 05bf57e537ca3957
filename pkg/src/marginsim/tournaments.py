"""Tournaments as sign patterns of margin graphs.

A tournament is stored as one direction bit per candidate pair in
lexicographic pair order; bit ``e`` is set when the smaller candidate of
pair ``e`` wins. Isomorphism types are found by brute force over all
relabelings, which is fine up to seven candidates.
"""

from __future__ import annotations

from collections.abc import Sequence
from functools import lru_cache
from itertools import permutations

import numpy as np
from numpy.typing import NDArray

from marginsim.config import MAX_CANONICAL_CANDIDATES, MAX_ENUMERATE_CANDIDATES
from marginsim.edge_space import edge_index, edge_pairs, endpoints
from marginsim.models import (
    DomainError,
    EdgeVector,
    MarginGraph,
    QualitativeMarginGraph,
    TieError,
    Tournament,
    TournamentType,
    UnsupportedSizeError,
    check_ell,
    num_edges,
)

# Largest pair count whose direction bits fit in a signed 64-bit code.
_MAX_CODE_EDGES = 62


def _coords(x: EdgeVector | MarginGraph) -> tuple[float, ...]:
    if isinstance(x, MarginGraph):
        return tuple(float(m) for m in x.margins)
    return x.coords


# ---------------------------------------------------------------------------
# Classification
# ---------------------------------------------------------------------------


def tournament_of(x: EdgeVector | MarginGraph) -> Tournament:
    """The majority graph: each pair points the way its margin's sign does.

    Raises:
        TieError: If any coordinate is exactly zero.
    """
    coords = _coords(x)
    bits = 0
    for e, value in enumerate(coords):
        if value == 0:
            i, j = edge_pairs(x.ell)[e]
            msg = f"Zero margin between candidates {i} and {j}"
            raise TieError(msg)
        if value > 0:
            bits |= 1 << e
    return Tournament(ell=x.ell, bits=bits)


def qualitative_of(x: EdgeVector | MarginGraph) -> QualitativeMarginGraph:
    """The tournament plus the edges ranked by absolute margin, smallest first.

    Raises:
        TieError: If a margin is zero or two absolute margins are equal.
    """
    tournament = tournament_of(x)
    magnitudes = [abs(v) for v in _coords(x)]
    order = sorted(range(len(magnitudes)), key=magnitudes.__getitem__)
    for lo, hi in zip(order, order[1:]):
        if magnitudes[lo] == magnitudes[hi]:
            pairs = edge_pairs(x.ell)
            msg = f"Equal absolute margins on pairs {pairs[lo]} and {pairs[hi]}"
            raise TieError(msg)
    rank = [0] * len(order)
    for r, e in enumerate(order):
        rank[e] = r
    return QualitativeMarginGraph(tournament=tournament, edge_rank=tuple(rank))


def tournament_codes(values: NDArray[np.float64]) -> NDArray[np.int64]:
    """Direction bits of a batch ``(m, k)`` of labelings as integer codes.

    Zero coordinates count as a win for the larger candidate.

    Raises:
        UnsupportedSizeError: If the pairs do not fit in a 64-bit code.
    """
    values = np.atleast_2d(np.asarray(values, dtype=np.float64))
    k = values.shape[1]
    if k > _MAX_CODE_EDGES:
        msg = f"Cannot pack {k} direction bits into an integer code"
        raise UnsupportedSizeError(msg)
    weights = np.left_shift(np.int64(1), np.arange(k, dtype=np.int64))
    codes: NDArray[np.int64] = (values > 0).astype(np.int64) @ weights
    return codes


def out_degrees_array(values: NDArray[np.float64], ell: int) -> NDArray[np.int64]:
    """Out-degree of every candidate for a batch ``(m, k)`` of labelings."""
    values = np.atleast_2d(np.asarray(values, dtype=np.float64))
    tails, heads = endpoints(ell)
    wins = (values > 0).astype(np.int64)
    out = np.zeros((values.shape[0], ell), dtype=np.int64)
    for e in range(values.shape[1]):
        out[:, tails[e]] += wins[:, e]
        out[:, heads[e]] += 1 - wins[:, e]
    return out


# ---------------------------------------------------------------------------
# Invariants of a single tournament
# ---------------------------------------------------------------------------


def in_degrees(t: Tournament) -> list[int]:
    """In-degree of each candidate, indexed from candidate 1."""
    return [t.ell - 1 - d for d in t.out_degrees()]


def linearity(t: Tournament) -> int:
    """Sum of squared out-degrees (equal to the sum of squared in-degrees).

    >>> linearity(Tournament(ell=3, bits=0b111))
    5
    """
    return sum(d * d for d in t.out_degrees())


def score_sequence(t: Tournament) -> tuple[int, ...]:
    """Out-degrees sorted in descending order."""
    return tuple(sorted(t.out_degrees(), reverse=True))


def second_order_scores(t: Tournament) -> tuple[int, ...]:
    """For each candidate the summed scores of the candidates it beats, descending.

    Separates the two five-candidate types with scores ``(3, 3, 2, 1, 1)``:
    ``(5, 4, 4, 2, 1)`` for the one whose upsets form two short cycles and
    ``(6, 4, 3, 2, 1)`` for a linear order with its first and last swapped.
    """
    scores = t.out_degrees()
    sums = [
        sum(scores[u - 1] for u in range(1, t.ell + 1) if u != v and t.beats(v, u))
        for v in range(1, t.ell + 1)
    ]
    return tuple(sorted(sums, reverse=True))


def is_transitive(t: Tournament) -> bool:
    """Whether the majority relation is a linear order."""
    return score_sequence(t) == tuple(range(t.ell - 1, -1, -1))


def condorcet_winner(t: Tournament) -> int | None:
    """The candidate who beats every other candidate, if there is one."""
    for v, d in enumerate(t.out_degrees(), start=1):
        if d == t.ell - 1:
            return v
    return None


def condorcet_loser(t: Tournament) -> int | None:
    """The candidate who loses to every other candidate, if there is one."""
    for v, d in enumerate(t.out_degrees(), start=1):
        if d == 0:
            return v
    return None


def same_direction_pairs(t: Tournament) -> int:
    """Count ordered pairs of distinct edges at a common vertex pointing alike.

    For each vertex ``v`` and ordered pair ``j != k`` of other vertices the
    pair counts when ``v -> j`` and ``v -> k`` are both outgoing or both
    incoming. These are the positive cross terms of the cut-norm expansion
    on the orthant of ``t``.
    """
    count = 0
    for v in range(1, t.ell + 1):
        others = [u for u in range(1, t.ell + 1) if u != v]
        for j in others:
            for k in others:
                if j != k and t.beats(v, j) == t.beats(v, k):
                    count += 1
    return count


def positive_term_identity(t: Tournament) -> int:
    """Closed form of :func:`same_direction_pairs`: ``2 lin(t) - l(l-1)``."""
    return 2 * linearity(t) - t.ell * (t.ell - 1)


# ---------------------------------------------------------------------------
# Relabeling and isomorphism
# ---------------------------------------------------------------------------


def dual(t: Tournament) -> Tournament:
    """Reverse every edge."""
    return Tournament(ell=t.ell, bits=t.bits ^ ((1 << num_edges(t.ell)) - 1))


def _relabel_map(perm: Sequence[int], ell: int) -> tuple[tuple[int, ...], int]:
    """Target pair of every edge under ``perm`` and the mask of flipped edges."""
    targets: list[int] = []
    flips = 0
    for e, (i, j) in enumerate(edge_pairs(ell)):
        flat, sign = edge_index(perm[i - 1], perm[j - 1], ell)
        targets.append(flat)
        if sign < 0:
            flips |= 1 << e
    return tuple(targets), flips


@lru_cache(maxsize=None)
def _all_relabel_maps(ell: int) -> tuple[tuple[tuple[int, ...], int], ...]:
    return tuple(_relabel_map(p, ell) for p in permutations(range(1, ell + 1)))


def _apply_map(bits: int, mapping: tuple[tuple[int, ...], int]) -> int:
    targets, flips = mapping
    bits ^= flips
    out = 0
    for e, target in enumerate(targets):
        if bits >> e & 1:
            out |= 1 << target
    return out


def relabel(t: Tournament, perm: Sequence[int]) -> Tournament:
    """Rename candidate ``v`` to ``perm[v - 1]``.

    Raises:
        DomainError: If ``perm`` is not a permutation of ``1..l``.
    """
    if sorted(perm) != list(range(1, t.ell + 1)):
        msg = f"Relabeling must be a permutation of 1..{t.ell}, got {tuple(perm)}"
        raise DomainError(msg)
    return Tournament(ell=t.ell, bits=_apply_map(t.bits, _relabel_map(perm, t.ell)))


def _bit_string(bits: int, k: int) -> str:
    return "".join("1" if bits >> e & 1 else "0" for e in range(k))


def canonical_form(t: Tournament) -> str:
    """Lexicographically smallest bit string over all relabelings.

    Two tournaments are isomorphic exactly when their canonical forms match.

    Raises:
        UnsupportedSizeError: If ``ell`` exceeds 7.
    """
    if t.ell > MAX_CANONICAL_CANDIDATES:
        msg = (
            f"Canonical forms are limited to {MAX_CANONICAL_CANDIDATES} "
            f"candidates, got {t.ell}"
        )
        raise UnsupportedSizeError(msg)
    k = num_edges(t.ell)
    return min(_bit_string(_apply_map(t.bits, m), k) for m in _all_relabel_maps(t.ell))


_OrderKey = tuple[int, int, tuple[int, ...], int, tuple[int, ...], str]

# Printed numbering of the five-candidate types by list position: the
# 3,2,2,2,1 group is listed as T11, T9, T10.
TYPE_NUMBERING: dict[int, tuple[int, ...]] = {
    5: (1, 2, 3, 4, 5, 6, 7, 8, 11, 9, 10, 12),
}


def _type_order_key(tt: TournamentType, t: Tournament) -> _OrderKey:
    return (
        -tt.linearity,
        -tt.score_sequence[0],
        tt.score_sequence[1:],
        -tt.labelings,
        second_order_scores(t),
        tt.canonical,
    )


@lru_cache(maxsize=None)
def _classify(ell: int) -> tuple[tuple[TournamentType, ...], NDArray[np.intp]]:
    k = num_edges(ell)
    maps = _all_relabel_maps(ell)
    orbit_of = np.full(1 << k, -1, dtype=np.intp)
    found: list[tuple[TournamentType, list[int], _OrderKey]] = []
    for code in range(1 << k):
        if orbit_of[code] >= 0:
            continue
        orbit = sorted({_apply_map(code, m) for m in maps})
        orbit_of[orbit] = len(found)
        t = Tournament(ell=ell, bits=code)
        tt = TournamentType(
            ell=ell,
            canonical=min(_bit_string(c, k) for c in orbit),
            score_sequence=score_sequence(t),
            linearity=linearity(t),
            labelings=len(orbit),
        )
        found.append((tt, orbit, _type_order_key(tt, t)))
    order = sorted(range(len(found)), key=lambda i: found[i][2])
    lookup = np.empty(1 << k, dtype=np.intp)
    for position, i in enumerate(order):
        lookup[found[i][1]] = position
    lookup.setflags(write=False)
    return tuple(found[i][0] for i in order), lookup


def _check_enumerable(ell: int) -> None:
    check_ell(ell)
    if ell > MAX_ENUMERATE_CANDIDATES:
        msg = (
            f"Type enumeration is limited to {MAX_ENUMERATE_CANDIDATES} "
            f"candidates, got {ell}"
        )
        raise UnsupportedSizeError(msg)


def enumerate_types(ell: int) -> list[TournamentType]:
    """All isomorphism types on ``ell`` candidates, numbered ``T1, T2, ...``.

    Types are ordered by descending linearity, then descending top score,
    then the remaining scores ascending, then descending labeling count,
    then ascending :func:`second_order_scores`.

    Raises:
        UnsupportedSizeError: If ``ell`` exceeds 5.

    Examples:
        >>> [t.labelings for t in enumerate_types(4)]
        [24, 8, 8, 24]
    """
    _check_enumerable(ell)
    return list(_classify(ell)[0])


def type_lookup(ell: int) -> NDArray[np.intp]:
    """Read-only map from tournament code to its position in :func:`enumerate_types`."""
    _check_enumerable(ell)
    return _classify(ell)[1]


def type_id(position: int, ell: int) -> str:
    """The ``T<k>`` label of the type at a 0-based position.

    >>> [type_id(p, 5) for p in (7, 8, 10)]
    ['T8', 'T11', 'T10']
    """
    numbering = TYPE_NUMBERING.get(ell)
    return f"T{numbering[position] if numbering else position + 1}"


def automorphism_count(t: Tournament) -> int:
    """Number of relabelings that fix ``t``."""
    if t.ell > MAX_CANONICAL_CANDIDATES:
        msg = f"Automorphisms are limited to {MAX_CANONICAL_CANDIDATES} candidates"
        raise UnsupportedSizeError(msg)
    return sum(_apply_map(t.bits, m) == t.bits for m in _all_relabel_maps(t.ell))


def labeled_count(ell: int) -> int:
    """Number of labeled tournaments, ``2^(l(l-1)/2)``."""
    return 1 << num_edges(check_ell(ell))
