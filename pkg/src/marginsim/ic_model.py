"""Impartial Culture covariance model on the edge space.

For one uniformly random ballot, the pairwise indicators ``X_(i,j)`` have
unit variance, covariance ``+1/3`` for two edges that share their tail or
their head, ``-1/3`` when the shared vertex is the tail of one and the
head of the other, and ``0`` for disjoint pairs. With ``D`` the incidence
matrix this is::

    3 * Sigma = I + D^T D
    (l + 1) * Gamma / 3 = (l + 1) I - D^T D

and since ``(D^T D)^2 = l * D^T D`` the two are exact inverses. ``D^T D / l``
is the cut projector, so Sigma acts as ``1/3`` on the cycle space and as
``(l+1)/3`` on the cut space. The symmetric square root factor is applied
through the projector in O(l^2) per vector.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from typing import TYPE_CHECKING

import numpy as np
from numpy.typing import NDArray

from marginsim.edge_space import (
    fundamental_cycle_basis,
    incidence,
    project_cut_array,
    star_cut_basis,
)
from marginsim.models import (
    CovarianceModel,
    DomainError,
    EdgeVector,
    check_ell,
    num_edges,
)

if TYPE_CHECKING:
    from marginsim.sampling import RngStream

LAMBDA_CYCLE = 1.0 / 3.0

# ---------------------------------------------------------------------------
# Matrices
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def sigma_scaled(ell: int) -> NDArray[np.int64]:
    """``3 * Sigma`` as an exact integer matrix."""
    check_ell(ell)
    d = incidence(ell)
    out = np.eye(num_edges(ell), dtype=np.int64) + d.T @ d
    out.setflags(write=False)
    return out


@lru_cache(maxsize=None)
def precision_scaled(ell: int) -> NDArray[np.int64]:
    """``(l + 1) * Gamma / 3`` as an exact integer matrix."""
    check_ell(ell)
    d = incidence(ell)
    out = (ell + 1) * np.eye(num_edges(ell), dtype=np.int64) - d.T @ d
    out.setflags(write=False)
    return out


@lru_cache(maxsize=None)
def sigma_matrix(ell: int) -> NDArray[np.float64]:
    """Covariance matrix Sigma (read-only)."""
    out = sigma_scaled(ell) / 3.0
    out.setflags(write=False)
    return out


@lru_cache(maxsize=None)
def precision(ell: int) -> NDArray[np.float64]:
    """Precision matrix ``Gamma = Sigma^-1`` (read-only).

    Diagonal ``3(l-1)/(l+1)``; ``-3/(l+1)`` for edges sharing their tail or
    their head; ``+3/(l+1)`` when the shared vertex is a tail of one edge
    and the head of the other; ``0`` for disjoint edges.
    """
    out = 3.0 * precision_scaled(ell) / (ell + 1)
    out.setflags(write=False)
    return out


def sigma_fractions(ell: int) -> list[list[Fraction]]:
    """Sigma with exact rational entries, row-major."""
    return [[Fraction(int(v), 3) for v in row] for row in sigma_scaled(ell)]


def precision_fractions(ell: int) -> list[list[Fraction]]:
    """Gamma with exact rational entries, row-major."""
    return [
        [Fraction(3 * int(v), ell + 1) for v in row] for row in precision_scaled(ell)
    ]


# ---------------------------------------------------------------------------
# Spectral structure
# ---------------------------------------------------------------------------


def eigenstructure(ell: int) -> tuple[float, float, int, int]:
    """Eigenvalues of Sigma on the cycle and cut spaces, with dimensions.

    Returns:
        ``(1/3, (l+1)/3, (l-1)(l-2)/2, l-1)``.
    """
    check_ell(ell)
    return LAMBDA_CYCLE, (ell + 1) / 3.0, (ell - 1) * (ell - 2) // 2, ell - 1


def verify_eigenstructure(ell: int) -> bool:
    """Check the eigen action exactly on both bases in integer arithmetic.

    ``3 Sigma c = c`` for every fundamental cycle ``c`` and
    ``3 Sigma u = (l + 1) u`` for every star cut ``u``.
    """
    s3 = sigma_scaled(ell)
    for c in fundamental_cycle_basis(ell):
        v = np.rint(c.to_array()).astype(np.int64)
        if not np.array_equal(s3 @ v, v):
            return False
    for u in star_cut_basis(ell):
        v = np.rint(u.to_array()).astype(np.int64)
        if not np.array_equal(s3 @ v, (ell + 1) * v):
            return False
    return True


def covariance(ell: int) -> CovarianceModel:
    """Build the covariance model for ``ell`` candidates.

    Raises:
        DomainError: If ``ell`` is outside ``[3, 64]``.
    """
    lam_cycle, lam_cut, dim_cycle, dim_cut = eigenstructure(ell)
    log_det = dim_cycle * math.log(lam_cycle) + dim_cut * math.log(lam_cut)
    return CovarianceModel(
        ell=ell,
        lambda_cycle=lam_cycle,
        lambda_cut=lam_cut,
        dim_cycle=dim_cycle,
        dim_cut=dim_cut,
        det_sigma=math.exp(log_det),
        log_det_sigma=log_det,
    )


# ---------------------------------------------------------------------------
# Square-root factor
# ---------------------------------------------------------------------------


def spectral_factor_array(
    model: CovarianceModel, w: NDArray[np.float64]
) -> NDArray[np.float64]:
    """Apply ``A = sqrt(l_cyc) P_cyc + sqrt(l_cut) P_cut`` to a vector or batch."""
    w = np.asarray(w, dtype=np.float64)
    if w.shape[-1] != model.dim:
        msg = f"Expected {model.dim} coordinates for ell={model.ell}, got {w.shape[-1]}"
        raise DomainError(msg)
    cut = project_cut_array(w, model.ell)
    result: NDArray[np.float64] = math.sqrt(model.lambda_cycle) * (w - cut) + math.sqrt(
        model.lambda_cut
    ) * cut
    return result


def spectral_factor_apply(
    model: CovarianceModel, w: NDArray[np.float64] | list[float]
) -> EdgeVector:
    """Return ``A w`` where ``A`` is the symmetric square root of Sigma.

    Raises:
        DomainError: If ``w`` does not have ``l(l-1)/2`` entries.
    """
    arr = np.asarray(w, dtype=np.float64)
    if arr.ndim != 1:
        msg = f"Expected a flat vector, got shape {arr.shape}"
        raise DomainError(msg)
    return EdgeVector.from_array(model.ell, spectral_factor_array(model, arr))


def factor_matrix(model: CovarianceModel) -> NDArray[np.float64]:
    """Materialize ``A`` column by column from unit vectors."""
    eye = np.eye(model.dim)
    columns = [spectral_factor_array(model, eye[:, c]) for c in range(model.dim)]
    return np.column_stack(columns)


# ---------------------------------------------------------------------------
# Density
# ---------------------------------------------------------------------------


def quadratic_form(model: CovarianceModel, x: EdgeVector) -> float:
    """``x^T Gamma x`` via the cycle/cut split: ``3|y|^2 + 3|z|^2 / (l+1)``."""
    values = x.to_array()
    z = project_cut_array(values, model.ell)
    y = values - z
    return float(y @ y / model.lambda_cycle + z @ z / model.lambda_cut)


def quadratic_form_dense(model: CovarianceModel, x: EdgeVector) -> float:
    """``x^T Gamma x`` by explicit matrix multiplication."""
    values = x.to_array()
    return float(values @ model.gamma @ values)


def log_density(model: CovarianceModel, x: EdgeVector) -> float:
    """Log of the N(0, Sigma) density at ``x``."""
    normalizer = model.dim * math.log(2.0 * math.pi) + model.log_det_sigma
    return -0.5 * (quadratic_form(model, x) + normalizer)


def density(model: CovarianceModel, x: EdgeVector) -> float:
    """The N(0, Sigma) probability density at ``x``.

    Examples:
        >>> round(density(covariance(3), EdgeVector.zeros(3)), 5)
        0.08248
    """
    return math.exp(log_density(model, x))


def levelset_points(
    model: CovarianceModel, count: int, rng: RngStream
) -> NDArray[np.float64]:
    """Points on the ellipsoid ``x^T Gamma x = 1``.

    Each point is ``A u`` for ``u`` uniform on the unit sphere, which lands
    on the level set because ``A Gamma A = I``.
    """
    u = rng.generator.standard_normal((count, model.dim))
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    return spectral_factor_array(model, u)
