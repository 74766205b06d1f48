"""Staggered-grid summation-by-parts operators in 1D.

Two interlaced grids cover an interval of ``n_n - 1`` cells:

* the N grid: ``n_n`` nodes at ``x0 + k*dx`` including both endpoints,
* the M grid: ``n_m = n_n - 1`` half-offset points at ``x0 + (k + 1/2)*dx``.

The operator set bundles the two staggered difference operators (``dn``:
N grid -> M grid, ``dm``: M grid -> N grid), the positive diagonal norm
weights ``an``/``am`` that act as quadrature rules, and the boundary
projection functionals ``pl``/``pr`` that extrapolate an M-grid field to
the interval endpoints.  Together they satisfy the exact discrete
integration-by-parts identity

    an*dm + (am*dn)^T  ==  -el @ pl^T + er @ pr^T

entrywise in rational arithmetic, where ``el``/``er`` select the first and
last node.  This identity is what every energy estimate downstream rests
on, so the coefficients are kept as exact rationals and converted to
floating point once at construction.

Away from the boundary closures both difference operators reduce to the
standard fourth-order staggered stencil ``[1/24, -9/8, 9/8, -1/24]/dx``
and the norm weights reduce to ``dx``.

Operators are stored in banded closure form (one interior stencil plus a
dense block per end); applying them is O(n).  Dense matrices are only
materialized for verification.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction as Fr

import numpy as np

from ._kernels import apply_banded_axis0

# Exact coefficient tables, unit grid spacing.  Left-end closures; the right
# end is the mirror image (with a sign flip for difference operators).
INTERIOR_STENCIL = (Fr(1, 24), Fr(-9, 8), Fr(9, 8), Fr(-1, 24))

# dn: rows are M points, columns are N points.  Row k of the interior uses
# columns k-1 .. k+2.  Three special rows per end, each five columns wide.
DN_LEFT_BLOCK = (
    (Fr(-79, 78), Fr(27, 26), Fr(-1, 26), Fr(1, 78), Fr(0)),
    (Fr(2, 21), Fr(-9, 7), Fr(9, 7), Fr(-2, 21), Fr(0)),
    (Fr(1, 75), Fr(0), Fr(-27, 25), Fr(83, 75), Fr(-1, 25)),
)

# dm: rows are N points, columns are M points.  Row k of the interior uses
# columns k-2 .. k+1.  Four special rows per end.
DM_LEFT_BLOCK = (
    (Fr(-2), Fr(3), Fr(-1), Fr(0), Fr(0)),
    (Fr(-1), Fr(1), Fr(0), Fr(0), Fr(0)),
    (Fr(1, 24), Fr(-9, 8), Fr(9, 8), Fr(-1, 24), Fr(0)),
    (Fr(-1, 71), Fr(6, 71), Fr(-83, 71), Fr(81, 71), Fr(-3, 71)),
)

AN_LEFT = (Fr(7, 18), Fr(9, 8), Fr(1), Fr(71, 72))
AM_LEFT = (Fr(13, 12), Fr(7, 8), Fr(25, 24))

# Boundary projection for M-grid fields; pl acts on the first three M
# points, pr is its mirror on the last three.
PROJECTION = (Fr(15, 8), Fr(-5, 4), Fr(3, 8))

# Closures must not overlap: dn has 3 special rows per end, dm 4, an 4
# weights, am 3, and the identity's corner blocks need disjoint ends.
MIN_NODES = 9


def _mirror_block(block, flip_sign):
    sign = -1 if flip_sign else 1
    return tuple(tuple(sign * c for c in reversed(row)) for row in reversed(block))


DN_RIGHT_BLOCK = _mirror_block(DN_LEFT_BLOCK, flip_sign=True)
DM_RIGHT_BLOCK = _mirror_block(DM_LEFT_BLOCK, flip_sign=True)


def _as_float(rows):
    return np.array([[float(c) for c in row] for row in rows], dtype=np.float64)


@dataclass(frozen=True)
class SbpSet1D:
    """One axis's staggered SBP operator family at a fixed size and spacing.

    Immutable after construction; all apply operations are pure, so a set
    can be shared freely across threads.
    """

    n_n: int
    n_m: int
    dx: float
    # Difference operators in closure form, already scaled by 1/dx.
    dn_left: np.ndarray      # (3, 5)
    dn_right: np.ndarray     # (3, 5)
    dn_interior: np.ndarray  # (4,)
    dm_left: np.ndarray      # (4, 5)
    dm_right: np.ndarray     # (4, 5)
    dm_interior: np.ndarray  # (4,)
    # Diagonal norm weights (full vectors), scaled by dx.
    an: np.ndarray           # (n_n,)
    am: np.ndarray           # (n_m,)
    # Boundary projection coefficients (dimensionless).
    pl: np.ndarray           # (3,) acts on u[0:3]
    pr: np.ndarray           # (3,) acts on u[-3:]


def build_sbp_set(n_n: int, dx: float) -> SbpSet1D:
    """Construct the staggered SBP operator set for ``n_n`` nodes.

    Raises ``ValueError`` when ``n_n < 9`` (the two boundary closures would
    overlap) or when ``dx`` is not strictly positive.
    """
    if n_n < MIN_NODES:
        raise ValueError(
            f"need at least {MIN_NODES} N-grid points, got {n_n}: "
            "boundary closures of the two ends would overlap"
        )
    if not dx > 0.0:
        raise ValueError(f"grid spacing must be positive, got {dx}")
    n_m = n_n - 1
    inv_dx = 1.0 / float(dx)

    an = np.full(n_n, float(dx))
    am = np.full(n_m, float(dx))
    for k, w in enumerate(AN_LEFT):
        an[k] = float(w) * dx
        an[n_n - 1 - k] = float(w) * dx
    for k, w in enumerate(AM_LEFT):
        am[k] = float(w) * dx
        am[n_m - 1 - k] = float(w) * dx

    return SbpSet1D(
        n_n=n_n,
        n_m=n_m,
        dx=float(dx),
        dn_left=_as_float(DN_LEFT_BLOCK) * inv_dx,
        dn_right=_as_float(DN_RIGHT_BLOCK) * inv_dx,
        dn_interior=np.array([float(c) for c in INTERIOR_STENCIL]) * inv_dx,
        dm_left=_as_float(DM_LEFT_BLOCK) * inv_dx,
        dm_right=_as_float(DM_RIGHT_BLOCK) * inv_dx,
        dm_interior=np.array([float(c) for c in INTERIOR_STENCIL]) * inv_dx,
        an=an,
        am=am,
        pl=np.array([float(c) for c in PROJECTION]),
        pr=np.array([float(c) for c in PROJECTION[::-1]]),
    )


def node_coords(op: SbpSet1D, x0: float = 0.0) -> np.ndarray:
    return x0 + op.dx * np.arange(op.n_n)


def mid_coords(op: SbpSet1D, x0: float = 0.0) -> np.ndarray:
    return x0 + op.dx * (np.arange(op.n_m) + 0.5)


def _conform(u, n_expect, grid_name):
    u = np.asarray(u, dtype=np.float64)
    if u.shape[0] != n_expect:
        raise ValueError(
            f"expected {n_expect} {grid_name}-grid values along axis 0, "
            f"got {u.shape[0]}"
        )
    return u


def apply_dn(op: SbpSet1D, u) -> np.ndarray:
    """Differentiate N-grid data; the result lives on the M grid.

    ``u`` may carry extra trailing axes; the derivative acts along axis 0.
    """
    u = _conform(u, op.n_n, "N")
    shape = u.shape
    u3 = np.ascontiguousarray(u.reshape(op.n_n, 1, -1))
    out = np.empty((op.n_m, 1, u3.shape[2]))
    # Interior row k reads u[k-1 : k+3].
    apply_banded_axis0(u3, op.dn_left, op.dn_right, op.dn_interior, 1, out)
    return out.reshape((op.n_m,) + shape[1:])


def apply_dm(op: SbpSet1D, u) -> np.ndarray:
    """Differentiate M-grid data; the result lives on the N grid."""
    u = _conform(u, op.n_m, "M")
    shape = u.shape
    u3 = np.ascontiguousarray(u.reshape(op.n_m, 1, -1))
    out = np.empty((op.n_n, 1, u3.shape[2]))
    # Interior row k reads u[k-2 : k+2].
    apply_banded_axis0(u3, op.dm_left, op.dm_right, op.dm_interior, 2, out)
    return out.reshape((op.n_n,) + shape[1:])


def project_boundary(op: SbpSet1D, u, side: str):
    """Extrapolate an M-grid field to the left or right interval endpoint."""
    u = _conform(u, op.n_m, "M")
    if side == "left":
        return np.tensordot(op.pl, u[:3], axes=(0, 0))
    if side == "right":
        return np.tensordot(op.pr, u[-3:], axes=(0, 0))
    raise ValueError(f"side must be 'left' or 'right', got {side!r}")


def dense_dn(op: SbpSet1D) -> np.ndarray:
    """Materialize dn as a dense (n_m, n_n) matrix.  Verification only."""
    d = np.zeros((op.n_m, op.n_n))
    d[:3, :5] = op.dn_left
    d[-3:, -5:] = op.dn_right
    for k in range(3, op.n_m - 3):
        d[k, k - 1:k + 3] = op.dn_interior
    return d


def dense_dm(op: SbpSet1D) -> np.ndarray:
    """Materialize dm as a dense (n_n, n_m) matrix.  Verification only."""
    d = np.zeros((op.n_n, op.n_m))
    d[:4, :5] = op.dm_left
    d[-4:, -5:] = op.dm_right
    for k in range(4, op.n_n - 4):
        d[k, k - 2:k + 2] = op.dm_interior
    return d


def _corner_matrix(op: SbpSet1D) -> np.ndarray:
    """The expected value of an*dm + (am*dn)^T: -el pl^T + er pr^T."""
    q = np.zeros((op.n_n, op.n_m))
    q[0, :3] = -op.pl
    q[-1, -3:] = op.pr
    return q


def sbp_identity_residual(op: SbpSet1D) -> float:
    """Max-abs entry of an*dm + (am*dn)^T - (-el pl^T + er pr^T).

    Zero up to roundoff for a correctly built set; used as a self-test.
    """
    q = op.an[:, None] * dense_dm(op) + (op.am[:, None] * dense_dn(op)).T
    return float(np.abs(q - _corner_matrix(op)).max())


def sbp_identity_residual_exact(n_n: int, dx: Fr = Fr(1)) -> Fr:
    """Same residual in exact rational arithmetic; must be exactly zero.

    ``dx`` may be any positive rational; the identity is scale invariant
    because the 1/dx of the difference operators cancels the dx of the
    norm weights.
    """
    if n_n < MIN_NODES:
        raise ValueError(f"need at least {MIN_NODES} N-grid points, got {n_n}")
    if dx <= 0:
        raise ValueError("grid spacing must be positive")
    n_m = n_n - 1

    dn = [[Fr(0)] * n_n for _ in range(n_m)]
    for r in range(3):
        for c in range(5):
            dn[r][c] = DN_LEFT_BLOCK[r][c] / dx
            dn[n_m - 3 + r][n_n - 5 + c] = DN_RIGHT_BLOCK[r][c] / dx
    for k in range(3, n_m - 3):
        for t, coef in enumerate(INTERIOR_STENCIL):
            dn[k][k - 1 + t] = coef / dx

    dm = [[Fr(0)] * n_m for _ in range(n_n)]
    for r in range(4):
        for c in range(5):
            dm[r][c] = DM_LEFT_BLOCK[r][c] / dx
            dm[n_n - 4 + r][n_m - 5 + c] = DM_RIGHT_BLOCK[r][c] / dx
    for k in range(4, n_n - 4):
        for t, coef in enumerate(INTERIOR_STENCIL):
            dm[k][k - 2 + t] = coef / dx

    an = [Fr(1) * dx] * n_n
    am = [Fr(1) * dx] * n_m
    for k, w in enumerate(AN_LEFT):
        an[k] = w * dx
        an[n_n - 1 - k] = w * dx
    for k, w in enumerate(AM_LEFT):
        am[k] = w * dx
        am[n_m - 1 - k] = w * dx

    residual = Fr(0)
    for i in range(n_n):
        for j in range(n_m):
            q = an[i] * dm[i][j] + am[j] * dn[j][i]
            expect = Fr(0)
            if i == 0 and j < 3:
                expect = -PROJECTION[j]
            elif i == n_n - 1 and j >= n_m - 3:
                expect = PROJECTION[n_m - 1 - j]
            residual = max(residual, abs(q - expect))
    return residual
