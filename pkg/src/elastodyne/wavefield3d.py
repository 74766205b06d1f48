"""Per-layer staggered sub-grids and matrix-free right-hand sides.

A layer is a uniform cuboid grid, periodic in x and y, bounded in z by two
horizontal faces that are either free surfaces or interfaces to adjacent
layers.  Along each axis two interlaced sub-grids exist (N on nodes, M on
half-offset points); the nine solution fields occupy seven of the eight
sub-grid combinations:

    vx  (M,N,N)   sxx,syy,szz (N,N,N)   sxy (M,M,N)
    vy  (N,M,N)                         sxz (M,N,M)
    vz  (N,N,M)                         syz (N,M,M)

Arrays are shaped (z, y, x) with x contiguous.  Horizontally both sub-grids
carry nx (ny) points and derivatives wrap around; vertically the N grid has
nz_n planes including both faces and the M grid nz_n - 1, with the SBP
closure rows applied near the faces.

Free-surface conditions enter as penalty terms folded into the z-derivative
of szz, sxz, and syz in the velocity updates (the norm-matrix inverse is
pre-applied, so no global norm matrices appear at runtime).  Interface
penalties are added separately; see the interface module.

``assemble_dense_operator`` materializes the complete semi-discrete
operator of a small stack by probing unit vectors, for verifying that it
is skew-symmetric in the energy inner product.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dataclass_field

import numpy as np

from . import sbp1d
from ._kernels import (
    apply_banded_axis0,
    deriv_x_m2n,
    deriv_x_n2m,
    deriv_y_m2n,
    deriv_y_n2m,
)

FIELDS = ("vx", "vy", "vz", "sxx", "syy", "szz", "sxy", "sxz", "syz")
VELOCITY_FIELDS = FIELDS[:3]
STRESS_FIELDS = FIELDS[3:]

# Sub-grid kind per axis (x, y, z) for each field; the (M,M,M) sub-grid
# is unoccupied.
FIELD_SUBGRIDS = {
    "vx": ("M", "N", "N"),
    "vy": ("N", "M", "N"),
    "vz": ("N", "N", "M"),
    "sxx": ("N", "N", "N"),
    "syy": ("N", "N", "N"),
    "szz": ("N", "N", "N"),
    "sxy": ("M", "M", "N"),
    "sxz": ("M", "N", "M"),
    "syz": ("N", "M", "M"),
}

FREE_SURFACE = "free-surface"
INTERFACE = "interface"


@dataclass(frozen=True)
class LayerGrid:
    """Geometry of one uniform layer's staggered sub-grids."""

    nx: int
    ny: int
    nz_n: int
    dx: float
    dy: float
    dz: float
    z_top_role: str = FREE_SURFACE
    z_bottom_role: str = FREE_SURFACE

    def __post_init__(self):
        if self.nz_n < sbp1d.MIN_NODES:
            raise ValueError(
                f"layer needs at least {sbp1d.MIN_NODES} vertical N-grid "
                f"planes, got {self.nz_n}"
            )
        if self.nx < 4 or self.ny < 4:
            raise ValueError(
                f"periodic stencil needs nx, ny >= 4, got {self.nx}, {self.ny}"
            )
        if not (self.dx > 0 and self.dx == self.dy == self.dz):
            raise ValueError("spacings must be positive and equal within a layer")
        for role in (self.z_top_role, self.z_bottom_role):
            if role not in (FREE_SURFACE, INTERFACE):
                raise ValueError(f"unknown z-face role {role!r}")

    @property
    def nz_m(self) -> int:
        return self.nz_n - 1


def make_layer_grid(nx, ny, nz_n, spacing, z_top_role=FREE_SURFACE,
                    z_bottom_role=FREE_SURFACE) -> LayerGrid:
    return LayerGrid(nx=nx, ny=ny, nz_n=nz_n, dx=float(spacing),
                     dy=float(spacing), dz=float(spacing),
                     z_top_role=z_top_role, z_bottom_role=z_bottom_role)


def field_shape(grid: LayerGrid, name: str) -> tuple[int, int, int]:
    nz = grid.nz_n if FIELD_SUBGRIDS[name][2] == "N" else grid.nz_m
    return (nz, grid.ny, grid.nx)


def axis_coords(grid: LayerGrid, name: str, axis: str,
                origin: float = 0.0) -> np.ndarray:
    """Physical coordinates of a field's sub-grid along one axis."""
    ax = "xyz".index(axis)
    kind = FIELD_SUBGRIDS[name][ax]
    n = field_shape(grid, name)[2 - ax]
    h = (grid.dx, grid.dy, grid.dz)[ax]
    offset = 0.5 if kind == "M" else 0.0
    return origin + h * (np.arange(n) + offset)


@dataclass
class WavefieldState:
    """The nine solution fields of one layer on their seven sub-grids."""

    vx: np.ndarray
    vy: np.ndarray
    vz: np.ndarray
    sxx: np.ndarray
    syy: np.ndarray
    szz: np.ndarray
    sxy: np.ndarray
    sxz: np.ndarray
    syz: np.ndarray

    @classmethod
    def zeros(cls, grid: LayerGrid) -> "WavefieldState":
        return cls(**{f: np.zeros(field_shape(grid, f)) for f in FIELDS})

    def copy(self) -> "WavefieldState":
        return WavefieldState(**{f: getattr(self, f).copy() for f in FIELDS})

    def stresses(self) -> dict:
        return {f: getattr(self, f) for f in STRESS_FIELDS}


@dataclass
class Layer:
    """One layer's grid, material fields, vertical operator set, and depth."""

    grid: LayerGrid
    medium: object
    sbp_z: sbp1d.SbpSet1D
    z_top: float = 0.0


@dataclass
class Stack:
    """An ordered pile of layers plus the couplings between them.

    ``couplings[i]`` joins ``layers[i]`` (above) to ``layers[i + 1]``.
    """

    layers: tuple
    couplings: tuple = dataclass_field(default_factory=tuple)


# Derivative helpers.  Each returns a freshly allocated array on the target
# sub-grid; z variants apply the closure-form vertical operator.

def _dx_n2m(u, h):
    out = np.empty_like(u)
    deriv_x_n2m(u, 1.0 / h, out)
    return out


def _dx_m2n(u, h):
    out = np.empty_like(u)
    deriv_x_m2n(u, 1.0 / h, out)
    return out


def _dy_n2m(u, h):
    out = np.empty_like(u)
    deriv_y_n2m(u, 1.0 / h, out)
    return out


def _dy_m2n(u, h):
    out = np.empty_like(u)
    deriv_y_m2n(u, 1.0 / h, out)
    return out


def _dz_n2m(u, sbp):
    out = np.empty((sbp.n_m,) + u.shape[1:])
    apply_banded_axis0(u, sbp.dn_left, sbp.dn_right, sbp.dn_interior, 1, out)
    return out


def _dz_m2n(u, sbp):
    out = np.empty((sbp.n_n,) + u.shape[1:])
    apply_banded_axis0(u, sbp.dm_left, sbp.dm_right, sbp.dm_interior, 2, out)
    return out


def velocity_rhs(state: WavefieldState, medium, grid: LayerGrid,
                 sbp_z: sbp1d.SbpSet1D) -> dict:
    """Velocity time derivatives: density-weighted stress divergence.

    On z faces marked free-surface the vertical derivatives of sxz, syz,
    and szz carry the penalty that weakly enforces zero traction.
    Interface faces are left uncorrected here.
    """
    pl = sbp_z.pl
    top_free = grid.z_top_role == FREE_SURFACE
    bottom_free = grid.z_bottom_role == FREE_SURFACE

    dsxz_dz = _dz_m2n(state.sxz, sbp_z)
    dsyz_dz = _dz_m2n(state.syz, sbp_z)
    dszz_dz = _dz_n2m(state.szz, sbp_z)
    if top_free:
        trace_xz = pl[0] * state.sxz[0] + pl[1] * state.sxz[1] + pl[2] * state.sxz[2]
        trace_yz = pl[0] * state.syz[0] + pl[1] * state.syz[1] + pl[2] * state.syz[2]
        dsxz_dz[0] += trace_xz / sbp_z.an[0]
        dsyz_dz[0] += trace_yz / sbp_z.an[0]
        for k in range(3):
            dszz_dz[k] += (pl[k] / sbp_z.am[k]) * state.szz[0]
    if bottom_free:
        trace_xz = (pl[0] * state.sxz[-1] + pl[1] * state.sxz[-2]
                    + pl[2] * state.sxz[-3])
        trace_yz = (pl[0] * state.syz[-1] + pl[1] * state.syz[-2]
                    + pl[2] * state.syz[-3])
        dsxz_dz[-1] -= trace_xz / sbp_z.an[-1]
        dsyz_dz[-1] -= trace_yz / sbp_z.an[-1]
        for k in range(3):
            dszz_dz[-1 - k] -= (pl[k] / sbp_z.am[-1 - k]) * state.szz[-1]

    dvx = _dx_n2m(state.sxx, grid.dx)
    dvx += _dy_m2n(state.sxy, grid.dy)
    dvx += dsxz_dz
    dvx *= medium.inv_rho_vx

    dvy = _dx_m2n(state.sxy, grid.dx)
    dvy += _dy_n2m(state.syy, grid.dy)
    dvy += dsyz_dz
    dvy *= medium.inv_rho_vy

    dvz = _dx_m2n(state.sxz, grid.dx)
    dvz += _dy_m2n(state.syz, grid.dy)
    dvz += dszz_dz
    dvz *= medium.inv_rho_vz

    return {"vx": dvx, "vy": dvy, "vz": dvz}


def stress_rhs(state: WavefieldState, medium, grid: LayerGrid,
               sbp_z: sbp1d.SbpSet1D) -> dict:
    """Stress time derivatives from the symmetrized velocity gradient.

    Free surfaces do not modify these equations; only interface coupling
    (applied separately) touches the vertical velocity derivatives.
    """
    exx = _dx_m2n(state.vx, grid.dx)
    eyy = _dy_m2n(state.vy, grid.dy)
    ezz = _dz_m2n(state.vz, sbp_z)
    trace = exx + eyy + ezz

    lam = medium.lam_nn
    two_mu = 2.0 * medium.mu_nn
    dsxx = lam * trace + two_mu * exx
    dsyy = lam * trace + two_mu * eyy
    dszz = lam * trace + two_mu * ezz

    dsxy = medium.mu_xy * (_dx_n2m(state.vy, grid.dx)
                           + _dy_n2m(state.vx, grid.dy))
    dsxz = medium.mu_xz * (_dz_n2m(state.vx, sbp_z)
                           + _dx_n2m(state.vz, grid.dx))
    dsyz = medium.mu_yz * (_dz_n2m(state.vy, sbp_z)
                           + _dy_n2m(state.vz, grid.dy))

    return {"sxx": dsxx, "syy": dsyy, "szz": dszz,
            "sxy": dsxy, "sxz": dsxz, "syz": dsyz}


def evaluate_rhs(stack: Stack, states, penalty_scale: float = 1.0,
                 disable=frozenset()) -> list:
    """Full semi-discrete right-hand side for every layer of a stack.

    Computes both velocity and stress parts and applies all interface
    corrections; the workhorse behind the dense verification operator.
    """
    from .interface import add_interface_corrections

    rates = []
    for layer, state in zip(stack.layers, states):
        r = velocity_rhs(state, layer.medium, layer.grid, layer.sbp_z)
        r.update(stress_rhs(state, layer.medium, layer.grid, layer.sbp_z))
        rates.append(r)
    for i, coupling in enumerate(stack.couplings):
        add_interface_corrections(
            rates[i], rates[i + 1], states[i], states[i + 1], coupling,
            medium_upper=stack.layers[i].medium,
            medium_lower=stack.layers[i + 1].medium,
            penalty_scale=penalty_scale, disable=disable,
        )
    return rates


def stack_unknowns(stack: Stack) -> int:
    return sum(
        int(np.prod(field_shape(layer.grid, f)))
        for layer in stack.layers for f in FIELDS
    )


def pack_state(stack: Stack, states) -> np.ndarray:
    parts = []
    for state in states:
        for f in FIELDS:
            parts.append(getattr(state, f).ravel())
    return np.concatenate(parts)


def unpack_state(stack: Stack, vec: np.ndarray) -> list:
    states = []
    pos = 0
    for layer in stack.layers:
        arrays = {}
        for f in FIELDS:
            shape = field_shape(layer.grid, f)
            n = int(np.prod(shape))
            arrays[f] = vec[pos:pos + n].reshape(shape).copy()
            pos += n
        states.append(WavefieldState(**arrays))
    return states


def assemble_dense_operator(stack: Stack, penalty_scale: float = 1.0,
                            disable=frozenset(),
                            max_unknowns: int = 20000) -> np.ndarray:
    """Materialize the full linear state -> d(state)/dt map by probing.

    Verification oracle only; refuses stacks beyond ``max_unknowns``.
    """
    n = stack_unknowns(stack)
    if n > max_unknowns:
        raise ValueError(f"{n} unknowns exceeds the dense-assembly cap "
                         f"of {max_unknowns}")
    mat = np.empty((n, n))
    vec = np.zeros(n)
    for j in range(n):
        vec[j] = 1.0
        states = unpack_state(stack, vec)
        rates = evaluate_rhs(stack, states, penalty_scale, disable)
        pos = 0
        for layer, r in zip(stack.layers, rates):
            for f in FIELDS:
                flat = r[f].ravel()
                mat[pos:pos + flat.size, j] = flat
                pos += flat.size
        vec[j] = 0.0
    return mat


def _field_z_weights(layer: Layer, name: str) -> np.ndarray:
    sbp = layer.sbp_z
    return sbp.an if FIELD_SUBGRIDS[name][2] == "N" else sbp.am


def apply_energy_weights(stack: Stack, mat: np.ndarray) -> np.ndarray:
    """Left-multiply by the energy quadratic form H (norm times material).

    H is diagonal except for 3x3 compliance blocks tying the three normal
    stresses at each node; applied row-wise so columns of ``mat`` transform
    like states.
    """
    out = np.empty_like(mat)
    pos = 0
    for layer in stack.layers:
        grid, med = layer.grid, layer.medium
        area = grid.dx * grid.dy
        sizes = {f: int(np.prod(field_shape(grid, f))) for f in FIELDS}
        offs = {}
        for f in FIELDS:
            offs[f] = pos
            pos += sizes[f]

        def wvec(f):
            wz = _field_z_weights(layer, f) * area
            return np.broadcast_to(
                wz[:, None, None], field_shape(grid, f)).ravel()

        for f, rho in (("vx", med.rho_vx), ("vy", med.rho_vy),
                       ("vz", med.rho_vz)):
            w = wvec(f) * rho.ravel()
            out[offs[f]:offs[f] + sizes[f]] = w[:, None] * mat[offs[f]:offs[f] + sizes[f]]

        # Normal-stress compliance: diag 1/(2 mu) minus rank-wide coupling
        # lam / (2 mu (3 lam + 2 mu)) on the trace.
        lam = med.lam_nn.ravel()
        mu = med.mu_nn.ravel()
        c_diag = 1.0 / (2.0 * mu)
        c_tr = lam / (2.0 * mu * (3.0 * lam + 2.0 * mu))
        wn = wvec("sxx")
        rows = {f: mat[offs[f]:offs[f] + sizes[f]] for f in ("sxx", "syy", "szz")}
        tr = rows["sxx"] + rows["syy"] + rows["szz"]
        for f in ("sxx", "syy", "szz"):
            out[offs[f]:offs[f] + sizes[f]] = (
                wn[:, None] * (c_diag[:, None] * rows[f] - c_tr[:, None] * tr)
            )

        for f, mu_f in (("sxy", med.mu_xy), ("sxz", med.mu_xz),
                        ("syz", med.mu_yz)):
            w = wvec(f) / mu_f.ravel()
            out[offs[f]:offs[f] + sizes[f]] = w[:, None] * mat[offs[f]:offs[f] + sizes[f]]
    return out


def skew_symmetry_residual(stack: Stack, penalty_scale: float = 1.0,
                           disable=frozenset(),
                           max_unknowns: int = 20000) -> float:
    """Relative magnitude of H^T L + L^T H for the assembled operator.

    Zero (to roundoff) exactly when the discretization conserves the
    discrete energy; this is the load-bearing stability property.
    """
    mat = assemble_dense_operator(stack, penalty_scale, disable, max_unknowns)
    hl = apply_energy_weights(stack, mat)
    residual = hl + hl.T
    return float(np.abs(residual).max() / np.abs(hl).max())
