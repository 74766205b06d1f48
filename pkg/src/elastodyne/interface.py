"""Energy-conserving coupling of two layers across a horizontal interface.

At a horizontal interface the physical matching conditions reduce to
continuity of vx, vy, vz, sxz, syz, and szz; the remaining fields are
uninvolved.  Each of the six is enforced weakly by a penalty folded into
the vertical derivative that feeds its partner field, following the same
five steps on either side:

1. apply the interior vertical derivative (done by the layer RHS),
2. restrict or project the layer's own trace onto the interface,
3. do the same for the neighbor,
4. interpolate the neighbor's trace onto the layer's own trace positions,
5. penalize half the mismatch, weighted by the inverse vertical norm.

The upper layer touches the interface with its bottom face and therefore
uses right-end projections; the lower layer uses left-end projections, and
its penalties carry the opposite sign.  The 2D trace interpolants are
tensor products of compatible 1D operators (coarse-to-fine tables plus
their norm-weighted transposes), which is exactly what makes the penalty
terms cancel pairwise in the discrete energy balance; the half factor and
the signs here are pinned by that cancellation.

Conforming interfaces (equal spacings) couple through identity transfers.
Trace extraction is read-only and corrections write only the closure rows
of each side's RHS, so distinct interfaces can be processed concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import sbp1d
from .interp1d import (
    GridRatio,
    InterpOp1D,
    apply_interp,
    build_coarse_to_fine,
    derive_fine_to_coarse,
)
from .wavefield3d import INTERFACE, LayerGrid

# The coupled traces and the RHS fields their penalties feed.
TRACE_QUANTITIES = ("sxz", "vx", "syz", "vy", "szz", "vz")


@dataclass(frozen=True)
class TraceTransfer:
    """2D interpolation between the two sides' trace positions.

    Tensor product of one operator per horizontal axis; ``None`` factors
    are identities (conforming axis).
    """

    op_x: InterpOp1D | None
    op_y: InterpOp1D | None

    def __call__(self, trace: np.ndarray) -> np.ndarray:
        out = trace
        if self.op_y is not None:
            out = apply_interp(self.op_y, out, axis=0)
        if self.op_x is not None:
            out = apply_interp(self.op_x, out, axis=1)
        return out


@dataclass(frozen=True)
class InterfaceCoupling:
    """Everything needed to couple an upper and a lower layer.

    ``down`` transfers map upper-side traces to lower-side positions and
    vice versa for ``up``, keyed by the (x, y) sub-grid kind pair of the
    trace: ("M","N") for sxz/vx, ("N","M") for syz/vy, ("N","N") for
    szz/vz.
    """

    upper: LayerGrid
    lower: LayerGrid
    ratio: GridRatio | None        # None for a conforming (1:1) interface
    coarse_side: str | None        # "upper" | "lower" | None
    sbp_upper: sbp1d.SbpSet1D
    sbp_lower: sbp1d.SbpSet1D
    down: dict
    up: dict
    variant: str = "standard"


def _axis_pair(kind: str, n_upper: int, h_upper: float, n_lower: int,
               h_lower: float, variant: str):
    """1D transfer pair along one axis: (upper->lower, lower->upper)."""
    if abs(h_upper - h_lower) <= 1e-9 * h_upper:
        if n_upper != n_lower:
            raise ValueError(
                f"conforming interface with mismatched counts "
                f"{n_upper} vs {n_lower}"
            )
        return None, None
    if h_upper > h_lower:
        ratio = GridRatio.from_spacings(h_lower, h_upper)
        c2f = build_coarse_to_fine(ratio, kind, n_upper, variant)
        if c2f.n_out != n_lower:
            raise ValueError(
                f"count incompatibility: {n_upper} coarse points map to "
                f"{c2f.n_out} fine points, layer has {n_lower}"
            )
        f2c = derive_fine_to_coarse(c2f, h_lower, h_upper)
        return c2f, f2c
    ratio = GridRatio.from_spacings(h_upper, h_lower)
    c2f = build_coarse_to_fine(ratio, kind, n_lower, variant)
    if c2f.n_out != n_upper:
        raise ValueError(
            f"count incompatibility: {n_lower} coarse points map to "
            f"{c2f.n_out} fine points, layer has {n_upper}"
        )
    f2c = derive_fine_to_coarse(c2f, h_upper, h_lower)
    return f2c, c2f


def build_interface(upper: LayerGrid, lower: LayerGrid,
                    variant: str = "standard") -> InterfaceCoupling:
    """Build the coupling between a layer and the one below it.

    The layers must cover the same horizontal extent and their spacing
    ratio must be conforming or in the supported set, with point counts
    that tile the interface in whole interpolation cycles.
    """
    if upper.z_bottom_role != INTERFACE or lower.z_top_role != INTERFACE:
        raise ValueError("both faces meeting at an interface must have the "
                         "'interface' role")
    for n_up, h_up, n_lo, h_lo, axis in (
            (upper.nx, upper.dx, lower.nx, lower.dx, "x"),
            (upper.ny, upper.dy, lower.ny, lower.dy, "y")):
        if abs(n_up * h_up - n_lo * h_lo) > 1e-6 * n_up * h_up:
            raise ValueError(
                f"horizontal extent mismatch along {axis}: "
                f"{n_up * h_up} vs {n_lo * h_lo}"
            )

    if abs(upper.dx - lower.dx) <= 1e-9 * upper.dx:
        ratio = None
        coarse_side = None
    else:
        fine, coarse = sorted((upper.dx, lower.dx))
        ratio = GridRatio.from_spacings(fine, coarse)
        coarse_side = "upper" if upper.dx > lower.dx else "lower"

    pairs = {}
    for kind_x, kind_y in (("M", "N"), ("N", "M"), ("N", "N")):
        down_x, up_x = _axis_pair(kind_x, upper.nx, upper.dx,
                                  lower.nx, lower.dx, variant)
        down_y, up_y = _axis_pair(kind_y, upper.ny, upper.dy,
                                  lower.ny, lower.dy, variant)
        pairs[(kind_x, kind_y)] = (
            TraceTransfer(op_x=down_x, op_y=down_y),
            TraceTransfer(op_x=up_x, op_y=up_y),
        )

    return InterfaceCoupling(
        upper=upper, lower=lower, ratio=ratio, coarse_side=coarse_side,
        sbp_upper=sbp1d.build_sbp_set(upper.nz_n, upper.dz),
        sbp_lower=sbp1d.build_sbp_set(lower.nz_n, lower.dz),
        down={k: v[0] for k, v in pairs.items()},
        up={k: v[1] for k, v in pairs.items()},
        variant=variant,
    )


def _project_top(field: np.ndarray, pl: np.ndarray) -> np.ndarray:
    return pl[0] * field[0] + pl[1] * field[1] + pl[2] * field[2]


def _project_bottom(field: np.ndarray, pl: np.ndarray) -> np.ndarray:
    return pl[0] * field[-1] + pl[1] * field[-2] + pl[2] * field[-3]


def add_interface_corrections(rhs_upper: dict, rhs_lower: dict,
                              state_upper, state_lower,
                              coupling: InterfaceCoupling, *,
                              medium_upper, medium_lower,
                              penalty_scale: float = 1.0,
                              disable=frozenset()):
    """Add the interface penalties to both sides' right-hand sides.

    Corrects whichever RHS fields are present: velocity entries are
    penalized with stress-trace mismatches and stress entries with
    velocity-trace mismatches, so the two leapfrog half-updates can each
    pass only their own part.  ``penalty_scale`` scales the canonical 1/2
    factor and ``disable`` removes individual trace couplings; both exist
    for verification, which checks that any tampering breaks the energy
    balance.
    """
    up, lo = coupling.sbp_upper, coupling.sbp_lower
    pl = lo.pl
    fac = 0.5 * penalty_scale
    su, sl = state_upper, state_lower
    mu_, ml = medium_upper, medium_lower

    def coupled(name):
        return name not in disable and "all" not in disable

    # Velocity updates: penalize stress-trace mismatches.
    if "vx" in rhs_lower and coupled("sxz"):
        t_up = _project_bottom(su.sxz, pl)
        t_lo = _project_top(sl.sxz, pl)
        down, up_t = coupling.down[("M", "N")], coupling.up[("M", "N")]
        rhs_lower["vx"][0] += (fac / lo.an[0]) * ml.inv_rho_vx[0] * (
            t_lo - down(t_up))
        rhs_upper["vx"][-1] -= (fac / up.an[-1]) * mu_.inv_rho_vx[-1] * (
            t_up - up_t(t_lo))
    if "vy" in rhs_lower and coupled("syz"):
        t_up = _project_bottom(su.syz, pl)
        t_lo = _project_top(sl.syz, pl)
        down, up_t = coupling.down[("N", "M")], coupling.up[("N", "M")]
        rhs_lower["vy"][0] += (fac / lo.an[0]) * ml.inv_rho_vy[0] * (
            t_lo - down(t_up))
        rhs_upper["vy"][-1] -= (fac / up.an[-1]) * mu_.inv_rho_vy[-1] * (
            t_up - up_t(t_lo))
    if "vz" in rhs_lower and coupled("szz"):
        t_up = su.szz[-1]
        t_lo = sl.szz[0]
        down, up_t = coupling.down[("N", "N")], coupling.up[("N", "N")]
        diff_lo = t_lo - down(t_up)
        diff_up = t_up - up_t(t_lo)
        for k in range(3):
            rhs_lower["vz"][k] += (fac * pl[k] / lo.am[k]) * \
                ml.inv_rho_vz[k] * diff_lo
            rhs_upper["vz"][-1 - k] -= (fac * pl[k] / up.am[-1 - k]) * \
                mu_.inv_rho_vz[-1 - k] * diff_up

    # Stress updates: penalize velocity-trace mismatches.
    if "sxz" in rhs_lower and coupled("vx"):
        t_up = su.vx[-1]
        t_lo = sl.vx[0]
        down, up_t = coupling.down[("M", "N")], coupling.up[("M", "N")]
        diff_lo = t_lo - down(t_up)
        diff_up = t_up - up_t(t_lo)
        for k in range(3):
            rhs_lower["sxz"][k] += (fac * pl[k] / lo.am[k]) * \
                ml.mu_xz[k] * diff_lo
            rhs_upper["sxz"][-1 - k] -= (fac * pl[k] / up.am[-1 - k]) * \
                mu_.mu_xz[-1 - k] * diff_up
    if "syz" in rhs_lower and coupled("vy"):
        t_up = su.vy[-1]
        t_lo = sl.vy[0]
        down, up_t = coupling.down[("N", "M")], coupling.up[("N", "M")]
        diff_lo = t_lo - down(t_up)
        diff_up = t_up - up_t(t_lo)
        for k in range(3):
            rhs_lower["syz"][k] += (fac * pl[k] / lo.am[k]) * \
                ml.mu_yz[k] * diff_lo
            rhs_upper["syz"][-1 - k] -= (fac * pl[k] / up.am[-1 - k]) * \
                mu_.mu_yz[-1 - k] * diff_up
    if "szz" in rhs_lower and coupled("vz"):
        t_up = _project_bottom(su.vz, pl)
        t_lo = _project_top(sl.vz, pl)
        down, up_t = coupling.down[("N", "N")], coupling.up[("N", "N")]
        corr_lo = (fac / lo.an[0]) * (t_lo - down(t_up))
        corr_up = (fac / up.an[-1]) * (t_up - up_t(t_lo))
        lam_lo = ml.lam_nn[0]
        lam_up = mu_.lam_nn[-1]
        rhs_lower["szz"][0] += (lam_lo + 2.0 * ml.mu_nn[0]) * corr_lo
        rhs_lower["sxx"][0] += lam_lo * corr_lo
        rhs_lower["syy"][0] += lam_lo * corr_lo
        rhs_upper["szz"][-1] -= (lam_up + 2.0 * mu_.mu_nn[-1]) * corr_up
        rhs_upper["sxx"][-1] -= lam_up * corr_up
        rhs_upper["syy"][-1] -= lam_up * corr_up
