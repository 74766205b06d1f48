"""Discretization planning: spacings, time step, and cost ratios.

A layer's grid spacing follows from resolving the shortest wavelength it
carries: ``dx = c_min / (f_max * n_ppw)``.  The global time step follows
from the most restrictive layer under the CFL constraint, with a 1/sqrt(d)
factor in d dimensions:

    dt = c_cfl * min_i(dx_i / c_max_i) / sqrt(d)

``c_cfl`` may not exceed 6/7, the stability constant of the interior
staggered stencil.

Cost ratios compare a layered discretization with a uniform one over the
same domain: the spatial ratio counts grid points (one cell per spacing
cube), the temporal ratio counts steps to a fixed end time, and the total
ratio is their product.  Ratios are uniform cost over nonuniform cost, so
larger means the layering saves more.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

CFL_MAX = Fraction(6, 7)

# Five stacked regions of equal volume with linearly increasing speeds;
# the reference cases for partition cost accounting.
FIVE_REGION_SPEEDS = ((1.0, 2.0), (2.0, 3.0), (3.0, 4.0), (4.0, 5.0), (5.0, 6.0))


@dataclass(frozen=True)
class LayerPlan:
    """Wave-speed range, thickness, and chosen spacing of one layer."""

    c_min: float
    c_max: float
    depth: float
    dx: float
    nppw: float | None = None
    f_max: float | None = None

    def __post_init__(self):
        if self.c_min <= 0 or self.c_max < self.c_min:
            raise ValueError(
                f"invalid speed range [{self.c_min}, {self.c_max}]"
            )
        if self.dx <= 0 or self.depth <= 0:
            raise ValueError("depth and spacing must be positive")


@dataclass(frozen=True)
class CostReport:
    spatial_ratio: float
    temporal_ratio: float
    total_ratio: float
    per_layer_points: tuple[float, ...]
    uniform_points: float
    dt_nonuniform: float
    dt_uniform: float


def plan_spacing(c_min: float, f_max: float, nppw: float) -> float:
    """Spacing that resolves the minimum wavelength with nppw points."""
    if c_min <= 0 or f_max <= 0 or nppw <= 0:
        raise ValueError("speed, frequency, and points-per-wavelength must be positive")
    return c_min / (f_max * nppw)


def check_cfl(c_cfl: float):
    if not 0.0 < c_cfl <= float(CFL_MAX) + 1e-12:
        raise ValueError(
            f"CFL number {c_cfl} outside (0, 6/7]; the interior stencil "
            f"is stable only up to 6/7 ~ {float(CFL_MAX):.4f}"
        )


def plan_timestep(layers, c_cfl: float, dim: int = 3) -> float:
    """Largest stable time step across all layers.

    Each layer constrains dt through dx/c_max; the 1/sqrt(dim) factor
    accounts for diagonal propagation on a d-dimensional grid.
    """
    check_cfl(c_cfl)
    if not layers:
        raise ValueError("need at least one layer")
    if dim not in (1, 2, 3):
        raise ValueError(f"dim must be 1, 2, or 3, got {dim}")
    return c_cfl * min(l.dx / l.c_max for l in layers) / math.sqrt(dim)


def snap_depth(depth: float, dx: float) -> float:
    """Round a layer depth to a whole number of cells.

    Rejects adjustments larger than half a cell; those indicate a
    misconfigured layer rather than rounding noise.
    """
    cells = round(depth / dx)
    snapped = cells * dx
    if cells < 1 or abs(snapped - depth) > dx / 2 + 1e-12:
        raise ValueError(
            f"layer depth {depth} is not within half a cell of a multiple "
            f"of dx={dx}"
        )
    return snapped


def _exact_cells(extent: float, dx: float, what: str) -> float:
    cells = round(extent / dx)
    if cells < 1 or abs(cells * dx - extent) > 1e-6 * max(extent, dx):
        raise ValueError(f"{what} {extent} is not divisible by spacing {dx}")
    return cells


def cost_ratios(layers, extent_x: float, extent_y: float, uniform_dx: float,
                c_cfl: float = 0.8, dim: int = 3,
                uniform_c_max: float | None = None) -> CostReport:
    """Uniform-over-nonuniform cost ratios for a layered discretization.

    Points are counted per layer as (extent_x/dx)*(extent_y/dx)*(depth/dx);
    the uniform reference spans the summed depth at ``uniform_dx`` and is
    constrained by the global maximum speed.
    """
    if not layers:
        raise ValueError("need at least one layer")
    per_layer = []
    total_depth = 0.0
    for l in layers:
        nx = _exact_cells(extent_x, l.dx, "horizontal extent")
        ny = _exact_cells(extent_y, l.dx, "horizontal extent")
        depth = snap_depth(l.depth, l.dx)
        per_layer.append(nx * ny * round(depth / l.dx))
        total_depth += depth
    nonuniform_points = sum(per_layer)

    if uniform_c_max is None:
        uniform_c_max = max(l.c_max for l in layers)
    ux = _exact_cells(extent_x, uniform_dx, "horizontal extent")
    uy = _exact_cells(extent_y, uniform_dx, "horizontal extent")
    uz = _exact_cells(total_depth, uniform_dx, "total depth")
    uniform_points = ux * uy * uz

    dt_nonuniform = plan_timestep(layers, c_cfl, dim)
    uniform_plan = LayerPlan(c_min=min(l.c_min for l in layers),
                             c_max=uniform_c_max, depth=total_depth,
                             dx=uniform_dx)
    dt_uniform = plan_timestep([uniform_plan], c_cfl, dim)

    spatial = uniform_points / nonuniform_points
    temporal = dt_nonuniform / dt_uniform
    return CostReport(
        spatial_ratio=spatial,
        temporal_ratio=temporal,
        total_ratio=spatial * temporal,
        per_layer_points=tuple(per_layer),
        uniform_points=uniform_points,
        dt_nonuniform=dt_nonuniform,
        dt_uniform=dt_uniform,
    )


def spacetime_units(regions, partition) -> float:
    """Space-time grid-point count for a partition of stacked regions.

    ``regions`` are (c_min, c_max) pairs of equal-volume regions, top to
    bottom; ``partition`` groups contiguous region indices into layers.
    Each layer is discretized at a spacing proportional to its minimum
    speed, and the step count follows the layer with the worst spacing to
    max-speed ratio.  Units are normalized so one region at unit spacing
    with unit steps costs one; the single-layer partition of the five
    reference regions therefore costs 30 units.
    """
    covered = sorted(i for group in partition for i in group)
    if covered != list(range(len(regions))):
        raise ValueError("partition must cover every region exactly once")
    c_ref = min(c[0] for c in regions)
    spatial = 0.0
    steps = 0.0
    for group in partition:
        c_min = min(regions[i][0] for i in group)
        c_max = max(regions[i][1] for i in group)
        dx = c_min / c_ref
        spatial += len(group) * (1.0 / dx) ** 3
        steps = max(steps, c_max / (dx * c_ref))
    return spatial * steps
