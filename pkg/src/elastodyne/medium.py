"""Material models: raw grids, parameter synthesis, sub-grid sampling.

Velocity/density models arrive as raw little-endian float32 volumes (x
fastest, z slowest) with a small text sidecar carrying dims, spacing, and
the scalar kind.  Models that provide only the compressional speed can
synthesize shear speed and density from linear-in-depth profiles.

Each layer samples rho onto the three velocity sub-grids and the Lame
parameters onto the stress sub-grids (lambda and mu on the normal-stress
sub-grid, mu alone on each shear sub-grid) by trilinear interpolation at
the sub-grid node locations, with nearest-value extrapolation inside the
model's outer half cell.  Trilinear point sampling is exact for constant
and linear parameter fields, which makes piecewise-constant layer media
exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .wavefield3d import LayerGrid, axis_coords, field_shape

SCALAR_KINDS = ("cp", "cs", "rho")


@dataclass(frozen=True)
class ParameterGrid:
    """A scalar material parameter sampled on a uniform reference grid."""

    values: np.ndarray      # (nz, ny, nx)
    spacing: float
    kind: str
    origin: tuple[float, float, float] = (0.0, 0.0, 0.0)

    @property
    def dims(self) -> tuple[int, int, int]:
        nz, ny, nx = self.values.shape
        return (nx, ny, nz)

    def extent_z(self) -> float:
        return (self.values.shape[0] - 1) * self.spacing


def _validate_values(values: np.ndarray, kind: str, source: str):
    if kind not in SCALAR_KINDS:
        raise ValueError(f"unknown scalar kind {kind!r}")
    if not np.isfinite(values).all():
        raise ValueError(f"{source}: non-finite {kind} values")
    if kind in ("cp", "rho") and not (values > 0).all():
        raise ValueError(f"{source}: {kind} must be strictly positive")
    if kind == "cs" and not (values >= 0).all():
        raise ValueError(f"{source}: cs must be nonnegative")


def load_raw_model(path, dims, spacing, kind) -> ParameterGrid:
    """Read a raw float32 model (little endian, x fastest, z slowest)."""
    nx, ny, nz = dims
    path = Path(path)
    expected = nx * ny * nz * 4
    actual = path.stat().st_size
    if actual != expected:
        raise ValueError(
            f"{path}: size {actual} bytes does not match "
            f"{nx}x{ny}x{nz} float32 ({expected} bytes)"
        )
    raw = np.fromfile(path, dtype="<f4").astype(np.float64)
    values = raw.reshape(nz, ny, nx)
    _validate_values(values, kind, str(path))
    return ParameterGrid(values=values, spacing=float(spacing), kind=kind)


def write_raw_model(path, grid: ParameterGrid):
    """Write a model plus its text sidecar (``<path>.hdr``)."""
    path = Path(path)
    grid.values.astype("<f4").tofile(path)
    nx, ny, nz = grid.dims
    sidecar = path.with_name(path.name + ".hdr")
    sidecar.write_text(
        f"nx={nx}\nny={ny}\nnz={nz}\nspacing={grid.spacing!r}\n"
        f"kind={grid.kind}\n"
    )


def read_sidecar(path) -> tuple[tuple[int, int, int], float, str]:
    sidecar = Path(str(path) + ".hdr")
    fields = {}
    for line in sidecar.read_text().splitlines():
        line = line.strip()
        if line and "=" in line:
            key, value = line.split("=", 1)
            fields[key.strip()] = value.strip()
    dims = (int(fields["nx"]), int(fields["ny"]), int(fields["nz"]))
    return dims, float(fields["spacing"]), fields["kind"]


def load_model_with_sidecar(path) -> ParameterGrid:
    dims, spacing, kind = read_sidecar(path)
    return load_raw_model(path, dims, spacing, kind)


def synthesize_cs_rho(cp: ParameterGrid, ratio_top: float, ratio_bottom: float,
                      rho_top: float, rho_bottom: float
                      ) -> tuple[ParameterGrid, ParameterGrid]:
    """Synthesize shear speed and density from linear-in-depth profiles.

    At depth fraction t, cs = cp / ((1-t) ratio_top + t ratio_bottom) and
    rho interpolates linearly between its top and bottom values.
    """
    if ratio_top < 1 or ratio_bottom < 1:
        raise ValueError("cp/cs ratios must be at least 1")
    nz = cp.values.shape[0]
    t = np.linspace(0.0, 1.0, nz)[:, None, None] if nz > 1 else np.zeros((1, 1, 1))
    ratio = (1.0 - t) * ratio_top + t * ratio_bottom
    cs_values = cp.values / ratio
    rho_values = np.broadcast_to(
        (1.0 - t) * rho_top + t * rho_bottom, cp.values.shape).copy()
    cs = ParameterGrid(values=cs_values, spacing=cp.spacing, kind="cs",
                       origin=cp.origin)
    rho = ParameterGrid(values=rho_values, spacing=cp.spacing, kind="rho",
                        origin=cp.origin)
    return cs, rho


def _interp_axis(values: np.ndarray, axis: int, coords: np.ndarray,
                 spacing: float, origin: float) -> np.ndarray:
    """Linear interpolation along one axis at given physical coordinates.

    Coordinates are clamped to the sampled range, which realizes nearest
    extrapolation in the outer half cell.
    """
    n = values.shape[axis]
    t = (np.asarray(coords, dtype=np.float64) - origin) / spacing
    t = np.clip(t, 0.0, n - 1.0)
    i0 = np.minimum(t.astype(np.int64), n - 2) if n > 1 else np.zeros(len(t), np.int64)
    w = t - i0
    lo = np.take(values, i0, axis=axis)
    hi = np.take(values, np.minimum(i0 + 1, n - 1), axis=axis)
    shape = [1] * values.ndim
    shape[axis] = len(t)
    w = w.reshape(shape)
    return (1.0 - w) * lo + w * hi


def sample_to_subgrid(grid: ParameterGrid, layer: LayerGrid, field: str,
                      z_top: float = 0.0) -> np.ndarray:
    """Trilinear samples of a parameter at one field's sub-grid nodes."""
    xs = axis_coords(layer, field, "x")
    ys = axis_coords(layer, field, "y")
    zs = axis_coords(layer, field, "z", origin=z_top)
    half = grid.spacing / 2 + 1e-9
    ox, oy, oz = grid.origin
    nzg, nyg, nxg = grid.values.shape
    for coords, o, n, name in ((xs, ox, nxg, "x"), (ys, oy, nyg, "y"),
                               (zs, oz, nzg, "z")):
        lo, hi = o - half, o + (n - 1) * grid.spacing + half
        if coords[0] < lo or coords[-1] > hi:
            raise ValueError(
                f"layer extends outside the model volume along {name}: "
                f"[{coords[0]}, {coords[-1]}] vs [{lo}, {hi}]"
            )
    out = _interp_axis(grid.values, 0, zs, grid.spacing, oz)
    out = _interp_axis(out, 1, ys, grid.spacing, oy)
    out = _interp_axis(out, 2, xs, grid.spacing, ox)
    return np.ascontiguousarray(out)


def lame_parameters(cp, cs, rho):
    """lambda = rho (cp^2 - 2 cs^2), mu = rho cs^2."""
    mu = rho * cs ** 2
    lam = rho * (cp ** 2 - 2.0 * cs ** 2)
    return lam, mu


@dataclass
class IsotropicMedium:
    """rho, lambda, mu sampled where the update equations consume them."""

    rho_vx: np.ndarray
    rho_vy: np.ndarray
    rho_vz: np.ndarray
    lam_nn: np.ndarray
    mu_nn: np.ndarray
    mu_xy: np.ndarray
    mu_xz: np.ndarray
    mu_yz: np.ndarray
    # Reciprocals used every step.
    inv_rho_vx: np.ndarray = None
    inv_rho_vy: np.ndarray = None
    inv_rho_vz: np.ndarray = None

    def __post_init__(self):
        for name in ("rho_vx", "rho_vy", "rho_vz"):
            rho = getattr(self, name)
            if not (np.isfinite(rho).all() and (rho > 0).all()):
                raise ValueError(f"{name} must be finite and positive")
        for name in ("mu_nn", "mu_xy", "mu_xz", "mu_yz"):
            mu = getattr(self, name)
            if not (np.isfinite(mu).all() and (mu >= 0).all()):
                raise ValueError(f"{name} must be finite and nonnegative")
        if not ((self.lam_nn + 2.0 * self.mu_nn) > 0).all():
            raise ValueError("lambda + 2 mu must be strictly positive")
        self.inv_rho_vx = 1.0 / self.rho_vx
        self.inv_rho_vy = 1.0 / self.rho_vy
        self.inv_rho_vz = 1.0 / self.rho_vz


def medium_from_constants(layer: LayerGrid, cp: float, cs: float,
                          rho: float) -> IsotropicMedium:
    lam, mu = lame_parameters(cp, cs, rho)

    def full(field, value):
        return np.full(field_shape(layer, field), float(value))

    return IsotropicMedium(
        rho_vx=full("vx", rho), rho_vy=full("vy", rho), rho_vz=full("vz", rho),
        lam_nn=full("sxx", lam), mu_nn=full("sxx", mu),
        mu_xy=full("sxy", mu), mu_xz=full("sxz", mu), mu_yz=full("syz", mu),
    )


def medium_from_grids(layer: LayerGrid, cp: ParameterGrid, cs: ParameterGrid,
                      rho: ParameterGrid, z_top: float = 0.0) -> IsotropicMedium:
    """Sample (cp, cs, rho) grids onto a layer's staggered sub-grids."""

    def lame_on(field):
        cp_s = sample_to_subgrid(cp, layer, field, z_top)
        cs_s = sample_to_subgrid(cs, layer, field, z_top)
        rho_s = sample_to_subgrid(rho, layer, field, z_top)
        return lame_parameters(cp_s, cs_s, rho_s)

    lam_nn, mu_nn = lame_on("sxx")
    return IsotropicMedium(
        rho_vx=sample_to_subgrid(rho, layer, "vx", z_top),
        rho_vy=sample_to_subgrid(rho, layer, "vy", z_top),
        rho_vz=sample_to_subgrid(rho, layer, "vz", z_top),
        lam_nn=lam_nn, mu_nn=mu_nn,
        mu_xy=lame_on("sxy")[1],
        mu_xz=lame_on("sxz")[1],
        mu_yz=lame_on("syz")[1],
    )
