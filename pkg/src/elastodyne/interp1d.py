"""Compatible 1D interpolation operators for nonconforming grid interfaces.

Two uniform periodic grids with spacing ratio fine:coarse = p:q share a
common origin.  On each side a field may live on the node grid (N, points
at ``k*h``) or on the half-offset grid (M, points at ``(k+1/2)*h``).  The
coarse-to-fine operators below transfer a field across the interface; they
are stored as cyclic stencil banks, one coefficient row per fine-grid
phase, replicated with period q (fine) against period p (coarse).

Fine-to-coarse operators are never entered by hand.  They are derived from
the coarse-to-fine bank through the norm-weighted transpose

    a_fine * T_c2f == (a_coarse * T_f2c)^T

so the pair is compatible by construction: in an energy estimate the two
directions' interface terms cancel exactly.  With uniform periodic norm
weights (weight = spacing) the scale factor is exactly p/q and the
derivation is carried out in rational arithmetic.

Every row sums to one (constants pass through unchanged) and reproduces
polynomials up to degree two exactly; ``check_poly_exactness`` evaluates
each stencil row at its true output coordinate to confirm this.

For the 2:3 ratio two valid operator pairs exist; the second is available
as ``variant="alternative"``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction as Fr

import numpy as np

SUPPORTED_RATIOS = ((1, 2), (1, 3), (2, 3), (1, 4), (3, 4))


@dataclass(frozen=True)
class GridRatio:
    """Spacing ratio fine:coarse = p:q, from the supported set."""

    p: int
    q: int

    def __post_init__(self):
        if (self.p, self.q) not in SUPPORTED_RATIOS:
            supported = ", ".join(f"{p}:{q}" for p, q in SUPPORTED_RATIOS)
            raise ValueError(
                f"unsupported grid ratio {self.p}:{self.q} "
                f"(supported: {supported})"
            )

    @classmethod
    def parse(cls, text: str) -> "GridRatio":
        try:
            p_s, q_s = text.split(":")
            return cls(int(p_s), int(q_s))
        except ValueError:
            raise ValueError(f"cannot parse grid ratio {text!r}") from None

    @classmethod
    def from_spacings(cls, h_fine: float, h_coarse: float) -> "GridRatio":
        r = h_fine / h_coarse
        for p, q in SUPPORTED_RATIOS:
            if abs(r - p / q) < 1e-9:
                return cls(p, q)
        raise ValueError(
            f"spacing ratio {h_fine}:{h_coarse} is not in the supported set"
        )

    def __str__(self):
        return f"{self.p}:{self.q}"


# Coarse-to-fine stencil banks.  Keys: (p, q, kind, variant).  Each bank has
# one row per fine phase r (fine index j = q*c + r); a row lists coarse
# offsets relative to the cycle base p*c, with exact coefficients.
_ROW = tuple[tuple[int, ...], tuple[Fr, ...]]

_BANKS: dict[tuple[int, int, str, str], tuple[_ROW, ...]] = {
    (1, 2, "N", "standard"): (
        ((0,), (Fr(1),)),
        ((-1, 0, 1, 2), (Fr(-1, 16), Fr(9, 16), Fr(9, 16), Fr(-1, 16))),
    ),
    (1, 2, "M", "standard"): (
        ((-1, 0, 1), (Fr(5, 32), Fr(15, 16), Fr(-3, 32))),
        ((-1, 0, 1), (Fr(-3, 32), Fr(15, 16), Fr(5, 32))),
    ),
    (1, 3, "N", "standard"): (
        ((0,), (Fr(1),)),
        ((-1, 0, 1), (Fr(-1, 9), Fr(8, 9), Fr(2, 9))),
        ((0, 1, 2), (Fr(2, 9), Fr(8, 9), Fr(-1, 9))),
    ),
    (1, 3, "M", "standard"): (
        ((-1, 0, 1), (Fr(2, 9), Fr(8, 9), Fr(-1, 9))),
        ((0,), (Fr(1),)),
        ((-1, 0, 1), (Fr(-1, 9), Fr(8, 9), Fr(2, 9))),
    ),
    (2, 3, "N", "standard"): (
        ((0,), (Fr(1),)),
        ((-1, 0, 1, 2, 3),
         (Fr(-11, 288), Fr(1, 3), Fr(113, 144), Fr(-1, 12), Fr(1, 288))),
        ((-1, 0, 1, 2, 3),
         (Fr(1, 288), Fr(-1, 12), Fr(113, 144), Fr(1, 3), Fr(-11, 288))),
    ),
    (2, 3, "M", "standard"): (
        ((-1, 0, 1, 2),
         (Fr(101, 1152), Fr(1153, 1152), Fr(-113, 1152), Fr(11, 1152))),
        ((-1, 0, 1, 2), (Fr(-1, 16), Fr(9, 16), Fr(9, 16), Fr(-1, 16))),
        ((-1, 0, 1, 2),
         (Fr(11, 1152), Fr(-113, 1152), Fr(1153, 1152), Fr(101, 1152))),
    ),
    (1, 4, "N", "standard"): (
        ((0,), (Fr(1),)),
        ((-1, 0, 1), (Fr(-3, 32), Fr(15, 16), Fr(5, 32))),
        ((-1, 0, 1, 2), (Fr(-1, 16), Fr(9, 16), Fr(9, 16), Fr(-1, 16))),
        ((0, 1, 2), (Fr(5, 32), Fr(15, 16), Fr(-3, 32))),
    ),
    (1, 4, "M", "standard"): (
        ((-1, 0, 1), (Fr(33, 128), Fr(55, 64), Fr(-15, 128))),
        ((-1, 0, 1), (Fr(9, 128), Fr(63, 64), Fr(-7, 128))),
        ((-1, 0, 1), (Fr(-7, 128), Fr(63, 64), Fr(9, 128))),
        ((-1, 0, 1), (Fr(-15, 128), Fr(55, 64), Fr(33, 128))),
    ),
    (3, 4, "N", "standard"): (
        ((0,), (Fr(1),)),
        ((-1, 0, 1, 2, 3),
         (Fr(-119, 4320), Fr(67, 288), Fr(629, 720), Fr(-367, 4320),
          Fr(1, 160))),
        ((-1, 0, 1, 2, 3, 4),
         (Fr(7, 2160), Fr(-13, 180), Fr(1229, 2160), Fr(1229, 2160),
          Fr(-13, 180), Fr(7, 2160))),
        ((0, 1, 2, 3, 4),
         (Fr(1, 160), Fr(-367, 4320), Fr(629, 720), Fr(67, 288),
          Fr(-119, 4320))),
    ),
    (3, 4, "M", "standard"): (
        ((-1, 0, 1, 2),
         (Fr(35, 576), Fr(389, 384), Fr(-1, 12), Fr(11, 1152))),
        ((-1, 0, 1, 2, 3),
         (Fr(-77, 1728), Fr(1325, 3456), Fr(3, 4), Fr(-335, 3456),
          Fr(7, 864))),
        ((-1, 0, 1, 2, 3),
         (Fr(7, 864), Fr(-335, 3456), Fr(3, 4), Fr(1325, 3456),
          Fr(-77, 1728))),
        ((0, 1, 2, 3),
         (Fr(11, 1152), Fr(-1, 12), Fr(389, 384), Fr(35, 576))),
    ),
    (2, 3, "N", "alternative"): (
        ((-2, -1, 0, 1, 2),
         (Fr(-1, 96), Fr(1, 24), Fr(15, 16), Fr(1, 24), Fr(-1, 96))),
        ((-1, 0, 1, 2),
         (Fr(-13, 288), Fr(103, 288), Fr(217, 288), Fr(-19, 288))),
        ((0, 1, 2, 3),
         (Fr(-19, 288), Fr(217, 288), Fr(103, 288), Fr(-13, 288))),
    ),
    (2, 3, "M", "alternative"): (
        ((-2, -1, 0, 1),
         (Fr(-11, 576), Fr(89, 576), Fr(527, 576), Fr(-29, 576))),
        ((-1, 0, 1, 2), (Fr(-1, 16), Fr(9, 16), Fr(9, 16), Fr(-1, 16))),
        ((0, 1, 2, 3),
         (Fr(-29, 576), Fr(527, 576), Fr(89, 576), Fr(-11, 576))),
    ),
}


@dataclass(frozen=True)
class InterpOp1D:
    """A periodic 1D interpolation operator between two staggered grids.

    ``bank`` holds one row per output phase: output index
    ``out_cycle*c + r`` gathers inputs at ``in_cycle*c + offset`` (mod
    ``n_in``).  Coordinates (in coarse-spacing units) of input/output index
    k are ``(k + in_half/2) * in_step`` and likewise for outputs; they make
    the polynomial-exactness check independent of periodic wraparound.

    Immutable after construction; application is pure.
    """

    ratio: GridRatio
    kind: str              # "N" | "M"
    direction: str         # "coarse_to_fine" | "fine_to_coarse"
    variant: str
    n_in: int
    n_out: int
    in_cycle: int
    out_cycle: int
    in_step: Fr
    out_step: Fr
    half_offset: bool      # True for kind "M"
    bank: tuple[_ROW, ...]
    _gather: tuple[np.ndarray, ...]   # per phase: (ntaps, ncycles) indices
    _coeffs: tuple[np.ndarray, ...]   # per phase: float coefficients
    periodic: bool = True

    def in_coord(self, idx: int) -> Fr:
        shift = Fr(1, 2) if self.half_offset else Fr(0)
        return (idx + shift) * self.in_step

    def out_coord(self, idx: int) -> Fr:
        shift = Fr(1, 2) if self.half_offset else Fr(0)
        return (idx + shift) * self.out_step


def _finish_op(ratio, kind, direction, variant, n_in, n_out, in_cycle,
               out_cycle, in_step, out_step, bank):
    ncyc = n_out // out_cycle
    gather = []
    coeffs = []
    for offsets, cs in bank:
        base = in_cycle * np.arange(ncyc)
        idx = np.stack([(base + o) % n_in for o in offsets])
        gather.append(idx)
        coeffs.append(np.array([float(c) for c in cs]))
    return InterpOp1D(
        ratio=ratio, kind=kind, direction=direction, variant=variant,
        n_in=n_in, n_out=n_out, in_cycle=in_cycle, out_cycle=out_cycle,
        in_step=in_step, out_step=out_step, half_offset=(kind == "M"),
        bank=bank, _gather=tuple(gather), _coeffs=tuple(coeffs),
    )


def build_coarse_to_fine(ratio: GridRatio, kind: str, n_coarse: int,
                         variant: str = "standard") -> InterpOp1D:
    """Build the coarse-to-fine operator for one grid kind.

    The fine count is ``n_coarse * q / p``; it must be integral, which for
    coprime p, q means p must divide ``n_coarse``.  The stencil bank wraps
    periodically, so no boundary closures exist.
    """
    if kind not in ("N", "M"):
        raise ValueError(f"kind must be 'N' or 'M', got {kind!r}")
    if variant not in ("standard", "alternative"):
        raise ValueError(f"unknown variant {variant!r}")
    if variant == "alternative" and (ratio.p, ratio.q) != (2, 3):
        raise ValueError(
            f"alternative operators exist only for ratio 2:3, not {ratio}"
        )
    p, q = ratio.p, ratio.q
    if n_coarse < 4 or (n_coarse * q) % p != 0 or n_coarse % p != 0:
        raise ValueError(
            f"coarse count {n_coarse} incompatible with ratio {ratio}: "
            f"fine count {n_coarse}*{q}/{p} must be integral"
        )
    bank = _BANKS[(p, q, kind, variant)]
    return _finish_op(
        ratio, kind, "coarse_to_fine", variant,
        n_in=n_coarse, n_out=n_coarse * q // p,
        in_cycle=p, out_cycle=q,
        in_step=Fr(1), out_step=Fr(p, q),
        bank=bank,
    )


def derive_fine_to_coarse(op: InterpOp1D, a_fine: float,
                          a_coarse: float) -> InterpOp1D:
    """Derive the reverse operator from the norm-weighted transpose.

    ``a_fine``/``a_coarse`` are the uniform interior norm weights of the
    two periodic grids (weight = spacing); their ratio must equal p/q.
    The resulting operator satisfies the compatibility relation exactly.
    """
    if op.direction != "coarse_to_fine":
        raise ValueError("can only derive from a coarse-to-fine operator")
    p, q = op.ratio.p, op.ratio.q
    scale = Fr(p, q)
    if abs(float(a_fine) / float(a_coarse) - p / q) > 1e-9:
        raise ValueError(
            f"norm weights {a_fine}/{a_coarse} do not match ratio {op.ratio}"
        )
    # Transpose the bank: fine j = q*c + r taking coarse p*c + o with weight
    # w contributes, for coarse output phase s = o mod p, the fine offset
    # q*(s - o)/p + r with weight (p/q)*w.
    rows: list[dict[int, Fr]] = [dict() for _ in range(p)]
    for r, (offsets, cs) in enumerate(op.bank):
        for o, w in zip(offsets, cs):
            s = o % p
            d = (s - o) // p
            off = q * d + r
            rows[s][off] = rows[s].get(off, Fr(0)) + scale * w
    bank = tuple(
        (tuple(sorted(row)), tuple(row[o] for o in sorted(row)))
        for row in rows
    )
    return _finish_op(
        op.ratio, op.kind, "fine_to_coarse", op.variant,
        n_in=op.n_out, n_out=op.n_in,
        in_cycle=q, out_cycle=p,
        in_step=Fr(p, q), out_step=Fr(1),
        bank=bank,
    )


def apply_interp(op: InterpOp1D, values, axis: int = 0) -> np.ndarray:
    """Apply the operator along ``axis`` with periodic wraparound."""
    u = np.asarray(values, dtype=np.float64)
    if u.shape[axis] != op.n_in:
        raise ValueError(
            f"expected {op.n_in} values along axis {axis}, got {u.shape[axis]}"
        )
    um = np.moveaxis(u, axis, 0)
    out = np.empty((op.n_out,) + um.shape[1:])
    for r in range(len(op.bank)):
        idx = op._gather[r]
        cs = op._coeffs[r]
        acc = cs[0] * um[idx[0]]
        for t in range(1, len(cs)):
            acc += cs[t] * um[idx[t]]
        out[r::op.out_cycle] = acc
    return np.moveaxis(out, 0, axis)


def dense_interp(op: InterpOp1D) -> np.ndarray:
    """Materialize the operator as a dense matrix.  Verification only."""
    t = np.zeros((op.n_out, op.n_in))
    ncyc = op.n_out // op.out_cycle
    for r, (offsets, cs) in enumerate(op.bank):
        for c in range(ncyc):
            j = op.out_cycle * c + r
            for o, w in zip(offsets, cs):
                t[j, (op.in_cycle * c + o) % op.n_in] += float(w)
    return t


def reciprocity_residual(c2f: InterpOp1D, f2c: InterpOp1D, a_fine: float,
                         a_coarse: float) -> float:
    """Max-abs residual of the norm-weighted transpose relation."""
    tf = dense_interp(c2f)
    tc = dense_interp(f2c)
    return float(np.abs(a_fine * tf - (a_coarse * tc).T).max())


def check_poly_exactness(op: InterpOp1D, degree: int) -> float:
    """Worst-case error reproducing x**degree, row by row.

    Each stencil row is evaluated against monomial samples at its taps'
    true coordinates and compared with the monomial at the row's output
    coordinate, so the check is unaffected by periodic wraparound.
    """
    worst = 0.0
    for r, (offsets, cs) in enumerate(op.bank):
        y = float(op.out_coord(r))
        acc = 0.0
        for o, w in zip(offsets, cs):
            acc += float(w) * float(op.in_coord(o)) ** degree
        worst = max(worst, abs(acc - y ** degree))
    return worst
