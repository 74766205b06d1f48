"""Numba stencil kernels shared by the 1D operators and the 3D solver.

Arrays are laid out (z, y, x) with x contiguous.  The periodic kernels
implement the interior fourth-order staggered stencil with wraparound
along the stated axis; the banded kernel applies a closure-form operator
(dense end blocks plus a four-tap interior stencil) along axis 0.

All kernels write into caller-provided output arrays and are free of
reductions, so results are bit-reproducible regardless of threading.
"""

from numba import njit

# Interior staggered stencil, grouped as b*(du_near) + c*(du_far).
_B = 9.0 / 8.0
_C = 1.0 / 24.0


@njit(cache=True)
def apply_banded_axis0(u, lblock, rblock, cint, shift, out):
    """Apply a closure-form operator along axis 0 of a 3D array.

    ``lblock``/``rblock`` are the dense end blocks (rows x 5), ``cint`` the
    four interior coefficients; interior output row r reads input rows
    ``r - shift .. r - shift + 3``.  Coefficients carry the 1/dx scaling.
    """
    n_out = out.shape[0]
    n_in = u.shape[0]
    ny = u.shape[1]
    nx = u.shape[2]
    nl = lblock.shape[0]
    nr = rblock.shape[0]
    w = lblock.shape[1]

    for r in range(nl):
        for j in range(ny):
            for i in range(nx):
                s = 0.0
                for c in range(w):
                    s += lblock[r, c] * u[c, j, i]
                out[r, j, i] = s
    c0 = cint[0]
    c1 = cint[1]
    c2 = cint[2]
    c3 = cint[3]
    for r in range(nl, n_out - nr):
        b = r - shift
        for j in range(ny):
            for i in range(nx):
                out[r, j, i] = (c0 * u[b, j, i] + c1 * u[b + 1, j, i]
                                + c2 * u[b + 2, j, i] + c3 * u[b + 3, j, i])
    for r in range(nr):
        rr = n_out - nr + r
        for j in range(ny):
            for i in range(nx):
                s = 0.0
                for c in range(w):
                    s += rblock[r, c] * u[n_in - w + c, j, i]
                out[rr, j, i] = s


@njit(cache=True)
def deriv_x_n2m(u, inv_h, out):
    """d/dx of node-grid data onto the half-offset grid, periodic in x."""
    nz, ny, nx = u.shape
    b = _B * inv_h
    c = _C * inv_h
    for k in range(nz):
        for j in range(ny):
            row = u[k, j]
            o = out[k, j]
            o[0] = b * (row[1] - row[0]) - c * (row[2] - row[nx - 1])
            for i in range(1, nx - 2):
                o[i] = b * (row[i + 1] - row[i]) - c * (row[i + 2] - row[i - 1])
            o[nx - 2] = b * (row[nx - 1] - row[nx - 2]) - c * (row[0] - row[nx - 3])
            o[nx - 1] = b * (row[0] - row[nx - 1]) - c * (row[1] - row[nx - 2])


@njit(cache=True)
def deriv_x_m2n(u, inv_h, out):
    """d/dx of half-offset data onto the node grid, periodic in x."""
    nz, ny, nx = u.shape
    b = _B * inv_h
    c = _C * inv_h
    for k in range(nz):
        for j in range(ny):
            row = u[k, j]
            o = out[k, j]
            o[0] = b * (row[0] - row[nx - 1]) - c * (row[1] - row[nx - 2])
            o[1] = b * (row[1] - row[0]) - c * (row[2] - row[nx - 1])
            for i in range(2, nx - 1):
                o[i] = b * (row[i] - row[i - 1]) - c * (row[i + 1] - row[i - 2])
            o[nx - 1] = b * (row[nx - 1] - row[nx - 2]) - c * (row[0] - row[nx - 3])


@njit(cache=True)
def deriv_y_n2m(u, inv_h, out):
    """d/dy of node-grid data onto the half-offset grid, periodic in y."""
    nz, ny, nx = u.shape
    b = _B * inv_h
    c = _C * inv_h
    for k in range(nz):
        for j in range(ny):
            jm1 = j - 1 if j >= 1 else ny - 1
            jp1 = j + 1 if j + 1 < ny else j + 1 - ny
            jp2 = j + 2 if j + 2 < ny else j + 2 - ny
            for i in range(nx):
                out[k, j, i] = (b * (u[k, jp1, i] - u[k, j, i])
                                - c * (u[k, jp2, i] - u[k, jm1, i]))


@njit(cache=True)
def deriv_y_m2n(u, inv_h, out):
    """d/dy of half-offset data onto the node grid, periodic in y."""
    nz, ny, nx = u.shape
    b = _B * inv_h
    c = _C * inv_h
    for k in range(nz):
        for j in range(ny):
            jm2 = j - 2 if j >= 2 else j - 2 + ny
            jm1 = j - 1 if j >= 1 else ny - 1
            jp1 = j + 1 if j + 1 < ny else j + 1 - ny
            for i in range(nx):
                out[k, j, i] = (b * (u[k, j, i] - u[k, jm1, i])
                                - c * (u[k, jp1, i] - u[k, jm2, i]))
