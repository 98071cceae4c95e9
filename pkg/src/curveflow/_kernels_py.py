"""Pure numpy implementation of the flow step kernel.

The compiled module ``_kernels`` provides the same functions; ``kernels``
picks one at import time.
"""
import numpy as np
from scipy.linalg import solve_banded

BANDS = 3  # lower and upper bandwidth of the node-interleaved system


def assemble(points: np.ndarray, dt: float, cos_alpha: float):
    """Banded matrix and right-hand side of one linearly implicit step.

    Unknowns are interleaved per node as ``(dx_i, dy_i, kappa_i)`` where
    ``(dx_i, dy_i)`` is the position increment over the step.  Rows
    ``3i`` and ``3i+1`` discretize ``kappa n = d_ss X`` tested against the hat
    function of node ``i`` (with the contact-angle condition as natural
    boundary term), row ``3i+2`` discretizes ``V = -d_ss kappa`` with the
    no-flux condition as natural boundary term.  The y rows of both endpoints
    are replaced by ``y = 0``.

    Parameters
    ----------
    points : ndarray, shape (N+1, 2)
        Node positions at the old time level; all coefficients are frozen here.
    dt : float
    cos_alpha : float

    Returns
    -------
    ab : ndarray, shape (7, 3N+3)
        Matrix in LAPACK band storage for ``solve_banded((3, 3), ...)``.
    rhs : ndarray, shape (3N+3,)
    """
    X = np.asarray(points, dtype=float)
    npts = X.shape[0]
    seg = X[1:] - X[:-1]
    h = np.hypot(seg[:, 0], seg[:, 1])
    nu = np.empty_like(seg)  # h * (R tau) per element
    nu[:, 0] = -seg[:, 1]
    nu[:, 1] = seg[:, 0]
    omega = np.zeros_like(X)
    omega[:-1] += 0.5 * nu
    omega[1:] += 0.5 * nu
    inv = 1.0 / h
    diag = np.zeros(npts)
    diag[:-1] += inv
    diag[1:] += inv

    m = 3 * npts
    ab = np.zeros((2 * BANDS + 1, m))

    def put(rows, cols, vals):
        ab[BANDS + rows - cols, cols] = vals

    idx = np.arange(npts)
    rx, ry, rk = 3 * idx, 3 * idx + 1, 3 * idx + 2
    # stiffness on positions: rows x and y
    put(rx, rx, diag)
    put(ry, ry, diag)
    put(rx[:-1], rx[1:], -inv)
    put(rx[1:], rx[:-1], -inv)
    put(ry[:-1], ry[1:], -inv)
    put(ry[1:], ry[:-1], -inv)
    # curvature coupling kappa_i * omega_i
    put(rx, rk, omega[:, 0])
    put(ry, rk, omega[:, 1])
    # normal velocity rows: omega . dX - dt * A kappa = 0
    put(rk, rx, omega[:, 0])
    put(rk, ry, omega[:, 1])
    put(rk, rk, -dt * diag)
    put(rk[:-1], rk[1:], dt * inv)
    put(rk[1:], rk[:-1], dt * inv)

    # stiffness applied to the old positions, built from unit chords so that
    # it is translation invariant
    tau = seg * inv[:, None]
    ax = np.zeros_like(X)
    ax[:-1] -= tau
    ax[1:] += tau
    rhs = np.zeros(m)
    rhs[rx] = -ax[:, 0]
    rhs[ry] = -ax[:, 1]
    rhs[0] -= cos_alpha
    rhs[3 * (npts - 1)] += cos_alpha
    # Dirichlet rows: new endpoint heights are zero
    for node, r in ((0, 1), (npts - 1, 3 * (npts - 1) + 1)):
        for off in range(-BANDS, BANDS + 1):
            c = r + off
            if 0 <= c < m:
                ab[BANDS + r - c, c] = 0.0
        ab[BANDS, r] = 1.0
        rhs[r] = -X[node, 1]
    return ab, rhs


def implicit_step(points: np.ndarray, dt: float, cos_alpha: float):
    """Solve one step; returns new positions and nodal curvatures.

    Raises ``numpy.linalg.LinAlgError`` on a singular system.
    """
    ab, rhs = assemble(points, dt, cos_alpha)
    sol = solve_banded((BANDS, BANDS), ab, rhs, overwrite_ab=True, overwrite_b=True,
                       check_finite=False)
    sol = sol.reshape(-1, 3)
    return np.asarray(points, dtype=float) + sol[:, :2], np.ascontiguousarray(sol[:, 2])
