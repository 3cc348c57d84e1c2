"""Pure-numpy implementations of the hot loops (fallback for ``_ckernels``)."""
import numpy as np

from ._quadrature_weights import gregory_endpoint_weights

_ROW_BLOCK = 256


def green_quadrature(x, f, dx, derivative):
    """Direct real-line quadrature of ``G*f`` or ``dG/dx*f`` with G = exp(-|x|)/2.

    Each half-line integral is a trapezoid sum with Gregory corrections at the
    kink ``y = x_i``; samples beyond the box are taken as zero.
    """
    x = np.ascontiguousarray(x, dtype=float)
    f = np.ascontiguousarray(f, dtype=float)
    n = x.size
    w = gregory_endpoint_weights()
    nw = w.size
    sign_left = -1.0 if derivative else 1.0
    out = np.empty(n)
    idx = np.arange(n)
    for start in range(0, n, _ROW_BLOCK):
        rows = slice(start, min(start + _ROW_BLOCK, n))
        xi = x[rows, None]
        s = x[None, :] - xi
        kern = 0.5 * np.exp(-np.abs(s)) * f[None, :]
        right_mask = idx[None, :] >= idx[rows, None]
        right = np.where(right_mask, kern, 0.0).sum(axis=1)
        left = np.where(right_mask, 0.0, kern).sum(axis=1)
        diag = kern[np.arange(kern.shape[0]), idx[rows]]
        left = left + diag
        right -= 0.5 * diag
        left -= 0.5 * diag
        for r, i in enumerate(range(rows.start, rows.stop)):
            jr = np.arange(i, min(i + nw, n))
            jl = np.arange(i, max(i - nw, -1), -1)
            right[r] += np.dot(w[: jr.size], kern[r, jr])
            left[r] += np.dot(w[: jl.size], kern[r, jl])
        out[rows] = dx * (right + sign_left * left)
    return out


def trig_eval(coeffs, points, xi1, shift):
    """Evaluate real trigonometric interpolants at off-grid points.

    ``coeffs`` holds unnormalised rfft coefficients, one row per field; the
    result has one row per field and one column per point.
    """
    coeffs = np.atleast_2d(np.asarray(coeffs, dtype=complex))
    points = np.asarray(points, dtype=float)
    nh = coeffs.shape[1]
    n = 2 * (nh - 1)
    k = np.arange(nh)
    weight = np.full(nh, 2.0)
    weight[0] = 1.0
    weight[-1] = 1.0
    phase = np.exp(1j * xi1 * np.outer(k, points + shift))
    return ((coeffs * weight) @ phase).real / n
