r"""Faddeeva function :math:`w(z) = e^{-z^2}\operatorname{erfc}(-iz)`.

Poppe & Wijers' algorithm: a Taylor series of :math:`e^{-z^2}` times the
erf series near the origin, Gautschi's continued fraction with a Taylor
correction in the intermediate region, and a plain Laplace continued
fraction far out. The lower half-plane follows from
:math:`w(z) = 2e^{-z^2} - w(-z)`.

Relative accuracy is a few ulps times 1e2 in the closed upper half-plane.
In the lower half-plane accuracy is relative to :math:`|2e^{-z^2}|`
(``w`` has zeros there).
"""
import math

import numpy as np

from ._backend import USE_NUMBA, njit

_TWO_OVER_SQRT_PI = 1.12837916709551257388


@njit
def w_scalar(z):
    """Scalar kernel; ``z`` complex, returns complex."""
    zr = z.real
    zi = z.imag
    xabs = abs(zr)
    yabs = abs(zi)
    x = xabs / 6.3
    y = yabs / 4.4
    qrho = x * x + y * y
    xquad = xabs * xabs - yabs * yabs
    yquad = 2.0 * xabs * yabs
    u2 = 0.0
    v2 = 0.0
    series = qrho < 0.085264
    if series:
        qrho = (1.0 - 0.85 * y) * math.sqrt(qrho)
        n = int(round(6.0 + 72.0 * qrho))
        j = 2 * n + 1
        xsum = 1.0 / j
        ysum = 0.0
        for i in range(n, 0, -1):
            j -= 2
            xaux = (xsum * xquad - ysum * yquad) / i
            ysum = (xsum * yquad + ysum * xquad) / i
            xsum = xaux + 1.0 / j
        u1 = 1.0 - _TWO_OVER_SQRT_PI * (xsum * yabs + ysum * xabs)
        v1 = _TWO_OVER_SQRT_PI * (xsum * xabs - ysum * yabs)
        daux = math.exp(-xquad)
        u2 = daux * math.cos(yquad)
        v2 = -daux * math.sin(yquad)
        u = u1 * u2 - v1 * v2
        v = u1 * v2 + v1 * u2
    else:
        if qrho > 1.0:
            h = 0.0
            kapn = 0
            qrho = math.sqrt(qrho)
            nu = int(3.0 + 1442.0 / (26.0 * qrho + 77.0))
        else:
            qrho = (1.0 - y) * math.sqrt(1.0 - qrho)
            h = 1.88 * qrho
            kapn = int(round(7.0 + 34.0 * qrho))
            nu = int(round(16.0 + 26.0 * qrho))
        h2 = 2.0 * h
        qlambda = h2**kapn if h > 0.0 else 0.0
        rx = 0.0
        ry = 0.0
        sx = 0.0
        sy = 0.0
        for n in range(nu, -1, -1):
            np1 = n + 1
            tx = yabs + h + np1 * rx
            ty = xabs - np1 * ry
            c = 0.5 / (tx * tx + ty * ty)
            rx = c * tx
            ry = c * ty
            if h > 0.0 and n <= kapn:
                tx = qlambda + sx
                sx = rx * tx - ry * sy
                sy = ry * tx + rx * sy
                qlambda = qlambda / h2
        if h == 0.0:
            u = _TWO_OVER_SQRT_PI * rx
            v = _TWO_OVER_SQRT_PI * ry
        else:
            u = _TWO_OVER_SQRT_PI * sx
            v = _TWO_OVER_SQRT_PI * sy
        if yabs == 0.0:
            u = math.exp(-xabs * xabs)
    if zi < 0.0:
        if series:
            u2 = 2.0 * u2
            v2 = 2.0 * v2
        else:
            w1 = 2.0 * math.exp(-xquad)
            u2 = w1 * math.cos(yquad)
            v2 = -w1 * math.sin(yquad)
        u = u2 - u
        v = v2 - v
        if zr > 0.0:
            v = -v
    elif zr < 0.0:
        v = -v
    return complex(u, v)


@njit
def _w_loop(z):
    flat = z.ravel()
    out = np.empty(flat.size, dtype=np.complex128)
    for k in range(flat.size):
        out[k] = w_scalar(flat[k])
    return out.reshape(z.shape)


def w_numpy(z):
    """Vectorised numpy version of :func:`w_scalar` (same arithmetic)."""
    z = np.asarray(z, dtype=np.complex128)
    zr = z.real
    zi = z.imag
    xabs = np.abs(zr)
    yabs = np.abs(zi)
    x = xabs / 6.3
    y = yabs / 4.4
    qrho = x * x + y * y
    xquad = xabs * xabs - yabs * yabs
    yquad = 2.0 * xabs * yabs
    series = qrho < 0.085264
    u = np.empty_like(xabs)
    v = np.empty_like(xabs)
    u2 = np.zeros_like(xabs)
    v2 = np.zeros_like(xabs)

    if series.any():
        xq = xquad[series]
        yq = yquad[series]
        xa = xabs[series]
        ya = yabs[series]
        q = (1.0 - 0.85 * y[series]) * np.sqrt(qrho[series])
        n = np.rint(6.0 + 72.0 * q).astype(np.int64)
        xsum = 1.0 / (2 * n + 1)
        ysum = np.zeros_like(xsum)
        for i in range(int(n.max()), 0, -1):
            act = i <= n
            xaux = (xsum * xq - ysum * yq) / i
            ynew = (xsum * yq + ysum * xq) / i
            xsum = np.where(act, xaux + 1.0 / (2 * i - 1), xsum)
            ysum = np.where(act, ynew, ysum)
        u1 = 1.0 - _TWO_OVER_SQRT_PI * (xsum * ya + ysum * xa)
        v1 = _TWO_OVER_SQRT_PI * (xsum * xa - ysum * ya)
        daux = np.exp(-xq)
        uu2 = daux * np.cos(yq)
        vv2 = -daux * np.sin(yq)
        u[series] = u1 * uu2 - v1 * vv2
        v[series] = u1 * vv2 + v1 * uu2
        u2[series] = uu2
        v2[series] = vv2

    cf = ~series
    if cf.any():
        xa = xabs[cf]
        ya = yabs[cf]
        q = qrho[cf]
        far = q > 1.0
        qs = np.sqrt(q)
        qn = (1.0 - y[cf]) * np.sqrt(np.where(far, 0.0, 1.0 - q))
        h = np.where(far, 0.0, 1.88 * qn)
        kapn = np.where(far, 0, np.rint(7.0 + 34.0 * qn)).astype(np.int64)
        nu = np.where(
            far,
            (3.0 + 1442.0 / (26.0 * qs + 77.0)).astype(np.int64),
            np.rint(16.0 + 26.0 * qn).astype(np.int64),
        )
        h2 = 2.0 * h
        qlambda = np.where(h > 0.0, h2 ** kapn.astype(np.float64), 0.0)
        h2safe = np.where(h > 0.0, h2, 1.0)
        rx = np.zeros_like(xa)
        ry = np.zeros_like(xa)
        sx = np.zeros_like(xa)
        sy = np.zeros_like(xa)
        for n in range(int(nu.max()), -1, -1):
            act = n <= nu
            tx = ya + h + (n + 1) * rx
            ty = xa - (n + 1) * ry
            c = 0.5 / (tx * tx + ty * ty)
            rx = np.where(act, c * tx, rx)
            ry = np.where(act, c * ty, ry)
            upd = act & (h > 0.0) & (n <= kapn)
            t2 = qlambda + sx
            sxn = rx * t2 - ry * sy
            syn = ry * t2 + rx * sy
            sx = np.where(upd, sxn, sx)
            sy = np.where(upd, syn, sy)
            qlambda = np.where(upd, qlambda / h2safe, qlambda)
        uc = np.where(h == 0.0, _TWO_OVER_SQRT_PI * rx, _TWO_OVER_SQRT_PI * sx)
        vc = np.where(h == 0.0, _TWO_OVER_SQRT_PI * ry, _TWO_OVER_SQRT_PI * sy)
        uc = np.where(ya == 0.0, np.exp(-xa * xa), uc)
        u[cf] = uc
        v[cf] = vc

    lower = zi < 0.0
    if lower.any():
        with np.errstate(over="ignore", invalid="ignore"):
            w1 = 2.0 * np.exp(-xquad)
            lu2 = np.where(series, 2.0 * u2, w1 * np.cos(yquad))
            lv2 = np.where(series, 2.0 * v2, -w1 * np.sin(yquad))
        u = np.where(lower, lu2 - u, u)
        v = np.where(lower, lv2 - v, v)
        v = np.where(lower & (zr > 0.0), -v, v)
    v = np.where(~lower & (zr < 0.0), -v, v)
    return u + 1j * v


def faddeeva(z):
    """Faddeeva function of a complex scalar or array.

    >>> faddeeva(0j)
    (1+0j)
    """
    if np.ndim(z) == 0:
        if USE_NUMBA:
            return complex(w_scalar(complex(z)))
        return complex(w_numpy(np.array([complex(z)]))[0])
    z = np.asarray(z, dtype=np.complex128)
    if USE_NUMBA:
        return _w_loop(z)
    return w_numpy(z)
