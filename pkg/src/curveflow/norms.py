"""Temporally weighted Lebesgue, Sobolev and Sobolev-Slobodetskii norms.

A time series ``u(t_i)`` is interpolated piecewise linearly (extended
linearly beyond the first and last samples) and integrated over ``(0, T)``
with the weight ``t^(1 - mu)``:

    |u|_{L_p,mu}^p = int_0^T t^((1-mu)p) |u(t)|^p dt,
    [u]_{s,p,mu}^p = int_0^T int_0^t tau^((1-mu)p) |u(t) - u(tau)|^p / (t - tau)^(1 + s p) dtau dt.

The integrable singularity of the weight at ``t = 0`` is absorbed into
Gauss-Jacobi rules on the first cell.  In the double integral the cell pairs
away from the diagonal use tensor Gauss rules; the diagonal band (equal and
neighbouring cells) is integrated exactly for the interpolant, using Beta
functions, Gauss-Jacobi rules and a Duffy splitting of the corner
singularity.  Because the interpolant only resolves ``u`` up to its local
slope, the band is also bounded with the largest neighbouring slope as a
Lipschitz constant; the gap between the two is returned as the error bar.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import beta as beta_fn
from scipy.special import roots_jacobi, roots_legendre

from .errors import InsufficientSamples, InvalidSpec

GAUSS = 8
BAND_GAUSS = 24


@dataclass(frozen=True)
class NormSpec:
    """Smoothness ``s``, exponent ``p``, weight ``mu`` and interval ``(0, T)``."""

    s: float = 0.0
    p: float = 2.0
    mu: float = 1.0
    T: float = 1.0

    def __post_init__(self):
        if not (1.0 < self.p < math.inf):
            raise InvalidSpec(f"p must lie in (1, inf), got {self.p}")
        if not (1.0 / self.p < self.mu <= 1.0):
            raise InvalidSpec(f"mu must lie in (1/p, 1], got {self.mu}")
        if not self.T > 0:
            raise InvalidSpec("T must be positive")
        if not self.s >= 0:
            raise InvalidSpec("s must be non-negative")

    @property
    def weight_exponent(self) -> float:
        """Exponent ``(1 - mu) p`` of the weight inside the integrals."""
        return (1.0 - self.mu) * self.p


@dataclass(frozen=True)
class TimeSeries:
    """Samples ``values[i] = u(times[i])``; values may be scalars or vectors."""

    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if t.ndim != 1 or t.size < 2:
            raise InsufficientSamples("a time series needs at least two samples")
        if v.shape[0] != t.size:
            raise ValueError("times and values differ in length")
        if np.any(np.diff(t) <= 0):
            raise ValueError("times must increase strictly")
        if t[0] < 0:
            raise ValueError("times must be non-negative")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v.reshape(t.size, -1))

    def derivative(self) -> "TimeSeries":
        """Second-order finite-difference time derivative."""
        if self.times.size < 3:
            raise InsufficientSamples("a derivative needs at least three samples")
        return TimeSeries(self.times, np.gradient(self.values, self.times, axis=0, edge_order=2))


@dataclass(frozen=True)
class NormValue:
    """A norm value with the error bar of its diagonal band treatment."""

    value: float
    error: float

    def __float__(self):
        return self.value


class _Interpolant:
    """Cells of the piecewise linear interpolant on ``[0, T]``."""

    def __init__(self, series: TimeSeries, T: float):
        t, v = series.times, series.values

        def at(x):
            # linear interpolation with linear extension beyond the data
            k = np.clip(np.searchsorted(t, x, side="right") - 1, 0, t.size - 2)
            w = (x - t[k]) / (t[k + 1] - t[k])
            return v[k] * (1 - w)[:, None] + v[k + 1] * w[:, None]

        inner = t[(t > 0) & (t < T)]
        self.edges = np.concatenate([[0.0], inner, [T]])
        self.left = at(self.edges[:-1])
        right = at(self.edges[1:])
        self.width = np.diff(self.edges)
        self.slope = (right - self.left) / self.width[:, None]
        self.ncells = self.width.size

    def value(self, cell, x):
        """Interpolant in ``cell`` (array) at absolute times ``x`` (broadcast)."""
        return self.left[cell] + self.slope[cell] * (x - self.edges[cell])[..., None]


def _jacobi(n: int, a: float, b: float):
    """Rule on [0, 1] for the weight ``(1 - x)^a x^b``."""
    if a == 0.0 and b == 0.0:
        x, w = roots_legendre(n)
    else:
        x, w = roots_jacobi(n, a, b)
    return 0.5 * (x + 1.0), w * 0.5 ** (1.0 + a + b)


def _check_series(series: TimeSeries, spec: NormSpec):
    if series.times[-1] <= 0:
        raise InsufficientSamples("series has no samples inside the interval")


def _lp_power(cells: _Interpolant, beta: float, p: float) -> float:
    """``int_0^T t^beta |u|^p`` of the interpolant."""
    total = 0.0
    xg, wg = _jacobi(GAUSS, 0.0, 0.0)
    for c in range(cells.ncells):
        a, h = cells.edges[c], cells.width[c]
        # split scalar cells at sign changes so |u|^p stays smooth per piece
        pieces = [0.0, 1.0]
        if cells.slope.shape[1] == 1 and cells.slope[c, 0] != 0.0:
            r = -cells.left[c, 0] / (cells.slope[c, 0] * h)
            if 0.0 < r < 1.0:
                pieces = [0.0, r, 1.0]
        for lo, hi in zip(pieces[:-1], pieces[1:]):
            a0, h0 = a + lo * h, (hi - lo) * h
            if a0 == 0.0 and beta != 0.0:
                x, w = _jacobi(GAUSS, 0.0, beta)
                tt = a0 + h0 * x
                vals = np.linalg.norm(cells.value(c, tt), axis=-1) ** p
                total += h0 ** (1.0 + beta) * float(w @ vals)
            else:
                tt = a0 + h0 * xg
                vals = np.linalg.norm(cells.value(c, tt), axis=-1) ** p * tt**beta
                total += h0 * float(wg @ vals)
    return total


def _unit_scaled(series: TimeSeries) -> tuple[float, TimeSeries]:
    """Split off ``max |u|`` so that ``|u|^p`` neither underflows nor overflows.

    Both norms are homogeneous of degree one, so the scale factors out.
    """
    scale = float(np.max(np.abs(series.values)))
    if scale == 0.0 or not math.isfinite(scale):
        return 1.0, series
    return scale, TimeSeries(series.times, series.values / scale)


def weighted_lp_norm(series: TimeSeries, spec: NormSpec) -> float:
    """``(int_0^T t^((1-mu)p) |u(t)|^p dt)^(1/p)``; ``spec.s`` is ignored."""
    _check_series(series, spec)
    scale, series = _unit_scaled(series)
    cells = _Interpolant(series, spec.T)
    return scale * _lp_power(cells, spec.weight_exponent, spec.p) ** (1.0 / spec.p)


# ------------------------------------------------------------ seminorm pieces

def _diag_cell(a: float, h: float, beta: float, gamma: float) -> float:
    """``int_a^{a+h} int_tau^{a+h} tau^beta (t - tau)^gamma dt dtau``."""
    if a == 0.0:
        return h ** (beta + gamma + 2.0) * beta_fn(beta + 1.0, gamma + 2.0) / (gamma + 1.0)
    x, w = _jacobi(BAND_GAUSS, gamma + 1.0, 0.0)
    tau = a + h * x
    return h ** (gamma + 2.0) * float(w @ tau**beta) / (gamma + 1.0)


def _adjacent(a: float, c: float, b: float, sj: np.ndarray, sk: np.ndarray,
              beta: float, p: float, sp: float) -> float:
    """Integral over ``tau in [a, c]``, ``t in [c, b]`` for the interpolant.

    With ``x = c - tau`` and ``y = t - c`` the difference ``u(t) - u(tau)`` is
    ``sk y + sj x`` and the kernel ``(x + y)^-(1+sp)``; the corner singularity
    is removed by splitting the rectangle along its diagonal and scaling the
    short side (Duffy).
    """
    X, Y = c - a, b - c
    r = Y / X
    q = p - sp  # power of the radial variable after the Duffy substitution
    n = BAND_GAUSS
    scalar = sj.size == 1

    def w_rule(fa, fb):
        # Legendre rule on [0, 1], split at a root of |fa * w + fb|
        cuts = [0.0, 1.0]
        if scalar and fa != 0.0:
            root = -fb / fa
            if 0.0 < root < 1.0:
                cuts = [0.0, root, 1.0]
        xs, ws = [], []
        xg, wg = _jacobi(n, 0.0, 0.0)
        for lo, hi in zip(cuts[:-1], cuts[1:]):
            xs.append(lo + (hi - lo) * xg)
            ws.append((hi - lo) * wg)
        return np.concatenate(xs), np.concatenate(ws)

    # region 1: y = r x w, x in [0, X]
    wv, ww = w_rule(float(sk[0] * r) if scalar else 0.0, float(sj[0]) if scalar else 0.0)
    num = np.linalg.norm(np.outer(wv * r, sk) + sj[None, :], axis=1) ** p
    wint = float(ww @ (num / (1.0 + r * wv) ** (1.0 + sp))) * r
    if a == 0.0 and beta != 0.0:
        xq, xw = _jacobi(n, beta, q)
        xint = X ** (1.0 + beta + q) * float(np.sum(xw))
    else:
        xq, xw = _jacobi(n, 0.0, q)
        xint = X ** (1.0 + q) * float(xw @ (c - X * xq) ** beta)
    part1 = xint * wint
    # region 2: x = y w / r, y in [0, Y]
    wv, ww = w_rule(float(sj[0] / r) if scalar else 0.0, float(sk[0]) if scalar else 0.0)
    num = np.linalg.norm(sk[None, :] + np.outer(wv / r, sj), axis=1) ** p
    kern = num / (1.0 + wv / r) ** (1.0 + sp) / r
    yq, yw = _jacobi(n, 0.0, q)
    y = Y * yq
    tau = c - np.outer(y, wv) / r
    inner = (np.clip(tau, 0.0, None) ** beta) @ (ww * kern)
    part2 = Y ** (1.0 + q) * float(yw @ inner)
    return part1 + part2


def _offband(cells: _Interpolant, beta: float, p: float, sp: float, n: int) -> float:
    """Sum over cell pairs ``tau`` in cell ``j``, ``t`` in cell ``k >= j + 2``."""
    m = cells.ncells
    if m < 3:
        return 0.0
    xg, wg = _jacobi(n, 0.0, 0.0)
    total = 0.0
    for j in range(m - 2):
        a, h = cells.edges[j], cells.width[j]
        if a == 0.0 and beta != 0.0:
            xj, wj = _jacobi(n, 0.0, beta)
            tau = a + h * xj
            wt = wj * h ** (1.0 + beta)
        else:
            tau = a + h * xg
            wt = wg * h * tau**beta
        ut = cells.value(np.full(n, j), tau)  # (n, dim)
        ks = np.arange(j + 2, m)
        t = cells.edges[ks][:, None] + cells.width[ks][:, None] * xg[None, :]  # (K, n)
        wk = cells.width[ks][:, None] * wg[None, :]
        uk = cells.left[ks][:, None, :] + cells.slope[ks][:, None, :] * (t - cells.edges[ks][:, None])[..., None]
        diff = uk[:, :, None, :] - ut[None, None, :, :]  # (K, n_t, n_tau, dim)
        dist = t[:, :, None] - tau[None, None, :]
        integrand = np.linalg.norm(diff, axis=-1) ** p / dist ** (1.0 + sp)
        total += float(np.einsum("kt,ktu,u->", wk, integrand, wt))
    return total


def _band(cells: _Interpolant, beta: float, p: float, sp: float, lipschitz: bool) -> float:
    m = cells.ncells
    gamma = p - 1.0 - sp
    slopes = np.linalg.norm(cells.slope, axis=1)
    if lipschitz:
        padded = np.concatenate([[0.0], slopes, [0.0]])
        lam = np.maximum(np.maximum(padded[:-2], padded[1:-1]), padded[2:])
    total = 0.0
    for c in range(m):
        k = lam[c] if lipschitz else slopes[c]
        if k != 0.0:
            total += k**p * _diag_cell(cells.edges[c], cells.width[c], beta, gamma)
    for j in range(m - 1):
        a, c, b = cells.edges[j], cells.edges[j + 1], cells.edges[j + 2]
        if lipschitz:
            k = max(lam[j], lam[j + 1])
            if k == 0.0:
                continue
            one = np.array([k])
            total += _adjacent(a, c, b, one, one, beta, p, sp)
        else:
            sj, sk = cells.slope[j], cells.slope[j + 1]
            if not (np.any(sj) or np.any(sk)):
                continue
            total += _adjacent(a, c, b, sj, sk, beta, p, sp)
    return total


def slobodetskii_seminorm(series: TimeSeries, spec: NormSpec, with_error: bool = False):
    """Weighted Slobodetskii seminorm of order ``spec.s`` in (0, 1).

    Integrates ``tau`` from 0 to ``t`` only, with the weight on ``tau``.

    Parameters
    ----------
    with_error : bool
        Return a :class:`NormValue` carrying the error bar instead of a float.
    """
    if not 0.0 < spec.s < 1.0:
        raise InvalidSpec("the seminorm needs 0 < s < 1")
    _check_series(series, spec)
    scale, series = _unit_scaled(series)
    cells = _Interpolant(series, spec.T)
    beta, p, sp = spec.weight_exponent, spec.p, spec.s * spec.p
    if not np.any(cells.slope):
        return NormValue(0.0, 0.0) if with_error else 0.0
    off = _offband(cells, beta, p, sp, GAUSS)
    off_fine = _offband(cells, beta, p, sp, GAUSS + 4)
    band = _band(cells, beta, p, sp, lipschitz=False)
    total = off_fine + band
    value = total ** (1.0 / p)
    if not with_error:
        return scale * value
    slack = max(_band(cells, beta, p, sp, lipschitz=True) - band, 0.0) + abs(off_fine - off)
    err = (total + slack) ** (1.0 / p) - value
    return NormValue(scale * value, scale * err)


def sobolev_slobodetskii_norm(series: TimeSeries, spec: NormSpec) -> float:
    """Weighted ``W^s_p`` norm, p-summed over its parts.

    ``(sum_{j <= floor(s)} |u^(j)|_{L_p,mu}^p + [u^(floor s)]_{s - floor s}^p)^(1/p)``,
    where the seminorm term is present only for non-integer ``s`` and the
    time derivatives are second-order finite differences.

    Raises
    ------
    InsufficientSamples
        If the series is too short for the requested number of derivatives.
    """
    k = int(math.floor(spec.s))
    frac = spec.s - k
    if series.times.size < (k + 2 if k > 0 else 2):
        raise InsufficientSamples(f"order {spec.s} needs at least {k + 2} samples")
    total = 0.0
    cur = series
    for j in range(k + 1):
        total += weighted_lp_norm(cur, spec) ** spec.p
        if j < k:
            cur = cur.derivative()
    if frac > 0:
        sub = NormSpec(frac, spec.p, spec.mu, spec.T)
        total += slobodetskii_seminorm(cur, sub) ** spec.p
    return total ** (1.0 / spec.p)
