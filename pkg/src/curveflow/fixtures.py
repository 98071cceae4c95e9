"""Initial curves used by the tests, the CLI and the experiments.

All curves run from the left endpoint to the right endpoint, start and end
on the x-axis and bulge into the upper half plane.
"""
from __future__ import annotations

import math

import numpy as np

from .curve_core import SampledCurve, check_angle


def semicircle(n: int = 200, radius: float = 1.0) -> SampledCurve:
    """Upper semicircle from ``(-r, 0)`` to ``(r, 0)``, uniform in angle."""
    theta = np.linspace(math.pi, 0.0, n + 1)
    pts = np.c_[radius * np.cos(theta), radius * np.sin(theta)]
    pts[[0, -1], 1] = 0.0
    return SampledCurve(pts)


def segment(n: int = 200, a=(0.0, 0.0), b=(1.0, 0.0)) -> SampledCurve:
    s = np.linspace(0.0, 1.0, n + 1)[:, None]
    return SampledCurve((1 - s) * np.asarray(a, float) + s * np.asarray(b, float))


def circular_arc(alpha: float, n: int = 200, radius: float = 1.0, bump: float = 0.0) -> SampledCurve:
    """Circular cap meeting the x-axis at angle ``alpha`` at both ends.

    The cap is centred on the y-axis.  ``bump`` multiplies the radius by
    ``1 + bump sin^2(pi sigma)``, a perturbation that leaves the endpoints and
    the endpoint tangents unchanged.
    """
    alpha = check_angle(alpha)
    s = np.linspace(0.0, 1.0, n + 1)
    phi = alpha - 2.0 * alpha * s
    r = radius * (1.0 + bump * np.sin(math.pi * s) ** 2)
    pts = np.c_[-r * np.sin(phi), r * np.cos(phi) - radius * math.cos(alpha)]
    pts[[0, -1], 1] = 0.0
    return SampledCurve(pts)


def perturbed_semicircle(n: int = 200, bump: float = 0.01) -> SampledCurve:
    """Semicircle with the radial bump ``1 + bump sin^2(pi sigma)``."""
    return circular_arc(math.pi / 2, n, 1.0, bump)


def quarter_circle(n: int = 200, radius: float = 2.0) -> SampledCurve:
    theta = np.linspace(math.pi / 2, 0.0, n + 1)
    return SampledCurve(np.c_[radius * np.cos(theta), radius * np.sin(theta)])


def ellipse_arc(n: int = 400, a: float = 2.0, b: float = 1.0,
                theta0: float = math.pi / 4, theta1: float = 3 * math.pi / 4) -> SampledCurve:
    """Arc ``(a cos t, b sin t)`` for ``t`` from ``theta0`` to ``theta1``."""
    t = np.linspace(theta0, theta1, n + 1)
    return SampledCurve(np.c_[a * np.cos(t), b * np.sin(t)])


def nonuniform_semicircle(n: int = 200, warp: float = 0.3) -> SampledCurve:
    """Unit semicircle sampled at angles ``pi (1 - u - warp sin(2 pi u) / (2 pi))``."""
    u = np.linspace(0.0, 1.0, n + 1)
    theta = math.pi * (1.0 - (u - warp * np.sin(2 * math.pi * u) / (2 * math.pi)))
    pts = np.c_[np.cos(theta), np.sin(theta)]
    pts[[0, -1], 1] = 0.0
    return SampledCurve(pts)


def smoothstep5(t):
    """Quintic smoothstep ``6t^5 - 15t^4 + 10t^3`` clipped to [0, 1]."""
    t = np.clip(t, 0.0, 1.0)
    return t ** 3 * (10.0 - 15.0 * t + 6.0 * t ** 2)


def loop_witness(n: int = 200, alpha: float = math.pi / 6, loop_radius: float = 0.08,
                 position: float = 0.3, width: float = 0.1) -> SampledCurve:
    """Strongly asymmetric curve with a small loop, for blow-up experiments.

    A unit-radius cap with contact angle ``alpha`` gets a full turn of radius
    ``loop_radius`` inserted around ``sigma = position``.  Under the flow the
    loop tightens and its curvature grows quickly.
    """
    base = circular_arc(alpha, n)
    s = base.sigma
    g = smoothstep5((s - position + width) / (2 * width))
    pts = np.array(base.points)
    pts[:, 0] += loop_radius * np.sin(2 * math.pi * g)
    pts[:, 1] += loop_radius * (1.0 - np.cos(2 * math.pi * g))
    return SampledCurve(pts)


def rough_semicircle(n: int = 400, amplitude: float = 0.02, exponent: float = 1.75,
                     center: float = 0.5) -> SampledCurve:
    """Semicircle with a radial kink of finite smoothness at ``center``.

    The radius is multiplied by ``1 + amplitude * w(sigma) |sigma - center|^exponent``
    where ``w = sin^2(pi sigma)`` keeps the endpoints and endpoint tangents
    fixed.  For ``1.5 < exponent < 2`` the curve has square-integrable second
    derivatives but is not twice continuously differentiable.
    """
    s = np.linspace(0.0, 1.0, n + 1)
    w = np.sin(math.pi * s) ** 2
    r = 1.0 + amplitude * w * np.abs(s - center) ** exponent
    theta = math.pi * (1.0 - s)
    pts = np.c_[r * np.cos(theta), r * np.sin(theta)]
    pts[[0, -1], 1] = 0.0
    return SampledCurve(pts)


FIXTURES = {
    "semicircle": semicircle,
    "perturbed_semicircle": perturbed_semicircle,
    "loop_witness": loop_witness,
    "rough_semicircle": rough_semicircle,
}
