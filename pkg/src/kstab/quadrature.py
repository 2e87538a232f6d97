"""Quadrature rules for integrals over the Riemann sphere.

Two rule families are provided: a tensor rule on the unit disc (Gauss
Legendre radially, equispaced points in angle) used for integrals over
parametrized rational curves, and composite Gauss-Legendre panels on [0, 1]
used for radial integrals.  Error estimates come from order doubling.
Accumulation uses compensated summation so results are independent of
evaluation order to roundoff.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import roots_legendre

__all__ = [
    "QuadratureError",
    "disc_rule",
    "panel_rule",
    "adaptive_panels",
    "csum",
]


class QuadratureError(RuntimeError):
    """Raised when a quadrature does not reach the requested tolerance."""


def csum(values) -> float:
    """Compensated sum of real values (order independent to roundoff)."""
    return math.fsum(np.asarray(values, dtype=float).ravel())


def disc_rule(order: int):
    """Nodes and weights for (1/pi) * integral over the unit disc.

    Returns complex nodes ``s`` and positive weights ``w`` such that
    (1/pi) * int_{|s|<=1} f dA ~= sum w_i f(s_i).  Radially the rule is
    Gauss-Legendre in rho = r^2 on [0, 1]; in angle it is the equispaced
    (trapezoidal) rule, which is spectrally accurate for periodic smooth
    integrands.
    """
    if order < 1:
        raise ValueError("order must be >= 1")
    x, wx = roots_legendre(order)
    rho = 0.5 * (x + 1.0)
    wrho = 0.5 * wx
    m = 2 * order + 1
    theta = 2.0 * np.pi * np.arange(m) / m
    r = np.sqrt(rho)
    nodes = (r[:, None] * np.exp(1j * theta)[None, :]).ravel()
    weights = np.repeat(wrho / m, m)
    return nodes, weights


def panel_rule(order: int, panels: int):
    """Composite Gauss-Legendre nodes/weights on [0, 1]."""
    x, w = roots_legendre(order)
    h = 1.0 / panels
    nodes = []
    weights = []
    for p in range(panels):
        a = p * h
        nodes.append(a + 0.5 * h * (x + 1.0))
        weights.append(0.5 * h * w)
    return np.concatenate(nodes), np.concatenate(weights)


def adaptive_panels(f, tol: float, order: int = 32, max_panels: int = 256):
    """Integrate f (vectorized on [0, 1]) to tolerance by panel doubling.

    Returns (value, error_estimate).  The error estimate is the difference
    between the last two refinement levels.
    """
    panels = 1
    nodes, weights = panel_rule(order, panels)
    prev = csum(weights * np.asarray(f(nodes), dtype=float))
    while panels <= max_panels:
        panels *= 2
        nodes, weights = panel_rule(order, panels)
        cur = csum(weights * np.asarray(f(nodes), dtype=float))
        err = abs(cur - prev)
        scale = max(1.0, abs(cur))
        if err <= tol * scale:
            return cur, err
        prev = cur
    raise QuadratureError(
        f"radial quadrature did not reach tol={tol:g} with {max_panels} panels "
        f"(last change {err:g})"
    )
