"""Proximal and projection primitives.

All five maps act componentwise or on the whole vector over C, preserve
phases, and define sign(0) = 0. Thresholds and radii may be scalars or
per-component vectors (vectors support the weighted-l1 variants).
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "shrink",
    "project_linf_ball",
    "project_l2_ball",
    "shrink_l2",
    "project_halfspace",
]


def _check_nonneg(t, what):
    t = np.asarray(t, dtype=np.float64)
    if np.any(t < 0):
        raise ValueError(f"{what} must be nonnegative")
    return t


def _check_positive(t, what):
    t = np.asarray(t, dtype=np.float64)
    if np.any(t <= 0):
        raise ValueError(f"{what} must be positive")
    return t


def shrink(v, t):
    """Soft threshold: max(|v| - t, 0) * v/|v|, with 0 where v = 0.

    ``t`` is a nonnegative scalar or a per-component vector of thresholds.
    """
    t = _check_nonneg(t, "shrink threshold")
    v = np.asarray(v, dtype=np.complex128)
    mag = np.abs(v)
    kept = np.maximum(mag - t, 0.0)
    denom = np.where(mag > 0.0, mag, 1.0)
    return v * (kept / denom)


def project_linf_ball(v, radius=1.0):
    """Project componentwise onto {z : |z_i| <= radius_i}, keeping phases.

    ``radius`` is a positive scalar or per-component vector.
    """
    radius = _check_positive(radius, "linf ball radius")
    v = np.asarray(v, dtype=np.complex128)
    mag = np.abs(v)
    # w/max(|v|, w) is exactly 1 inside the ball, so interior points pass
    # through unchanged.
    return v * (radius / np.maximum(mag, radius))


def project_l2_ball(v, delta):
    """Project onto the l2 ball of radius delta centered at the origin."""
    delta = float(delta)
    if delta < 0:
        raise ValueError("l2 ball radius must be nonnegative")
    v = np.asarray(v, dtype=np.complex128)
    nv = np.linalg.norm(v)
    if nv <= delta:
        return v.copy()
    if delta == 0.0:
        return np.zeros_like(v)
    return v * (delta / nv)


def shrink_l2(v, t):
    """Shrink the whole vector toward the origin: v - P_{l2 ball t}(v).

    Zero when ||v|| <= t, otherwise v scaled by (1 - t/||v||).
    """
    t = float(t)
    if t < 0:
        raise ValueError("l2 shrink threshold must be nonnegative")
    v = np.asarray(v, dtype=np.complex128)
    nv = np.linalg.norm(v)
    if nv <= t:
        return np.zeros_like(v)
    return v * (1.0 - t / nv)


def project_halfspace(v, bound=1.0):
    """Project componentwise onto {z : Re(z_i) <= bound_i}.

    Clips real parts, leaves imaginary parts alone. This is the dual
    feasible set of the nonnegative models.
    """
    bound = np.asarray(bound, dtype=np.float64)
    v = np.asarray(v, dtype=np.complex128)
    return np.minimum(v.real, bound) + 1j * v.imag
