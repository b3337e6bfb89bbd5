"""Closed-form geometry of rank-1 symmetric spaces in geodesic polar coordinates.

The spaces handled here are the projective spaces over R, C, H and Ca together
with their noncompact (hyperbolic) duals, parametrized by the base field
dimension ``k = dim_R K`` in {1, 2, 4, 8} and the quaternionic/projective
dimension ``n``, so the real dimension is ``m = k*n``.  Around any point the
volume element in geodesic polar coordinates is ``J(r) dr dxi`` with

    J(r) = sin^(m-1) r * cos^(k-1) r      (compact,    0 < r < pi/2)
    J(r) = sinh^(m-1) r * cosh^(k-1) r    (noncompact, r > 0)

under the curvature normalization that puts compact sectional curvatures in
[1, 4].  The mean-curvature trace of the geodesic sphere S_r is
``H(r) = J'(r)/J(r)`` and the first nonzero eigenvalue of the Laplacian of
S_r is ``-H'(r)``; its eigenfunctions are the m linear coordinate functions
``omega_i`` restricted to the unit sphere of directions.  The squared
sphere-gradients of the ``omega_i`` sum to ``-H'(r)`` and are individually
bounded by a single worst-case coordinate term; both closed forms live here.

The compact family with k=1 (round spheres, density sin^(m-1) r) is included
as well: every formula specializes cleanly, although the classical compact
list of rank-1 symmetric spaces starts at the complex projective spaces.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

__all__ = [
    "Space",
    "ModeConstants",
    "parse_space",
    "standard_spaces",
    "mode_constants",
    "density",
    "curvature_trace",
    "curvature_trace_deriv",
    "gradient_sum",
    "gradient_bound",
    "sphere_area",
    "ball_volume",
    "radius_from_volume",
    "MAX_COMPACT_BALL_RADIUS",
]

#: Largest admissible geodesic ball radius in the compact spaces.
MAX_COMPACT_BALL_RADIUS = math.pi / 4

_RADIUS_SLACK = 1e-12


@dataclass(frozen=True)
class Space:
    """A rank-1 symmetric space: field dimension, quaternionic dimension, type.

    ``field_dim`` is k in {1, 2, 4, 8}, ``quat_dim`` is n >= 1, and the real
    dimension is ``m = k*n``.  k=8 only admits n=2 (the Cayley plane and its
    dual).  ``compact=True`` selects the projective space, ``False`` its
    hyperbolic dual.
    """

    field_dim: int
    quat_dim: int
    compact: bool

    def __post_init__(self):
        k, n = self.field_dim, self.quat_dim
        if k not in (1, 2, 4, 8):
            raise ValueError(f"field_dim must be one of 1, 2, 4, 8, got {k}")
        if n < 1:
            raise ValueError(f"quat_dim must be a positive integer, got {n}")
        if k == 8 and n != 2:
            raise ValueError("field_dim 8 requires quat_dim 2 (Cayley plane only)")
        if k * n < 2:
            raise ValueError(f"real dimension k*n = {k * n} must be at least 2")

    @property
    def real_dim(self) -> int:
        return self.field_dim * self.quat_dim

    @property
    def name(self) -> str:
        return f"K{self.field_dim}_n{self.quat_dim}_{'c' if self.compact else 'nc'}"

    def __str__(self) -> str:
        return self.name


def parse_space(text: str) -> Space:
    """Parse a short space name like ``K2_n2_c`` (see ``Space.name``)."""
    parts = text.strip().split("_")
    try:
        if len(parts) != 3 or not parts[0].startswith("K") or not parts[1].startswith("n"):
            raise ValueError
        k = int(parts[0][1:])
        n = int(parts[1][1:])
        if parts[2] == "c":
            compact = True
        elif parts[2] == "nc":
            compact = False
        else:
            raise ValueError
    except ValueError:
        raise ValueError(
            f"cannot parse space {text!r}: expected K<k>_n<n>_<c|nc>, e.g. K2_n2_c"
        ) from None
    return Space(k, n, compact)


def standard_spaces(compact=None, max_dim: int = 16) -> list[Space]:
    """The standard verification family: (k,n) in (1,2..8), (2,1..4), (4,1..2), (8,2).

    ``compact=None`` returns both types, otherwise only the requested one.
    Spaces with real dimension above ``max_dim`` are dropped.
    """
    pairs = [(1, n) for n in range(2, 9)]
    pairs += [(2, n) for n in range(1, 5)]
    pairs += [(4, n) for n in range(1, 3)]
    pairs += [(8, 2)]
    flags = [True, False] if compact is None else [bool(compact)]
    return [
        Space(k, n, c)
        for k, n in pairs
        for c in flags
        if k * n <= max_dim
    ]


@dataclass(frozen=True)
class ModeConstants:
    """Eigenvalue counts l (compact theorems) and p (noncompact theorems)."""

    l: int
    p: int


def mode_constants(space: Space) -> ModeConstants:
    """Number of reciprocal-eigenvalue terms in the compact (l) and noncompact (p) bounds.

    l = m-1 when k = 1 or k = m, and floor((m-k+1)/2) when 1 < k < m.
    p = k(n-1) when k < m, and m-1 when k = m.  For k = 1 both equal m-1.
    """
    m, k, n = space.real_dim, space.field_dim, space.quat_dim
    if k == 1 or k == m:
        l = m - 1
    else:
        l = (m - k + 1) // 2
    p = (m - 1) if k == m else k * (n - 1)
    return ModeConstants(l=l, p=p)


def _as_radii(space: Space, r, hi: float, what: str):
    """Validate radii against (0, hi) and return them as an ndarray."""
    arr = np.asarray(r, dtype=float)
    bad = ~((arr > 0.0) & (arr < hi + _RADIUS_SLACK) & np.isfinite(arr))
    if np.any(bad):
        offending = float(np.atleast_1d(arr)[np.atleast_1d(bad)][0])
        kind = "compact" if space.compact else "noncompact"
        raise ValueError(
            f"radius {offending!r} outside {what} for {kind} space {space.name}"
        )
    return arr


def _check_density_domain(space: Space, r):
    if space.compact:
        return _as_radii(space, r, math.pi / 2, "(0, pi/2)")
    return _as_radii(space, r, math.inf, "(0, inf)")


def density(space: Space, r):
    """Riemannian density J(r) of the geodesic sphere at radius r."""
    arr = _check_density_domain(space, r)
    m, k = space.real_dim, space.field_dim
    if space.compact:
        out = np.sin(arr) ** (m - 1) * np.cos(arr) ** (k - 1)
    else:
        out = np.sinh(arr) ** (m - 1) * np.cosh(arr) ** (k - 1)
    return out if isinstance(out, np.ndarray) and out.ndim else float(out)


def curvature_trace(space: Space, r):
    """Mean-curvature trace H(r) = J'(r)/J(r) of the geodesic sphere S_r."""
    arr = _check_density_domain(space, r)
    m, k = space.real_dim, space.field_dim
    if space.compact:
        out = (m - 1) / np.tan(arr) - (k - 1) * np.tan(arr)
    else:
        out = (m - 1) / np.tanh(arr) + (k - 1) * np.tanh(arr)
    return out if isinstance(out, np.ndarray) and out.ndim else float(out)


def curvature_trace_deriv(space: Space, r):
    """Radial derivative H'(r); -H'(r) is the first sphere eigenvalue.

    The noncompact case is evaluated as -(m-k)/sinh^2 - (k-1)/(sinh^2 cosh^2),
    which is algebraically identical to the direct derivative
    -(m-1)/sinh^2 + (k-1)/cosh^2 but free of the large-r cancellation between
    the two terms.
    """
    arr = _check_density_domain(space, r)
    m, k = space.real_dim, space.field_dim
    if space.compact:
        s2 = np.sin(arr) ** 2
        c2 = np.cos(arr) ** 2
        out = -(m - 1) / s2 - (k - 1) / c2
    else:
        sh2 = np.sinh(arr) ** 2
        ch2 = np.cosh(arr) ** 2
        out = -((m - k) / sh2 + (k - 1) / (sh2 * ch2))
    return out if isinstance(out, np.ndarray) and out.ndim else float(out)


def gradient_sum(space: Space, r):
    """Sum over i of |grad_{S_r} omega_i|^2, in closed form; equals -H'(r).

    Compact:    (m-k)/sin^2 r + (k-1)/(sin^2 r cos^2 r)
    Noncompact: (m-k)/sinh^2 r + (k-1)/(sinh^2 r cosh^2 r)

    The mixed term is evaluated through the double-angle identity
    1/(sin^2 cos^2) = 4/sin^2(2r) so that the identity test against
    ``curvature_trace_deriv`` exercises two distinct floating-point paths.
    """
    arr = _check_density_domain(space, r)
    m, k = space.real_dim, space.field_dim
    if space.compact:
        out = (m - k) / np.sin(arr) ** 2 + 4.0 * (k - 1) / np.sin(2.0 * arr) ** 2
    else:
        out = (m - k) / np.sinh(arr) ** 2 + 4.0 * (k - 1) / np.sinh(2.0 * arr) ** 2
    return out if isinstance(out, np.ndarray) and out.ndim else float(out)


def gradient_bound(space: Space, r):
    """Worst-case single-coordinate bound on |grad_{S_r} omega_i|^2.

    Compact (r in (0, pi/4]):  1/(sin^2 r cos^2 r) for k != 1, 1/sin^2 r for k = 1.
    Noncompact (r > 0):        1/sinh^2 r for k < m, 1/(sinh^2 r cosh^2 r) for k = m.

    Multiplying by l (compact) or p (noncompact) stays below -H'(r) on the
    stated domain, with equality exactly in the k=1 and k=m cases.
    """
    m, k = space.real_dim, space.field_dim
    if space.compact:
        arr = _as_radii(space, r, math.pi / 4, "(0, pi/4]")
        if k == 1:
            out = 1.0 / np.sin(arr) ** 2
        else:
            out = 4.0 / np.sin(2.0 * arr) ** 2
    else:
        arr = _as_radii(space, r, math.inf, "(0, inf)")
        if k < m:
            out = 1.0 / np.sinh(arr) ** 2
        else:
            out = 4.0 / np.sinh(2.0 * arr) ** 2
    return out if isinstance(out, np.ndarray) and out.ndim else float(out)


def sphere_area(m: int) -> float:
    """Surface area of the unit (m-1)-sphere in R^m."""
    return 2.0 * math.pi ** (m / 2.0) / math.gamma(m / 2.0)


def ball_volume(space: Space, R: float) -> float:
    """Volume of the geodesic ball of radius R: Vol(S^(m-1)) * int_0^R J."""
    Rf = float(R)
    _check_density_domain(space, Rf)
    integral, _ = quad(
        lambda t: float(density(space, t)) if t > 0 else 0.0,
        0.0,
        Rf,
        epsabs=1e-14,
        epsrel=1e-12,
        limit=200,
    )
    return sphere_area(space.real_dim) * integral


def radius_from_volume(space: Space, V: float) -> float:
    """Radius of the geodesic ball with volume V (inverse of ``ball_volume``).

    For compact spaces the result must not exceed pi/4; larger volumes raise a
    "radius constraint violated" error, since every downstream ball quantity
    is only certified on (0, pi/4].
    """
    if not V > 0.0:
        raise ValueError(f"volume must be positive, got {V!r}")
    if space.compact:
        hi = MAX_COMPACT_BALL_RADIUS
        cap = ball_volume(space, hi)
        if V > cap * (1.0 + 1e-12):
            raise ValueError(
                f"radius constraint violated: volume {V!r} exceeds the pi/4 ball "
                f"volume {cap!r} in compact space {space.name}"
            )
        if V >= cap:
            return hi
    else:
        hi = 1.0
        while ball_volume(space, hi) < V:
            hi *= 2.0
            if hi > 1e4:
                raise ValueError(f"volume {V!r} too large to invert")
    lo = 1e-12
    return float(brentq(lambda R: ball_volume(space, R) - V, lo, hi, xtol=1e-14))
