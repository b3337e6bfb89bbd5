"""Radial Neumann eigenproblems on geodesic balls and annuli.

The first nonzero Neumann eigenvalue of a geodesic ball B_R is m-fold
degenerate with eigenfunctions g(r)*omega_i(xi), where g solves the singular
Sturm-Liouville problem

    g'' + H(r) g' + (mu + H'(r)) g = 0,   g(0) = 0,  g'(R) = 0,

normalized by g'(0) = 1.  Two independent discretizations are provided:

* ``solve_ball``          -- adaptive shooting on the ODE with a Frobenius
                             series start at the regular singular point r=0,
                             locating mu by bracketing + Brent on g'(R);
* ``solve_ball_rayleigh`` -- a finite-difference Rayleigh quotient
                             Q(phi) = int (phi'^2 - H' phi^2) J / int phi^2 J,
                             phi(0)=0, reduced to a symmetric tridiagonal
                             eigenproblem solved by Sturm-sequence bisection.

Geodesic annuli are handled by separation of variables: the Laplacian splits
as d^2/dr^2 + H d/dr + Delta_{S_r}, and the angular eigenvalue is either 0
(radial modes) or -H'(r) (first sphere mode, m-fold degenerate).  Only these
two angular modes are computed, so annulus spectra are *candidate* spectra:
every candidate is a true eigenvalue, hence the i-th candidate dominates the
true i-th eigenvalue and inequality checks built on candidates stay sound.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicHermiteSpline
from scipy.linalg import eigh_tridiagonal
from scipy.optimize import brentq

from .geometry import MAX_COMPACT_BALL_RADIUS, Space

__all__ = [
    "RadialProfile",
    "BallEig",
    "AnnulusMode",
    "AnnulusModes",
    "SolverError",
    "solve_ball",
    "solve_ball_rayleigh",
    "plateau_extension",
    "monotonicity_defect",
    "solve_annulus",
    "euclidean_ball_constant",
]

_RTOL = 1e-10
_ATOL = 1e-12


class SolverError(RuntimeError):
    """Eigenvalue bracketing or validation failure, with a scan trace."""


@dataclass
class RadialProfile:
    """A radial function sampled on a strictly increasing grid.

    Interpolation is cubic Hermite when derivative samples are available
    (the ODE solvers always store them), plain cubic otherwise; grid values
    are reproduced exactly.  With ``clamp=True`` evaluation beyond the grid
    returns the endpoint value (used for plateau-extended profiles).
    """

    grid: np.ndarray
    values: np.ndarray
    meaning: str
    dvalues: np.ndarray | None = None
    clamp: bool = False
    _spline: object = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.dvalues is not None:
            self.dvalues = np.asarray(self.dvalues, dtype=float)
        if self.grid.ndim != 1 or self.grid.size < 2:
            raise ValueError("profile grid must be a 1-D array with >= 2 points")
        if np.any(np.diff(self.grid) <= 0):
            raise ValueError("profile grid must be strictly increasing")
        if self.values.shape != self.grid.shape:
            raise ValueError("profile values must match the grid shape")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("profile values must be finite")

    def _ensure_spline(self):
        if self._spline is None:
            if self.dvalues is not None:
                self._spline = CubicHermiteSpline(self.grid, self.values, self.dvalues)
            else:
                from scipy.interpolate import CubicSpline

                self._spline = CubicSpline(self.grid, self.values)
        return self._spline

    def _clip(self, r):
        r = np.asarray(r, dtype=float)
        if self.clamp:
            r = np.clip(r, self.grid[0], self.grid[-1])
        return r

    def __call__(self, r):
        out = self._ensure_spline()(self._clip(r))
        return float(out) if np.ndim(out) == 0 else out

    def deriv(self, r):
        out = self._ensure_spline().derivative()(self._clip(r))
        return float(out) if np.ndim(out) == 0 else out

    def max_point(self) -> tuple[float, float]:
        """(max value, location) over the sample grid."""
        i = int(np.argmax(self.values))
        return float(self.values[i]), float(self.grid[i])

    def to_csv(self, path):
        """Two-column CSV (r,value), 17 significant digits."""
        with open(path, "w") as f:
            f.write("r,value\n")
            for r, v in zip(self.grid, self.values):
                f.write(f"{r:.17g},{v:.17g}\n")

    @classmethod
    def from_csv(cls, path, meaning="csv"):
        data = np.loadtxt(path, delimiter=",", skiprows=1)
        return cls(grid=data[:, 0], values=data[:, 1], meaning=meaning)


@dataclass
class BallEig:
    """First nonzero Neumann eigenvalue of a geodesic ball with its radial part."""

    space: Space
    R: float
    mu1: float
    profile: RadialProfile
    solver: str
    tol: float | None = None
    grid_size: int = 0

    def to_json_dict(self) -> dict:
        return {
            "space": self.space.name,
            "R": self.R,
            "mu1": self.mu1,
            "solver": self.solver,
            "tol": self.tol,
            "grid_size": self.grid_size,
        }

    def to_json(self, path):
        with open(path, "w") as f:
            json.dump(self.to_json_dict(), f, indent=2)
            f.write("\n")


@dataclass
class AnnulusMode:
    mode: int
    eigenvalue: float
    profile: RadialProfile


@dataclass
class AnnulusModes:
    """Candidate Neumann eigenvalues of a geodesic annulus (angular modes 0, 1).

    Each mode-1 entry corresponds to an m-fold degenerate eigenvalue family
    f(r)*omega_i(xi), i = 1..m; entries are stored once and expanded by
    consumers that need multiplicities.
    """

    space: Space
    r_in: float
    r_out: float
    modes: list[AnnulusMode]

    def eigenvalues(self) -> list[float]:
        return [m.eigenvalue for m in self.modes]


# ---------------------------------------------------------------------------
# ODE coefficients
# ---------------------------------------------------------------------------


class _Coeffs:
    """Scalar callables H, -H' for one space (or the flat model), plus the
    linear coefficient h1 of the odd series H(r) = (m-1)/r + h1*r + O(r^3)."""

    def __init__(self, m, H, negHp, h1, r_sup):
        self.m = m
        self.H = H
        self.negHp = negHp
        self.h1 = h1
        self.r_sup = r_sup  # open upper end of the radial domain


def _space_coeffs(space: Space) -> _Coeffs:
    m, k = space.real_dim, space.field_dim
    if space.compact:

        def H(r):
            return (m - 1) / math.tan(r) - (k - 1) * math.tan(r)

        def negHp(r):
            s = math.sin(r)
            c = math.cos(r)
            return (m - 1) / (s * s) + (k - 1) / (c * c)

        h1 = -((m - 1) / 3.0 + (k - 1))
        r_sup = math.pi / 2
    else:

        def H(r):
            return (m - 1) / math.tanh(r) + (k - 1) * math.tanh(r)

        def negHp(r):
            sh = math.sinh(r)
            ch = math.cosh(r)
            return (m - k) / (sh * sh) + (k - 1) / (sh * sh * ch * ch)

        h1 = (m - 1) / 3.0 + (k - 1)
        r_sup = math.inf
    return _Coeffs(m, H, negHp, h1, r_sup)


def _flat_coeffs(m: int) -> _Coeffs:
    def H(r):
        return (m - 1) / r

    def negHp(r):
        return (m - 1) / (r * r)

    return _Coeffs(m, H, negHp, 0.0, math.inf)


def _series_start(co: _Coeffs, mu: float, r0: float) -> tuple[float, float, float]:
    """Two-term Frobenius start g = r + c3 r^3 matching the ODE at the origin.

    Substituting the odd series into g'' + H g' + (mu + H') g = 0 with
    H = (m-1)/r + h1 r + ... forces c3 = -(mu + 2 h1) / (2 (m + 2)).
    """
    c3 = -(mu + 2.0 * co.h1) / (2.0 * (co.m + 2.0))
    g = r0 + c3 * r0**3
    dg = 1.0 + 3.0 * c3 * r0**2
    return g, dg, c3


def _shoot_ball(co: _Coeffs, mu: float, R: float, dense: bool = False):
    r0 = max(1e-6, 1e-6 * R)
    g0, dg0, _ = _series_start(co, mu, r0)
    H, negHp = co.H, co.negHp

    def rhs(r, y):
        return (y[1], -H(r) * y[1] - (mu - negHp(r)) * y[0])

    sol = solve_ivp(
        rhs,
        (r0, R),
        (g0, dg0),
        method="DOP853",
        rtol=_RTOL,
        atol=_ATOL * max(R, 1.0),
        dense_output=dense,
    )
    if not sol.success:  # pragma: no cover - integrator failure is exceptional
        raise SolverError(f"ODE integration failed at mu={mu}: {sol.message}")
    return sol


def _bracket_first_zero(f, x0, grow, max_steps, trace):
    """March x0*grow^j upward until f changes sign; assumes f(x0) finite."""
    a = x0
    fa = f(a)
    trace.append((a, fa))
    if fa == 0.0:
        return a, a
    for _ in range(max_steps):
        b = a * grow
        fb = f(b)
        trace.append((b, fb))
        if fa * fb < 0.0:
            return a, b
        a, fa = b, fb
    return None


def _validate_first_mode(grid, g, dg, tol):
    """First-eigenfunction structure: g>0 on (0,R], g'>0 on [0,R)."""
    scale = float(np.max(np.abs(dg)))
    ok_g = bool(np.all(g[1:] > 0.0))
    ok_dg = bool(np.all(dg[:-1] > -1e-9 * scale) and np.all(dg[:-2] > 0.0))
    return ok_g and ok_dg, scale


def _solve_ball_impl(co: _Coeffs, R: float, tol: float, mu_guess, n_grid: int):
    mu0 = mu_guess if mu_guess is not None else euclidean_ball_constant(co.m) / R**2

    def terminal(mu):
        return float(_shoot_ball(co, mu, R).y[1, -1])

    trace = []
    bracket = None
    for grow, start_frac in ((1.5, 0.25), (1.15, 0.1)):
        start = start_frac * mu0
        # back off until the low end is on the no-crossing side (g'(R) > 0)
        for _ in range(60):
            if terminal(start) > 0.0:
                break
            start *= 0.25
        else:
            continue
        bracket = _bracket_first_zero(terminal, start, grow, 200, trace)
        if bracket is None:
            continue
        mu = brentq(terminal, *bracket, xtol=1e-13 * max(1.0, mu0), rtol=1e-14)
        sol = _shoot_ball(co, mu, R, dense=True)
        grid = np.linspace(0.0, R, n_grid)
        r0 = sol.t[0]
        vals = np.empty(n_grid)
        dvals = np.empty(n_grid)
        inner = grid < r0
        _, _, c3 = _series_start(co, mu, r0)
        vals[inner] = grid[inner] + c3 * grid[inner] ** 3
        dvals[inner] = 1.0 + 3.0 * c3 * grid[inner] ** 2
        y = sol.sol(grid[~inner])
        vals[~inner] = y[0]
        dvals[~inner] = y[1]
        vals[-1] = float(sol.y[0, -1])
        dvals[-1] = float(sol.y[1, -1])
        ok, scale = _validate_first_mode(grid, vals, dvals, tol)
        if not ok:
            # captured a higher radial mode; rescan with a finer march
            continue
        if abs(dvals[-1]) > tol * scale:
            raise SolverError(
                f"terminal slope {dvals[-1]:.3e} above tolerance {tol * scale:.3e}"
            )
        profile = RadialProfile(grid, vals, meaning="radial_eigenfunction", dvalues=dvals)
        return mu, profile
    raise SolverError(
        "failed to bracket the first Neumann eigenvalue; scan trace: "
        + ", ".join(f"({a:.6g}, {b:.3e})" for a, b in trace[-20:])
    )


def solve_ball(space: Space, R: float, tol: float = 1e-10,
               mu_guess: float | None = None, n_grid: int = 801) -> BallEig:
    """First nonzero Neumann eigenvalue of the geodesic ball of radius R, by shooting.

    Returns the smallest mu > 0 admitting a solution with g(0)=0, g'(0)=1 and
    g'(R)=0; the computed radial part satisfies g>0 on (0,R] and g'>0 on
    [0,R).  ``mu_guess`` warm-starts the bracket scan (e.g. from a
    neighbouring radius); the default start is the flat-space estimate
    ``euclidean_ball_constant(m)/R^2``.
    """
    R = float(R)
    if not R > 0.0:
        raise ValueError(f"ball radius must be positive, got {R!r}")
    if space.compact and R > MAX_COMPACT_BALL_RADIUS + _slack(R):
        raise ValueError(
            f"radius constraint violated: R={R!r} exceeds pi/4 in compact space {space.name}"
        )
    if not 1e-12 <= tol <= 1e-4:
        raise ValueError(f"tol must lie in [1e-12, 1e-4], got {tol!r}")
    co = _space_coeffs(space)
    mu, profile = _solve_ball_impl(co, R, tol, mu_guess, n_grid)
    return BallEig(space=space, R=R, mu1=mu, profile=profile, solver="shooting",
                   tol=tol, grid_size=n_grid)


def _slack(R):
    return 1e-12 * max(1.0, abs(R))


@lru_cache(maxsize=None)
def euclidean_ball_constant(m: int) -> float:
    """mu1 * R^2 for the Neumann unit ball in flat R^m, by flat-density shooting."""
    co = _flat_coeffs(m)
    # crude, dimension-monotone seed; the bracket scan does the real work
    mu, _ = _solve_ball_impl(co, 1.0, 1e-11, mu_guess=1.2 * m + 1.2, n_grid=201)
    return mu


def solve_ball_rayleigh(space: Space, R: float, N: int) -> BallEig:
    """Independent Rayleigh-quotient oracle for ``solve_ball`` on N uniform intervals.

    Discretizes Q(phi) = int (phi'^2 - H' phi^2) J / int phi^2 J with phi(0)=0
    using first-order interval differences (J at interval midpoints) and
    trapezoid weights for the zeroth-order terms, then solves the resulting
    symmetric tridiagonal generalized problem by Sturm-sequence bisection.
    Agrees with the shooting value to O(N^-2).
    """
    from .geometry import curvature_trace_deriv, density

    R = float(R)
    if N < 100:
        raise ValueError(f"need at least 100 grid intervals, got {N}")
    if not R > 0.0:
        raise ValueError(f"ball radius must be positive, got {R!r}")
    if space.compact and R > MAX_COMPACT_BALL_RADIUS + _slack(R):
        raise ValueError(
            f"radius constraint violated: R={R!r} exceeds pi/4 in compact space {space.name}"
        )
    h = R / N
    nodes = np.arange(1, N + 1) * h
    mids = (np.arange(N) + 0.5) * h
    Jm = np.asarray(density(space, mids))
    Jn = np.asarray(density(space, nodes))
    negHp = -np.asarray(curvature_trace_deriv(space, nodes))
    w = np.full(N, h)
    w[-1] = 0.5 * h

    diag = np.empty(N)
    diag[:-1] = (Jm[:-1] + Jm[1:]) / h
    diag[-1] = Jm[-1] / h
    diag = diag + w * negHp * Jn
    off = -Jm[1:] / h
    b = w * Jn

    d = diag / b
    e = off / np.sqrt(b[:-1] * b[1:])
    vals, vecs = eigh_tridiagonal(d, e, select="i", select_range=(0, 0))
    mu = float(vals[0])
    phi = vecs[:, 0] / np.sqrt(b)
    if phi[0] < 0.0:
        phi = -phi
    phi = phi / (phi[0] / h)  # discrete slope 1 at the origin

    grid = np.concatenate(([0.0], nodes))
    vals_full = np.concatenate(([0.0], phi))
    dvals = np.gradient(vals_full, grid)
    profile = RadialProfile(grid, vals_full, meaning="radial_eigenfunction", dvalues=dvals)
    return BallEig(space=space, R=R, mu1=mu, profile=profile, solver="rayleigh_fd",
                   tol=None, grid_size=N)


def plateau_extension(ball: BallEig, r_max: float | None = None) -> RadialProfile:
    """Continue the radial eigenfunction as the constant g(R) beyond the ball.

    The result is nondecreasing on [0, r_max], continuous (in fact C^1) at R,
    and evaluation clamps beyond r_max, so the profile behaves as defined on
    all of [0, infinity).
    """
    g = ball.profile
    R = ball.R
    if r_max is None:
        r_max = R + max(R, 1.0)
    if r_max <= R:
        raise ValueError("r_max must exceed the ball radius")
    tail = np.linspace(R, r_max, 33)[1:]
    grid = np.concatenate([g.grid, tail])
    gR = g.values[-1]
    values = np.concatenate([g.values, np.full(tail.size, gR)])
    dvalues = np.concatenate([g.dvalues, np.zeros(tail.size)])
    dvalues[len(g.grid) - 1] = 0.0  # exact Neumann value at the junction
    return RadialProfile(grid, values, meaning="plateau", dvalues=dvalues, clamp=True)


def monotonicity_defect(ball: BallEig) -> RadialProfile:
    """Defect function whose nonpositivity certifies the monotone profile ratio.

    Compact spaces:    s(r) = g'(r) - 2 cot(2r) g(r)   (ratio g / (sin r cos r))
    Noncompact spaces: s(r) = g'(r) - coth(r)  g(r)    (ratio g / sinh r)

    Sampled on (0, R]; s -> 0 as r -> 0+ and s(R) < 0.  Use ``max_point`` for
    the maximum value and its location.
    """
    g = ball.profile
    r = g.grid[1:]
    gv = g.values[1:]
    dgv = g.dvalues[1:]
    if ball.space.compact:
        s = dgv - 2.0 / np.tan(2.0 * r) * gv
    else:
        s = dgv - gv / np.tanh(r)
    return RadialProfile(r, s, meaning="defect")


# ---------------------------------------------------------------------------
# Annuli
# ---------------------------------------------------------------------------


def _shoot_annulus(co: _Coeffs, mode: int, mu: float, r_in: float, r_out: float,
                   dense: bool = False):
    H, negHp = co.H, co.negHp
    if mode == 0:

        def rhs(r, y):
            return (y[1], -H(r) * y[1] - mu * y[0])

    else:

        def rhs(r, y):
            return (y[1], -H(r) * y[1] - (mu - negHp(r)) * y[0])

    sol = solve_ivp(rhs, (r_in, r_out), (1.0, 0.0), method="DOP853",
                    rtol=_RTOL, atol=_ATOL, dense_output=dense)
    if not sol.success:  # pragma: no cover
        raise SolverError(f"ODE integration failed at mu={mu}: {sol.message}")
    return sol


def solve_annulus(space: Space, r_in: float, r_out: float,
                  modes: tuple[int, ...] = (0, 1), count: int = 4,
                  n_grid: int = 401) -> AnnulusModes:
    """Candidate Neumann spectrum of the geodesic annulus {r_in < r < r_out}.

    Shooting with f'(r_in)=0 and matching f'(r_out)=0, separately for angular
    mode 0 (radial) and mode 1 (angular eigenvalue -H'(r)).  Returns the
    ``count`` smallest positive eigenvalues across the requested modes, sorted
    ascending; eigenvalues within 1e-9 relative are ordered by mode index.
    The zero mode (constant) is excluded.
    """
    r_in, r_out = float(r_in), float(r_out)
    if not 0.0 < r_in < r_out:
        raise ValueError(f"need 0 < r_in < r_out, got ({r_in!r}, {r_out!r})")
    if space.compact and r_out > MAX_COMPACT_BALL_RADIUS + _slack(r_out):
        raise ValueError(
            f"radius constraint violated: r_out={r_out!r} exceeds pi/4 "
            f"in compact space {space.name}"
        )
    for mo in modes:
        if mo not in (0, 1):
            raise ValueError(f"only angular modes 0 and 1 are supported, got {mo}")
    co = _space_coeffs(space)
    L = r_out - r_in
    base = (math.pi / L) ** 2
    found: list[AnnulusMode] = []
    for mode in sorted(set(modes)):

        def terminal(mu, mode=mode):
            return float(_shoot_annulus(co, mode, mu, r_in, r_out).y[1, -1])

        if mode == 0:
            mu_lo = 1e-6 * base
        else:
            lam = [co.negHp(r_in), co.negHp(r_out)]
            mu_lo = 0.9 * min(lam)
        step = base / 10.0
        zeros = []
        a = mu_lo
        fa = terminal(a)
        trace = [(a, fa)]
        steps = 0
        while len(zeros) < count and steps < 3000:
            b = a + step
            fb = terminal(b)
            trace.append((b, fb))
            if fa * fb < 0.0:
                mu = brentq(lambda t: terminal(t), a, b, xtol=1e-13 * max(1.0, b),
                            rtol=1e-14)
                zeros.append(mu)
            a, fa = b, fb
            steps += 1
        if len(zeros) < min(count, 1):
            raise SolverError(
                f"mode-{mode} scan found no eigenvalue; trace tail: "
                + ", ".join(f"({x:.5g}, {y:.2e})" for x, y in trace[-10:])
            )
        for mu in zeros:
            sol = _shoot_annulus(co, mode, mu, r_in, r_out, dense=True)
            grid = np.linspace(r_in, r_out, n_grid)
            y = sol.sol(grid)
            prof = RadialProfile(grid, y[0], meaning=f"annulus_mode{mode}",
                                 dvalues=y[1])
            found.append(AnnulusMode(mode=mode, eigenvalue=mu, profile=prof))

    found.sort(key=lambda am: am.eigenvalue)
    # deterministic multiplet ordering: ties within 1e-9 relative go by mode
    for i in range(len(found) - 1):
        a, b = found[i], found[i + 1]
        if abs(a.eigenvalue - b.eigenvalue) <= 1e-9 * max(abs(a.eigenvalue),
                                                          abs(b.eigenvalue)):
            if b.mode < a.mode:
                found[i], found[i + 1] = b, a
    return AnnulusModes(space=space, r_in=r_in, r_out=r_out, modes=found[:count])
