"""P1 Neumann eigensolver on conformal charts of the 2-D model spaces.

The four real-dimension-2 models (round sphere, hyperbolic plane, and the
curvature +-4 complex models) are charted conformally on a disk: the metric is
``lambda(x,y)^2 (dx^2 + dy^2)`` with

    lambda = (2/a) / (1 + x^2 + y^2)   (compact, curvature  a^2)
    lambda = (2/a) / (1 - x^2 - y^2)   (noncompact, curvature -a^2)

where a = 1 for the constant-curvature-1 pair (k=1) and a = 2 for the complex
pair (k=2).  In two dimensions the Dirichlet energy is conformally invariant,
so the P1 stiffness matrix is the flat one regardless of lambda; only the mass
matrix carries lambda^2 (3-point edge-midpoint quadrature per triangle).

Eigenpairs of K u = mu M u are computed by ARPACK shift-invert at a negative
shift with a fixed start vector, then residual-polished by shifted inverse
iteration and M-orthonormalized, so results are deterministic and satisfy an
explicit residual contract.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .geometry import Space
from .mesh import Mesh

__all__ = [
    "ConformalModel",
    "SpectrumResult",
    "ConvergenceError",
    "build_model",
    "assemble",
    "solve_spectrum",
    "quadrature",
    "curved_area",
]


class ConvergenceError(RuntimeError):
    """Eigensolver failed its residual contract; carries the residual history."""


@dataclass(frozen=True)
class ConformalModel:
    """Disk chart of an m=2 model space with conformal factor lambda."""

    space: Space
    curvature_scale: float  # a: curvature is +a^2 (compact) or -a^2
    chart_bound: float      # chart radius of the admissible region

    @property
    def name(self) -> str:
        return self.space.name

    def lam(self, pts):
        """Conformal factor at chart points (n,2)."""
        rho2 = np.einsum("...i,...i->...", pts, pts)
        a = self.curvature_scale
        if self.space.compact:
            return (2.0 / a) / (1.0 + rho2)
        return (2.0 / a) / (1.0 - rho2)

    def geodesic_r(self, pts):
        """Geodesic distance from the chart origin."""
        rho = np.sqrt(np.einsum("...i,...i->...", pts, pts))
        a = self.curvature_scale
        if self.space.compact:
            return (2.0 / a) * np.arctan(rho)
        return (2.0 / a) * np.arctanh(rho)

    def chart_rho(self, r):
        """Chart radius of the geodesic circle of radius r."""
        a = self.curvature_scale
        if self.space.compact:
            return np.tan(0.5 * a * np.asarray(r))
        return np.tanh(0.5 * a * np.asarray(r))

    def _translate(self, o, pts):
        """Mobius translation taking chart point o to the origin."""
        z = pts[..., 0] + 1j * pts[..., 1]
        oc = complex(o[0], o[1])
        if self.space.compact:
            return (z - oc) / (1.0 + np.conj(oc) * z)
        return (z - oc) / (1.0 - np.conj(oc) * z)

    def dist(self, o, pts):
        """Geodesic distance from chart point o to chart points pts."""
        w = np.abs(self._translate(o, pts))
        a = self.curvature_scale
        if self.space.compact:
            return (2.0 / a) * np.arctan(w)
        return (2.0 / a) * np.arctanh(np.minimum(w, 1.0 - 1e-16))

    def direction(self, o, pts):
        """Unit initial direction (omega_1, omega_2) of the geodesic o -> pts.

        Computed from the Mobius translation centered at o, whose derivative
        at o is a positive real multiple of the identity, so chart directions
        at the translated origin represent the tangent directions at o in a
        fixed orthonormal frame.  Points coinciding with o return (0, 0).
        """
        w = self._translate(o, pts)
        mod = np.abs(w)
        safe = np.where(mod > 1e-300, mod, 1.0)
        unit = w / safe
        out = np.stack([unit.real, unit.imag], axis=-1)
        out[mod <= 1e-14] = 0.0
        return out

    def direction_fd(self, o, pts, step=1e-6):
        """Finite-difference fallback for ``direction``: minus the normalized
        chart gradient of o -> dist(o, x) with respect to o."""
        grads = np.stack([
            (self.dist((o[0] + step, o[1]), pts) - self.dist((o[0] - step, o[1]), pts)),
            (self.dist((o[0], o[1] + step), pts) - self.dist((o[0], o[1] - step), pts)),
        ], axis=-1) / (2.0 * step)
        norm = np.linalg.norm(grads, axis=-1, keepdims=True)
        return -grads / np.maximum(norm, 1e-300)


def build_model(space: Space) -> ConformalModel:
    """Conformal disk chart for an m=2 space; larger dimensions are unsupported."""
    if space.real_dim != 2:
        raise ValueError(
            f"conformal FEM models require real dimension 2, got {space.name} "
            f"(m={space.real_dim})")
    a = 1.0 if space.field_dim == 1 else 2.0
    if space.compact:
        bound = math.tan(0.5 * a * (math.pi / 4.0))
    else:
        bound = 1.0
    return ConformalModel(space=space, curvature_scale=a, chart_bound=bound)


# ---------------------------------------------------------------------------
# Assembly
# ---------------------------------------------------------------------------


def _check_inside(model: ConformalModel, mesh: Mesh):
    rho = np.linalg.norm(mesh.vertices, axis=1)
    bad = rho >= model.chart_bound * (1.0 + 1e-12)
    if np.any(bad):
        i = int(np.nonzero(bad)[0][0])
        raise ValueError(
            f"mesh vertex {i} at chart radius {rho[i]:.8g} lies outside the "
            f"model region (bound {model.chart_bound:.8g}) of {model.name}")


def assemble(model: ConformalModel, mesh: Mesh):
    """Flat P1 stiffness and lambda^2-weighted mass matrix (CSR, symmetric)."""
    _check_inside(model, mesh)
    v = mesh.vertices
    t = mesh.triangles
    p0, p1, p2 = v[t[:, 0]], v[t[:, 1]], v[t[:, 2]]
    e0 = p2 - p1
    e1 = p0 - p2
    e2 = p1 - p0
    area = 0.5 * (e2[:, 0] * (-e1[:, 1]) - e2[:, 1] * (-e1[:, 0]))
    if np.any(area <= 0.0):
        raise ValueError("mesh contains non-CCW or degenerate triangles")

    edges = (e0, e1, e2)
    rows, cols, kdata, mdata = [], [], [], []
    # edge midpoints (opposite each vertex) carry the quadrature
    mids = ((p1 + p2) / 2.0, (p2 + p0) / 2.0, (p0 + p1) / 2.0)
    lam2 = [model.lam(mp) ** 2 for mp in mids]
    # P1 hat function values at the three midpoints: phi_i(m_j) = 1/2 - delta_ij/2
    phi = 0.5 * (1.0 - np.eye(3))
    for i in range(3):
        for j in range(3):
            rows.append(t[:, i])
            cols.append(t[:, j])
            kdata.append(np.einsum("ij,ij->i", edges[i], edges[j]) / (4.0 * area))
            acc = np.zeros(len(t))
            for q in range(3):
                acc += lam2[q] * phi[i, q] * phi[j, q]
            mdata.append(area / 3.0 * acc)
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    K = sp.coo_matrix((np.concatenate(kdata), (rows, cols)),
                      shape=(mesh.nv, mesh.nv)).tocsr()
    M = sp.coo_matrix((np.concatenate(mdata), (rows, cols)),
                      shape=(mesh.nv, mesh.nv)).tocsr()
    return K, M


def quadrature(model: ConformalModel, mesh: Mesh):
    """Edge-midpoint quadrature: points (3*nt, 2) and curved weights (3*nt,).

    Integrates f over the curved domain as sum(w * f(points)); consistent with
    the mass matrix, so weights sum to the curved area 1' M 1.
    """
    v = mesh.vertices
    t = mesh.triangles
    p0, p1, p2 = v[t[:, 0]], v[t[:, 1]], v[t[:, 2]]
    area = mesh.areas()
    pts = np.concatenate([(p1 + p2) / 2.0, (p2 + p0) / 2.0, (p0 + p1) / 2.0])
    w = np.tile(area / 3.0, 3) * model.lam(pts) ** 2
    return pts, w


def curved_area(model: ConformalModel, mesh: Mesh) -> float:
    _, w = quadrature(model, mesh)
    return float(w.sum())


# ---------------------------------------------------------------------------
# Eigensolver
# ---------------------------------------------------------------------------


@dataclass
class SpectrumResult:
    """Ordered Neumann eigenpairs mu_0 <= mu_1 <= ... with vertex eigenvectors."""

    model_name: str
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # (nv, q), M-orthonormal
    residuals: np.ndarray
    h_max: float
    nv: int

    def to_json_dict(self) -> dict:
        return {
            "model": self.model_name,
            "h_max": self.h_max,
            "nv": self.nv,
            "eigenvalues": [float(x) for x in self.eigenvalues],
            "residuals": [float(x) for x in self.residuals],
        }


def _residuals(K, M, w, V):
    out = np.empty(len(w))
    for i, mu in enumerate(w):
        u = V[:, i]
        r = K @ u - mu * (M @ u)
        out[i] = np.linalg.norm(r) / (np.linalg.norm(M @ u) * (1.0 + abs(mu)))
    return out


def _m_orthonormalize(M, V):
    """Modified Gram-Schmidt in the M inner product (in place, deterministic)."""
    q = V.shape[1]
    for i in range(q):
        vi = V[:, i]
        for j in range(i):
            vi -= (V[:, j] @ (M @ vi)) * V[:, j]
        nrm = math.sqrt(vi @ (M @ vi))
        V[:, i] = vi / nrm
    return V


def solve_spectrum(K, M, q: int, model_name: str = "", h_max: float = 0.0,
                   tol: float = 1e-8, maxiter: int = 40) -> SpectrumResult:
    """q smallest eigenpairs of K u = mu M u (constants included as mu_0 ~ 0).

    ARPACK shift-invert at a negative shift with a fixed start vector gives the
    candidate block; pairs whose relative residual ||Ku - mu Mu|| /
    (||Mu|| (1+mu)) exceeds ``tol`` are polished by shifted inverse iteration.
    Raises ConvergenceError with the residual history if the contract cannot
    be met.
    """
    n = K.shape[0]
    if q < 2:
        raise ValueError(f"need q >= 2 eigenpairs, got {q}")
    if q >= n - 1:
        raise ValueError(f"q={q} too large for {n} vertices")
    mass_tot = float(M.sum())
    sigma = -4.0 * math.pi / mass_tot  # ~ -mu_1 of a comparable disk
    v0 = 1.0 + 1e-3 * np.cos(np.arange(n, dtype=float))
    w, V = spla.eigsh(K.tocsc(), k=q, M=M.tocsc(), sigma=sigma, which="LM", v0=v0)
    order = np.argsort(w)
    w, V = w[order], V[:, order]

    history = []
    res = _residuals(K, M, w, V)
    history.append(res.copy())
    for _ in range(3):
        if np.all(res <= tol):
            break
        for i in np.nonzero(res > tol)[0]:
            shift = w[i] - max(1e-3 * abs(w[i]), 1e-3 * abs(sigma))
            lu = spla.splu((K - shift * M).tocsc())
            u = V[:, i]
            for _ in range(2):
                u = lu.solve(M @ u)
                u = u / math.sqrt(u @ (M @ u))
            V[:, i] = u
            w[i] = (u @ (K @ u)) / (u @ (M @ u))
        order = np.argsort(w)
        w, V = w[order], V[:, order]
        res = _residuals(K, M, w, V)
        history.append(res.copy())
    if not np.all(res <= tol):
        raise ConvergenceError(
            f"eigensolver residuals above {tol}: history="
            + "; ".join(np.array2string(h, precision=2) for h in history))
    V = _m_orthonormalize(M, V)
    for i in range(q):
        u = V[:, i]
        w[i] = (u @ (K @ u)) / (u @ (M @ u))
    res = _residuals(K, M, w, V)
    return SpectrumResult(model_name=model_name, eigenvalues=w, eigenvectors=V,
                          residuals=res, h_max=h_max, nv=n)
