"""Schroedinger Dirichlet-to-Neumann map on the unit disk.

The boundary operator sends Dirichlet data to the weak normal derivative of
the solution of (-Laplace + q)u = 0.  All boundary pairings are evaluated
through the volume bilinear form (never by one-sided differencing at the
boundary), which keeps the matrices symmetric by construction.  The
perturbation against the free map is computed from the exact discrete
identity

    <(L_q - L_0) f, g> = sum_nodes q * u_f^q * u_g^0 * vol,

which avoids the catastrophic cancellation of subtracting two O(|j|)
energies to recover an exponentially small difference.

Two solvers share the same contracts: a per-mode radial path (exact
separation of variables, usable whenever q is radial) and a full polar
five-point path for general q.  The radial path at high resolution doubles
as the oracle for everything else.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from ..seqspace import WeightSequence, make_weights, unit_weights
from ..spectral import WeightedOperator


class DtnError(ValueError):
    """Invalid potential/grid, or a flagged solver failure."""


@dataclass(frozen=True)
class DtnConfig:
    """Disk geometry, boundary modes and potential.

    ``n_modes`` is the largest trigonometric mode index J; the boundary
    matrix covers the 2J+1 orthonormal functions 1/sqrt(2pi),
    cos(j.)/sqrt(pi), sin(j.)/sqrt(pi).  Exactly one of ``q_radial`` (q(r),
    vectorized) or ``q_general`` (q(r, theta)) may be given; neither means
    q = 0.  The potential must be supported in the half-radius disk and
    bounded by ``sup_bound``.
    """

    n_modes: int
    n_r: int
    n_theta: int = 0
    q_radial: Callable | None = None
    q_general: Callable | None = None
    support_radius: float = 0.5
    sup_bound: float = 1.0

    def __post_init__(self):
        if self.n_modes < 0 or self.n_r < 8:
            raise DtnError("need n_modes >= 0 and n_r >= 8")
        if self.q_radial is not None and self.q_general is not None:
            raise DtnError("give q_radial or q_general, not both")
        if not 0 < self.support_radius <= 0.5:
            raise DtnError("potential support must stay inside the half-radius disk")
        r = np.linspace(0.0, 1.0, self.n_r + 1)
        if self.q_radial is not None:
            qv = np.asarray(self.q_radial(r), dtype=float)
            self._check_bounds(r, qv)
        if self.q_general is not None:
            if self.n_theta < 8:
                raise DtnError("the polar-grid path needs n_theta >= 8")
            th = np.linspace(0.0, 2 * np.pi, 17)[:-1]
            qv = np.asarray(self.q_general(r[:, None], th[None, :]), dtype=float)
            self._check_bounds(np.broadcast_to(r[:, None], qv.shape), qv)

    def _check_bounds(self, r, qv):
        if np.any(np.abs(qv) > self.sup_bound + 1e-12):
            raise DtnError(f"potential exceeds the stated bound {self.sup_bound}")
        outside = np.abs(np.asarray(r)) > self.support_radius + 1e-12
        if np.any(np.abs(np.asarray(qv)[outside]) > 1e-12):
            raise DtnError(f"potential not supported in radius {self.support_radius}")

    def is_radial(self) -> bool:
        return self.q_general is None

    def q_on_radii(self, r: np.ndarray) -> np.ndarray:
        if self.q_radial is None:
            return np.zeros_like(r)
        return np.asarray(self.q_radial(r), dtype=float)


def dtn_mode_order(J: int) -> list:
    """Boundary modes in listing order: (0,'c'), (1,'c'), (1,'s'), ..."""
    modes = [(0, "c")]
    for j in range(1, J + 1):
        modes.extend([(j, "c"), (j, "s")])
    return modes


def _boundary_weight(kind: str, J_list: int) -> WeightSequence:
    if kind == "unit":
        return unit_weights(J_list)
    if kind == "sobolev_half":
        return make_weights("sobolev", {"s": 0.5, "n": 1}, J_list)
    if kind == "sobolev_minus_half":
        return make_weights("sobolev", {"s": -0.5, "n": 1}, J_list)
    raise DtnError(f"unknown boundary weight kind {kind!r}")


# --- radial path ----------------------------------------------------------

def _radial_solve(j: int, q_nodes: np.ndarray, n: int):
    """Profile R on r_i = i/n with R(1) = 1, minimizing the discrete energy.

    Energy: sum_i r_{i+1/2}(R_{i+1}-R_i)^2/dr + sum_i (j^2/r_i) R_i^2 dr
    + sum_i q_i R_i^2 r_i dr (trapezoid weights, center cell dr^2/8).
    Modes j >= 1 pin R(0) = 0.
    """
    dr = 1.0 / n
    r = np.arange(n + 1) * dr
    r_half = (np.arange(n) + 0.5) * dr
    cond = r_half / dr  # conductances of the n radial edges

    # node mass: j^2 angular stiffness plus potential, trapezoid in r dr
    mass = np.zeros(n + 1)
    if j > 0:
        mass[1:n] += (j * j / r[1:n]) * dr
        mass[n] += (j * j / r[n]) * dr / 2.0
    mass[1:n] += q_nodes[1:n] * r[1:n] * dr
    mass[n] += q_nodes[n] * r[n] * dr / 2.0
    mass[0] += q_nodes[0] * dr * dr / 8.0

    if j == 0:
        idx = np.arange(0, n)  # center value is an unknown
    else:
        idx = np.arange(1, n)  # center pinned to zero
    m = idx.size
    diag = np.zeros(m)
    for t, i in enumerate(idx):
        diag[t] = (cond[i - 1] if i > 0 else 0.0) + (cond[i] if i < n else 0.0) + mass[i]
    upper = -cond[idx[:-1]] if m > 1 else np.zeros(0)

    ab = np.zeros((2, m))
    ab[0, 1:] = upper
    ab[1, :] = diag
    rhs = np.zeros(m)
    rhs[-1] = cond[n - 1] * 1.0  # coupling to the boundary value R_n = 1
    try:
        sol = sla.solveh_banded(ab, rhs, lower=False)
    except np.linalg.LinAlgError as exc:
        raise DtnError(
            "radial solve lost positivity; the potential sits near a Dirichlet eigenvalue"
        ) from exc
    R = np.zeros(n + 1)
    R[idx] = sol
    R[n] = 1.0
    resid = _radial_residual(ab, upper, sol, rhs)
    if not np.isfinite(resid) or resid > 1e-8:
        raise DtnError(f"radial solver diverged: relative residual {resid:.2e}")
    return r, R, cond, mass


def _radial_residual(ab, upper, sol, rhs):
    m = sol.size
    Ax = ab[1] * sol
    if m > 1:
        Ax[:-1] += upper * sol[1:]
        Ax[1:] += upper * sol[:-1]
    denom = np.linalg.norm(rhs)
    return np.linalg.norm(Ax - rhs) / denom if denom else 0.0


def _radial_energy(R, cond, mass) -> float:
    d = np.diff(R)
    return float(np.sum(cond * d * d) + np.sum(mass * R * R))


def radial_dtn_entry(j: int, q_radial: Callable | None, n_r: int) -> float:
    """Perturbation diagonal entry for mode j from the 1-d radial solves.

    Evaluates sum_i q_i R^q_i R^0_i r_i dr with the same quadrature the
    solver minimizes; this is the high-resolution oracle for the matrices
    assembled at production resolution.
    """
    n = int(n_r)
    r = np.arange(n + 1) / n
    q_nodes = np.zeros(n + 1) if q_radial is None else np.asarray(q_radial(r), dtype=float)
    _, Rq, _, _ = _radial_solve(j, q_nodes, n)
    _, R0, _, _ = _radial_solve(j, np.zeros(n + 1), n)
    dr = 1.0 / n
    w = r * dr
    w[n] /= 2.0
    w[0] = dr * dr / 8.0
    return float(np.sum(q_nodes * Rq * R0 * w))


def dtn_perturbation_entry(j: int, q_radial: Callable | None, n_r: int) -> float:
    """Mode-j perturbation entry with the leading discretization error removed.

    Richardson-extrapolates the second-order radial scheme between n_r and
    n_r/2, which removes the O(dr^2) profile error that dominates for steep
    high modes.
    """
    if n_r >= 64 and n_r % 2 == 0:
        fine = radial_dtn_entry(j, q_radial, n_r)
        coarse = radial_dtn_entry(j, q_radial, n_r // 2)
        return (4.0 * fine - coarse) / 3.0
    return radial_dtn_entry(j, q_radial, n_r)


def _dtn_radial(cfg: DtnConfig, difference: bool) -> np.ndarray:
    n = cfg.n_r
    r = np.arange(n + 1) / n
    q_nodes = cfg.q_on_radii(r)
    modes = dtn_mode_order(cfg.n_modes)
    diag = np.zeros(len(modes))
    cache = {}
    for pos, (j, _) in enumerate(modes):
        if j not in cache:
            if difference:
                cache[j] = dtn_perturbation_entry(j, cfg.q_radial, n)
            else:
                _, Rq, cond, mass = _radial_solve(j, q_nodes, n)
                cache[j] = _radial_energy(Rq, cond, mass)
        diag[pos] = cache[j]
    return np.diag(diag)


# --- polar-grid path ------------------------------------------------------

class _PolarGrid:
    """Five-point energy discretization on a polar grid with a center node.

    Node layout: index 0 is the center, then (i, k) -> 1 + (i-1)*K + k for
    rings i = 1..n and angles k = 0..K-1; ring n is the boundary.
    """

    def __init__(self, n_r: int, n_theta: int):
        self.n, self.K = n_r, n_theta
        self.dr = 1.0 / n_r
        self.dth = 2.0 * np.pi / n_theta
        self.r = np.arange(n_r + 1) * self.dr
        self.theta = np.arange(n_theta) * self.dth
        self.n_nodes = 1 + n_r * n_theta
        self.interior = np.arange(0, 1 + (n_r - 1) * n_theta)
        self.boundary = np.arange(1 + (n_r - 1) * n_theta, self.n_nodes)

    def node(self, i, k):
        return 0 if i == 0 else 1 + (i - 1) * self.K + (k % self.K)

    def node_volumes(self) -> np.ndarray:
        """Quadrature weight (area element) carried by each node."""
        w = np.zeros(self.n_nodes)
        w[0] = np.pi * self.dr**2 / 4.0
        for i in range(1, self.n + 1):
            ring = [self.node(i, k) for k in range(self.K)]
            wi = self.r[i] * self.dr * self.dth
            if i == self.n:
                wi /= 2.0
            w[ring] = wi
        return w

    def q_values(self, cfg: DtnConfig) -> np.ndarray:
        q = np.zeros(self.n_nodes)
        if cfg.q_general is not None:
            q[0] = float(np.asarray(cfg.q_general(np.zeros(1), np.zeros(1))).ravel()[0])
            for i in range(1, self.n + 1):
                vals = np.asarray(cfg.q_general(np.full(self.K, self.r[i]), self.theta), float)
                q[[self.node(i, k) for k in range(self.K)]] = vals
        elif cfg.q_radial is not None:
            qr = cfg.q_on_radii(self.r)
            q[0] = qr[0]
            for i in range(1, self.n + 1):
                q[[self.node(i, k) for k in range(self.K)]] = qr[i]
        return q

    def edges(self):
        """(node_a, node_b, conductance) triples of the energy form."""
        a, b, c = [], [], []
        r_half = (np.arange(self.n) + 0.5) * self.dr
        for k in range(self.K):  # radial edges, center outward
            for i in range(self.n):
                a.append(self.node(i, k))
                b.append(self.node(i + 1, k))
                c.append(r_half[i] * self.dth / self.dr)
        for i in range(1, self.n + 1):  # angular edges around each ring
            w = self.dr / (self.r[i] * self.dth)
            if i == self.n:
                w /= 2.0
            for k in range(self.K):
                a.append(self.node(i, k))
                b.append(self.node(i, k + 1))
                c.append(w)
        return np.array(a), np.array(b), np.array(c)

    def form_matrix(self, q_nodes: np.ndarray) -> sp.csr_matrix:
        """Full bilinear form B over all nodes (boundary included)."""
        a, b, c = self.edges()
        rows = np.concatenate([a, b, a, b])
        cols = np.concatenate([a, b, b, a])
        vals = np.concatenate([c, c, -c, -c])
        mass = q_nodes * self.node_volumes()
        rows = np.concatenate([rows, np.arange(self.n_nodes)])
        cols = np.concatenate([cols, np.arange(self.n_nodes)])
        vals = np.concatenate([vals, mass])
        return sp.csr_matrix((vals, (rows, cols)), shape=(self.n_nodes, self.n_nodes))


def _boundary_data(grid: _PolarGrid, modes) -> np.ndarray:
    cols = []
    for j, par in modes:
        if j == 0:
            cols.append(np.full(grid.K, 1.0 / np.sqrt(2.0 * np.pi)))
        elif par == "c":
            cols.append(np.cos(j * grid.theta) / np.sqrt(np.pi))
        else:
            cols.append(np.sin(j * grid.theta) / np.sqrt(np.pi))
    return np.stack(cols, axis=1)


def _grid_solutions(grid: _PolarGrid, B: sp.csr_matrix, data: np.ndarray) -> np.ndarray:
    """Discrete solutions with the given boundary columns, as full node vectors."""
    Bii = B[grid.interior][:, grid.interior].tocsc()
    Bib = B[grid.interior][:, grid.boundary]
    try:
        lu = spla.splu(Bii)
    except RuntimeError as exc:
        raise DtnError(
            "polar-grid form is singular; the potential sits near a Dirichlet eigenvalue"
        ) from exc
    rhs = -Bib @ data
    sol_i = lu.solve(rhs)
    resid = np.linalg.norm(Bii @ sol_i - rhs) / max(np.linalg.norm(rhs), 1e-300)
    if not np.isfinite(resid) or resid > 1e-8:
        raise DtnError(f"polar-grid solver diverged: relative residual {resid:.2e}")
    out = np.zeros((grid.n_nodes, data.shape[1]))
    out[grid.interior] = sol_i
    out[grid.boundary] = data
    return out


def _dtn_grid(cfg: DtnConfig, difference: bool) -> np.ndarray:
    grid = _PolarGrid(cfg.n_r, cfg.n_theta)
    modes = dtn_mode_order(cfg.n_modes)
    data = _boundary_data(grid, modes)
    q_nodes = grid.q_values(cfg)
    B_q = grid.form_matrix(q_nodes)
    u_q = _grid_solutions(grid, B_q, data)
    if not difference:
        return u_q.T @ (B_q @ u_q)
    B_0 = grid.form_matrix(np.zeros(grid.n_nodes))
    u_0 = _grid_solutions(grid, B_0, data)
    w = q_nodes * grid.node_volumes()
    return (u_q * w[:, None]).T @ u_0


def disk_dtn(
    cfg: DtnConfig,
    difference: bool = True,
    path: str = "auto",
    weight_kind: str = "unit",
) -> WeightedOperator:
    """Boundary matrix of the Dirichlet-to-Neumann map on the unit disk.

    With ``difference=True`` (default) the matrix is the perturbation
    against the free map, computed by the cancellation-free volume pairing
    of the q term with the free solutions; otherwise it is the map itself
    via the energy pairing (its free diagonal is |j| up to quadrature
    error).  ``path`` selects the per-mode radial solver ("radial", exact
    separation, radial q only), the polar five-point solver ("grid"), or
    radial-when-possible ("auto").  ``weight_kind="sobolev_half"`` attaches
    the half-order boundary weights, turning the matrix into an operator
    from the smoothness-1/2 space to its dual.
    """
    if path == "auto":
        path = "radial" if cfg.is_radial() else "grid"
    if path == "radial":
        if not cfg.is_radial():
            raise DtnError("radial path requires a radial potential")
        mat = _dtn_radial(cfg, difference)
    elif path == "grid":
        if cfg.n_theta < 8:
            raise DtnError("the polar-grid path needs n_theta >= 8")
        mat = _dtn_grid(cfg, difference)
    else:
        raise DtnError(f"unknown path {path!r}")
    J_list = len(dtn_mode_order(cfg.n_modes))
    if weight_kind == "unit":
        dom = cod = unit_weights(J_list)
    elif weight_kind == "sobolev_half":
        dom = _boundary_weight("sobolev_half", J_list)
        cod = _boundary_weight("sobolev_minus_half", J_list)
    else:
        raise DtnError(f"unknown weight kind {weight_kind!r}")
    tag = "dtn_difference" if difference else "dtn_map"
    return WeightedOperator(mat, dom, cod, label=f"{tag}(J={cfg.n_modes},n_r={cfg.n_r})")
