"""Grid Dirichlet solver for minimal cones and edge-quadratic envelopes.

The solver runs Gauss-Seidel sweeps; at each interior node the discrete
Hessian is affine and Loewner-decreasing in the center value, so a unique
threshold puts it on the cone boundary.  For every margin functional in
this package the dependence on an identity shift is exactly affine, which
solves the threshold in closed form on box grids (and for trace-type
margins on balls); the safeguarded bracket-and-bisect route is kept both
as the general fallback and as a cross-check.

Ball domains use cut cells: the boundary value is imposed at the first
exterior node along each axis through a linear interpolation weight, so
the axis ghost value is tied to the center unknown.  Exterior nodes that
appear as diagonal stencil corners are extrapolated the same way along
the diagonal segment, but lagged within a sweep (their owner is the
center node itself, and folding them into the update would break the
monotone dependence on the center value).  All extrapolations are exact
on affine functions; for curved data the off-diagonal entries near a
curved boundary are first-order accurate, so eigen-type margins on balls
are solved by bracketed bisection and carry O(h) boundary error.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from .cones import ConeHandle, EdgeCone, HalfspaceCone
from .symspace import SymSubspace, as_rng

THETA_FLOOR = 0.05
LP_TOL = 1e-8


@dataclass(frozen=True)
class GridDomain:
    """Regular lattice over a box or ball with interior/boundary masks."""

    n: int
    shape: tuple
    h: float
    origin: np.ndarray
    kind: str                     # "box" or "ball"
    interior: np.ndarray          # bool, full lattice shape
    boundary: np.ndarray          # bool, full lattice shape
    radius: float | None = None
    center: np.ndarray | None = None

    @staticmethod
    def box(lo, hi, h: float) -> "GridDomain":
        lo = np.atleast_1d(np.asarray(lo, dtype=float))
        hi = np.atleast_1d(np.asarray(hi, dtype=float))
        n = lo.size
        if not 1 <= n <= 4:
            raise ValueError("grid dimension must be 1..4")
        counts = []
        for a, b in zip(lo, hi):
            m = (b - a) / h
            mi = int(round(m))
            if abs(m - mi) > 1e-9 or mi < 2:
                raise ValueError("box side must be a positive multiple of h")
            counts.append(mi + 1)
        shape = tuple(counts)
        interior = np.zeros(shape, dtype=bool)
        interior[tuple(slice(1, -1) for _ in range(n))] = True
        boundary = np.ones(shape, dtype=bool)
        boundary[tuple(slice(1, -1) for _ in range(n))] = False
        return GridDomain(n, shape, float(h), lo, "box", interior, boundary)

    @staticmethod
    def ball(radius: float, h: float, center=None, dim: int = 2) -> "GridDomain":
        if center is None:
            center = np.zeros(dim)
        center = np.atleast_1d(np.asarray(center, dtype=float))
        n = center.size
        if not 1 <= n <= 4:
            raise ValueError("grid dimension must be 1..4")
        half = int(np.ceil(radius / h)) + 2
        shape = tuple([2 * half + 1] * n)
        origin = center - half * h
        dom = GridDomain(n, shape, float(h), origin, "ball",
                         np.zeros(shape, dtype=bool), np.zeros(shape, dtype=bool),
                         radius=float(radius), center=center)
        pts = dom.coords().reshape(-1, n)
        inside = ((pts - center) ** 2).sum(axis=1) < radius**2
        inside = inside.reshape(shape)
        near = _dilate(inside, n)
        object.__setattr__(dom, "interior", inside)
        object.__setattr__(dom, "boundary", near & ~inside)
        return dom

    def coords(self) -> np.ndarray:
        axes = [self.origin[i] + self.h * np.arange(self.shape[i])
                for i in range(self.n)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack(mesh, axis=-1)

    def boundary_positions(self) -> np.ndarray:
        """Representative positions of boundary nodes (sphere projections
        for balls, the nodes themselves for boxes)."""
        pts = self.coords()[self.boundary]
        if self.kind == "ball":
            rel = pts - self.center
            norms = np.linalg.norm(rel, axis=1, keepdims=True)
            norms[norms == 0] = 1.0
            pts = self.center + rel / norms * self.radius
        return pts


def _dilate(mask: np.ndarray, n: int) -> np.ndarray:
    """Nodes reachable from the mask by one stencil offset (incl. corners)."""
    out = mask.copy()
    grown = mask
    for axis in range(n):
        shifted = np.zeros_like(grown)
        sl_fwd = [slice(None)] * n
        sl_bwd = [slice(None)] * n
        sl_fwd[axis] = slice(1, None)
        sl_bwd[axis] = slice(None, -1)
        shifted[tuple(sl_fwd)] |= grown[tuple(sl_bwd)]
        shifted[tuple(sl_bwd)] |= grown[tuple(sl_fwd)]
        grown = grown | shifted
    out |= grown
    return out


@dataclass
class GridField:
    """Scalar values on a grid domain (full lattice storage)."""

    domain: GridDomain
    values: np.ndarray

    def copy(self) -> "GridField":
        return GridField(self.domain, self.values.copy())


def boundary_values(dom: GridDomain, phi) -> np.ndarray:
    """Evaluate the boundary function at the boundary representatives."""
    if callable(phi):
        return np.asarray(phi(dom.boundary_positions()), dtype=float)
    vals = np.asarray(phi, dtype=float)
    if vals.shape[0] != int(dom.boundary.sum()):
        raise ValueError("boundary value array length mismatch")
    return vals


# ----------------------------------------------------------------------
# stencil tables
# ----------------------------------------------------------------------

@dataclass
class _Stencil:
    dom: GridDomain
    flat_interior: np.ndarray          # (M,) flat indices, lex order
    axis_plus: np.ndarray              # (M, n) flat neighbor indices
    axis_minus: np.ndarray
    ghost_plus: np.ndarray             # (M, n) bool: axis neighbor outside
    ghost_minus: np.ndarray
    theta_plus: np.ndarray             # (M, n) crossing fraction in (0, 1]
    theta_minus: np.ndarray
    phi_plus: np.ndarray               # (M, n) boundary data at the crossing
    phi_minus: np.ndarray
    pairs: list                        # [(i, j)] with i < j
    corner_pp: np.ndarray              # (M, P) flat indices
    corner_mm: np.ndarray
    corner_pm: np.ndarray
    corner_mp: np.ndarray
    red_mask: np.ndarray               # (M,) parity coloring of interior nodes
    # flattened ghost tables, filled by the builder
    g_rows: np.ndarray = None
    g_flat: np.ndarray = None
    g_theta: np.ndarray = None
    g_phi: np.ndarray = None
    g_unique: np.ndarray = None
    g_inverse: np.ndarray = None
    g_counts: np.ndarray = None


def _build_stencil(dom: GridDomain, phi) -> _Stencil:
    n = dom.n
    shape = dom.shape
    strides = np.array([int(np.prod(shape[i + 1:], dtype=np.int64)) for i in range(n)],
                       dtype=np.int64)
    inside_flat = dom.interior.ravel()
    flat_interior = np.flatnonzero(inside_flat)
    multi = np.array(np.unravel_index(flat_interior, shape)).T  # (M, n)
    coords = dom.origin + multi * dom.h

    m = flat_interior.size
    axis_plus = np.empty((m, n), dtype=np.int64)
    axis_minus = np.empty((m, n), dtype=np.int64)
    ghost_plus = np.zeros((m, n), dtype=bool)
    ghost_minus = np.zeros((m, n), dtype=bool)
    theta_plus = np.ones((m, n))
    theta_minus = np.ones((m, n))
    phi_plus = np.zeros((m, n))
    phi_minus = np.zeros((m, n))

    def crossing(xs, direction):
        """Fraction theta in (0,1] where x + theta*h*direction meets the sphere."""
        c = dom.center
        r = dom.radius
        d = direction * dom.h
        a = float(d @ d)
        rel = xs - c
        b = 2.0 * rel @ d
        cc = float(rel @ rel) - r * r
        disc = b * b - 4 * a * cc
        t = (-b + np.sqrt(max(disc, 0.0))) / (2 * a)
        return float(np.clip(t, 1e-12, 1.0))

    for axis in range(n):
        axis_plus[:, axis] = flat_interior + strides[axis]
        axis_minus[:, axis] = flat_interior - strides[axis]
        if dom.kind == "ball":
            nb_in_p = inside_flat[axis_plus[:, axis]]
            nb_in_m = inside_flat[axis_minus[:, axis]]
            ghost_plus[:, axis] = ~nb_in_p
            ghost_minus[:, axis] = ~nb_in_m
            direction = np.zeros(n)
            direction[axis] = 1.0
            for row in np.flatnonzero(ghost_plus[:, axis]):
                th = max(crossing(coords[row], direction), THETA_FLOOR)
                theta_plus[row, axis] = th
                y = coords[row] + th * dom.h * direction
                phi_plus[row, axis] = float(np.asarray(phi(y[None, :]))[0])
            for row in np.flatnonzero(ghost_minus[:, axis]):
                th = max(crossing(coords[row], -direction), THETA_FLOOR)
                theta_minus[row, axis] = th
                y = coords[row] - th * dom.h * direction
                phi_minus[row, axis] = float(np.asarray(phi(y[None, :]))[0])

    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    p = len(pairs)
    corner_pp = np.empty((m, max(p, 1)), dtype=np.int64)
    corner_mm = np.empty((m, max(p, 1)), dtype=np.int64)
    corner_pm = np.empty((m, max(p, 1)), dtype=np.int64)
    corner_mp = np.empty((m, max(p, 1)), dtype=np.int64)
    for idx, (i, j) in enumerate(pairs):
        corner_pp[:, idx] = flat_interior + strides[i] + strides[j]
        corner_mm[:, idx] = flat_interior - strides[i] - strides[j]
        corner_pm[:, idx] = flat_interior + strides[i] - strides[j]
        corner_mp[:, idx] = flat_interior - strides[i] + strides[j]

    red_mask = (multi.sum(axis=1) % 2 == 0)
    stencil = _Stencil(dom, flat_interior, axis_plus, axis_minus,
                       ghost_plus, ghost_minus, theta_plus, theta_minus,
                       phi_plus, phi_minus, pairs,
                       corner_pp, corner_mm, corner_pm, corner_mp, red_mask)
    # flattened ghost table for vectorized refresh: axis ghosts plus the
    # diagonal (corner) ghosts, all extrapolated from their owners through
    # the sphere crossing; corners are lagged within a sweep so the node
    # update stays monotone in the center value
    g_rows, g_flat, g_theta, g_phi = [], [], [], []
    for axis in range(n):
        for ghosts, nbs, thetas, phis in (
            (ghost_plus, axis_plus, theta_plus, phi_plus),
            (ghost_minus, axis_minus, theta_minus, phi_minus),
        ):
            rows = np.flatnonzero(ghosts[:, axis])
            g_rows.append(rows)
            g_flat.append(nbs[rows, axis])
            g_theta.append(thetas[rows, axis])
            g_phi.append(phis[rows, axis])
    if dom.kind == "ball":
        for idx, (i, j) in enumerate(pairs):
            for table, si, sj in ((corner_pp, 1, 1), (corner_mm, -1, -1),
                                  (corner_pm, 1, -1), (corner_mp, -1, 1)):
                outside = ~inside_flat[table[:, idx]]
                rows = np.flatnonzero(outside)
                if rows.size == 0:
                    continue
                direction = np.zeros(n)
                direction[i], direction[j] = si, sj
                th_list, phi_list = [], []
                for row in rows:
                    th = max(crossing(coords[row], direction), THETA_FLOOR)
                    y = coords[row] + th * dom.h * direction
                    th_list.append(th)
                    phi_list.append(float(np.asarray(phi(y[None, :]))[0]))
                g_rows.append(rows)
                g_flat.append(table[rows, idx])
                g_theta.append(np.array(th_list))
                g_phi.append(np.array(phi_list))
    stencil.g_rows = np.concatenate(g_rows) if g_rows else np.zeros(0, dtype=np.int64)
    stencil.g_flat = np.concatenate(g_flat) if g_flat else np.zeros(0, dtype=np.int64)
    stencil.g_theta = np.concatenate(g_theta) if g_theta else np.zeros(0)
    stencil.g_phi = np.concatenate(g_phi) if g_phi else np.zeros(0)
    uniq, inv, counts = (np.unique(stencil.g_flat, return_inverse=True,
                                   return_counts=True)
                         if stencil.g_flat.size else (np.zeros(0, dtype=np.int64),
                                                      np.zeros(0, dtype=np.int64),
                                                      np.zeros(0)))
    stencil.g_unique = uniq
    stencil.g_inverse = inv
    stencil.g_counts = counts
    return stencil


def _hessian_batch(stencil: _Stencil, flat_vals: np.ndarray, rows: np.ndarray) -> np.ndarray:
    """Discrete Hessians at the selected interior rows (ghosts already in
    the value array)."""
    dom = stencil.dom
    n = dom.n
    h2 = dom.h * dom.h
    center = flat_vals[stencil.flat_interior[rows]]
    up = flat_vals[stencil.axis_plus[rows]]
    dn = flat_vals[stencil.axis_minus[rows]]
    out = np.zeros((rows.size, n, n))
    diag = (up + dn - 2.0 * center[:, None]) / h2
    for i in range(n):
        out[:, i, i] = diag[:, i]
    for idx, (i, j) in enumerate(stencil.pairs):
        cr = (flat_vals[stencil.corner_pp[rows, idx]]
              + flat_vals[stencil.corner_mm[rows, idx]]
              - flat_vals[stencil.corner_pm[rows, idx]]
              - flat_vals[stencil.corner_mp[rows, idx]]) / (4.0 * h2)
        out[:, i, j] = cr
        out[:, j, i] = cr
    return out


def discrete_hessian(u: GridField, index) -> np.ndarray:
    """Central second differences at one interior node; exact on quadratics."""
    dom = u.domain
    idx = tuple(int(i) for i in np.atleast_1d(index))
    if not dom.interior[idx]:
        raise ValueError(f"node {idx} is not interior")
    n = dom.n
    h2 = dom.h * dom.h
    v = u.values
    out = np.zeros((n, n))
    for i in range(n):
        up = list(idx); up[i] += 1
        dn = list(idx); dn[i] -= 1
        out[i, i] = (v[tuple(up)] + v[tuple(dn)] - 2 * v[idx]) / h2
    for i in range(n):
        for j in range(i + 1, n):
            pp = list(idx); pp[i] += 1; pp[j] += 1
            mm = list(idx); mm[i] -= 1; mm[j] -= 1
            pm = list(idx); pm[i] += 1; pm[j] -= 1
            mp = list(idx); mp[i] -= 1; mp[j] += 1
            val = (v[tuple(pp)] + v[tuple(mm)] - v[tuple(pm)] - v[tuple(mp)]) / (4 * h2)
            out[i, j] = out[j, i] = val
    return out


# ----------------------------------------------------------------------
# per-node threshold
# ----------------------------------------------------------------------

def _linear_weight(cone: ConeHandle):
    """Weight matrix W with margin(A) = <A, W>, when the margin is linear."""
    if isinstance(cone, HalfspaceCone):
        return cone.normal
    w = getattr(cone, "linear_margin_weight", None)
    return w


def node_threshold_bisect(cone: ConeHandle, stencil: _Stencil, flat_vals: np.ndarray,
                          row: int, tol: float, warm_cache=None) -> float:
    """Bracket the boundary-crossing center value and bisect the margin.

    The bracket starts two neighbor-oscillations wide around the current
    value and doubles up to 40 times; failure to bracket signals an
    unbounded direction, which basic-edge cones exclude.
    """
    dom = stencil.dom
    h2 = dom.h * dom.h
    flat = stencil.flat_interior[row]
    rows = np.array([row])

    def margin_at(t):
        old = flat_vals[flat]
        flat_vals[flat] = t
        _refresh_axis_ghosts_single(stencil, flat_vals, row)
        a = _hessian_batch(stencil, flat_vals, rows)[0]
        flat_vals[flat] = old
        _refresh_axis_ghosts_single(stencil, flat_vals, row)
        if warm_cache is not None and isinstance(cone, EdgeCone) and cone._fast_margin is None:
            m, _, coords, _ = cone.optimizer_margin(a, warm_coords=warm_cache.get(flat))
            warm_cache[flat] = coords
            return m
        return cone.margin(a)

    t0 = flat_vals[flat]
    up = flat_vals[stencil.axis_plus[row]]
    dn = flat_vals[stencil.axis_minus[row]]
    osc = float(max(up.max(), dn.max()) - min(up.min(), dn.min()))
    width = max(2.0 * osc, h2, 1e-8)
    lo, hi = t0 - width, t0 + width
    m_lo, m_hi = margin_at(lo), margin_at(hi)
    grow = 0
    # margin decreases in t: need m(lo) >= 0 >= m(hi)
    while (m_lo < 0 or m_hi > 0) and grow < 40:
        width *= 2.0
        lo, hi = t0 - width, t0 + width
        m_lo, m_hi = margin_at(lo), margin_at(hi)
        grow += 1
    if m_lo < 0 or m_hi > 0:
        raise RuntimeError("bracket failure: cone admits an unbounded center direction")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if margin_at(mid) >= 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _refresh_axis_ghosts_single(stencil: _Stencil, flat_vals: np.ndarray, row: int):
    n = stencil.dom.n
    t = flat_vals[stencil.flat_interior[row]]
    for axis in range(n):
        if stencil.ghost_plus[row, axis]:
            th = stencil.theta_plus[row, axis]
            flat_vals[stencil.axis_plus[row, axis]] = t + (stencil.phi_plus[row, axis] - t) / th
        if stencil.ghost_minus[row, axis]:
            th = stencil.theta_minus[row, axis]
            flat_vals[stencil.axis_minus[row, axis]] = t + (stencil.phi_minus[row, axis] - t) / th


def _refresh_axis_ghosts(stencil: _Stencil, flat_vals: np.ndarray):
    """Set every axis ghost from its owners (mean over owner constraints)."""
    if stencil.dom.kind != "ball" or stencil.g_flat.size == 0:
        return
    t = flat_vals[stencil.flat_interior[stencil.g_rows]]
    vals = t + (stencil.g_phi - t) / stencil.g_theta
    sums = np.zeros(stencil.g_unique.size)
    np.add.at(sums, stencil.g_inverse, vals)
    flat_vals[stencil.g_unique] = sums / stencil.g_counts


@dataclass
class SolveInfo:
    converged: bool
    sweeps: int
    max_update: float
    history: list = field(default_factory=list)
    ordering: str = "lex"


def perron_solve(cone: ConeHandle, dom: GridDomain, phi, *, tol: float | None = None,
                 max_sweeps: int = 20000, ordering: str = "lex",
                 init: str = "max", history_every: int = 1,
                 use_bisection: bool = False) -> tuple[GridField, SolveInfo]:
    """Sweep until every interior discrete Hessian sits on the cone boundary.

    ordering "lex" updates nodes one at a time in lexicographic order;
    "redblack" updates the two parity classes as vectorized half-sweeps
    (same fixed point within tol, much faster on large grids).
    """
    if cone.n != dom.n:
        raise ValueError(f"cone ambient {cone.n} != grid dimension {dom.n}")
    phi_fn = phi if callable(phi) else None
    if phi_fn is None:
        raise ValueError("phi must be callable on coordinate arrays")
    stencil = _build_stencil(dom, phi_fn)

    vals = np.zeros(dom.shape)
    b_vals = boundary_values(dom, phi_fn)
    vals[dom.boundary] = b_vals
    scale = 1.0 + float(np.abs(b_vals).max() if b_vals.size else 1.0)
    if tol is None:
        tol = 1e-9 * scale
    if init == "max":
        start = float(b_vals.max()) if b_vals.size else 0.0
    elif init == "min":
        start = float(b_vals.min()) if b_vals.size else 0.0
    else:
        start = 0.0
    vals[dom.interior] = start

    flat = vals.ravel()
    _refresh_axis_ghosts(stencil, flat)

    h2 = dom.h * dom.h
    m = stencil.flat_interior.size
    lin_w = _linear_weight(cone)
    warm_cache: dict = {}
    history = []
    converged = False
    sweeps = 0

    ball_eig = dom.kind == "ball" and lin_w is None
    if ordering not in ("lex", "redblack"):
        raise ValueError("ordering must be 'lex' or 'redblack'")

    def update_rows(rows: np.ndarray) -> float:
        if rows.size == 0:
            return 0.0
        if use_bisection or ball_eig:
            worst = 0.0
            for row in rows:
                t_new = node_threshold_bisect(cone, stencil, flat, int(row),
                                              tol * h2 * 0.1, warm_cache)
                f_idx = stencil.flat_interior[row]
                worst = max(worst, abs(t_new - flat[f_idx]))
                flat[f_idx] = t_new
                _refresh_axis_ghosts_single(stencil, flat, int(row))
            return worst
        if lin_w is not None:
            return _update_rows_linear(cone, stencil, flat, rows, lin_w)
        # eigen-margin on a box: exact identity-shift solve
        a0 = _hessian_batch(stencil, flat, rows)
        if isinstance(cone, EdgeCone) and cone._fast_margin is None:
            margins = np.empty(rows.size)
            for i, row in enumerate(rows):
                f_idx = stencil.flat_interior[row]
                mg, _, coords, _ = cone.optimizer_margin(
                    a0[i], warm_coords=warm_cache.get(f_idx))
                warm_cache[f_idx] = coords
                margins[i] = mg
        else:
            margins = cone.margin_batch(a0)
        t_new = flat[stencil.flat_interior[rows]] + h2 * margins / (2.0 * cone.id_shift_slope)
        worst = float(np.abs(t_new - flat[stencil.flat_interior[rows]]).max())
        flat[stencil.flat_interior[rows]] = t_new
        return worst

    all_rows = np.arange(m)
    red_rows = np.flatnonzero(stencil.red_mask)
    black_rows = np.flatnonzero(~stencil.red_mask)

    for sweeps in range(1, max_sweeps + 1):
        if ordering == "lex":
            worst = 0.0
            for row in all_rows:
                worst = max(worst, update_rows(np.array([row])))
        else:
            w1 = update_rows(red_rows)
            _refresh_axis_ghosts(stencil, flat)
            w2 = update_rows(black_rows)
            worst = max(w1, w2)
        _refresh_axis_ghosts(stencil, flat)
        if sweeps % history_every == 0:
            history.append((sweeps, worst))
        if worst < tol:
            converged = True
            break

    field_vals = flat.reshape(dom.shape)
    return (GridField(dom, field_vals),
            SolveInfo(converged, sweeps, history[-1][1] if history else 0.0,
                      history, ordering))


def _update_rows_linear(cone, stencil, flat_vals, rows, w) -> float:
    """Exact node update for margins of the form <A, W>.

    Solving <A(t), W> = 0 with the axis-ghost coupling folded in; diagonal
    data terms use the crossing values, corner terms read the array.
    """
    dom = stencil.dom
    n = dom.n
    h2 = dom.h * dom.h
    up = flat_vals[stencil.axis_plus[rows]].copy()
    dn = flat_vals[stencil.axis_minus[rows]].copy()
    gp = stencil.ghost_plus[rows]
    gm = stencil.ghost_minus[rows]
    # data part of ghost sides and the t-coefficient per axis
    coef = np.full((rows.size, n), 2.0)
    if gp.any():
        up[gp] = (stencil.phi_plus[rows] / stencil.theta_plus[rows])[gp]
        coef[gp] -= (1.0 - 1.0 / stencil.theta_plus[rows][gp])
    if gm.any():
        dn[gm] = (stencil.phi_minus[rows] / stencil.theta_minus[rows])[gm]
        coef[gm] -= (1.0 - 1.0 / stencil.theta_minus[rows][gm])
    diag_w = np.diag(w)
    const = ((up + dn) * diag_w).sum(axis=1)
    denom = (coef * diag_w).sum(axis=1)
    # off-diagonal contributions are t-independent
    for idx, (i, j) in enumerate(stencil.pairs):
        wij = w[i, j]
        if wij == 0.0:
            continue
        cr = (flat_vals[stencil.corner_pp[rows, idx]]
              + flat_vals[stencil.corner_mm[rows, idx]]
              - flat_vals[stencil.corner_pm[rows, idx]]
              - flat_vals[stencil.corner_mp[rows, idx]]) / 4.0
        const += 2.0 * wij * cr
    t_new = const / denom
    f_idx = stencil.flat_interior[rows]
    worst = float(np.abs(t_new - flat_vals[f_idx]).max())
    flat_vals[f_idx] = t_new
    return worst


# ----------------------------------------------------------------------
# edge-quadratic envelope by linear programming
# ----------------------------------------------------------------------

class EnvelopeOrderingError(RuntimeError):
    """The envelope exceeded the sweep solution beyond tolerance."""


def _ball_crossing_points(dom: GridDomain) -> np.ndarray:
    """Sphere crossings of axis segments leaving the ball; these are the
    exact points where the solver imposes its data."""
    coords = dom.coords()
    inside = dom.interior
    pts = []
    c, r, h = dom.center, dom.radius, dom.h
    idx_in = np.argwhere(inside)
    for axis in range(dom.n):
        for sign in (1, -1):
            nb = idx_in.copy()
            nb[:, axis] += sign
            nb_inside = inside[tuple(nb.T)]
            leavers = idx_in[~nb_inside]
            for idx in leavers:
                x = coords[tuple(idx)]
                d = np.zeros(dom.n)
                d[axis] = sign * h
                a = float(d @ d)
                rel = x - c
                b = 2.0 * rel @ d
                cc = float(rel @ rel) - r * r
                disc = max(b * b - 4 * a * cc, 0.0)
                t = (-b + np.sqrt(disc)) / (2 * a)
                pts.append(x + np.clip(t, 0.0, 1.0) * d)
    return np.array(pts) if pts else np.zeros((0, dom.n))


def _envelope_constraint_points(dom: GridDomain, phi) -> tuple[np.ndarray, np.ndarray]:
    pts = dom.boundary_positions()
    if dom.kind == "ball":
        crossings = _ball_crossing_points(dom)
        if crossings.size:
            pts = np.vstack([pts, crossings])
    vals = np.asarray(phi(pts), dtype=float)
    # deduplicate (ball projections can collide)
    key = np.round(pts / (dom.h * 1e-6))
    _, keep = np.unique(key, axis=0, return_index=True)
    keep.sort()
    return pts[keep], vals[keep]


def edge_envelope(edge: SymSubspace, dom: GridDomain, phi, x, *,
                  boundary_samples=None, m_bound: float | None = None,
                  check_stability: bool = True) -> tuple[float, dict]:
    """Largest value at x of a quadratic with curvature in the edge that
    stays below phi on the boundary samples.

    Decision variables are the constant, the gradient, and coordinates of
    the curvature in the edge basis; all constraints are linear, solved to
    LP accuracy.  The box bound M on coefficients is a compactness proxy;
    the result must be insensitive to doubling it, else it is flagged.
    """
    n = dom.n
    x = np.asarray(x, dtype=float)
    if boundary_samples is None:
        pts, vals = _envelope_constraint_points(dom, phi)
    else:
        pts = np.asarray(boundary_samples, dtype=float)
        vals = np.asarray(phi(pts), dtype=float)
    if m_bound is None:
        m_bound = 1e3 * (1.0 + float(np.abs(vals).max()))

    k = edge.dim
    n_var = 1 + n + k

    def quad_cols(points):
        if k == 0:
            return np.zeros((points.shape[0], 0))
        return 0.5 * np.einsum("pi,kij,pj->pk", points, edge.basis, points)

    a_ub = np.hstack([np.ones((pts.shape[0], 1)), pts, quad_cols(pts)])
    b_ub = vals
    target = np.concatenate([[1.0], x, quad_cols(x[None, :])[0]])

    def solve(mb):
        res = linprog(-target, A_ub=a_ub, b_ub=b_ub,
                      bounds=[(-mb, mb)] * n_var, method="highs")
        if not res.success:
            raise RuntimeError(f"envelope LP failed: {res.message}")
        return float(-res.fun)

    val = solve(m_bound)
    info = {"m_bound": m_bound, "stable": True, "constraints": int(pts.shape[0])}
    if check_stability:
        val2 = solve(2.0 * m_bound)
        if abs(val2 - val) >= 1e-6 * (1.0 + abs(val)):
            info["stable"] = False
            info["value_at_2M"] = val2
    return val, info


def envelope_report(cone: ConeHandle, dom: GridDomain, phi, *,
                    sample_nodes: int = 50, seed: int = 0,
                    solver_kwargs: dict | None = None,
                    classical_gap_bound: bool = False,
                    ordering_slack: float = 0.0) -> dict:
    """Compare the sweep solution with the edge-quadratic envelope.

    The envelope can never exceed the solution (beyond numerical slack);
    that ordering is enforced.  For the convexity and trace cones the gap
    must close at grid resolution; for every other cone the gap is data.

    ordering_slack widens the hard ordering check: on curved boundaries
    the sweep solution carries signed discretization error while the
    envelope sees exact boundary values, and across creases of the data
    the mixed-derivative stencil is not monotone, so those runs are held
    to the scheme's own consistency order rather than solver tolerance.
    """
    solver_kwargs = dict(solver_kwargs or {})
    field_sol, info = perron_solve(cone, dom, phi, **solver_kwargs)
    rng = as_rng(seed)
    interior_idx = np.argwhere(dom.interior)
    count = min(sample_nodes, interior_idx.shape[0])
    pick = rng.choice(interior_idx.shape[0], size=count, replace=False)
    edge = cone.edge_of()
    pts, vals = _envelope_constraint_points(dom, phi)

    records = []
    worst_violation = -np.inf
    max_gap = -np.inf
    tol = 1e-7 * (1.0 + float(np.abs(vals).max()))
    for row in pick:
        idx = tuple(interior_idx[row])
        x = dom.origin + np.array(idx) * dom.h
        env, env_info = edge_envelope(edge, dom, phi, x,
                                      boundary_samples=pts,
                                      check_stability=False)
        h_val = float(field_sol.values[idx])
        gap = h_val - env
        worst_violation = max(worst_violation, -gap)
        max_gap = max(max_gap, gap)
        records.append({"node": list(map(int, idx)), "envelope": env,
                        "solution": h_val, "gap": gap})
    allowed = max(10 * tol, ordering_slack)
    report = {
        "cone": getattr(cone, "name", None) or "anonymous",
        "domain": dom.kind, "h": dom.h,
        "sampled_nodes": count,
        "max_gap": float(max_gap),
        "worst_ordering_violation": float(worst_violation),
        "ordering_ok": bool(worst_violation <= allowed),
        "ordering_allowance": allowed,
        "solver_converged": info.converged,
        "records": records,
    }
    if worst_violation > allowed:
        raise EnvelopeOrderingError(
            f"envelope exceeds solution by {worst_violation:.3e} "
            f"(allowed {allowed:.3e})")
    if classical_gap_bound:
        report["gap_bound"] = 10 * dom.h
        report["gap_ok"] = bool(max_gap <= 10 * dom.h)
    return report


# ----------------------------------------------------------------------
# grid file round trip
# ----------------------------------------------------------------------

def write_grid_csv(path, field_sol: GridField, provenance: dict | None = None):
    dom = field_sol.domain
    coords = dom.coords().reshape(-1, dom.n)
    vals = field_sol.values.ravel()
    interior = dom.interior.ravel()
    boundary = dom.boundary.ravel()
    with open(path, "w", encoding="utf-8") as fh:
        for key, value in (provenance or {}).items():
            fh.write(f"# {key} = {value}\n")
        cols = [f"x{i}" for i in range(dom.n)]
        fh.write(",".join(cols + ["value", "mask"]) + "\n")
        for row in range(coords.shape[0]):
            if not (interior[row] or boundary[row]):
                continue
            mask = "interior" if interior[row] else "boundary"
            pos = ",".join(repr(float(c)) for c in coords[row])
            fh.write(f"{pos},{float(vals[row])!r},{mask}\n")


def write_grid_ppm(path, field_sol: GridField):
    """Grayscale heatmap of a 2-d grid (portable graymap, plain text)."""
    dom = field_sol.domain
    if dom.n != 2:
        raise ValueError("heatmaps are only emitted for 2-d grids")
    vals = field_sol.values.copy()
    mask = dom.interior | dom.boundary
    finite = vals[mask]
    lo, hi = float(finite.min()), float(finite.max())
    span = hi - lo if hi > lo else 1.0
    img = np.zeros(dom.shape, dtype=int)
    img[mask] = np.clip(((vals[mask] - lo) / span * 255), 0, 255).astype(int)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"P2\n{dom.shape[1]} {dom.shape[0]}\n255\n")
        for row in img:
            fh.write(" ".join(str(v) for v in row) + "\n")
