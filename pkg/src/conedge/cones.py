"""Cone descriptions over Sym2(R^n) and their membership oracles.

Three kinds of handle:

  * EdgeCone(E): the sum of a basic subspace E and the positive cone; its
    membership margin is max over translates e in E of lambda_min(A - e),
    a concave maximization solved by smoothed first-order ascent.
  * HalfspaceCone(N): {A : <A, N> >= 0} for a unit PSD normal.
  * GeometricCone(family): {A : tr(A|_W) >= 0 for all planes W}, probed by
    pre-sampled frames plus local frame descent.

All margins agree in sign with exact membership and shift exactly by -s
(or -s tr N for half-spaces) under A -> A - s Id, which downstream solvers
rely on.  Handles are immutable; caches are write-once.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import structures as st
from .symspace import (
    SymSubspace,
    as_rng,
    complement,
    frob_norm,
    from_coords,
    orthonormalize,
    random_symmetric,
    residual_norm,
    subspace_coords,
    subspace_project,
    zero_subspace,
)

MEMBERSHIP_RTOL = 1e-7
BASIC_EDGE_TOL = 1e-8
RANK_SVD_RTOL = 1e-8
SUPPORT_ACCEPT = 1e-9
SUPPORT_DEADBAND = 1e-6


def default_tol(a: np.ndarray) -> float:
    return MEMBERSHIP_RTOL * (1.0 + frob_norm(a))


class Verdict(enum.Enum):
    INTERIOR = "interior"
    BOUNDARY = "boundary"
    OUTSIDE = "outside"


@dataclass(frozen=True)
class Membership:
    """Signed-margin membership answer with an optional witness.

    margin > tol: interior; |margin| <= tol: boundary; margin < -tol:
    outside.  The witness is an edge translate, a plane frame, or the
    half-space normal, depending on the cone kind.
    """

    verdict: Verdict
    margin: float
    tol: float
    witness: object = None
    stalled: bool = False

    @property
    def is_member(self) -> bool:
        return self.verdict is not Verdict.OUTSIDE


def _classify(margin: float, tol: float, witness=None, stalled=False) -> Membership:
    if margin > tol:
        v = Verdict.INTERIOR
    elif margin < -tol:
        v = Verdict.OUTSIDE
    else:
        v = Verdict.BOUNDARY
    return Membership(v, float(margin), float(tol), witness, stalled)


# ----------------------------------------------------------------------
# smoothed concave maximization of lambda_min
# ----------------------------------------------------------------------

def _lbfgs(fun_grad, x0: np.ndarray, *, maxiter: int = 80, memory: int = 8,
           gtol: float = 1e-13) -> np.ndarray:
    """Minimize a smooth function with a compact two-loop L-BFGS.

    Armijo backtracking line search; curvature pairs with tiny s.y are
    skipped.  Small enough to keep per-call overhead below the eigenvalue
    work that dominates each evaluation.
    """
    x = np.asarray(x0, dtype=float).copy()
    f, g = fun_grad(x)
    s_list: list[np.ndarray] = []
    y_list: list[np.ndarray] = []
    rho: list[float] = []
    for _ in range(maxiter):
        gn = np.linalg.norm(g)
        if gn < gtol:
            break
        # two-loop recursion
        q = g.copy()
        alphas = []
        for s, y, r in zip(reversed(s_list), reversed(y_list), reversed(rho)):
            a = r * (s @ q)
            alphas.append(a)
            q -= a * y
        if y_list:
            ys = y_list[-1] @ y_list[-1]
            gamma = (s_list[-1] @ y_list[-1]) / ys if ys > 0 else 1.0
            q *= gamma
        for (s, y, r), a in zip(zip(s_list, y_list, rho), reversed(alphas)):
            b = r * (y @ q)
            q += (a - b) * s
        d = -q
        slope = g @ d
        if slope >= 0:  # fall back to steepest descent
            d = -g
            slope = -(gn * gn)
        step = 1.0
        accepted = False
        for _ in range(30):
            x_new = x + step * d
            f_new, g_new = fun_grad(x_new)
            if f_new <= f + 1e-4 * step * slope:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            break
        s_vec = x_new - x
        y_vec = g_new - g
        sy = s_vec @ y_vec
        if sy > 1e-14 * max(1.0, np.linalg.norm(s_vec) * np.linalg.norm(y_vec)):
            s_list.append(s_vec)
            y_list.append(y_vec)
            rho.append(1.0 / sy)
            if len(s_list) > memory:
                s_list.pop(0)
                y_list.pop(0)
                rho.pop(0)
        if abs(f - f_new) < 1e-17 * (1.0 + abs(f)):
            x, f, g = x_new, f_new, g_new
            break
        x, f, g = x_new, f_new, g_new
    return x


def _softmin_eig(m: np.ndarray, mu: float):
    """Smoothed minimum eigenvalue and its gradient matrix (Gibbs weights)."""
    lam, vec = np.linalg.eigh(m)
    z = -(lam - lam[0]) / mu
    w = np.exp(z)
    total = w.sum()
    f = lam[0] - mu * np.log(total)
    w /= total
    grad = (vec * w) @ vec.T
    return f, grad


def edge_translate_margin(
    a: np.ndarray,
    edge: SymSubspace,
    *,
    warm_coords: np.ndarray | None = None,
    extra_starts: int = 3,
    max_stage_iter: int = 80,
    mu_ladder=(1e-2, 1e-4, 1e-6, 1e-8),
    seed: int = 0,
    warm_only: bool = False,
):
    """Maximize lambda_min(a - e) over e in the edge subspace.

    Concave in e, so the multi-start is a safeguard rather than a search.
    Starting points: the projection of `a` onto the edge, zero, a supplied
    warm start, and seeded Gaussians.  Each start runs a ladder of
    smoothing temperatures; the reported margin is the exact
    lambda_min(a - e*) at the best translate found (a certified lower
    bound of the maximum).

    Returns (margin, translate, coords, stalled).
    """
    if edge.dim == 0:
        lam0 = float(np.linalg.eigvalsh(a)[0])
        return lam0, np.zeros_like(a), np.zeros(0), False
    basis = edge.basis
    scale = 1.0 + frob_norm(a)

    def objective(c, mu):
        e = np.einsum("k,kij->ij", c, basis)
        f, grad_mat = _softmin_eig(a - e, mu)
        g = np.einsum("kij,ij->k", basis, grad_mat)
        return -f, g

    if warm_only and warm_coords is not None:
        starts = [np.asarray(warm_coords, dtype=float)]
    else:
        starts = [subspace_coords(edge, a), np.zeros(edge.dim)]
        if warm_coords is not None:
            starts.insert(0, np.asarray(warm_coords, dtype=float))
        rng = as_rng(seed)
        for _ in range(extra_starts):
            starts.append(rng.normal(size=edge.dim) * scale)

    best_val = -np.inf
    best_c = starts[0]
    stalled = False
    for c0 in starts:
        c = np.asarray(c0, dtype=float)
        for mu in mu_ladder:
            mu_s = mu * scale
            c = _lbfgs(lambda x: objective(x, mu_s), c, maxiter=max_stage_iter)
        e = np.einsum("k,kij->ij", c, basis)
        val = float(np.linalg.eigvalsh(a - e)[0])
        if val > best_val:
            best_val, best_c = val, c
        if not np.all(np.isfinite(c)):
            stalled = True
    translate = np.einsum("k,kij->ij", best_c, basis)
    return best_val, translate, best_c, stalled


def _slice_max_lambda_min(space: SymSubspace, *, starts: int = 20, seed: int = 0):
    """Maximize lambda_min(M) over {M in space : tr M = n}.

    The slice is affine and lambda_min concave, so this is a reliable
    concave program; it decides whether the subspace meets the open
    positive cone.  Returns (value, argmax) or (None, None) when the trace
    functional vanishes on the subspace (no PSD ray possible).
    """
    n = space.ambient_n
    if space.dim == 0:
        return None, None
    trace_coords = subspace_coords(space, np.eye(n))
    tnorm = float(np.linalg.norm(trace_coords))
    if tnorm < 1e-12:
        return None, None
    # affine parametrization of the trace slice
    c_base = trace_coords * (n / tnorm**2)
    unit = trace_coords / tnorm
    tangent = np.eye(space.dim) - np.outer(unit, unit)

    def objective(y, mu):
        c = c_base + tangent @ y
        m = from_coords(space, c)
        f, grad_mat = _softmin_eig(m, mu)
        g = np.einsum("kij,ij->k", space.basis, grad_mat)
        return -f, -(tangent @ g)

    rng = as_rng(seed)
    best_val, best_c = -np.inf, None
    y_starts = [np.zeros(space.dim)]
    for _ in range(starts - 1):
        y_starts.append(rng.normal(size=space.dim))
    for y0 in y_starts:
        y = y0
        for mu in (1e-1, 1e-3, 1e-5, 1e-8):
            mu_s = mu * n
            y = _lbfgs(lambda x: objective(x, mu_s), y, maxiter=80)
        c = c_base + tangent @ y
        val = float(np.linalg.eigvalsh(from_coords(space, c))[0])
        if val > best_val:
            best_val, best_c = val, c
    return best_val, from_coords(space, best_c)


@dataclass(frozen=True)
class BasicEdgeReport:
    basic: bool
    indeterminate: bool
    edge_side_max: float | None   # max lambda_min over the trace slice of E
    span_side_max: float | None   # same over the trace slice of S
    witness: np.ndarray | None    # PD element of S when basic, PSD of E when not


def is_basic_edge(edge: SymSubspace, *, tol: float = BASIC_EDGE_TOL,
                  starts: int = 20, seed: int = 0) -> BasicEdgeReport:
    """Decide whether a subspace meets the positive cone only at zero.

    Primal side maximizes lambda_min over trace-normalized elements of the
    subspace (a PSD element must have positive trace); the dual side does
    the same over the orthogonal complement, which by the completeness
    dichotomy must contain a positive-definite element exactly when the
    primal side fails to reach the cone.  Both sides are computed and the
    dichotomy asserted.
    """
    n = edge.ambient_n
    e_val, e_arg = _slice_max_lambda_min(edge, starts=starts, seed=seed)
    span = complement(edge)
    s_val, s_arg = _slice_max_lambda_min(span, starts=starts, seed=seed + 1)

    e_hits = e_val is not None and e_val >= -tol   # PSD direction inside edge
    s_hits = s_val is not None and s_val > tol     # PD element inside span

    if e_hits and not s_hits:
        return BasicEdgeReport(False, False, e_val, s_val, e_arg)
    if s_hits and not e_hits:
        return BasicEdgeReport(True, False, e_val, s_val, s_arg)
    # both or neither: inside the tolerance band the dichotomy is undecided
    return BasicEdgeReport(s_hits, True, e_val, s_val, s_arg if s_hits else e_arg)


# ----------------------------------------------------------------------
# cone handles
# ----------------------------------------------------------------------

class ConeHandle:
    """Common surface of the three cone variants."""

    n: int

    # --- margins -------------------------------------------------------
    def margin(self, a: np.ndarray) -> float:
        raise NotImplementedError

    def margin_batch(self, a_stack: np.ndarray) -> np.ndarray:
        return np.array([self.margin(a) for a in a_stack])

    @property
    def id_shift_slope(self) -> float:
        """Exact decrease of the margin per unit of A -> A - Id."""
        return 1.0

    # --- membership ----------------------------------------------------
    def contains(self, a: np.ndarray, tol: float | None = None) -> Membership:
        if a.shape[0] != self.n:
            raise ValueError(f"matrix is {a.shape[0]}x, cone ambient {self.n}")
        if tol is None:
            tol = default_tol(a)
        m, witness, stalled = self._margin_with_witness(a)
        return _classify(m, tol, witness, stalled)

    def _margin_with_witness(self, a):
        return self.margin(a), None, False

    def dual_contains(self, a: np.ndarray, tol: float | None = None) -> Membership:
        """Membership in the dual cone: A is dual-inside iff -A is not
        interior; the dual margin is minus the margin of -A."""
        if tol is None:
            tol = default_tol(a)
        m, witness, stalled = self._margin_with_witness(-a)
        return _classify(-m, tol, witness, stalled)

    # --- linear structure ----------------------------------------------
    def edge_of(self) -> SymSubspace:
        raise NotImplementedError

    def span_of(self) -> SymSubspace:
        if getattr(self, "_span", None) is None:
            self._span = complement(self.edge_of())
        return self._span

    def reduced_hessian(self, a: np.ndarray) -> np.ndarray:
        return subspace_project(self.span_of(), a)


class EdgeCone(ConeHandle):
    """Minimal cone attached to a basic edge subspace: E + positive cone."""

    def __init__(self, edge: SymSubspace, *, check: bool = True,
                 fast_margin: Callable | None = None,
                 fast_margin_batch: Callable | None = None,
                 linear_margin_weight: np.ndarray | None = None,
                 name: str | None = None, seed: int = 0):
        edge.validate()
        if check:
            rep = is_basic_edge(edge, seed=seed)
            if not rep.basic:
                raise ValueError(
                    "edge subspace meets the positive cone; "
                    f"witness eigenvalue floor {rep.edge_side_max}"
                )
        self.n = edge.ambient_n
        self.edge = edge
        self.name = name
        self._fast_margin = fast_margin
        self._fast_margin_batch = fast_margin_batch
        # weight W with margin(A) = <A, W>, when the margin happens linear
        self.linear_margin_weight = linear_margin_weight
        self._span = None

    def edge_of(self) -> SymSubspace:
        return self.edge

    def margin(self, a: np.ndarray) -> float:
        if self._fast_margin is not None:
            return float(self._fast_margin(a))
        m, _, _, _ = edge_translate_margin(a, self.edge)
        return m

    def margin_batch(self, a_stack: np.ndarray) -> np.ndarray:
        if self._fast_margin_batch is not None:
            return np.asarray(self._fast_margin_batch(a_stack), dtype=float)
        return super().margin_batch(a_stack)

    def optimizer_margin(self, a: np.ndarray, warm_coords=None, quick: bool = False):
        """Margin by the translate optimizer regardless of any fast form.

        With a warm start the smoothing ladder shortens to the final
        temperatures; accuracy stays near 1e-12 on unit-scale inputs.
        """
        if warm_coords is not None:
            return edge_translate_margin(a, self.edge, warm_coords=warm_coords,
                                         extra_starts=0, mu_ladder=(1e-8,),
                                         max_stage_iter=18, warm_only=True)
        if quick:
            return edge_translate_margin(a, self.edge, extra_starts=0,
                                         mu_ladder=(1e-3, 1e-6, 1e-8),
                                         max_stage_iter=50)
        return edge_translate_margin(a, self.edge)

    def decompose(self, a: np.ndarray, quick: bool = False):
        """Split a = e + p with e in the edge; p is PD iff a is interior."""
        m, e, coords, stalled = self.optimizer_margin(a, quick=quick)
        return m, e, a - e, stalled

    def _margin_with_witness(self, a):
        if self._fast_margin is not None:
            return float(self._fast_margin(a)), None, False
        m, e, _, stalled = edge_translate_margin(a, self.edge)
        return m, e, stalled


class HalfspaceCone(ConeHandle):
    """{A : <A, N> >= 0} for a unit-norm PSD normal N."""

    def __init__(self, normal: np.ndarray, *, name: str | None = None):
        normal = np.asarray(normal, dtype=float)
        nrm = frob_norm(normal)
        if nrm < 1e-14:
            raise ValueError("normal must be nonzero")
        normal = normal / nrm
        lam = np.linalg.eigvalsh(normal)
        if lam[0] < -1e-10:
            raise ValueError("half-space normal must be positive semidefinite")
        self.n = normal.shape[0]
        self.normal = normal
        self.name = name
        self._edge = None
        self._span = None

    def margin(self, a: np.ndarray) -> float:
        return float(np.einsum("ij,ji->", a, self.normal))

    def margin_batch(self, a_stack: np.ndarray) -> np.ndarray:
        return np.einsum("mij,ji->m", a_stack, self.normal)

    @property
    def id_shift_slope(self) -> float:
        return float(np.trace(self.normal))

    def edge_of(self) -> SymSubspace:
        if self._edge is None:
            span = orthonormalize([self.normal], ambient_n=self.n)
            self._edge = complement(span)
        return self._edge

    def _margin_with_witness(self, a):
        return self.margin(a), self.normal, False


class GeometricCone(ConeHandle):
    """{A : tr(A|_W) >= 0 over a plane family}, probed by sampling.

    The frame cache is drawn once per handle (seeded); membership margins
    take the cached minimum and refine the best few frames by projected
    descent with backtracking.
    """

    def __init__(self, family: st.PlaneFamily, *, budget: int = 2000,
                 descents: int = 50, descent_steps: int = 60,
                 seed: int = 0, name: str | None = None):
        if budget < 1:
            raise ValueError("sample budget must be positive")
        self.n = family.ambient
        self.family = family
        self.budget = budget
        self.descents = descents
        self.descent_steps = descent_steps
        self.seed = seed
        self.name = name
        self._frames = None
        self._projectors = None
        self._edge = None
        self._span = None

    # frame cache -------------------------------------------------------
    def frames(self) -> np.ndarray:
        if self._frames is None:
            rng = as_rng(self.seed)
            self._frames = np.array(
                [st.sample_plane(self.family, rng) for _ in range(self.budget)]
            )
        return self._frames

    def projectors(self) -> np.ndarray:
        if self._projectors is None:
            f = self.frames()
            self._projectors = np.einsum("fki,fkj->fij", f, f)
        return self._projectors

    # margins -------------------------------------------------------------
    def margin(self, a: np.ndarray) -> float:
        m, _, _ = self._margin_frame(a)
        return m

    def margin_batch(self, a_stack: np.ndarray) -> np.ndarray:
        k = self.family.plane_dim
        vals = np.einsum("fij,mji->mf", self.projectors(), a_stack) / k
        return vals.min(axis=1)

    def _margin_frame(self, a: np.ndarray):
        k = self.family.plane_dim
        vals = np.einsum("fij,ji->f", self.projectors(), a) / k
        order = np.argsort(vals)
        best_val = float(vals[order[0]])
        best_frame = self.frames()[order[0]]
        no_gain = 0
        for idx in order[: max(1, self.descents)]:
            val, fr = _descend_frame(
                self.family, self.frames()[idx], a, steps=self.descent_steps
            )
            if val < best_val - 1e-12:
                best_val, best_frame = val, fr
                no_gain = 0
            else:
                no_gain += 1
                if no_gain >= 5:  # plateau: further polish runs add nothing
                    break
        return best_val, best_frame, False

    def _margin_with_witness(self, a):
        m, fr, stalled = self._margin_frame(a)
        return m, fr, stalled

    # linear structure ----------------------------------------------------
    def edge_of(self) -> SymSubspace:
        """Orthogonal complement of the span of sampled plane projectors.

        The rank must be stable when the sampling budget doubles; small
        singular values (below RANK_SVD_RTOL of the largest) are zeros.
        """
        if self._edge is None:
            span1 = self._span_from_samples(self.budget, self.seed)
            span2 = self._span_from_samples(2 * self.budget, self.seed + 1)
            if span1.dim != span2.dim:
                raise ValueError(
                    f"unstable span rank under budget doubling "
                    f"({span1.dim} vs {span2.dim}); raise the budget"
                )
            self._span = span2
            self._edge = complement(span2)
        return self._edge

    def _span_from_samples(self, count: int, seed: int) -> SymSubspace:
        rng = as_rng(seed)
        mats = []
        for _ in range(count):
            f = st.sample_plane(self.family, rng)
            mats.append(f.T @ f)
        flat = np.array([m.ravel() for m in mats])
        u, s, vt = np.linalg.svd(flat, full_matrices=False)
        rank = int(np.sum(s > RANK_SVD_RTOL * s[0]))
        gens = [vt[i].reshape(self.n, self.n) for i in range(rank)]
        gens = [0.5 * (g + g.T) for g in gens]
        return orthonormalize(gens, ambient_n=self.n)


def _algebra_projector(family: st.PlaneFamily):
    """Projection of a skew matrix onto the Lie algebra of the group that
    acts transitively on the family (geodesic moves stay inside it)."""
    tag = family.tag
    n = family.ambient
    if tag == "grass":
        return lambda x: x
    if tag in ("cp", "lag"):
        i_mat = st.complex_structure(n)
        return lambda x: 0.5 * (x - i_mat @ x @ i_mat)
    trip = st.quaternion_triple(n // 4)
    structs = {"i": trip.i, "j": trip.j, "k": trip.k}
    if tag in ("hlag", "gl_ijk"):
        def proj(x):
            out = x.copy()
            for m in structs.values():
                out = out - m @ x @ m
            return 0.25 * out
        return proj
    if tag == "hp":
        def proj(x):
            out = x.copy()
            for m in structs.values():
                out = out - m @ x @ m
            out = 0.25 * out
            for m in structs.values():
                out = out + (np.einsum("ij,ji->", x, m) / np.einsum("ij,ji->", m, m)) * m
            return out
        return proj
    struct = {"ilag": trip.i, "jlag": trip.j, "klag": trip.k,
              "cp_j": trip.j, "cp_k": trip.k}[tag]
    return lambda x: 0.5 * (x - struct @ x @ struct)


def _skew_exp(omega: np.ndarray) -> np.ndarray:
    """Orthogonal exponential of a skew matrix via the Hermitian eigensolver."""
    lam, vec = np.linalg.eigh(1j * omega)
    phase = np.exp(-1j * lam)
    return np.real((vec * phase) @ vec.conj().T)


def _descend_frame(family: st.PlaneFamily, frame: np.ndarray, a: np.ndarray,
                   steps: int = 60):
    """Geodesic descent of tr(A|_W)/k along the family's transitive group.

    The derivative of <A, g P g'> along exp(t Omega) is <Omega, [P, A]>, so
    the Riemannian gradient is the algebra projection of the commutator;
    Armijo backtracking keeps every accepted move a strict decrease.
    """
    k = family.plane_dim
    proj = _algebra_projector(family)
    fr = np.asarray(frame, dtype=float)
    p = fr.T @ fr
    val = float(np.einsum("ij,ji->", a, p)) / k
    scale = 1.0 + float(np.abs(a).max())
    eta = 0.5 / scale
    for _ in range(steps):
        omega = proj(a @ p - p @ a)
        omega = 0.5 * (omega - omega.T)
        gn = frob_norm(omega)
        if gn < 1e-10 * scale:
            break
        slope = -gn * gn / k
        moved = False
        for _ in range(16):
            g = _skew_exp(-eta * omega)
            cand_fr = fr @ g.T
            cand_p = cand_fr.T @ cand_fr
            cand_val = float(np.einsum("ij,ji->", a, cand_p)) / k
            if cand_val <= val + 1e-4 * eta * slope:
                fr, p, val = cand_fr, cand_p, cand_val
                eta *= 1.5
                moved = True
                break
            eta *= 0.5
        if not moved:
            break
    return val, fr


# ----------------------------------------------------------------------
# module-level operation mirrors
# ----------------------------------------------------------------------

def contains(cone: ConeHandle, a: np.ndarray, tol: float | None = None) -> Membership:
    return cone.contains(a, tol)


def dual_contains(cone: ConeHandle, a: np.ndarray, tol: float | None = None) -> Membership:
    return cone.dual_contains(a, tol)


def edge_of(cone: ConeHandle) -> SymSubspace:
    return cone.edge_of()


def span_of(cone: ConeHandle) -> SymSubspace:
    return cone.span_of()


def reduced_hessian(cone: ConeHandle, a: np.ndarray) -> np.ndarray:
    return cone.reduced_hessian(a)


def minimal_cone(edge: SymSubspace, *, name: str | None = None,
                 fast_margin=None, fast_margin_batch=None, seed: int = 0) -> EdgeCone:
    """Build the smallest cone with the given edge; refuses non-basic input."""
    rep = is_basic_edge(edge, seed=seed)
    if not rep.basic:
        raise ValueError(
            f"edge is not basic (PSD witness with eigenvalue floor "
            f"{rep.edge_side_max:.3e})"
        )
    return EdgeCone(edge, check=False, name=name,
                    fast_margin=fast_margin, fast_margin_batch=fast_margin_batch)


# ----------------------------------------------------------------------
# support of a cone
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class SupportReport:
    support: np.ndarray            # (k, n) rows spanning W
    killed: np.ndarray             # (n-k, n) rows spanning W-perp
    indeterminate: list
    zero_extension_checked: int
    zero_extension_failures: int


def _max_projected_projector(edge: SymSubspace, q_rows: np.ndarray,
                             starts: int = 12, seed: int = 0):
    """Maximize |pi_E(e e^T)|^2 over unit e in the row span of q_rows."""
    rng = as_rng(seed)
    k = q_rows.shape[0]
    best_val, best_e = -np.inf, None
    inits = [q_rows[i] for i in range(k)]
    for _ in range(max(0, starts - k)):
        c = rng.normal(size=k)
        inits.append(c @ q_rows)
    for e0 in inits:
        e = e0 / np.linalg.norm(e0)
        val = None
        step = 0.5
        for _ in range(200):
            pe = np.outer(e, e)
            proj = subspace_project(edge, pe)
            val = float(np.einsum("ij,ij->", proj, proj))
            grad = 4.0 * (proj @ e)
            # keep the ascent inside the working subspace, tangent to the sphere
            grad = (grad @ q_rows.T) @ q_rows
            grad -= (grad @ e) * e
            gn = np.linalg.norm(grad)
            if gn < 1e-12:
                break
            improved = False
            while step > 1e-12:
                cand = e + step * grad
                cand /= np.linalg.norm(cand)
                pc = np.outer(cand, cand)
                pv = subspace_project(edge, pc)
                cand_val = float(np.einsum("ij,ij->", pv, pv))
                if cand_val > val + 1e-16:
                    e, val = cand, cand_val
                    step *= 1.5
                    improved = True
                    break
                step *= 0.5
            if not improved:
                break
        if val is not None and val > best_val:
            best_val, best_e = val, e
    return best_val, best_e


def _refine_killed_direction(edge: SymSubspace, e: np.ndarray, iters: int = 10) -> np.ndarray:
    """Power-iteration polish: a direction with P_e inside the edge is a
    fixed point of e -> top eigenvector of pi_E(P_e)."""
    for _ in range(iters):
        p = subspace_project(edge, np.outer(e, e))
        lam, vec = np.linalg.eigh(0.5 * (p + p.T))
        e_new = vec[:, -1]
        if e_new @ e < 0:
            e_new = -e_new
        if np.linalg.norm(e_new - e) < 1e-15:
            return e_new
        e = e_new
    return e


def support_of(cone: ConeHandle, *, seed: int = 0, check_samples: int = 100) -> SupportReport:
    """Directions whose rank-one projectors sit inside the edge are inert;
    the support is their orthogonal complement.

    Iteratively maximizes |pi_E(P_e)|^2 on the unit sphere (multi-start
    ascent), accepts minimizers of the complementary residual below
    SUPPORT_ACCEPT, deflates, and repeats.  Residuals landing in the dead
    band [SUPPORT_ACCEPT, SUPPORT_DEADBAND] are reported as indeterminate.
    The zero-extension consistency of the restricted cone is spot-checked.
    """
    n = cone.n
    edge = cone.edge_of()
    q_rows = np.eye(n)
    killed = []
    indeterminate = []
    while q_rows.shape[0] > 0:
        val, e = _max_projected_projector(edge, q_rows, seed=seed)
        if e is None:
            break
        r = 1.0 - val  # |P_e|^2 = 1 for unit e
        if r < SUPPORT_DEADBAND:
            e_ref = _refine_killed_direction(edge, e)
            p_ref = np.outer(e_ref, e_ref)
            r_ref = 1.0 - float(np.einsum("ij,ij->", subspace_project(edge, p_ref),
                                          subspace_project(edge, p_ref)))
            if r_ref < r:
                e, r = e_ref, r_ref
        if r < SUPPORT_ACCEPT:
            killed.append(e)
            # deflate: restrict the search to the orthogonal complement
            new_rows = []
            for row in q_rows:
                w = row - (row @ e) * e
                for prev in new_rows:
                    w -= (w @ prev) * prev
                nw = np.linalg.norm(w)
                if nw > 1e-9:
                    new_rows.append(w / nw)
            q_rows = np.array(new_rows) if new_rows else np.zeros((0, n))
            continue
        if r < SUPPORT_DEADBAND:
            indeterminate.append((float(r), e))
        break

    killed_arr = np.array(killed) if killed else np.zeros((0, n))
    # support = orthogonal complement of the killed directions
    rows = []
    for cand in np.eye(n):
        w = cand.copy()
        for kr in killed_arr:
            w -= (w @ kr) * kr
        for prev in rows:
            w -= (w @ prev) * prev
        nw = np.linalg.norm(w)
        if nw > 1e-9:
            rows.append(w / nw)
    support = np.array(rows) if rows else np.zeros((0, n))

    checked = failures = 0
    if 0 < support.shape[0] < n:
        checked, failures = _zero_extension_check(
            cone, support, samples=check_samples, seed=seed + 1
        )
    return SupportReport(support, killed_arr, indeterminate, checked, failures)


def _zero_extension_check(cone: ConeHandle, support: np.ndarray, samples: int, seed: int):
    """Membership of B on the support must match membership of its
    zero-extension to the full space."""
    k = support.shape[0]
    n = cone.n
    rng = as_rng(seed)
    edge = cone.edge_of()
    # restricted edge: compress the edge basis onto the support coordinates;
    # support directions carry only r^(1/4) accuracy, so residues below the
    # corresponding scale are artifacts of the compression, not structure
    comp = orthonormalize(
        [support @ b @ support.T for b in edge.basis], ambient_n=k,
        drop_rtol=10.0 * SUPPORT_ACCEPT ** 0.25,
    ) if edge.dim else zero_subspace(k)
    failures = 0
    checked = 0
    rep = is_basic_edge(comp, seed=seed)
    if not rep.basic:
        return 0, 0  # restricted cone is not minimal-testable this way
    small = EdgeCone(comp, check=False)
    for _ in range(samples):
        b = random_symmetric(k, rng)
        inside_small = small.contains(b)
        big = support.T @ b @ support
        inside_big = cone.contains(big)
        checked += 1
        if inside_small.verdict != inside_big.verdict:
            if Verdict.BOUNDARY in (inside_small.verdict, inside_big.verdict):
                continue  # dead-band disagreement is not a failure
            failures += 1
    return checked, failures


# ----------------------------------------------------------------------
# sampling helpers
# ----------------------------------------------------------------------

def sample_member(cone: ConeHandle, rng, scale: float = 1.0) -> np.ndarray:
    """Random element of the cone (edge translate plus a PSD part)."""
    rng = as_rng(rng)
    n = cone.n
    g = rng.normal(size=(n, n)) * scale
    psd = g @ g.T / np.sqrt(n)
    edge = cone.edge_of()
    if edge.dim == 0:
        return psd
    e = from_coords(edge, rng.normal(size=edge.dim) * scale)
    return e + psd


def sample_polar_element(cone: ConeHandle, rng, scale: float = 1.0,
                         boundary: bool = False) -> np.ndarray:
    """Random element of span cap positive cone (the polar of a minimal cone).

    Works whenever the identity has a component in the span: a random span
    element is shifted along pi_S(Id) until PSD.
    """
    rng = as_rng(rng)
    span = cone.span_of()
    n = cone.n
    pid = subspace_project(span, np.eye(n))
    if frob_norm(pid) < 1e-12:
        raise ValueError("span is trace-free; no PSD elements to sample")
    z = from_coords(span, rng.normal(size=span.dim) * scale)
    lam = np.linalg.eigvalsh(z)
    pid_min = np.linalg.eigvalsh(pid)[0]
    if pid_min <= 1e-12:
        # shift direction is not PD by itself; rescale via margin search
        t = 0.0
        step = 1.0 + abs(lam[0])
        for _ in range(200):
            if np.linalg.eigvalsh(z + t * pid)[0] >= 0:
                break
            t += step
        else:
            raise ValueError("could not reach the positive cone along pi_S(Id)")
    else:
        t = max(0.0, -lam[0] / pid_min)
    bump = 0.0 if boundary else float(rng.uniform(0.05, 1.0)) * scale
    return z + (t + bump) * pid


# ----------------------------------------------------------------------
# sampled structural checks
# ----------------------------------------------------------------------

def polar_membership(cone: ConeHandle, a: np.ndarray, budget: int, seed: int,
                     tol: float | None = None):
    """Bipolar sampling test: min <A, B> over sampled cone members.

    The minimum over a doubled budget must agree in sign, else the result
    is flagged unstable.
    """
    if tol is None:
        tol = default_tol(a)
    rng = as_rng(seed)

    def min_pairing(count):
        worst = np.inf
        for _ in range(count):
            b = sample_member(cone, rng)
            b = b / (1.0 + frob_norm(b))
            worst = min(worst, float(np.einsum("ij,ji->", a, b)))
        return worst

    m1 = min_pairing(budget)
    m2 = min(m1, min_pairing(budget))
    stable = (m1 >= -tol) == (m2 >= -tol)
    return m2, stable


def check_minimality(cone: ConeHandle, budget: int = 200, seed: int = 0,
                     tol_scale: float = 10.0) -> dict:
    """Sampled verification of the minimal-cone identities.

    (i)   membership is decided by the reduced hessian: A and
          pi_S(A) + (random edge element) get the same verdict;
    (ii)  interior points split as edge translate + PD part, found by the
          translate optimizer, and conversely;
    (iii) polar = span cap positive cone, both directions sampled;
    (iv)  relative-interior polar elements are positive definite.
    """
    rng = as_rng(seed)
    n = cone.n
    edge = cone.edge_of()
    span = cone.span_of()
    report = {"cone": getattr(cone, "name", None) or "anonymous", "n": n,
              "budget": budget, "checks": {}, "passed": True}

    def log(key, failures, total, extra=None):
        entry = {"failures": failures, "total": total}
        if extra:
            entry.update(extra)
        report["checks"][key] = entry
        if failures:
            report["passed"] = False

    # (i) reduced-hessian consistency
    fails = 0
    for _ in range(budget):
        a = random_symmetric(n, rng, scale=1.0)
        tol = default_tol(a) * tol_scale
        v1 = cone.contains(a, tol)
        shift = from_coords(edge, rng.normal(size=edge.dim)) if edge.dim else 0.0
        v2 = cone.contains(subspace_project(span, a) + shift, tol)
        if v1.verdict != v2.verdict and Verdict.BOUNDARY not in (v1.verdict, v2.verdict):
            fails += 1
    log("reduced_hessian", fails, budget)

    # (ii) interior decomposition, both directions
    fails = 0
    opt = cone if isinstance(cone, EdgeCone) else EdgeCone(cone.edge_of(), check=False)
    for t in range(budget):
        if t % 2 == 0:
            a = sample_member(cone, rng) + 0.05 * np.eye(n)
        else:
            a = random_symmetric(n, rng)
        tol = default_tol(a) * tol_scale
        margin, e, p, stalled = opt.decompose(a, quick=True)
        verdict = cone.contains(a, tol).verdict
        if verdict is Verdict.INTERIOR and np.linalg.eigvalsh(p)[0] <= -tol:
            fails += 1
        if np.linalg.eigvalsh(p)[0] > tol and verdict is Verdict.OUTSIDE:
            fails += 1
    log("interior_decomposition", fails, budget)

    # (iii) polar identities
    fails = 0
    half = max(1, budget // 2)
    for _ in range(half):
        try:
            z = sample_polar_element(cone, rng)
        except ValueError:
            break
        tol = default_tol(z) * tol_scale
        worst, stable = polar_membership(cone, z, budget=64, seed=rng.integers(2**31))
        if worst < -tol:
            fails += 1
    for _ in range(half):
        a = random_symmetric(n, rng)
        in_span = residual_norm(span, a) < 1e-9
        psd = np.linalg.eigvalsh(a)[0] >= -1e-12
        if in_span and psd:
            continue  # only test points outside span cap PSD
        tol = default_tol(a) * tol_scale
        # a refuting member: the edge component of A, or a negative eigendirection
        pe = subspace_project(edge, a) if edge.dim else np.zeros_like(a)
        found = False
        if frob_norm(pe) > tol:
            found = min(np.einsum("ij,ji->", a, pe), np.einsum("ij,ji->", a, -pe)) < -tol
        if not found:
            lam, vec = np.linalg.eigh(a)
            if lam[0] < -tol:
                v = vec[:, 0]
                found = np.einsum("i,ij,j->", v, a, v) < -tol
        if not found:
            worst, _ = polar_membership(cone, a, budget=128, seed=rng.integers(2**31))
            found = worst < -tol
        if not found:
            fails += 1
    log("polar_identity", fails, 2 * half)

    # (iv) relative-interior polar points are PD
    fails = 0
    total = 0
    for _ in range(half):
        try:
            z = sample_polar_element(cone, rng)
        except ValueError:
            break
        total += 1
        if np.linalg.eigvalsh(z)[0] <= 0:
            fails += 1
    log("polar_interior_pd", fails, total)
    return report


def self_duality_check(cone: ConeHandle, budget: int = 200, seed: int = 0) -> dict:
    """Is the projection of the positive cone onto the span equal to the
    polar?  Confirmed by sampling; refuted by a projected rank-one
    projector that fails to be PSD.
    """
    rng = as_rng(seed)
    n = cone.n
    span = cone.span_of()
    worst = np.inf
    witness = None
    for _ in range(budget):
        e = rng.normal(size=n)
        e /= np.linalg.norm(e)
        z = subspace_project(span, np.outer(e, e))
        lam = float(np.linalg.eigvalsh(z)[0])
        if lam < worst:
            worst, witness = lam, e
    self_dual = worst >= -1e-9
    return {
        "cone": getattr(cone, "name", None) or "anonymous",
        "self_dual": bool(self_dual),
        "worst_projected_eigenvalue": worst,
        "witness_direction": None if self_dual else witness.tolist(),
    }


def check_dual_inclusion(cone: ConeHandle, budget: int = 1000, seed: int = 0,
                         tol_scale: float = 10.0) -> dict:
    """Sampled members of a minimal cone must lie in its dual cone."""
    rng = as_rng(seed)
    fails = 0
    for _ in range(budget):
        a = sample_member(cone, rng)
        tol = default_tol(a) * tol_scale
        if cone.dual_contains(a, tol).verdict is Verdict.OUTSIDE:
            fails += 1
    return {"cone": getattr(cone, "name", None) or "anonymous",
            "budget": budget, "failures": fails, "passed": fails == 0}


def cross_validate_oracles(primary: ConeHandle, reference, budget: int = 1000,
                           seed: int = 0, margin_floor: float = 1e-5,
                           inclusion_only: bool = False) -> dict:
    """Compare two membership oracles on random matrices.

    `reference` is a cone handle or a margin callable.  Matrices whose
    margin under either oracle falls below `margin_floor` in magnitude are
    dead-band cases and are skipped.  With `inclusion_only`, membership in
    the primary must imply membership in the reference, and reverse
    counterexamples are only counted, never judged.
    """
    rng = as_rng(seed)
    n = primary.n
    ref_margin = reference.margin if isinstance(reference, ConeHandle) else reference
    agree = disagree = skipped = 0
    reverse_candidates = 0
    examples = []
    for t in range(budget):
        if t % 3 == 0:
            a = sample_member(primary, rng)
        else:
            a = random_symmetric(n, rng)
        m1 = primary.margin(a)
        m2 = float(ref_margin(a))
        if min(abs(m1), abs(m2)) <= margin_floor:
            skipped += 1
            continue
        if inclusion_only:
            if m1 > 0 and m2 < 0:
                disagree += 1
                if len(examples) < 5:
                    examples.append(a.tolist())
            elif m2 > 0 and m1 < 0:
                reverse_candidates += 1
            else:
                agree += 1
        else:
            if (m1 > 0) == (m2 > 0):
                agree += 1
            else:
                disagree += 1
                if len(examples) < 5:
                    examples.append(a.tolist())
    out = {
        "cone": getattr(primary, "name", None) or "anonymous",
        "budget": budget, "agree": agree, "disagree": disagree,
        "dead_band_skipped": skipped, "examples": examples,
    }
    if inclusion_only:
        out["reverse_candidates"] = reverse_candidates
    return out
