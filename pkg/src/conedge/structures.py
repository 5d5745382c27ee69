"""Complex and quaternionic structures on R^N as real matrices.

Conventions (fixed once, used everywhere):
  * complex coordinate l occupies slots 2l, 2l+1 as (x, y);
  * quaternion coordinate l occupies slots 4l..4l+3 as (a, b, c, d);
  * I, J, K are the right scalar multiplications, so applying I then J
    equals applying K (as matrices, J @ I == K under column action).

The module provides the invariant decompositions of Sym2(R^N) under the
four compact groups handled here, their closed-form projectors, samplers
for the associated plane families and group elements, the canonical form
of matrices commuting with I and anti-commuting with J, K, and the
determinant-type operator values built from grouped eigenvalues.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .symspace import (
    SymSubspace,
    as_rng,
    eigh,
    frob_norm,
    orthonormalize,
    standard_basis,
)

GROUP_KINDS = ("on", "un", "spn", "spn_sp1", "spn_s1")

STRUCT_TOL = 1e-12
FRAME_TOL = 1e-10
CANON_TOL = 1e-8


@dataclass(frozen=True)
class Group:
    """Compact invariance group acting on R^dim."""

    kind: str  # one of GROUP_KINDS
    dim: int   # ambient real dimension N

    def __post_init__(self):
        if self.kind not in GROUP_KINDS:
            raise ValueError(f"unknown group kind {self.kind!r}")
        if self.kind == "un" and self.dim % 2:
            raise ValueError("un needs even ambient dimension")
        if self.kind in ("spn", "spn_sp1", "spn_s1") and self.dim % 4:
            raise ValueError(f"{self.kind} needs ambient dimension divisible by 4")
        if self.dim < 1:
            raise ValueError("ambient dimension must be positive")


@dataclass(frozen=True)
class QuaternionTriple:
    """Right multiplications by i, j, k on H^n = R^{4n} as real matrices."""

    i: np.ndarray
    j: np.ndarray
    k: np.ndarray

    @property
    def dim(self) -> int:
        return self.i.shape[0]

    def validate(self) -> None:
        n = self.dim
        eye = np.eye(n)
        for m in (self.i, self.j, self.k):
            if np.abs(m + m.T).max() > STRUCT_TOL:
                raise ValueError("structure matrix is not skew")
            if np.abs(m @ m + eye).max() > STRUCT_TOL:
                raise ValueError("structure matrix does not square to -Id")
        if np.abs(self.j @ self.i - self.k).max() > STRUCT_TOL:
            raise ValueError("composition convention violated (J I != K)")


def complex_structure(n_real: int) -> np.ndarray:
    """Standard complex structure pairing slots (2l, 2l+1) as (x, y)."""
    if n_real % 2:
        raise ValueError("complex structure needs even dimension")
    block = np.array([[0.0, -1.0], [1.0, 0.0]])
    out = np.zeros((n_real, n_real))
    for l in range(n_real // 2):
        out[2 * l : 2 * l + 2, 2 * l : 2 * l + 2] = block
    return out


# Per-coordinate 4x4 blocks of right multiplication by i, j, k under
# q = a + bi + cj + dk -> (a, b, c, d); columns are images of e1..e4.
_BLOCK_I = np.array(
    [[0, -1, 0, 0], [1, 0, 0, 0], [0, 0, 0, 1], [0, 0, -1, 0]], dtype=float
)
_BLOCK_J = np.array(
    [[0, 0, -1, 0], [0, 0, 0, -1], [1, 0, 0, 0], [0, 1, 0, 0]], dtype=float
)
_BLOCK_K = np.array(
    [[0, 0, 0, -1], [0, 0, 1, 0], [0, -1, 0, 0], [1, 0, 0, 0]], dtype=float
)


def quaternion_triple(n: int) -> QuaternionTriple:
    """Blockwise I, J, K on H^n."""
    if n < 1:
        raise ValueError("need at least one quaternionic coordinate")
    eye = np.eye(n)
    trip = QuaternionTriple(
        np.kron(eye, _BLOCK_I), np.kron(eye, _BLOCK_J), np.kron(eye, _BLOCK_K)
    )
    trip.validate()
    return trip


def right_scalar(trip: QuaternionTriple, q) -> np.ndarray:
    """Right multiplication by the quaternion q = (a, b, c, d)."""
    a, b, c, d = np.asarray(q, dtype=float)
    return a * np.eye(trip.dim) + b * trip.i + c * trip.j + d * trip.k


# ----------------------------------------------------------------------
# closed-form projections
# ----------------------------------------------------------------------

def complex_sym_part(a: np.ndarray, i_mat: np.ndarray) -> np.ndarray:
    """Component commuting with the complex structure: (A - IAI)/2."""
    return 0.5 * (a - i_mat @ a @ i_mat)


def complex_skew_part(a: np.ndarray, i_mat: np.ndarray) -> np.ndarray:
    """Component anti-commuting with the complex structure: (A + IAI)/2."""
    return 0.5 * (a + i_mat @ a @ i_mat)


def quat_sym_part(a: np.ndarray, trip: QuaternionTriple) -> np.ndarray:
    """(A - IAI - JAJ - KAK)/4: commutes with I, J and K."""
    i, j, k = trip.i, trip.j, trip.k
    return 0.25 * (a - i @ a @ i - j @ a @ j - k @ a @ k)


def quat_skew_part(a: np.ndarray, trip: QuaternionTriple) -> np.ndarray:
    """(3A + IAI + JAJ + KAK)/4: complement of the commuting component."""
    i, j, k = trip.i, trip.j, trip.k
    return 0.25 * (3 * a + i @ a @ i + j @ a @ j + k @ a @ k)


def e_structure_part(a: np.ndarray, trip: QuaternionTriple, which: str) -> np.ndarray:
    """Character projector onto the I-, J- or K-aligned skew component.

    These commute with the named structure and anti-commute with the other
    two; the three projectors are idempotent, mutually annihilating and sum
    to quat_skew_part.
    """
    i, j, k = trip.i, trip.j, trip.k
    if which == "i":
        return 0.25 * (a - i @ a @ i + j @ a @ j + k @ a @ k)
    if which == "j":
        return 0.25 * (a + i @ a @ i - j @ a @ j + k @ a @ k)
    if which == "k":
        return 0.25 * (a + i @ a @ i + j @ a @ j - k @ a @ k)
    raise ValueError(f"unknown structure label {which!r}")


def verify_e_structure_projectors(n: int, trials: int = 20, seed: int = 0) -> float:
    """Sanity gate for the derived projectors; returns the worst residual.

    Checks idempotence, mutual annihilation and that the three maps sum to
    quat_skew_part on random symmetric matrices.
    """
    trip = quaternion_triple(n)
    rng = as_rng(seed)
    worst = 0.0
    labels = ("i", "j", "k")
    for _ in range(trials):
        g = rng.normal(size=(4 * n, 4 * n))
        a = 0.5 * (g + g.T)
        parts = {w: e_structure_part(a, trip, w) for w in labels}
        s = sum(parts.values())
        worst = max(worst, np.abs(s - quat_skew_part(a, trip)).max())
        for w in labels:
            worst = max(worst, np.abs(e_structure_part(parts[w], trip, w) - parts[w]).max())
            for w2 in labels:
                if w2 != w:
                    worst = max(worst, np.abs(e_structure_part(parts[w], trip, w2)).max())
    return float(worst)


# ----------------------------------------------------------------------
# invariant decompositions
# ----------------------------------------------------------------------

def _traceless(a: np.ndarray) -> np.ndarray:
    n = a.shape[0]
    return a - (np.trace(a) / n) * np.eye(n)


def _component_map(group: Group):
    """name -> linear map Sym2 -> Sym2 realizing each irreducible projector."""
    n = group.dim
    eye = np.eye(n)

    def id_part(a):
        return (np.trace(a) / n) * eye

    if group.kind == "on":
        return {"id": id_part, "sym0": _traceless}
    if group.kind == "un":
        i_mat = complex_structure(n)
        return {
            "id": id_part,
            "c_sym0": lambda a: _traceless(complex_sym_part(a, i_mat)),
            "c_skew": lambda a: complex_skew_part(a, i_mat),
        }
    trip = quaternion_triple(n // 4)
    base = {
        "id": id_part,
        "h_sym0": lambda a: _traceless(quat_sym_part(a, trip)),
    }
    if group.kind == "spn_sp1":
        base["h_skew3"] = lambda a: quat_skew_part(a, trip)
    else:  # spn / spn_s1 share the finest (plain quaternionic) splitting
        base["e_i"] = lambda a: e_structure_part(a, trip, "i")
        base["e_j"] = lambda a: e_structure_part(a, trip, "j")
        base["e_k"] = lambda a: e_structure_part(a, trip, "k")
    return base


def component_names(group: Group) -> list[str]:
    return list(_component_map(group).keys())


def group_project(group: Group, component: str, a: np.ndarray) -> np.ndarray:
    """Project a symmetric matrix onto one named invariant component."""
    cmap = _component_map(group)
    if component not in cmap:
        raise KeyError(f"unknown component {component!r} for group {group.kind}")
    if a.shape[0] != group.dim:
        raise ValueError(f"matrix is {a.shape[0]}x, group ambient {group.dim}")
    return cmap[component](a)


def irreducible_components(group: Group) -> dict[str, SymSubspace]:
    """Orthonormal bases of the invariant components, keyed by name.

    Bases are produced by pushing the standard basis of Sym2 through each
    projector and orthonormalizing, so they are deterministic.
    """
    n = group.dim
    cmap = _component_map(group)
    out = {}
    for name, proj in cmap.items():
        gens = [proj(b) for b in standard_basis(n)]
        out[name] = orthonormalize(gens, ambient_n=n)
    total = sum(s.dim for s in out.values())
    if total != n * (n + 1) // 2:
        raise ValueError(f"component dimensions sum to {total}, expected {n*(n+1)//2}")
    return out


def reduced_projected_pe(n: int, e) -> np.ndarray:
    """Projection of the rank-one projector P_e onto R.Id + the three
    structure-aligned skew components of Sym2(H^n).

    Closed form: Id/(4n) + (3 P_e - P_{Ie} - P_{Je} - P_{Ke})/4.
    """
    e = np.asarray(e, dtype=float)
    if abs(np.linalg.norm(e) - 1.0) > FRAME_TOL:
        raise ValueError("e must be a unit vector")
    trip = quaternion_triple(n)
    pe = np.outer(e, e)
    p = [np.outer(m @ e, m @ e) for m in (trip.i, trip.j, trip.k)]
    return np.eye(4 * n) / (4 * n) + 0.25 * (3 * pe - p[0] - p[1] - p[2])


# ----------------------------------------------------------------------
# plane families
# ----------------------------------------------------------------------

PLANE_TAGS = (
    "grass", "cp", "lag", "hp", "hlag", "gl_ijk",
    "ilag", "jlag", "klag", "cp_j", "cp_k",
)


@dataclass(frozen=True)
class PlaneFamily:
    """A family of planes in R^ambient closed under the relevant group."""

    tag: str
    ambient: int
    p: int | None = None  # plane dimension, grass only

    def __post_init__(self):
        if self.tag not in PLANE_TAGS:
            raise ValueError(f"unknown plane family {self.tag!r}")
        if self.tag == "grass":
            if not self.p or not 1 <= self.p <= self.ambient:
                raise ValueError("grass needs a plane dimension 1..ambient")
        if self.tag in ("cp", "lag") and self.ambient % 2:
            raise ValueError(f"{self.tag} needs even ambient dimension")
        if self.tag in ("hp", "hlag", "gl_ijk", "ilag", "jlag", "klag", "cp_j", "cp_k"):
            if self.ambient % 4:
                raise ValueError(f"{self.tag} needs ambient dimension divisible by 4")

    @property
    def plane_dim(self) -> int:
        n = self.ambient
        return {
            "grass": self.p or 0,
            "cp": 2, "cp_j": 2, "cp_k": 2,
            "lag": n // 2,
            "hp": 4,
            "hlag": n // 4,
            "gl_ijk": n // 2,
            "ilag": n // 2, "jlag": n // 2, "klag": n // 2,
        }[self.tag]


def _family_structure_matrix(family: PlaneFamily) -> np.ndarray:
    """The single structure matrix a line/lagrangian family refers to."""
    n = family.ambient
    if family.tag in ("cp", "lag"):
        return complex_structure(n)
    trip = quaternion_triple(n // 4)
    return {
        "ilag": trip.i, "jlag": trip.j, "klag": trip.k,
        "cp_j": trip.j, "cp_k": trip.k,
    }[family.tag]


def _orthonormal_against(v: np.ndarray, rows: list[np.ndarray], tol: float = 1e-8):
    """Project v off the span of rows and normalize; None if degenerate."""
    w = v.copy()
    for _ in range(2):
        for r in rows:
            w -= (w @ r) * r
    nw = np.linalg.norm(w)
    if nw < tol:
        return None
    return w / nw


def _structured_frame(seeds: np.ndarray, mats: list[np.ndarray], max_tries: int = 64,
                      rng=None):
    """Orthonormalize seed vectors against themselves and their images.

    Returns seed rows u_l such that {u_l} + {M u_l : M in mats} is an
    orthonormal set; resamples degenerate seeds (bounded retries).
    """
    rows: list[np.ndarray] = []
    seeds_out = []
    dim = seeds.shape[1]
    k = 0
    tries = 0
    while k < seeds.shape[0]:
        u = _orthonormal_against(seeds[k], rows)
        if u is None:
            tries += 1
            if rng is None or tries > max_tries:
                raise ValueError("degenerate seed set for structured frame")
            seeds[k] = rng.normal(size=dim)
            continue
        seeds_out.append(u)
        rows.append(u)
        rows.extend(m @ u for m in mats)
        k += 1
    return np.array(seeds_out)


def structured_frame(seeds: np.ndarray, mats, rng=None) -> np.ndarray:
    """Public alias of the seed orthonormalization used by the samplers."""
    return _structured_frame(np.array(seeds, dtype=float), list(mats), rng=rng)


def family_spec(family: PlaneFamily):
    """Seed parametrization of a family: (seed_count, gs_mats, row_mats).

    A frame is built from `seed_count` vectors orthonormalized against
    themselves and their images under `gs_mats`; its rows are each seed
    followed by its images under `row_mats`.
    """
    n = family.ambient
    tag = family.tag
    if tag == "grass":
        return family.p, [], []
    if tag in ("cp", "cp_j", "cp_k"):
        s = _family_structure_matrix(family)
        return 1, [s], [s]
    if tag in ("lag", "ilag", "jlag", "klag"):
        s = _family_structure_matrix(family)
        return n // 2, [s], []
    trip = quaternion_triple(n // 4)
    structs = [trip.i, trip.j, trip.k]
    if tag == "hp":
        return 1, structs, structs
    if tag == "hlag":
        return n // 4, structs, []
    if tag == "gl_ijk":
        return n // 4, structs, [trip.i]
    raise ValueError(f"unhandled family {tag!r}")


def frame_from_seeds(family: PlaneFamily, seeds: np.ndarray) -> np.ndarray:
    """Expand orthonormalized seed rows into the full plane frame."""
    _, _, row_mats = family_spec(family)
    if not row_mats:
        return np.asarray(seeds)
    rows = []
    for u in np.asarray(seeds):
        rows.append(u)
        rows.extend(m @ u for m in row_mats)
    return np.array(rows)


def frame_seeds(family: PlaneFamily, frame: np.ndarray) -> np.ndarray:
    """Recover the seed rows of a frame built by frame_from_seeds."""
    _, _, row_mats = family_spec(family)
    stride = 1 + len(row_mats)
    return np.asarray(frame)[::stride]


def sample_plane(family: PlaneFamily, seed) -> np.ndarray:
    """Draw one frame (rows are orthonormal vectors spanning the plane)."""
    rng = as_rng(seed)
    count, gs_mats, _ = family_spec(family)
    seeds = _structured_frame(rng.normal(size=(count, family.ambient)), gs_mats, rng=rng)
    return frame_from_seeds(family, seeds)


def frame_relations_residual(family: PlaneFamily, frame: np.ndarray) -> float:
    """Worst violation of the family's defining orthogonality relations."""
    f = np.asarray(frame)
    res = np.abs(f @ f.T - np.eye(f.shape[0])).max()
    tag = family.tag
    if tag == "grass":
        return float(res)
    if tag in ("cp", "cp_j", "cp_k"):
        i_mat = _family_structure_matrix(family)
        p = f.T @ f
        return float(max(res, np.abs(p @ i_mat - i_mat @ p).max()))
    if tag in ("lag", "ilag", "jlag", "klag"):
        i_mat = _family_structure_matrix(family)
        return float(max(res, np.abs(f @ i_mat @ f.T).max()))
    trip = quaternion_triple(family.ambient // 4)
    if tag in ("hp", "hlag"):
        seeds = f[:1] if tag == "hp" else f
        rows = [s for s in seeds]
        for m in (trip.i, trip.j, trip.k):
            rows.extend(m @ s for s in seeds)
        g = np.array(rows)
        return float(max(res, np.abs(g @ g.T - np.eye(len(rows))).max()))
    if tag == "gl_ijk":
        p = f.T @ f
        res = max(res, np.abs(p @ trip.i - trip.i @ p).max())
        res = max(res, np.abs(f @ trip.j @ f.T).max())
        res = max(res, np.abs(f @ trip.k @ f.T).max())
        return float(res)
    raise ValueError(tag)


# ----------------------------------------------------------------------
# group element samplers
# ----------------------------------------------------------------------

def _orthogonal_sample(n: int, rng) -> np.ndarray:
    g = rng.normal(size=(n, n))
    q, r = np.linalg.qr(g)
    return q * np.sign(np.diag(r))


def _adapted_frame_map(new_seeds: np.ndarray, ref_seeds: np.ndarray,
                       mats: list[np.ndarray]) -> np.ndarray:
    """Orthogonal map sending the reference adapted frame to the new one.

    Both seed sets must be structured frames for the same matrix list; the
    result commutes with every matrix in `mats` by construction.
    """
    n = new_seeds.shape[1]
    g = np.zeros((n, n))
    for u, f in zip(new_seeds, ref_seeds):
        g += np.outer(u, f)
        for m in mats:
            g += np.outer(m @ u, m @ f)
    return g


def _reference_seeds(n: int, mats: list[np.ndarray]) -> np.ndarray:
    """Deterministic structured seed frame built from the standard basis."""
    count = n // (1 + len(mats))
    rows: list[np.ndarray] = []
    seeds = []
    idx = 0
    while len(seeds) < count:
        if idx >= n:
            raise ValueError("could not build reference frame")
        u = _orthonormal_against(np.eye(n)[idx], rows)
        idx += 1
        if u is None:
            continue
        seeds.append(u)
        rows.append(u)
        rows.extend(m @ u for m in mats)
    return np.array(seeds)


def sample_group_element(group: Group, seed, direction: str | None = None) -> np.ndarray:
    """Draw an orthogonal matrix from the given compact group.

    For `spn_s1` the circle factor rotates in the plane of the structure
    named by `direction` ("i" default, "j" or "k" for the permuted copies).
    """
    rng = as_rng(seed)
    n = group.dim
    if group.kind == "on":
        return _orthogonal_sample(n, rng)
    if group.kind == "un":
        i_mat = complex_structure(n)
        mats = [i_mat]
        seeds = _structured_frame(rng.normal(size=(n // 2, n)), mats, rng=rng)
        return _adapted_frame_map(seeds, _reference_seeds(n, mats), mats)
    trip = quaternion_triple(n // 4)
    mats = [trip.i, trip.j, trip.k]
    seeds = _structured_frame(rng.normal(size=(n // 4, n)), mats, rng=rng)
    g = _adapted_frame_map(seeds, _reference_seeds(n, mats), mats)
    if group.kind == "spn":
        return g
    if group.kind == "spn_sp1":
        q = rng.normal(size=4)
        q /= np.linalg.norm(q)
        return g @ right_scalar(trip, q)
    theta = rng.uniform(0.0, 2.0 * np.pi)
    struct = {"i": trip.i, "j": trip.j, "k": trip.k, None: trip.i}[direction]
    return g @ (np.cos(theta) * np.eye(n) + np.sin(theta) * struct)


def unitary_sample_for_structure(i_mat: np.ndarray, seed) -> np.ndarray:
    """Orthogonal matrix commuting with an arbitrary complex structure."""
    rng = as_rng(seed)
    n = i_mat.shape[0]
    mats = [i_mat]
    seeds = _structured_frame(rng.normal(size=(n // 2, n)), mats, rng=rng)
    return _adapted_frame_map(seeds, _reference_seeds(n, mats), mats)


# ----------------------------------------------------------------------
# canonical form on the I-aligned component
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class CanonicalFormEI:
    """A = sum_l lambda_l (P_{e_l} + P_{Ie_l} - P_{Je_l} - P_{Ke_l})."""

    lambdas: np.ndarray       # (n,) nonnegative, descending
    hframe: np.ndarray        # (n, 4n) rows e_l, jointly H-orthonormal

    def reconstruct(self, trip: QuaternionTriple) -> np.ndarray:
        n4 = trip.dim
        out = np.zeros((n4, n4))
        for lam, e in zip(self.lambdas, self.hframe):
            out += lam * (
                np.outer(e, e)
                + np.outer(trip.i @ e, trip.i @ e)
                - np.outer(trip.j @ e, trip.j @ e)
                - np.outer(trip.k @ e, trip.k @ e)
            )
        return out


def canonical_form_ei(a: np.ndarray, trip: QuaternionTriple | None = None) -> CanonicalFormEI:
    """Canonical form of a symmetric matrix in the I-aligned component.

    Eigenvalues come in (lam, lam, -lam, -lam) groups on quaternionic lines;
    the sign convention keeps every lambda nonnegative.
    """
    n4 = a.shape[0]
    if trip is None:
        trip = quaternion_triple(n4 // 4)
    scale = 1.0 + frob_norm(a)
    if np.abs(e_structure_part(a, trip, "i") - a).max() > CANON_TOL * scale:
        raise ValueError("matrix is not in the I-aligned component")
    n = n4 // 4
    spec = eigh(a)
    lam = spec.eigenvalues[::-1]          # descending
    vec = spec.eigenvectors[:, ::-1]
    lambdas = []
    frame_rows: list[np.ndarray] = []
    used: list[np.ndarray] = []           # grows with e, Ie, Je, Ke per line
    tol = CANON_TOL * scale
    idx = 0
    while len(lambdas) < n:
        if idx >= n4:
            raise ValueError("failed to extract quaternionic eigen-lines")
        lam_i = lam[idx]
        if lam_i < -tol:
            raise ValueError("spectrum is not symmetric about zero")
        v = _orthonormal_against(vec[:, idx], used, tol=1e-6)
        idx += 1
        if v is None:
            continue
        # v sits in the eigenspace of +lam_i; its I-image does too, and the
        # J-, K-images span the paired -lam_i eigenspace.
        lambdas.append(max(lam_i, 0.0))
        frame_rows.append(v)
        used.extend([v, trip.i @ v, trip.j @ v, trip.k @ v])
    form = CanonicalFormEI(np.array(lambdas), np.array(frame_rows))
    if frob_norm(a - form.reconstruct(trip)) > CANON_TOL * scale * 10:
        raise ValueError("canonical form reconstruction failed")
    return form


# ----------------------------------------------------------------------
# determinant-type operator values
# ----------------------------------------------------------------------

def _grouped_eigenvalues(a: np.ndarray, multiplicity: int, scale: float) -> np.ndarray:
    """One representative per eigenvalue group of the given multiplicity."""
    lam = np.linalg.eigvalsh(a)
    tol = 1e-7 * (1.0 + scale)
    groups = lam.reshape(-1, multiplicity)
    spread = groups.max(axis=1) - groups.min(axis=1)
    if spread.max() > tol:
        raise ValueError(
            f"eigenvalues do not cluster with multiplicity {multiplicity} "
            f"(worst spread {spread.max():.3e})"
        )
    return groups.mean(axis=1)


def monge_ampere_value(group: Group, a: np.ndarray) -> float:
    """Product of grouped eigenvalues of the structure-compatible part."""
    if a.shape[0] != group.dim:
        raise ValueError("dimension mismatch")
    scale = frob_norm(a)
    if group.kind == "on":
        return float(np.prod(np.linalg.eigvalsh(a)))
    if group.kind == "un":
        i_mat = complex_structure(group.dim)
        paired = _grouped_eigenvalues(complex_sym_part(a, i_mat), 2, scale)
        return float(np.prod(paired))
    if group.kind == "spn_sp1":
        trip = quaternion_triple(group.dim // 4)
        quads = _grouped_eigenvalues(quat_sym_part(a, trip), 4, scale)
        return float(np.prod(quads))
    raise ValueError(f"no determinant operator for group {group.kind}")
