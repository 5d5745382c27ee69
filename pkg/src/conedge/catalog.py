"""Named cone catalog.

Each entry names a minimal cone by its invariance group, the component
names of its edge, and a default ambient dimension.  Entries whose polar
cone has a usable closed form carry a fast margin function that agrees
exactly with the translate-optimizer margin (both compute the same
pairing minimum over the polar base); the agreement is part of the test
suite, so neither route may be removed.

The catalog file format is a small INI-like key-value text:

    [P_C]
    group = un
    n = 4
    edge = c_skew

The environment variable CONEDGE_CATALOG can point at a replacement file.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from . import structures as st
from .cones import EdgeCone
from .symspace import SymSubspace, direct_sum, zero_subspace

ENV_CATALOG = "CONEDGE_CATALOG"


@dataclass(frozen=True)
class CatalogSpec:
    name: str
    group_kind: str
    components: tuple[str, ...]   # edge component names; empty = zero edge
    default_n: int                # default ambient real dimension
    description: str = ""


DEFAULT_SPECS = (
    CatalogSpec("P", "on", (), 2,
                "positive-semidefinite cone; subfunctions are the convex ones"),
    CatalogSpec("laplace", "on", ("sym0",), 2,
                "trace half-space as a minimal cone (edge = traceless part)"),
    CatalogSpec("P_C", "un", ("c_skew",), 4,
                "complex hermitian positivity (plurisubharmonic functions)"),
    CatalogSpec("P_LAG", "un", ("c_sym0",), 4,
                "nonnegative traces on lagrangian planes"),
    CatalogSpec("P_H", "spn_sp1", ("h_skew3",), 4,
                "quaternionic hermitian positivity"),
    CatalogSpec("P_HSYM", "spn_sp1", ("h_sym0",), 8,
                "edge = traceless quaternion-hermitian block"),
    CatalogSpec("GL_IJK", "spn_s1", ("h_sym0", "e_j", "e_k"), 4,
                "planes that are I-complex and J,K-lagrangian"),
    CatalogSpec("P_EI", "spn_s1", ("e_i",), 4,
                "edge = I-aligned skew component only"),
)


def catalog_names() -> list[str]:
    return [s.name for s in DEFAULT_SPECS]


def edge_from_components(group: st.Group, components) -> SymSubspace:
    comps = st.irreducible_components(group)
    parts = []
    for name in components:
        if name not in comps:
            raise KeyError(f"unknown component {name!r} for group {group.kind}")
        if name == "id":
            raise ValueError("the identity component is never a basic edge part")
        parts.append(comps[name])
    parts = [p for p in parts if p.dim > 0]
    if not parts:
        return zero_subspace(group.dim)
    return direct_sum(*parts)


# ----------------------------------------------------------------------
# closed-form margins (each equals min <A, Z> over the polar base tr Z = 1)
# ----------------------------------------------------------------------

def _psd_margin(a):
    return float(np.linalg.eigvalsh(a)[0])


def _psd_margin_batch(a):
    return np.linalg.eigvalsh(a)[..., 0]


def _trace_margin(n):
    def margin(a):
        return float(np.trace(a)) / n

    def batch(a):
        return np.trace(a, axis1=-2, axis2=-1) / n

    return margin, batch


def _complex_margin(n_real):
    i_mat = st.complex_structure(n_real)

    def margin(a):
        return float(np.linalg.eigvalsh(0.5 * (a - i_mat @ a @ i_mat))[0])

    def batch(a):
        sym = 0.5 * (a - np.einsum("ij,mjk,kl->mil", i_mat, a, i_mat))
        return np.linalg.eigvalsh(sym)[..., 0]

    return margin, batch


def _quaternion_margin(n_real):
    trip = st.quaternion_triple(n_real // 4)

    def margin(a):
        return float(np.linalg.eigvalsh(st.quat_sym_part(a, trip))[0])

    def batch(a):
        out = a.copy()
        for m in (trip.i, trip.j, trip.k):
            out = out - np.einsum("ij,mjk,kl->mil", m, a, m)
        return np.linalg.eigvalsh(0.25 * out)[..., 0]

    return margin, batch


def _lagrangian_margin(n_real):
    """Minimum of tr(A|_W)/k over lagrangian planes: the sum of the k
    smallest eigenvalues of the span part of A, divided by k."""
    i_mat = st.complex_structure(n_real)
    k = n_real // 2

    def span_part(a):
        skew = 0.5 * (a + i_mat @ a @ i_mat)
        tr = np.trace(a) / n_real
        return skew + tr * np.eye(n_real)

    def margin(a):
        lam = np.linalg.eigvalsh(span_part(a))
        return float(lam[:k].sum()) / k

    def batch(a):
        skew = 0.5 * (a + np.einsum("ij,mjk,kl->mil", i_mat, a, i_mat))
        tr = np.trace(a, axis1=-2, axis2=-1) / n_real
        sp = skew + tr[:, None, None] * np.eye(n_real)
        lam = np.linalg.eigvalsh(sp)
        return lam[:, :k].sum(axis=1) / k

    return margin, batch


def _gl_ijk_margin(n_real):
    """Minimum of tr(A|_W)/(2n) over I-complex, J/K-lagrangian planes:
    (tr A - nuclear norm of the I-aligned part) / N."""
    trip = st.quaternion_triple(n_real // 4)

    def ei_part(a):
        return st.e_structure_part(a, trip, "i")

    def margin(a):
        lam = np.linalg.eigvalsh(ei_part(a))
        return (float(np.trace(a)) - float(np.abs(lam).sum())) / n_real

    def batch(a):
        m = 0.25 * (
            a
            - np.einsum("ij,mjk,kl->mil", trip.i, a, trip.i)
            + np.einsum("ij,mjk,kl->mil", trip.j, a, trip.j)
            + np.einsum("ij,mjk,kl->mil", trip.k, a, trip.k)
        )
        lam = np.linalg.eigvalsh(m)
        tr = np.trace(a, axis1=-2, axis2=-1)
        return (tr - np.abs(lam).sum(axis=1)) / n_real

    return margin, batch


def _fast_margins(spec: CatalogSpec, n_real: int):
    if spec.name == "P":
        return _psd_margin, _psd_margin_batch
    if spec.name == "laplace":
        return _trace_margin(n_real)
    if spec.name == "P_C":
        return _complex_margin(n_real)
    if spec.name == "P_H":
        return _quaternion_margin(n_real)
    if spec.name == "P_LAG":
        return _lagrangian_margin(n_real)
    if spec.name == "GL_IJK":
        return _gl_ijk_margin(n_real)
    return None, None


def group_for(spec: CatalogSpec, n_real: int) -> st.Group:
    return st.Group(spec.group_kind, n_real)


def build_cone(name: str, n: int | None = None, *, check: bool = False,
               specs=None) -> EdgeCone:
    """Instantiate a catalog cone at ambient real dimension n.

    With check=True the edge is re-verified basic (slower; the catalog
    edges are traceless, which already forces basicness).
    """
    spec = find_spec(name, specs)
    n_real = n or spec.default_n
    group = group_for(spec, n_real)
    edge = edge_from_components(group, spec.components)
    fast, fast_batch = _fast_margins(spec, n_real)
    lin_w = np.eye(n_real) / n_real if spec.name == "laplace" else None
    cone = EdgeCone(edge, check=check, name=spec.name,
                    fast_margin=fast, fast_margin_batch=fast_batch,
                    linear_margin_weight=lin_w)
    return cone


def find_spec(name: str, specs=None) -> CatalogSpec:
    for s in specs or load_default_specs():
        if s.name == name:
            return s
    raise KeyError(f"no catalog cone named {name!r}")


# ----------------------------------------------------------------------
# catalog file round trip
# ----------------------------------------------------------------------

def dump_catalog(specs=None) -> str:
    lines = ["# conedge cone catalog"]
    for s in specs or DEFAULT_SPECS:
        lines.append("")
        lines.append(f"[{s.name}]")
        lines.append(f"group = {s.group_kind}")
        lines.append(f"n = {s.default_n}")
        lines.append(f"edge = {','.join(s.components)}")
        if s.description:
            lines.append(f"description = {s.description}")
    return "\n".join(lines) + "\n"


def parse_catalog(text: str) -> list[CatalogSpec]:
    specs = []
    current: dict | None = None

    def flush():
        if current is None:
            return
        missing = {"group", "n"} - current.keys()
        if missing:
            raise ValueError(f"catalog entry {current.get('name')} missing {missing}")
        comps = tuple(c for c in current.get("edge", "").split(",") if c)
        specs.append(
            CatalogSpec(current["name"], current["group"], comps,
                        int(current["n"]), current.get("description", ""))
        )

    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("[") and line.endswith("]"):
            flush()
            current = {"name": line[1:-1].strip()}
            continue
        if "=" not in line or current is None:
            raise ValueError(f"malformed catalog line: {raw!r}")
        key, val = (part.strip() for part in line.split("=", 1))
        current[key] = val
    flush()
    return specs


def load_default_specs() -> list[CatalogSpec]:
    path = os.environ.get(ENV_CATALOG)
    if path:
        with open(path, "r", encoding="utf-8") as fh:
            return parse_catalog(fh.read())
    return list(DEFAULT_SPECS)
