"""Polyhedral chains in the sphere quotient as equivariant simplicial complexes.

A cycle stores vertex lifts (SphereVectors) plus simplices whose corners
reference a vertex index together with a group-element twist: the geometric
corner is act(twist, vertex).  Faces are matched modulo a simultaneous left
translation of their corner twists, so quotient gluing (tori, surface
complexes) is exact combinatorics, not floating-point matching.

Simplices are radial projections of Euclidean hulls of the corner lifts;
mass is Gram-determinant quadrature of that parametrization.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from .errors import InvariantViolation
from .groups import GroupElement, MarkedGroup
from .quadrature import barycentric, simplex_rule
from .sphere import Homomorphism, SphereVector, abs_map, act, chordal_distance, convolve, displacement, push_homomorphism

DEFAULT_ORDER = 8


@dataclass(frozen=True)
class Corner:
    vertex: int
    twist: GroupElement

    def key(self):
        return (self.vertex, self.twist.sort_key(), self.twist.key)


@dataclass(frozen=True)
class Simplex:
    corners: tuple[Corner, ...]
    multiplicity: int


@dataclass
class SimplicialCycle:
    group: MarkedGroup
    vertices: list[SphereVector]
    simplices: list[Simplex]

    @property
    def dim(self) -> int:
        return len(self.simplices[0].corners) - 1 if self.simplices else 0

    def lift(self, corner: Corner) -> SphereVector:
        v = self.vertices[corner.vertex]
        if corner.twist.is_identity():
            return v
        return act(corner.twist, v)

    def corner_lifts(self, simplex: Simplex) -> list[SphereVector]:
        return [self.lift(c) for c in simplex.corners]

    def all_lifts(self) -> list[SphereVector]:
        out = []
        for s in self.simplices:
            out.extend(self.corner_lifts(s))
        return out

    def support_diameter(self) -> float:
        lifts = self.all_lifts()
        best = 0.0
        for i in range(len(lifts)):
            for j in range(i + 1, len(lifts)):
                best = max(best, chordal_distance(lifts[i], lifts[j]))
        return best

    def with_vertices(self, vertices: list[SphereVector]) -> "SimplicialCycle":
        return SimplicialCycle(self.group, vertices, self.simplices)


def simplex_cycle(group: MarkedGroup, vertices: list[SphereVector], index_tuples, multiplicities=None) -> SimplicialCycle:
    """Cycle from plain vertex-index simplices (all twists trivial)."""
    e = group.identity
    mult = multiplicities or [1] * len(index_tuples)
    simplices = [
        Simplex(tuple(Corner(i, e) for i in idx), m) for idx, m in zip(index_tuples, mult)
    ]
    return SimplicialCycle(group, list(vertices), simplices)


# -- dense assembly and volume ---------------------------------------------------


def dense_lifts(lifts: list[SphereVector]) -> tuple[list[GroupElement], np.ndarray]:
    """Joint support (sorted) and the (k+1, |support|*m) coefficient matrix."""
    m = lifts[0].payload_dim
    support: dict[GroupElement, int] = {}
    for u in lifts:
        for g in u.entries:
            if g not in support:
                support[g] = 0
    ordered = sorted(support, key=lambda g: g.sort_key())
    for i, g in enumerate(ordered):
        support[g] = i
    V = np.zeros((len(lifts), len(ordered) * m))
    for r, u in enumerate(lifts):
        for g, payload in u.entries.items():
            i = support[g]
            V[r, i * m : (i + 1) * m] = payload
    return ordered, V


class VolumeResult(NamedTuple):
    value: float
    degenerate: bool


def density_from_gram(G: np.ndarray, lam: np.ndarray) -> np.ndarray:
    """Volume density of lam -> normalize(sum lam_i v_i) from the corner Gram.

    The radial-projection parametrization touches the corners only through
    their pairwise inner products, so exact ambient embeddings (known Gram,
    infinite support) integrate with the same rule.
    """
    GL = lam @ G  # (K, n+1)
    q = np.einsum("ki,ki->k", GL, lam)
    D = (G[:, 1:] - G[:, [0]]).T  # D[i, k] = <v_k, w_i>, w_i = v_i - v_0
    FW = (lam @ D.T) / np.sqrt(q)[:, None]
    WW = D[:, 1:] - D[:, [0]]  # WW_ij = <w_i, w_j>
    gram = (WW[None, :, :] - FW[:, :, None] * FW[:, None, :]) / q[:, None, None]
    sign, logdet = np.linalg.slogdet(gram)
    return np.where(sign > 0, np.exp(0.5 * logdet), 0.0)


def _density(V: np.ndarray, lam: np.ndarray) -> np.ndarray:
    """sqrt(det Gram) of lam -> normalize(lam @ V) at barycentric nodes."""
    X = lam @ V
    q = np.einsum("ki,ki->k", X, X)
    W = V[1:] - V[0]
    FW = (X @ W.T) / np.sqrt(q)[:, None]
    WW = W @ W.T
    gram = (WW[None, :, :] - FW[:, :, None] * FW[:, None, :]) / q[:, None, None]
    sign, logdet = np.linalg.slogdet(gram)
    return np.where(sign > 0, np.exp(0.5 * logdet), 0.0)


def simplex_volume(lifts: list[SphereVector], order: int = DEFAULT_ORDER) -> VolumeResult:
    """Volume of the radial-projection simplex spanned by the lifts.

    The quadrature is exact for degree 2*order-1 polynomial integrands on the
    reference simplex; a rank-deficient (degenerate) simplex reports 0.
    """
    n = len(lifts) - 1
    if n < 1:
        raise ValueError("need at least an edge")
    _, V = dense_lifts(lifts)
    pts, wts = simplex_rule(n, order)
    lam = barycentric(pts)
    dens = _density(V, lam)
    if np.max(dens) < 1e-14:
        return VolumeResult(0.0, True)
    return VolumeResult(float(np.dot(wts, dens)), False)


@dataclass
class MassBreakdown:
    total: float
    per_simplex: list[float]
    thick_mass: dict[float, float] = field(default_factory=dict)


def mass(cycle: SimplicialCycle, order: int = DEFAULT_ORDER, deltas: tuple[float, ...] = ()) -> MassBreakdown:
    """Total mass sum |multiplicity| * volume, with an optional thick profile.

    The delta-thick restriction weighs each quadrature node by whether the
    node's displacement exceeds delta (sampled at the same nodes).
    """
    per = []
    thick = {float(d): 0.0 for d in deltas}
    for s in cycle.simplices:
        lifts = cycle.corner_lifts(s)
        n = len(lifts) - 1
        support, V = dense_lifts(lifts)
        pts, wts = simplex_rule(n, order)
        lam = barycentric(pts)
        dens = _density(V, lam)
        w = abs(s.multiplicity)
        per.append(w * float(np.dot(wts, dens)))
        if deltas:
            disp = _node_displacements(cycle.group, support, V, lam, lifts[0].payload_dim)
            for d in thick:
                mask = disp > d
                thick[d] += w * float(np.dot(wts[mask], dens[mask]))
    return MassBreakdown(total=float(sum(per)), per_simplex=per, thick_mass=thick)


def _node_displacements(group, support, V, lam, payload_dim) -> np.ndarray:
    X = lam @ V
    X = X / np.linalg.norm(X, axis=1, keepdims=True)
    out = np.empty(X.shape[0])
    for k in range(X.shape[0]):
        entries = {}
        for i, g in enumerate(support):
            block = X[k, i * payload_dim : (i + 1) * payload_dim]
            if np.any(block != 0.0):
                entries[g] = block.copy()
        u = SphereVector(group, entries, payload_dim)
        out[k] = displacement(u).delta
    return out


def thick_mass_profile(cycle: SimplicialCycle, deltas, order: int = DEFAULT_ORDER, sample_order: int = 2) -> dict[float, float]:
    """Mass carried by quadrature nodes of displacement > delta, per delta.

    Node displacement is sampled at a (typically lower) quadrature order.
    """
    profile = {float(d): 0.0 for d in deltas}
    for s in cycle.simplices:
        lifts = cycle.corner_lifts(s)
        n = len(lifts) - 1
        support, V = dense_lifts(lifts)
        pts, wts = simplex_rule(n, sample_order)
        lam = barycentric(pts)
        dens = _density(V, lam)
        disp = _node_displacements(cycle.group, support, V, lam, lifts[0].payload_dim)
        w = abs(s.multiplicity)
        for d in profile:
            mask = disp > d
            profile[d] += w * float(np.dot(wts[mask], dens[mask]))
    return profile


# -- boundary ------------------------------------------------------------------


def _canonical_face(corners: tuple[Corner, ...]):
    """Canonical key of a face modulo simultaneous left translation.

    Returns (key, parity): the key is the sorted translated corner tuple for
    the best pivot; parity is the sign of the sorting permutation.
    """
    best = None
    for pivot in corners:
        ginv = pivot.twist.inv()
        translated = [(c.vertex, ginv * c.twist) for c in corners]
        order = sorted(range(len(translated)), key=lambda i: (translated[i][0], translated[i][1].sort_key()))
        key = tuple((translated[i][0], translated[i][1].key) for i in order)
        parity = _permutation_sign(order)
        if best is None or key < best[0]:
            best = (key, parity, tuple(translated[i] for i in order))
    return best


def _permutation_sign(perm) -> int:
    sign = 1
    seen = [False] * len(perm)
    for i in range(len(perm)):
        if seen[i]:
            continue
        j = i
        length = 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def boundary_check(cycle: SimplicialCycle, against: SimplicialCycle | None = None, order: int = DEFAULT_ORDER) -> float:
    """Total unmatched oriented face measure; 0 means the chain is a cycle.

    With `against`, the check is that the boundary equals that chain (used
    for cone fillings): its simplices are subtracted as faces.
    """
    acc: dict = {}

    def add_face(corners: tuple[Corner, ...], coeff: int, source: SimplicialCycle):
        key, parity, translated = _canonical_face(corners)
        if key not in acc:
            acc[key] = [0, translated, source]
        acc[key][0] += parity * coeff

    for s in cycle.simplices:
        cs = s.corners
        for i in range(len(cs)):
            face = cs[:i] + cs[i + 1 :]
            add_face(face, (-1) ** i * s.multiplicity, cycle)
    if against is not None:
        for s in against.simplices:
            add_face(s.corners, -s.multiplicity, against)

    residual = 0.0
    for key, (net, translated, source) in acc.items():
        if net == 0:
            continue
        if len(translated) == 1:
            measure = 1.0  # 0-dimensional faces carry counting measure
        else:
            lifts = [act(tw, source.vertices[vid]) for vid, tw in translated]
            measure = simplex_volume(lifts, order).value
        residual += abs(net) * measure
    return residual


# -- push-forward -----------------------------------------------------------------


@dataclass
class CycleMap:
    """Vertexwise map with its twist action and a 1-Lipschitz certificate."""

    name: str
    vertex_map: Callable[[SphereVector], SphereVector]
    twist_map: Callable[[GroupElement], GroupElement]
    target_group: MarkedGroup
    certified_lipschitz: bool = True


def map_abs(group: MarkedGroup) -> CycleMap:
    return CycleMap("abs", abs_map, lambda g: g, group, True)


def map_convolve(group: MarkedGroup, eta: dict[GroupElement, float]) -> CycleMap:
    return CycleMap("convolve", lambda u: convolve(eta, u), lambda g: g, group, True)


def map_homomorphism(theta: Homomorphism) -> CycleMap:
    return CycleMap(
        "homomorphism",
        lambda u: push_homomorphism(theta, u),
        theta.apply,
        theta.target,
        True,
    )


def map_custom(name: str, fn, group: MarkedGroup, certified_lipschitz: bool = False) -> CycleMap:
    return CycleMap(name, fn, lambda g: g, group, certified_lipschitz)


def pushforward(cycle: SimplicialCycle, cmap: CycleMap, order: int = DEFAULT_ORDER, tol: float = 1e-8) -> SimplicialCycle:
    """Map vertex lifts (and twists, for homomorphisms) through cmap.

    For a certified 1-Lipschitz map the image mass may not exceed the source
    mass beyond tol plus quadrature slack; a violation raises.
    """
    new_vertices = [cmap.vertex_map(v) for v in cycle.vertices]
    new_simplices = [
        Simplex(tuple(Corner(c.vertex, cmap.twist_map(c.twist)) for c in s.corners), s.multiplicity)
        for s in cycle.simplices
    ]
    image = SimplicialCycle(cmap.target_group, new_vertices, new_simplices)
    if cmap.certified_lipschitz:
        before = mass(cycle, order).total
        after = mass(image, order).total
        if after > before + tol:
            raise InvariantViolation(
                f"certified 1-Lipschitz map {cmap.name} increased mass {before} -> {after}"
            )
    return image


# -- subdivision -------------------------------------------------------------------


def _edge_class(cycle: SimplicialCycle, ca: Corner, cb: Corner):
    """Canonical key of the quotient edge (unordered, modulo translation)."""
    g_ab = ca.twist.inv() * cb.twist
    rep1 = (ca.vertex, cb.vertex, g_ab)
    rep2 = (cb.vertex, ca.vertex, g_ab.inv())
    k1 = (rep1[0], rep1[1], rep1[2].sort_key(), rep1[2].key)
    k2 = (rep2[0], rep2[1], rep2[2].sort_key(), rep2[2].key)
    return (rep1, k1) if k1 <= k2 else (rep2, k2)


def subdivide(cycle: SimplicialCycle, order: int = DEFAULT_ORDER) -> SimplicialCycle:
    """Edge-midpoint subdivision with radial projection (dims 1, 2 and 3).

    Midpoint vertices are shared across glued faces through the edge's
    quotient class, so the boundary residual stays zero.
    """
    n = cycle.dim
    if n not in (1, 2, 3):
        raise ValueError("subdivision implemented for dimensions 1..3")
    new_vertices = list(cycle.vertices)
    midpoint_ids: dict = {}

    def midpoint_corner(ca: Corner, cb: Corner) -> Corner:
        (vid_a, vid_b, g), key = _edge_class(cycle, ca, cb)
        if key not in midpoint_ids:
            ua = cycle.vertices[vid_a]
            ub = act(g, cycle.vertices[vid_b])
            combo = ua.scale_add(1.0, ub, 1.0)
            norm = np.sqrt(sum(float(v @ v) for v in combo.values()))
            entries = {h: v / norm for h, v in combo.items() if np.any(v != 0.0)}
            new_vertices.append(SphereVector(cycle.group, entries, ua.payload_dim))
            midpoint_ids[key] = len(new_vertices) - 1
        vid = midpoint_ids[key]
        # the canonical rep is pivoted at one endpoint; restore this simplex's twist
        if (ca.vertex, cb.vertex) == (vid_a, vid_b) and ca.twist.inv() * cb.twist == g:
            return Corner(vid, ca.twist)
        return Corner(vid, cb.twist)

    new_simplices: list[Simplex] = []
    for s in cycle.simplices:
        c = s.corners
        if n == 1:
            m01 = midpoint_corner(c[0], c[1])
            new_simplices.append(Simplex((c[0], m01), s.multiplicity))
            new_simplices.append(Simplex((m01, c[1]), s.multiplicity))
        elif n == 2:
            m01 = midpoint_corner(c[0], c[1])
            m12 = midpoint_corner(c[1], c[2])
            m02 = midpoint_corner(c[0], c[2])
            new_simplices.extend(
                [
                    Simplex((c[0], m01, m02), s.multiplicity),
                    Simplex((m01, c[1], m12), s.multiplicity),
                    Simplex((m02, m12, c[2]), s.multiplicity),
                    Simplex((m01, m12, m02), s.multiplicity),
                ]
            )
        else:
            mids = {(i, j): midpoint_corner(c[i], c[j]) for i in range(4) for j in range(i + 1, 4)}
            for i in range(4):
                others = [j for j in range(4) if j != i]
                corner_tet = [None, None, None, None]
                corner_tet[i] = c[i]
                for j in others:
                    corner_tet[j] = mids[tuple(sorted((i, j)))]
                new_simplices.append(Simplex(tuple(corner_tet), s.multiplicity))
            # central octahedron split along the (m01, m23) diagonal; in this
            # equatorial cyclic order every piece inherits the parent's sign
            # (an affine-invariant fact of midpoint subdivision).
            m01, m23 = mids[(0, 1)], mids[(2, 3)]
            m02, m03 = mids[(0, 2)], mids[(0, 3)]
            m12, m13 = mids[(1, 2)], mids[(1, 3)]
            for tet in (
                (m01, m23, m02, m03),
                (m01, m23, m03, m13),
                (m01, m23, m13, m12),
                (m01, m23, m12, m02),
            ):
                new_simplices.append(Simplex(tet, s.multiplicity))
    return SimplicialCycle(cycle.group, new_vertices, new_simplices)


# -- cone filling -------------------------------------------------------------------


def cone_fill(apex: SphereVector, boundary: SimplicialCycle, order: int = DEFAULT_ORDER) -> SimplicialCycle:
    """Cone from the apex over an (n-1)-cycle; boundary(cone) equals the input.

    Requires the apex within chordal distance < 2 of every corner lift.
    Gluing twists must be trivial: the cone construction lives in the sphere
    itself, not the quotient.
    """
    e = boundary.group.identity
    for s in boundary.simplices:
        for c in s.corners:
            if not c.twist.is_identity():
                raise ValueError("cone filling needs a trivially glued boundary")
            if chordal_distance(apex, boundary.lift(c)) >= 2.0 - 1e-12:
                raise ValueError("apex is antipodal to a boundary corner")
    vertices = list(boundary.vertices) + [apex]
    apex_corner = Corner(len(vertices) - 1, e)
    simplices = [
        Simplex((apex_corner,) + s.corners, s.multiplicity) for s in boundary.simplices
    ]
    return SimplicialCycle(boundary.group, vertices, simplices)


def cone_constant(cone: SimplicialCycle, boundary: SimplicialCycle, order: int = DEFAULT_ORDER) -> float:
    """Reported constant mass(cone) / (diam(spt boundary) * mass(boundary))."""
    mb = mass(boundary, order).total
    mc = mass(cone, order).total
    diam = boundary.support_diameter()
    if mb == 0.0 or diam == 0.0:
        return np.inf
    return mc / (diam * mb)
