"""Poisson embeddings of hyperbolic space into the l2 unit sphere.

For c above the volume entropy, x maps to the normalized kernel
exp(-c/2 * dist(x, .)).  The module computes the pull-back metric density
(equal to c^2/(4n) per unit direction on H^n), and discretizes the induced
map of a genus-g surface into the sphere over its fundamental group: vertex
x gets the vector of square-rooted tile integrals of exp(-c rho_x) over the
translated fundamental polygon, truncated to a word ball and renormalized.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss

from .cycles import Corner, SimplicialCycle, Simplex
from .groups import GroupElement, MarkedGroup
from .hyperboloid import (
    FundamentalPolygon,
    base_point,
    hyp_distance,
    hyp_midpoint,
    lorentz_dot,
    lorentz_gram_density,
    minkowski_metric,
    tangent_basis,
)
from .quadrature import barycentric, simplex_rule
from .sphere import SphereVector


def alpha_norm_squared(c: float, n: int) -> float:
    """Closed form of ||exp(-c/2 rho_x)||^2 over H^n (n = 2, 3)."""
    if n == 2:
        if c <= 1.0:
            raise ValueError("needs c > entropy = 1")
        return 2.0 * np.pi / (c * c - 1.0)
    if n == 3:
        if c <= 2.0:
            raise ValueError("needs c > entropy = 2")
        return 8.0 * np.pi / (c * (c * c - 4.0))
    raise ValueError("closed forms implemented for n = 2, 3")


def _radial_integral(c: float, n: int, points: int = 160) -> float:
    """int_0^inf exp(-c r) sinh(r)^(n-1) dr by substitution s = 1 - e^{-kappa r}."""
    kappa = c - (n - 1)
    x, w = leggauss(points)
    s = 0.5 * (x + 1.0)
    ws = 0.5 * w
    r = -np.log1p(-s) / kappa
    # log of exp(-c r) sinh^{n-1}(r) / (kappa (1 - s)); bounded as s -> 1
    log_sinh = r + np.log1p(-np.exp(-2.0 * r)) - np.log(2.0)
    log_f = -c * r + (n - 1) * log_sinh - np.log(kappa) - np.log1p(-s)
    return float(np.dot(ws, np.exp(log_f)))


def poisson_pullback(
    c: float,
    x: np.ndarray | None = None,
    v: np.ndarray | None = None,
    n: int = 2,
    radial_points: int = 160,
    angular_points: int = 64,
) -> float:
    """||d Poisson_c(v)||^2 for a unit tangent v at x in H^n.

    Radial-angular quadrature of (c^2/4) int |d rho_y(v)|^2 P_c^2 dvol with
    the exact closed-form normalization; equals c^2/(4n) by isotropy.
    """
    if c <= n - 1:
        raise ValueError("normalization diverges for c <= n - 1")
    if x is None:
        x = base_point(n)
    frame = tangent_basis(x)
    if v is None:
        v = frame[0]
    coords = np.array([lorentz_dot(v, e) for e in frame])
    if n == 2:
        th = 2.0 * np.pi * np.arange(angular_points) / angular_points
        direc = np.stack([np.cos(th), np.sin(th)], axis=1)
        ang_w = np.full(angular_points, 2.0 * np.pi / angular_points)
    elif n == 3:
        nodes, wts = leggauss(angular_points)
        th = 2.0 * np.pi * np.arange(angular_points) / angular_points
        cosphi = nodes
        sinphi = np.sqrt(1.0 - cosphi**2)
        direc = []
        ang_w = []
        for cp, sp, wphi in zip(cosphi, sinphi, wts):
            for t in th:
                direc.append([sp * np.cos(t), sp * np.sin(t), cp])
                ang_w.append(wphi * 2.0 * np.pi / angular_points)
        direc = np.array(direc)
        ang_w = np.array(ang_w)
    else:
        raise ValueError("pull-back implemented for n = 2, 3")
    angular = float(np.dot(ang_w, (direc @ coords) ** 2))
    radial = _radial_integral(c, n, radial_points)
    return (c * c / 4.0) * angular * radial / alpha_norm_squared(c, n)


# -- fundamental-polygon meshes -------------------------------------------------


@dataclass
class PolygonMesh:
    """Deterministic fan triangulation of the fundamental polygon.

    Vertices on paired sides carry quotient identifications: vertex_class[i]
    is (canonical vertex index, twist) with position[i] = twist * position."""

    points: np.ndarray  # (V, 3) hyperboloid points
    triangles: list[tuple[int, int, int]]
    vertex_class: list[tuple[int, GroupElement]]
    canonical: list[int]  # canonical vertex ids in order


def polygon_mesh(polygon: FundamentalPolygon, group: MarkedGroup, level: int) -> PolygonMesh:
    o = base_point(2)
    pts: list[np.ndarray] = [o] + [polygon.vertices[k] for k in range(polygon.num_sides)]
    tris = [(0, 1 + k, 1 + (k + 1) % polygon.num_sides) for k in range(polygon.num_sides)]

    def add_point(p: np.ndarray, cache: dict) -> int:
        key = tuple(np.round(p / 1e-9).astype(np.int64))
        if key in cache:
            return cache[key]
        pts.append(p)
        cache[key] = len(pts) - 1
        return len(pts) - 1

    for _ in range(level):
        cache: dict = {}
        for i, p in enumerate(pts):
            cache[tuple(np.round(p / 1e-9).astype(np.int64))] = i
        new_tris = []
        for (i, j, k) in tris:
            mij = add_point(hyp_midpoint(pts[i], pts[j]), cache)
            mjk = add_point(hyp_midpoint(pts[j], pts[k]), cache)
            mik = add_point(hyp_midpoint(pts[i], pts[k]), cache)
            new_tris += [(i, mij, mik), (mij, j, mjk), (mik, mjk, k), (mij, mjk, mik)]
        tris = new_tris
    points = np.array(pts)

    # identify boundary vertices across side pairings (union-find with twists)
    parent = list(range(len(points)))
    twist = [group.identity] * len(points)

    def find(i: int) -> tuple[int, GroupElement]:
        # invariant: pos(i) = twist[i] * pos(parent[i]); twist of a root is e
        if parent[i] == i:
            return i, twist[i]
        root, t = find(parent[i])
        parent[i] = root
        twist[i] = group.mul(twist[i], t)
        return root, twist[i]

    def union(i: int, j: int, g: GroupElement) -> None:
        # glue with pos(j) = g * pos(i)
        ri, ti = find(i)
        rj, tj = find(j)
        if ri == rj:
            return
        parent[rj] = ri
        twist[rj] = group.mul(group.inv(tj), group.mul(g, ti))

    m = polygon.num_sides
    side_points: dict[int, list[int]] = {k: [] for k in range(m)}
    for k in range(m):
        p, q = polygon.side(k)
        dpq = hyp_distance(p, q)
        for i, pt in enumerate(points):
            if hyp_distance(p, pt) + hyp_distance(pt, q) <= dpq + 1e-9:
                side_points[k].append(i)
    for sp in polygon.pairings:
        letter = (sp.generator + 1) * sp.sign
        g = group.generator(letter)
        gm = sp.matrix
        for i in side_points[sp.source]:
            img = gm @ points[i]
            for j in side_points[sp.target]:
                if float(np.max(np.abs(points[j] - img))) < 1e-6:
                    union(i, j, g)
                    break

    classes: list[tuple[int, GroupElement]] = []
    canonical: list[int] = []
    for i in range(len(points)):
        root, t = find(i)
        if root == i:
            canonical.append(i)
        classes.append((root, t))
    # verify the twist bookkeeping geometrically
    for i, (root, t) in enumerate(classes):
        img = t.matrix @ points[root] if t.matrix is not None else points[root]
        if float(np.max(np.abs(img - points[i]))) > 1e-6:
            raise AssertionError("boundary identification twist mismatch")
    return PolygonMesh(points=points, triangles=tris, vertex_class=classes, canonical=canonical)


# -- the embedding ----------------------------------------------------------------


class PoissonEmbedder:
    """Discretized Poisson embedding of a genus-g surface over its group.

    Precomputes the quadrature mesh of the fundamental polygon and the word
    ball; per (x, c) the vector of tile integrals costs one matrix product.
    """

    def __init__(
        self,
        group: MarkedGroup,
        radius: int = 4,
        mesh_level: int = 3,
        tile_level: int = 1,
        tile_order: int = 6,
    ):
        if group.kind != "surface":
            raise ValueError("Poisson embeddings are built over surface groups")
        self.group = group
        self.polygon: FundamentalPolygon = group.polygon
        self.radius = radius
        self.ball = group.ball(radius)
        self.mesh = polygon_mesh(self.polygon, group, mesh_level)
        self._inv_mats = np.stack([g.inv().matrix for g in self.ball])
        self._tile_nodes, self._tile_weights = self._build_tile_rule(tile_level, tile_order)
        j = minkowski_metric(2)
        self._nodes_j = (self._tile_nodes @ j).T  # (3, Nq)

    def _build_tile_rule(self, level: int, order: int) -> tuple[np.ndarray, np.ndarray]:
        o = base_point(2)
        tris = [np.array([o, *self.polygon.side(k)]) for k in range(self.polygon.num_sides)]
        for _ in range(level):
            split = []
            for t in tris:
                m01 = hyp_midpoint(t[0], t[1])
                m12 = hyp_midpoint(t[1], t[2])
                m02 = hyp_midpoint(t[0], t[2])
                split += [
                    np.array([t[0], m01, m02]),
                    np.array([m01, t[1], m12]),
                    np.array([m02, m12, t[2]]),
                    np.array([m01, m12, m02]),
                ]
            tris = split
        pts, wts = simplex_rule(2, order)
        lam = barycentric(pts)
        nodes = []
        weights = []
        for t in tris:
            x = lam @ t
            q = -np.einsum("ki,ki->k", x @ minkowski_metric(2), x)
            nodes.append(x / np.sqrt(q)[:, None])
            weights.append(wts * lorentz_gram_density(t, lam))
        return np.vstack(nodes), np.concatenate(weights)

    def tile_integrals(self, x: np.ndarray, c: float) -> np.ndarray:
        """int_{gamma D} exp(-c dist(x, .)) dvol for every gamma in the ball."""
        y = np.einsum("gij,j->gi", self._inv_mats, x)
        cosh_d = np.maximum(-(y @ self._nodes_j), 1.0)
        return np.exp(-c * np.arccosh(cosh_d)) @ self._tile_weights

    def raw_amplitudes(self, x: np.ndarray, c: float) -> np.ndarray:
        """Unnormalized entries sqrt(tile / ||alpha||^2) in ball order."""
        return np.sqrt(self.tile_integrals(x, c) / alpha_norm_squared(c, 2))

    def vector(self, x: np.ndarray, c: float) -> tuple[SphereVector, float]:
        """Renormalized SphereVector at x and the discarded tail mass."""
        tiles = self.tile_integrals(x, c)
        total = float(tiles.sum())
        tail = 1.0 - total / alpha_norm_squared(c, 2)
        amps = np.sqrt(tiles / total)
        entries = {g: np.array([a]) for g, a in zip(self.ball, amps) if a > 0.0}
        return SphereVector(self.group, entries, 1), tail

    def cycle(self, c: float, tail_bound: float = 0.9) -> tuple[SimplicialCycle, float]:
        """The embedded fundamental-domain cycle at parameter c.

        Vertices are the canonical mesh classes; boundary mesh vertices enter
        simplices through their side-pairing twists, so the complex closes up
        over the quotient (boundary residual 0).
        """
        index_of = {v: i for i, v in enumerate(self.mesh.canonical)}
        vertices = []
        worst_tail = 0.0
        for v in self.mesh.canonical:
            vec, tail = self.vector(self.mesh.points[v], c)
            worst_tail = max(worst_tail, tail)
            vertices.append(vec)
        if worst_tail > tail_bound:
            raise ValueError(
                f"truncation tail {worst_tail:.3f} exceeds bound {tail_bound}; raise the ball radius"
            )
        simplices = []
        for (i, j, k) in self.mesh.triangles:
            corners = []
            for idx in (i, j, k):
                root, t = self.mesh.vertex_class[idx]
                corners.append(Corner(index_of[root], t))
            simplices.append(Simplex(tuple(corners), 1))
        return SimplicialCycle(self.group, vertices, simplices), worst_tail

    def equivariance_defect(self, c: float, mesh_vertex: int) -> float:
        """Check vector(g x) = g . vector(x) on raw amplitudes for a glued vertex.

        Compares the square-rooted tile integrals of a boundary mesh vertex
        against the translated amplitudes of its canonical representative on
        the common truncated support.
        """
        root, t = self.mesh.vertex_class[mesh_vertex]
        if t.is_identity() and root == mesh_vertex:
            return 0.0
        a_root = self.raw_amplitudes(self.mesh.points[root], c)
        a_here = self.raw_amplitudes(self.mesh.points[mesh_vertex], c)
        here = {g: a for g, a in zip(self.ball, a_here)}
        worst = 0.0
        for g, a in zip(self.ball, a_root):
            target = t * g
            if target in here:
                worst = max(worst, abs(here[target] - a))
        return worst


# -- exact ambient Gram mass -----------------------------------------------------


def two_center_integral(c: float, p: np.ndarray, q: np.ndarray, radial_points: int = 96, angular_points: int = 96) -> float:
    """int over H^2 of exp(-c/2 (dist(p,z) + dist(q,z))) dvol(z).

    Polar quadrature around the midpoint with the same tail substitution as
    the norm integral; equals 2 pi/(c^2-1) when p = q.
    """
    if c <= 1.0:
        raise ValueError("needs c > 1")
    m = hyp_midpoint(p, q) if float(hyp_distance(p, q)) > 0 else p
    frame = tangent_basis(m)
    kappa = c - 1.0
    x, w = leggauss(radial_points)
    s = 0.5 * (x + 1.0)
    ws = 0.5 * w
    r = -np.log1p(-s) / kappa
    dr = 1.0 / (kappa * (1.0 - s))
    th = 2.0 * np.pi * np.arange(angular_points) / angular_points
    dirs = np.cos(th)[:, None] * frame[0] + np.sin(th)[:, None] * frame[1]  # (A, 3)
    # z(r, theta) on the hyperboloid
    z = np.cosh(r)[:, None, None] * m[None, None, :] + np.sinh(r)[:, None, None] * dirs[None, :, :]
    j = np.array([-1.0, 1.0, 1.0])
    dp = np.arccosh(np.maximum(-(z * (j * p)).sum(-1), 1.0))
    dq = np.arccosh(np.maximum(-(z * (j * q)).sum(-1), 1.0))
    vals = np.exp(-0.5 * c * (dp + dq))
    radial_weight = ws * np.sinh(r) * dr
    return float((vals.mean(axis=1) * 2.0 * np.pi * radial_weight).sum())


def exact_gram_mass(embedder: PoissonEmbedder, c: float, order: int = 8) -> float:
    """Mass of the inscribed exact Poisson embedding (no truncation).

    Corner inner products of the untruncated equivariant embedding x ->
    normalized exp(-c/2 dist(x, .)) are closed two-center integrals, and the
    simplex mass only needs the corner Gram, so this evaluates the paper's
    ambient cycle with machine-level support: its mass converges to
    (c^2/8) * Area as the mesh refines.
    """
    from .cycles import density_from_gram

    alpha2 = alpha_norm_squared(c, 2)
    mesh = embedder.mesh
    pts, wts = simplex_rule(2, order)
    lam = barycentric(pts)
    cache: dict = {}

    def inner(pa: np.ndarray, pb: np.ndarray) -> float:
        d = float(hyp_distance(pa, pb))
        if d < 1e-14:
            return 1.0
        key = round(d / 1e-12)
        if key not in cache:
            cache[key] = two_center_integral(c, pa, pb) / alpha2
        return cache[key]

    total = 0.0
    for (i, jx, k) in mesh.triangles:
        pos = [mesh.points[i], mesh.points[jx], mesh.points[k]]
        G = np.empty((3, 3))
        for a in range(3):
            for b in range(a, 3):
                G[a, b] = G[b, a] = inner(pos[a], pos[b])
        dens = density_from_gram(G, lam)
        total += float(np.dot(wts, dens))
    return total


def orbit_entropy_estimate(group: MarkedGroup, r_max: int = 6, grid: int = 8) -> float:
    """Least-squares slope of log orbit-ball counts against hyperbolic radius.

    Counts orbit points of the word ball inside hyperbolic balls up to the
    largest certified radius (the closest orbit point of the outermost word
    sphere); tends to the volume entropy 1 of curvature -1.
    """
    if group.kind != "surface":
        raise ValueError("orbit entropy estimates need a surface-group realization")
    if r_max < 3:
        raise ValueError("need r_max >= 3")
    ball = group.ball(r_max)
    dists = np.array([float(np.arccosh(max(g.matrix[0, 0], 1.0))) for g in ball])
    outer = [d for g, d in zip(ball, dists) if g.word_length == r_max]
    r_cut = min(outer)
    radii = np.linspace(0.6 * r_cut, r_cut, grid)
    counts = np.array([(dists <= r).sum() for r in radii])
    slope = np.polyfit(radii, np.log(counts), 1)[0]
    return float(slope)
