"""Hyperboloid-model geometry of H^n and Fuchsian fundamental polygons.

Points are numpy arrays x in R^{n+1} on the sheet <x,x>_L = -1, x_0 > 0,
where <.,.>_L is the Lorentzian form of signature (-,+,...,+).  Geodesic
simplices are radial (Lorentz) projections of Euclidean hulls, so their
volumes are computed with the same Gram-determinant quadrature used on the
Hilbert sphere.
"""

from dataclasses import dataclass

import numpy as np

from .quadrature import barycentric, simplex_rule

HPoint = np.ndarray

POINT_TOL = 1e-10


def minkowski_metric(dim: int) -> np.ndarray:
    j = np.eye(dim + 1)
    j[0, 0] = -1.0
    return j


def lorentz_dot(x: np.ndarray, y: np.ndarray) -> float | np.ndarray:
    return -x[..., 0] * y[..., 0] + np.sum(x[..., 1:] * y[..., 1:], axis=-1)


def base_point(n: int) -> HPoint:
    p = np.zeros(n + 1)
    p[0] = 1.0
    return p


def check_point(x: np.ndarray, tol: float = POINT_TOL) -> None:
    if abs(lorentz_dot(x, x) + 1.0) > tol or x[0] <= 0:
        raise ValueError("not a hyperboloid point within tolerance")


def normalize_point(x: np.ndarray) -> HPoint:
    """Radial projection of a timelike vector onto the hyperboloid sheet."""
    q = -lorentz_dot(x, x)
    if q <= 0:
        raise ValueError("vector is not timelike")
    y = x / np.sqrt(q)
    return y if y[0] > 0 else -y


def hyp_distance(x: np.ndarray, y: np.ndarray) -> float | np.ndarray:
    c = np.maximum(-lorentz_dot(x, y), 1.0)
    return np.arccosh(c)


def project_tangent(x: HPoint, v: np.ndarray) -> np.ndarray:
    return v + lorentz_dot(v, x) * x


def tangent_norm(v: np.ndarray) -> float:
    return float(np.sqrt(max(lorentz_dot(v, v), 0.0)))


def hyp_exp(x: HPoint, v: np.ndarray, t: float = 1.0) -> HPoint:
    r = tangent_norm(v) * t
    if r == 0.0:
        return x.copy()
    u = v / tangent_norm(v)
    return np.cosh(r) * x + np.sinh(r) * u


def hyp_log(x: HPoint, y: HPoint) -> np.ndarray:
    d = float(hyp_distance(x, y))
    if d == 0.0:
        return np.zeros_like(x)
    u = y - np.cosh(d) * x
    nu = tangent_norm(u)
    if nu == 0.0:
        return np.zeros_like(x)
    return (d / nu) * u


def tangent_basis(x: HPoint) -> np.ndarray:
    """Rows form a Lorentz-orthonormal basis of T_x H^n."""
    n = x.shape[0] - 1
    basis = []
    for k in range(1, n + 1):
        e = np.zeros(n + 1)
        e[k] = 1.0
        v = project_tangent(x, e)
        for b in basis:
            v = v - lorentz_dot(v, b) * b
        nv = tangent_norm(v)
        if nv > 1e-12:
            basis.append(v / nv)
    if len(basis) < n:
        e = np.zeros(n + 1)
        e[0] = 1.0
        v = project_tangent(x, e)
        for b in basis:
            v = v - lorentz_dot(v, b) * b
        basis.append(v / tangent_norm(v))
    return np.array(basis)


def _orthonormal_frame(p: HPoint, toward: HPoint) -> np.ndarray:
    """Columns [p, t, s]: point, unit tangent toward `toward`, completing normal."""
    t = hyp_log(p, toward)
    t = t / tangent_norm(t)
    j = minkowski_metric(2)
    s = j @ np.cross(p, t)
    s = s / tangent_norm(s)
    frame = np.column_stack([p, t, s])
    if np.linalg.det(frame) < 0:
        frame[:, 2] = -frame[:, 2]
    return frame


def isometry_from_segments(p: HPoint, q: HPoint, p2: HPoint, q2: HPoint) -> np.ndarray:
    """Orientation-preserving isometry of H^2 sending (p, q) to (p2, q2).

    Requires d(p, q) = d(p2, q2); the result is the unique element of
    SO+(2,1) matching both points.
    """
    f1 = _orthonormal_frame(p, q)
    f2 = _orthonormal_frame(p2, q2)
    j = minkowski_metric(2)
    # Lorentz-orthonormal frame inverse: F^{-1} = J F^T J.
    return f2 @ (j @ f1.T @ j)


def lorentz_gram_density(corners: np.ndarray, lam: np.ndarray) -> np.ndarray:
    """sqrt(det Gram) of the radial-projection simplex at barycentric nodes.

    corners: (k+1, n+1) hyperboloid points spanning a geodesic k-simplex;
    lam: (K, k+1) barycentric coordinates.  Returns the (K,) volume density
    of the map lam -> normalize_point(sum lam_i corners_i).
    """
    j = minkowski_metric(corners.shape[1] - 1)
    x = lam @ corners  # (K, n+1)
    q = -np.einsum("ki,ij,kj->k", x, j, x)
    s = np.sqrt(q)
    f = x / s[:, None]
    w = corners[1:] - corners[0]  # (k, n+1)
    wj = w @ j
    fw = f @ wj.T  # (K, k) = <f, w_i>_L
    ww = w @ j @ w.T  # (k, k)
    # <f,f>_L = -1, so the tangential projection adds (not subtracts) fw fw^T.
    gram = (ww[None, :, :] + fw[:, :, None] * fw[:, None, :]) / q[:, None, None]
    sign, logdet = np.linalg.slogdet(gram)
    dens = np.where(sign > 0, np.exp(0.5 * logdet), 0.0)
    return dens


def triangle_area(corners: np.ndarray, order: int = 12) -> float:
    pts, wts = simplex_rule(2, order)
    lam = barycentric(pts)
    dens = lorentz_gram_density(corners, lam)
    return float(np.dot(wts, dens))


def hyp_midpoint(p: HPoint, q: HPoint) -> HPoint:
    return normalize_point(0.5 * (p + q))


@dataclass(frozen=True)
class SidePairing:
    """Gluing isometry carrying side `source` onto side `target`.

    generator: index into the (a_1, b_1, ..., a_g, b_g) list; sign -1 marks
    the inverse of that generator.
    """

    source: int
    target: int
    generator: int
    sign: int
    matrix: np.ndarray


@dataclass(frozen=True)
class FundamentalPolygon:
    """Regular 4g-gon with the standard genus-g commutator side pattern."""

    genus: int
    radius: float
    vertices: np.ndarray  # (4g, 3)
    pairings: tuple[SidePairing, ...]
    generators: tuple[np.ndarray, ...]  # 2g matrices (a_1, b_1, ..., a_g, b_g)

    @property
    def num_sides(self) -> int:
        return 4 * self.genus

    def side(self, k: int) -> tuple[HPoint, HPoint]:
        m = self.num_sides
        return self.vertices[k % m], self.vertices[(k + 1) % m]

    def area(self, order: int = 16, levels: int = 1) -> float:
        o = base_point(2)
        tris = [np.array([o, *self.side(k)]) for k in range(self.num_sides)]
        for _ in range(levels):
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
        return sum(triangle_area(t, order) for t in tris)

    def vertex_angle(self) -> float:
        v_prev, v, v_next = self.vertices[0], self.vertices[1], self.vertices[2]
        u1 = hyp_log(v, v_prev)
        u2 = hyp_log(v, v_next)
        c = lorentz_dot(u1, u2) / (tangent_norm(u1) * tangent_norm(u2))
        return float(np.arccos(np.clip(c, -1.0, 1.0)))

    def relator_defect(self) -> float:
        """sup-norm distance of prod_i [a_i, b_i] from the identity matrix."""
        m = np.eye(3)
        for i in range(self.genus):
            a = self.generators[2 * i]
            b = self.generators[2 * i + 1]
            m = m @ a @ b @ np.linalg.inv(a) @ np.linalg.inv(b)
        return float(np.max(np.abs(m - np.eye(3))))


def _polygon_vertices(genus: int, radius: float) -> np.ndarray:
    m = 4 * genus
    th = 2.0 * np.pi * np.arange(m) / m
    return np.column_stack(
        [np.full(m, np.cosh(radius)), np.sinh(radius) * np.cos(th), np.sinh(radius) * np.sin(th)]
    )


def _vertex_angle_at_radius(genus: int, radius: float) -> float:
    verts = _polygon_vertices(genus, radius)
    u1 = hyp_log(verts[1], verts[0])
    u2 = hyp_log(verts[1], verts[2])
    c = lorentz_dot(u1, u2) / (tangent_norm(u1) * tangent_norm(u2))
    return float(np.arccos(np.clip(c, -1.0, 1.0)))


def regular_polygon_radius(genus: int, tol: float = 1e-12) -> float:
    """Circumradius at which the regular 4g-gon has vertex angle 2*pi/4g.

    Solved by bisection; the vertex angle decreases from the Euclidean value
    (> 2*pi/4g for g >= 2) to 0 as the radius grows.
    """
    if genus < 2:
        raise ValueError("genus must be >= 2")
    target = 2.0 * np.pi / (4 * genus)
    lo, hi = 1e-6, 1.0
    while _vertex_angle_at_radius(genus, hi) > target:
        hi *= 2.0
        if hi > 64:
            raise RuntimeError("failed to bracket the polygon radius")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if _vertex_angle_at_radius(genus, mid) > target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _side_label_pattern(genus: int) -> list[tuple[int, int]]:
    """Side k -> (generator index, +1/-1) for the word a1 b1 a1' b1' a2 ..."""
    labels = []
    for i in range(genus):
        labels.append((2 * i, 1))
        labels.append((2 * i + 1, 1))
        labels.append((2 * i, -1))
        labels.append((2 * i + 1, -1))
    return labels


def fundamental_polygon(genus: int) -> FundamentalPolygon:
    """Regular 4g-gon with commutator-pattern side pairings.

    The pairing for a letter maps the side carrying its inverse label onto
    the side carrying the letter, with reversed boundary orientation, so the
    product of commutators of the resulting generators is the identity.
    """
    radius = regular_polygon_radius(genus)
    verts = _polygon_vertices(genus, radius)
    m = 4 * genus
    labels = _side_label_pattern(genus)
    side_of = {}
    for k, lab in enumerate(labels):
        side_of[lab] = k

    generators: list[np.ndarray | None] = [None] * (2 * genus)
    pairings: list[SidePairing] = []
    for gi in range(2 * genus):
        k_pos = side_of[(gi, 1)]
        k_neg = side_of[(gi, -1)]
        p, q = verts[k_neg], verts[(k_neg + 1) % m]
        p2, q2 = verts[(k_pos + 1) % m], verts[k_pos]
        mat = isometry_from_segments(p, q, p2, q2)
        inv = np.linalg.inv(mat)
        # Taking the inverse map as the official b_i generator makes the
        # relator come out as prod_i [a_i, b_i] for this vertex ordering.
        if gi % 2 == 0:
            generators[gi] = mat
            pairings.append(SidePairing(source=k_neg, target=k_pos, generator=gi, sign=1, matrix=mat))
            pairings.append(SidePairing(source=k_pos, target=k_neg, generator=gi, sign=-1, matrix=inv))
        else:
            generators[gi] = inv
            pairings.append(SidePairing(source=k_neg, target=k_pos, generator=gi, sign=-1, matrix=mat))
            pairings.append(SidePairing(source=k_pos, target=k_neg, generator=gi, sign=1, matrix=inv))
    pairings.sort(key=lambda sp: sp.source)
    return FundamentalPolygon(
        genus=genus,
        radius=radius,
        vertices=verts,
        pairings=tuple(pairings),
        generators=tuple(generators),
    )
