"""Barycenter maps on H^n driven by weighted distance functionals.

For an admissible scalar unit vector f and a discrete reference measure mu
supported on a group orbit, the functional B_f(x) = sum_g f(g)^2 int
dist(w, x) dmu_g(w) is strictly convex; its unique minimizer is the
barycenter of f.  At the minimizer the first-order moment matrix H (squared
distance-gradient components, trace 1) and the distance-Hessian matrix K
control the Jacobian of the barycenter map: |Jac| <= 2^n sqrt(det H)/det K,
which for curvature -1 is at most (4n/h^2)^{n/2} with h = n-1.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import AdmissibilityError
from .groups import GroupElement, MarkedGroup, free_group
from .hyperboloid import (
    base_point,
    hyp_distance,
    hyp_exp,
    hyp_log,
    lorentz_dot,
    tangent_basis,
)
from .sphere import SphereVector, abs_map

ATOM_GUARD = 1e-3


@dataclass
class ReferenceMeasure:
    """Probability measure on an H^n orbit with exponential decay weights."""

    group: MarkedGroup
    rep: Callable[[GroupElement], np.ndarray]
    base: np.ndarray
    atom_elements: list[GroupElement]
    atom_positions: np.ndarray  # (A, n+1)
    weights: np.ndarray
    beta: float
    dim: int

    @staticmethod
    def from_orbit(
        group: MarkedGroup,
        rep: Callable[[GroupElement], np.ndarray],
        dim: int,
        radius: int,
        beta: float,
        weight_floor: float = 1e-14,
    ) -> "ReferenceMeasure":
        o = base_point(dim)
        elements = group.ball(radius)
        positions = np.array([rep(g) @ o for g in elements])
        d = np.array([float(hyp_distance(o, p)) for p in positions])
        w = np.exp(-beta * d)
        keep = w / w.max() >= weight_floor
        elements = [g for g, k in zip(elements, keep) if k]
        positions = positions[keep]
        w = w[keep]
        w = w / w.sum()
        return ReferenceMeasure(
            group=group,
            rep=rep,
            base=o,
            atom_elements=elements,
            atom_positions=positions,
            weights=w,
            beta=beta,
            dim=dim,
        )


def surface_measure(group: MarkedGroup, radius: int = 4, beta: float = 3.0) -> ReferenceMeasure:
    """Orbit measure of a genus-g surface group acting on H^2 (entropy 1)."""
    if group.kind != "surface":
        raise ValueError("needs a surface-group realization")
    return ReferenceMeasure.from_orbit(group, lambda g: g.matrix, 2, radius, beta)


def loxodromic_free_measure(radius: int = 3, beta: float = 4.0, length: float = 1.5) -> ReferenceMeasure:
    """Quasi-lattice in H^3: a free group of rank 2 acting by two loxodromics.

    The generators translate along orthogonal axes; only the atom set enters
    the barycenter computations, so faithfulness is checked numerically
    (pairwise atom separation), not assumed.
    """
    group = free_group(2)

    def boost(axis: int) -> np.ndarray:
        m = np.eye(4)
        m[0, 0] = m[axis, axis] = np.cosh(length)
        m[0, axis] = m[axis, 0] = np.sinh(length)
        return m

    mats = {1: boost(1), -1: np.linalg.inv(boost(1)), 2: boost(2), -2: np.linalg.inv(boost(2))}

    def rep(g: GroupElement) -> np.ndarray:
        m = np.eye(4)
        for letter in g.word:
            m = m @ mats[letter]
        return m

    mu = ReferenceMeasure.from_orbit(group, rep, 3, radius, beta)
    pos = mu.atom_positions
    for i in range(len(pos)):
        for j in range(i + 1, len(pos)):
            if float(hyp_distance(pos[i], pos[j])) < 1e-6:
                raise AdmissibilityError("loxodromic orbit points collide; not a quasi-lattice")
    return mu


@dataclass
class BarycenterState:
    f: SphereVector
    x_star: np.ndarray
    residual: float
    H: np.ndarray
    K: np.ndarray
    atom_min_dist: float
    value: float


def _cloud(f: SphereVector, mu: ReferenceMeasure) -> tuple[np.ndarray, np.ndarray]:
    """Atom positions and masses of sum_g f(g)^2 mu_g."""
    f = abs_map(f)
    positions = []
    masses = []
    for g, payload in f.entries.items():
        mat = mu.rep(g)
        positions.append(mu.atom_positions @ mat.T)
        masses.append(float(payload @ payload) * mu.weights)
    return np.vstack(positions), np.concatenate(masses)


def b_value(f: SphereVector, mu: ReferenceMeasure, x: np.ndarray) -> float:
    """The convex functional: mass-weighted total distance to x."""
    pos, m = _cloud(f, mu)
    return float(m @ hyp_distance(pos, x))


def _grad_terms(pos: np.ndarray, m: np.ndarray, x: np.ndarray):
    """Distances, unit tangents toward the atoms, and grad of sum m * dist."""
    d = hyp_distance(pos, x)
    u = pos - np.cosh(d)[:, None] * x
    ln = np.sqrt(np.maximum(np.einsum("ai,ai->a", u[:, 1:], u[:, 1:]) - u[:, 0] ** 2, 1e-300))
    unit = u / ln[:, None]
    # atoms at x itself (d ~ 0) contribute no smooth gradient direction
    grad = -(m * (d > 1e-12)) @ unit
    return d, unit, grad


def solve_barycenter(
    f: SphereVector,
    mu: ReferenceMeasure,
    tol: float = 1e-10,
    max_iters: int = 400,
) -> BarycenterState:
    """Minimize B_f: Armijo gradient descent then Newton polish.

    Raises AdmissibilityError when the atoms seen by f degenerate (aligned
    support, condition (3)) or when the residual target is not reached.
    """
    pos, m = _cloud(f, mu)
    if m.sum() <= 0:
        raise AdmissibilityError("empty admissible cloud")
    frame_dim = mu.dim
    # chordal-mean start, radially projected
    x = pos.T @ m
    q = -lorentz_dot(x, x)
    if q <= 0:
        x = mu.base.copy()
    else:
        x = x / np.sqrt(q)
        if x[0] < 0:
            x = -x
    value = float(m @ hyp_distance(pos, x))
    step0 = 1.0
    for it in range(max_iters):
        d, unit, grad = _grad_terms(pos, m, x)
        gn = float(np.sqrt(max(lorentz_dot(grad, grad), 0.0)))
        if gn < 1e-6:
            break
        direction = -grad / gn
        step = step0
        improved = False
        while step > 1e-14:
            cand = hyp_exp(x, direction, step * gn)
            v = float(m @ hyp_distance(pos, cand))
            if v <= value - 1e-4 * step * gn * gn:
                x, value = cand, v
                improved = True
                step0 = min(1.0, step * 2.0)
                break
            step *= 0.5
        if not improved:
            break
    # Newton polish on the smooth region
    frame = tangent_basis(x)
    for it in range(40):
        d, unit, grad = _grad_terms(pos, m, x)
        gf = frame @ np.diag([-1.0] + [1.0] * frame_dim) @ grad
        uf = unit @ np.diag([-1.0] + [1.0] * frame_dim) @ frame.T  # (A, n)
        coth = 1.0 / np.tanh(np.maximum(d, 1e-12))
        K = np.einsum("a,ai,aj->ij", m * coth, uf, uf)
        K = (m * coth).sum() * np.eye(frame_dim) - K
        try:
            delta = np.linalg.solve(K, -gf)
        except np.linalg.LinAlgError:
            raise AdmissibilityError("degenerate Hessian: atoms aligned with the support")
        if not np.all(np.isfinite(delta)):
            raise AdmissibilityError("barycenter Newton step diverged")
        nd = float(np.linalg.norm(delta))
        if nd > 1.0:
            delta *= 1.0 / nd
        x = hyp_exp(x, delta @ frame, 1.0)
        frame = tangent_basis(x)
        if nd < 1e-13:
            break
    d, unit, grad = _grad_terms(pos, m, x)
    residual = float(np.sqrt(max(lorentz_dot(grad, grad), 0.0)))
    if residual > 1e-8:
        raise AdmissibilityError(f"first-order residual {residual:.2e} above 1e-8")
    uf = unit @ np.diag([-1.0] + [1.0] * frame_dim) @ frame.T
    H = np.einsum("a,ai,aj->ij", m, uf, uf)
    coth = 1.0 / np.tanh(np.maximum(d, 1e-12))
    K = (m * coth).sum() * np.eye(frame_dim) - np.einsum("a,ai,aj->ij", m * coth, uf, uf)
    eig = np.linalg.eigvalsh(K)
    if eig[0] <= 1e-12:
        raise AdmissibilityError("K is not positive definite: admissibility condition fails")
    return BarycenterState(
        f=abs_map(f),
        x_star=x,
        residual=residual,
        H=H,
        K=K,
        atom_min_dist=float(d.min()),
        value=float(m @ d),
    )


def jacobian_bound_check(state: BarycenterState, n: int, entropy: float) -> tuple[float, float, float]:
    """(lhs, rhs, min eig of K - (I - H)).

    lhs = 2^n sqrt(det H)/det K; rhs = (4n/entropy^2)^(n/2); the last entry
    certifies K >= I - H (real hyperbolic case, coth >= 1).
    """
    det_h = float(np.linalg.det(state.H))
    det_k = float(np.linalg.det(state.K))
    if det_k <= 0:
        raise AdmissibilityError("singular K")
    lhs = 2.0**n * np.sqrt(max(det_h, 0.0)) / det_k
    rhs = (4.0 * n / entropy**2) ** (n / 2.0)
    gap = np.linalg.eigvalsh(state.K - (np.eye(n) - state.H))[0]
    return float(lhs), float(rhs), float(gap)


def sphere_tangent_frame(f: SphereVector, rng: np.random.Generator, n: int) -> list[dict]:
    """n orthonormal tangent directions at f spanning support amplitudes."""
    support = f.support()
    frame: list[dict] = []
    guard = 0
    while len(frame) < n:
        guard += 1
        if guard > 50 * n:
            raise AdmissibilityError("could not build a tangent frame")
        direction = {g: rng.standard_normal(f.payload_dim) for g in support}
        # orthogonalize against f and the current frame
        inner_f = sum(float(direction[g] @ p) for g, p in f.entries.items())
        direction = {g: v - inner_f * f.entries.get(g, np.zeros(f.payload_dim)) for g, v in direction.items()}
        for e in frame:
            inner = sum(float(v @ e.get(g, np.zeros(f.payload_dim))) for g, v in direction.items())
            direction = {g: v - inner * e.get(g, np.zeros(f.payload_dim)) for g, v in direction.items()}
        norm = np.sqrt(sum(float(v @ v) for v in direction.values()))
        if norm < 1e-8:
            continue
        frame.append({g: v / norm for g, v in direction.items()})
    return frame


def _shift_on_sphere(f: SphereVector, direction: dict, t: float) -> SphereVector:
    entries = {g: p.copy() for g, p in f.entries.items()}
    for g, v in direction.items():
        entries[g] = entries.get(g, np.zeros(f.payload_dim)) + t * v
    return SphereVector.from_entries(f.group, entries, f.payload_dim)


def numeric_jacobian(
    f: SphereVector,
    mu: ReferenceMeasure,
    frame: list[dict],
    h_step: float = 1e-4,
    max_jitter: int = 3,
) -> float:
    """|Jac| of bar(abs(.)) along the frame by central differences.

    Difference quotients are read in the tangent space at bar(f); stencil
    points whose barycenter lands within the atom guard are re-jittered with
    a larger step.
    """
    n = mu.dim
    center = solve_barycenter(f, mu)
    x = center.x_star
    basis = tangent_basis(x)
    j = np.diag([-1.0] + [1.0] * n)
    h = h_step
    for attempt in range(max_jitter):
        try:
            quotients = []
            for direction in frame:
                states = []
                for sgn in (+1.0, -1.0):
                    st = solve_barycenter(_shift_on_sphere(f, direction, sgn * h), mu)
                    if st.atom_min_dist < ATOM_GUARD:
                        raise AdmissibilityError("stencil hit an atom")
                    states.append(st)
                logs = [hyp_log(x, st.x_star) for st in states]
                quotients.append((basis @ j @ (logs[0] - logs[1])) / (2.0 * h))
            d = np.array(quotients)  # (n, n)
            return float(abs(np.linalg.det(d)))
        except AdmissibilityError:
            h *= 1.7
    raise AdmissibilityError("jacobian stencil could not avoid the atom guard")


_ACCEPTANCE_MEASURES: dict[int, ReferenceMeasure] = {}


def build_measure_for_acceptance(n: int) -> ReferenceMeasure:
    """Cached default measures: genus-2 orbit (n=2), loxodromic lattice (n=3)."""
    if n not in _ACCEPTANCE_MEASURES:
        if n == 2:
            from .groups import surface_group

            _ACCEPTANCE_MEASURES[n] = surface_measure(surface_group(2), radius=4, beta=3.0)
        elif n == 3:
            _ACCEPTANCE_MEASURES[n] = loxodromic_free_measure(radius=3, beta=4.0)
        else:
            raise ValueError("acceptance measures exist for n = 2, 3")
    return _ACCEPTANCE_MEASURES[n]


def sample_admissible(
    mu: ReferenceMeasure,
    rng: np.random.Generator,
    support_radius: int = 2,
    k_range: tuple[int, int] = (3, 6),
    min_atom_dist: float = 0.5,
    max_tries: int = 80,
) -> tuple[SphereVector, BarycenterState]:
    """Seeded admissible sample with the barycenter away from all atoms.

    Weights are balanced (Dirichlet with concentration 6) over a few nearby
    group elements, which keeps the moment matrix well-conditioned.
    """
    ball = mu.group.ball(support_radius)
    for _ in range(max_tries):
        k = int(rng.integers(k_range[0], k_range[1] + 1))
        k = min(k, len(ball))
        idx = rng.choice(len(ball), size=k, replace=False)
        weights = rng.dirichlet(np.full(k, 6.0))
        entries = {ball[int(i)]: np.array([np.sqrt(w)]) for i, w in zip(idx, weights)}
        f = SphereVector.from_entries(mu.group, entries)
        try:
            state = solve_barycenter(f, mu)
        except AdmissibilityError:
            continue
        if state.atom_min_dist >= min_atom_dist:
            return f, state
    raise AdmissibilityError("no admissible sample with the requested atom clearance")
