"""Mass descent over vertex lifts: projected gradient with Armijo backtracking.

Vertices move on the sphere (retraction = normalization); the simplicial
combinatorics and the gluing twists are frozen, so the boundary residual is
preserved by construction.  A collapse guard stops the run when some vertex
gets closer than delta_min to its orbit, which is a finding (amenable-type
collapse), not a failure.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

from .cycles import DEFAULT_ORDER, SimplicialCycle, dense_lifts, mass
from .errors import InvariantViolation
from .groups import GroupElement
from .quadrature import barycentric, simplex_rule
from .sphere import SphereVector, act, convolve, displacement

TangentMap = dict[GroupElement, np.ndarray]


@dataclass
class DescentConfig:
    max_iters: int = 50
    step0: float = 0.1
    backtrack: float = 0.5
    armijo_c: float = 1e-4
    grad_tol: float = 1e-6
    delta_min: float = 1e-3
    order: int = DEFAULT_ORDER
    smooth_every: int = 0
    smooth_radius: int = 1
    min_step: float = 1e-12

    def __post_init__(self):
        if not (0.0 < self.backtrack < 1.0):
            raise ValueError("backtracking factor must lie in (0,1)")
        for name in ("max_iters", "step0", "grad_tol", "delta_min", "order"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


@dataclass
class DescentTrace:
    rows: list[tuple[int, float, float, float, float]] = field(default_factory=list)
    reason: str = ""
    collapsed: bool = False

    def masses(self) -> list[float]:
        return [r[1] for r in self.rows]

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("iteration,mass,grad_norm,min_displacement,step\n")
        for row in self.rows:
            buf.write("%d,%.17g,%.17g,%.17g,%.17g\n" % row)
        return buf.getvalue()


def mass_gradient(cycle: SimplicialCycle, order: int = DEFAULT_ORDER) -> list[TangentMap]:
    """Derivative of the quadrature mass with respect to each vertex lift.

    Returned per vertex as a finite tangent map, already projected to the
    tangent space of the sphere at the lift.  Degenerate simplices raise.
    """
    m = cycle.vertices[0].payload_dim
    grads: list[TangentMap] = [dict() for _ in cycle.vertices]
    for s in cycle.simplices:
        lifts = cycle.corner_lifts(s)
        n = len(lifts) - 1
        support, V = dense_lifts(lifts)
        pts, wts = simplex_rule(n, order)
        lam = barycentric(pts)
        X = lam @ V
        q = np.einsum("kd,kd->k", X, X)
        sr = np.sqrt(q)
        F = X / sr[:, None]
        W = V[1:] - V[0]
        FW = F @ W.T
        WW = W @ W.T
        G = (WW[None, :, :] - FW[:, :, None] * FW[:, None, :]) / q[:, None, None]
        sign, logdet = np.linalg.slogdet(G)
        if np.max(sign) <= 0:
            raise InvariantViolation("mass gradient of a degenerate simplex")
        dens = np.where(sign > 0, np.exp(0.5 * logdet), 0.0)
        T = (W[None, :, :] - F[:, None, :] * FW[:, :, None]) / sr[:, None, None]
        S = np.linalg.solve(G, T) * dens[:, None, None]  # (K, n, D)
        SW = np.einsum("knd,nd->kn", S, W)
        R = -(np.einsum("kn,knd->kd", FW, S) + SW.sum(axis=1)[:, None] * F) / q[:, None]
        weight = abs(s.multiplicity) * wts
        sum_S = S.sum(axis=1)  # (K, D)
        grad_corners = np.empty((n + 1, V.shape[1]))
        lam_w = lam * weight[:, None]
        base = lam_w.T @ R  # (n+1, D)
        grad_corners[:] = base
        grad_corners[0] -= (weight[:, None] * (sum_S / sr[:, None])).sum(axis=0)
        for j in range(1, n + 1):
            grad_corners[j] += (weight[:, None] * (S[:, j - 1, :] / sr[:, None])).sum(axis=0)
        for k, corner in enumerate(s.corners):
            inv = corner.twist.inv()
            target = grads[corner.vertex]
            row = grad_corners[k]
            for i, g in enumerate(support):
                block = row[i * m : (i + 1) * m]
                if not np.any(block):
                    continue
                key = inv * g
                if key in target:
                    target[key] = target[key] + block
                else:
                    target[key] = block.copy()
    for vid, grad in enumerate(grads):
        v = cycle.vertices[vid]
        radial = sum(float(grad.get(g, np.zeros(m)) @ p) for g, p in v.entries.items())
        for g, p in v.entries.items():
            if g in grad:
                grad[g] = grad[g] - radial * p
            else:
                grad[g] = -radial * p
    return grads


def tangent_max_norm(grads: list[TangentMap]) -> float:
    out = 0.0
    for grad in grads:
        out = max(out, np.sqrt(sum(float(v @ v) for v in grad.values())))
    return out


def _retract(v: SphereVector, grad: TangentMap, step: float) -> SphereVector:
    entries: dict[GroupElement, np.ndarray] = {g: p.copy() for g, p in v.entries.items()}
    for g, dv in grad.items():
        if g in entries:
            entries[g] = entries[g] - step * dv
        else:
            entries[g] = -step * dv
    return SphereVector.from_entries(v.group, entries, v.payload_dim)


def min_vertex_displacement(cycle: SimplicialCycle) -> float:
    return min(displacement(v).delta for v in cycle.vertices)


def smooth_step(cycle: SimplicialCycle, eta: dict[GroupElement, float], order: int = DEFAULT_ORDER, tol: float = 1e-8) -> SimplicialCycle:
    """Convolve every vertex lift; mass may not increase beyond tol."""
    before = mass(cycle, order).total
    smoothed = cycle.with_vertices([convolve(eta, v) for v in cycle.vertices])
    after = mass(smoothed, order).total
    if after > before + tol:
        raise InvariantViolation(f"smoothing increased mass {before} -> {after}")
    return smoothed


def descend(cycle: SimplicialCycle, config: DescentConfig) -> tuple[SimplicialCycle, DescentTrace]:
    """Projected gradient descent on the total mass; accepted steps only.

    Terminates on gradient tolerance, max iterations, stalled line search, or
    the delta_min collapse guard (reported via the collapsed flag).
    """
    from .sphere import uniform_ball_weights

    trace = DescentTrace()
    current = cycle
    m_now = mass(current, config.order).total
    eta = None
    if config.smooth_every:
        eta = uniform_ball_weights(cycle.group, config.smooth_radius)
    for it in range(config.max_iters + 1):
        grads = mass_gradient(current, config.order)
        gmax = tangent_max_norm(grads)
        dmin = min_vertex_displacement(current)
        if it > 0 and eta is not None and it % config.smooth_every == 0:
            current = smooth_step(current, eta, config.order)
            m_now = mass(current, config.order).total
            grads = mass_gradient(current, config.order)
            gmax = tangent_max_norm(grads)
            dmin = min_vertex_displacement(current)
        trace.rows.append((it, m_now, gmax, dmin, 0.0))
        if dmin < config.delta_min:
            trace.reason = "collapsed"
            trace.collapsed = True
            return current, trace
        if gmax < config.grad_tol:
            trace.reason = "gradient_tol"
            return current, trace
        if it == config.max_iters:
            break
        total_sq = sum(sum(float(v @ v) for v in grad.values()) for grad in grads)
        step = config.step0
        accepted = False
        while step >= config.min_step:
            candidate = current.with_vertices(
                [_retract(v, g, step) for v, g in zip(current.vertices, grads)]
            )
            m_new = mass(candidate, config.order).total
            if m_new <= m_now - config.armijo_c * step * total_sq:
                current, m_now = candidate, m_new
                accepted = True
                break
            step *= config.backtrack
        if not accepted:
            trace.reason = "stalled"
            return current, trace
        trace.rows[-1] = (it, trace.rows[-1][1], gmax, dmin, step)
    trace.reason = "max_iters"
    return current, trace
