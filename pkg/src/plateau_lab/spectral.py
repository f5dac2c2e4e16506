"""Kazhdan constants, Cayley-graph spectra, Folner vectors, Margulis chains.

For finite groups the Kazhdan constant and the first eigenvalue are
minimized over unit vectors orthogonal to the <S>-invariant functions (the
subspace where every s in S acts trivially); this makes the subgroup
restriction identity and the lambda_1 sandwich hold nontrivially.  For
infinite groups the truncated quantity is an upper bound on the full
infimum, which vanishes exactly for amenable groups.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.optimize
import scipy.sparse
import scipy.sparse.linalg

from .cycles import Corner, SimplicialCycle, Simplex
from .errors import InvalidWitness, PlateauError
from .groups import GroupElement, MarkedGroup, free_abelian_group, free_group, primitive_root
from .sphere import SphereVector, act, chordal_distance

EXACT_GROUP_CAP = 4096


@dataclass
class KazhdanEstimate:
    value: float
    kind: str  # "exact" | "upper" | "lower"
    group: str
    generating_set: tuple[str, ...]
    radius: int | None = None
    tolerance: float = 0.0
    detail: dict = field(default_factory=dict)


def _dedupe_by_inverse(s_list: list[GroupElement]) -> list[GroupElement]:
    # ||s.u - u|| = ||s^{-1}.u - u||, so one representative per inverse pair
    out: list[GroupElement] = []
    for s in s_list:
        if s.is_identity():
            continue
        if any(s == t or s == t.inv() for t in out):
            continue
        out.append(s)
    return out


def _invariant_complement(group: MarkedGroup, s_list: list[GroupElement]) -> np.ndarray:
    """Orthonormal basis (columns) of the complement of <S>-invariant vectors.

    Invariant vectors are constant on the orbits of left multiplication by
    <S>; the complement is spanned by mean-zero vectors on each orbit.
    """
    elements = [GroupElement(group, i) for i in range(group.order)]
    orbit_of = {}
    for g in elements:
        if g in orbit_of:
            continue
        # orbit of g under left multiplication by <S>
        stack = [g]
        members = {g}
        while stack:
            x = stack.pop()
            for s in s_list:
                for t in (s, s.inv()):
                    y = t * x
                    if y not in members:
                        members.add(y)
                        stack.append(y)
        for x in members:
            orbit_of[x] = g
    groups_: dict[GroupElement, list[int]] = {}
    for g in elements:
        groups_.setdefault(orbit_of[g], []).append(g.key)
    cols = []
    dim = group.order
    for members in groups_.values():
        members = sorted(members)
        # Helmert-style mean-zero basis on the orbit
        for k in range(1, len(members)):
            v = np.zeros(dim)
            v[members[:k]] = 1.0
            v[members[k]] = -k
            cols.append(v / np.linalg.norm(v))
    if not cols:
        return np.zeros((dim, 0))
    basis = np.array(cols).T
    q, _ = np.linalg.qr(basis)
    return q[:, : basis.shape[1]]


def _action_matrix(group: MarkedGroup, s: GroupElement) -> np.ndarray:
    n = group.order
    p = np.zeros((n, n))
    for j in range(n):
        x = GroupElement(group, j)
        p[(s * x).key, j] = 1.0
    return p


def _min_max_norms(mats: list[np.ndarray], restarts: int, seed: int, iters: int = 3000) -> tuple[np.ndarray, float]:
    """Minimize max_s ||M_s z|| over the unit sphere; returns (z, value).

    SLSQP on (t, z) in low dimension, projected subgradient otherwise, with
    spectral seeding from the summed quadratic form.
    """
    dim = mats[0].shape[1]
    if dim == 0:
        return np.zeros(0), 0.0
    quads = [m.T @ m for m in mats]
    total = sum(quads)
    w, v = np.linalg.eigh(total)
    seeds = [v[:, i] for i in range(min(3, dim))]
    rng = np.random.default_rng(seed)
    for _ in range(restarts):
        z = rng.standard_normal(dim)
        seeds.append(z / np.linalg.norm(z))

    def objective(z: np.ndarray) -> float:
        return max(float(z @ q @ z) for q in quads)

    best_z, best_v = None, np.inf
    if dim <= 250:
        for z0 in seeds:
            t0 = objective(z0)
            x0 = np.concatenate([[t0], z0])
            cons = [
                {"type": "eq", "fun": lambda x: x[1:] @ x[1:] - 1.0, "jac": lambda x: np.concatenate([[0.0], 2 * x[1:]])}
            ]
            for q in quads:
                cons.append(
                    {
                        "type": "ineq",
                        "fun": (lambda q: lambda x: x[0] - x[1:] @ q @ x[1:])(q),
                        "jac": (lambda q: lambda x: np.concatenate([[1.0], -2 * (q @ x[1:])]))(q),
                    }
                )
            res = scipy.optimize.minimize(
                lambda x: x[0],
                x0,
                jac=lambda x: np.concatenate([[1.0], np.zeros(dim)]),
                constraints=cons,
                method="SLSQP",
                options={"maxiter": 400, "ftol": 1e-14},
            )
            if res.success or res.status in (0, 8):
                z = res.x[1:]
                nz = np.linalg.norm(z)
                if nz > 1e-12:
                    z = z / nz
                    val = objective(z)
                    if val < best_v:
                        best_v, best_z = val, z
    if best_z is None:
        for z0 in seeds:
            z = z0.copy()
            val = objective(z)
            for it in range(iters):
                active = max(range(len(quads)), key=lambda i: float(z @ quads[i] @ z))
                g = 2.0 * quads[active] @ z
                g = g - (g @ z) * z
                ng = np.linalg.norm(g)
                if ng < 1e-14:
                    break
                step = 0.5 * val / (ng * np.sqrt(it + 1.0))
                z_new = z - step * g
                z_new /= np.linalg.norm(z_new)
                v_new = objective(z_new)
                if v_new < val:
                    z, val = z_new, v_new
            if val < best_v:
                best_v, best_z = val, z
    return best_z, best_v


def kazhdan_exact(group: MarkedGroup, s_list: list[GroupElement], restarts: int = 32, tol: float = 1e-6, seed: int = 0) -> KazhdanEstimate:
    """Kazhdan constant of a finite group over the invariant-free subspace.

    inf over unit u orthogonal to the <S>-invariant vectors of
    max_s ||s.u - u||, by multi-start minimization with eigen seeding.
    """
    if not group.is_finite():
        raise ValueError("kazhdan_exact needs a finite group")
    if group.order > EXACT_GROUP_CAP:
        raise PlateauError(f"group order {group.order} exceeds the exact cap {EXACT_GROUP_CAP}")
    names = tuple(str(s) for s in s_list)
    reps = _dedupe_by_inverse(s_list)
    if not reps:
        return KazhdanEstimate(0.0, "exact", group.name, names, tolerance=tol)
    basis = _invariant_complement(group, reps)
    if basis.shape[1] == 0:
        return KazhdanEstimate(0.0, "exact", group.name, names, tolerance=tol)
    mats = [(_action_matrix(group, s) - np.eye(group.order)) @ basis for s in reps]
    _, best = _min_max_norms(mats, restarts, seed)
    return KazhdanEstimate(float(np.sqrt(best)), "exact", group.name, names, tolerance=tol)


def lambda1(group: MarkedGroup, s_list: list[GroupElement], restarts: int = 16, seed: int = 0) -> float:
    """(1/2) inf of sum_s ||s.u - u|| over unit u orthogonal to invariants.

    The sum-of-norms form (not squared) follows the inequality chain it is
    used in; the infimum is found by multi-start smooth minimization.
    """
    if not group.is_finite():
        raise ValueError("lambda1 needs a finite group")
    reps = [s for s in s_list if not s.is_identity()]
    if not reps:
        return 0.0
    basis = _invariant_complement(group, _dedupe_by_inverse(reps))
    if basis.shape[1] == 0:
        return 0.0
    mats = [(_action_matrix(group, s) - np.eye(group.order)) @ basis for s in reps]
    quads = [m.T @ m for m in mats]
    dim = basis.shape[1]
    w, v = np.linalg.eigh(sum(quads))
    rng = np.random.default_rng(seed)
    seeds = [v[:, i] for i in range(min(3, dim))]
    seeds += [rng.standard_normal(dim) for _ in range(restarts)]

    def fun(z):
        nz = np.linalg.norm(z)
        u = z / nz
        val = 0.0
        grad = np.zeros_like(z)
        for q in quads:
            qu = q @ u
            r = np.sqrt(max(float(u @ qu), 1e-300))
            val += r
            grad += qu / r
        grad = (grad - (grad @ u) * u) / nz
        return val, grad

    best = np.inf
    for z0 in seeds:
        res = scipy.optimize.minimize(fun, z0 / np.linalg.norm(z0), jac=True, method="L-BFGS-B", options={"maxiter": 500, "ftol": 1e-16, "gtol": 1e-12})
        if res.fun < best:
            best = res.fun
    return 0.5 * float(best)


def kazhdan_truncated(group: MarkedGroup, s_list: list[GroupElement], radius: int, restarts: int = 8, seed: int = 0) -> KazhdanEstimate:
    """Upper bound: inf over unit vectors supported in ball(radius).

    Exact via a singular value when S reduces to one inverse pair; otherwise
    seeded minimax optimization (any feasible value is a sound upper bound).
    """
    if group.is_finite():
        raise ValueError("use kazhdan_exact for finite groups")
    names = tuple(str(s) for s in s_list)
    reps = _dedupe_by_inverse(s_list)
    if not reps:
        return KazhdanEstimate(0.0, "upper", group.name, names, radius=radius)
    inner = group.ball(radius)
    outer = group.ball(radius + 1)
    index = {g: i for i, g in enumerate(outer)}
    mats = []
    for s in reps:
        rows, cols, vals = [], [], []
        for j, g in enumerate(inner):
            rows.append(index[s * g])
            cols.append(j)
            vals.append(1.0)
            rows.append(index[g])
            cols.append(j)
            vals.append(-1.0)
        mats.append(
            scipy.sparse.coo_matrix((vals, (rows, cols)), shape=(len(outer), len(inner))).tocsr()
        )
    if len(mats) == 1:
        m = mats[0].toarray()
        sv = np.linalg.svd(m, compute_uv=False)
        return KazhdanEstimate(float(sv[-1]), "upper", group.name, names, radius=radius)
    dense = [m.toarray() for m in mats]
    _, best = _min_max_norms(dense, restarts, seed, iters=1500)
    return KazhdanEstimate(float(np.sqrt(best)), "upper", group.name, names, radius=radius)


@dataclass
class KestenCertificate:
    floor: float          # certified lower bound on max_{s in S} ||s.u - u||
    norm_limit: float     # 2 sqrt(2k-1), the adjacency-operator norm
    rayleigh: float       # largest eigenvalue of the radius-R ball adjacency
    gap: float            # norm_limit - rayleigh (truncation convergence gap)
    radius: int
    rank: int

    def as_estimate(self) -> KazhdanEstimate:
        return KazhdanEstimate(
            self.floor,
            "lower",
            f"F{self.rank}",
            tuple(),
            radius=self.radius,
            tolerance=self.gap,
        )


def kesten_lower_bound(rank: int, radius: int = 8) -> KestenCertificate:
    """Kazhdan floor for the free group from the adjacency-norm value.

    sum over symmetric S of ||s.u - u||^2 = 2|S| - 2 <A u, u> >= 2|S| - 2||A||
    with ||A|| = 2 sqrt(2k-1); truncated power iteration on the radius-R ball
    only approaches the norm from below, so the gap is reported rather than
    asserted.
    """
    if rank < 2:
        raise ValueError("needs free rank >= 2")
    group = free_group(rank)
    ball = group.ball(radius)
    index = {g: i for i, g in enumerate(ball)}
    rows, cols = [], []
    for g in ball:
        i = index[g]
        for s in group.symmetric_generators():
            h = s * g
            j = index.get(h)
            if j is not None:
                rows.append(i)
                cols.append(j)
    adj = scipy.sparse.coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(len(ball), len(ball))).tocsr()
    val = scipy.sparse.linalg.eigsh(adj, k=1, which="LA", return_eigenvectors=False)
    rayleigh = float(val[0])
    norm_limit = 2.0 * np.sqrt(2.0 * rank - 1.0)
    sym = 2 * rank
    floor_sq = (2.0 * sym - 2.0 * norm_limit) / sym
    return KestenCertificate(
        floor=float(np.sqrt(floor_sq)),
        norm_limit=norm_limit,
        rayleigh=rayleigh,
        gap=norm_limit - rayleigh,
        radius=radius,
        rank=rank,
    )


def coset_collapse(group: MarkedGroup, subgroup: list[GroupElement], u: np.ndarray) -> tuple[np.ndarray, dict]:
    """v(f) = sqrt(sum over right cosets |u(f gamma_m)|^2) on the subgroup."""
    sub_index = {g: i for i, g in enumerate(subgroup)}
    sub_set = set(subgroup)
    elements = [GroupElement(group, i) for i in range(group.order)]
    reps = []
    seen = set()
    for g in elements:
        if g in seen:
            continue
        reps.append(g)
        for f in subgroup:
            seen.add(f * g)
    v = np.zeros(len(subgroup))
    for f in subgroup:
        total = 0.0
        for rep in reps:
            total += float(u[(f * rep).key]) ** 2
        v[sub_index[f]] = np.sqrt(total)
    return v, {"cosets": len(reps)}


def restriction_check(
    group: MarkedGroup,
    subgroup_gens: list[GroupElement],
    s_list: list[GroupElement],
    trials: int = 20,
    seed: int = 0,
) -> dict:
    """Verify K(F, S) = K(G, S) for S inside the subgroup F.

    Returns both exact estimates plus the norm-preservation and displacement
    contraction checks of the coset-collapse map on random vectors.
    """
    sub_elements = group.subgroup_generated(subgroup_gens)
    sub_set = set(sub_elements)
    for s in s_list:
        if s not in sub_set:
            raise ValueError("S is not contained in the subgroup")
    # realize the subgroup as its own finite marked group
    index = {g: i for i, g in enumerate(sub_elements)}
    table = [[index[a * b] for b in sub_elements] for a in sub_elements]
    ident = index[group.identity]
    # reindex so that the identity is 0
    perm = list(range(len(sub_elements)))
    perm[0], perm[ident] = perm[ident], perm[0]
    inv_perm = [0] * len(perm)
    for new, old in enumerate(perm):
        inv_perm[old] = new
    table2 = [[inv_perm[table[perm[i]][perm[j]]] for j in range(len(perm))] for i in range(len(perm))]
    gen_idx = [inv_perm[index[g]] for g in subgroup_gens]
    sub_marked = MarkedGroup("finite", table=table2, generator_indices=gen_idx, name=f"{group.name}-sub")
    s_sub = [GroupElement(sub_marked, inv_perm[index[s]]) for s in s_list]

    k_sub = kazhdan_exact(sub_marked, s_sub, seed=seed)
    k_full = kazhdan_exact(group, s_list, seed=seed)

    rng = np.random.default_rng(seed)
    norm_defect = 0.0
    displacement_ok = True
    for _ in range(trials):
        u = rng.standard_normal(group.order)
        u /= np.linalg.norm(u)
        v, _ = coset_collapse(group, sub_elements, u)
        norm_defect = max(norm_defect, abs(np.linalg.norm(v) - 1.0))
        for s in s_list:
            pu = _action_matrix(group, s) @ u
            i_s = inv_perm[index[s]]
            pv = _action_matrix(sub_marked, GroupElement(sub_marked, i_s)) @ v
            if np.linalg.norm(pv - v) > np.linalg.norm(pu - u) + 1e-10:
                displacement_ok = False
    return {
        "K_F": k_sub,
        "K_G": k_full,
        "difference": abs(k_sub.value - k_full.value),
        "coset_norm_defect": norm_defect,
        "coset_contraction_ok": displacement_ok,
    }


# -- Folner vectors and amenable collapse -------------------------------------------


def folner_vector(rank: int, side: int, group: MarkedGroup | None = None) -> SphereVector:
    """Normalized indicator of the box [0, side)^rank in Z^rank.

    Displacement under each generator is exactly sqrt(2/side).
    """
    if side < 2:
        raise ValueError("side must be >= 2")
    if group is None:
        group = free_abelian_group(rank)
    entries = {}
    for vec in np.ndindex(*(side,) * rank):
        g = GroupElement(group, tuple(int(x) for x in vec))
        entries[g] = np.array([1.0])
    return SphereVector.from_entries(group, entries)


def amenable_cycle(side: int, group: MarkedGroup | None = None) -> SimplicialCycle:
    """Square-torus 2-cycle over Z^2 with all corners on a Folner vector."""
    if group is None:
        group = free_abelian_group(2)
    u = folner_vector(2, side, group)
    e = group.identity
    x, y = group.generators
    xy = x * y
    t1 = Simplex((Corner(0, e), Corner(0, x), Corner(0, xy)), 1)
    t2 = Simplex((Corner(0, e), Corner(0, xy), Corner(0, y)), 1)
    return SimplicialCycle(group, [u], [t1, t2])


# -- Margulis chains -------------------------------------------------------------


@dataclass
class MargulisChain:
    elements: list[GroupElement]
    witnesses: list[SphereVector]

    def __post_init__(self):
        if len(self.witnesses) != max(len(self.elements) - 1, 0):
            raise ValueError("need one witness per consecutive pair")


def margulis_witness(x: GroupElement, length: int) -> SphereVector:
    """Near-invariant vector for powers of x: indicator of root-power window."""
    root, _ = primitive_root(x)
    group = x.group
    members = [group.identity]
    cur = group.identity
    for _ in range(length - 1):
        cur = cur * root
        members.append(cur)
    return SphereVector.uniform(group, members)


def margulis_chain_check(group: MarkedGroup, chain: MargulisChain, alpha: float) -> tuple[str, GroupElement | None]:
    """Validate witnesses, then decide whether the chain sits in one maximal cyclic.

    Returns ("common-cyclic", root) when all primitive roots agree up to
    inversion, ("violation", None) otherwise.  A witness whose displacement
    pair reaches alpha raises InvalidWitness.
    """
    if group.kind != "free":
        raise ValueError("margulis chains are checked in free groups")
    for g in chain.elements:
        if g.is_identity():
            raise ValueError("chain elements must be nontrivial")
    for j, u in enumerate(chain.witnesses):
        a, b = chain.elements[j], chain.elements[j + 1]
        da = chordal_distance(act(a, u), u)
        db = chordal_distance(act(b, u), u)
        if max(da, db) >= alpha:
            raise InvalidWitness(
                f"witness {j} moves by {max(da, db):.4f} >= alpha = {alpha}"
            )
    roots = [primitive_root(g)[0] for g in chain.elements]
    base = roots[0]
    for r in roots[1:]:
        if not (r == base or r == base.inv()):
            return "violation", None
    return "common-cyclic", base
