"""Finitely supported unit vectors in l2(G, R^m) and the regular action.

A SphereVector is an immutable finite map from group elements to payload
vectors in R^m with total squared mass 1.  The module provides the left
regular action, chordal/geodesic distances, minimal displacement (thickness)
with exact support-product search, and the three norm-preserving transport
maps: homomorphism push-forward, payload absolute value, and spherical
convolution.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GroupMismatchError
from .groups import GroupElement, MarkedGroup

MAX_PAYLOAD_DIM = 8
UNIT_TOL = 1e-12


class SphereVector:
    """Unit vector in l2(group, R^m) with finite support."""

    __slots__ = ("group", "entries", "payload_dim")

    def __init__(self, group: MarkedGroup, entries: dict[GroupElement, np.ndarray], payload_dim: int, _skip_checks: bool = False):
        self.group = group
        self.entries = entries
        self.payload_dim = payload_dim

    @staticmethod
    def from_entries(
        group: MarkedGroup,
        entries: dict[GroupElement, "np.ndarray | float | list"],
        payload_dim: int | None = None,
        normalize: bool = True,
    ) -> "SphereVector":
        clean: dict[GroupElement, np.ndarray] = {}
        dim = payload_dim
        for g, val in entries.items():
            if g.group is not group:
                raise GroupMismatchError("entry key from a different group")
            arr = np.atleast_1d(np.asarray(val, dtype=float))
            if dim is None:
                dim = arr.shape[0]
            if arr.shape != (dim,):
                raise ValueError("inconsistent payload dimensions")
            if np.any(arr != 0.0):
                clean[g] = arr
        if dim is None:
            dim = 1
        if dim > MAX_PAYLOAD_DIM:
            raise ValueError(f"payload dimension {dim} exceeds the cap {MAX_PAYLOAD_DIM}")
        norm2 = sum(float(v @ v) for v in clean.values())
        if normalize:
            if norm2 <= 0.0:
                raise ValueError("cannot normalize the zero vector")
            s = 1.0 / np.sqrt(norm2)
            clean = {g: v * s for g, v in clean.items()}
        elif abs(norm2 - 1.0) > 1e-10:
            raise ValueError("entries are not unit-normalized")
        return SphereVector(group, clean, dim)

    @staticmethod
    def dirac(group: MarkedGroup, g: GroupElement | None = None, payload=None) -> "SphereVector":
        if g is None:
            g = group.identity
        if payload is None:
            payload = [1.0]
        return SphereVector.from_entries(group, {g: payload})

    @staticmethod
    def uniform(group: MarkedGroup, elements, payload_dim: int = 1) -> "SphereVector":
        payload = np.zeros(payload_dim)
        payload[0] = 1.0
        return SphereVector.from_entries(group, {g: payload.copy() for g in elements})

    # -- basic geometry --------------------------------------------------------

    def support(self) -> list[GroupElement]:
        return sorted(self.entries, key=lambda g: g.sort_key())

    def max_support_length(self) -> int:
        return max((g.word_length for g in self.entries), default=0)

    def norm(self) -> float:
        return float(np.sqrt(sum(float(v @ v) for v in self.entries.values())))

    def inner(self, other: "SphereVector") -> float:
        self._check_compatible(other)
        small, big = (self.entries, other.entries)
        if len(big) < len(small):
            small, big = big, small
        total = 0.0
        for g, v in small.items():
            w = big.get(g)
            if w is not None:
                total += float(v @ w)
        return total

    def _check_compatible(self, other: "SphereVector") -> None:
        if self.group is not other.group:
            raise GroupMismatchError("vectors over different groups")
        if self.payload_dim != other.payload_dim:
            raise ValueError("payload dimensions differ")

    def __eq__(self, other) -> bool:
        if not isinstance(other, SphereVector) or self.group is not other.group:
            return False
        if set(self.entries) != set(other.entries):
            return False
        return all(np.array_equal(v, other.entries[g]) for g, v in self.entries.items())

    def __hash__(self):
        raise TypeError("SphereVector is not hashable")

    def scale_add(self, coeff: float, other: "SphereVector", coeff_other: float) -> dict[GroupElement, np.ndarray]:
        """Raw linear combination coeff*self + coeff_other*other as an entry map."""
        self._check_compatible(other)
        out: dict[GroupElement, np.ndarray] = {g: coeff * v for g, v in self.entries.items()}
        for g, v in other.entries.items():
            if g in out:
                out[g] = out[g] + coeff_other * v
            else:
                out[g] = coeff_other * v
        return out


def act(gamma: GroupElement, u: SphereVector) -> SphereVector:
    """Left regular action: (gamma.u)(x) = u(gamma^{-1} x); an exact entry permutation."""
    if gamma.group is not u.group:
        raise GroupMismatchError("group element acts on a vector over another group")
    moved = {gamma * g: v for g, v in u.entries.items()}
    return SphereVector(u.group, moved, u.payload_dim)


def chordal_distance(u: SphereVector, v: SphereVector) -> float:
    u._check_compatible(v)
    total = 0.0
    for g, a in u.entries.items():
        b = v.entries.get(g)
        d = a - b if b is not None else a
        total += float(d @ d)
    for g, b in v.entries.items():
        if g not in u.entries:
            total += float(b @ b)
    return float(np.sqrt(total))


def geodesic_distance(u: SphereVector, v: SphereVector) -> float:
    half = 0.5 * chordal_distance(u, v)
    return 2.0 * float(np.arcsin(np.clip(half, 0.0, 1.0)))


def geodesic_point(u: SphereVector, v: SphereVector, t: float) -> SphereVector:
    """Radial projection of (1-t) u + t v; exact at the endpoints."""
    if t == 0.0:
        return u
    if t == 1.0:
        return v
    combo = u.scale_add(1.0 - t, v, t)
    norm2 = sum(float(w @ w) for w in combo.values())
    if norm2 < 1e-24:
        raise ValueError("antipodal pair has no geodesic midpoint")
    s = 1.0 / np.sqrt(norm2)
    entries = {g: w * s for g, w in combo.items() if np.any(w != 0.0)}
    return SphereVector(u.group, entries, u.payload_dim)


def abs_map(u: SphereVector) -> SphereVector:
    """Payload norms as scalar amplitudes; norm-preserving and 1-Lipschitz."""
    entries = {g: np.array([float(np.linalg.norm(v))]) for g, v in u.entries.items()}
    return SphereVector(u.group, entries, 1)


@dataclass(frozen=True)
class Homomorphism:
    """Group homomorphism given by generator images; applied through words."""

    source: MarkedGroup
    target: MarkedGroup
    images: tuple[GroupElement, ...]

    def __post_init__(self):
        if len(self.images) != self.source.rank:
            raise ValueError("need one image per source generator")
        for img in self.images:
            if img.group is not self.target:
                raise GroupMismatchError("generator image lies in the wrong group")

    @staticmethod
    def identity(group: MarkedGroup) -> "Homomorphism":
        return Homomorphism(group, group, tuple(group.generators))

    def apply(self, g: GroupElement) -> GroupElement:
        if g.group is not self.source:
            raise GroupMismatchError("element not in the source group")
        out = self.target.identity
        for letter in g.word:
            img = self.images[abs(letter) - 1]
            out = out * (img if letter > 0 else img.inv())
        return out


def push_homomorphism(theta: Homomorphism, u: SphereVector) -> SphereVector:
    """Square-mass push-forward along theta; output has scalar payload."""
    sq: dict[GroupElement, float] = {}
    for g, v in u.entries.items():
        y = theta.apply(g)
        sq[y] = sq.get(y, 0.0) + float(v @ v)
    entries = {y: np.array([np.sqrt(m)]) for y, m in sq.items() if m > 0.0}
    return SphereVector(theta.target, entries, 1)


def check_convolution_weights(eta: dict[GroupElement, float]) -> None:
    if not eta:
        raise ValueError("empty convolution weight")
    total = 0.0
    for g, w in eta.items():
        if w <= 0.0:
            raise ValueError("convolution weights must be strictly positive")
        total += w
    if abs(total - 1.0) > 1e-9:
        raise ValueError("convolution weights must sum to 1")


def convolve(eta: dict[GroupElement, float], u: SphereVector) -> SphereVector:
    """Spherical convolution: squared amplitudes convolved by eta, then sqrt.

    Requires scalar payload; preserves the unit norm exactly (the squared
    amplitudes are re-partitioned) and is 1-Lipschitz, strictly contracting
    on distinct nonnegative vectors when eta is everywhere positive.
    """
    if u.payload_dim != 1:
        raise ValueError("convolution is defined for scalar-payload vectors")
    check_convolution_weights(eta)
    sq: dict[GroupElement, float] = {}
    for g, v in u.entries.items():
        mass = float(v @ v)
        for s, w in eta.items():
            target = g * s
            sq[target] = sq.get(target, 0.0) + mass * w
    entries = {g: np.array([np.sqrt(m)]) for g, m in sq.items() if m > 0.0}
    return SphereVector(u.group, entries, 1)


def uniform_ball_weights(group: MarkedGroup, radius: int) -> dict[GroupElement, float]:
    ball = group.ball(radius)
    w = 1.0 / len(ball)
    return {g: w for g in ball}


@dataclass(frozen=True)
class ThicknessReport:
    """Minimal displacement of a vector under nontrivial group elements."""

    delta: float
    gamma: GroupElement | None
    exact: bool

    def is_thick(self, threshold: float) -> bool:
        return self.delta > threshold


def _displacement_candidates(u: SphereVector) -> list[GroupElement]:
    group = u.group
    support = list(u.entries)
    seen: set[GroupElement] = set()
    out: list[GroupElement] = []
    for a in support:
        inv_a = a.inv()
        for b in support:
            g = b * inv_a
            if not g.is_identity() and g not in seen:
                seen.add(g)
                out.append(g)
    for s in group.symmetric_generators():
        if s not in seen:
            seen.add(s)
            out.append(s)
    return out


def displacement(u: SphereVector, radius: int | None = None) -> ThicknessReport:
    """min over nontrivial gamma of ||gamma.u - u||.

    With radius=None the search runs over the support-product set, which is
    exact: outside it the supports are disjoint and the distance is exactly
    sqrt(2) for infinite groups.  An explicit radius searches ball(radius).
    """
    group = u.group
    if group.is_finite():
        candidates = [g for g in group.elements() if not g.is_identity()]
        exact = True
        far = None
    elif radius is None:
        candidates = _displacement_candidates(u)
        exact = True
        far = np.sqrt(2.0)
    else:
        candidates = [g for g in group.ball(radius) if not g.is_identity()]
        exact = radius >= 2 * u.max_support_length()
        far = np.sqrt(2.0) if exact else None
    best = np.inf
    realizer = None
    for g in candidates:
        d = chordal_distance(act(g, u), u)
        if d < best:
            best, realizer = d, g
    if far is not None and far < best:
        best, realizer = far, None
    return ThicknessReport(delta=float(best), gamma=realizer, exact=exact)


def quotient_distance(u: SphereVector, v: SphereVector, radius: int | None = None) -> tuple[float, GroupElement | None]:
    """min over gamma of ||gamma.u - v|| together with a realizing gamma.

    Exact without a radius: only gamma in supp(v) supp(u)^{-1} overlap, all
    other translates sit at exactly sqrt(2) (infinite groups).
    """
    u._check_compatible(v)
    group = u.group
    if group.is_finite():
        candidates = group.elements()
        far = None
    elif radius is None:
        seen: set[GroupElement] = set()
        candidates = [group.identity]
        seen.add(group.identity)
        for b in v.entries:
            for a in u.entries:
                g = b * a.inv()
                if g not in seen:
                    seen.add(g)
                    candidates.append(g)
        far = np.sqrt(2.0)
    else:
        candidates = group.ball(radius)
        far = np.sqrt(2.0) if radius >= u.max_support_length() + v.max_support_length() else None
    best = np.inf
    realizer = None
    for g in candidates:
        d = chordal_distance(act(g, u), v)
        if d < best:
            best, realizer = d, g
    if far is not None and far < best:
        best, realizer = far, None
    return float(best), realizer


def random_vector(
    group: MarkedGroup,
    rng: np.random.Generator,
    support_radius: int = 2,
    size: int = 4,
    payload_dim: int = 1,
    nonnegative: bool = False,
) -> SphereVector:
    """Seeded random unit vector supported on a sample of ball(support_radius)."""
    ball = group.ball(support_radius)
    size = min(size, len(ball))
    idx = rng.choice(len(ball), size=size, replace=False)
    entries = {}
    for i in idx:
        payload = rng.standard_normal(payload_dim)
        if nonnegative:
            payload = np.abs(payload)
        entries[ball[int(i)]] = payload
    return SphereVector.from_entries(group, entries, payload_dim)
