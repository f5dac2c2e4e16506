"""Finitely generated marked groups with exact or matrix realizations.

Four realizations are supported: free groups (reduced words), free abelian
groups (integer vectors), finite groups (multiplication tables), and
genus-g surface groups (hyperbolic isometry matrices from a fundamental
polygon, with tolerance-based canonicalization).  Elements are hashable and
totally ordered by (word length, lexicographic canonical word), so word
balls and l2 coordinates are reproducible across runs.
"""

from __future__ import annotations

import itertools
import string
from dataclasses import dataclass, field

import numpy as np

from .errors import BallCapExceeded, GroupMismatchError, PlateauError
from .hyperboloid import FundamentalPolygon, fundamental_polygon

DEFAULT_BALL_CAP = 2_000_000

# Surface-element canonicalization: orbit points of distinct elements are
# >= 2*apothem apart in Lorentz coordinates, far above this cell size.
_CELL = 0.5


def _letter_key(letter: int) -> tuple[int, int]:
    return (abs(letter), 0 if letter > 0 else 1)


def word_sort_key(word: tuple[int, ...]) -> tuple:
    return (len(word), tuple(_letter_key(x) for x in word))


def _free_reduce(word: tuple[int, ...]) -> tuple[int, ...]:
    out: list[int] = []
    for letter in word:
        if out and out[-1] == -letter:
            out.pop()
        else:
            out.append(letter)
    return tuple(out)


def word_to_string(word: tuple[int, ...]) -> str:
    if not word:
        return "e"
    names = []
    for letter in word:
        idx = abs(letter) - 1
        if idx >= 26:
            raise ValueError("more than 26 generators are not serializable")
        ch = string.ascii_lowercase[idx]
        names.append(ch if letter > 0 else ch.upper())
    return "".join(names)


def word_from_string(text: str) -> tuple[int, ...]:
    if text == "e":
        return ()
    word = []
    for ch in text:
        if ch in string.ascii_lowercase:
            word.append(ord(ch) - ord("a") + 1)
        elif ch in string.ascii_uppercase:
            word.append(-(ord(ch) - ord("A") + 1))
        else:
            raise ValueError(f"bad word character {ch!r}")
    return tuple(word)


class GroupElement:
    """Element of a MarkedGroup; hashable, immutable from the outside."""

    __slots__ = ("group", "key")

    def __init__(self, group: "MarkedGroup", key):
        self.group = group
        self.key = key

    @property
    def word(self) -> tuple[int, ...]:
        return self.group._word_of(self)

    @property
    def word_length(self) -> int:
        return len(self.word)

    @property
    def matrix(self) -> np.ndarray | None:
        return self.group._matrix_of(self)

    def __mul__(self, other: "GroupElement") -> "GroupElement":
        return self.group.mul(self, other)

    def inv(self) -> "GroupElement":
        return self.group.inv(self)

    def is_identity(self) -> bool:
        return self == self.group.identity

    def sort_key(self) -> tuple:
        return word_sort_key(self.word)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, GroupElement)
            and self.group is other.group
            and self.key == other.key
        )

    def __hash__(self) -> int:
        return hash((id(self.group), self.key))

    def __repr__(self) -> str:
        return f"<{word_to_string(self.word)}>"


@dataclass
class _SurfaceRecord:
    matrix: np.ndarray
    word: tuple[int, ...]
    orbit: np.ndarray


class MarkedGroup:
    """A finitely generated group with marked generators.

    kind: "free" | "free_abelian" | "finite" | "surface".
    """

    def __init__(
        self,
        kind: str,
        *,
        rank: int = 0,
        table: list[list[int]] | None = None,
        generator_indices: list[int] | None = None,
        polygon: FundamentalPolygon | None = None,
        equality_tolerance: float = 1e-8,
        ball_cap: int = DEFAULT_BALL_CAP,
        name: str = "",
    ):
        self.kind = kind
        self.ball_cap = ball_cap
        self.equality_tolerance = equality_tolerance
        self.name = name or kind
        self.polygon = polygon
        if kind in ("free", "free_abelian"):
            if rank < 1:
                raise ValueError("rank must be >= 1")
            self.rank = rank
        elif kind == "finite":
            if table is None or generator_indices is None:
                raise ValueError("finite groups need a table and generator indices")
            self._table = [tuple(row) for row in table]
            self._order = len(table)
            self._gen_indices = list(generator_indices)
            self.rank = len(self._gen_indices)
            self._inverse = self._build_inverse_table()
            self._words = self._bfs_words()
        elif kind == "surface":
            if polygon is None:
                raise ValueError("surface groups need a fundamental polygon")
            self.rank = 2 * polygon.genus
            self._records: list[_SurfaceRecord] = []
            self._cells: dict[tuple[int, ...], int] = {}
            self._register(np.eye(3), ())
            for gi, mat in enumerate(polygon.generators):
                self._register(np.asarray(mat), (gi + 1,))
                self._register(np.linalg.inv(mat), (-(gi + 1),))
        else:
            raise ValueError(f"unknown group kind {kind!r}")
        self.identity = self._make_identity()
        self.generators = tuple(self.generator(i + 1) for i in range(self.rank))

    # -- construction helpers -------------------------------------------------

    def _make_identity(self) -> GroupElement:
        if self.kind == "free":
            return GroupElement(self, ())
        if self.kind == "free_abelian":
            return GroupElement(self, (0,) * self.rank)
        if self.kind == "finite":
            return GroupElement(self, 0)
        return GroupElement(self, 0)

    def generator(self, letter: int) -> GroupElement:
        """Generator by signed 1-based index."""
        if self.kind == "free":
            return GroupElement(self, (letter,))
        if self.kind == "free_abelian":
            vec = [0] * self.rank
            vec[abs(letter) - 1] = 1 if letter > 0 else -1
            return GroupElement(self, tuple(vec))
        if self.kind == "finite":
            idx = self._gen_indices[abs(letter) - 1]
            if letter < 0:
                idx = self._inverse[idx]
            return GroupElement(self, idx)
        gi = abs(letter) - 1
        return GroupElement(self, self._lookup_key((letter,)))

    def from_word(self, word) -> GroupElement:
        """Element from a signed-letter sequence or a word string."""
        if isinstance(word, str):
            word = word_from_string(word)
        out = self.identity
        for letter in word:
            out = self.mul(out, self.generator(letter))
        return out

    # -- core arithmetic -------------------------------------------------------

    def _check_same(self, *elements: GroupElement) -> None:
        for g in elements:
            if g.group is not self:
                raise GroupMismatchError("elements belong to different group realizations")

    def mul(self, g: GroupElement, h: GroupElement) -> GroupElement:
        self._check_same(g, h)
        if self.kind == "free":
            return GroupElement(self, _free_reduce(g.key + h.key))
        if self.kind == "free_abelian":
            return GroupElement(self, tuple(a + b for a, b in zip(g.key, h.key)))
        if self.kind == "finite":
            return GroupElement(self, self._table[g.key][h.key])
        ra, rb = self._records[g.key], self._records[h.key]
        word = _free_reduce(ra.word + rb.word)
        return GroupElement(self, self._register(ra.matrix @ rb.matrix, word))

    def inv(self, g: GroupElement) -> GroupElement:
        self._check_same(g)
        if self.kind == "free":
            return GroupElement(self, tuple(-x for x in reversed(g.key)))
        if self.kind == "free_abelian":
            return GroupElement(self, tuple(-x for x in g.key))
        if self.kind == "finite":
            return GroupElement(self, self._inverse[g.key])
        rec = self._records[g.key]
        word = tuple(-x for x in reversed(rec.word))
        return GroupElement(self, self._register(np.linalg.inv(rec.matrix), word))

    # -- realization-specific metadata ----------------------------------------

    def _word_of(self, g: GroupElement) -> tuple[int, ...]:
        if self.kind == "free":
            return g.key
        if self.kind == "free_abelian":
            word = []
            for i, v in enumerate(g.key):
                word.extend([(i + 1) if v > 0 else -(i + 1)] * abs(v))
            return tuple(word)
        if self.kind == "finite":
            return self._words[g.key]
        return self._records[g.key].word

    def _matrix_of(self, g: GroupElement) -> np.ndarray | None:
        if self.kind == "surface":
            return self._records[g.key].matrix
        return None

    def is_finite(self) -> bool:
        return self.kind == "finite"

    @property
    def order(self) -> int | None:
        return self._order if self.kind == "finite" else None

    def elements(self) -> list[GroupElement]:
        if self.kind != "finite":
            raise ValueError("elements() only enumerates finite groups")
        out = [GroupElement(self, i) for i in range(self._order)]
        out.sort(key=lambda g: g.sort_key())
        return out

    def symmetric_generators(self) -> list[GroupElement]:
        """Generators and inverses, deduplicated, in letter order."""
        out: list[GroupElement] = []
        for i in range(1, self.rank + 1):
            for letter in (i, -i):
                g = self.generator(letter)
                if g not in out and not g.is_identity():
                    out.append(g)
        return out

    # -- word balls ------------------------------------------------------------

    def predicted_ball_size(self, radius: int) -> int:
        if self.kind == "free":
            k = self.rank
            if k == 1:
                return 2 * radius + 1
            return 1 + 2 * k * ((2 * k - 1) ** radius - 1) // (2 * k - 2)
        if self.kind == "free_abelian":
            # upper bound: the enclosing box of the l1 ball
            return (2 * radius + 1) ** self.rank
        if self.kind == "finite":
            return self._order
        # surface groups grow slower than the free group of the same rank
        return MarkedGroup("free", rank=self.rank, ball_cap=self.ball_cap).predicted_ball_size(radius)

    def ball(self, radius: int) -> list[GroupElement]:
        """All elements of word length <= radius, sorted deterministically.

        Sorting is by word length then lexicographic canonical word; the
        enumeration fails with BallCapExceeded if the count would pass the cap.
        """
        if radius < 0:
            raise ValueError("radius must be >= 0")
        if self.kind == "free" and self.predicted_ball_size(radius) > self.ball_cap:
            raise BallCapExceeded(f"free ball({radius}) would hold {self.predicted_ball_size(radius)} elements")
        seen = {self.identity}
        frontier = [self.identity]
        sym = self.symmetric_generators()
        for _ in range(radius):
            new: list[GroupElement] = []
            for g in frontier:
                for s in sym:
                    h = self.mul(g, s)
                    if h not in seen:
                        seen.add(h)
                        new.append(h)
                        if len(seen) > self.ball_cap:
                            raise BallCapExceeded(f"ball enumeration exceeded cap {self.ball_cap}")
            new.sort(key=lambda g: g.sort_key())
            frontier = new
            if not frontier:
                break
        return sorted(seen, key=lambda g: g.sort_key())

    # -- surface registry ------------------------------------------------------

    def _probe_cells(self, orbit: np.ndarray):
        delta = 1e-8 + 1e-10 * np.abs(orbit)
        if np.max(delta) > 0.2 * _CELL:
            # beyond orbit radius ~ arccosh(5e8) double precision cannot
            # separate distinct orbit points; refuse rather than mis-identify
            raise PlateauError(
                "surface-group element beyond the certified canonicalization range "
                "(word too long for double-precision matrix equality)"
            )
        lo = np.floor((orbit - delta) / _CELL).astype(int)
        hi = np.floor((orbit + delta) / _CELL).astype(int)
        ranges = [range(a, b + 1) for a, b in zip(lo, hi)]
        return itertools.product(*ranges)

    def _lookup_key(self, word: tuple[int, ...]) -> int:
        mat = np.eye(3)
        for letter in word:
            gmat = self.polygon.generators[abs(letter) - 1]
            mat = mat @ (gmat if letter > 0 else np.linalg.inv(gmat))
        return self._register(mat, word)

    def _register(self, matrix: np.ndarray, word: tuple[int, ...]) -> int:
        orbit = matrix[:, 0]
        for cell in self._probe_cells(orbit):
            idx = self._cells.get(cell)
            if idx is not None:
                rec = self._records[idx]
                if np.max(np.abs(rec.orbit - orbit)) > _CELL:
                    continue
                if word_sort_key(word) < word_sort_key(rec.word):
                    rec.word = word
                return idx
        idx = len(self._records)
        self._records.append(_SurfaceRecord(matrix=matrix, word=word, orbit=orbit.copy()))
        self._cells[tuple(np.floor(orbit / _CELL).astype(int))] = idx
        return idx

    # -- finite helpers ----------------------------------------------------------

    def _build_inverse_table(self) -> list[int]:
        inv = [-1] * self._order
        for i, row in enumerate(self._table):
            for j, prod in enumerate(row):
                if prod == 0:
                    inv[i] = j
        if any(x < 0 for x in inv):
            raise ValueError("multiplication table has no inverses; not a group")
        return inv

    def _bfs_words(self) -> list[tuple[int, ...]]:
        words: dict[int, tuple[int, ...]] = {0: ()}
        frontier = [0]
        sym_letters = []
        for i in range(1, len(self._gen_indices) + 1):
            sym_letters.extend([i, -i])
        while frontier:
            new = []
            for idx in sorted(frontier, key=lambda i: word_sort_key(words[i])):
                for letter in sym_letters:
                    gidx = self._gen_indices[abs(letter) - 1]
                    if letter < 0:
                        gidx = self._inverse[gidx]
                    nxt = self._table[idx][gidx]
                    if nxt not in words:
                        words[nxt] = words[idx] + (letter,)
                        new.append(nxt)
            frontier = new
        if len(words) != self._order:
            raise ValueError("generators do not generate the whole finite group")
        return [words[i] for i in range(self._order)]

    def subgroup_generated(self, gens: list[GroupElement]) -> list[GroupElement]:
        """Elements of the subgroup generated by gens (finite groups only)."""
        if self.kind != "finite":
            raise ValueError("subgroup enumeration needs a finite group")
        self._check_same(*gens)
        closure = {self.identity}
        frontier = [self.identity]
        sym = []
        for g in gens:
            sym.extend([g, self.inv(g)])
        while frontier:
            new = []
            for x in frontier:
                for s in sym:
                    y = self.mul(x, s)
                    if y not in closure:
                        closure.add(y)
                        new.append(y)
            frontier = new
        return sorted(closure, key=lambda g: g.sort_key())

    def __repr__(self) -> str:
        return f"MarkedGroup({self.name}, rank={self.rank})"


# -- constructors ---------------------------------------------------------------


def free_group(rank: int, ball_cap: int = DEFAULT_BALL_CAP) -> MarkedGroup:
    return MarkedGroup("free", rank=rank, ball_cap=ball_cap, name=f"F{rank}")


def free_abelian_group(rank: int, ball_cap: int = DEFAULT_BALL_CAP) -> MarkedGroup:
    return MarkedGroup("free_abelian", rank=rank, ball_cap=ball_cap, name=f"Z^{rank}")


def cyclic_group(n: int) -> MarkedGroup:
    table = [[(i + j) % n for j in range(n)] for i in range(n)]
    return MarkedGroup("finite", table=table, generator_indices=[1 % n], name=f"Z/{n}")


def dihedral_group(n: int) -> MarkedGroup:
    """Dihedral group of order 2n: elements r^i s^j, index i + n*j."""

    def idx(i: int, j: int) -> int:
        return i % n + n * (j % 2)

    table = []
    for a in range(2 * n):
        i1, j1 = a % n, a // n
        row = []
        for b in range(2 * n):
            i2, j2 = b % n, b // n
            # (r^i1 s^j1)(r^i2 s^j2) = r^(i1 + (-1)^j1 i2) s^(j1+j2)
            i = i1 + (i2 if j1 == 0 else -i2)
            row.append(idx(i, j1 + j2))
        table.append(row)
    return MarkedGroup("finite", table=table, generator_indices=[1, n], name=f"D{n}")


def finite_group_from_table(table: list[list[int]], generator_indices: list[int], name: str = "finite") -> MarkedGroup:
    return MarkedGroup("finite", table=table, generator_indices=generator_indices, name=name)


def surface_group(genus: int, equality_tolerance: float = 1e-8, ball_cap: int = DEFAULT_BALL_CAP) -> MarkedGroup:
    """Genus-g surface group realized by the fundamental-polygon isometries.

    Equality of elements is matrix comparison through a spatial hash of base
    point orbits: distinct elements move the base point apart by at least
    twice the polygon apothem, far above double-precision noise for the word
    lengths used here.
    """
    if genus < 2:
        raise ValueError("genus must be >= 2")
    poly = fundamental_polygon(genus)
    return MarkedGroup(
        "surface",
        polygon=poly,
        equality_tolerance=equality_tolerance,
        ball_cap=ball_cap,
        name=f"Sigma{genus}",
    )


def from_spec(spec: dict) -> MarkedGroup:
    """Build a group from a declarative description (kind + parameters)."""
    kind = spec.get("kind")
    if kind == "free":
        return free_group(int(spec["rank"]))
    if kind == "free_abelian":
        return free_abelian_group(int(spec["rank"]))
    if kind == "cyclic":
        return cyclic_group(int(spec["n"]))
    if kind == "dihedral":
        return dihedral_group(int(spec["n"]))
    if kind == "surface":
        return surface_group(int(spec["genus"]))
    raise ValueError(f"unknown group kind {kind!r}")


def describe(group: MarkedGroup) -> str:
    """Reconstructible one-token description of a named group."""
    if group.kind == "free":
        return f"free:{group.rank}"
    if group.kind == "free_abelian":
        return f"free_abelian:{group.rank}"
    if group.kind == "surface":
        return f"surface:{group.polygon.genus}"
    if group.kind == "finite":
        if group.name.startswith("Z/"):
            return f"cyclic:{group.order}"
        if group.name.startswith("D"):
            return f"dihedral:{group.order // 2}"
        raise ValueError("only named finite groups serialize")
    raise ValueError(f"cannot describe group kind {group.kind}")


def from_description(text: str) -> MarkedGroup:
    kind, _, arg = text.partition(":")
    key = {"free": "rank", "free_abelian": "rank", "cyclic": "n", "dihedral": "n", "surface": "genus"}
    if kind not in key:
        raise ValueError(f"unknown group description {text!r}")
    return from_spec({"kind": kind, key[kind]: int(arg)})


# -- free-group structure ---------------------------------------------------------


def _cyclic_reduce(word: tuple[int, ...]) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Return (conjugator, core) with word = conjugator core conjugator^-1."""
    conj: list[int] = []
    core = list(word)
    while len(core) >= 2 and core[0] == -core[-1]:
        conj.append(core[0])
        core = core[1:-1]
    return tuple(conj), tuple(core)


def primitive_root(w: GroupElement) -> tuple[GroupElement, int]:
    """Primitive root and exponent: w = root^exponent, root not a proper power."""
    group = w.group
    if group.kind != "free":
        raise ValueError("primitive roots are defined for free-group elements")
    if w.is_identity():
        raise ValueError("identity has no primitive root")
    conj, core = _cyclic_reduce(w.key)
    n = len(core)
    for p in range(1, n + 1):
        if n % p != 0:
            continue
        if core == core[:p] * (n // p):
            root_word = conj + core[:p] + tuple(-x for x in reversed(conj))
            return group.from_word(_free_reduce(root_word)), n // p
    raise AssertionError("unreachable: every word is a power of itself")


def same_maximal_cyclic(x: GroupElement, y: GroupElement) -> bool:
    """True iff x and y lie in one maximal cyclic subgroup of the free group."""
    rx, _ = primitive_root(x)
    ry, _ = primitive_root(y)
    return rx == ry or rx == ry.inv()
