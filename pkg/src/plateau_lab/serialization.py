"""Text formats for sphere vectors and cycles with bit-exact round trips.

Vector lines are "canonical-word amplitude-components" with amplitudes in
float hex; cycle files carry a header, the vertex blocks, and the simplex
table with gluing twists as words.
"""

from __future__ import annotations

import numpy as np

from .cycles import Corner, SimplicialCycle, Simplex
from .groups import MarkedGroup, describe, from_description, word_from_string, word_to_string
from .sphere import SphereVector


def vector_to_lines(u: SphereVector) -> list[str]:
    lines = []
    for g in u.support():
        payload = " ".join(float(x).hex() for x in u.entries[g])
        lines.append(f"{word_to_string(g.word)} {payload}")
    return lines


def vector_from_lines(group: MarkedGroup, lines: list[str], payload_dim: int) -> SphereVector:
    entries = {}
    for line in lines:
        parts = line.split()
        g = group.from_word(word_from_string(parts[0]))
        payload = np.array([float.fromhex(tok) for tok in parts[1:]])
        if payload.shape != (payload_dim,):
            raise ValueError("payload width does not match the header")
        entries[g] = payload
    return SphereVector(group, entries, payload_dim)


def vector_to_text(u: SphereVector) -> str:
    head = f"spherevector group={describe(u.group)} payload={u.payload_dim} entries={len(u.entries)}"
    return "\n".join([head] + vector_to_lines(u)) + "\n"


def vector_from_text(text: str, group: MarkedGroup | None = None) -> SphereVector:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    head = dict(tok.split("=") for tok in lines[0].split()[1:])
    if group is None:
        group = from_description(head["group"])
    payload_dim = int(head["payload"])
    return vector_from_lines(group, lines[1:], payload_dim)


def cycle_to_text(cycle: SimplicialCycle) -> str:
    m = cycle.vertices[0].payload_dim if cycle.vertices else 1
    out = [
        "cycle group=%s dim=%d vertices=%d simplices=%d payload=%d"
        % (describe(cycle.group), cycle.dim, len(cycle.vertices), len(cycle.simplices), m)
    ]
    for i, v in enumerate(cycle.vertices):
        out.append(f"vertex {i} entries={len(v.entries)}")
        out.extend(vector_to_lines(v))
    for s in cycle.simplices:
        corners = " ".join(f"{c.vertex}:{word_to_string(c.twist.word)}" for c in s.corners)
        out.append(f"simplex {s.multiplicity} {corners}")
    return "\n".join(out) + "\n"


def cycle_from_text(text: str, group: MarkedGroup | None = None) -> SimplicialCycle:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    head = dict(tok.split("=") for tok in lines[0].split()[1:])
    if group is None:
        group = from_description(head["group"])
    payload_dim = int(head["payload"])
    n_vertices = int(head["vertices"])
    vertices = []
    i = 1
    for _ in range(n_vertices):
        vh = lines[i].split()
        if vh[0] != "vertex":
            raise ValueError("malformed cycle file: expected a vertex block")
        count = int(dict(tok.split("=") for tok in vh[2:])["entries"])
        vertices.append(vector_from_lines(group, lines[i + 1 : i + 1 + count], payload_dim))
        i += 1 + count
    simplices = []
    for line in lines[i:]:
        parts = line.split()
        if parts[0] != "simplex":
            raise ValueError("malformed cycle file: expected a simplex row")
        mult = int(parts[1])
        corners = []
        for tok in parts[2:]:
            vid, word = tok.split(":")
            corners.append(Corner(int(vid), group.from_word(word_from_string(word))))
        simplices.append(Simplex(tuple(corners), mult))
    return SimplicialCycle(group, vertices, simplices)
