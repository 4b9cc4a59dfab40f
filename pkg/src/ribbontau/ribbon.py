"""Embedded (ribbon) graphs as rotation systems.

A graph with n edges has side labels +-1..+-n; each vertex carries a cyclic
sequence of the labels of the sides being left while walking around the
vertex in the positive direction.  Every label occurs exactly once across
all vertices.

Faces are the orbits of the permutation phi = sigma o alpha, where sigma
maps a label to its cyclic successor at its vertex and alpha(i) = -i flips
an edge side.  This pins the orientation convention by two calibration
facts: the segment graph (n=1, rotations [[1], [-1]]) has a single face
containing both labels, and the one-vertex loop ([[1, -1]]) has two faces
((1)) and ((-1)).  With this convention the dual of the dual is literally
the original rotation system, and the product of corner matrices along a
face word is the dual-vertex monodromy used by the model module.

All words are stored in canonical rotation (smallest label first) so that
output is deterministic.
"""

from __future__ import annotations

from typing import Iterable, Sequence


class GraphValidationError(ValueError):
    """The label multiset of a rotation system is not exactly {+-1..+-n}."""


def canonical_rotation(labels: Sequence[int]) -> tuple[int, ...]:
    """Rotate a cyclic word so its smallest label comes first."""
    labels = tuple(labels)
    if not labels:
        return labels
    k = labels.index(min(labels))
    return labels[k:] + labels[:k]


class MonodromyWord:
    """A cyclic sequence of corner labels, stored in canonical rotation."""

    __slots__ = ("labels",)

    def __init__(self, labels: Iterable[int]):
        labels = tuple(int(x) for x in labels)
        if len(set(labels)) != len(labels):
            raise ValueError(f"labels repeat within a monodromy word: {labels}")
        self.labels = canonical_rotation(labels)

    def __iter__(self):
        return iter(self.labels)

    def __len__(self):
        return len(self.labels)

    def __eq__(self, other) -> bool:
        return isinstance(other, MonodromyWord) and self.labels == other.labels

    def __hash__(self):
        return hash(self.labels)

    def __repr__(self) -> str:
        return f"MonodromyWord({list(self.labels)!r})"


class RibbonGraph:
    """A validated rotation system; build with :func:`build_graph`."""

    __slots__ = ("n", "vertex_rotations", "_faces")

    def __init__(self, n: int, vertex_rotations: Sequence[Sequence[int]]):
        if n < 1:
            raise GraphValidationError(f"edge count must be positive, got {n}")
        rotations = []
        for rot in vertex_rotations:
            rot = tuple(int(x) for x in rot)
            if not rot:
                raise GraphValidationError("empty rotation sequence (isolated vertices not supported)")
            rotations.append(rot)
        seen: list[int] = [x for rot in rotations for x in rot]
        expected = set(range(1, n + 1)) | set(range(-n, 0))
        dupes = sorted({x for x in seen if seen.count(x) > 1})
        missing = sorted(expected - set(seen))
        extra = sorted(set(seen) - expected)
        if dupes or missing or extra:
            raise GraphValidationError(
                f"labels must cover +-1..+-{n} exactly once; "
                f"duplicates={dupes}, missing={missing}, unexpected={extra}"
            )
        # the graph must be drawn on a single closed surface: reject
        # disconnected rotation systems (their chi exceeds 2)
        vertex_of = {}
        for v, rot in enumerate(rotations):
            for x in rot:
                vertex_of[x] = v
        reached = {0}
        frontier = [0]
        while frontier:
            v = frontier.pop()
            for x in rotations[v]:
                w = vertex_of[-x]
                if w not in reached:
                    reached.add(w)
                    frontier.append(w)
        if len(reached) != len(rotations):
            raise GraphValidationError(
                f"rotation system is disconnected ({len(rotations) - len(reached)} "
                "vertices unreachable); embedded graphs live on one closed surface"
            )
        self.n = n
        self.vertex_rotations = tuple(MonodromyWord(rot) for rot in rotations)
        self._faces = self._compute_faces()

    @property
    def num_vertices(self) -> int:
        return len(self.vertex_rotations)

    @property
    def num_faces(self) -> int:
        return len(self.faces())

    def labels(self) -> list[int]:
        return sorted(set(range(1, self.n + 1)) | set(range(-self.n, 0)))

    def _successor(self) -> dict[int, int]:
        """sigma: label -> next label in its vertex rotation."""
        succ: dict[int, int] = {}
        for word in self.vertex_rotations:
            lab = word.labels
            for k, x in enumerate(lab):
                succ[x] = lab[(k + 1) % len(lab)]
        return succ

    def _compute_faces(self) -> tuple[MonodromyWord, ...]:
        succ = self._successor()
        remaining = set(succ)
        words = []
        while remaining:
            start = min(remaining)
            orbit = [start]
            remaining.discard(start)
            cur = succ[-start]
            while cur != start:
                orbit.append(cur)
                remaining.discard(cur)
                cur = succ[-cur]
            words.append(MonodromyWord(orbit))
        return tuple(sorted(words, key=lambda w: w.labels))

    def faces(self) -> list[MonodromyWord]:
        """Orbits of phi = sigma o alpha, ordered by their canonical word."""
        return list(self._faces)

    def canonical_form(self) -> tuple[tuple[int, ...], ...]:
        """Sorted tuple of canonicalized vertex words; equal forms mean
        the two rotation systems are the same labeled map."""
        return tuple(sorted(w.labels for w in self.vertex_rotations))

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, RibbonGraph)
            and self.n == other.n
            and self.canonical_form() == other.canonical_form()
        )

    def __hash__(self):
        return hash((self.n, self.canonical_form()))

    def __repr__(self) -> str:
        rots = [list(w.labels) for w in self.vertex_rotations]
        return f"RibbonGraph(n={self.n}, vertex_rotations={rots!r})"

    def to_json_dict(self) -> dict:
        return {"n": self.n, "vertices": [list(w.labels) for w in self.vertex_rotations]}


def build_graph(n: int, vertex_rotations: Sequence[Sequence[int]]) -> RibbonGraph:
    """Validate a rotation system and return the graph."""
    return RibbonGraph(n, vertex_rotations)


def faces(graph: RibbonGraph) -> list[MonodromyWord]:
    """Face words of the graph (dual-vertex monodromy words)."""
    return graph.faces()


def dual(graph: RibbonGraph) -> RibbonGraph:
    """The dual graph: vertex rotations are the face words of the original.

    dual(dual(G)) reproduces G's rotation system exactly (faces of the dual
    are the orbits of sigma itself).
    """
    return RibbonGraph(graph.n, [w.labels for w in graph.faces()])


def euler_characteristic(graph: RibbonGraph) -> int:
    """V - n + F, the Euler characteristic of the underlying surface."""
    return graph.num_vertices - graph.n + graph.num_faces


def monodromy_words(graph: RibbonGraph) -> tuple[list[MonodromyWord], list[MonodromyWord]]:
    """(vertex words, face words), each canonicalized.

    Vertex words read the rotations in the positive traversal; face words
    are the negative-direction traversals around the dual vertices.
    """
    return list(graph.vertex_rotations), graph.faces()
