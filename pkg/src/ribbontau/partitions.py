"""Integer-partition combinatorics: enumeration, hooks, contents, shifts.

Partitions index every series in this package.  They are stored without
trailing zeros so that equality is plain tuple equality; operations that
need a fixed number of rows pad on demand.

Conventions: cells of a partition lam are pairs (i, j) with 1 <= i <= len(lam)
and 1 <= j <= lam[i-1]; the hook length of a cell is
h(i,j) = lam_i - j + lam'_j - i + 1 (lam' the conjugate) and its content is
j - i.
"""

from __future__ import annotations

from typing import Callable, Iterable, Iterator

#: Default guardrail for enumerate_partitions.  Weight 24 already yields
#: 1575 partitions; anything larger is almost certainly a misconfiguration
#: at desk scale.
DEFAULT_MAX_WEIGHT_CAP = 24


class PartitionCapError(ValueError):
    """Enumeration request exceeds the configured hard cap on the weight."""


class Partition:
    """A weakly decreasing tuple of positive integers; () is the empty partition."""

    __slots__ = ("parts",)

    def __init__(self, parts: Iterable[int] = ()):
        parts = tuple(int(p) for p in parts)
        for k, p in enumerate(parts):
            if p < 1:
                raise ValueError(f"partition parts must be positive, got {p} at index {k}")
            if k + 1 < len(parts) and parts[k + 1] > p:
                raise ValueError(f"partition parts must be weakly decreasing, got {parts}")
        self.parts = parts

    @property
    def weight(self) -> int:
        """|lam|, the number of cells."""
        return sum(self.parts)

    @property
    def length(self) -> int:
        """ell(lam), the number of rows."""
        return len(self.parts)

    def cells(self) -> Iterator[tuple[int, int]]:
        """Yield the cells (i, j), 1-based, row by row."""
        for i, row in enumerate(self.parts, start=1):
            for j in range(1, row + 1):
                yield (i, j)

    def conjugate(self) -> "Partition":
        """The transposed diagram lam'."""
        if not self.parts:
            return Partition()
        return Partition(
            sum(1 for p in self.parts if p >= j) for j in range(1, self.parts[0] + 1)
        )

    def padded(self, n: int) -> tuple[int, ...]:
        """parts padded with zeros to length n (n >= length)."""
        if n < len(self.parts):
            raise ValueError(f"cannot pad length-{len(self.parts)} partition to {n} rows")
        return self.parts + (0,) * (n - len(self.parts))

    def to_list(self) -> list[int]:
        """Serialized form: a plain list of parts, [] for the empty partition."""
        return list(self.parts)

    def __eq__(self, other) -> bool:
        return isinstance(other, Partition) and self.parts == other.parts

    def __hash__(self) -> int:
        return hash(self.parts)

    def __iter__(self):
        return iter(self.parts)

    def __len__(self) -> int:
        return len(self.parts)

    def __bool__(self) -> bool:
        return bool(self.parts)

    def __repr__(self) -> str:
        return f"Partition({list(self.parts)!r})"


class CellContentWeight:
    """A total function on cell contents, r: Z -> C.

    Wraps a caller-supplied callable; evaluation must be pure (same input,
    same output).  Used for content products such as the partition-indexed
    Pochhammer symbol, where r(m) = N + m.
    """

    __slots__ = ("fn",)

    def __init__(self, fn: Callable[[int], complex]):
        self.fn = fn

    def __call__(self, m: int) -> complex:
        return self.fn(m)


def _partitions_of(weight: int, max_part: int, max_length: int) -> Iterator[tuple[int, ...]]:
    """Partitions of exact weight, parts <= max_part, length <= max_length,
    in descending lexicographic order."""
    if weight == 0:
        yield ()
        return
    if max_length == 0:
        return
    for first in range(min(weight, max_part), 0, -1):
        for rest in _partitions_of(weight - first, first, max_length - 1):
            yield (first,) + rest


def enumerate_partitions(
    max_weight: int,
    max_length: int,
    cap: int = DEFAULT_MAX_WEIGHT_CAP,
) -> list[Partition]:
    """All partitions with |lam| <= max_weight and ell(lam) <= max_length.

    The order is fixed and documented: graded by weight, then descending
    lexicographic on the parts; the empty partition comes first.  Series
    truncations throughout the package sum in this order, which makes every
    reported value reproducible across runs.

    Raises PartitionCapError when max_weight exceeds ``cap`` (default 24).
    """
    if max_weight < 0 or max_length < 0:
        raise ValueError("max_weight and max_length must be non-negative")
    if max_weight > cap:
        raise PartitionCapError(
            f"max_weight={max_weight} exceeds the hard cap {cap}; "
            f"pass cap= explicitly to raise it"
        )
    out: list[Partition] = []
    for w in range(max_weight + 1):
        for parts in _partitions_of(w, w, max_length):
            out.append(Partition(parts))
    return out


def hooks_and_contents(lam: Partition) -> dict[tuple[int, int], tuple[int, int]]:
    """Per-cell table {(i, j): (hook length, content j - i)}."""
    conj = lam.conjugate().parts
    table: dict[tuple[int, int], tuple[int, int]] = {}
    for i, row in enumerate(lam.parts, start=1):
        for j in range(1, row + 1):
            hook = row - j + conj[j - 1] - i + 1
            table[(i, j)] = (hook, j - i)
    return table


def hook_product(lam: Partition) -> int:
    """Product of all hook lengths of lam; 1 for the empty partition."""
    prod = 1
    for hook, _ in hooks_and_contents(lam).values():
        prod *= hook
    return prod


def content_product(lam: Partition, w: Callable[[int], complex]):
    """Product over cells of w(j - i); 1 for the empty partition.

    Accepts a CellContentWeight or any callable.  The return type follows
    the arithmetic of w's values (Fraction in, Fraction out).
    """
    prod = 1
    for i, row in enumerate(lam.parts, start=1):
        for j in range(1, row + 1):
            prod = prod * w(j - i)
    return prod


def shift_partition(lam: Partition, q: int, n_rows: int) -> Partition:
    """The partition (lam_1 + q, ..., lam_N + q) on exactly N = n_rows rows.

    lam is padded with zeros to N rows first, so the result has length N and
    weight |lam| + q*N.  Only defined inside N-row partitions: requires
    ell(lam) <= N.
    """
    if q < 1:
        raise ValueError(f"shift q must be a positive integer, got {q}")
    if lam.length > n_rows:
        raise ValueError(
            f"shift by q^N only defined for ell(lam) <= N; got ell={lam.length}, N={n_rows}"
        )
    return Partition(p + q for p in lam.padded(n_rows))
