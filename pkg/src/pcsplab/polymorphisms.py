"""Boolean-source function tables, minors, and polymorphism tests.

A table of arity n assigns a target value to every subset of coordinates
[n] = {1..n}; subsets are carried as bitmasks internally (bit i-1 is
coordinate i) and ordered canonically by (cardinality, element order).
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass
from functools import lru_cache

from .errors import ArityBoundError, FormatError
from .structures import TemplatePair, named_template

DEFAULT_ARITY_CAP = 5


@lru_cache(maxsize=None)
def subset_masks(n: int) -> tuple[int, ...]:
    """All masks over [n] in canonical (cardinality, lexicographic) order."""
    def key(mask: int):
        return (bin(mask).count("1"), [i for i in range(n) if mask >> i & 1])

    return tuple(sorted(range(1 << n), key=key))


def coords_of(mask: int) -> tuple[int, ...]:
    """1-based coordinates of a mask, ascending."""
    out = []
    i = 1
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return tuple(out)


def mask_of(coords) -> int:
    mask = 0
    for i in coords:
        mask |= 1 << (i - 1)
    return mask


@dataclass(frozen=True)
class CoordSet:
    """A subset of coordinates of an arity-n function."""

    arity: int
    members: frozenset[int]

    def __post_init__(self):
        if not isinstance(self.members, frozenset):
            object.__setattr__(self, "members", frozenset(self.members))
        for i in self.members:
            if not 1 <= i <= self.arity:
                raise ValueError(f"coordinate {i} outside 1..{self.arity}")

    @classmethod
    def from_mask(cls, arity: int, mask: int) -> CoordSet:
        return cls(arity, frozenset(coords_of(mask)))

    @property
    def mask(self) -> int:
        return mask_of(self.members)

    def sorted(self) -> tuple[int, ...]:
        return tuple(sorted(self.members))


@dataclass(frozen=True)
class PolyTable:
    """Total table over all 2**arity coordinate subsets, values in the target domain."""

    arity: int
    target_size: int
    values: tuple[int, ...]  # indexed by mask

    def __post_init__(self):
        if self.arity < 1:
            raise ValueError(f"arity must be >= 1, got {self.arity}")
        if len(self.values) != 1 << self.arity:
            raise ValueError(f"expected {1 << self.arity} entries, got {len(self.values)}")
        for v in self.values:
            if not 0 <= v < self.target_size:
                raise ValueError(f"value {v} outside target domain")

    def value_on(self, mask: int) -> int:
        return self.values[mask]


def dictator(n: int, coordinate: int, target_size: int = 2) -> PolyTable:
    """The projection onto one coordinate."""
    bit = 1 << (coordinate - 1)
    return PolyTable(n, target_size, tuple(1 if mask & bit else 0 for mask in range(1 << n)))


def alternating_threshold(target_size: int = 2) -> PolyTable:
    """Arity-3 table: 1 when the alternating sum of indicators is positive."""
    vals = []
    for mask in range(8):
        s = (mask & 1) - (mask >> 1 & 1) + (mask >> 2 & 1)
        vals.append(1 if s > 0 else 0)
    return PolyTable(3, target_size, tuple(vals))


def evaluate_on_set(table: PolyTable, coords: CoordSet) -> int:
    if coords.arity != table.arity:
        raise ValueError(f"arity mismatch: table {table.arity}, set {coords.arity}")
    return table.values[coords.mask]


@dataclass(frozen=True)
class MinorMap:
    """A total map [n] -> [m] used to identify coordinates of a table."""

    source_arity: int
    target_arity: int
    mapping: tuple[int, ...]  # mapping[i-1] = image of coordinate i

    def __post_init__(self):
        if len(self.mapping) != self.source_arity:
            raise ValueError("mapping must be total on source coordinates")
        for v in self.mapping:
            if not 1 <= v <= self.target_arity:
                raise ValueError(f"image {v} outside 1..{self.target_arity}")

    def __call__(self, i: int) -> int:
        return self.mapping[i - 1]


def identity_minor(n: int) -> MinorMap:
    return MinorMap(n, n, tuple(range(1, n + 1)))


def compose_minors(first: MinorMap, second: MinorMap) -> MinorMap:
    """The map i -> second(first(i))."""
    if first.target_arity != second.source_arity:
        raise ValueError("arity mismatch in composition")
    return MinorMap(first.source_arity, second.target_arity, tuple(second(first(i)) for i in range(1, first.source_arity + 1)))


def minor(table: PolyTable, alpha: MinorMap) -> PolyTable:
    """The table g with g(X) = f({i : alpha(i) in X})."""
    if alpha.source_arity != table.arity:
        raise ValueError(f"arity mismatch: table {table.arity}, map source {alpha.source_arity}")
    m = alpha.target_arity
    bits = [1 << (alpha(i) - 1) for i in range(1, table.arity + 1)]
    values = []
    for mask in range(1 << m):
        pull = 0
        for i, b in enumerate(bits):
            if mask & b:
                pull |= 1 << i
        values.append(table.values[pull])
    return PolyTable(m, table.target_size, tuple(values))


def preimage_set(alpha: MinorMap, coords: CoordSet) -> CoordSet:
    if coords.arity != alpha.target_arity:
        raise ValueError(f"arity mismatch: map target {alpha.target_arity}, set {coords.arity}")
    members = frozenset(i for i in range(1, alpha.source_arity + 1) if alpha(i) in coords.members)
    return CoordSet(alpha.source_arity, members)


def image_mask(alpha: MinorMap, mask: int) -> int:
    out = 0
    for i in range(1, alpha.source_arity + 1):
        if mask >> (i - 1) & 1:
            out |= 1 << (alpha(i) - 1)
    return out


@dataclass(frozen=True)
class MinorChain:
    """Tables f_0..f_l with maps linking consecutive tables as minors."""

    tables: tuple[PolyTable, ...]
    maps: tuple[MinorMap, ...]

    def __post_init__(self):
        if len(self.tables) != len(self.maps) + 1:
            raise ValueError("a chain of l maps needs l+1 tables")
        for i, alpha in enumerate(self.maps):
            if minor(self.tables[i], alpha) != self.tables[i + 1]:
                raise ValueError(f"table {i + 1} is not the stated minor of table {i}")

    def composed_map(self, i: int, j: int) -> MinorMap:
        if not 0 <= i <= j <= len(self.maps):
            raise ValueError("bad chain positions")
        alpha = identity_minor(self.tables[i].arity)
        for step in range(i, j):
            alpha = compose_minors(alpha, self.maps[step])
        return alpha


def _require_boolean_one_in_three_source(template: TemplatePair) -> None:
    one_in_3 = named_template("1in3")
    if (
        template.source.domain_size != 2
        or template.source.signature != (3,)
        or template.source.single_ternary().as_set != one_in_3.single_ternary().as_set
    ):
        raise ValueError("partition compatibility requires the exactly-one-1 Boolean source")


def is_polymorphism(table: PolyTable, template: TemplatePair) -> bool:
    """Partition test: every ordered 3-partition of [n] must map into the relation."""
    _require_boolean_one_in_three_source(template)
    rel = template.target.single_ternary().as_set
    if table.target_size != template.target.domain_size:
        raise ValueError("table target size does not match template target")
    values = table.values
    full = (1 << table.arity) - 1
    for x in range(1 << table.arity):
        rest = full ^ x
        y = rest
        vx = values[x]
        while True:
            if (vx, values[y], values[rest ^ y]) not in rel:
                return False
            if y == 0:
                break
            y = (y - 1) & rest
    return True


@dataclass(frozen=True)
class GeneralTable:
    """A total table over source_size**arity argument tuples.

    The index of (a_1, ..., a_n) is sum a_i * source_size**(i-1).
    """

    arity: int
    source_size: int
    target_size: int
    values: tuple[int, ...]

    def __post_init__(self):
        if self.arity < 1:
            raise ValueError(f"arity must be >= 1, got {self.arity}")
        if len(self.values) != self.source_size ** self.arity:
            raise ValueError("table has the wrong number of entries")
        for v in self.values:
            if not 0 <= v < self.target_size:
                raise ValueError(f"value {v} outside target domain")

    def value_at(self, args) -> int:
        idx = 0
        for i, a in enumerate(args):
            idx += a * self.source_size ** i
        return self.values[idx]


def boolean_to_general(table: PolyTable) -> GeneralTable:
    return GeneralTable(table.arity, 2, table.target_size, table.values)


def is_polymorphism_general(table: GeneralTable, template: TemplatePair) -> bool:
    """Column-wise test over all choices of n source tuples, per relation pair."""
    if table.source_size != template.source.domain_size:
        raise ValueError("table source size does not match template source")
    if table.target_size != template.target.domain_size:
        raise ValueError("table target size does not match template target")
    for rel_a, rel_b in zip(template.source.relations, template.target.relations):
        allowed = rel_b.as_set
        for rows in itertools.product(rel_a.tuples, repeat=table.arity):
            image = tuple(
                table.value_at(tuple(rows[j][pos] for j in range(table.arity)))
                for pos in range(rel_a.arity)
            )
            if image not in allowed:
                return False
    return True


@lru_cache(maxsize=None)
def _partition_checks(n: int):
    """Unordered coordinate 3-partitions grouped by their last canonical cell."""
    order = subset_masks(n)
    position = {mask: i for i, mask in enumerate(order)}
    by_last: list[list[tuple[int, int, int]]] = [[] for _ in order]
    seen = set()
    full = (1 << n) - 1
    for x in range(1 << n):
        rest = full ^ x
        y = rest
        while True:
            z = rest ^ y
            key = tuple(sorted((x, y, z)))
            if key not in seen:
                seen.add(key)
                by_last[max(position[x], position[y], position[z])].append(key)
            if y == 0:
                break
            y = (y - 1) & rest
    return order, by_last


def enumerate_polymorphisms(template: TemplatePair, n: int, *, arity_cap: int = DEFAULT_ARITY_CAP, force: bool = False):
    """Yield every polymorphism of arity n exactly once, in canonical order.

    The stream order is lexicographic in the value vector read along the
    canonical subset order.  Backtracks over cells, pruning as soon as all
    three cells of some partition are assigned.
    """
    _require_boolean_one_in_three_source(template)
    if n > arity_cap:
        if not force:
            raise ArityBoundError(f"arity {n} exceeds cap {arity_cap}; pass force to override")
        warnings.warn(f"enumerating at arity {n} beyond the default cap; table space is large", stacklevel=2)
    if n < 1:
        raise ValueError("arity must be >= 1")
    rel = template.target.single_ternary().as_set
    k = template.target.domain_size
    order, by_last = _partition_checks(n)

    # allowed value triples per partition, tested in every ordering
    def triple_ok(a: int, b: int, c: int) -> bool:
        return (
            (a, b, c) in rel or (a, c, b) in rel or (b, a, c) in rel
            or (b, c, a) in rel or (c, a, b) in rel or (c, b, a) in rel
        )

    values = [-1] * (1 << n)
    ncells = len(order)

    def rec(i: int):
        if i == ncells:
            yield PolyTable(n, k, tuple(values))
            return
        cell = order[i]
        checks = by_last[i]
        for v in range(k):
            values[cell] = v
            if all(triple_ok(values[x], values[y], values[z]) for x, y, z in checks):
                yield from rec(i + 1)
        values[cell] = -1

    yield from rec(0)


def i_sets(table: PolyTable, color: int, max_size: int) -> list[CoordSet]:
    """All X with |X| <= max_size and f(X) = color, in canonical order."""
    if not 0 <= color < table.target_size:
        raise ValueError(f"color {color} outside target domain")
    out = []
    for mask in subset_masks(table.arity):
        if bin(mask).count("1") <= max_size and table.values[mask] == color:
            out.append(CoordSet.from_mask(table.arity, mask))
    return out


# --- text format -------------------------------------------------------------
#
#   poly <n> <target_size>
#   <bits> <value>
#
# one line per subset in canonical order; <bits> is b1..bn with bi = 1 when
# coordinate i belongs to the subset.


def format_poly_table(table: PolyTable) -> str:
    lines = [f"poly {table.arity} {table.target_size}"]
    for mask in subset_masks(table.arity):
        bits = "".join("1" if mask >> i & 1 else "0" for i in range(table.arity))
        lines.append(f"{bits} {table.values[mask]}")
    return "\n".join(lines) + "\n"


def parse_poly_table(text: str) -> PolyTable:
    header = None
    rows = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if header is None:
            if parts[0] != "poly" or len(parts) != 3:
                raise FormatError(f"line {lineno}: expected 'poly <n> <target_size>' header")
            header = (int(parts[1]), int(parts[2]))
        else:
            if len(parts) != 2:
                raise FormatError(f"line {lineno}: expected '<bits> <value>'")
            rows.append((lineno, parts[0], parts[1]))
    if header is None:
        raise FormatError("missing poly header")
    n, k = header
    if len(rows) != 1 << n:
        raise FormatError(f"expected {1 << n} table rows, got {len(rows)}")
    values = [-1] * (1 << n)
    for lineno, bits, value in rows:
        if len(bits) != n or any(ch not in "01" for ch in bits):
            raise FormatError(f"line {lineno}: bad subset bits {bits!r}")
        mask = sum(1 << i for i, ch in enumerate(bits) if ch == "1")
        if values[mask] != -1:
            raise FormatError(f"line {lineno}: duplicate subset {bits!r}")
        values[mask] = int(value)
    try:
        return PolyTable(n, k, tuple(values))
    except ValueError as exc:
        raise FormatError(str(exc)) from exc
