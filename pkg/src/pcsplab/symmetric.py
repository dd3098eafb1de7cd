"""Weight-indexed polymorphism tables and propagation-based existence search.

A symmetric table stores one value per Hamming weight 0..n; compatibility
says every weight triple (a, b, c) with a+b+c = n must map into the target
relation (in every order, which is free when the relation is symmetric).
A two-block table stores one value per weight pair.  Search is chronological
backtracking with candidate-set propagation; when the target's automorphism
group identifies colors, the first branched cell only tries orbit
representatives.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass

from .errors import TimeBudgetExceeded
from .structures import RelStructure, TemplatePair, automorphism_orbits

Cell = int | tuple[int, int]


@dataclass(frozen=True)
class SymTable:
    """Values per weight 0..arity; None marks an unassigned cell."""

    arity: int
    target_size: int
    values: tuple[int | None, ...]

    def __post_init__(self):
        if self.arity < 1:
            raise ValueError(f"arity must be >= 1, got {self.arity}")
        if len(self.values) != self.arity + 1:
            raise ValueError(f"expected {self.arity + 1} cells, got {len(self.values)}")
        for v in self.values:
            if v is not None and not 0 <= v < self.target_size:
                raise ValueError(f"value {v} outside target domain")

    @property
    def fully_assigned(self) -> bool:
        return all(v is not None for v in self.values)

    def assigned_weights(self) -> dict[int, int]:
        return {w: v for w, v in enumerate(self.values) if v is not None}


def empty_sym_table(arity: int, target_size: int) -> SymTable:
    return SymTable(arity, target_size, (None,) * (arity + 1))


def seeded_sym_table(arity: int, target_size: int, seed: dict[int, int]) -> SymTable:
    values: list[int | None] = [None] * (arity + 1)
    for w, v in seed.items():
        values[w] = v
    return SymTable(arity, target_size, tuple(values))


@dataclass(frozen=True)
class BlockSymTable:
    """Values per weight pair (w1, w2), 0 <= wi <= ki; None marks unassigned."""

    k1: int
    k2: int
    target_size: int
    values: tuple[int | None, ...]  # index w1 * (k2 + 1) + w2

    def __post_init__(self):
        if self.k1 < 1 or self.k2 < 1:
            raise ValueError("block sizes must be >= 1")
        if len(self.values) != (self.k1 + 1) * (self.k2 + 1):
            raise ValueError("wrong number of cells")
        for v in self.values:
            if v is not None and not 0 <= v < self.target_size:
                raise ValueError(f"value {v} outside target domain")

    def value(self, w1: int, w2: int) -> int | None:
        return self.values[w1 * (self.k2 + 1) + w2]

    @property
    def fully_assigned(self) -> bool:
        return all(v is not None for v in self.values)


@dataclass(frozen=True)
class ForceEvent:
    cell: Cell
    color: int
    triple: tuple


@dataclass(frozen=True)
class ContradictionEvent:
    cell: Cell
    eliminations: tuple[tuple[int, tuple], ...]  # (color, justifying triple)


@dataclass(frozen=True)
class PropagationTrace:
    events: tuple

    @property
    def contradiction(self) -> ContradictionEvent | None:
        if self.events and isinstance(self.events[-1], ContradictionEvent):
            return self.events[-1]
        return None

    def forced(self) -> list[ForceEvent]:
        return [e for e in self.events if isinstance(e, ForceEvent)]

    def format_lines(self, cell_name=None) -> list[str]:
        name = cell_name or (lambda c: f"f({c})")
        lines = []
        for e in self.events:
            if isinstance(e, ForceEvent):
                lines.append(f"force {name(e.cell)} = {e.color} via {e.triple}")
            else:
                lines.append(f"contradiction at {name(e.cell)}")
        return lines

    def to_dict(self) -> dict:
        events = []
        for e in self.events:
            if isinstance(e, ForceEvent):
                events.append({"kind": "force", "cell": e.cell, "color": e.color, "triple": list(e.triple)})
            else:
                events.append({
                    "kind": "contradiction",
                    "cell": e.cell,
                    "eliminations": [{"color": c, "triple": list(t)} for c, t in e.eliminations],
                })
        return {"events": events}


def sym_compatible_triples(n: int) -> list[tuple[int, int, int]]:
    """All weight multisets {a, b, c} with a+b+c = n, in canonical order."""
    if n < 1:
        raise ValueError("arity must be >= 1")
    return [(a, b, n - a - b) for a in range(n + 1) for b in range(a, n + 1) if n - a - b >= b]


def _allowed_table(target: RelStructure) -> list[list[int]]:
    """allowed[x][y] = bitmask of v such that the multiset (x, y, v) maps into R.

    Every ordering is required, which is what the compatibility condition
    demands of weight-indexed tables; for symmetric relations this equals
    the single-order test.
    """
    rel = target.single_ternary().as_set
    k = target.domain_size
    table = [[0] * k for _ in range(k)]
    for x in range(k):
        for y in range(k):
            mask = 0
            for v in range(k):
                if all(p in rel for p in set(itertools.permutations((x, y, v)))):
                    mask |= 1 << v
            table[x][y] = mask
    return table


def is_symmetric_polymorphism(table: SymTable, template: TemplatePair) -> bool:
    """Compatibility of a fully assigned weight table with the target relation."""
    if not table.fully_assigned:
        raise ValueError("table has unassigned cells")
    if table.target_size != template.target.domain_size:
        raise ValueError("table target size does not match template target")
    rel = template.target.single_ternary()
    rel_set = rel.as_set
    symmetric = rel.is_symmetric()
    for a, b, c in sym_compatible_triples(table.arity):
        vals = (table.values[a], table.values[b], table.values[c])
        if symmetric:
            if vals not in rel_set:
                return False
        elif not all(p in rel_set for p in set(itertools.permutations(vals))):
            return False
    return True


def is_block_symmetric_polymorphism(table: BlockSymTable, template: TemplatePair) -> bool:
    """Compatibility over every pair of weight compositions of the two blocks."""
    if not table.fully_assigned:
        raise ValueError("table has unassigned cells")
    rel = template.target.single_ternary().as_set
    for comp1 in _ordered_compositions(table.k1):
        for comp2 in _ordered_compositions(table.k2):
            vals = tuple(table.value(w1, w2) for w1, w2 in zip(comp1, comp2))
            if vals not in rel:
                return False
    return True


def _ordered_compositions(total: int) -> list[tuple[int, int, int]]:
    return [(a, b, total - a - b) for a in range(total + 1) for b in range(total + 1 - a)]


def propagate(template: TemplatePair, partial: SymTable) -> tuple[SymTable, PropagationTrace]:
    """Narrowing fixpoint over weight triples, scanned in canonical order.

    For every triple with two assigned slots the third slot's candidate set
    is intersected with the values compatible with the assigned pair;
    singletons are forced immediately and a contradiction (empty candidate
    set) stops the scan.  The event order is deterministic.
    """
    n = partial.arity
    k = partial.target_size
    if k != template.target.domain_size:
        raise ValueError(
            f"table target size {k} does not match template target {template.target.domain_size}"
        )
    allowed = _allowed_table(template.target)
    full = (1 << k) - 1
    cand = [full] * (n + 1)
    assigned: list[int | None] = list(partial.values)
    for w, v in enumerate(partial.values):
        if v is not None:
            cand[w] = 1 << v
    triples = sym_compatible_triples(n)
    events: list = []
    eliminations: dict[int, list[tuple[int, tuple]]] = {w: [] for w in range(n + 1)}

    def narrow(target_w: int, other1: int, other2: int, triple) -> bool:
        """Returns False on contradiction."""
        if assigned[other1] is None or assigned[other2] is None:
            return True
        mask = allowed[assigned[other1]][assigned[other2]]
        new = cand[target_w] & mask
        if new == cand[target_w]:
            return True
        removed = cand[target_w] & ~new
        for v in range(k):
            if removed >> v & 1:
                eliminations[target_w].append((v, triple))
        cand[target_w] = new
        if new == 0:
            events.append(ContradictionEvent(target_w, tuple(eliminations[target_w])))
            return False
        if new & (new - 1) == 0 and assigned[target_w] is None:
            v = new.bit_length() - 1
            assigned[target_w] = v
            events.append(ForceEvent(target_w, v, triple))
        return True

    changed = True
    while changed:
        changed = False
        for triple in triples:
            a, b, c = triple
            before = tuple(cand)
            ok = narrow(a, b, c, triple) and narrow(b, a, c, triple) and narrow(c, a, b, triple)
            if not ok:
                return seeded_sym_table(n, k, {w: v for w, v in enumerate(assigned) if v is not None}), PropagationTrace(tuple(events))
            if tuple(cand) != before:
                changed = True
    result = seeded_sym_table(n, k, {w: v for w, v in enumerate(assigned) if v is not None})
    return result, PropagationTrace(tuple(events))


@dataclass(frozen=True)
class SearchResult:
    table: SymTable | BlockSymTable | None
    trace: PropagationTrace | None  # root propagation trace when no table found
    nodes: int
    wlog_colors: tuple[int, ...] | None  # colors tried at the first branched cell


class _Network:
    """Backtracking with queue-based candidate propagation over cell triples."""

    def __init__(self, ncells: int, ncolors: int, triples, branch_order, allowed):
        self.ncells = ncells
        self.k = ncolors
        self.full = (1 << ncolors) - 1
        self.branch_order = branch_order
        self.allowed = allowed
        self.watch: list[list[tuple[int, int]]] = [[] for _ in range(ncells)]
        for a, b, c in triples:
            self.watch[a].append((b, c))
            self.watch[b].append((a, c))
            self.watch[c].append((a, b))
        self.nodes = 0

    def propagate_from(self, cand, val, queue) -> bool:
        allowed = self.allowed
        while queue:
            cell = queue.pop()
            v = val[cell]
            for o1, o2 in self.watch[cell]:
                v1 = val[o1]
                if v1 >= 0:
                    new = cand[o2] & allowed[v][v1]
                    if new != cand[o2]:
                        if not new:
                            return False
                        cand[o2] = new
                        if new & (new - 1) == 0 and val[o2] < 0:
                            val[o2] = new.bit_length() - 1
                            queue.append(o2)
                v2 = val[o2]
                if v2 >= 0:
                    new = cand[o1] & allowed[v][v2]
                    if new != cand[o1]:
                        if not new:
                            return False
                        cand[o1] = new
                        if new & (new - 1) == 0 and val[o1] < 0:
                            val[o1] = new.bit_length() - 1
                            queue.append(o1)
        return True

    def search(self, seed: dict[int, int], wlog_colors, deadline) -> list[int] | None:
        import sys

        if sys.getrecursionlimit() < self.ncells + 300:
            sys.setrecursionlimit(self.ncells + 300)
        cand = [self.full] * self.ncells
        val = [-1] * self.ncells
        queue = []
        for cell, v in seed.items():
            cand[cell] = 1 << v
            val[cell] = v
            queue.append(cell)
        self.nodes = 1
        if not self.propagate_from(cand, val, queue):
            return None
        first_colors = wlog_colors if (wlog_colors is not None and not seed) else None
        return self._dfs(cand, val, first_colors, deadline)

    def _dfs(self, cand, val, first_colors, deadline):
        cell = -1
        for c in self.branch_order:
            if val[c] < 0:
                cell = c
                break
        if cell < 0:
            return val
        if deadline is not None and time.monotonic() > deadline:
            raise TimeBudgetExceeded(f"search ran past its time budget after {self.nodes} nodes")
        colors = first_colors if first_colors is not None else range(self.k)
        for v in colors:
            if not cand[cell] >> v & 1:
                continue
            self.nodes += 1
            cand2 = list(cand)
            val2 = list(val)
            cand2[cell] = 1 << v
            val2[cell] = v
            if self.propagate_from(cand2, val2, [cell]):
                result = self._dfs(cand2, val2, None, deadline)
                if result is not None:
                    return result
        return None


def _wlog_colors(target: RelStructure) -> tuple[int, ...]:
    """One representative color per automorphism orbit of the target domain.

    Composing a polymorphism with a target automorphism yields another
    polymorphism, so the first branched cell only needs one color per orbit.
    """
    return tuple(sorted(min(orbit) for orbit in automorphism_orbits(target)))


def search_symmetric(
    template: TemplatePair,
    n: int,
    partial: SymTable | None = None,
    *,
    use_wlog: bool = True,
    time_budget: float | None = None,
) -> SearchResult:
    """Backtracking search for a weight table; lowest unassigned weight first."""
    if n < 1:
        raise ValueError("arity must be >= 1")
    k = template.target.domain_size
    if partial is not None and (partial.arity != n or partial.target_size != k):
        raise ValueError(
            f"partial table shape ({partial.arity}, {partial.target_size}) "
            f"does not match the requested search ({n}, {k})"
        )
    deadline = None if time_budget is None else time.monotonic() + time_budget
    seed = partial.assigned_weights() if partial is not None else {}
    net = _Network(
        n + 1,
        k,
        sym_compatible_triples(n),
        list(range(n + 1)),
        _allowed_table(template.target),
    )
    wlog = _wlog_colors(template.target) if use_wlog else None
    val = net.search(seed, wlog, deadline)
    if val is None:
        _, root_trace = propagate(template, partial if partial is not None else empty_sym_table(n, k))
        return SearchResult(None, root_trace, net.nodes, wlog)
    table = SymTable(n, k, tuple(val))
    assert is_symmetric_polymorphism(table, template)
    return SearchResult(table, None, net.nodes, wlog)


def _block_cells(k1: int, k2: int) -> list[tuple[int, int]]:
    return [(w1, w2) for w1 in range(k1 + 1) for w2 in range(k2 + 1)]


def _block_triples(k1: int, k2: int) -> list[tuple[int, int, int]]:
    """Constraint triples as sorted cell-index multisets, deduplicated."""
    width = k2 + 1
    seen = set()
    for a1, b1, c1 in _ordered_compositions(k1):
        if not a1 <= b1 <= c1:
            continue
        for a2, b2, c2 in _ordered_compositions(k2):
            for p2 in set(itertools.permutations((a2, b2, c2))):
                cells = tuple(sorted((a1 * width + p2[0], b1 * width + p2[1], c1 * width + p2[2])))
                seen.add(cells)
    return sorted(seen)


def _block_branch_order(k1: int, k2: int) -> list[int]:
    """Cells of one embedded symmetric subproblem first, then the rest.

    When a block size is divisible by three, splitting that block into three
    equal parts ties the other block's cells at that column into a pure
    symmetric-arity subnetwork; branching it first surfaces refutations that
    live inside the subnetwork without hurting satisfiable cases.
    """
    width = k2 + 1
    order = []
    if k2 % 3 == 0:
        z = k2 // 3
        order = [w1 * width + z for w1 in range(k1 + 1)]
        order += [w1 * width + w2 for w1, w2 in _block_cells(k1, k2) if w2 != z]
    elif k1 % 3 == 0:
        z = k1 // 3
        order = [z * width + w2 for w2 in range(k2 + 1)]
        order += [w1 * width + w2 for w1, w2 in _block_cells(k1, k2) if w1 != z]
    else:
        order = list(range((k1 + 1) * width))
    return order


def search_block_symmetric(
    template: TemplatePair,
    k1: int,
    k2: int,
    *,
    use_wlog: bool = True,
    time_budget: float | None = None,
) -> SearchResult:
    """Backtracking search for a two-block weight table."""
    if k1 < 1 or k2 < 1:
        raise ValueError("block sizes must be >= 1")
    k = template.target.domain_size
    deadline = None if time_budget is None else time.monotonic() + time_budget
    net = _Network(
        (k1 + 1) * (k2 + 1),
        k,
        _block_triples(k1, k2),
        _block_branch_order(k1, k2),
        _allowed_table(template.target),
    )
    wlog = _wlog_colors(template.target) if use_wlog else None
    val = net.search({}, wlog, deadline)
    if val is None:
        return SearchResult(None, None, net.nodes, wlog)
    table = BlockSymTable(k1, k2, k, tuple(val))
    assert is_block_symmetric_polymorphism(table, template)
    return SearchResult(table, None, net.nodes, wlog)


def restrict_block_to_symmetric(table: BlockSymTable) -> SymTable:
    """Symmetric arity-k1 table f(m) = g(m, k2/3); needs 3 | k2.

    Any weight triple of the restriction lifts to a block partition that
    puts k2/3 second-block elements in each part, so compatibility carries
    over from the block table.
    """
    if table.k2 % 3 != 0:
        raise ValueError(f"second block size {table.k2} is not divisible by 3")
    if not table.fully_assigned:
        raise ValueError("table has unassigned cells")
    z = table.k2 // 3
    return SymTable(table.k1, table.target_size, tuple(table.value(m, z) for m in range(table.k1 + 1)))


# --- seeded contradiction replay ---------------------------------------------

_REPLAY_SCRIPT: tuple[tuple[int, tuple[int, int, int]], ...] = (
    (7, (7, 8, 8)),
    (9, (7, 7, 9)),
    (5, (5, 9, 9)),
    (13, (5, 5, 13)),
    (2, (2, 8, 13)),
    (14, (2, 7, 14)),
    (0, (0, 9, 14)),
)


@dataclass(frozen=True)
class ForcingCertificate:
    """A machine-checked derivation: seeded value, forced chain, dead cell."""

    arity: int
    seed_weight: int
    seed_color: int
    forced: tuple[ForceEvent, ...]
    contradiction_weight: int
    refutations: tuple[tuple[int, PropagationTrace], ...]  # color -> failing trace
    automorphism_transitive: bool

    @property
    def complete(self) -> bool:
        colors_refuted = {color for color, trace in self.refutations if trace.contradiction is not None}
        return len(colors_refuted) == len(self.refutations) and len(self.refutations) > 0


def chplus23_certificate(template: TemplatePair, seed_color: int = 0) -> ForcingCertificate:
    """Replay the arity-23 forced chain from f(8) = seed over the 4-cycle-plus target.

    Each step narrows one weight with a single compatibility triple whose
    other slots are already assigned and asserts the candidate set is a
    singleton; afterwards every color for weight 6 is refuted by running
    the general propagator.  A complete certificate plus the transitivity
    of the target's automorphism group rules out symmetric tables of
    arity 23 altogether.
    """
    n = 23
    k = template.target.domain_size
    allowed = _allowed_table(template.target)
    assigned: dict[int, int] = {8: seed_color}
    forced: list[ForceEvent] = []
    for weight, triple in _REPLAY_SCRIPT:
        rest = list(triple)
        rest.remove(weight)
        o1, o2 = rest
        if o1 not in assigned or o2 not in assigned:
            raise ValueError(f"replay step for weight {weight}: triple {triple} not yet determined")
        mask = allowed[assigned[o1]][assigned[o2]]
        if mask == 0 or mask & (mask - 1) != 0:
            raise ValueError(f"replay step for weight {weight}: candidates not a singleton")
        color = mask.bit_length() - 1
        assigned[weight] = color
        forced.append(ForceEvent(weight, color, triple))

    refutations = []
    for color in range(k):
        partial = seeded_sym_table(n, k, {**assigned, 6: color})
        _, trace = propagate(template, partial)
        refutations.append((color, trace))

    transitive = len(automorphism_orbits(template.target)) == 1
    return ForcingCertificate(
        n, 8, seed_color, tuple(forced), 6, tuple(refutations), transitive
    )
