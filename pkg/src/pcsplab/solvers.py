"""Instances, planted generation, exact algebraic solvers, and the classifier.

The cyclic three-color route reduces each hyperedge to one linear equation
modulo 3; the not-all-equal route solves the integer system "each edge sums
to one" exactly (Hermite-style column reduction over arbitrary-precision
integers) and thresholds the solution at >= 1, which can never color an
edge all-equal because its three integers sum to 1.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import FormatError, UnsupportedTargetError
from .homs import check_coloring, find_homomorphism, hom_exists
from .structures import RelStructure, named_template

MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class Instance:
    """A 3-uniform hypergraph with ordered triples over variables 1..variable_count."""

    variable_count: int
    edges: tuple[tuple[int, int, int], ...]

    def __post_init__(self):
        if self.variable_count < 0:
            raise ValueError("variable count must be >= 0")
        for e in self.edges:
            if len(e) != 3:
                raise ValueError(f"edge {e} is not a triple")
            for v in e:
                if not 1 <= v <= self.variable_count:
                    raise ValueError(f"edge entry {v} outside 1..{self.variable_count}")


class SplitMix64:
    """The splitmix64 mixing generator, fixed bit-exactly for reproducibility.

    state <- (state + 0x9E3779B97F4A7C15) mod 2**64
    z <- state; z <- (z XOR (z >> 30)) * 0xBF58476D1CE4E5B9 mod 2**64
    z <- (z XOR (z >> 27)) * 0x94D049BB133111EB mod 2**64
    output z XOR (z >> 31)

    next_below(n) draws 64-bit values, rejecting those >= 2**64 - (2**64 mod n),
    and returns the first accepted value mod n.
    """

    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next_word(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)

    def next_below(self, n: int) -> int:
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            v = self.next_word()
            if v < limit:
                return v % n


def generate_planted(nv: int, ne: int, seed: int) -> tuple[Instance, dict[int, int]]:
    """A seeded instance built around a hidden exactly-one-1 witness.

    Procedure (bit-exact given the generator above): draw one bit per
    variable (low bit of one word each, variables ascending) until the
    assignment has at least one 1 and at least one 0, and at least two 0s
    whenever edges are requested; then for each edge pick a 1-variable, two
    distinct 0-variables, and the position of the 1-variable inside the
    triple, each via next_below over the ascending candidate lists.
    """
    if nv < 3:
        raise ValueError(f"need at least 3 variables to sample distinct indices, got {nv}")
    if ne < 0:
        raise ValueError("edge count must be >= 0")
    rng = SplitMix64(seed)
    while True:
        bits = {v: rng.next_word() & 1 for v in range(1, nv + 1)}
        ones = [v for v in range(1, nv + 1) if bits[v] == 1]
        zeros = [v for v in range(1, nv + 1) if bits[v] == 0]
        if ones and zeros and (ne == 0 or len(zeros) >= 2):
            break
    edges = []
    for _ in range(ne):
        one = ones[rng.next_below(len(ones))]
        z1 = zeros[rng.next_below(len(zeros))]
        rest = [z for z in zeros if z != z1]
        z2 = rest[rng.next_below(len(rest))]
        pos = rng.next_below(3)
        edge = [z1, z2]
        edge.insert(pos, one)
        edges.append(tuple(edge))
    return Instance(nv, tuple(edges)), bits


@dataclass(frozen=True)
class GF3System:
    """Rows (i, j, k) = rhs interpreted as x_i + x_j + x_k = rhs modulo 3."""

    rows: tuple[tuple[tuple[int, int, int], int], ...]


def gauss_gf3(system: GF3System, nv: int) -> list[int] | None:
    """Gaussian elimination modulo 3; free variables are set to 0."""
    matrix = []
    for (i, j, k), rhs in system.rows:
        row = [0] * (nv + 1)
        for v in (i, j, k):
            row[v - 1] = (row[v - 1] + 1) % 3
        row[nv] = rhs % 3
        matrix.append(row)
    pivot_of_col: dict[int, int] = {}
    rank = 0
    for col in range(nv):
        pivot = next((r for r in range(rank, len(matrix)) if matrix[r][col]), None)
        if pivot is None:
            continue
        matrix[rank], matrix[pivot] = matrix[pivot], matrix[rank]
        inv = matrix[rank][col]  # inverses mod 3: 1 -> 1, 2 -> 2
        matrix[rank] = [(x * inv) % 3 for x in matrix[rank]]
        for r in range(len(matrix)):
            if r != rank and matrix[r][col]:
                factor = matrix[r][col]
                matrix[r] = [(a - factor * b) % 3 for a, b in zip(matrix[r], matrix[rank])]
        pivot_of_col[col] = rank
        rank += 1
    for r in range(rank, len(matrix)):
        if matrix[r][nv]:
            return None
    solution = [0] * nv
    for col, r in pivot_of_col.items():
        solution[col] = matrix[r][nv]
    return solution


def solve_t2(instance: Instance) -> dict[int, int] | None:
    """Three-coloring via one mod-3 equation per edge; always verified."""
    t2 = named_template("T2")
    system = GF3System(tuple((e, 1) for e in instance.edges))
    solution = gauss_gf3(system, instance.variable_count)
    if solution is None:
        return None
    coloring = {v: solution[v - 1] for v in range(1, instance.variable_count + 1)}
    assert check_coloring(instance, coloring, t2)
    return coloring


@dataclass(frozen=True)
class IntAffineSystem:
    """Rows of unit coefficients (possibly coinciding), all right-hand sides 1."""

    variable_count: int
    rows: tuple[tuple[int, int, int], ...]


def hnf_solve(system: IntAffineSystem) -> list[int] | None:
    """An integer solution of A x = 1 via column reduction, or None.

    Columns are combined by exact integer operations (a unimodular
    transform is accumulated) until each processed row has a single pivot;
    back-substitution demands exact divisibility.  Free parameters are 0.
    """
    m = len(system.rows)
    n = system.variable_count
    matrix = [[0] * n for _ in range(m)]
    for r, (i, j, k) in enumerate(system.rows):
        for v in (i, j, k):
            matrix[r][v - 1] += 1
    transform = [[1 if i == j else 0 for j in range(n)] for i in range(n)]

    def add_column(dst: int, src: int, factor: int) -> None:
        for r in range(m):
            matrix[r][dst] += factor * matrix[r][src]
        for r in range(n):
            transform[r][dst] += factor * transform[r][src]

    def swap_columns(a: int, b: int) -> None:
        for r in range(m):
            matrix[r][a], matrix[r][b] = matrix[r][b], matrix[r][a]
        for r in range(n):
            transform[r][a], transform[r][b] = transform[r][b], transform[r][a]

    def negate_column(j: int) -> None:
        for r in range(m):
            matrix[r][j] = -matrix[r][j]
        for r in range(n):
            transform[r][j] = -transform[r][j]

    pivots: dict[int, int] = {}  # row -> pivot column
    col = 0
    for row in range(m):
        if col >= n:
            break
        while True:
            nonzero = [j for j in range(col, n) if matrix[row][j]]
            if len(nonzero) <= 1:
                break
            best = min(nonzero, key=lambda j: (abs(matrix[row][j]), j))
            for j in nonzero:
                if j != best:
                    add_column(j, best, -(matrix[row][j] // matrix[row][best]))
        nonzero = [j for j in range(col, n) if matrix[row][j]]
        if not nonzero:
            continue
        if nonzero[0] != col:
            swap_columns(nonzero[0], col)
        if matrix[row][col] < 0:
            negate_column(col)
        pivots[row] = col
        col += 1

    y = [0] * n
    for row in range(m):
        residual = 1 - sum(matrix[row][j] * y[j] for j in range(n) if matrix[row][j])
        if row in pivots:
            pivot = matrix[row][pivots[row]]
            if residual % pivot:
                return None
            y[pivots[row]] = residual // pivot
        elif residual:
            return None
    solution = [sum(transform[r][j] * y[j] for j in range(n)) for r in range(n)]
    for i, j, k in system.rows:
        assert solution[i - 1] + solution[j - 1] + solution[k - 1] == 1
    return solution


def solve_nae(instance: Instance) -> dict[int, int] | None:
    """Two-coloring via the integer relaxation, thresholded at >= 1; verified.

    Each edge's three integers sum to exactly 1, so they can be neither all
    >= 1 nor all <= 0; the thresholded coloring therefore never makes an
    edge constant.
    """
    nae = named_template("NAE")
    solution = hnf_solve(IntAffineSystem(instance.variable_count, instance.edges))
    if solution is None:
        return None
    coloring = {v: 1 if solution[v - 1] >= 1 else 0 for v in range(1, instance.variable_count + 1)}
    assert check_coloring(instance, coloring, nae)
    return coloring


def solve_via_relaxation(instance: Instance, target: RelStructure, prefer: str = "t2") -> dict[int, int] | None:
    """Solve against any target reachable from the cyclic or not-all-equal base.

    The base coloring is composed with a homomorphism into the target and
    re-verified.  When both routes apply the cyclic one is taken (cheaper
    exact algebra) unless prefer = "nae".
    """
    t2 = named_template("T2")
    nae = named_template("NAE")
    routes = []
    if hom_exists(t2, target):
        routes.append("t2")
    if hom_exists(nae, target):
        routes.append("nae")
    if not routes:
        raise UnsupportedTargetError("target admits neither the cyclic nor the not-all-equal relaxation")
    route = prefer if prefer in routes else routes[0]
    if route == "t2":
        base, base_structure = solve_t2(instance), t2
    else:
        base, base_structure = solve_nae(instance), nae
    if base is None:
        return None
    hom = find_homomorphism(base_structure, target)
    coloring = {v: hom(c) for v, c in base.items()}
    assert check_coloring(instance, coloring, target)
    return coloring


P = "P"
NP_HARD = "NP-hard"
OPEN = "open"


def classify_template(target: RelStructure) -> str:
    """Complexity label for a symmetric ternary three-element target.

    Tractable when a constant tuple is present or the not-all-equal /
    cyclic structure maps in; hard when the target maps into one of the
    three hard acyclic structures; the remaining case is exactly the
    hom-equivalence class of the strict-order target and is reported open.
    """
    if target.domain_size != 3:
        raise ValueError(f"classification needs a 3-element domain, got {target.domain_size}")
    rel = target.single_ternary()
    if not rel.is_symmetric():
        raise ValueError("classification needs a symmetric relation")
    has_constant = any(len(set(t)) == 1 for t in rel.tuples)
    tractable = (
        has_constant
        or hom_exists(named_template("NAE"), target)
        or hom_exists(named_template("T2"), target)
    )
    hard = (
        hom_exists(target, named_template("T1"))
        or hom_exists(target, named_template("D1plus"))
        or hom_exists(target, named_template("D2plus"))
    )
    assert not (tractable and hard), "tractability and hardness certificates cannot coexist"
    if tractable:
        return P
    if hard:
        return NP_HARD
    return OPEN


# --- text formats ------------------------------------------------------------
#
#   p hyp3 <nvars> <nedges>
#   e v1 v2 v3
#
# variables are 1-indexed; "#" starts a comment.  A planted witness rides
# along as "# planted <var> <bit>" comment lines.  Colorings are emitted as
# "v <var> <color>" lines.


def parse_instance(text: str) -> Instance:
    header = None
    edges = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "p":
            if header is not None or len(parts) != 4 or parts[1] != "hyp3":
                raise FormatError(f"line {lineno}: bad problem header")
            header = (int(parts[2]), int(parts[3]))
        elif parts[0] == "e":
            if header is None:
                raise FormatError(f"line {lineno}: edge before header")
            if len(parts) != 4:
                raise FormatError(f"line {lineno}: edge needs three entries")
            edges.append((int(parts[1]), int(parts[2]), int(parts[3])))
        else:
            raise FormatError(f"line {lineno}: unrecognized directive {parts[0]!r}")
    if header is None:
        raise FormatError("missing problem header")
    nv, ne = header
    if len(edges) != ne:
        raise FormatError(f"header announced {ne} edges, found {len(edges)}")
    try:
        return Instance(nv, tuple(edges))
    except ValueError as exc:
        raise FormatError(str(exc)) from exc


def format_instance(instance: Instance, planted: dict[int, int] | None = None) -> str:
    lines = [f"p hyp3 {instance.variable_count} {len(instance.edges)}"]
    for a, b, c in instance.edges:
        lines.append(f"e {a} {b} {c}")
    if planted is not None:
        for v in sorted(planted):
            lines.append(f"# planted {v} {planted[v]}")
    return "\n".join(lines) + "\n"


def parse_planted(text: str) -> dict[int, int]:
    witness = {}
    for raw in text.splitlines():
        parts = raw.split()
        if parts[:2] == ["#", "planted"] and len(parts) == 4:
            witness[int(parts[2])] = int(parts[3])
    return witness


def format_coloring(coloring: dict[int, int]) -> str:
    return "\n".join(f"v {v} {coloring[v]}" for v in sorted(coloring)) + "\n"
