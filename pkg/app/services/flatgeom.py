"""
Flat geometry of origamis: rational directions, cylinder decompositions and
the parity of the spin structure.

Homology is handled with loops in the square-adjacency graph. A loop is a
start square plus a sequence of moves (0 = h, 1 = v, sign = direction); it runs
through square centres and crosses edges at their midpoints, so it never
meets a corner of the surface.
"""
import logging
from dataclasses import dataclass, field
from math import gcd
from typing import Dict, List, Optional, Sequence, Tuple, Union

from app.services.grpcore import InvalidInputError, Permutation, _UnionFind
from app.services.origami import Origami, singularity_data

# Configure logging
logger = logging.getLogger(__name__)

Move = Tuple[int, int]
Matrix = Tuple[Tuple[int, int], Tuple[int, int]]

HORIZONTAL = (1, 0)
VERTICAL = (0, 1)
DIAGONAL = (1, 1)


def normalize_direction(p: int, q: int) -> Tuple[int, int]:
    """Primitive representative whose first nonzero entry is positive."""
    if p == 0 and q == 0:
        raise InvalidInputError("Direction (0, 0) is not a direction")
    g = gcd(abs(p), abs(q))
    p, q = p // g, q // g
    if p < 0 or (p == 0 and q < 0):
        p, q = -p, -q
    return p, q


def parse_direction(text: str) -> Tuple[int, int]:
    """Parse ``"p/q"`` into a normalized direction."""
    try:
        p_text, q_text = text.strip().split("/")
        return normalize_direction(int(p_text), int(q_text))
    except ValueError as e:
        raise InvalidInputError(f"Malformed direction '{text}', expected p/q") from e


def format_direction(direction: Tuple[int, int]) -> str:
    return f"{direction[0]}/{direction[1]}"


def _extended_gcd(a: int, b: int) -> Tuple[int, int, int]:
    if b == 0:
        return (a, 1, 0) if a >= 0 else (-a, -1, 0)
    g, x, y = _extended_gcd(b, a % b)
    return g, y, x - (a // b) * y


def matrix_to_horizontal(direction: Tuple[int, int]) -> Matrix:
    """An SL(2, Z) matrix sending the primitive vector ``direction`` to (1, 0)."""
    p, q = direction
    g, a, b = _extended_gcd(p, q)
    if g != 1:
        raise InvalidInputError(f"Direction {direction} is not primitive")
    return ((a, b), (-q, p))


@dataclass
class CylinderDecomposition:
    direction: Tuple[int, int]
    cylinders: List[Tuple[int, int]]
    unit_strip_count: int
    strips: List[List[int]] = field(default_factory=list, repr=False)

    @property
    def count(self) -> int:
        return len(self.cylinders)


def horizontal_cylinders(o: Origami) -> Tuple[List[Tuple[int, int]], List[List[int]]]:
    """
    Maximal horizontal cylinders as (width, height) pairs.

    A strip (cycle of h) is glued to the strip above it across a boundary
    without zeros exactly when every corner on that boundary is regular.
    """
    strips = o.h.cycles(include_fixed=True)
    strip_of = {a: i for i, strip in enumerate(strips) for a in strip}
    corners = o.commutator()
    uf = _UnionFind(len(strips))
    for i, strip in enumerate(strips):
        above = [o.v(a) for a in strip]
        if all(corners(b) == b for b in above):
            uf.union(i, strip_of[above[0]])
    classes: Dict[int, List[int]] = {}
    for i in range(len(strips)):
        classes.setdefault(uf.find(i), []).append(i)
    cylinders = []
    for members in classes.values():
        widths = {len(strips[i]) for i in members}
        if len(widths) != 1:
            raise InvalidInputError(f"Strips of unequal width merged in {o}")
        cylinders.append((widths.pop(), len(members)))
    return sorted(cylinders), strips


def cylinder_decomposition(o: Origami, direction: Tuple[int, int]) -> CylinderDecomposition:
    """
    Maximal cylinders of ``o`` in a rational direction.

    Args:
        o: The origami
        direction: Primitive integer vector

    Returns:
        CylinderDecomposition with cylinders sorted by (width, height)
    """
    from app.services.veech import act

    direction = normalize_direction(*direction)
    turned = act(matrix_to_horizontal(direction), o, canonical=False)
    cylinders, strips = horizontal_cylinders(turned)
    area = sum(w * k for w, k in cylinders)
    if area != o.d:
        raise InvalidInputError(f"Cylinder areas sum to {area}, expected {o.d}")
    return CylinderDecomposition(
        direction=direction,
        cylinders=cylinders,
        unit_strip_count=len(strips),
        strips=strips,
    )


def direction_fingerprint(o: Origami, directions: Sequence[Tuple[int, int]]) -> Tuple[List[int], bool]:
    """Maximal-cylinder counts per direction and whether they are pairwise distinct."""
    counts = [cylinder_decomposition(o, d).count for d in directions]
    return counts, len(set(counts)) == len(counts)


# Homology of the square complex


def _move_target(o: Origami, square: int, move: Move) -> int:
    gen, sign = move
    p = o.h if gen == 0 else o.v
    return p(square) if sign > 0 else p.inverse()(square)


def loop_end(o: Origami, start: int, moves: Sequence[Move]) -> int:
    square = start
    for move in moves:
        square = _move_target(o, square, move)
    return square


def loop_chain(o: Origami, start: int, moves: Sequence[Move]) -> Dict[Tuple[int, int], int]:
    """
    Edge chain homologous to a loop, obtained by sliding it to the corners.

    Edge (0, i) is the bottom edge of square i, edge (1, i) its left edge.
    """
    chain: Dict[Tuple[int, int], int] = {}
    square = start
    for gen, sign in moves:
        target = _move_target(o, square, (gen, sign))
        edge = (gen, square if sign > 0 else target)
        chain[edge] = chain.get(edge, 0) + sign
        square = target
    return {e: c for e, c in chain.items() if c}


def intersection_number(o: Origami, loop1: Tuple[int, Sequence[Move]], loop2: Tuple[int, Sequence[Move]]) -> int:
    """Algebraic intersection of two loops; <horizontal core, vertical core> = +1 on the torus."""
    chain = loop_chain(o, *loop2)
    total = 0
    square = loop1[0]
    for gen, sign in loop1[1]:
        target = _move_target(o, square, (gen, sign))
        if gen == 0:
            # crossing the left edge of the square on the right
            edge = (1, target if sign > 0 else square)
            total += sign * chain.get(edge, 0)
        else:
            # crossing the bottom edge of the square above
            edge = (0, target if sign > 0 else square)
            total -= sign * chain.get(edge, 0)
        square = target
    return total


_DIRECTIONS = {(0, 1): (1, 0), (0, -1): (-1, 0), (1, 1): (0, 1), (1, -1): (0, -1)}


def turning_number(moves: Sequence[Move]) -> int:
    """(left turns - right turns) / 4 of a closed grid path without backtracking."""
    if not moves:
        raise InvalidInputError("Empty loop has no turning number")
    quarter_turns = 0
    for i, move in enumerate(moves):
        a = _DIRECTIONS[move]
        b = _DIRECTIONS[moves[(i + 1) % len(moves)]]
        cross = a[0] * b[1] - a[1] * b[0]
        if cross == 0 and a != b:
            raise InvalidInputError("Loop backtracks; turning number undefined")
        quarter_turns += cross
    if quarter_turns % 4:
        raise InvalidInputError("Path is not closed")
    return quarter_turns // 4


def q_form(o: Origami, start: int, moves: Sequence[Move]) -> int:
    """Spin quadratic form ind + 1 mod 2 of an embedded loop."""
    if loop_end(o, start, moves) != start:
        raise InvalidInputError(f"Moves do not close up at square {start}")
    return (turning_number(moves) + 1) % 2


def vertex_classes(o: Origami) -> List[List[int]]:
    """Corner classes: square i stands for its bottom-left corner."""
    return o.commutator().cycles(include_fixed=True)


@dataclass
class HomologyBasis:
    """A Z-basis of H1 given by embedded loops, with intersection matrix and q values."""
    loops: List[Tuple[int, List[Move]]]
    intersection: List[List[int]]
    q_values: List[int]


def _tree_path(parent: Dict[int, Optional[Tuple[int, Move]]], square: int) -> List[Tuple[int, Move]]:
    path = []
    while parent[square] is not None:
        prev, move = parent[square]
        path.append((prev, move))
        square = prev
    return list(reversed(path))


def homology_basis(o: Origami) -> HomologyBasis:
    """
    Tree-cotree basis of H1 of the closed surface.

    A BFS tree of the square-adjacency graph and a spanning tree of the
    corner graph built from the edges not crossed by it leave exactly 2g
    adjacencies; each closes a simple loop through the BFS tree.
    """
    root = 1
    parent: Dict[int, Optional[Tuple[int, Move]]] = {root: None}
    order = [root]
    tree = set()
    for square in order:
        for gen in (0, 1):
            target = _move_target(o, square, (gen, 1))
            if target not in parent:
                parent[target] = (square, (gen, 1))
                tree.add((gen, square))
                order.append(target)
            source = _move_target(o, square, (gen, -1))
            if source not in parent:
                parent[source] = (square, (gen, -1))
                tree.add((gen, source))
                order.append(source)

    corner = {a: i for i, cls in enumerate(vertex_classes(o)) for a in cls}
    uf = _UnionFind(len(corner) + 1)
    leftover = []
    for square in range(1, o.d + 1):
        for gen in (0, 1):
            if (gen, square) in tree:
                continue
            # the adjacency (gen, square) crosses the edge between these corners
            target = _move_target(o, square, (gen, 1))
            if gen == 0:
                ends = (corner[target], corner[o.v(target)])
            else:
                ends = (corner[target], corner[o.h(target)])
            if not uf.union(*ends):
                leftover.append((gen, square))

    loops = []
    for gen, square in leftover:
        target = _move_target(o, square, (gen, 1))
        down = _tree_path(parent, square)
        up = _tree_path(parent, target)
        common = 0
        while common < min(len(down), len(up)) and down[common] == up[common]:
            common += 1
        start = down[common][0] if common < len(down) else (up[common][0] if common < len(up) else square)
        moves = [m for _, m in down[common:]] + [(gen, 1)]
        moves += [(g, -s) for _, (g, s) in reversed(up[common:])]
        loops.append((start, moves))

    omega = [[intersection_number(o, a, b) for b in loops] for a in loops]
    q_values = [q_form(o, start, moves) for start, moves in loops]
    genus = singularity_data(o).genus
    if len(loops) != 2 * genus:
        raise InvalidInputError(f"Found {len(loops)} basis loops for genus {genus}")
    return HomologyBasis(loops=loops, intersection=omega, q_values=q_values)


def intersection_form(o: Origami) -> List[List[int]]:
    return homology_basis(o).intersection


def _pair(omega: Sequence[Sequence[int]], x: Sequence[int], y: Sequence[int]) -> int:
    n = len(x)
    return sum(x[i] * omega[i][j] * y[j] for i in range(n) if x[i] for j in range(n) if y[j])


def q_of_class(omega: Sequence[Sequence[int]], q_values: Sequence[int], x: Sequence[int]) -> int:
    """Extend q from basis values by q(a + b) = q(a) + q(b) + <a, b> mod 2."""
    bits = [c % 2 for c in x]
    value = sum(q for q, b in zip(q_values, bits) if b)
    for i in range(len(bits)):
        if not bits[i]:
            continue
        for j in range(i + 1, len(bits)):
            if bits[j]:
                value += omega[i][j]
    return value % 2


def symplectic_basis(omega: Sequence[Sequence[int]]) -> List[List[int]]:
    """
    Integer symplectic reduction of a unimodular skew form.

    Returns:
        Rows a1, b1, a2, b2, ... (coordinates in the given basis) with
        <a_i, b_i> = 1 and all other pairings zero
    """
    n = len(omega)
    for i in range(n):
        for j in range(n):
            if omega[i][j] != -omega[j][i]:
                raise InvalidInputError("Intersection form is not skew-symmetric")
    basis = [[1 if i == j else 0 for j in range(n)] for i in range(n)]
    for k in range(0, n, 2):
        while True:
            best = None
            for i in range(k, n):
                for j in range(i + 1, n):
                    value = _pair(omega, basis[i], basis[j])
                    if value and (best is None or abs(value) < abs(best[2])):
                        best = (i, j, value)
            if best is None:
                raise InvalidInputError("Intersection form is degenerate")
            i, j, value = best
            # i < j, so position j is untouched by the first swap
            basis[k], basis[i] = basis[i], basis[k]
            basis[k + 1], basis[j] = basis[j], basis[k + 1]
            if _pair(omega, basis[k], basis[k + 1]) < 0:
                basis[k + 1] = [-c for c in basis[k + 1]]
            p = _pair(omega, basis[k], basis[k + 1])
            clean = True
            for m in range(k + 2, n):
                s = _pair(omega, basis[k], basis[m]) // p
                basis[m] = [x - s * y for x, y in zip(basis[m], basis[k + 1])]
                t = _pair(omega, basis[k + 1], basis[m]) // p
                basis[m] = [x + t * y for x, y in zip(basis[m], basis[k])]
                if _pair(omega, basis[k], basis[m]) or _pair(omega, basis[k + 1], basis[m]):
                    clean = False
            if clean:
                if p != 1:
                    raise InvalidInputError(f"Intersection form is not unimodular (pivot {p})")
                break
    return basis


def arf_invariant(omega: Sequence[Sequence[int]], q_values: Sequence[int], basis: Optional[List[List[int]]] = None) -> int:
    """Arf invariant sum q(a_i) q(b_i) mod 2 over a symplectic basis."""
    basis = basis if basis is not None else symplectic_basis(omega)
    total = 0
    for k in range(0, len(basis), 2):
        total += q_of_class(omega, q_values, basis[k]) * q_of_class(omega, q_values, basis[k + 1])
    return total % 2


def spin_parity(o: Origami) -> Union[int, str]:
    """
    Parity of the spin structure, or ``"undefined"`` if some zero has odd order.

    Args:
        o: The origami

    Returns:
        0, 1 or "undefined"
    """
    data = singularity_data(o)
    if any(k % 2 for k in data.zero_orders):
        return "undefined"
    basis = homology_basis(o)
    parity = arf_invariant(basis.intersection, basis.q_values)
    logger.debug(f"Spin parity of {o}: {parity}")
    return parity
