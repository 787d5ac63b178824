"""
Integer relation modules: sparse unit-pivot elimination followed by a dense
Smith normal form on whatever is left.
"""
import heapq
import logging
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

from sympy import Matrix, eye, zeros

from app.services.grpcore import VerificationError

# Configure logging
logger = logging.getLogger(__name__)

SparseRow = Dict[int, int]


# Moves the entry of least absolute value in the block starting at [s, s] to [s, s]
def _move_least_to_start(m: Matrix, left: Matrix, right: Matrix, s: int) -> bool:
    rows, cols = m.shape
    pos = None
    num = 0
    for i in range(s, rows):
        for j in range(s, cols):
            if m[i, j] != 0 and (pos is None or abs(m[i, j]) < num):
                pos = (i, j)
                num = abs(m[i, j])
    if pos is None:
        return False
    if pos[0] != s:
        m.row_swap(s, pos[0])
        left.row_swap(s, pos[0])
    if pos[1] != s:
        m.col_swap(s, pos[1])
        right.col_swap(s, pos[1])
    return True


def _edge_is_zero(m: Matrix, s: int) -> bool:
    rows, cols = m.shape
    return all(m[i, s] == 0 for i in range(s + 1, rows)) and all(m[s, j] == 0 for j in range(s + 1, cols))


# Clears row s and column s beyond the corner by Euclidean steps
def _null_edging(m: Matrix, left: Matrix, right: Matrix, s: int):
    rows, cols = m.shape
    while not _edge_is_zero(m, s):
        for i in range(s + 1, rows):
            if m[i, s] != 0:
                q = m[i, s] // m[s, s]
                m.row_op(i, lambda val, col: val - q * m[s, col])
                left.row_op(i, lambda val, col: val - q * left[s, col])
        for j in range(s + 1, cols):
            if m[s, j] != 0:
                q = m[s, j] // m[s, s]
                m.col_op(j, lambda val, row: val - q * m[row, s])
                right.col_op(j, lambda val, row: val - q * right[row, s])
        if _edge_is_zero(m, s):
            break
        # a remainder survived; bring the smallest edge entry to the corner
        best = None
        for i in range(s + 1, rows):
            if m[i, s] != 0 and (best is None or abs(m[i, s]) < best[0]):
                best = (abs(m[i, s]), "row", i)
        for j in range(s + 1, cols):
            if m[s, j] != 0 and (best is None or abs(m[s, j]) < best[0]):
                best = (abs(m[s, j]), "col", j)
        if best[1] == "row":
            m.row_swap(s, best[2])
            left.row_swap(s, best[2])
        else:
            m.col_swap(s, best[2])
            right.col_swap(s, best[2])
    if m[s, s] < 0:
        m.row_op(s, lambda val, col: -val)
        left.row_op(s, lambda val, col: -val)


def _non_divisible(m: Matrix, s: int):
    rows, cols = m.shape
    for i in range(s + 1, rows):
        for j in range(s + 1, cols):
            if m[i, j] % m[s, s] != 0:
                return i
    return None


def smith_normal_form(matrix: Matrix) -> Tuple[Matrix, Matrix, Matrix]:
    """
    Smith normal form of an integer matrix.

    Args:
        matrix: Integer matrix M

    Returns:
        (U, D, V) with U and V unimodular, D diagonal with d_i | d_{i+1} and
        U * M * V == D

    Raises:
        VerificationError: The re-multiplied product does not reproduce D
    """
    m = Matrix(matrix)
    rows, cols = m.shape
    left = eye(rows)
    right = eye(cols)
    for s in range(min(rows, cols)):
        if not _move_least_to_start(m, left, right, s):
            break
        while True:
            _null_edging(m, left, right, s)
            i = _non_divisible(m, s)
            if i is None:
                break
            m.row_op(s, lambda val, col: val + m[i, col])
            left.row_op(s, lambda val, col: val + left[i, col])

    if left * Matrix(matrix) * right != m:
        raise VerificationError("U * M * V does not reproduce the Smith form", anchor="smith")
    diagonal = [m[k, k] for k in range(min(rows, cols))]
    for i in range(rows):
        for j in range(cols):
            if i != j and m[i, j] != 0:
                raise VerificationError("Smith form is not diagonal", anchor="smith")
    for a, b in zip(diagonal, diagonal[1:]):
        if a < 0 or (a == 0 and b != 0) or (a != 0 and b % a != 0):
            raise VerificationError(f"Diagonal {diagonal} is not a divisibility chain", anchor="smith")
    return left, m, right


def row_compress(rows: Sequence[Sequence[int]], ncols: int) -> List[List[int]]:
    """Integer row echelon form (same row space) with the zero rows dropped."""
    remaining = [list(r) for r in rows if any(r)]
    out: List[List[int]] = []
    for c in range(ncols):
        while True:
            nonzero = [r for r in remaining if r[c]]
            if len(nonzero) <= 1:
                break
            pivot = min(nonzero, key=lambda r: abs(r[c]))
            for r in nonzero:
                if r is pivot:
                    continue
                q = r[c] // pivot[c]
                for k in range(c, ncols):
                    r[k] -= q * pivot[k]
            remaining = [r for r in remaining if any(r)]
        nonzero = [r for r in remaining if r[c]]
        if nonzero:
            out.append(nonzero[0])
            remaining = [r for r in remaining if r is not nonzero[0]]
    return out


class SparseEliminator:
    """
    Incremental elimination on rows with a unit coefficient.

    A pivot row only contains columns that were not pivots when it was created,
    so reducing by pivots in creation order always terminates.
    """

    def __init__(self, ncols: int):
        self.ncols = ncols
        self.pivot_rows: List[SparseRow] = []
        self.pivot_of: Dict[int, int] = {}
        self.pending: List[SparseRow] = []

    def reduce(self, row: SparseRow) -> SparseRow:
        row = {c: v for c, v in row.items() if v}
        heap = [(self.pivot_of[c], c) for c in row if c in self.pivot_of]
        heapq.heapify(heap)
        queued = {c for _, c in heap}
        while heap:
            _, c = heapq.heappop(heap)
            queued.discard(c)
            coef = row.get(c)
            if not coef:
                continue
            for col, val in self.pivot_rows[self.pivot_of[c]].items():
                new = row.get(col, 0) - coef * val
                if new:
                    row[col] = new
                    if col in self.pivot_of and col not in queued and col != c:
                        heapq.heappush(heap, (self.pivot_of[col], col))
                        queued.add(col)
                else:
                    row.pop(col, None)
        return row

    def add_row(self, row: SparseRow) -> bool:
        """Reduce ``row``; turn it into a pivot if it has a unit entry. Returns whether it did."""
        row = self.reduce(row)
        if not row:
            return False
        units = [c for c, v in row.items() if v in (1, -1)]
        if not units:
            self.pending.append(row)
            return False
        c = min(units)
        if row[c] == -1:
            row = {k: -v for k, v in row.items()}
        self.pivot_of[c] = len(self.pivot_rows)
        self.pivot_rows.append(row)
        return True

    def finish(self) -> List[int]:
        """Exhaust the pending rows; returns the columns that never became pivots."""
        changed = True
        while changed:
            changed = False
            pending, self.pending = self.pending, []
            for row in pending:
                if self.add_row(row):
                    changed = True
        return [c for c in range(self.ncols) if c not in self.pivot_of]


@dataclass(frozen=True)
class ModuleElement:
    """Coordinates of a module element: residues mod each torsion factor, then free coordinates."""
    moduli: Tuple[int, ...]
    torsion: Tuple[int, ...]
    free: Tuple[int, ...]

    def __add__(self, other: "ModuleElement") -> "ModuleElement":
        return ModuleElement(
            self.moduli,
            tuple((a + b) % d for a, b, d in zip(self.torsion, other.torsion, self.moduli)),
            tuple(a + b for a, b in zip(self.free, other.free)),
        )

    def __neg__(self) -> "ModuleElement":
        return ModuleElement(self.moduli, tuple(-a % d for a, d in zip(self.torsion, self.moduli)), tuple(-a for a in self.free))

    def __sub__(self, other: "ModuleElement") -> "ModuleElement":
        return self + (-other)

    def is_zero(self, modulo_torsion: bool = False) -> bool:
        if not modulo_torsion and any(self.torsion):
            return False
        return not any(self.free)


class RelationModule:
    """
    The abelian group Z^ncols / <rows>.

    Rows are eliminated sparsely on unit pivots; the remaining rows, restricted
    to the non-pivot columns, go through a dense Smith normal form.
    """

    def __init__(self, ncols: int, rows: Sequence[SparseRow]):
        self.ncols = ncols
        self._elim = SparseEliminator(ncols)
        for row in sorted(rows, key=len):
            self._elim.add_row(row)
        self.free_columns = self._elim.finish()
        self._position = {c: i for i, c in enumerate(self.free_columns)}
        k = len(self.free_columns)
        dense = []
        for row in self._elim.pending:
            vector = [0] * k
            for c, v in row.items():
                vector[self._position[c]] = v
            dense.append(vector)
        compressed = row_compress(dense, k)
        if compressed:
            _, d, v = smith_normal_form(Matrix(compressed))
            diagonal = [int(d[i, i]) for i in range(min(d.shape))]
        else:
            v = eye(k) if k else zeros(0, 0)
            diagonal = []
        self._v = [[int(v[i, j]) for j in range(k)] for i in range(k)]
        self.diagonal = [x for x in diagonal if x != 0]
        r = len(self.diagonal)
        self.rank = k - r
        self._torsion_index = [i for i, x in enumerate(self.diagonal) if x > 1]
        self.torsion_invariants = [self.diagonal[i] for i in self._torsion_index]
        logger.debug(
            f"Relation module: {ncols} columns, {len(self._elim.pivot_rows)} pivots, "
            f"{len(rows)} rows, rank {self.rank}, torsion {self.torsion_invariants}"
        )

    def element(self, vector: SparseRow) -> ModuleElement:
        """Image of an integer vector in the module."""
        reduced = self._elim.reduce(vector)
        k = len(self.free_columns)
        y = [0] * k
        for c, val in reduced.items():
            y[self._position[c]] = val
        z = [sum(y[i] * self._v[i][j] for i in range(k) if y[i]) for j in range(k)]
        r = len(self.diagonal)
        moduli = tuple(self.torsion_invariants)
        torsion = tuple(z[i] % self.diagonal[i] for i in self._torsion_index)
        return ModuleElement(moduli, torsion, tuple(z[r:]))

    def zero(self) -> ModuleElement:
        return ModuleElement(tuple(self.torsion_invariants), tuple(0 for _ in self.torsion_invariants), tuple(0 for _ in range(self.rank)))
