"""
SL(2, Z) action on origamis, Veech groups, cusps and origami curves.

The generators act on the monodromy pair by

    T = [[1, 1], [0, 1]]:  (h, v) -> (h, v h^-1)
    S = [[0, -1], [1, 0]]: (h, v) -> (v^-1, h)

and a matrix acts through its S/T decomposition, rightmost letter first, so
that act(A B, o) = act(A, act(B, o)).
"""
import logging
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from app.config import settings
from app.services.flatgeom import horizontal_cylinders
from app.services.grpcore import InvalidInputError, OrigamiToolkitError, ResourceLimitError
from app.services.origami import Origami, canonicalize, singularity_data

# Configure logging
logger = logging.getLogger(__name__)

Matrix = Tuple[Tuple[int, int], Tuple[int, int]]
STWord = List[Tuple[str, int]]

IDENTITY: Matrix = ((1, 0), (0, 1))
MINUS_IDENTITY: Matrix = ((-1, 0), (0, -1))
S: Matrix = ((0, -1), (1, 0))
T: Matrix = ((1, 1), (0, 1))
GAMMA2_GENERATORS: List[Matrix] = [((1, 2), (0, 1)), ((1, 0), (2, 1)), MINUS_IDENTITY]


def as_matrix(entries) -> Matrix:
    """Validate row-major entries [[a, b], [c, d]] of determinant 1."""
    try:
        (a, b), (c, d) = entries
        m = ((int(a), int(b)), (int(c), int(d)))
    except (TypeError, ValueError) as e:
        raise InvalidInputError(f"Malformed matrix {entries}") from e
    if m[0][0] * m[1][1] - m[0][1] * m[1][0] != 1:
        raise InvalidInputError(f"Matrix {entries} does not have determinant 1")
    return m


def mat_mul(x: Matrix, y: Matrix) -> Matrix:
    return (
        (x[0][0] * y[0][0] + x[0][1] * y[1][0], x[0][0] * y[0][1] + x[0][1] * y[1][1]),
        (x[1][0] * y[0][0] + x[1][1] * y[1][0], x[1][0] * y[0][1] + x[1][1] * y[1][1]),
    )


def mat_inv(x: Matrix) -> Matrix:
    return ((x[1][1], -x[0][1]), (-x[1][0], x[0][0]))


def mat_neg(x: Matrix) -> Matrix:
    return ((-x[0][0], -x[0][1]), (-x[1][0], -x[1][1]))


def _collect(word: STWord) -> STWord:
    out: STWord = []
    for letter, e in word:
        if out and out[-1][0] == letter:
            e += out[-1][1]
            out.pop()
        if letter == "S":
            e %= 4
        if e:
            out.append((letter, e))
    return out


def matrix_to_word(m: Matrix) -> STWord:
    """
    Decompose an SL(2, Z) matrix as a product of powers of S and T.

    Args:
        m: Matrix of determinant 1

    Returns:
        List of (letter, exponent); the product left to right equals m
    """
    (a, b), (c, d) = as_matrix(m)
    word: STWord = []
    while c != 0:
        q = a // c
        word.append(("T", q))
        a, b = a - q * c, b - q * d
        word.append(("S", 1))
        a, b, c, d = c, d, -a, -b
    if a == 1:
        word.append(("T", b))
    else:
        word += [("S", 2), ("T", -b)]
    return _collect(word)


def word_to_matrix(word: STWord) -> Matrix:
    result = IDENTITY
    for letter, e in word:
        base = S if letter == "S" else T
        if e < 0:
            base, e = mat_inv(base), -e
        for _ in range(e):
            result = mat_mul(result, base)
    return result


def format_word(word: STWord) -> str:
    if not word:
        return "1"
    return " ".join(letter if e == 1 else f"{letter}^{e}" for letter, e in word)


def _act_letter(letter: str, e: int, o: Origami) -> Origami:
    h, v = o.h, o.v
    if letter == "T":
        return Origami(o.d, h, v * (h ** -e))
    for _ in range(e % 4):
        h, v = v.inverse(), h
    return Origami(o.d, h, v)


def act(m: Matrix, o: Origami, canonical: bool = True) -> Origami:
    """Image of ``o`` under the matrix ``m``, canonicalized unless asked otherwise."""
    for letter, e in reversed(matrix_to_word(m)):
        o = _act_letter(letter, e, o)
    return canonicalize(o) if canonical else o


def flip(o: Origami) -> Origami:
    """Action of -I: (h, v) -> (h^-1, v^-1)."""
    return Origami(o.d, o.h.inverse(), o.v.inverse())


def projective_key(o: Origami):
    return min(o.key(), flip(o).key())


@dataclass
class VeechGroupData:
    """Coset table of the Veech group in PSL(2, Z), numbered in BFS order from the start class."""
    index: int
    sl_index: int
    representatives: List[Matrix]
    s_action: List[int]
    t_action: List[int]
    generators: List[Matrix]
    contains_minus_identity: bool
    origamis: List[Origami] = field(default_factory=list, repr=False)


def veech_group(o: Origami, bound: Optional[int] = None) -> VeechGroupData:
    """
    Veech group of ``o`` by orbit enumeration.

    Args:
        o: The origami
        bound: Maximal number of projective classes to visit

    Returns:
        VeechGroupData

    Raises:
        ResourceLimitError: The orbit exceeds ``bound``
    """
    bound = bound or settings.ORBIT_BOUND
    start = canonicalize(o)
    index: Dict = {projective_key(start): 0}
    reps: List[Matrix] = [IDENTITY]
    points: List[Origami] = [start]
    images: Dict[str, List[int]] = {"S": [], "T": []}
    tree = set()
    queue = deque([0])
    while queue:
        i = queue.popleft()
        for letter in ("S", "T"):
            image = _act_letter(letter, 1, points[i])
            k = projective_key(image)
            j = index.get(k)
            if j is None:
                j = len(points)
                if j >= bound:
                    raise ResourceLimitError(f"Veech orbit of {o} exceeds bound {bound}")
                index[k] = j
                reps.append(mat_mul(S if letter == "S" else T, reps[i]))
                points.append(canonicalize(image))
                tree.add((i, letter))
                queue.append(j)
            images[letter].append(j)
    # BFS pops cosets in index order, so images[letter][i] belongs to coset i
    s_action, t_action = images["S"], images["T"]

    key = start.key()
    minus = flip(start).key() == key
    generators: List[Matrix] = []
    for i in range(len(points)):
        for letter, table in (("S", s_action), ("T", t_action)):
            if (i, letter) in tree:
                continue
            j = table[i]
            g = mat_mul(mat_inv(reps[j]), mat_mul(S if letter == "S" else T, reps[i]))
            if act(g, start).key() != key:
                g = mat_neg(g)
            if g in (IDENTITY, MINUS_IDENTITY) or g in generators:
                continue
            generators.append(g)
    logger.info(f"Veech group of {o}: projective index {len(points)}, {len(generators)} generators")
    return VeechGroupData(
        index=len(points),
        sl_index=len(points) if minus else 2 * len(points),
        representatives=reps,
        s_action=s_action,
        t_action=t_action,
        generators=generators,
        contains_minus_identity=minus,
        origamis=points,
    )


def contains(vgd: VeechGroupData, m: Matrix, o: Origami) -> bool:
    """Whether ``m`` lies in the Veech group of ``o``."""
    return act(as_matrix(m), o).key() == canonicalize(o).key()


@dataclass
class Cusp:
    width: int
    representative: Matrix
    node_count: int


@dataclass
class CuspReport:
    cusps: List[Cusp]
    e2: int
    e3: int
    curve_genus: int
    maximally_degenerate: List[int]


def cusp_report(o: Origami, vgd: VeechGroupData) -> CuspReport:
    """
    Cusps of the origami curve with the node counts of their stable fibres.

    Cusps are the T-orbits on cosets; the node count at a cusp is the number
    of maximal horizontal cylinders of the coset's origami.
    """
    seen = set()
    cusps = []
    for i in range(vgd.index):
        if i in seen:
            continue
        orbit = [i]
        seen.add(i)
        j = vgd.t_action[i]
        while j != i:
            orbit.append(j)
            seen.add(j)
            j = vgd.t_action[j]
        rep = vgd.representatives[i]
        cylinders, _ = horizontal_cylinders(act(rep, o, canonical=False))
        cusps.append(Cusp(width=len(orbit), representative=rep, node_count=len(cylinders)))

    e2 = sum(1 for i in range(vgd.index) if vgd.s_action[i] == i)
    e3 = sum(1 for i in range(vgd.index) if vgd.s_action[vgd.t_action[i]] == i)
    genus = 1 + Fraction(vgd.index, 12) - Fraction(e2, 4) - Fraction(e3, 3) - Fraction(len(cusps), 2)
    if genus.denominator != 1 or genus < 0:
        raise InvalidInputError(f"Curve genus {genus} is not a nonnegative integer")
    g = singularity_data(o).genus
    degenerate = [k for k, c in enumerate(cusps) if g >= 2 and c.node_count == 3 * g - 3]
    return CuspReport(
        cusps=cusps,
        e2=e2,
        e3=e3,
        curve_genus=int(genus),
        maximally_degenerate=degenerate,
    )


def gamma2_comparison(vgd: VeechGroupData, o: Origami) -> Dict[str, bool]:
    """Containment of Gamma(2) tested on its generators; equality by projective index 6."""
    contains_gamma2 = all(contains(vgd, g, o) for g in GAMMA2_GENERATORS)
    return {
        "contains_gamma2": contains_gamma2,
        "equals_gamma2": contains_gamma2 and vgd.index == 6,
    }


def orbit_keys(o: Origami, bound: Optional[int] = None) -> set:
    return {projective_key(p) for p in veech_group(o, bound).origamis}


def same_teichmueller_curve(o1: Origami, o2: Origami, bound: Optional[int] = None) -> bool:
    """
    Whether o2 lies in the SL(2, Z)-orbit of o1.

    Sufficient for the two origami curves to coincide; not known to be necessary.
    """
    if o1.d != o2.d:
        return False
    if singularity_data(o1).zero_orders != singularity_data(o2).zero_orders:
        return False
    return projective_key(canonicalize(o2)) in orbit_keys(o1, bound)


def veech_report(o: Origami, bound: Optional[int] = None) -> Dict:
    """Index, generators, -I membership, cusps, elliptic points, curve genus and the Gamma(2) comparison."""
    try:
        vgd = veech_group(o, bound)
        cusps = cusp_report(o, vgd)
    except OrigamiToolkitError as e:
        logger.error(f"Error computing Veech group: {str(e)}")
        raise
    return {
        "index": vgd.index,
        "sl_index": vgd.sl_index,
        "contains_minus_identity": vgd.contains_minus_identity,
        "generators": [
            {"matrix": [list(row) for row in g], "word": format_word(matrix_to_word(g))}
            for g in vgd.generators
        ],
        "cusps": [
            {"width": c.width, "representative": [list(row) for row in c.representative], "node_count": c.node_count}
            for c in cusps.cusps
        ],
        "e2": cusps.e2,
        "e3": cusps.e3,
        "curve_genus": cusps.curve_genus,
        "maximally_degenerate_cusps": cusps.maximally_degenerate,
        **gamma2_comparison(vgd, o),
    }
