"""
Belyi monodromy, outer Belyi adjustments and the dessin-to-origami pipeline.
"""
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, List, Sequence, Tuple

from app.services.flatgeom import DIAGONAL, HORIZONTAL, VERTICAL, cylinder_decomposition, format_direction
from app.services.grpcore import (
    InvalidInputError,
    Permutation,
    VerificationError,
    Word,
    coset_action,
    cycle_type,
    induce_action,
    is_transitive,
    two_division_action,
    word_image,
)
from app.services.origami import Origami, singularity_data

# Configure logging
logger = logging.getLogger(__name__)

FINGERPRINT_DIRECTIONS = [HORIZONTAL, VERTICAL, DIAGONAL]


@dataclass(frozen=True)
class DessinMonodromy:
    """Monodromy (g0, g1) of a Belyi map of degree D; g_inf = (g1 g0)^-1."""
    degree: int
    g0: Permutation
    g1: Permutation

    def __post_init__(self):
        for name, p in (("g0", self.g0), ("g1", self.g1)):
            if p.degree != self.degree:
                raise InvalidInputError(f"{name} has degree {p.degree}, expected {self.degree}")
        if not is_transitive([self.g0, self.g1], self.degree):
            raise InvalidInputError("g0 and g1 do not act transitively")
        if self._euler() % 2:
            raise InvalidInputError("Riemann-Hurwitz count is odd")

    @classmethod
    def from_cycles(cls, degree: int, g0: List[List[int]], g1: List[List[int]]) -> "DessinMonodromy":
        perms = {}
        for name, cycles in (("g0", g0), ("g1", g1)):
            try:
                perms[name] = Permutation.from_cycles(cycles, degree)
            except InvalidInputError as e:
                raise InvalidInputError(f"Field '{name}': {str(e)}") from e
        return cls(degree, perms["g0"], perms["g1"])

    @property
    def g_inf(self) -> Permutation:
        return (self.g1 * self.g0).inverse()

    def _euler(self) -> int:
        counts = [len(p.cycles(include_fixed=True)) for p in (self.g0, self.g1, self.g_inf)]
        return sum(counts) - self.degree

    @property
    def genus(self) -> int:
        return (2 - self._euler()) // 2

    @property
    def is_pure(self) -> bool:
        """Every point over 1 has ramification index exactly 2."""
        return all(len(c) == 2 for c in self.g1.cycles(include_fixed=True))

    @property
    def is_totally_ramified_at_infinity(self) -> bool:
        return len(self.g_inf.cycles(include_fixed=True)) == 1

    def to_json(self) -> Dict:
        return {"degree": self.degree, "g0": self.g0.cycles(), "g1": self.g1.cycles()}


def new_dessin(g0: Permutation, g1: Permutation) -> DessinMonodromy:
    if g0.degree != g1.degree:
        raise InvalidInputError(f"Degree mismatch: {g0.degree} vs {g1.degree}")
    return DessinMonodromy(g0.degree, g0, g1)


class AdjustMode(str, Enum):
    COMPOSE_4X_1MX = "compose_4x_1mx"
    PRECOMPOSE_SQUARE_THEN_4X = "precompose_square_then_4x"


# Outer maps as (monodromy around 0, monodromy around 1) on their two sheets and
# the loop, downstairs in the middle sphere, that each Schreier generator lifts to.
_OUTER_MAPS = {
    # 4x(1-x): unramified over 0 (sheets x=0, x=1), double over 1 and infinity
    "4x(1-x)": (
        ([], [[1, 2]]),
        ["g0", "g1", "1"],
    ),
    # x^2: totally ramified over 0 and infinity, sheets x=1, x=-1 over 1
    "x^2": (
        ([[1, 2]], []),
        ["g1", "g0", "1"],
    ),
}


def _compose_outer(dessin: DessinMonodromy, name: str) -> DessinMonodromy:
    (x0, x1), lifts = _OUTER_MAPS[name]
    outer = coset_action([Permutation.from_cycles(x0, 2), Permutation.from_cycles(x1, 2)])
    loops = {"g0": dessin.g0, "g1": dessin.g1, "1": Permutation.identity(dessin.degree)}
    inner = [loops[symbol] for symbol in lifts]
    g0, g1 = induce_action(outer, inner)
    return new_dessin(g0, g1)


def belyi_adjust(dessin: DessinMonodromy, mode: str) -> DessinMonodromy:
    """
    Monodromy of an outer Belyi map composed with ``dessin``.

    Args:
        dessin: The input dessin
        mode: ``compose_4x_1mx`` for 4b(1-b), ``precompose_square_then_4x`` for
            4c(1-c) with c = b^2

    Returns:
        A dessin of twice (resp. four times) the degree
    """
    try:
        mode = AdjustMode(mode)
    except ValueError as e:
        raise InvalidInputError(f"Unknown adjustment mode '{mode}'") from e
    if mode == AdjustMode.PRECOMPOSE_SQUARE_THEN_4X:
        dessin = _compose_outer(dessin, "x^2")
    result = _compose_outer(dessin, "4x(1-x)")
    logger.debug(f"Adjusted dessin of degree {dessin.degree} to degree {result.degree}")
    return result


def dessin_dictionary(dessin: DessinMonodromy) -> Dict[str, Permutation]:
    """
    Monodromy of the intermediate cover of the four-punctured torus.

    a and b are the horizontal and vertical loops; c0, c1, c2 and c3 go around
    the 2-division points lying over 0, 1, lambda and infinity. In the unit
    squares of the [2]-subgroup's cosets these are the corners (1, 1), (1, 0),
    (0, 0) and (0, 1).

    Raises:
        VerificationError: The surface relation [a, b] c3 c2 c1 c0 = 1 fails
    """
    g_inf = dessin.g_inf
    a = g_inf * dessin.g1 * g_inf.inverse()
    b = g_inf
    loops = {
        "a": a,
        "b": b,
        "ab": a * b,
        "c0": dessin.g0 ** 2,
        "c1": dessin.g1 ** 2,
        "c2": Permutation.identity(dessin.degree),
        "c3": g_inf ** 2,
    }
    relation = a * b * a.inverse() * b.inverse()
    for name in ("c3", "c2", "c1", "c0"):
        relation = relation * loops[name]
    if not relation.is_identity():
        raise VerificationError("[a, b] c3 c2 c1 c0 is not trivial", anchor="dessin/surface-relation")
    return loops


# Schreier generators of the [2]-subgroup (transversal 1, x, y, xy; basepoint at
# the centre of the square at the origin) and the product of dictionary loops
# giving the sheet permutation along each. Products are composed right to left.
TWO_DIVISION_IDENTIFICATION: List[Tuple[Word, List[Tuple[str, int]]]] = [
    # horizontal loop below the 0 and infinity points
    (Word.from_letters([1, 1]), [("b", -1), ("a", 1), ("b", 1)]),
    # around (1, 1)
    (Word.from_letters([2, 1, -2, -1]), [("c0", 1)]),
    # vertical loop left of the 1 and 0 points
    (Word.from_letters([2, 2]), [("b", -1)]),
    # horizontal loop passing above (0, 1)
    (Word.from_letters([1, 2, 1, -2]), [("c3", 1), ("b", -1), ("a", 1), ("b", 1)]),
    # vertical loop right of the 1 and 0 points
    (Word.from_letters([1, 2, 2, -1]), [("b", -1), ("a", -1), ("b", 1), ("a", 1), ("b", 1)]),
]


LOOP_NAMES = ("a", "b", "ab", "c0", "c1", "c2", "c3")


def _evaluate_loops(loops: Dict[str, Permutation], product: Sequence[Tuple[str, int]]) -> Permutation:
    word = Word.from_syllables((LOOP_NAMES.index(name), e) for name, e in product)
    return word_image([loops[name] for name in LOOP_NAMES], word)


def origami_from_dessin(dessin: DessinMonodromy) -> Origami:
    """
    Origami of degree 4D built from a pure dessin totally ramified over infinity.

    Args:
        dessin: The dessin

    Returns:
        The origami obtained by composing the intermediate cover with the
        index-4 coset action of the [2]-subgroup
    """
    if not dessin.is_pure:
        raise InvalidInputError("origami_from_dessin requires a pure dessin")
    if not dessin.is_totally_ramified_at_infinity:
        raise InvalidInputError("origami_from_dessin requires total ramification over infinity")
    outer = two_division_action()
    if list(outer.generators) != [w for w, _ in TWO_DIVISION_IDENTIFICATION]:
        raise InvalidInputError("Unexpected Schreier generators of the [2]-subgroup")
    loops = dessin_dictionary(dessin)
    inner = [_evaluate_loops(loops, product) for _, product in TWO_DIVISION_IDENTIFICATION]
    h, v = induce_action(outer, inner)
    o = Origami(4 * dessin.degree, h, v)
    logger.info(f"Origami of degree {o.d} from dessin of degree {dessin.degree}")
    return o


@dataclass
class IntermediateCover:
    """The degree-D cover of the torus branched over the 2-division points."""
    degree: int
    branch_profiles: Dict[str, Tuple[int, ...]]
    zero_orders: Tuple[int, ...]
    genus: int
    marked_points: int
    strip_cycles: Dict[str, int]


def intermediate_cover(dessin: DessinMonodromy) -> IntermediateCover:
    """Riemann-Hurwitz data of the intermediate cover, read off the dessin's cycle counts."""
    loops = dessin_dictionary(dessin)
    profiles = {name: cycle_type(loops[name]) for name in ("c0", "c1", "c2", "c3")}
    zero_orders = tuple(sorted((k - 1 for ctype in profiles.values() for k in ctype if k > 1), reverse=True))
    ramification = sum(zero_orders)
    if ramification % 2:
        raise VerificationError(
            f"Ramification {ramification} of the intermediate cover is odd", anchor="dessin/riemann-hurwitz"
        )
    return IntermediateCover(
        degree=dessin.degree,
        branch_profiles=profiles,
        zero_orders=zero_orders,
        genus=1 + ramification // 2,
        marked_points=sum(len(ctype) for ctype in profiles.values()),
        strip_cycles={
            format_direction(HORIZONTAL): len(loops["a"].cycles(include_fixed=True)),
            format_direction(VERTICAL): len(loops["b"].cycles(include_fixed=True)),
            format_direction(DIAGONAL): len(loops["ab"].cycles(include_fixed=True)),
        },
    )


def riemann_hurwitz_report(dessin: DessinMonodromy) -> Dict[str, Dict]:
    """
    Genus bookkeeping for the dessin, the intermediate cover and the final origami.

    The expected zeros, genus and marked points come from the cycle counts of
    g0^2, g1^2 and g_inf^2; the final origami's come from its commutator.
    """
    middle = intermediate_cover(dessin)
    final_origami = origami_from_dessin(dessin)
    final = singularity_data(final_origami)
    return {
        "dessin": {
            "degree": dessin.degree,
            "genus": dessin.genus,
            "cycle_counts": [len(p.cycles(include_fixed=True)) for p in (dessin.g0, dessin.g1, dessin.g_inf)],
        },
        "intermediate": {
            "degree": middle.degree,
            "genus": middle.genus,
            "zero_orders": list(middle.zero_orders),
            "branch_profiles": {name: list(ctype) for name, ctype in middle.branch_profiles.items()},
            "points_over_branch": middle.marked_points,
        },
        "origami": {
            "degree": final_origami.d,
            "genus": final.genus,
            "zero_orders": list(final.zero_orders),
            "n": final.n,
            "expected_n": middle.marked_points,
            "consistent": (
                final.genus == middle.genus
                and final.zero_orders == middle.zero_orders
                and final.n == middle.marked_points
            ),
        },
    }


def strip_doubling_check(dessin: DessinMonodromy, o: Origami) -> Dict[str, Dict[str, Any]]:
    """Unit strips of the origami per direction against twice the cycles of a, b and ab."""
    middle = intermediate_cover(dessin)
    result = {}
    for direction in FINGERPRINT_DIRECTIONS:
        label = format_direction(direction)
        strips = cylinder_decomposition(o, direction).unit_strip_count
        expected = 2 * middle.strip_cycles[label]
        result[label] = {"strips": strips, "expected": expected, "passed": strips == expected}
    return result


@dataclass
class FingerprintReport:
    counts: Dict[str, int]
    heights: Dict[str, List[int]]
    r: int
    distinct: bool
    passed: bool
    failures: List[str]


def fingerprint_check(o: Origami, source_degree: int) -> FingerprintReport:
    """
    Check the cusp fingerprint of an origami built from a dessin of degree D.

    The counts of maximal cylinders in the horizontal, vertical and diagonal
    directions must form the multiset {1, D/2, r}, and every maximal cylinder
    must have height 2. Both hold only when g0 squares to the identity, so
    dessins with points of order three or more over 0 fail here.
    """
    if source_degree <= 0 or o.d != 4 * source_degree:
        raise InvalidInputError(f"Origami of degree {o.d} does not come from a dessin of degree {source_degree}")
    if source_degree % 2:
        raise InvalidInputError(f"Source degree {source_degree} of a pure dessin must be even")
    counts: Dict[str, int] = {}
    heights: Dict[str, List[int]] = {}
    failures: List[str] = []
    for direction in FINGERPRINT_DIRECTIONS:
        label = format_direction(direction)
        decomposition = cylinder_decomposition(o, direction)
        counts[label] = decomposition.count
        heights[label] = [k for _, k in decomposition.cylinders]
        if any(k != 2 for k in heights[label]):
            failures.append(f"{label}: maximal cylinder heights {heights[label]} are not all 2")
    remaining = list(counts.values())
    r = 0
    for required in (1, source_degree // 2):
        if required in remaining:
            remaining.remove(required)
        else:
            failures.append(f"counts {list(counts.values())} miss the value {required}")
    if len(remaining) == 1:
        r = remaining[0]
    distinct = len(set(counts.values())) == len(counts)
    return FingerprintReport(
        counts=counts,
        heights=heights,
        r=r,
        distinct=distinct,
        passed=not failures,
        failures=failures,
    )
