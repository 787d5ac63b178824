"""
The Origami type: a transitive pair of permutations (h, v) on d squares.

h sends a square to its right neighbour, v to the square above it.
"""
import logging
from dataclasses import dataclass
from typing import Any, Dict, List, Tuple

from app.config import settings
from app.services.grpcore import (
    InvalidInputError,
    Permutation,
    block_systems,
    canonical_pair,
    cycle_type,
    group_order,
    is_transitive,
)

# Configure logging
logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Origami:
    """A square-tiled surface given by its horizontal and vertical gluings."""
    d: int
    h: Permutation
    v: Permutation

    def __post_init__(self):
        if self.d <= 0:
            raise InvalidInputError(f"d must be positive, got {self.d}")
        if self.h.degree != self.d:
            raise InvalidInputError(f"h has degree {self.h.degree}, expected d={self.d}")
        if self.v.degree != self.d:
            raise InvalidInputError(f"v has degree {self.v.degree}, expected d={self.d}")
        if not is_transitive([self.h, self.v], self.d):
            raise InvalidInputError("h and v do not act transitively (surface is not connected)")

    @classmethod
    def from_cycles(cls, d: int, h: List[List[int]], v: List[List[int]]) -> "Origami":
        """Build an origami from cycle notation, naming the failing field on error."""
        perms = {}
        for name, cycles in (("h", h), ("v", v)):
            try:
                perms[name] = Permutation.from_cycles(cycles, d)
            except InvalidInputError as e:
                raise InvalidInputError(f"Field '{name}': {str(e)}") from e
        return cls(d, perms["h"], perms["v"])

    @classmethod
    def from_json(cls, data: Dict[str, Any]) -> "Origami":
        from app.models.schemas import OrigamiFile

        parsed = OrigamiFile.model_validate(data)
        return cls.from_cycles(parsed.d, parsed.h, parsed.v)

    def to_json(self) -> Dict[str, Any]:
        """Canonical JSON form: {"d": ..., "h": cycles, "v": cycles}."""
        c = canonicalize(self)
        return {"d": c.d, "h": c.h.cycles(), "v": c.v.cycles()}

    def commutator(self) -> Permutation:
        """h v h^-1 v^-1; its cycles are the corner classes of the surface."""
        return self.h * self.v * self.h.inverse() * self.v.inverse()

    def key(self) -> Tuple[Tuple[int, ...], Tuple[int, ...]]:
        c = canonicalize(self)
        return c.h.images, c.v.images

    def __str__(self) -> str:
        return f"Origami(d={self.d}, h={self.h}, v={self.v})"


@dataclass(frozen=True)
class SingularityData:
    zero_orders: Tuple[int, ...]
    genus: int
    n: int
    commutator_cycle_type: Tuple[int, ...]

    @property
    def stratum(self) -> str:
        """Stratum label such as ``H(1,1)``; the torus is ``H(0)``."""
        if not self.zero_orders:
            return "H(0)"
        return "H(" + ",".join(str(k) for k in sorted(self.zero_orders, reverse=True)) + ")"


def singularity_data(o: Origami) -> SingularityData:
    """
    Zeros, genus and marked points of an origami.

    Every cycle of the commutator is a preimage of the branch point; a k-cycle
    is a zero of order k - 1.

    Args:
        o: The origami

    Returns:
        SingularityData
    """
    ctype = cycle_type(o.commutator())
    vertices = len(ctype)
    doubled = o.d - vertices + 2
    if doubled % 2:
        raise InvalidInputError(f"Euler characteristic of {o} is odd")
    zero_orders = tuple(sorted((k - 1 for k in ctype if k > 1), reverse=True))
    genus = doubled // 2
    if sum(zero_orders) != 2 * genus - 2:
        raise InvalidInputError(f"Gauss-Bonnet fails for {o}")
    return SingularityData(
        zero_orders=zero_orders,
        genus=genus,
        n=vertices,
        commutator_cycle_type=ctype,
    )


def canonicalize(o: Origami) -> Origami:
    h, v = canonical_pair(o.h, o.v)
    return Origami(o.d, h, v)


def same_origami(o1: Origami, o2: Origami) -> bool:
    """Whether the two pairs are simultaneously conjugate."""
    return o1.d == o2.d and o1.key() == o2.key()


def intermediate_coverings(o: Origami) -> List[Tuple[Origami, List[List[int]]]]:
    """
    Quotient origamis through which the covering factors.

    One entry per minimal block system of <h, v>: the induced action on the
    blocks, numbered in the order the blocks are listed.
    """
    if o.d == 1:
        return []
    result = []
    for blocks in block_systems([o.h, o.v], o.d):
        index = {a: i + 1 for i, block in enumerate(blocks) for a in block}
        h_bar = Permutation(tuple(index[o.h(b[0])] for b in blocks))
        v_bar = Permutation(tuple(index[o.v(b[0])] for b in blocks))
        result.append((Origami(len(blocks), h_bar, v_bar), blocks))
    logger.debug(f"{len(result)} intermediate coverings for {o}")
    return result


def monodromy_group_order(o: Origami, bound: int = None) -> int:
    """Order of <h, v> by bounded enumeration."""
    return group_order([o.h, o.v], bound or settings.MONODROMY_ORDER_BOUND)
