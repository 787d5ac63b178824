"""
Permutations, free-group words and coset (Schreier) machinery.

Conventions used throughout the package:

* ``p * q`` applies ``q`` first, then ``p``.
* Coset actions are right actions: a word is processed letter by letter from
  the left and every letter ``g`` sends a point ``c`` to ``action[g](c)``.
* Generators of a free group are numbered from 0; symbols of a permutation
  are numbered from 1.
"""
import logging
from collections import deque
from dataclasses import dataclass, field
from math import gcd
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

# Configure logging
logger = logging.getLogger(__name__)


class OrigamiToolkitError(Exception):
    """Base class for all errors raised by the toolkit."""


class InvalidInputError(OrigamiToolkitError):
    """Malformed input or violated precondition."""


class ResourceLimitError(OrigamiToolkitError):
    """An enumeration exceeded its configured bound."""


class VerificationError(OrigamiToolkitError):
    """A checked claim did not hold."""

    def __init__(self, message: str, anchor: Optional[str] = None, detail: Optional[str] = None):
        super().__init__(message)
        self.anchor = anchor
        self.detail = detail


@dataclass(frozen=True)
class Permutation:
    """A permutation of {1..d}; ``images[i - 1]`` is the image of ``i``."""
    images: Tuple[int, ...]

    def __post_init__(self):
        d = len(self.images)
        if d == 0:
            raise InvalidInputError("Permutation degree must be positive")
        if sorted(self.images) != list(range(1, d + 1)):
            raise InvalidInputError(f"Not a bijection of 1..{d}: {list(self.images)}")

    @classmethod
    def identity(cls, degree: int) -> "Permutation":
        return cls(tuple(range(1, degree + 1)))

    @classmethod
    def from_cycles(cls, cycles: Iterable[Sequence[int]], degree: int) -> "Permutation":
        """
        Build a permutation from cycle notation.

        Args:
            cycles: Iterable of cycles, e.g. ``[[1, 2], [3, 4]]``; fixed points may be omitted
            degree: Number of symbols

        Returns:
            The permutation
        """
        images = list(range(1, degree + 1))
        seen = set()
        for cycle in cycles:
            for i, a in enumerate(cycle):
                if not 1 <= a <= degree:
                    raise InvalidInputError(f"Symbol {a} out of range 1..{degree}")
                if a in seen:
                    raise InvalidInputError(f"Symbol {a} appears twice in {list(cycles)}")
                seen.add(a)
                images[a - 1] = cycle[(i + 1) % len(cycle)]
        return cls(tuple(images))

    @property
    def degree(self) -> int:
        return len(self.images)

    def __call__(self, i: int) -> int:
        return self.images[i - 1]

    def __mul__(self, other: "Permutation") -> "Permutation":
        if other.degree != self.degree:
            raise InvalidInputError(f"Degree mismatch: {self.degree} vs {other.degree}")
        return Permutation(tuple(self.images[j - 1] for j in other.images))

    def inverse(self) -> "Permutation":
        inv = [0] * self.degree
        for i, a in enumerate(self.images, start=1):
            inv[a - 1] = i
        return Permutation(tuple(inv))

    def __pow__(self, n: int) -> "Permutation":
        base = self if n >= 0 else self.inverse()
        result = Permutation.identity(self.degree)
        for _ in range(abs(n)):
            result = result * base
        return result

    def is_identity(self) -> bool:
        return all(a == i for i, a in enumerate(self.images, start=1))

    def cycles(self, include_fixed: bool = False) -> List[List[int]]:
        seen = set()
        result = []
        for start in range(1, self.degree + 1):
            if start in seen:
                continue
            cycle = [start]
            seen.add(start)
            a = self(start)
            while a != start:
                cycle.append(a)
                seen.add(a)
                a = self(a)
            if include_fixed or len(cycle) > 1:
                result.append(cycle)
        return result

    def order(self) -> int:
        result = 1
        for cycle in self.cycles():
            result = result * len(cycle) // gcd(result, len(cycle))
        return result

    def conjugate(self, by: "Permutation") -> "Permutation":
        """Return ``by * self * by^-1``."""
        return by * self * by.inverse()

    def __str__(self) -> str:
        cycles = self.cycles()
        if not cycles:
            return "()"
        return "".join("(" + " ".join(str(a) for a in c) + ")" for c in cycles)


def cycle_type(p: Permutation) -> Tuple[int, ...]:
    """Sorted multiset of cycle lengths of ``p``, fixed points included."""
    return tuple(sorted(len(c) for c in p.cycles(include_fixed=True)))


def orbit(gens: Sequence[Permutation], start: int) -> List[int]:
    seen = {start}
    queue = deque([start])
    while queue:
        a = queue.popleft()
        for g in gens:
            for b in (g(a), g.inverse()(a)):
                if b not in seen:
                    seen.add(b)
                    queue.append(b)
    return sorted(seen)


def _check_degrees(gens: Sequence[Permutation], d: int):
    for g in gens:
        if g.degree != d:
            raise InvalidInputError(f"Generator of degree {g.degree} given for degree {d}")


def is_transitive(gens: Sequence[Permutation], d: int) -> bool:
    """Whether the group generated by ``gens`` acts transitively on {1..d}."""
    _check_degrees(gens, d)
    if not gens:
        return d == 1
    return len(orbit(gens, 1)) == d


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n + 1))

    def find(self, a: int) -> int:
        while self.parent[a] != a:
            self.parent[a] = self.parent[self.parent[a]]
            a = self.parent[a]
        return a

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if ra > rb:
            ra, rb = rb, ra
        self.parent[rb] = ra
        return True


def _minimal_block_system(gens: Sequence[Permutation], d: int, k: int) -> List[List[int]]:
    uf = _UnionFind(d)
    uf.union(1, k)
    queue = deque([(1, k)])
    while queue:
        a, b = queue.popleft()
        for g in gens:
            ga, gb = g(a), g(b)
            if uf.union(ga, gb):
                queue.append((ga, gb))
    blocks: Dict[int, List[int]] = {}
    for a in range(1, d + 1):
        blocks.setdefault(uf.find(a), []).append(a)
    return sorted(blocks.values())


def block_systems(gens: Sequence[Permutation], d: int) -> List[List[List[int]]]:
    """
    All minimal nontrivial block systems of a transitive action.

    Args:
        gens: Generators of the action
        d: Degree

    Returns:
        Partitions of {1..d} into blocks of equal size strictly between 1 and d;
        the list is empty iff the action is primitive
    """
    _check_degrees(gens, d)
    if not is_transitive(gens, d):
        raise InvalidInputError("block_systems requires a transitive action")
    systems = []
    for k in range(2, d + 1):
        partition = _minimal_block_system(gens, d, k)
        if len(partition) > 1 and partition not in systems:
            systems.append(partition)

    def refines(fine, coarse):
        return fine != coarse and all(any(set(b) <= set(c) for c in coarse) for b in fine)

    minimal = [s for s in systems if not any(refines(t, s) for t in systems)]
    return sorted(minimal, key=lambda s: (len(s[0]), s))


def canonical_pair(h: Permutation, v: Permutation) -> Tuple[Permutation, Permutation]:
    """
    Canonical representative of the simultaneous conjugacy class of (h, v).

    Every start symbol is tried; symbols are relabelled in BFS order along the
    edges h, h^-1, v, v^-1 and the lexicographically least pair is kept.
    """
    d = h.degree
    if v.degree != d:
        raise InvalidInputError(f"Degree mismatch: {h.degree} vs {v.degree}")
    hi, vi = h.inverse(), v.inverse()
    edges = (h, hi, v, vi)
    best = None
    for start in range(1, d + 1):
        label = {start: 1}
        order = [start]
        pos = 0
        while pos < len(order):
            a = order[pos]
            pos += 1
            for g in edges:
                b = g(a)
                if b not in label:
                    label[b] = len(order) + 1
                    order.append(b)
        if len(order) != d:
            raise InvalidInputError("canonical_pair requires a transitive pair")
        h_images = tuple(label[h(a)] for a in order)
        v_images = tuple(label[v(a)] for a in order)
        key = (h_images, v_images)
        if best is None or key < best:
            best = key
    return Permutation(best[0]), Permutation(best[1])


def group_order(gens: Sequence[Permutation], bound: int) -> int:
    """Order of the generated group by bounded enumeration."""
    if not gens:
        return 1
    d = gens[0].degree
    identity = Permutation.identity(d)
    seen = {identity.images}
    queue = deque([identity])
    while queue:
        p = queue.popleft()
        for g in gens:
            q = g * p
            if q.images not in seen:
                seen.add(q.images)
                if len(seen) > bound:
                    raise ResourceLimitError(f"Group order exceeds bound {bound}")
                queue.append(q)
    return len(seen)


@dataclass(frozen=True)
class Word:
    """
    A freely reduced word in a free group.

    ``syllables`` is a tuple of (generator index, nonzero exponent) pairs with no
    two adjacent syllables on the same generator.
    """
    syllables: Tuple[Tuple[int, int], ...] = ()

    def __post_init__(self):
        for i, (g, e) in enumerate(self.syllables):
            if e == 0:
                raise InvalidInputError("Zero exponent in word")
            if i and self.syllables[i - 1][0] == g:
                raise InvalidInputError("Word is not freely reduced")

    @classmethod
    def from_syllables(cls, syllables: Iterable[Tuple[int, int]]) -> "Word":
        """Build a word from arbitrary syllables, reducing freely."""
        stack: List[List[int]] = []
        for g, e in syllables:
            if e == 0:
                continue
            if stack and stack[-1][0] == g:
                stack[-1][1] += e
                if stack[-1][1] == 0:
                    stack.pop()
            else:
                stack.append([g, e])
        return cls(tuple((g, e) for g, e in stack))

    @classmethod
    def gen(cls, g: int, e: int = 1) -> "Word":
        return cls.from_syllables([(g, e)])

    @classmethod
    def from_letters(cls, letters: Iterable[int]) -> "Word":
        """Build from signed 1-based letters: ``[1, 2, -1]`` is x0 x1 x0^-1."""
        return cls.from_syllables((abs(a) - 1, 1 if a > 0 else -1) for a in letters)

    def letters(self) -> Iterator[Tuple[int, int]]:
        """Yield (generator, +1/-1) for each letter."""
        for g, e in self.syllables:
            step = 1 if e > 0 else -1
            for _ in range(abs(e)):
                yield g, step

    def __len__(self) -> int:
        return sum(abs(e) for _, e in self.syllables)

    def __mul__(self, other: "Word") -> "Word":
        return Word.from_syllables(self.syllables + other.syllables)

    def inverse(self) -> "Word":
        return Word(tuple((g, -e) for g, e in reversed(self.syllables)))

    def __pow__(self, n: int) -> "Word":
        base = self if n >= 0 else self.inverse()
        return Word.from_syllables(base.syllables * abs(n))

    def is_identity(self) -> bool:
        return not self.syllables

    def exponent_sum(self, g: int) -> int:
        return sum(e for h, e in self.syllables if h == g)

    def substitute(self, images: Sequence["Word"]) -> "Word":
        """Image under the homomorphism sending generator i to ``images[i]``."""
        result: List[Tuple[int, int]] = []
        for g, e in self.syllables:
            result.extend((images[g] ** e).syllables)
        return Word.from_syllables(result)

    def format(self, names: Optional[Sequence[str]] = None) -> str:
        if not self.syllables:
            return "1"
        parts = []
        for g, e in self.syllables:
            name = names[g] if names else f"g{g}"
            parts.append(name if e == 1 else f"{name}^{e}")
        return " ".join(parts)

    def __str__(self) -> str:
        return self.format()


def commutator(a: Word, b: Word) -> Word:
    """``[a, b] = a b a^-1 b^-1``."""
    return a * b * a.inverse() * b.inverse()


def evaluate(action: Sequence[Permutation], w: Word, point: int) -> int:
    """Apply ``w`` to ``point`` in a right action."""
    for g, step in w.letters():
        point = action[g](point) if step > 0 else action[g].inverse()(point)
    return point


def word_image(images: Sequence[Permutation], w: Word) -> Permutation:
    """Image of ``w`` under the homomorphism generator ``i`` -> ``images[i]`` (left composition)."""
    result = Permutation.identity(images[0].degree)
    for g, e in w.syllables:
        result = result * (images[g] ** e)
    return result


@dataclass
class SchreierData:
    """
    A transitive right action of a free group with a Schreier transversal.

    ``generators[j]`` is the free Schreier generator t_c g t_{c.g}^-1 of the
    non-tree edge ``edge_of[j] = (c, g)``.
    """
    ngens: int
    degree: int
    action: Tuple[Permutation, ...]
    basepoint: int
    transversal: Tuple[Word, ...]
    generators: Tuple[Word, ...]
    edge_of: Tuple[Tuple[int, int], ...]
    edge_index: Dict[Tuple[int, int], int] = field(default_factory=dict)
    inverse_action: Tuple[Permutation, ...] = ()


def coset_action(action: Sequence[Permutation], basepoint: int = 1) -> SchreierData:
    """
    Schreier transversal and free generators of a point stabilizer.

    Args:
        action: One permutation per free generator (right action)
        basepoint: The point whose stabilizer is described

    Returns:
        SchreierData; the number of Schreier generators is d(g - 1) + 1
    """
    if not action:
        raise InvalidInputError("coset_action needs at least one generator")
    d = action[0].degree
    _check_degrees(action, d)
    ngens = len(action)
    inverses = [p.inverse() for p in action]
    transversal: Dict[int, Word] = {basepoint: Word()}
    tree = set()
    queue = deque([basepoint])
    while queue:
        c = queue.popleft()
        for step in (1, -1):
            for g in range(ngens):
                target = action[g](c) if step > 0 else inverses[g](c)
                if target not in transversal:
                    transversal[target] = transversal[c] * Word.gen(g, step)
                    tree.add((c, g) if step > 0 else (target, g))
                    queue.append(target)
    if len(transversal) != d:
        raise InvalidInputError(f"Action is not transitive ({len(transversal)} of {d} points reached)")
    generators = []
    edge_of = []
    edge_index = {}
    for c in range(1, d + 1):
        for g in range(ngens):
            if (c, g) in tree:
                continue
            target = action[g](c)
            edge_index[(c, g)] = len(generators)
            edge_of.append((c, g))
            generators.append(transversal[c] * Word.gen(g) * transversal[target].inverse())
    logger.debug(f"Coset action of degree {d}: {len(generators)} Schreier generators")
    return SchreierData(
        ngens=ngens,
        degree=d,
        action=tuple(action),
        basepoint=basepoint,
        transversal=tuple(transversal[c] for c in range(1, d + 1)),
        generators=tuple(generators),
        edge_of=tuple(edge_of),
        edge_index=edge_index,
        inverse_action=tuple(inverses),
    )


def rewrite_letters(sd: SchreierData, w: Word, start: int) -> Tuple[List[Tuple[int, int]], int]:
    """
    Reidemeister-Schreier rewriting of ``w`` read from ``start``.

    Returns:
        The (Schreier generator index, +1/-1) letters and the end point
    """
    c = start
    out = []
    for g, step in w.letters():
        if step > 0:
            j = sd.edge_index.get((c, g))
            if j is not None:
                out.append((j, 1))
            c = sd.action[g](c)
        else:
            prev = sd.inverse_action[g](c)
            j = sd.edge_index.get((prev, g))
            if j is not None:
                out.append((j, -1))
            c = prev
    return out, c


def schreier_rewrite(sd: SchreierData, w: Word) -> Word:
    """Rewrite a stabilizer element as a word in the free Schreier generators."""
    letters, end = rewrite_letters(sd, w, sd.basepoint)
    if end != sd.basepoint:
        raise InvalidInputError(f"Word {w} does not stabilize the basepoint {sd.basepoint}")
    return Word.from_syllables(letters)


def induce_action(outer: SchreierData, inner: Sequence[Permutation]) -> List[Permutation]:
    """
    Action of the ambient free group on pairs (coset, inner sheet).

    Point (c, s) is numbered (c - 1) * m + s. A generator g sends (c, s) to
    (c.g, inner[j](s)) where j is the Schreier generator of the edge (c, g),
    and to (c.g, s) along tree edges.
    """
    if len(inner) != len(outer.generators):
        raise InvalidInputError(
            f"Expected {len(outer.generators)} inner permutations, got {len(inner)}"
        )
    m = inner[0].degree if inner else 1
    _check_degrees(inner, m)
    result = []
    for g in range(outer.ngens):
        images = []
        for c in range(1, outer.degree + 1):
            target = outer.action[g](c)
            j = outer.edge_index.get((c, g))
            for s in range(1, m + 1):
                s2 = inner[j](s) if j is not None else s
                images.append((target - 1) * m + s2)
        result.append(Permutation(tuple(images)))
    return result


def nielsen_automorphisms() -> List[List[Word]]:
    """Generators of Aut(F2) as images of (x, y)."""
    x, y = Word.gen(0), Word.gen(1)
    return [[y, x], [x.inverse(), y], [x * y, y]]


def is_characteristic(sd: SchreierData) -> bool:
    """Whether the stabilizer subgroup of F2 is invariant under every Nielsen generator."""
    if sd.ngens != 2:
        raise InvalidInputError("is_characteristic expects an action of the rank-2 free group")
    for images in nielsen_automorphisms():
        for s in sd.generators:
            if evaluate(sd.action, s.substitute(images), sd.basepoint) != sd.basepoint:
                return False
    return True


def two_division_action() -> SchreierData:
    """Index-4 coset action of the [2]-subgroup of <x, y>; cosets 1, x, y, xy."""
    x = Permutation.from_cycles([[1, 2], [3, 4]], 4)
    y = Permutation.from_cycles([[1, 3], [2, 4]], 4)
    return coset_action([x, y])
