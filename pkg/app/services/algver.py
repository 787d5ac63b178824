"""
Exact polynomial identities for hyperelliptic families y^2 = f(x; t) and the
maps (x, y) -> (P(x), y R(x)) between them.

All arithmetic is exact (sympy over QQ); nothing is evaluated numerically.
"""
import logging
import random
import re
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import sympy
from sympy import Poly, QQ, Rational, symbols

from app.services.grpcore import InvalidInputError

# Configure logging
logger = logging.getLogger(__name__)

x, t = symbols("x t")

_FACTOR = re.compile(r"^(?:(\d+)(?:/(\d+))?|([xt])(?:\^(\d+))?)$")


def parse_poly(text: str) -> Poly:
    """
    Parse the strict ASCII grammar ``c*x^k*t^j`` joined by ``+`` and ``-``.

    Coefficients are integers or fractions ``p/q``; each factor may appear once.

    Args:
        text: Polynomial text, e.g. ``"1/4*x^3 - 3/2*x^2 + 9/4*x"``

    Returns:
        Poly in x, t over QQ
    """
    compact = text.replace(" ", "")
    if not compact:
        raise InvalidInputError("Empty polynomial")
    terms = re.findall(r"[+-]?[^+-]+", compact)
    if "".join(terms) != compact:
        raise InvalidInputError(f"Malformed polynomial '{text}'")
    expr = sympy.Integer(0)
    for term in terms:
        sign = -1 if term.startswith("-") else 1
        body = term.lstrip("+-")
        coefficient = Rational(1)
        seen = set()
        monomial = sympy.Integer(1)
        for factor in body.split("*"):
            match = _FACTOR.match(factor)
            if not match:
                raise InvalidInputError(f"Malformed factor '{factor}' in term '{term}'")
            num, den, var, power = match.groups()
            kind = var or "c"
            if kind in seen:
                raise InvalidInputError(f"Repeated factor '{kind}' in term '{term}'")
            seen.add(kind)
            if var:
                monomial *= (x if var == "x" else t) ** int(power or 1)
            else:
                if den is not None and int(den) == 0:
                    raise InvalidInputError(f"Zero denominator in term '{term}'")
                coefficient = Rational(int(num), int(den or 1))
        expr += sign * coefficient * monomial
    return Poly(expr, x, t, domain=QQ)


def to_poly(expr) -> Poly:
    return Poly(sympy.expand(expr), x, t, domain=QQ)


def format_poly(p: Poly) -> str:
    return str(p.as_expr())


def poly_to_text(p: Poly) -> str:
    """Render ``p`` in the grammar accepted by ``parse_poly``."""
    if p.is_zero:
        return "0"
    text = ""
    for (i, j), coefficient in sorted(p.terms(), reverse=True):
        c = p.domain.to_sympy(coefficient)
        factors = []
        if abs(c) != 1 or (i, j) == (0, 0):
            factors.append(str(abs(c)))
        if i:
            factors.append("x" if i == 1 else f"x^{i}")
        if j:
            factors.append("t" if j == 1 else f"t^{j}")
        sign = "-" if c < 0 else "+"
        body = "*".join(factors)
        text = f"{sign}{body}" if not text else f"{text} {sign} {body}"
    return text.lstrip("+")



@dataclass(frozen=True)
class HyperellipticFamily:
    """The curve y^2 = f(x; t)."""
    name: str
    f: Poly

    def __post_init__(self):
        if self.f.is_zero:
            raise InvalidInputError(f"Family {self.name} has f = 0")

    @property
    def degree(self) -> int:
        return self.f.degree(x)

    @property
    def genus(self) -> int:
        """Genus of the generic member, assuming f squarefree in x."""
        return (self.degree - 1) // 2


@dataclass(frozen=True)
class CoveringMapData:
    """(x, y) -> (P(x), y R(x))."""
    name: str
    P: Poly
    R: Poly

    def __post_init__(self):
        for label, p in (("P", self.P), ("R", self.R)):
            if p.degree(t) > 0:
                raise InvalidInputError(f"{label} of map {self.name} depends on t")
        if self.R.is_zero:
            raise InvalidInputError(f"Map {self.name} has R = 0")


def _substitute(f: Poly, P: Poly):
    return sympy.expand(f.as_expr().subs(x, P.as_expr()))


def verify_covering_identity(src: HyperellipticFamily, m: CoveringMapData, dst: HyperellipticFamily) -> bool:
    """f_src(x; t) R(x)^2 == f_dst(P(x); t) in QQ[t][x]."""
    lhs = sympy.expand(src.f.as_expr() * m.R.as_expr() ** 2)
    rhs = _substitute(dst.f, m.P)
    return to_poly(lhs - rhs).is_zero


def derive_target_cubic(src: HyperellipticFamily, m: CoveringMapData) -> Optional[Poly]:
    """
    The cubic g(X; t) with f_src(x; t) R(x)^2 = g(P(x); t), if it exists.

    The four coefficients of g are solved for over QQ(t) from the coefficients in x.

    Returns:
        g as a Poly in x, t (x standing for X), or None if no cubic fits
    """
    if m.P.degree(x) < 1:
        raise InvalidInputError(f"Map {m.name} has constant P")
    unknowns = symbols("g0:4")
    target = sympy.expand(src.f.as_expr() * m.R.as_expr() ** 2)
    candidate = sum(u * m.P.as_expr() ** k for k, u in enumerate(unknowns))
    residual = Poly(sympy.expand(target - candidate), x)
    equations = [c for c in residual.all_coeffs() if c != 0]
    solutions = sympy.linsolve(equations, *unknowns)
    if not solutions:
        logger.debug(f"No cubic target for {src.name} under {m.name}")
        return None
    (solution,) = solutions
    if any(value.free_symbols & set(unknowns) for value in solution):
        raise InvalidInputError(f"Cubic target for {src.name} under {m.name} is not unique")
    coefficients = [sympy.cancel(value) for value in solution]
    for value in coefficients:
        if not value.is_polynomial(t):
            return None
    return to_poly(sum(c * x ** k for k, c in enumerate(coefficients)))


def check_at_random_points(src: HyperellipticFamily, m: CoveringMapData, g: Poly, count: int = 20, seed: int = 0) -> bool:
    """Evaluate f_src R^2 and g(P) at random rational points (x, t)."""
    rng = random.Random(seed)
    for _ in range(count):
        point = {
            x: Rational(rng.randint(-50, 50), rng.randint(1, 20)),
            t: Rational(rng.randint(-50, 50), rng.randint(1, 20)),
        }
        lhs = (src.f.as_expr() * m.R.as_expr() ** 2).subs(point)
        rhs = g.as_expr().subs({x: m.P.as_expr().subs(point), t: point[t]})
        if sympy.simplify(lhs - rhs) != 0:
            return False
    return True


def compose_maps(m1: CoveringMapData, m2: CoveringMapData) -> CoveringMapData:
    """m2 after m1: (P2(P1), R2(P1) R1)."""
    P = to_poly(_substitute(m2.P, m1.P))
    R = to_poly(_substitute(m2.R, m1.P) * m1.R.as_expr())
    return CoveringMapData(name=f"{m2.name}*{m1.name}", P=P, R=R)


def fiber_profile(P: Poly, c) -> List[int]:
    """
    Multiplicities of the roots of P(x) - c, from a squarefree decomposition.

    Returns:
        Multiplicities in decreasing order, summing to deg P
    """
    univariate = Poly(P.as_expr() - Rational(c), x, domain=QQ)
    if univariate.degree() < 1:
        raise InvalidInputError("fiber_profile needs a nonconstant polynomial")
    _, factors = sympy.sqf_list(univariate)
    profile = []
    for factor, multiplicity in factors:
        profile.extend([multiplicity] * factor.degree())
    return sorted(profile, reverse=True)


@dataclass
class SingularParameters:
    discriminant: str
    factors: List[Tuple[str, int]]
    rational_roots: List[Rational]


def singular_parameters(family: HyperellipticFamily) -> SingularParameters:
    """Factored discriminant of f in x and its rational roots in t."""
    disc = sympy.discriminant(family.f.as_expr(), x)
    disc_poly = Poly(disc, t, domain=QQ)
    if disc_poly.is_zero:
        raise InvalidInputError(f"Family {family.name} is not squarefree in x")
    _, factors = sympy.factor_list(disc_poly)
    roots = []
    named = []
    for factor, multiplicity in factors:
        named.append((str(factor.as_expr()), multiplicity))
        if factor.degree() == 1:
            a, b = factor.all_coeffs()
            roots.append(-b / a)
    return SingularParameters(
        discriminant=str(sympy.factor(disc)),
        factors=named,
        rational_roots=sorted(roots),
    )


def degenerate_fiber_collapse(family: HyperellipticFamily, value) -> int:
    """Roots lost in f(x; value) relative to its squarefree part."""
    special = Poly(family.f.as_expr().subs(t, value), x, domain=QQ)
    return special.degree() - sympy.sqf_part(special).degree()


# Built-in families and maps


def _quarter_cubic():
    return Rational(1, 4) * x * (x - 3) ** 2


def builtin_families() -> Dict[str, HyperellipticFamily]:
    P = _quarter_cubic()
    return {
        "L22": HyperellipticFamily("L22", to_poly(x * (x - 4) * (P - t))),
        "S2": HyperellipticFamily("S2", to_poly(((4 * x * (x - 1)) ** 2 - (1 - t)) * (4 * x ** 2 - 4 * x - 1))),
        "E1": HyperellipticFamily("E1", to_poly((x - 1) * (x + 1) * (x ** 2 - (1 - t)))),
        "base": HyperellipticFamily("base", to_poly(x * (x - 1) * (x - (1 - t)))),
    }


def builtin_maps() -> Dict[str, CoveringMapData]:
    pi1 = CoveringMapData("pi1", to_poly(4 * x * (x - 1)), to_poly(2 * (x - Rational(1, 2))))
    iota = CoveringMapData("iota", to_poly(x ** 2), to_poly(x))
    maps = {
        "L22": CoveringMapData("L22", to_poly(_quarter_cubic()), to_poly((x - 3) * (x - 1) / 4)),
        "pi1": pi1,
        "iota": iota,
        "identity": CoveringMapData("identity", to_poly(x), to_poly(1)),
    }
    maps["pi"] = compose_maps(pi1, iota)
    return maps


@dataclass(frozen=True)
class FamilyIdentity:
    """f_source R^2 = f_target(P) for the named map; no target asks for the derived cubic."""
    source: str
    map: str
    target: Optional[str] = None

    @property
    def anchor(self) -> str:
        return f"{self.source}.{self.map}.{self.target or 'target-cubic'}"


@dataclass
class FamilyManifest:
    """Named families and maps, and the identities to check between them."""
    families: Dict[str, HyperellipticFamily]
    maps: Dict[str, CoveringMapData]
    identities: List[FamilyIdentity] = field(default_factory=list)

    def __post_init__(self):
        for identity in self.identities:
            names = (("family", identity.source, self.families), ("map", identity.map, self.maps))
            if identity.target is not None:
                names += (("family", identity.target, self.families),)
            for kind, name, table in names:
                if name not in table:
                    raise InvalidInputError(f"Identity {identity.anchor} names unknown {kind} '{name}'")

    @classmethod
    def from_text(
        cls,
        families: Dict[str, str],
        maps: Dict[str, Tuple[str, str]],
        identities: Sequence[FamilyIdentity],
    ) -> "FamilyManifest":
        """Parse every polynomial with ``parse_poly``; errors name the family or map."""
        parsed_families = {}
        for name, text in families.items():
            try:
                parsed_families[name] = HyperellipticFamily(name, parse_poly(text))
            except InvalidInputError as e:
                raise InvalidInputError(f"Family '{name}': {str(e)}") from e
        parsed_maps = {}
        for name, (P, R) in maps.items():
            try:
                parsed_maps[name] = CoveringMapData(name, parse_poly(P), parse_poly(R))
            except InvalidInputError as e:
                raise InvalidInputError(f"Map '{name}': {str(e)}") from e
        return cls(parsed_families, parsed_maps, list(identities))

    def to_json(self) -> Dict[str, Any]:
        return {
            "families": {name: poly_to_text(family.f) for name, family in self.families.items()},
            "maps": {name: {"P": poly_to_text(m.P), "R": poly_to_text(m.R)} for name, m in self.maps.items()},
            "identities": [
                {"source": i.source, "map": i.map, "target": i.target} for i in self.identities
            ],
        }


def builtin_manifest() -> FamilyManifest:
    """The built-in families and maps with the identities relating them."""
    return FamilyManifest(
        builtin_families(),
        builtin_maps(),
        [
            FamilyIdentity("S2", "pi1", "E1"),
            FamilyIdentity("E1", "iota", "base"),
            FamilyIdentity("S2", "pi", "base"),
            FamilyIdentity("L22", "L22"),
        ],
    )


@dataclass
class Claim:
    anchor: str
    passed: bool
    detail: str


def verify_manifest(manifest: FamilyManifest) -> List[Claim]:
    """
    Check every identity a manifest lists, in order.

    Returns:
        One Claim per identity; an identity without a target passes when the
        target cubic exists
    """
    claims: List[Claim] = []
    try:
        for identity in manifest.identities:
            src, m = manifest.families[identity.source], manifest.maps[identity.map]
            if identity.target is None:
                g = derive_target_cubic(src, m)
                passed = g is not None
                detail = f"g(X) = {format_poly(g)}" if g is not None else "no cubic"
            else:
                passed = verify_covering_identity(src, m, manifest.families[identity.target])
                detail = f"f_{identity.source} R^2 = f_{identity.target}(P)"
            claims.append(Claim(anchor=identity.anchor, passed=bool(passed), detail=detail))
            if not passed:
                logger.warning(f"Claim {identity.anchor} failed: {detail}")
    except Exception as e:
        logger.error(f"Error verifying manifest: {str(e)}")
        raise
    return claims


def verify_families(manifest: Optional[FamilyManifest] = None) -> List[Claim]:
    """
    Run every identity check on the two built-in families, or on a manifest.

    Returns:
        One Claim per checked statement, in a fixed order
    """
    if manifest is not None:
        return verify_manifest(manifest)
    families = builtin_families()
    maps = builtin_maps()
    claims: List[Claim] = []

    def add(anchor: str, passed: bool, detail: str):
        claims.append(Claim(anchor=anchor, passed=bool(passed), detail=detail))
        if not passed:
            logger.warning(f"Claim {anchor} failed: {detail}")

    try:
        l22, cover = families["L22"], maps["L22"]
        add("L22.degree", cover.P.degree(x) == 3, f"deg P = {cover.P.degree(x)}")
        for value in (0, 1):
            profile = fiber_profile(cover.P, value)
            add(f"L22.fiber-over-{value}", profile == [2, 1], f"profile {profile}")
        g = derive_target_cubic(l22, cover)
        add("L22.target-cubic", g is not None, f"g(X) = {format_poly(g)}" if g is not None else "no cubic")
        if g is not None:
            add("L22.target-cubic-evaluation", check_at_random_points(l22, cover, g), "20 random rational points")
        add("L22.genus", l22.genus == 2, f"deg f = {l22.degree}")

        s2, e1, base = families["S2"], families["E1"], families["base"]
        add("S2.pi1", verify_covering_identity(s2, maps["pi1"], e1), "f_S2 R^2 = f_E1(P)")
        add("S2.iota", verify_covering_identity(e1, maps["iota"], base), "f_E1 x^2 = f_base(x^2)")
        add("S2.factorization", verify_covering_identity(s2, maps["pi"], base), "pi = iota after pi1")
        add("S2.genus", s2.genus == 2, f"deg f = {s2.degree}")
        singular = singular_parameters(s2)
        add(
            "S2.singular-parameters",
            singular.rational_roots == [0, 1],
            f"rational roots {[str(r) for r in singular.rational_roots]}",
        )
        collapse = degenerate_fiber_collapse(s2, 0)
        add("S2.maximal-degeneration", collapse == 3, f"{collapse} roots collapse at t = 0")
    except Exception as e:
        logger.error(f"Error verifying families: {str(e)}")
        raise
    return claims
