"""Built-in named inputs: origamis, dessins and the S2 ledger script."""
import logging
from typing import Dict, List, Tuple

from app.services.dessin import DessinMonodromy
from app.services.grpcore import InvalidInputError
from app.services.origami import Origami

# Configure logging
logger = logging.getLogger(__name__)

# name -> (degree, first permutation cycles, second permutation cycles)
BUILTIN_ORIGAMIS: Dict[str, Tuple[int, List[List[int]], List[List[int]]]] = {
    "torus": (1, [], []),
    "L22": (3, [[2, 3]], [[1, 2]]),
    "S2": (4, [[1, 2], [3, 4]], [[2, 3]]),
}

BUILTIN_DESSINS: Dict[str, Tuple[int, List[List[int]], List[List[int]]]] = {
    # 4x(1 - x)
    "dessin2": (2, [], [[1, 2]]),
    "dessin4": (4, [[2, 3]], [[1, 2], [3, 4]]),
    "dessin6": (6, [[1, 2, 3]], [[1, 4], [2, 5], [3, 6]]),
    # x^3, used for the adjustment examples
    "cube": (3, [[1, 2, 3]], []),
}

S2_LEDGER = """\
# Formal-exponent ledger for the S2 origami curve.
# Every level works in the pure part (kernel of tau_i -> (i i+1)).

level gamma04
group sphere 4
compare exact
unknowns d_l
check artin [tau1 tau3, tau2 tau1 tau3 tau2]
equation centralizer
lhs f tau2 | tau1^4 : blanchfield_lyndon
lhs pow tau2 : 2*d_l
lhs f tau1 tau3 | tau2 : relation_iv
lhs pow tau2 tau1 tau3 : 2*rho
lhs pow tau1 tau3 : -2*rho
expect d_l = -rho

level b4
group braid 4
normal w4
supplementary k5
compare torsion-free
unknowns d_l a
check class x12 x13 x14 x23 x24 x34 = 1
check class x13 = x24
check class [z3 tau2, (tau1 tau3)^2] = x12^-1 x13 x24 x34^-1
check class [tau2, x34^2] = x24^2 x34^-2
check acts z3 tau2 | [z3 tau2, (tau1 tau3)^2] : inverts
check acts (tau1 tau3)^2 | [z3 tau2, (tau1 tau3)^2] : fixes
check vanish [z3, tau1^2]
check class z3 tau1 z3 tau1^-1 = x14 x23 x24^2 x34^2
equation base-point
lhs f tau2 | x34^2 : blanchfield_lyndon
lhs f z3 | tau1^2 : vanish
lhs pow z3 : d_l
lhs pow x23 : -rho
lhs f tau1 tau3 | z3 tau2 : relation_iv
lhs pow tau2 tau1 tau3 : 2*rho
lhs pow tau1 tau3 : -2*rho
rhs pow z3 tau1 z3 tau1^-1 : a
expect d_l = -2*rho
expect a = rho

level gamma06
group sphere 6
supplementary k6
compare torsion-free
unknowns d_l d_m d_r
check class x35^2 = (x12^-1 x13 x14^-1 x15 x24^-1)^-2
check class x16 = (x12 x13 x14 x15)^-1
check acts tau3 | [tau3, (tau1^2 tau2)^4] : inverts
check acts (tau1^2 tau2)^4 | [tau3, (tau1^2 tau2)^4] : fixes
equation collapse
lhs f tau3 | (tau1^2 tau2)^4 : blanchfield_lyndon
lhs f tau1^2 | tau2^2 : vanish
lhs f tau5^2 | tau4^2 : vanish
lhs pow tau1 : 2*d_l
lhs pow tau3 : 2*d_m
lhs pow tau5 : 2*d_r
lhs f tau2 tau4 | tau1^2 tau3 tau5^2 : relation_iv
lhs pow tau3 tau2 tau4 : 2*rho
lhs pow tau2 tau4 : -2*rho
lhs pow x12 x13 : -rho
lhs pow x46 x56 : -rho
rhs pow x16 : 2*rho
expect d_l = -2*rho
expect d_m = -rho
expect d_r = -2*rho

level h4
group braid 4
normal y4
compare torsion-free
check artin (tau1 tau2 tau3)^4 = w3 y4
check central w4
check class tau1^2 tau3^2 = tau1^4 w3
equation reduction
lhs f tau2 | tau1^4 : blanchfield_lyndon
lhs pow tau2 : -2*rho
lhs f tau1 tau3 | tau2 : relation_iv
lhs pow tau2 tau1 tau3 : 2*rho
lhs pow tau1 tau3 : -2*rho
rhs f tau2 | tau1^4 : blanchfield_lyndon
rhs f tau1^2 tau3^2 | tau2 : blanchfield_lyndon
equation lift
lhs f tau2 | tau1^4 : blanchfield_lyndon
lhs f tau1^4 w3 | tau2 : blanchfield_lyndon
"""

BUILTIN_LEDGERS: Dict[str, str] = {"S2-ledger": S2_LEDGER}


def builtin_names() -> Dict[str, str]:
    """Every built-in name with its kind."""
    names = {name: "origami" for name in BUILTIN_ORIGAMIS}
    names.update({name: "dessin" for name in BUILTIN_DESSINS})
    names.update({name: "ledger" for name in BUILTIN_LEDGERS})
    return names


def builtin_origami(name: str) -> Origami:
    if name not in BUILTIN_ORIGAMIS:
        raise InvalidInputError(f"Unknown built-in origami '{name}'")
    d, h, v = BUILTIN_ORIGAMIS[name]
    return Origami.from_cycles(d, h, v)


def builtin_dessin(name: str) -> DessinMonodromy:
    if name not in BUILTIN_DESSINS:
        raise InvalidInputError(f"Unknown built-in dessin '{name}'")
    degree, g0, g1 = BUILTIN_DESSINS[name]
    return DessinMonodromy.from_cycles(degree, g0, g1)
