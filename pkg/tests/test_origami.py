import pytest
from pydantic import ValidationError

from app.services.grpcore import InvalidInputError
from app.services.origami import (
    Origami,
    canonicalize,
    intermediate_coverings,
    monodromy_group_order,
    same_origami,
    singularity_data,
)
from tests.conftest import random_permutation


def test_l22_invariants(l22):
    data = singularity_data(l22)
    assert data.genus == 2
    assert data.stratum == "H(2)"
    assert data.zero_orders == (2,)
    assert data.n == 1


def test_s2_invariants(s2):
    data = singularity_data(s2)
    assert data.genus == 2
    assert data.stratum == "H(1,1)"
    assert data.n == 2


def test_torus(torus):
    data = singularity_data(torus)
    assert data.genus == 1
    assert data.stratum == "H(0)"
    assert data.zero_orders == ()


def test_rejects_disconnected_surface():
    with pytest.raises(InvalidInputError, match="transitively"):
        Origami.from_cycles(2, [], [])


def test_from_cycles_names_the_field():
    with pytest.raises(InvalidInputError, match="Field 'v'"):
        Origami.from_cycles(3, [[1, 2]], [[1, 4]])


def test_from_json():
    o = Origami.from_json({"d": 3, "h": [[2, 3]], "v": [[1, 2]]})
    assert o.to_json() == canonicalize(o).to_json()
    with pytest.raises(ValidationError):
        Origami.from_json({"d": 3, "h": [[2, 3]]})


def test_gauss_bonnet_on_random_origamis(random_origamis):
    for o in random_origamis:
        data = singularity_data(o)
        assert sum(data.zero_orders) == 2 * data.genus - 2
        assert sum(data.commutator_cycle_type) == o.d


def test_same_origami_up_to_relabelling(rng, random_origamis):
    for o in random_origamis[:40]:
        c = random_permutation(rng, o.d)
        relabelled = Origami(o.d, o.h.conjugate(c), o.v.conjugate(c))
        assert same_origami(o, relabelled)


def test_monodromy_non_uniqueness_differs_as_pairs(l22):
    other = Origami.from_cycles(3, [[1, 2, 3]], [[1, 2]])
    assert not same_origami(l22, other)


def test_s2_factors_through_degree_two(s2):
    coverings = intermediate_coverings(s2)
    assert len(coverings) == 1
    quotient, blocks = coverings[0]
    assert blocks == [[1, 4], [2, 3]]
    assert quotient.d == 2
    assert singularity_data(quotient).genus == 1


def test_primitive_origami_has_no_quotient(l22, torus):
    assert intermediate_coverings(l22) == []
    assert intermediate_coverings(torus) == []


def test_monodromy_group_order(l22, s2):
    assert monodromy_group_order(l22) == 6
    # dihedral of order 8, preserving the blocks {1, 4}, {2, 3}
    assert monodromy_group_order(s2) == 8
