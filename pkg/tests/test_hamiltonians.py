import numpy as np
import pytest

from conftest import dense_sum
from mpf_lab.hamiltonians import (
    HamiltonianSum,
    NoGroupingError,
    NotLatticeError,
    PauliTerm,
    TooSmallError,
    from_model_json,
    heisenberg_1d,
    induced_one_norm,
    one_norm,
    power_law_lattice,
    to_model_json,
)


def test_heisenberg_n3_periodic_counts_and_norm():
    h = heisenberg_1d(3)
    assert h.gamma == 9
    assert one_norm(h) == pytest.approx(9.0)
    assert np.allclose(h.dense(), dense_sum(h), atol=1e-14)


def test_heisenberg_n4_open_counts():
    assert heisenberg_1d(4, periodic=False).gamma == 9


def test_heisenberg_n4_periodic_norms():
    h = heisenberg_1d(4)
    assert one_norm(h) == pytest.approx(12.0)
    assert induced_one_norm(h) == pytest.approx(6.0)


def test_heisenberg_n2_periodic_keeps_wrap_copy():
    h = heisenberg_1d(2)
    assert h.gamma == 6
    assert one_norm(h) == pytest.approx(6.0)


def test_heisenberg_term_ordering():
    # bond-major, then X, Y, Z within each bond
    h = heisenberg_1d(3)
    assert [t.paulis for t in h.terms[:3]] == [
        {0: "X", 1: "X"},
        {0: "Y", 1: "Y"},
        {0: "Z", 1: "Z"},
    ]


def test_heisenberg_too_small():
    with pytest.raises(TooSmallError):
        heisenberg_1d(1)


def test_power_law_1d_distance_two_coefficient():
    h = power_law_lattice(4, 1, 2.0)
    pairs = {tuple(sorted(t.paulis)): t for t in h.terms if len(t.paulis) == 2}
    assert pairs[(1, 3)].norm == pytest.approx(0.25)


def test_power_law_2d_euclidean_distance():
    h = power_law_lattice(9, 2, 1.0)
    pairs = {tuple(sorted(t.paulis)): t for t in h.terms if len(t.paulis) == 2}
    # lattice points (0,0) and (1,1) flatten to sites 0 and 4
    assert pairs[(0, 4)].norm == pytest.approx(1 / np.sqrt(2))


def test_power_law_large_alpha_limit():
    h = power_law_lattice(4, 1, 200.0)
    for t in h.terms:
        if len(t.paulis) == 2:
            lo, hi = sorted(t.paulis)
            assert t.norm == pytest.approx(1.0 if hi - lo == 1 else 0.0, abs=1e-30)


def test_power_law_rejects_non_lattice():
    with pytest.raises(NotLatticeError):
        power_law_lattice(5, 2, 1.0)


def test_power_law_seed_determinism():
    a = to_model_json(power_law_lattice(8, 1, 1.5, seed=3))
    b = to_model_json(power_law_lattice(8, 1, 1.5, seed=3))
    assert a == b


def test_one_norm_basics():
    h = HamiltonianSum(2, (PauliTerm(2, 2.0, {0: "X"}),), grouping=((0,),))
    assert one_norm(h) == pytest.approx(2.0)
    assert induced_one_norm(h) == pytest.approx(2.0)

    zero = HamiltonianSum(2, (PauliTerm(2, 0.0, {0: "X"}), PauliTerm(2, 0.0, {1: "Z"})))
    assert one_norm(zero) == 0.0


def test_power_law_induced_norm_equals_site_sums():
    h = power_law_lattice(4, 1, 2.0)
    per_site = {}
    for t in h.terms:
        for site in t.paulis:
            per_site[site] = per_site.get(site, 0.0) + t.norm
    assert induced_one_norm(h) == pytest.approx(max(per_site.values()))
    assert induced_one_norm(h) == pytest.approx(3.25)


@pytest.mark.parametrize(
    "h",
    [
        heisenberg_1d(3),
        heisenberg_1d(5, periodic=False),
        power_law_lattice(8, 1, 1.5),
        power_law_lattice(9, 2, 2.0),
    ],
    ids=["heis3", "heis5-open", "pl-1d", "pl-2d"],
)
def test_induced_bounded_by_one_norm_and_hermitian(h):
    assert induced_one_norm(h) <= one_norm(h) + 1e-12
    d = h.dense()
    assert np.max(np.abs(d - d.conj().T)) <= 1e-12


def test_induced_norm_requires_grouping():
    h = HamiltonianSum(1, (PauliTerm(1, 1.0, {0: "X"}),))
    with pytest.raises(NoGroupingError):
        induced_one_norm(h)


def test_model_json_round_trips(xz1):
    for h in (heisenberg_1d(4), power_law_lattice(4, 1, 2.0), xz1):
        back = from_model_json(to_model_json(h))
        assert to_model_json(back) == to_model_json(h)
        assert np.allclose(back.dense(), h.dense(), atol=1e-14)


def test_term_validation():
    with pytest.raises(ValueError):
        PauliTerm(2, float("nan"), {0: "X"})
    with pytest.raises(ValueError):
        PauliTerm(2, 1.0, {5: "X"})
    with pytest.raises(ValueError):
        PauliTerm(2, 1.0, {0: "Q"})
    with pytest.raises(ValueError):
        HamiltonianSum(2, ())
    with pytest.raises(ValueError):
        HamiltonianSum(2, (PauliTerm(2, 1.0, {0: "X"}),), grouping=((0,), (1,)))
