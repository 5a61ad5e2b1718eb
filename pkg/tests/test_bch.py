import numpy as np
import pytest
import scipy.linalg

from conftest import fit_loglog, rand_anti_hermitian
from mpf_lab.bch import (
    ConvergenceRiskError,
    DepthCapError,
    Permutation,
    bch_two_term_check,
    descent_count,
    dyson_expansion,
    e_j_operator,
    effective_generator,
    phi_k,
    symmetric_bch_term,
)
from mpf_lab.formulas import trotter_u2
from mpf_lab.hamiltonians import heisenberg_1d
from mpf_lab.operators import (
    DenseOperator,
    DimMismatchError,
    NotAntiHermitianError,
    commutator,
    matrix_exponential,
    spectral_norm,
)


def test_descent_count_pinned():
    assert descent_count(Permutation((1, 2, 3))) == 0
    assert descent_count(Permutation((2, 1))) == 1
    assert descent_count(Permutation((3, 1, 2))) == 1


def test_permutation_validation():
    with pytest.raises(ValueError):
        Permutation((1, 1))
    with pytest.raises(ValueError):
        Permutation((0, 1))


def _rand_ops(rng, count, dim=4, norm=1.0):
    return [DenseOperator(rand_anti_hermitian(rng, dim, norm)) for _ in range(count)]


def test_phi_1_is_identity_map():
    rng = np.random.default_rng(0)
    (y,) = _rand_ops(rng, 1)
    assert np.allclose(phi_k([y]).matrix, y.matrix, atol=1e-14)


def test_phi_2_is_half_commutator():
    rng = np.random.default_rng(1)
    y1, y2 = _rand_ops(rng, 2)
    want = 0.5 * commutator(y1, y2).matrix
    assert np.allclose(phi_k([y1, y2]).matrix, want, atol=1e-12)


def test_phi_k_commuting_inputs_vanish():
    diags = [DenseOperator(np.diag(1j * np.arange(1.0, 4.0) * c)) for c in (1.0, 2.0, -0.5)]
    assert spectral_norm(phi_k(diags)) <= 1e-14


def test_phi_k_multilinearity():
    rng = np.random.default_rng(2)
    y1, y2, y3 = _rand_ops(rng, 3)
    scaled = DenseOperator(2.5 * y2.matrix)
    lhs = phi_k([y1, scaled, y3]).matrix
    rhs = 2.5 * phi_k([y1, y2, y3]).matrix
    assert spectral_norm(lhs - rhs) <= 1e-10


def test_phi_k_caps_and_mismatch():
    rng = np.random.default_rng(3)
    with pytest.raises(DepthCapError):
        phi_k(_rand_ops(rng, 9, dim=2))
    with pytest.raises(DimMismatchError):
        phi_k([DenseOperator(np.zeros((2, 2), dtype=complex)), DenseOperator(np.zeros((4, 4), dtype=complex))])


def test_two_term_check_trivial_cases():
    rng = np.random.default_rng(4)
    x = DenseOperator(rand_anti_hermitian(rng, 4, 0.1))
    zero = DenseOperator(np.zeros((4, 4), dtype=complex))
    assert bch_two_term_check(x, zero, 1) <= 1e-10

    a = DenseOperator(np.diag(1j * np.array([0.05, 0.1, -0.12, 0.02])))
    b = DenseOperator(np.diag(1j * np.array([-0.02, 0.04, 0.08, 0.0])))
    assert bch_two_term_check(a, b, 1) <= 1e-10


def test_two_term_check_residual_decay_and_scipy_oracle():
    rng = np.random.default_rng(5)
    x = DenseOperator(rand_anti_hermitian(rng, 4, 0.05))
    y = DenseOperator(rand_anti_hermitian(rng, 4, 0.05))
    r2 = bch_two_term_check(x, y, 2)
    r4 = bch_two_term_check(x, y, 4)
    assert r4 / r2 <= 1e-2

    # the k_max=2 truncation is X + Y + [X,Y]/2; check the residual
    # against an entirely external log
    log = scipy.linalg.logm(scipy.linalg.expm(x.matrix) @ scipy.linalg.expm(y.matrix))
    manual = x.matrix + y.matrix + 0.5 * commutator(x, y).matrix
    assert abs(r2 - np.linalg.norm(log - manual, 2)) <= 1e-10


def test_two_term_check_norm_premise():
    rng = np.random.default_rng(6)
    x = DenseOperator(rand_anti_hermitian(rng, 4, 0.2))
    y = DenseOperator(rand_anti_hermitian(rng, 4, 0.2))
    with pytest.raises(ConvergenceRiskError):
        bch_two_term_check(x, y, 3)


def test_symmetric_term_even_depth_structurally_zero(xz1):
    rep = symmetric_bch_term(xz1, 4, 0.1)
    assert rep.structurally_zero
    assert rep.norm == 0.0
    assert np.count_nonzero(rep.phi_value.matrix) == 0


def test_symmetric_term_commuting_vanishes(commuting3):
    assert symmetric_bch_term(commuting3, 3, 0.1).norm <= 1e-14


@pytest.mark.parametrize("k", [3, 5])
def test_symmetric_term_bound_xz_and_heis3(k, xz1, heis3):
    for h, s in ((xz1, 0.1), (heis3, 0.05)):
        rep = symmetric_bch_term(h, k, s)
        assert rep.converged_premise
        assert rep.norm <= rep.bound + 1e-9


@pytest.mark.parametrize("k", [3, 5])
def test_symmetric_term_homogeneity(k, xz1):
    lo = symmetric_bch_term(xz1, k, 0.02).norm
    hi = symmetric_bch_term(xz1, k, 0.04).norm
    assert hi / lo == pytest.approx(2.0**k, rel=0.01)


def test_symmetric_term_depth_cap(xz1):
    with pytest.raises(DepthCapError):
        symmetric_bch_term(xz1, 9, 0.1)


def test_effective_generator_k1_is_scaled_hamiltonian(xz1):
    z = effective_generator(xz1, 0.1, 1)
    assert np.allclose(z.matrix, -1j * 0.1 * xz1.dense(), atol=1e-14)


@pytest.mark.parametrize("big_k, order", [(1, 3), (3, 5), (5, 7)])
def test_effective_generator_residual_slopes(big_k, order, xz1):
    ss = [0.2 * 0.75**i for i in range(6)]
    errs = [
        spectral_norm(trotter_u2(xz1, s).matrix - matrix_exponential(effective_generator(xz1, s, big_k)).matrix)
        for s in ss
    ]
    assert fit_loglog(ss, errs) >= order - 0.4


def test_effective_generator_deep_truncation_is_tiny(xz1):
    z = effective_generator(xz1, 0.1, 7)
    res = spectral_norm(trotter_u2(xz1, 0.1).matrix - matrix_exponential(z).matrix)
    assert res <= 1e-10


def test_effective_generator_premise_gate(xz1):
    with pytest.raises(ConvergenceRiskError):
        effective_generator(xz1, 0.5, 3)


def test_e_j_operator_properties(xz1, commuting3):
    assert spectral_norm(e_j_operator(commuting3, 3)) <= 1e-14
    # alpha_comm,3 on {X,Z} is 16, so the bound is 16/9
    e3 = e_j_operator(xz1, 3)
    assert spectral_norm(e3) <= 16 / 9 + 1e-9
    with pytest.raises(ValueError):
        e_j_operator(xz1, 4)


def test_e3_reexponentiated_order_five(xz1):
    e3 = e_j_operator(xz1, 3).matrix
    h = xz1.dense()
    ss = (0.2, 0.1, 0.05, 0.025)
    errs = []
    for s in ss:
        gen = DenseOperator(-1j * h * s + e3 * s**3, hint="anti_hermitian")
        errs.append(spectral_norm(trotter_u2(xz1, s).matrix - matrix_exponential(gen).matrix))
    assert fit_loglog(ss, errs) == pytest.approx(5.0, abs=0.3)


def test_dyson_expansion_trivial_cases():
    rng = np.random.default_rng(7)
    a = DenseOperator(rand_anti_hermitian(rng, 4, 0.5))
    zero = DenseOperator(np.zeros((4, 4), dtype=complex))
    approx, remainder = dyson_expansion(a, zero, 3)
    assert remainder == 0.0
    assert spectral_norm(approx.matrix - scipy.linalg.expm(a.matrix)) <= 1e-12

    b = DenseOperator(rand_anti_hermitian(rng, 4, 0.3))
    approx, remainder = dyson_expansion(a, b, 1)
    assert remainder == pytest.approx(0.3, abs=1e-12)
    assert spectral_norm(approx.matrix - scipy.linalg.expm(a.matrix)) <= 1e-12


def test_dyson_expansion_certified_defect():
    rng = np.random.default_rng(8)
    a = DenseOperator(rand_anti_hermitian(rng, 4, 0.8))
    b = DenseOperator(rand_anti_hermitian(rng, 4, 0.1))
    approx, remainder = dyson_expansion(a, b, 3)
    truth = scipy.linalg.expm(a.matrix + b.matrix)
    assert remainder == pytest.approx(0.1**3 / 6, abs=1e-15)
    assert spectral_norm(truth - approx.matrix) <= 1e-3 / 6 + 1e-9


def test_dyson_expansion_input_validation():
    rng = np.random.default_rng(9)
    a = DenseOperator(rand_anti_hermitian(rng, 4, 0.5))
    with pytest.raises(NotAntiHermitianError):
        dyson_expansion(a, DenseOperator(np.eye(4, dtype=complex)), 2)
    with pytest.raises(DimMismatchError):
        dyson_expansion(a, DenseOperator(np.zeros((2, 2), dtype=complex)), 2)
    with pytest.raises(ValueError):
        dyson_expansion(a, a, 0)
