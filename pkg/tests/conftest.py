import numpy as np
import pytest

from mpf_lab.hamiltonians import HamiltonianSum, PauliTerm, heisenberg_1d

_PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def kron_string(n_qubits, paulis):
    # site 0 is the fastest-varying axis
    out = np.array([[1.0 + 0j]])
    for site in range(n_qubits):
        out = np.kron(_PAULI[paulis.get(site, "I")], out)
    return out


def dense_sum(h):
    """Rebuild the dense matrix from term data, bypassing the package's cache."""
    total = np.zeros((2**h.n_qubits, 2**h.n_qubits), dtype=complex)
    for term in h.terms:
        total += term.coefficient * kron_string(h.n_qubits, term.paulis)
    return total


def fit_loglog(xs, ys):
    return float(np.polyfit(np.log(np.asarray(xs, float)), np.log(np.asarray(ys, float)), 1)[0])


def rand_anti_hermitian(rng, dim, norm=None):
    a = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    a = (a - a.conj().T) / 2
    if norm is not None:
        a *= norm / np.linalg.norm(a, 2)
    return a


@pytest.fixture
def xz1():
    # the standard two-term non-commuting toy: H = X + Z on one qubit
    terms = (PauliTerm(1, 1.0, {0: "X"}), PauliTerm(1, 1.0, {0: "Z"}))
    return HamiltonianSum(1, terms, grouping=((0,), (0,)))


@pytest.fixture
def heis3():
    return heisenberg_1d(3)


@pytest.fixture
def commuting3():
    terms = (
        PauliTerm(3, 1.0, {0: "Z"}),
        PauliTerm(3, 0.5, {1: "Z"}),
        PauliTerm(3, 2.0, {2: "Z"}),
    )
    return HamiltonianSum(3, terms, grouping=((0,), (1,), (2,)))
