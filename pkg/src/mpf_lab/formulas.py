"""Trotter splitting formulas as dense operators.

A formula is held as a flat stage list [(term index, time fraction), ...]
unrolled at construction; evaluation walks the list left to right, matching
the operator-product notation. Flat lists make the stage-count invariant
checkable and keep evaluation order deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .hamiltonians import HamiltonianSum, PauliTerm
from .operators import DenseOperator, _expm_anti_hermitian

__all__ = [
    "ProductFormulaSpec",
    "build_spec",
    "powered_formula",
    "suzuki_coefficient",
    "suzuki_u2p",
    "trotter_u1",
    "trotter_u2",
]


def suzuki_coefficient(p: int) -> float:
    """s_p = (4 - 4^(1/(2p+1)))^-1, decreasing toward 1/3."""
    if p < 1:
        raise ValueError("p must be >= 1")
    return 1.0 / (4.0 - 4.0 ** (1.0 / (2 * p + 1)))


@dataclass(frozen=True)
class ProductFormulaSpec:
    """Unrolled stage list for a splitting formula of the given order."""

    order: int
    stages: tuple  # ((gamma, coefficient), ...) applied left to right


def _u1_stages(gamma: int) -> tuple:
    return tuple((g, 1.0) for g in range(gamma))


def _u2_stages(gamma: int) -> tuple:
    back = [(g, 0.5) for g in range(gamma - 1, -1, -1)]
    forth = [(g, 0.5) for g in range(gamma)]
    return tuple(back + forth)


def build_spec(order: int, gamma: int) -> ProductFormulaSpec:
    """Stage list for order 1, 2, or any even order via the recursion
    U_{2p+2}(t) = U_2p(s_p t)^2 U_2p((1-4 s_p) t) U_2p(s_p t)^2."""
    if order == 1:
        return ProductFormulaSpec(1, _u1_stages(gamma))
    if order == 2:
        return ProductFormulaSpec(2, _u2_stages(gamma))
    if order < 1 or order % 2:
        raise ValueError(f"order must be 1 or even, got {order}")
    stages = _u2_stages(gamma)
    for p in range(1, order // 2):
        s_p = suzuki_coefficient(p)
        outer = tuple((g, c * s_p) for g, c in stages)
        middle = tuple((g, c * (1.0 - 4.0 * s_p)) for g, c in stages)
        stages = outer + outer + middle + outer + outer
    return ProductFormulaSpec(order, stages)


def _pauli_stage_data(h: HamiltonianSum, term_index: int):
    """Column permutation and phase vector of the term's Pauli string.

    For masks (x, z) the string acts as P|b> = i^y (-1)^(b.z) |b^x| with
    y the number of Y letters, so right-multiplication by P is a column
    gather times a diagonal phase: (M @ P)[:, b] = phi_b * M[:, b^x].
    """
    key = ("stage", term_index)
    if key not in h._dense_cache:
        term = h.terms[term_index]
        x, z = term.masks()
        cols = np.arange(h.dim)
        signs = np.ones(h.dim, dtype=np.complex128)
        bits = cols & z
        parity = np.zeros(h.dim, dtype=np.int64)
        for shift in range(h.n_qubits):
            parity ^= (bits >> shift) & 1
        signs[parity == 1] = -1.0
        y_count = bin(x & z).count("1")
        phases = (1j**y_count) * signs
        h._dense_cache[key] = (cols ^ x, phases)
    return h._dense_cache[key]


def _apply_stage(out: np.ndarray, h: HamiltonianSum, g: int, scaled_t: float,
                 cache: dict) -> np.ndarray:
    """out @ exp(-i * scaled_t * H_g), exploiting Pauli structure."""
    term = h.terms[g]
    if isinstance(term, PauliTerm):
        theta = scaled_t * term.coefficient
        if theta == 0.0:
            return out
        perm, phases = _pauli_stage_data(h, g)
        return math.cos(theta) * out - (1j * math.sin(theta)) * (
            out[:, perm] * phases
        )
    key = (g, scaled_t)
    if key not in cache:
        cache[key] = _expm_anti_hermitian(-1j * scaled_t * h.term_matrices()[g])
    return out @ cache[key]


def evaluate_spec(h: HamiltonianSum, t: float, spec: ProductFormulaSpec) -> np.ndarray:
    """Dense product over the stage list, left to right."""
    cache: dict = {}
    out = np.eye(h.dim, dtype=np.complex128)
    for g, c in spec.stages:
        out = _apply_stage(out, h, g, c * t, cache)
    return out


def trotter_u1(h: HamiltonianSum, t: float) -> DenseOperator:
    """First-order splitting: prod_gamma exp(-i t H_gamma) in term order."""
    return DenseOperator(evaluate_spec(h, t, build_spec(1, h.gamma)))


def trotter_u2(h: HamiltonianSum, t: float) -> DenseOperator:
    """Symmetric second-order splitting: reversed half-sweep then forward
    half-sweep, each stage at t/2."""
    return DenseOperator(evaluate_spec(h, t, build_spec(2, h.gamma)))


def suzuki_u2p(h: HamiltonianSum, t: float, p: int) -> DenseOperator:
    """Order-2p formula from the recursion; p=1 is trotter_u2."""
    if p < 1:
        raise ValueError("p must be >= 1")
    return DenseOperator(evaluate_spec(h, t, build_spec(2 * p, h.gamma)))


def powered_formula(
    h: HamiltonianSum, delta: float, k: int, base: ProductFormulaSpec
) -> DenseOperator:
    """(U_base(delta/k))^k via binary powering."""
    if k < 1:
        raise ValueError("k must be >= 1")
    u = evaluate_spec(h, delta / k, base)
    return DenseOperator(np.linalg.matrix_power(u, k))
