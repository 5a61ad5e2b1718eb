"""Nested-commutator expansion machinery.

phi_k with descent-statistic weights, homogeneous terms of the multi-letter
log-of-product expansion, effective generators for the symmetric splitting
formula, and the high-order variation-of-parameters expansion with a
certified remainder.

Conventions. phi_k(Y_1..Y_k) = (1/k^2) sum_sigma (-1)^d / C(k-1, d) *
[Y_s1,[...,Y_sk]] with d the descent count of sigma. The degree-k term of
log(e^(W_1) ... e^(W_L)) is sum over compositions i of k into L slots of
phi_k(W_1 x i_1, ..., W_L x i_L) / prod(i!), letters ordered as the
exponentials. Enumeration aggregates scalar weights per induced letter tuple
first and only then touches matrices, with shared-suffix evaluation; mirror
letters that point at the same array collapse to one matrix id.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from . import commutators
from .formulas import build_spec
from .hamiltonians import HamiltonianSum
from .operators import (
    DenseOperator,
    DimMismatchError,
    NotAntiHermitianError,
    _expm_anti_hermitian,
    spectral_norm,
)

__all__ = [
    "BchTermReport",
    "ConvergenceRiskError",
    "DepthCapError",
    "ErrorBudget",
    "Permutation",
    "bch_two_term_check",
    "descent_count",
    "dyson_expansion",
    "e_j_operator",
    "effective_generator",
    "phi_k",
    "symmetric_bch_term",
]

PHI_DEPTH_CAP = 8
WORD_DEPTH_CAP = 7


class DepthCapError(ValueError):
    """Requested expansion depth exceeds the enumeration cap."""


class ConvergenceRiskError(ValueError):
    """Inputs violate the expansion's convergence premise."""


@dataclass(frozen=True)
class Permutation:
    '''One-line permutation of {1..k}.'''

    images: tuple

    def __post_init__(self) -> None:
        k = len(self.images)
        if sorted(self.images) != list(range(1, k + 1)):
            raise ValueError(f"{self.images} is not a permutation of 1..{k}")

    @property
    def size(self) -> int:
        return len(self.images)


@dataclass(frozen=True)
class BchTermReport:
    '''One homogeneous term of the symmetric-word expansion with its bound.'''

    k: int
    phi_value: DenseOperator
    norm: float
    bound: float
    converged_premise: bool
    structurally_zero: bool = False


@dataclass(frozen=True)
class ErrorBudget:
    '''Evaluated right-hand sides of the truncated error bounds.'''

    e_tilde_bounds: dict
    f_tilde_bound: float
    thm_bound: float
    truncation_depth: int
    tail_clear: bool


def descent_count(sigma) -> int:
    '''Number of positions i with sigma(i+1) < sigma(i).'''
    images = sigma.images if isinstance(sigma, Permutation) else tuple(sigma)
    return sum(1 for a, b in zip(images, images[1:]) if b < a)


def _permutation_weights(k: int) -> list:
    '''(index permutation, (-1)^d / C(k-1, d)) for all sigma in S_k.'''
    out = []
    for p in itertools.permutations(range(k)):
        d = descent_count(p)
        out.append((p, (-1.0) ** d / math.comb(k - 1, d)))
    return out


def _evaluate_weighted_nested(weights: dict, mats: list, dim: int) -> np.ndarray:
    '''sum_t w_t [M_t0,[M_t1,...]] sharing partial results across tuples
    with a common suffix.'''
    total = np.zeros((dim, dim), dtype=np.complex128)
    if not weights:
        return total
    scale = max(abs(w) for w in weights.values())
    items = sorted(
        (t, w) for t, w in weights.items() if abs(w) > 1e-15 * scale
    )
    items.sort(key=lambda it: it[0][::-1])
    k = len(items[0][0]) if items else 0
    suffixes = [None] * k
    prev = None
    for t, w in items:
        if prev is None:
            start = k - 1
        else:
            r = k - 1
            while r >= 0 and t[r] == prev[r]:
                r -= 1
            start = r
        for r in range(start, -1, -1):
            if r == k - 1:
                suffixes[r] = mats[t[r]]
            else:
                m = mats[t[r]]
                s = suffixes[r + 1]
                suffixes[r] = m @ s - s @ m
        total += w * suffixes[0]
        prev = t
    return total


def phi_k(y_list) -> DenseOperator:
    '''Degree-k component functional of the log-of-product expansion.

    k = len(y_list) <= 8; k = 1 returns the operator itself.'''
    ys = [y.matrix if isinstance(y, DenseOperator) else np.asarray(y) for y in y_list]
    k = len(ys)
    if k < 1:
        raise ValueError("need at least one operator")
    if k > PHI_DEPTH_CAP:
        raise DepthCapError(f"k = {k} exceeds the cap {PHI_DEPTH_CAP}")
    dim = ys[0].shape[0]
    if any(y.shape != (dim, dim) for y in ys):
        raise DimMismatchError("operators must share one square shape")
    if k == 1:
        return DenseOperator(ys[0])
    weights: dict = {}
    for p, w in _permutation_weights(k):
        weights[p] = weights.get(p, 0.0) + w
    total = _evaluate_weighted_nested(weights, ys, dim)
    return DenseOperator(total / k**2)


def _compositions(total: int, slots: int):
    '''Nonnegative integer compositions, lexicographic.'''
    if slots == 1:
        yield (total,)
        return
    for head in range(total + 1):
        for rest in _compositions(total - head, slots - 1):
            yield (head,) + rest


def _log_product_term(letters: list, k: int) -> np.ndarray:
    '''Degree-k homogeneous term of log(e^(W_1) ... e^(W_L)).

    Scalar permutation weights are accumulated per induced letter tuple,
    tuples are collapsed onto distinct matrix ids, and only then are nested
    commutators evaluated.'''
    dim = letters[0].shape[0]
    ids = []
    id_map: dict[int, int] = {}
    mats: list = []
    for w in letters:
        key = id(w)
        if key not in id_map:
            id_map[key] = len(mats)
            mats.append(w)
        ids.append(id_map[key])

    perm_weights = _permutation_weights(k)
    factorials = [math.factorial(i) for i in range(k + 1)]
    weights: dict = {}
    n_letters = len(letters)
    for comp in _compositions(k, n_letters):
        denom = 1.0
        arg = []
        for letter_index, count in enumerate(comp):
            if count:
                denom *= factorials[count]
                arg.extend([ids[letter_index]] * count)
        inv = 1.0 / denom
        for p, w in perm_weights:
            t = tuple(arg[i] for i in p)
            weights[t] = weights.get(t, 0.0) + w * inv
    return _evaluate_weighted_nested(weights, mats, dim) / k**2


def _log_unitary(u: np.ndarray) -> np.ndarray:
    '''Principal-branch logarithm of a unitary via eigendecomposition,
    symmetrized back to exactly anti-Hermitian.'''
    w, v = np.linalg.eig(u)
    if np.max(np.abs(np.abs(w) - 1.0)) > 1e-8:
        raise ArithmeticError("input is not unitary to working precision")
    phases = np.angle(w)
    if np.max(np.abs(phases)) > math.pi - 1e-6:
        raise ConvergenceRiskError("eigenphase too close to the branch cut")
    log = (v * (1j * phases)) @ np.linalg.inv(v)
    log = 0.5 * (log - log.conj().T)
    defect = spectral_norm(_expm_anti_hermitian(log) - u)
    if defect > 1e-9:
        raise ArithmeticError(f"log residual {defect:.3e} too large")
    return log


def bch_two_term_check(x: DenseOperator, y: DenseOperator, k_max: int) -> float:
    '''|| log(e^X e^Y) - truncated expansion || for anti-Hermitian X, Y.

    Requires ||X|| + ||Y|| <= 1/4 so both the series and the principal
    branch are safe; the residual decays geometrically in k_max.'''
    for op in (x, y):
        m = op.matrix
        if np.max(np.abs(m + m.conj().T)) > 1e-10:
            raise NotAntiHermitianError("inputs must be anti-Hermitian")
    if spectral_norm(x) + spectral_norm(y) > 0.25:
        raise ConvergenceRiskError("norm premise ||X|| + ||Y|| <= 1/4 violated")
    if k_max > PHI_DEPTH_CAP:
        raise DepthCapError(f"k_max = {k_max} exceeds {PHI_DEPTH_CAP}")
    letters = [np.asarray(x.matrix), np.asarray(y.matrix)]
    z = np.zeros_like(letters[0])
    for k in range(1, k_max + 1):
        z = z + _log_product_term(letters, k)
    reference = _log_unitary(
        _expm_anti_hermitian(letters[0]) @ _expm_anti_hermitian(letters[1])
    )
    return float(spectral_norm(z - reference))


def _symmetric_word(h: HamiltonianSum, s: float) -> list:
    '''Letters of the order-2 stage sequence, scaled by -i s; mirror stages
    share one array so they collapse to a single matrix id.'''
    mats = h.term_matrices()
    scaled = [(-1j * s * 0.5) * m for m in mats]
    return [scaled[g] for g, _ in build_spec(2, h.gamma).stages]


def symmetric_bch_term(h: HamiltonianSum, k: int, s: float) -> BchTermReport:
    '''Degree-k term of the log of the symmetric splitting formula.

    Even k is structurally zero (symmetry) and returns without enumeration.
    The bound column is s^k * alpha_comm_k / k^2; the convergence flag is the
    heuristic radius certificate from the commutator table.'''
    if k < 1:
        raise ValueError("k must be >= 1")
    if k > WORD_DEPTH_CAP:
        raise DepthCapError(f"k = {k} exceeds the cap {WORD_DEPTH_CAP}")
    dim = h.dim
    alpha_k = commutators.alpha_comm(h, k).value
    bound = abs(s) ** k * alpha_k / k**2
    premise_ok = _premise_holds(h, abs(s), min(WORD_DEPTH_CAP, max(k, 3)))
    if k % 2 == 0:
        zero = DenseOperator(np.zeros((dim, dim), dtype=np.complex128))
        return BchTermReport(k, zero, 0.0, bound, premise_ok, True)
    word = _symmetric_word(h, s)
    value = _log_product_term(word, k)
    return BchTermReport(
        k, DenseOperator(value), float(spectral_norm(value)), bound, premise_ok
    )


def _premise_holds(h: HamiltonianSum, s: float, depth: int) -> bool:
    table = commutators.build_table(h, depth)
    radius = commutators.convergence_radius(table)
    return s <= radius


def effective_generator(h: HamiltonianSum, s: float, big_k: int) -> DenseOperator:
    '''Z_K = -i s H + sum of the odd expansion terms up to depth K;
    exp(Z_K) tracks the splitting formula to order K+2.'''
    if big_k > WORD_DEPTH_CAP:
        raise DepthCapError(f"K = {big_k} exceeds the cap {WORD_DEPTH_CAP}")
    if not _premise_holds(h, abs(s), min(WORD_DEPTH_CAP, max(big_k, 3))):
        raise ConvergenceRiskError(
            "step size exceeds the heuristic convergence radius"
        )
    z = -1j * s * h.dense()
    for k in range(3, big_k + 1, 2):
        z = z + symmetric_bch_term(h, k, s).phi_value.matrix
    return DenseOperator(z, hint="anti_hermitian")


def e_j_operator(h: HamiltonianSum, j: int) -> DenseOperator:
    '''Coefficient operator of s^j in the effective-generator series
    (the degree-j term evaluated at s = 1).'''
    if j % 2 == 0 or j < 3:
        raise ValueError("defined for odd j >= 3")
    return symmetric_bch_term(h, j, 1.0).phi_value


def _gauss_nodes(order: int):
    x, w = np.polynomial.legendre.leggauss(order)
    return 0.5 * (x + 1.0), 0.5 * w


def _simplex_integral(a_eig, b: np.ndarray, l: int, order: int) -> np.ndarray:
    '''Iterated integral of e^(A(1-s1)) B ... B e^(A sl) over the ordered
    simplex, by the map s_i = u_1...u_i (Jacobian prod u_i^(l-i)) and
    tensorized Gauss-Legendre.'''
    w_eig, v_eig = a_eig
    dim = b.shape[0]
    nodes, gl_weights = _gauss_nodes(order)
    grids = np.meshgrid(*([nodes] * l), indexing="ij")
    us = np.stack([g.reshape(-1) for g in grids], axis=1)  # (N, l)
    wgrids = np.meshgrid(*([gl_weights] * l), indexing="ij")
    weight = np.prod(np.stack([g.reshape(-1) for g in wgrids], axis=1), axis=1)
    for i in range(l):
        weight = weight * us[:, i] ** (l - 1 - i)
    s = np.cumprod(us, axis=1)  # (N, l), s_1 >= ... >= s_l
    gaps = np.empty((s.shape[0], l + 1))
    gaps[:, 0] = 1.0 - s[:, 0]
    for i in range(1, l):
        gaps[:, i] = s[:, i - 1] - s[:, i]
    gaps[:, l] = s[:, l - 1]
    phases = np.exp(-1j * np.multiply.outer(gaps, w_eig))  # (N, l+1, dim)
    vh = v_eig.conj().T
    exps = (v_eig[None, None, :, :] * phases[:, :, None, :]) @ vh
    chain = exps[:, 0]
    for i in range(1, l + 1):
        chain = chain @ b
        chain = np.matmul(chain, exps[:, i])
    return np.tensordot(weight, chain, axes=(0, 0))


def dyson_expansion(a: DenseOperator, b: DenseOperator, p: int):
    '''e^A plus the first p-1 iterated-integral corrections in B.

    Returns (approximation, remainder_bound) with remainder_bound =
    ||B||^p / p!; quadrature order is escalated until two successive orders
    agree to 1e-10 * ||B||^l / l! per correction, so the certified defect is
    the remainder bound plus quadrature tolerance.'''
    if p < 1:
        raise ValueError("p must be >= 1")
    for op in (a, b):
        m = op.matrix
        if np.max(np.abs(m + m.conj().T)) > 1e-10:
            raise NotAntiHermitianError("inputs must be anti-Hermitian")
    if a.dim != b.dim:
        raise DimMismatchError("dims differ")
    herm = 1j * a.matrix
    a_eig = np.linalg.eigh(herm)
    # eigh of iA gives e^(A g) = V diag(e^(-i w g)) V^H
    b_norm = spectral_norm(b)
    approx = _expm_anti_hermitian(a.matrix)
    for l in range(1, p):
        tol = 1e-10 * max(b_norm**l / math.factorial(l), 1e-300)
        prev = None
        for order in range(6, 31, 4):
            cur = _simplex_integral(a_eig, b.matrix, l, order)
            if prev is not None and spectral_norm(cur - prev) <= tol:
                break
            prev = cur
        approx = approx + cur
    remainder = b_norm**p / math.factorial(p)
    return DenseOperator(approx), float(remainder)
