"""Benchmark Hamiltonian families as explicit ordered term lists.

Builders produce sums of single Pauli-string terms with deterministic term
order (product-formula output depends on it). Terms may also be arbitrary
Hermitian matrices so the expansion machinery can be exercised on generic
generators.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import pauli
from .operators import DenseOperator

__all__ = [
    "HamiltonianSum",
    "NoGroupingError",
    "NotLatticeError",
    "PauliTerm",
    "TooSmallError",
    "from_model_json",
    "heisenberg_1d",
    "induced_one_norm",
    "one_norm",
    "power_law_lattice",
    "to_model_json",
]


class TooSmallError(ValueError):
    """System size below the builder's minimum."""


class NotLatticeError(ValueError):
    """Site count is not a perfect d-th power."""


class NoGroupingError(ValueError):
    """Induced norm requested without grouping labels."""


@dataclass(frozen=True)
class PauliTerm:
    """coefficient * (Pauli string), identity on unlisted sites."""

    n_qubits: int
    coefficient: float
    paulis: dict[int, str]

    def __post_init__(self) -> None:
        if not np.isfinite(self.coefficient):
            raise ValueError("coefficient must be finite")
        for site, letter in self.paulis.items():
            if not 0 <= site < self.n_qubits:
                raise ValueError(f"site {site} outside [0, {self.n_qubits})")
            if letter not in ("X", "Y", "Z"):
                raise ValueError(f"unknown Pauli letter {letter!r}")
        object.__setattr__(self, "paulis", dict(self.paulis))

    @property
    def norm(self) -> float:
        """Spectral norm; Pauli strings are unitary so it is |coefficient|."""
        return abs(self.coefficient)

    def masks(self) -> tuple[int, int]:
        return pauli.masks_from_sites(self.paulis)

    def dense(self) -> np.ndarray:
        x, z = self.masks()
        return self.coefficient * pauli.dense_string(x, z, self.n_qubits)


@dataclass(frozen=True)
class HamiltonianSum:
    """Ordered sum H = sum_gamma H_gamma on an n-qubit space.

    ``grouping`` holds one label tuple per term (site multi-indices) and is
    what the induced 1-norm is computed from.
    """

    n_qubits: int
    terms: tuple
    grouping: tuple | None = None
    _dense_cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self) -> None:
        if len(self.terms) < 1:
            raise ValueError("need at least one term")
        if self.grouping is not None and len(self.grouping) != len(self.terms):
            raise ValueError("grouping length must match term count")
        object.__setattr__(self, "terms", tuple(self.terms))
        if self.grouping is not None:
            object.__setattr__(
                self, "grouping", tuple(tuple(g) for g in self.grouping)
            )

    @property
    def gamma(self) -> int:
        """Number of terms."""
        return len(self.terms)

    @property
    def dim(self) -> int:
        return 2**self.n_qubits

    def is_pauli(self) -> bool:
        return all(isinstance(t, PauliTerm) for t in self.terms)

    def term_matrices(self) -> list[np.ndarray]:
        """Dense matrices of the terms, built once and cached."""
        if "terms" not in self._dense_cache:
            mats = []
            for t in self.terms:
                mats.append(t.dense() if isinstance(t, PauliTerm) else t.matrix)
            self._dense_cache["terms"] = mats
        return self._dense_cache["terms"]

    def dense(self) -> np.ndarray:
        """Dense matrix of the full sum."""
        if "sum" not in self._dense_cache:
            self._dense_cache["sum"] = sum(self.term_matrices())
        return self._dense_cache["sum"]


def heisenberg_1d(n: int, periodic: bool = True) -> HamiltonianSum:
    """1-D Heisenberg chain: XX + YY + ZZ on every bond, unit couplings.

    Bonds run j = 0..n-1 (periodic, indices mod n) or j = 0..n-2 (open);
    term order is by bond then X, Y, Z. Periodic n=2 keeps both bond copies
    as written, so the 1-norm is exactly 3n either way.

    Raises:
        TooSmallError: For n < 2.
    """
    if n < 2:
        raise TooSmallError("Heisenberg chain needs n >= 2")
    bonds = range(n) if periodic else range(n - 1)
    terms = []
    labels = []
    for j in bonds:
        a, b = j, (j + 1) % n
        for letter in "XYZ":
            terms.append(PauliTerm(n, 1.0, {a: letter, b: letter}))
            labels.append((a, b))
    return HamiltonianSum(n, tuple(terms), tuple(labels))


def power_law_lattice(n: int, d: int, alpha: float, seed: int = 0) -> HamiltonianSum:
    """Two-site couplings decaying as distance^-alpha on a d-dim square lattice.

    Every term norm saturates the defining bound exactly: single-site terms
    have coefficient 1, the pair (i, j) term has coefficient
    ||i - j||_2^-alpha. Pauli letters are drawn deterministically from the
    seed; only the norms carry meaning.

    Raises:
        NotLatticeError: If n is not a perfect d-th power.
    """
    if d < 1 or alpha < 0:
        raise NotLatticeError("need d >= 1 and alpha >= 0")
    side = round(n ** (1.0 / d))
    if side**d != n:
        raise NotLatticeError(f"{n} is not a perfect {d}-th power")
    coords = [
        tuple((s // side**axis) % side for axis in range(d)) for s in range(n)
    ]
    rng = np.random.default_rng(seed)
    letters = "XYZ"
    terms = []
    labels = []
    for i in range(n):
        terms.append(PauliTerm(n, 1.0, {i: letters[rng.integers(3)]}))
        labels.append((i,))
    for i in range(n):
        for j in range(i + 1, n):
            dist = float(
                np.sqrt(sum((a - b) ** 2 for a, b in zip(coords[i], coords[j])))
            )
            coeff = dist ** (-alpha) if alpha > 0 else 1.0
            terms.append(
                PauliTerm(
                    n,
                    coeff,
                    {i: letters[rng.integers(3)], j: letters[rng.integers(3)]},
                )
            )
            labels.append((i, j))
    return HamiltonianSum(n, tuple(terms), tuple(labels))


def _term_norm(term) -> float:
    if isinstance(term, PauliTerm):
        return term.norm
    return float(np.linalg.svd(term.matrix, compute_uv=False)[0])


def one_norm(h: HamiltonianSum) -> float:
    """Sum of per-term spectral norms."""
    return float(sum(_term_norm(t) for t in h.terms))


def induced_one_norm(h: HamiltonianSum) -> float:
    """Max over site values of the summed norms of terms touching that site.

    Terms count when their grouping label contains the site, so unordered
    bond labels behave as expected (each Heisenberg site is touched by six
    unit terms). Always bounded by :func:`one_norm`.

    Raises:
        NoGroupingError: If the sum carries no grouping labels.
    """
    if h.grouping is None:
        raise NoGroupingError("induced norm needs grouping labels")
    per_site: dict = {}
    for label, term in zip(h.grouping, h.terms):
        norm = _term_norm(term)
        for value in set(label):
            per_site[value] = per_site.get(value, 0.0) + norm
    return float(max(per_site.values()))


def to_model_json(h: HamiltonianSum, meta: dict | None = None) -> str:
    """Serialize as a model descriptor; round-trips losslessly."""
    body: dict = {"model": "custom", "n": h.n_qubits}
    if meta:
        body.update(meta)
    body["terms"] = [
        {
            "n_qubits": t.n_qubits,
            "coefficient": t.coefficient,
            "paulis": {str(k): v for k, v in sorted(t.paulis.items())},
        }
        for t in h.terms
    ]
    if h.grouping is not None:
        body["grouping"] = [list(g) for g in h.grouping]
    return json.dumps(body, indent=2, sort_keys=True)


def from_model_json(text: str) -> HamiltonianSum:
    """Build a HamiltonianSum from a model descriptor.

    Named models (``heisenberg1d``, ``power_law``) are rebuilt from their
    parameters; ``custom`` models carry explicit terms.
    """
    body = json.loads(text)
    kind = body.get("model", "custom")
    if kind == "heisenberg1d":
        return heisenberg_1d(int(body["n"]), bool(body.get("periodic", True)))
    if kind == "power_law":
        return power_law_lattice(
            int(body["n"]),
            int(body.get("d", 1)),
            float(body.get("alpha", 0.0)),
            int(body.get("seed", 0)),
        )
    if kind != "custom":
        raise ValueError(f"unknown model kind {kind!r}")
    terms = tuple(
        PauliTerm(
            int(spec["n_qubits"]),
            float(spec["coefficient"]),
            {int(k): str(v) for k, v in spec["paulis"].items()},
        )
        for spec in body["terms"]
    )
    grouping = None
    if "grouping" in body:
        grouping = tuple(tuple(g) for g in body["grouping"])
    return HamiltonianSum(int(body["n"]), terms, grouping)
