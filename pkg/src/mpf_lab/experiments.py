"""Convergence studies, error-bound evaluation, and the spin-chain
scaling benchmark.

The benchmark measures, for each chain length, the minimal segment count r
for which the powered multi-product step meets the target accuracy over
total time T = n, then fits the query count r * ||k||_1 against n on a
log-log scale. Bounds are evaluated from a commutator table truncated at a
depth cap; a tail flag says whether the truncated series was still falling
at the cap.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from .bch import ErrorBudget
from .commutators import (
    CommutatorTable,
    build_table,
    composition_sum,
    convergence_radius,
    mu_m,
)
from .formulas import suzuki_u2p, trotter_u1, trotter_u2
from .hamiltonians import HamiltonianSum, heisenberg_1d
from .mpf import MpfScheme, mpf_operator, power_schedule, query_count, solve_order_condition
from .operators import DenseOperator, spectral_norm

__all__ = [
    "BenchmarkCell",
    "ConvergenceStudy",
    "DegenerateGridError",
    "InfeasibleError",
    "PremiseViolatedError",
    "ScalingResult",
    "convergence_study",
    "default_dt_grid",
    "error_bound_evaluate",
    "exact_evolution",
    "heisenberg_benchmark",
    "report_emit",
]

NOISE_FLOOR = 1e-11  # 10x the 1e-12 working-precision floor
R_CAP = 10**6


class DegenerateGridError(ValueError):
    """Step grid unusable for a slope fit."""


class PremiseViolatedError(ValueError):
    """Step size outside the heuristic convergence radius."""


class InfeasibleError(RuntimeError):
    """Segment count exceeded the search cap."""


@dataclass(frozen=True)
class ConvergenceStudy:
    """Log-log order fit of one-step errors on a decreasing step grid.

    exact marks studies where every error sat at the noise floor (commuting
    models); slope and r_squared are zeroed there.
    """

    dt_grid: tuple
    errors: tuple
    fitted_slope: float
    r_squared: float
    exact: bool


@dataclass(frozen=True)
class BenchmarkCell:
    """One (n, m) benchmark measurement."""

    n: int
    m: int
    r: int
    queries: float
    queries_amplified: float
    error: float
    monotone: bool


@dataclass(frozen=True)
class ScalingResult:
    """Query-count scaling fit for one m across chain lengths."""

    m: int
    n_values: tuple
    query_counts: tuple
    fitted_exponent: float
    theory_exponent: float
    cells: tuple

    def __post_init__(self) -> None:
        if len(self.n_values) < 3:
            raise ValueError("need at least 3 chain lengths for a fit")
        if not math.isfinite(self.fitted_exponent):
            raise ValueError("fitted exponent must be finite")


def exact_evolution(h: HamiltonianSum, t: float) -> DenseOperator:
    """exp(-iHt) by Hermitian eigendecomposition, cached per Hamiltonian."""
    key = ("exact_eig",)
    if key not in h._dense_cache:
        h._dense_cache[key] = np.linalg.eigh(h.dense())
    w, v = h._dense_cache[key]
    mat = (v * np.exp(-1j * t * w)) @ v.conj().T
    return DenseOperator(mat, hint="unitary")


def _one_step(h: HamiltonianSum, dt: float, evolver: str, p, scheme) -> DenseOperator:
    if evolver == "u1":
        return trotter_u1(h, dt)
    if evolver == "u2":
        return trotter_u2(h, dt)
    if evolver == "u2p":
        if p is None:
            raise ValueError("u2p evolver needs p")
        return suzuki_u2p(h, dt, int(p))
    if evolver == "mpf":
        if scheme is None:
            raise ValueError("mpf evolver needs a scheme")
        return mpf_operator(h, dt, scheme)
    raise ValueError(f"unknown evolver {evolver!r}")


def _loglog_fit(xs, ys):
    lx = np.log(np.asarray(xs, dtype=float))
    ly = np.log(np.asarray(ys, dtype=float))
    slope, intercept = np.polyfit(lx, ly, 1)
    fitted = slope * lx + intercept
    ss_res = float(np.sum((ly - fitted) ** 2))
    ss_tot = float(np.sum((ly - np.mean(ly)) ** 2))
    r_squared = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return float(slope), r_squared


def default_dt_grid(
    h: HamiltonianSum,
    evolver: str = "u2",
    p=None,
    scheme=None,
    points: int = 6,
    ratio: float = 2.0,
    start: float = 0.8,
) -> tuple:
    """Geometric grid whose top step is shrunk until its error drops
    below 0.1."""
    if points < 4 or ratio <= 1.0 or start <= 0.0:
        raise DegenerateGridError("need points >= 4, ratio > 1, start > 0")
    top = start
    for _ in range(60):
        err = spectral_norm(
            _one_step(h, top, evolver, p, scheme).matrix
            - exact_evolution(h, top).matrix
        )
        if err < 0.1:
            break
        top /= 2.0
    return tuple(top * ratio**-i for i in range(points))


def convergence_study(
    h: HamiltonianSum,
    evolver: str,
    dt_grid=None,
    p=None,
    scheme: MpfScheme | None = None,
) -> ConvergenceStudy:
    """One-step error order fit for a product formula or MPF evolver.

    Points at the noise floor are dropped from the fit; a study whose
    points all sit there is returned with the exact flag instead.
    """
    if dt_grid is None:
        dt_grid = default_dt_grid(h, evolver, p, scheme)
    grid = tuple(float(dt) for dt in dt_grid)
    if len(grid) < 4:
        raise DegenerateGridError("need at least 4 grid points")
    if any(dt <= 0 for dt in grid) or any(
        a <= b for a, b in zip(grid, grid[1:])
    ):
        raise DegenerateGridError("grid must be positive, strictly decreasing")
    errors = []
    for dt in grid:
        step = _one_step(h, dt, evolver, p, scheme)
        errors.append(
            float(spectral_norm(step.matrix - exact_evolution(h, dt).matrix))
        )
    usable = [(dt, e) for dt, e in zip(grid, errors) if e > NOISE_FLOOR]
    if not usable:
        return ConvergenceStudy(grid, tuple(errors), 0.0, 0.0, True)
    if len(usable) < 2:
        raise DegenerateGridError("only one grid point above the noise floor")
    slope, r_squared = _loglog_fit([u[0] for u in usable], [u[1] for u in usable])
    return ConvergenceStudy(grid, tuple(errors), slope, r_squared, False)


def error_bound_evaluate(
    h: HamiltonianSum,
    delta: float,
    scheme: MpfScheme,
    table: CommutatorTable,
    j_cap: int | None = None,
):
    """Truncated error bound for a second-order-based MPF step, next to the
    measured error.

    Returns (ErrorBudget, measured). The bound is the coefficient 1-norm
    times sum over even j in [2m, j_cap], l in [1, m] of
    delta^(j+l)/l! * composition_sum(j, l); per-j contributions also split
    into the correction-term bounds (l < m) and the remainder bound (l = m).
    tail_clear certifies the neglected tail is summable: either the last
    j slice already decreased, or delta sits strictly inside the radius
    estimate, making the slice ratio geometric below one (the composition
    count adds only a polynomial factor). The truncated sum lower-bounds
    the full series, so dominance checks stay sound either way. Requires
    delta inside the heuristic convergence radius.
    """
    if scheme.base_order != 2:
        raise ValueError("bound is stated for the second-order base")
    if delta <= 0:
        raise ValueError("delta must be positive")
    m = scheme.half_order
    if j_cap is None:
        j_cap = 2 * m + 8
    if j_cap < 2 * m:
        raise ValueError("j_cap must be >= 2m")
    table.require(j_cap + 1)
    radius = convergence_radius(table)
    if delta > radius:
        raise PremiseViolatedError(
            f"delta = {delta} exceeds heuristic radius {radius:.6g}"
        )
    e_tilde = {}
    slice_totals = []
    thm_sum = 0.0
    for j in range(2 * m, j_cap + 1, 2):
        corrections = 0.0
        for l in range(1, min(j // 2, m - 1) + 1):
            corrections += (
                delta ** (l - 1) / math.factorial(l) * composition_sum(table, j, l)
            )
        e_tilde[j] = delta ** (j + 1) * corrections
        slice_total = 0.0
        for l in range(1, m + 1):
            slice_total += (
                delta ** (j + l)
                / math.factorial(l)
                * composition_sum(table, j, l)
            )
        slice_totals.append(slice_total)
        thm_sum += slice_total
    f_tilde = (delta ** (3 * m) / math.factorial(m)) * sum(
        delta ** (j - 2 * m) * composition_sum(table, j, m)
        for j in range(2 * m, j_cap + 1, 2)
    )
    trend_clear = len(slice_totals) >= 2 and slice_totals[-1] <= slice_totals[-2]
    tail_clear = trend_clear or delta < radius
    budget = ErrorBudget(
        e_tilde_bounds=e_tilde,
        f_tilde_bound=f_tilde,
        thm_bound=scheme.a_norm * thm_sum,
        truncation_depth=j_cap,
        tail_clear=tail_clear,
    )
    u_mp = mpf_operator(h, delta, scheme)
    measured = float(
        spectral_norm(u_mp.matrix - exact_evolution(h, delta).matrix)
    )
    return budget, measured


def _powered_error(
    h: HamiltonianSum, big_t: float, r: int, scheme: MpfScheme, target: np.ndarray
) -> float:
    step = mpf_operator(h, big_t / r, scheme)
    return float(spectral_norm(np.linalg.matrix_power(step.matrix, r) - target))


def _minimal_r(
    h: HamiltonianSum,
    big_t: float,
    eps: float,
    scheme: MpfScheme,
    target: np.ndarray,
    r_hint: int,
) -> tuple:
    """Smallest r with powered-step error <= eps, by doubling then
    bisection; returns (r, error, evaluations dict)."""
    evals: dict = {}

    def err(r: int) -> float:
        if r not in evals:
            evals[r] = _powered_error(h, big_t, r, scheme, target)
        return evals[r]

    hi = max(1, min(r_hint, R_CAP))
    while err(hi) > eps:
        if hi >= R_CAP:
            raise InfeasibleError(f"no r <= {R_CAP} reaches eps = {eps}")
        hi = min(hi * 2, R_CAP)
    lo = 0
    while hi - lo > 1:
        mid = (hi + lo) // 2
        if err(mid) <= eps:
            hi = mid
        else:
            lo = mid
    return hi, err(hi), evals


def _monotone(evals: dict) -> bool:
    pts = sorted(evals.items())
    for (_, e1), (_, e2) in zip(pts, pts[1:]):
        if e1 > 1e-13 and e2 > 1e-13 and e2 > e1 * (1.0 + 1e-6):
            return False
    return True


def heisenberg_benchmark(
    n_list,
    m_list,
    eps: float,
    t_rule: str = "T=n",
    periodic: bool = True,
) -> list:
    """Minimal-segment query counts for periodic spin chains, fitted
    against chain length per m.

    The bracket seed is ceil(mu_hat * T) from a shallow exact commutator
    table. A non-monotone error profile over the evaluated points flags the
    cell and the search is retried once with a widened bracket.
    """
    if t_rule != "T=n":
        raise ValueError("only the T=n rule is implemented")
    n_values = sorted(set(int(n) for n in n_list))
    if len(n_values) < 3:
        raise ValueError("need at least 3 chain lengths")
    if not 0 < eps < 1:
        raise ValueError("eps must be in (0,1)")
    results = []
    for m in sorted(set(int(m) for m in m_list)):
        scheme = solve_order_condition(power_schedule(m), m)
        cells = []
        for n in n_values:
            h = heisenberg_1d(n, periodic=periodic)
            big_t = float(n)
            target = exact_evolution(h, big_t).matrix
            table = build_table(h, 2 * m + 3, budget=10**8)
            hint = mu_m(table, m, j_cap=2 * m + 2).mu_m
            r_hint = max(1, math.ceil(hint * big_t)) if hint > 0 else 1
            r, error, evals = _minimal_r(h, big_t, eps, scheme, target, r_hint)
            monotone = _monotone(evals)
            if not monotone:
                r2, error2, evals2 = _minimal_r(
                    h, big_t, eps, scheme, target, min(r * 4, R_CAP)
                )
                if r2 < r:
                    r, error = r2, error2
                monotone = _monotone(evals2)
            cells.append(
                BenchmarkCell(
                    n=n,
                    m=m,
                    r=r,
                    queries=float(query_count(r, scheme)),
                    queries_amplified=float(query_count(r, scheme, True)),
                    error=error,
                    monotone=monotone,
                )
            )
        exponent, _ = _loglog_fit(n_values, [c.queries for c in cells])
        results.append(
            ScalingResult(
                m=m,
                n_values=tuple(n_values),
                query_counts=tuple(c.queries for c in cells),
                fitted_exponent=exponent,
                theory_exponent=4.0 / 3.0 + 2.0 / (3.0 * m),
                cells=tuple(cells),
            )
        )
    return results


CSV_HEADER = "n,m,r,queries,queries_amplified,error"


def report_emit(results, fmt: str = "csv") -> str:
    """Serialize benchmark results; csv rows are per (n, m) cell in scan
    order, json mirrors the result records."""
    if fmt == "csv":
        lines = [CSV_HEADER]
        for res in results:
            for c in res.cells:
                lines.append(
                    f"{c.n},{c.m},{c.r},{c.queries!r},"
                    f"{c.queries_amplified!r},{c.error!r}"
                )
        return "\n".join(lines) + "\n"
    if fmt == "json":
        payload = [asdict(res) for res in results]
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"
    raise ValueError(f"unknown format {fmt!r}")
