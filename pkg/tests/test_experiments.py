import json
import math

import numpy as np
import pytest

import mpf_lab.experiments as experiments
from mpf_lab.commutators import build_table, convergence_radius
from mpf_lab.experiments import (
    DegenerateGridError,
    InfeasibleError,
    PremiseViolatedError,
    ScalingResult,
    convergence_study,
    default_dt_grid,
    error_bound_evaluate,
    exact_evolution,
    heisenberg_benchmark,
    report_emit,
)
from mpf_lab.hamiltonians import heisenberg_1d
from mpf_lab.mpf import mpf_evolve, power_schedule, query_count, solve_order_condition
from mpf_lab.operators import spectral_norm

GRID = (0.2, 0.1, 0.05, 0.025)


def _scheme(m, base_order=2):
    return solve_order_condition(power_schedule(m, base_order=base_order), m, base_order=base_order)


class TestExactEvolution:
    def test_zero_time_is_identity(self, heis3):
        assert spectral_norm(exact_evolution(heis3, 0.0).matrix - np.eye(8)) <= 1e-14

    def test_single_qubit_z_quarter_turn(self, xz1):
        from mpf_lab.hamiltonians import HamiltonianSum, PauliTerm

        hz = HamiltonianSum(1, (PauliTerm(1, 1.0, {0: "Z"}),), grouping=((0,),))
        got = exact_evolution(hz, math.pi / 2).matrix
        assert np.allclose(got, np.diag([-1j, 1j]), atol=1e-12)

    def test_group_property(self, heis3):
        prod = exact_evolution(heis3, 0.3).matrix @ exact_evolution(heis3, 0.45).matrix
        assert spectral_norm(prod - exact_evolution(heis3, 0.75).matrix) <= 1e-9

    def test_unitary(self, heis3):
        u = exact_evolution(heis3, 1.7).matrix
        assert spectral_norm(u @ u.conj().T - np.eye(8)) <= 1e-12


class TestConvergenceStudy:
    @pytest.mark.parametrize(
        "evolver, kwargs, order",
        [
            ("u1", {}, 2.0),
            ("u2", {}, 3.0),
            ("u2p", {"p": 2}, 5.0),
        ],
    )
    def test_product_formula_slopes(self, heis3, evolver, kwargs, order):
        study = convergence_study(heis3, evolver, dt_grid=GRID, **kwargs)
        assert study.fitted_slope == pytest.approx(order, abs=0.2)
        assert study.r_squared > 0.999
        assert not study.exact
        assert study.dt_grid == GRID and len(study.errors) == 4

    def test_mpf_slope(self, heis3):
        study = convergence_study(heis3, "mpf", dt_grid=GRID, scheme=_scheme(2))
        assert study.fitted_slope == pytest.approx(5.0, abs=0.3)

    def test_commuting_model_is_exact(self, commuting3):
        study = convergence_study(commuting3, "u2", dt_grid=GRID)
        assert study.exact
        assert study.fitted_slope == 0.0 and study.r_squared == 0.0
        assert max(study.errors) <= 1e-10

    def test_grid_validation(self, heis3):
        with pytest.raises(DegenerateGridError):
            convergence_study(heis3, "u2", dt_grid=(0.2, 0.1, 0.05))
        with pytest.raises(DegenerateGridError):
            convergence_study(heis3, "u2", dt_grid=(0.2, 0.2, 0.1, 0.05))
        with pytest.raises(DegenerateGridError):
            convergence_study(heis3, "u2", dt_grid=(0.2, 0.1, 0.05, -0.025))

    def test_evolver_validation(self, heis3):
        with pytest.raises(ValueError):
            convergence_study(heis3, "u2p", dt_grid=GRID)
        with pytest.raises(ValueError):
            convergence_study(heis3, "mpf", dt_grid=GRID)
        with pytest.raises(ValueError):
            convergence_study(heis3, "u3", dt_grid=GRID)

    def test_default_grid(self, heis3):
        grid = default_dt_grid(heis3)
        assert len(grid) == 6
        ratios = [a / b for a, b in zip(grid, grid[1:])]
        assert ratios == pytest.approx([2.0] * 5)
        study = convergence_study(heis3, "u2", dt_grid=grid)
        assert study.errors[0] < 0.1

    def test_default_grid_validation(self, heis3):
        with pytest.raises(DegenerateGridError):
            default_dt_grid(heis3, points=3)
        with pytest.raises(DegenerateGridError):
            default_dt_grid(heis3, ratio=1.0)
        with pytest.raises(DegenerateGridError):
            default_dt_grid(heis3, start=0.0)


class TestErrorBound:
    @pytest.mark.parametrize("m", [1, 2])
    @pytest.mark.parametrize("delta", [0.1, 0.05, 0.025])
    def test_bound_dominates_measurement(self, heis3, m, delta):
        table = build_table(heis3, 15)
        budget, measured = error_bound_evaluate(heis3, delta, _scheme(m), table, j_cap=2 * m + 8)
        assert measured <= budget.thm_bound + 1e-10
        assert budget.tail_clear
        assert budget.truncation_depth == 2 * m + 8

    @pytest.mark.parametrize("m", [1, 2])
    def test_bound_halving_rate(self, heis3, m):
        table = build_table(heis3, 15)
        bounds = [
            error_bound_evaluate(heis3, d, _scheme(m), table, j_cap=2 * m + 8)[0].thm_bound
            for d in (0.1, 0.05, 0.025)
        ]
        # leading term scales as delta^(2m+1)
        for big, small in zip(bounds, bounds[1:]):
            assert big / small >= 2.0 ** (2 * m + 1 - 0.2)

    @pytest.mark.parametrize("m", [1, 2])
    def test_bound_decomposition_identity(self, heis3, m):
        table = build_table(heis3, 15)
        budget, _ = error_bound_evaluate(heis3, 0.05, _scheme(m), table, j_cap=2 * m + 8)
        scheme = _scheme(m)
        parts = sum(budget.e_tilde_bounds.values()) + budget.f_tilde_bound
        assert budget.thm_bound == pytest.approx(scheme.a_norm * parts, rel=1e-12)
        if m == 1:
            # no correction terms below the remainder at half-order one
            assert set(budget.e_tilde_bounds.values()) == {0.0}
        else:
            assert all(v > 0 for v in budget.e_tilde_bounds.values())

    def test_commuting_bound_is_zero(self, commuting3):
        table = build_table(commuting3, 15)
        budget, measured = error_bound_evaluate(commuting3, 0.3, _scheme(2), table)
        assert budget.thm_bound == 0.0
        assert measured <= 1e-10
        assert budget.tail_clear

    def test_premise_violation(self, heis3):
        table = build_table(heis3, 15)
        with pytest.raises(PremiseViolatedError):
            error_bound_evaluate(heis3, 0.2, _scheme(1), table)

    def test_tail_flag_clears_only_inside_radius(self, xz1):
        table = build_table(xz1, 15)
        radius = convergence_radius(table)
        budget, _ = error_bound_evaluate(xz1, radius, _scheme(1), table, j_cap=10)
        assert not budget.tail_clear
        budget, _ = error_bound_evaluate(xz1, 0.9 * radius, _scheme(1), table, j_cap=10)
        assert budget.tail_clear

    def test_input_validation(self, heis3):
        table = build_table(heis3, 15)
        with pytest.raises(ValueError):
            error_bound_evaluate(heis3, 0.05, _scheme(2, base_order=1), table)
        with pytest.raises(ValueError):
            error_bound_evaluate(heis3, -0.1, _scheme(1), table)
        with pytest.raises(ValueError):
            error_bound_evaluate(heis3, 0.05, _scheme(2), table, j_cap=2)


@pytest.fixture(scope="module")
def small_run():
    return heisenberg_benchmark((3, 4, 5), (1, 2), eps=0.05)


class TestBenchmark:
    def test_cells_meet_target(self, small_run):
        for res in small_run:
            for cell in res.cells:
                assert cell.error <= 0.05
                assert cell.monotone

    def test_r_is_minimal(self, small_run):
        cell = small_run[0].cells[0]
        h = heisenberg_1d(cell.n, periodic=True)
        target = exact_evolution(h, float(cell.n)).matrix
        scheme = _scheme(cell.m)

        def err(r):
            return spectral_norm(mpf_evolve(h, float(cell.n), r, scheme).matrix - target)

        assert err(cell.r) <= 0.05
        assert cell.r == 1 or err(cell.r - 1) > 0.05

    def test_query_accounting(self, small_run):
        for res in small_run:
            scheme = _scheme(res.m)
            for cell in res.cells:
                assert cell.queries == query_count(cell.r, scheme)
                assert cell.queries == cell.r * scheme.k_norm
                assert cell.queries_amplified == cell.queries * math.ceil(scheme.a_norm)

    def test_theory_exponents_and_fit(self, small_run):
        assert [res.theory_exponent for res in small_run] == pytest.approx([2.0, 5.0 / 3.0])
        for res in small_run:
            assert math.isfinite(res.fitted_exponent)
            assert res.query_counts == tuple(c.queries for c in res.cells)

    def test_n_list_normalized(self):
        res = heisenberg_benchmark((4, 3, 5, 3), (1,), eps=0.3)
        assert res[0].n_values == (3, 4, 5)

    def test_validation(self):
        with pytest.raises(ValueError):
            heisenberg_benchmark((3, 4), (1,), eps=0.05)
        with pytest.raises(ValueError):
            heisenberg_benchmark((3, 4, 5), (1,), eps=1.5)
        with pytest.raises(ValueError):
            heisenberg_benchmark((3, 4, 5), (1,), eps=0.05, t_rule="T=n^2")

    def test_infeasible_search_cap(self, monkeypatch):
        monkeypatch.setattr(experiments, "R_CAP", 4)
        with pytest.raises(InfeasibleError):
            heisenberg_benchmark((3, 4, 5), (1,), eps=1e-6)

    def test_scaling_result_validation(self):
        with pytest.raises(ValueError):
            ScalingResult(1, (3, 4), (1.0, 2.0), 2.0, 2.0, ())
        with pytest.raises(ValueError):
            ScalingResult(1, (3, 4, 5), (1.0, 2.0, 3.0), float("nan"), 2.0, ())


class TestReport:
    def test_empty_csv_is_header_only(self):
        assert report_emit([]) == "n,m,r,queries,queries_amplified,error\n"

    def test_csv_rows(self):
        results = heisenberg_benchmark((3, 4, 5), (1,), eps=0.3)
        text = report_emit(results, "csv")
        lines = text.strip().split("\n")
        assert lines[0] == "n,m,r,queries,queries_amplified,error"
        assert len(lines) == 1 + 3
        first = lines[1].split(",")
        assert first[0] == "3" and first[1] == "1"

    def test_json_round_trip(self):
        results = heisenberg_benchmark((3, 4, 5), (1,), eps=0.3)
        payload = json.loads(report_emit(results, "json"))
        assert payload[0]["m"] == 1
        assert payload[0]["n_values"] == [3, 4, 5]
        assert [c["r"] for c in payload[0]["cells"]] == [c.r for c in results[0].cells]

    def test_unknown_format(self):
        with pytest.raises(ValueError):
            report_emit([], fmt="yaml")
