"""Error measures, convergence tables, stability probe, and the decay diagnostic."""

import math

import numpy as np
import pytest

from fkramers import (
    Basis,
    ConvergenceTable,
    DGField,
    MeshMismatch,
    PreconditionError,
    ProblemSpec,
    build_mesh,
    get_problem,
    l2_error,
    modal_project,
    nodal_reconstruction_error,
    nodal_values,
    rates_from_errors,
    regularity_diagnostic,
    spatial_study,
    stability_probe,
    temporal_study,
)
from fkramers.study import trajectory_growth


def projected(fn, n, k, q=None):
    mesh = build_mesh(n)
    basis = Basis(k)
    return DGField(mesh, basis, modal_project(fn, mesh, basis, q or k + 3))


class TestRates:
    def test_halving_arithmetic(self):
        assert rates_from_errors((10, 20), (4.0, 1.0)) == (pytest.approx(2.0, abs=1e-14),)

    def test_nonuniform_resolutions(self):
        # error ~ 1/N gives rate exactly one on a 4 -> 12 step
        assert rates_from_errors((4, 12), (3.0, 1.0))[0] == pytest.approx(1.0, abs=1e-14)

    def test_reproduces_tabulated_rate(self):
        # rounded stored errors reproduce the tabulated rate to table precision
        rate = rates_from_errors((4, 8), (1.032e-01, 2.625e-02))[0]
        assert rate == pytest.approx(1.9755, abs=2e-3)


class TestL2Error:
    def test_identical_fields(self):
        fld = projected(lambda x, v: np.cos(x) * v, 3, 2)
        assert l2_error(fld, fld) == 0.0

    def test_distance_to_callable(self):
        # || sin(pi x) sin(pi v) || = 1/2 over the unit square
        zero = DGField.zeros(build_mesh(8), Basis(2))
        err = l2_error(zero, lambda x, v: np.sin(np.pi * x) * np.sin(np.pi * v))
        assert err == pytest.approx(0.5, abs=1e-10)

    def test_time_argument_passthrough(self):
        zero = DGField.zeros(build_mesh(8), Basis(2))
        fn = lambda x, v, t: t * np.sin(np.pi * x) * np.sin(np.pi * v)
        assert l2_error(zero, fn, t=2.0) == pytest.approx(1.0, abs=1e-9)

    def test_mismatched_fields_rejected(self):
        with pytest.raises(MeshMismatch):
            l2_error(DGField.zeros(build_mesh(2), Basis(1)), DGField.zeros(build_mesh(3), Basis(1)))

    def test_field_distance_is_exact(self):
        a = projected(lambda x, v: x + v, 2, 1)
        b = DGField(a.mesh, a.basis, a.coeffs * 2.0)
        assert l2_error(a, b) == pytest.approx(float(np.linalg.norm(a.coeffs)), rel=1e-14)


class TestNodalValues:
    def test_one_sided_constant(self):
        fld = projected(lambda x, v: 1.0 + 0.0 * x * v, 2, 1)
        vals = nodal_values(fld, "one_sided")
        assert vals.shape == (3, 3)
        assert np.max(np.abs(vals - 1.0)) <= 1e-13

    def test_average_clamps_boundary(self):
        fld = projected(lambda x, v: 1.0 + 0.0 * x * v, 2, 1)
        vals = nodal_values(fld, "average", boundary_value=0.0)
        assert np.max(np.abs(vals[1:-1, 1:-1] - 1.0)) <= 1e-13
        assert np.all(vals[0, :] == 0.0) and np.all(vals[-1, :] == 0.0)
        assert np.all(vals[:, 0] == 0.0) and np.all(vals[:, -1] == 0.0)

    def test_one_sided_takes_ascending_last_trace(self):
        # per-cell constants: the shared interior node keeps the trace of the
        # cell later in the scan (larger x index here)
        mesh = build_mesh(2)
        basis = Basis(1)
        coeffs = np.zeros((2, 2, 2, 2))
        coeffs[0, :, 0, 0] = 1.0 * mesh.h  # left column: constant 1
        coeffs[1, :, 0, 0] = 3.0 * mesh.h  # right column: constant 3
        fld = DGField(mesh, basis, coeffs)
        vals = nodal_values(fld, "one_sided")
        assert vals[0, 1] == pytest.approx(1.0, rel=1e-13)
        assert vals[1, 1] == pytest.approx(3.0, rel=1e-13)  # overwritten by right cell

    def test_average_averages_interior_traces(self):
        mesh = build_mesh(2)
        coeffs = np.zeros((2, 2, 2, 2))
        coeffs[0, :, 0, 0] = 1.0 * mesh.h
        coeffs[1, :, 0, 0] = 3.0 * mesh.h
        fld = DGField(mesh, Basis(1), coeffs)
        vals = nodal_values(fld, "average")
        assert vals[1, 1] == pytest.approx(2.0, rel=1e-13)  # mean of 1 and 3

    def test_unknown_mode_rejected(self):
        fld = DGField.zeros(build_mesh(2), Basis(1))
        with pytest.raises(PreconditionError):
            nodal_values(fld, "upwind")


class TestNodalReconstructionError:
    def test_exact_for_continuous_bilinear(self):
        # piecewise-bilinear, continuous, zero on the boundary: the averaged
        # and clamped degree-1 reconstruction reproduces it exactly
        hat = lambda s: 1.0 - np.abs(2.0 * s - 1.0)
        fn = lambda x, v: hat(x) * hat(v)
        fld = projected(fn, 2, 1, q=3)
        assert nodal_reconstruction_error(fld, fn) <= 1e-13

    def test_exact_for_degree_two_field(self):
        fn = lambda x, v: x * (1.0 - x) * v * (1.0 - v)
        fld = projected(fn, 3, 2)
        assert nodal_reconstruction_error(fld, fn) <= 1e-13

    def test_time_argument(self):
        fn = lambda x, v, t: t * x * (1.0 - x) * v * (1.0 - v)
        fld = projected(lambda x, v: fn(x, v, 2.0), 3, 2)
        assert nodal_reconstruction_error(fld, fn, t=2.0) <= 1e-13
        assert nodal_reconstruction_error(fld, fn, t=1.0) > 1e-3

    def test_measures_interpolation_distance(self):
        # for the zero field the measure is the norm of the exact function's
        # nodal interpolant, not of the function itself
        fn = lambda x, v: np.sin(np.pi * x) * np.sin(np.pi * v)
        zero = DGField.zeros(build_mesh(4), Basis(1))
        err = nodal_reconstruction_error(zero, fn)
        assert 0.4 <= err <= 0.6  # close to ||fn|| = 1/2 but not equal


class TestTemporalStudy:
    def test_smoke_first_order(self):
        table = temporal_study(get_problem("ex1a", 0.5), n=2, k=1, inv_taus=(4, 8, 16))
        assert table.axis == "1/tau" and table.k == 1
        assert table.resolutions == (4, 8, 16)
        assert all(e > 0 for e in table.errors)
        assert table.errors[0] > table.errors[1] > table.errors[2]
        for rate in table.rates:
            assert 0.7 <= rate <= 1.5

    def test_bad_resolution_rejected(self):
        with pytest.raises(PreconditionError):
            temporal_study(get_problem("ex1a", 0.5), n=2, k=1, inv_taus=(0, 4))


class TestSpatialStudy:
    def test_smoke_second_order(self):
        table = spatial_study(get_problem("ex2", 0.5), 1, 0.25, resolutions=(2, 4))
        assert table.axis == "N"
        assert table.errors[0] > table.errors[1]
        assert table.rates[0] == pytest.approx(2.0, abs=0.35)

    def test_needs_exact_solution(self):
        with pytest.raises(PreconditionError):
            spatial_study(get_problem("ex1a", 0.5), 1, 0.1, resolutions=(2, 4))


class TestTable:
    def test_validation(self):
        with pytest.raises(PreconditionError):
            ConvergenceTable("N", 0.5, 1, (4, 8), (1.0, 0.5), ())
        with pytest.raises(PreconditionError):
            ConvergenceTable("N", 0.5, 1, (4,), (1.0, 0.5), (1.0,))
        with pytest.raises(PreconditionError):
            ConvergenceTable("N", 0.5, 1, (4, 8), (1.0, float("nan")), (1.0,))

    def test_csv_layout(self):
        table = ConvergenceTable("N", 0.5, 1, (4, 8), (1.032e-1, 2.625e-2), (1.9755,))
        lines = table.to_csv().strip().split("\n")
        assert lines[0] == "resolution,error,rate"
        assert lines[1] == "4,1.032E-01,"
        assert lines[2] == "8,2.625E-02,1.9755"

    def test_markdown_layout(self):
        table = ConvergenceTable("1/tau", 0.3, 1, (10, 20), (2.726e-4, 1.329e-4), (1.0360,))
        text = table.to_markdown()
        assert "| 10 | 20 |" in text
        assert "2.726E-04" in text and "1.0360" in text


class TestStability:
    def test_zero_start_reports_zero(self):
        from fkramers import build_system, cq_weights

        w = cq_weights(0.5, 0.25, 4)
        system = build_system(build_mesh(2), Basis(1), w.d[0], 1.0)
        assert trajectory_growth(system, w, np.zeros(16), 4) == 0.0

    def test_probe_is_reproducible_and_small(self):
        a = stability_probe(0.5, n=2, k=1, tau=0.25, trials=3, seed=4)
        b = stability_probe(0.5, n=2, k=1, tau=0.25, trials=3, seed=4)
        assert a == b
        assert 0.0 < a <= 5.0

    def test_non_integral_horizon_rejected(self):
        with pytest.raises(PreconditionError):
            stability_probe(0.5, n=2, k=1, tau=0.3, trials=1)


class TestRegularity:
    def test_degenerate_for_steady_zero_solution(self):
        p = ProblemSpec(
            name="ex1a", alpha=0.5, t_final=1.0,
            g0=lambda x, v: 0.0 * x * v, f=None, exact=None,
        )
        fit = regularity_diagnostic(p, n=2, k=1, tau=0.125)
        assert fit.degenerate
        assert math.isnan(fit.slope)

    def test_slope_invariant_under_data_scaling(self):
        base = get_problem("ex1b", 0.5)
        scaled = ProblemSpec(
            name="ex1b", alpha=0.5, t_final=1.0,
            g0=lambda x, v: 10.0 * base.g0(x, v), f=None, exact=None,
            discontinuities=(0.5,),
        )
        f1 = regularity_diagnostic(base, n=4, k=1, tau=1.0 / 16)
        f2 = regularity_diagnostic(scaled, n=4, k=1, tau=1.0 / 16)
        assert f1.slope == pytest.approx(f2.slope, abs=1e-9)
        assert np.allclose(f2.quotients, 10.0 * f1.quotients, rtol=1e-9)

    def test_too_few_steps_rejected(self):
        with pytest.raises(PreconditionError):
            regularity_diagnostic(get_problem("ex1b", 0.5), n=2, k=1, tau=0.5)
