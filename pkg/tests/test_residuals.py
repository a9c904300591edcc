import math
import unittest

import numpy as np

from src.vg_equations.errors import DomainError, PreconditionError
from src.vg_equations.model import VgParams, factor_params
from src.vg_equations.quadrature import DEFAULT_QUAD
from src.vg_equations.residuals import (TOLERANCES, EquationId, Grid2D, ResidualReport,
                                        bessel_ode_residual, check_beghin_shift,
                                        check_drifted_nonlocal, check_phillips_eq,
                                        check_space_ode, check_time_nonlocal, density_slice,
                                        drifted_slice, fourier_residual,
                                        initial_condition_residual)
from src.vg_equations.special_fn import bessel_k


class TestGrid2D(unittest.TestCase):

    def test_points_order(self):
        grid = Grid2D((1.0, 2.0), (-1.0, 1.0))
        self.assertEqual(grid.points(), [(1.0, -1.0), (1.0, 1.0), (2.0, -1.0), (2.0, 1.0)])
        self.assertEqual(grid.size, 4)

    def test_validation(self):
        bad = [((), (1.0,)), ((1.0,), ()), ((0.0,), (1.0,)), ((2.0, 1.0), (1.0,)),
               ((1.0,), (1.0, 1.0)), ((1.0,), (0.0,)), ((1.0,), (0.01,)), ((1.0,), (math.inf,))]
        for t_values, x_values in bad:
            with self.assertRaises(DomainError, msg=f"{t_values}, {x_values}"):
                Grid2D(t_values, x_values)

    def test_single_point_per_axis(self):
        grid = Grid2D((1.5,), (0.5,))
        self.assertEqual(grid.points(), [(1.5, 0.5)])
        report = check_space_ode(VgParams(1.3, 2.0), grid)
        self.assertTrue(report.passed, report.summary())

    def test_custom_puncture(self):
        Grid2D((1.0,), (0.01,), puncture=0.005)
        with self.assertRaises(DomainError):
            Grid2D((1.0,), (0.0,), puncture=0.0)


class TestReport(unittest.TestCase):

    def test_build_and_serialize(self):
        grid = Grid2D((1.0,), (-1.0, 1.0))
        report = ResidualReport.build(EquationId.SPACE_ODE, grid, [1.0, 2.0], [1.0, 2.0 + 1e-12])
        self.assertEqual(report.max_abs, report.abs_residual[1])
        self.assertTrue(report.passed)
        rows = report.to_rows()
        self.assertEqual(rows[1]['t'], 1.0)
        self.assertEqual(rows[1]['x'], 1.0)
        self.assertEqual(rows[0]['failure'], '')
        summary = report.summary()
        self.assertEqual(summary['equation'], 'space_ode')
        self.assertEqual(summary['tolerance'], TOLERANCES[EquationId.SPACE_ODE])
        self.assertIn('abs_tol', report.tolerances_used)

    def test_failures_fail_the_report(self):
        grid = Grid2D((1.0,), (-1.0, 1.0))
        report = ResidualReport.build(EquationId.PHILLIPS, grid, [1.0, math.nan], [1.0, math.nan],
                                      failures={1: "ConvergenceError: boom"})
        self.assertEqual(report.max_abs, 0.0)
        self.assertFalse(report.passed)
        self.assertEqual(report.to_rows()[1]['failure'], "ConvergenceError: boom")

    def test_residual_floor(self):
        grid = Grid2D((1.0,), (1.0,))
        report = ResidualReport.build(EquationId.BEGHIN_SHIFT, grid, [0.0], [1e-20])
        self.assertAlmostEqual(report.max_rel, 1e-8, delta=1e-20)


class TestClosedFormChecks(unittest.TestCase):

    def test_space_ode(self):
        p = VgParams(1.3, 2.0)
        grid = Grid2D((0.8, 1.5), (-2.0, -0.5, 0.3, 1.7))
        report = check_space_ode(p, grid)
        self.assertTrue(report.passed, report.summary())
        self.assertLessEqual(report.max_rel, 1e-9)
        self.assertEqual(report.lhs.shape, (8,))

    def test_space_ode_rejects_drift(self):
        with self.assertRaises(DomainError):
            check_space_ode(VgParams(1.0, 1.0, 0.3), Grid2D((1.0,), (1.0,)))

    def test_beghin_shift_second_order_case(self):
        p = VgParams(1.0, 1.0)
        xs = [-2.0, -0.5, 0.5, 3.0]
        report = check_beghin_shift(p, 2.0, xs)
        self.assertTrue(report.passed, report.summary())
        for x, lhs in zip(xs, report.lhs):
            self.assertAlmostEqual(lhs, 0.25 * (abs(x) - 1.0) * math.exp(-abs(x)), delta=1e-13)

    def test_beghin_shift_general_parameters(self):
        report = check_beghin_shift(VgParams(0.7, 2.5), 4.0, [0.1, 4.0, 6.0])
        self.assertLessEqual(report.max_rel, 1e-9)

    def test_beghin_shift_precondition(self):
        with self.assertRaises(PreconditionError):
            check_beghin_shift(VgParams(1.0, 1.0), 1.0, [0.5])
        with self.assertRaises(PreconditionError):
            check_beghin_shift(VgParams(0.5, 1.0), 1.5, [0.5])


class TestNonlocalChecks(unittest.TestCase):

    def test_time_nonlocal(self):
        p = VgParams(1.0, 1.0)
        grid = Grid2D((1.0, 2.0), (-2.0, -1.0, -0.5, 0.5, 1.0, 2.0))
        report = check_time_nonlocal(p, grid)
        self.assertFalse(report.failures)
        self.assertLessEqual(report.max_rel, 1e-4)
        self.assertTrue(report.passed, report.summary())
        self.assertEqual(report.equation_id, EquationId.TIME_NONLOCAL)

    def test_time_step_halving_shrinks_residual(self):
        p = VgParams(1.0, 1.0)
        grid = Grid2D((1.5,), (-1.0, 0.5))
        coarse = check_time_nonlocal(p, grid, time_step=0.02)
        fine = check_time_nonlocal(p, grid, time_step=0.01)
        self.assertGreaterEqual(coarse.max_abs, 3.0 * fine.max_abs)

    def test_time_nonlocal_needs_bounded_density(self):
        with self.assertRaises(PreconditionError):
            check_time_nonlocal(VgParams(0.4, 1.0), Grid2D((1.0,), (1.0,)))

    def test_drifted_delegates_without_drift(self):
        p = VgParams(1.0, 1.0)
        grid = Grid2D((1.0,), (0.7,))
        plain = check_time_nonlocal(p, grid)
        drifted = check_drifted_nonlocal(p, grid)
        self.assertEqual(drifted.equation_id, EquationId.DRIFTED_NONLOCAL)
        self.assertEqual(drifted.tolerance, TOLERANCES[EquationId.DRIFTED_NONLOCAL])
        np.testing.assert_array_equal(plain.lhs, drifted.lhs)
        np.testing.assert_array_equal(plain.rhs, drifted.rhs)

    def test_drifted_nonlocal(self):
        p = VgParams(1.0, 1.0, 0.5)
        report = check_drifted_nonlocal(p, Grid2D((1.5,), (-1.0, -0.5, 0.5, 1.0)))
        self.assertFalse(report.failures)
        self.assertLessEqual(report.max_rel, 1e-3)

    def test_phillips(self):
        p = VgParams(1.0, 1.0)
        grid = Grid2D((1.0,), (0.5, 1.0))
        report = check_phillips_eq(p, grid)
        self.assertFalse(report.failures)
        self.assertTrue(report.passed, report.summary())
        self.assertLessEqual(report.max_rel, 1e-4)

    def test_phillips_and_weyl_pair_agree(self):
        p = VgParams(1.0, 1.0)
        grid = Grid2D((1.5,), (0.5, 2.0))
        weyl = check_time_nonlocal(p, grid)
        phillips = check_phillips_eq(p, grid)
        np.testing.assert_allclose(phillips.rhs, weyl.rhs, rtol=0, atol=1e-5)

    def test_density_slice(self):
        p = VgParams(1.0, 1.0)
        u = density_slice(p, 2.0)
        self.assertAlmostEqual(u(1.0), 0.5 * math.exp(-1.0), delta=1e-15)
        self.assertEqual(u.d1(0.0), 0.0)
        self.assertEqual(u.breakpoints, (0.0,))
        self.assertTrue(u.check_derivative([-1.0, 0.5, 2.0]))

    def test_density_slice_declares_true_decay(self):
        for p, t in [(VgParams(1.0, 1.0), 2.0), (VgParams(1.0, 1.0), 0.8),
                     (VgParams(2.5, 0.7), 3.0)]:
            u = density_slice(p, t)
            self.assertAlmostEqual(u.decay_rate, 0.5 * math.sqrt(p.b), delta=1e-15)
            self.assertGreaterEqual(u.decay_constant, u(0.0))
            for y in np.linspace(-60.0, 60.0, 241):
                self.assertTrue(u.within_decay_bound(y), (p, t, y))

    def test_drifted_slice_declares_true_decay(self):
        p = VgParams(1.0, 1.0, 0.4)
        u = drifted_slice(p, 1.5, DEFAULT_QUAD.tightened(100.0))
        pair = factor_params(p)
        self.assertAlmostEqual(u.decay_rate, 0.5 * min(pair.gain.b, pair.loss.b), delta=1e-15)
        self.assertGreater(u.decay_rate, 0.0)
        for y in [-15.0, -4.0, -0.5, 0.0, 0.5, 4.0, 15.0]:
            self.assertTrue(u.within_decay_bound(y), y)

    def test_drifted_slice_derivative_near_the_kink(self):
        # at = 1: p^θ(1, x) ∝ e^{θx/2 − √b′|x|} with b′ = b + θ²/4
        p = VgParams(1.0, 1.0, 0.4)
        u = drifted_slice(p, 1.0, DEFAULT_QUAD.tightened(100.0))
        root = math.sqrt(1.04)
        for x, slope in [(5e-4, 0.2 - root), (-5e-4, 0.2 + root), (0.0, 0.2)]:
            self.assertAlmostEqual(u.d1(x), slope * u(x), delta=1e-4 * abs(slope * u(x)))


class TestFourierResiduals(unittest.TestCase):

    def test_identities_hold(self):
        p = VgParams(1.3, 2.0)
        for equation in [EquationId.TIME_NONLOCAL, EquationId.PHILLIPS, EquationId.SPACE_ODE,
                         EquationId.DRIFTED_NONLOCAL, EquationId.BEGHIN_SHIFT]:
            for xi in [-4.0, -0.5, 0.0, 1.0, 6.0]:
                self.assertLess(fourier_residual(equation, p, 1.7, xi), 1e-12,
                                msg=f"{equation.value}, xi={xi}")

    def test_drifted_identity(self):
        p = VgParams(0.8, 1.5, -0.7)
        for xi in [-3.0, 0.4, 2.0]:
            self.assertLess(fourier_residual(EquationId.DRIFTED_NONLOCAL, p, 1.2, xi), 1e-12)
        with self.assertRaises(DomainError):
            fourier_residual(EquationId.TIME_NONLOCAL, p, 1.2, 1.0)

    def test_accepts_string_ids(self):
        self.assertLess(fourier_residual("phillips", VgParams(1.0, 1.0), 1.0, 2.0), 1e-12)

    def test_beghin_needs_shifted_time(self):
        with self.assertRaises(PreconditionError):
            fourier_residual(EquationId.BEGHIN_SHIFT, VgParams(1.0, 1.0), 0.5, 1.0)

    def test_initial_condition(self):
        for xi in [-2.0, 0.0, 5.0]:
            self.assertEqual(initial_condition_residual(VgParams(1.0, 2.0, 0.3), xi), 0.0)


class TestBesselOde(unittest.TestCase):

    def test_residual_is_small(self):
        for nu in [0.3, 1.0, 2.5, 4.7]:
            for z in [0.5, 1.5, 6.0]:
                scale = (z * z + nu * nu) * bessel_k(nu, z)
                self.assertLess(abs(bessel_ode_residual(nu, z)), 1e-10 * scale,
                                msg=f"nu={nu}, z={z}")


if __name__ == '__main__':
    unittest.main()
