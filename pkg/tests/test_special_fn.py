import math
import unittest

import numpy as np
from scipy import integrate, special

from src.vg_equations.errors import DomainError, RangeError
from src.vg_equations.special_fn import (EULER_GAMMA, Accuracy, bessel_k, bessel_k_derivative,
                                         exp_integral_e1, gamma, ln_gamma, log_bessel_k,
                                         log_exp_integral_e1)


def k_integral(nu, x):
    """K_ν(x) = ∫₀^∞ e^{−x cosh t} cosh(νt) dt."""
    value, _ = integrate.quad(lambda t: math.exp(-x * math.cosh(t)) * math.cosh(nu * t),
                              0.0, math.inf, epsabs=0.0, epsrel=1e-13, limit=200)
    return value


def k_half(z):
    return math.sqrt(math.pi / (2.0 * z)) * math.exp(-z)


class TestLnGamma(unittest.TestCase):

    def test_exact_points(self):
        self.assertEqual(ln_gamma(1.0), 0.0)
        self.assertEqual(ln_gamma(2.0), 0.0)
        self.assertAlmostEqual(ln_gamma(0.5), 0.5 * math.log(math.pi), delta=1e-14)

    def test_product_of_shifts_oracle(self):
        gamma_17, _ = integrate.quad(lambda t: t ** 0.7 * math.exp(-t), 0.0, math.inf,
                                     epsabs=0.0, epsrel=1e-13)
        expected = math.log(2.7 * 1.7) + math.log(gamma_17)
        self.assertAlmostEqual(ln_gamma(3.7), expected, delta=1e-11 * abs(expected))

    def test_matches_scipy_on_grid(self):
        for x in [0.05, 0.5, 1.3, 7.25, 42.0, 170.5, 1e4]:
            expected = special.gammaln(x)
            self.assertAlmostEqual(ln_gamma(x), expected, delta=1e-12 * max(abs(expected), 1.0))

    def test_relative_accuracy_near_the_zeros(self):
        for origin, offsets in [(1.0, [1e-6, -1e-5, 0.15, -0.15, 0.19]),
                                (2.0, [1e-7, -1e-7, -1e-5, 0.19, -0.19])]:
            for offset in offsets:
                x = origin + offset
                # ln Γ(x) = ∫ ψ between the zero and x
                expected, _ = integrate.quad(special.psi, origin, x, epsabs=0.0, epsrel=1e-14)
                self.assertAlmostEqual(ln_gamma(x), expected, delta=1e-12 * abs(expected),
                                       msg=f"x={x!r}")
        self.assertAlmostEqual(ln_gamma(2.0000001), special.gammaln(2.0000001),
                               delta=1e-12 * abs(special.gammaln(2.0000001)))

    def test_gamma_integers(self):
        self.assertAlmostEqual(gamma(5.0), 24.0, delta=1e-12)

    def test_gamma_overflow_is_explicit(self):
        with self.assertRaises(RangeError):
            gamma(200.0)

    def test_non_positive_argument(self):
        for x in [0.0, -1.5, float('nan')]:
            with self.assertRaises(DomainError):
                ln_gamma(x)


class TestBesselK(unittest.TestCase):

    def test_half_integer_closed_forms(self):
        for z in [0.3, 1.0, 2.0, 3.5, 10.0]:
            base = k_half(z)
            self.assertAlmostEqual(bessel_k(0.5, z), base, delta=1e-12 * base)
            expected = base * (1.0 + 1.0 / z)
            self.assertAlmostEqual(bessel_k(1.5, z), expected, delta=1e-12 * expected)
            expected = base * (1.0 + 3.0 / z + 3.0 / z ** 2)
            self.assertAlmostEqual(bessel_k(2.5, z), expected, delta=1e-12 * expected)

    def test_known_value(self):
        self.assertAlmostEqual(bessel_k(0.5, 1.0), 0.46106850444789454, delta=1e-14)

    def test_integral_representation(self):
        for nu, x in [(1.5, 2.0), (2.3, 0.7), (0.0, 1.0), (0.8, 1.5), (4.2, 5.0)]:
            expected = k_integral(nu, x)
            self.assertAlmostEqual(bessel_k(nu, x), expected, delta=1e-10 * expected,
                                   msg=f"nu={nu}, x={x}")

    def test_matches_scipy_over_contract_range(self):
        for nu in [0.0, 0.25, 1.0, 2.7, 10.0, 25.5, 50.0]:
            for x in [1e-6, 1e-3, 0.5, 1.999, 2.001, 10.0, 100.0]:
                expected = special.kv(nu, x)
                if np.isfinite(expected) and expected > 1e-300:
                    self.assertAlmostEqual(bessel_k(nu, x), expected, delta=1e-10 * expected,
                                           msg=f"nu={nu}, x={x}")
                else:
                    with self.assertRaises(RangeError):
                        bessel_k(nu, x)

    def test_log_form_survives_overflow(self):
        # K_50(1e-6) ~ Γ(50) 2^49 x^{-50}
        approx = special.gammaln(50.0) + 49.0 * math.log(2.0) + 50.0 * math.log(1e6)
        self.assertAlmostEqual(log_bessel_k(50.0, 1e-6), approx, delta=1e-6 * approx)

    def test_even_in_order(self):
        self.assertEqual(bessel_k(-1.3, 0.9), bessel_k(1.3, 0.9))

    def test_recurrence_consistency(self):
        for nu in [2.0, 2.4, 3.75, 7.1, 20.0]:
            for x in [0.2, 1.0, 4.0, 30.0]:
                direct = bessel_k(nu, x)
                recurred = bessel_k(nu - 2.0, x) + 2.0 * (nu - 1.0) / x * bessel_k(nu - 1.0, x)
                self.assertAlmostEqual(direct, recurred, delta=1e-9 * direct)

    def test_derivative(self):
        nu, x = 1.3, 0.8
        h = 1e-5
        numeric = (bessel_k(nu, x + h) - bessel_k(nu, x - h)) / (2 * h)
        exact = bessel_k_derivative(nu, x)
        self.assertAlmostEqual(exact, numeric, delta=1e-7 * abs(exact))

    def test_domain(self):
        for x in [0.0, -1.0]:
            with self.assertRaises(DomainError):
                bessel_k(1.0, x)


class TestExpIntegral(unittest.TestCase):

    def test_value_at_one(self):
        expected, _ = integrate.quad(lambda z: math.exp(-z) / z, 1.0, math.inf,
                                     epsabs=0.0, epsrel=1e-13)
        self.assertAlmostEqual(exp_integral_e1(1.0), expected, delta=1e-12 * expected)
        self.assertAlmostEqual(exp_integral_e1(1.0), 0.21938393439552029, delta=1e-15)

    def test_large_argument_bracket(self):
        for x in [30.0, 45.5, 100.0, 600.0]:
            value = exp_integral_e1(x)
            self.assertGreater(value, math.exp(-x) / (x + 1.0))
            self.assertLess(value, math.exp(-x) / x)

    def test_small_argument_series(self):
        x = 0.001
        series = -EULER_GAMMA - math.log(x)
        term = 1.0
        for k in range(1, 10):
            term *= -x / k
            series -= term / k
        self.assertAlmostEqual(exp_integral_e1(x), series, delta=1e-12 * series)

    def test_matches_scipy(self):
        xs = np.geomspace(1e-8, 700.0, 57)
        np.testing.assert_allclose(exp_integral_e1(xs), special.exp1(xs), rtol=1e-12)

    def test_strictly_decreasing(self):
        values = exp_integral_e1(np.linspace(0.01, 50.0, 400))
        self.assertTrue(np.all(np.diff(values) < 0))

    def test_scalar_and_array_agree(self):
        xs = np.array([0.2, 1.0, 3.0])
        array_values = exp_integral_e1(xs)
        for x, value in zip(xs, array_values):
            self.assertEqual(exp_integral_e1(float(x)), value)
        self.assertIsInstance(exp_integral_e1(0.5), float)

    def test_log_form(self):
        for x in [1e-5, 0.7, 1.0, 12.0]:
            self.assertAlmostEqual(log_exp_integral_e1(x), math.log(exp_integral_e1(x)), delta=1e-13)
        # E₁(1000) underflows, its logarithm does not
        self.assertAlmostEqual(log_exp_integral_e1(1000.0), -1000.0 - math.log(1000.0), delta=1e-2)

    def test_domain(self):
        for x in [0.0, -2.0, float('inf')]:
            with self.assertRaises(DomainError):
                exp_integral_e1(x)
        with self.assertRaises(DomainError):
            exp_integral_e1(np.array([1.0, 0.0]))


class TestAccuracy(unittest.TestCase):

    def test_validation(self):
        with self.assertRaises(DomainError):
            Accuracy(rel_tol=0.0)
        with self.assertRaises(DomainError):
            Accuracy(max_terms=0)

    def test_from_config(self):
        accuracy = Accuracy.from_config({'special': {'rel_tol': 1e-10, 'max_terms': 50}})
        self.assertEqual(accuracy.rel_tol, 1e-10)
        self.assertEqual(accuracy.max_terms, 50)
        self.assertEqual(Accuracy.from_config({}), Accuracy())

    def test_too_few_terms_is_reported(self):
        from src.vg_equations.errors import ConvergenceError
        with self.assertRaises(ConvergenceError):
            exp_integral_e1(0.9, Accuracy(max_terms=3))


if __name__ == '__main__':
    unittest.main()
