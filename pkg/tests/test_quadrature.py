import math
import unittest

from src.vg_equations.errors import ConvergenceError, DomainError
from src.vg_equations.quadrature import (DEFAULT_QUAD, QuadConfig, gauss_hermite, gaussian_cutoff,
                                         integrate_interval, integrate_pieces, split_edges)


class TestQuadConfig(unittest.TestCase):

    def test_defaults(self):
        self.assertEqual(DEFAULT_QUAD.abs_tol, 1e-9)
        self.assertEqual(DEFAULT_QUAD.rel_tol, 1e-8)
        self.assertEqual(DEFAULT_QUAD.tail_cut, 1e-12)

    def test_validation(self):
        for kwargs in [{'abs_tol': 0.0}, {'rel_tol': -1.0}, {'tail_cut': 1.0},
                       {'max_subdivisions': 5}, {'hermite_nodes': 1}, {'taylor_guard': 0.0}]:
            with self.assertRaises(DomainError, msg=str(kwargs)):
                QuadConfig(**kwargs)

    def test_from_config(self):
        q = QuadConfig.from_config({'quadrature': {'abs_tol': 1e-6, 'hermite_nodes': 40}})
        self.assertEqual(q.abs_tol, 1e-6)
        self.assertEqual(q.hermite_nodes, 40)
        self.assertEqual(q.rel_tol, DEFAULT_QUAD.rel_tol)
        self.assertEqual(QuadConfig.from_config({}), DEFAULT_QUAD)

    def test_tightened_and_snapshot(self):
        q = DEFAULT_QUAD.tightened(10.0)
        self.assertAlmostEqual(q.abs_tol, 1e-10, delta=1e-25)
        self.assertAlmostEqual(q.rel_tol, 1e-9, delta=1e-24)
        self.assertEqual(q.max_subdivisions, DEFAULT_QUAD.max_subdivisions)
        self.assertEqual(DEFAULT_QUAD.snapshot()['abs_tol'], 1e-9)


class TestIntegration(unittest.TestCase):

    def test_finite_interval(self):
        value, error = integrate_interval(math.sin, 0.0, math.pi, DEFAULT_QUAD)
        self.assertAlmostEqual(value, 2.0, delta=1e-12)
        self.assertLess(error, 1e-9)

    def test_empty_interval(self):
        self.assertEqual(integrate_interval(math.exp, 1.0, 1.0, DEFAULT_QUAD), (0.0, 0.0))

    def test_semi_infinite_pieces(self):
        value, _ = integrate_pieces(lambda x: math.exp(-abs(x - 3.0)), 0.0, math.inf, DEFAULT_QUAD,
                                    breakpoints=(3.0,))
        self.assertAlmostEqual(value, 2.0 - math.exp(-3.0), delta=1e-10)

    def test_divergent_integral_raises(self):
        with self.assertRaises(ConvergenceError):
            integrate_interval(lambda x: 1.0 / x if x > 0 else 0.0, 0.0, 1.0, DEFAULT_QUAD)

    def test_split_edges(self):
        self.assertEqual(split_edges(0.0, math.inf, [5.0, -1.0, 2.0, 2.0, math.nan]),
                         [0.0, 2.0, 5.0, math.inf])
        self.assertEqual(split_edges(0.0, 1.0, []), [0.0, 1.0])


class TestGaussian(unittest.TestCase):

    def test_hermite_integrates_polynomials(self):
        nodes, weights = gauss_hermite(20)
        self.assertAlmostEqual(sum(weights), math.sqrt(math.pi), delta=1e-13)
        self.assertAlmostEqual(sum(w * x ** 2 for x, w in zip(nodes, weights)),
                               math.sqrt(math.pi) / 2.0, delta=1e-13)

    def test_cutoff(self):
        q = QuadConfig(abs_tol=1e-9, tail_cut=1e-12)
        cutoff = gaussian_cutoff(q)
        self.assertAlmostEqual(math.exp(-cutoff ** 2), 1e-21, delta=1e-30)


if __name__ == '__main__':
    unittest.main()
