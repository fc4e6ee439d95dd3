"""Test analytic shrinkers and the shooting methods"""

import math
import unittest

import numpy as np

from shim import mcfent, SLOW
from mcfent import (
    AnalyticShape, ConvergenceError, DiscreteCurve, DomainError,
    ProfileSurface, ShapeKind, ShootingParams, Topology, quantities,
)
from mcfent._shrinkers import RESIDUAL_LIMIT


AL_PARAMS = ShootingParams(step=1e-3, scan_step=4e-3, resolution=512)


def turning_number(curve):
    edges = np.roll(curve.points, -1, axis=0) - curve.points
    angles = np.arctan2(edges[:, 1], edges[:, 0])
    turns = np.angle(np.exp(1j * (np.roll(angles, -1) - angles)))
    return turns.sum() / (2 * math.pi)


class TestAnalyticShape(unittest.TestCase):
    def test_constructors(self):
        sphere = AnalyticShape.sphere(3)
        self.assertAlmostEqual(sphere.radius, math.sqrt(6))
        self.assertTrue(sphere.shrinker)
        self.assertEqual(sphere.name, 'S^3')
        self.assertEqual(AnalyticShape.cylinder(1, 4).name, 'S^1xR^4')
        self.assertEqual(AnalyticShape.simons_cone(2).dimension, 5)
        self.assertEqual(AnalyticShape.hyperplane(4).name, 'R^4')

    def test_validation(self):
        with self.assertRaises(DomainError):
            AnalyticShape(ShapeKind.SPHERE, 2, radius=1.0, shrinker=True)
        with self.assertRaises(DomainError):
            AnalyticShape(ShapeKind.CYLINDER, 3, k=1, m=1)
        with self.assertRaises(DomainError):
            AnalyticShape(ShapeKind.SIMONS_CONE, 4, k=2)
        with self.assertRaises(DomainError):
            AnalyticShape.torus(1.0, 2.0)
        with self.assertRaises(DomainError):
            AnalyticShape.cylinder(0, 2)

    def test_make_standard(self):
        circle = mcfent.make_standard(AnalyticShape.sphere(1), 128)
        self.assertIsInstance(circle, DiscreteCurve)
        self.assertLess(np.max(np.abs(quantities(circle).phi)), 1e-12)
        sphere = mcfent.make_standard(AnalyticShape.sphere(2), 129)
        self.assertIsInstance(sphere, ProfileSurface)
        self.assertLess(np.max(np.abs(quantities(sphere).phi)), 1e-9)
        torus = mcfent.make_standard(AnalyticShape.torus(2.0, 0.5), 64)
        self.assertIs(torus.topology, Topology.CLOSED)
        cone = AnalyticShape.simons_cone(2)
        self.assertIs(mcfent.make_standard(cone), cone)
        with self.assertRaises(DomainError):
            mcfent.make_standard(AnalyticShape.sphere(1), 32)


class TestAbreschLanger(unittest.TestCase):
    def test_admissible(self):
        self.assertTrue(mcfent.admissible_al(2, 3))
        self.assertTrue(mcfent.admissible_al(3, 5))
        self.assertFalse(mcfent.admissible_al(3, 4))
        self.assertFalse(mcfent.admissible_al(1, 2))
        self.assertFalse(mcfent.admissible_al(2, 4))

    def test_rejects_inadmissible(self):
        with self.assertRaises(DomainError):
            mcfent.abresch_langer(3, 4)

    def test_p_one_is_the_circle(self):
        result = mcfent.abresch_langer(1, 5, AL_PARAMS)
        radii = np.linalg.norm(result.surface.points, axis=1)
        np.testing.assert_allclose(radii, math.sqrt(2), rtol=1e-12)

    def test_two_three(self):
        result = mcfent.abresch_langer(2, 3, AL_PARAMS)
        curve = result.surface
        self.assertTrue(curve.immersed)
        self.assertEqual(curve.count, AL_PARAMS.resolution)
        self.assertLess(result.residual, 1e-6)
        self.assertLess(result.discrete_residual, 1e-2)
        self.assertAlmostEqual(turning_number(curve), 2.0, places=6)
        self.assertEqual((result.p, result.q), (2, 3))
        self.assertTrue(0 < result.parameter < math.sqrt(2))

    def test_not_round(self):
        curve = mcfent.abresch_langer(2, 3, AL_PARAMS).surface
        radii = np.linalg.norm(curve.points, axis=1)
        self.assertGreater(radii.max() - radii.min(), 0.1)

    def test_deterministic(self):
        first = mcfent.abresch_langer(2, 3, AL_PARAMS)
        mcfent.abresch_langer.cache_clear()
        second = mcfent.abresch_langer(2, 3, AL_PARAMS)
        self.assertIsNot(first, second)
        self.assertEqual(first.parameter, second.parameter)
        np.testing.assert_array_equal(first.surface.points,
                                      second.surface.points)

    def test_three_lobes(self):
        curve = mcfent.abresch_langer(2, 3, AL_PARAMS).surface
        k = quantities(curve).mean_curvature
        level = 0.5 * (k.max() + k.min())
        above = k > level
        rising = np.count_nonzero(above & ~np.roll(above, 1))
        self.assertEqual(rising, 3)

    def test_threefold_symmetry(self):
        curve = mcfent.abresch_langer(2, 3, AL_PARAMS).surface
        turned = mcfent.rotate(curve, 2 * math.pi / 3)
        h = curve.edge_lengths().max()
        self.assertLess(mcfent.hausdorff(curve.points, turned.points), h)

    def test_entropy_rotation_invariant(self):
        curve = mcfent.abresch_langer(2, 3, AL_PARAMS).surface
        value = mcfent.entropy_sup(curve).value
        for angle in (0.3, 2.0):
            with self.subTest(angle=angle):
                turned = mcfent.rotate(curve, angle)
                self.assertAlmostEqual(mcfent.entropy_sup(turned).value,
                                       value, delta=1e-6)


@unittest.skipUnless(SLOW, "set MCFENT_SLOW_TESTS=1 to run")
class TestAngenentTorus(unittest.TestCase):
    def test_torus(self):
        result = mcfent.angenent_torus()
        torus = result.surface
        self.assertIsInstance(torus, ProfileSurface)
        self.assertIs(torus.topology, Topology.CLOSED)
        self.assertLess(result.discrete_residual, 1e-2)
        self.assertLess(result.residual, 1e-6)
        # Symmetric under z -> -z.
        z = torus.profile[:, 1]
        self.assertAlmostEqual(z.max(), -z.min(), places=3)
        self.assertTrue(np.all(torus.profile[:, 0] > 0))
        sphere = ProfileSurface.sphere(2.0, 257)
        self.assertIs(mcfent.contains(sphere, torus),
                      mcfent.Containment.NOT_INSIDE)
        self.assertIs(mcfent.contains(torus, sphere),
                      mcfent.Containment.NOT_INSIDE)


class TestShootingFailures(unittest.TestCase):
    def test_coarse_step_rejected(self):
        coarse = ShootingParams(step=0.05, scan_step=0.05, resolution=256)
        with self.assertRaises(ConvergenceError) as cm:
            mcfent.abresch_langer(2, 3, coarse)
        self.assertGreaterEqual(cm.exception.details['residual'],
                                RESIDUAL_LIMIT)

    def test_bracket_not_found(self):
        cramped = ShootingParams(step=1e-3, scan_step=4e-3, max_length=0.5)
        with self.assertRaises(ConvergenceError) as cm:
            mcfent.abresch_langer(3, 5, cramped)
        self.assertIsInstance(cm.exception.details, dict)


if __name__ == "__main__":
    unittest.main()
