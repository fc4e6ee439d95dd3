"""Test discrete curves, profiles and their quantities"""

import math
import unittest

import numpy as np

from shim import mcfent, shrinking_circle, shrinking_sphere, unit_circle
from mcfent import (
    Containment, DiscreteCurve, MeshError, DomainError, ProfileSurface,
    Topology, contains, quantities,
)


def ellipse_curvature(a, b, count):
    theta = 2 * np.pi * np.arange(count) / count
    return a * b / (a * a * np.sin(theta) ** 2
                    + b * b * np.cos(theta) ** 2) ** 1.5


class TestCurveQuantities(unittest.TestCase):
    def test_shrinking_circle(self):
        q = quantities(shrinking_circle(256))
        np.testing.assert_allclose(q.mean_curvature, 1 / math.sqrt(2),
                                   rtol=1e-12)
        self.assertLess(np.max(np.abs(q.phi)), 1e-3)

    def test_unit_circle(self):
        q = quantities(unit_circle(256))
        np.testing.assert_allclose(q.mean_curvature, 1.0, rtol=1e-12)
        np.testing.assert_allclose(q.support, 1.0, rtol=1e-12)
        np.testing.assert_allclose(q.phi, 0.5, rtol=1e-12)
        self.assertAlmostEqual(q.weights.sum(), 2 * math.pi, delta=1e-3)

    def test_ellipse_curvature(self):
        q = quantities(DiscreteCurve.ellipse(2.0, 1.0, 1024))
        exact = ellipse_curvature(2.0, 1.0, 1024)
        self.assertLess(np.max(np.abs(q.mean_curvature / exact - 1)), 1e-3)

    def test_ellipse_refinement_order(self):
        errors = []
        for count in (128, 256, 512):
            q = quantities(DiscreteCurve.ellipse(2.0, 1.0, count))
            exact = ellipse_curvature(2.0, 1.0, count)
            errors.append(np.max(np.abs(q.mean_curvature - exact)))
        for coarse, fine in zip(errors, errors[1:]):
            self.assertGreater(coarse / fine, 3.0)

    def test_support_positive_at_farthest_vertex(self):
        curve = DiscreteCurve.ellipse(3.0, 1.0, 64)
        q = quantities(curve)
        far = np.argmax(np.linalg.norm(curve.points, axis=1))
        self.assertGreater(q.support[far], 0)

    def test_norm_a2_bounds_mean_curvature(self):
        q = quantities(shrinking_sphere(65))
        self.assertTrue(np.all(q.norm_a2 >= q.mean_curvature ** 2 / 2
                               - 1e-12))


class TestRevolutionQuantities(unittest.TestCase):
    def test_shrinking_sphere(self):
        q = quantities(ProfileSurface.sphere(2.0, 256))
        np.testing.assert_allclose(q.mean_curvature, 1.0, rtol=1e-9)
        self.assertLess(np.max(np.abs(q.phi)), 1e-3)

    def test_unit_sphere(self):
        q = quantities(ProfileSurface.sphere(1.0, 256))
        np.testing.assert_allclose(q.mean_curvature, 2.0, rtol=1e-9)
        np.testing.assert_allclose(q.support, 1.0, rtol=1e-9)
        np.testing.assert_allclose(q.phi, 1.5, rtol=1e-9)
        self.assertAlmostEqual(q.weights.sum(), 4 * math.pi, delta=5e-3)

    def test_poles_are_umbilic(self):
        q = quantities(ProfileSurface.sphere(1.0, 64))
        self.assertEqual(q.kappa_ring[0], q.kappa[0])
        self.assertEqual(q.kappa_ring[-1], q.kappa[-1])

    def test_torus(self):
        torus = ProfileSurface.torus(2.0, 0.5, 256)
        q = quantities(torus)
        np.testing.assert_allclose(q.kappa, 2.0, rtol=1e-9)
        outer = np.argmax(torus.profile[:, 0])
        self.assertAlmostEqual(q.kappa_ring[outer], 1 / 2.5, places=9)


class TestValidation(unittest.TestCase):
    def test_too_few_vertices(self):
        with self.assertRaises(MeshError):
            DiscreteCurve.circle(1.0, 7)

    def test_coincident_vertices(self):
        pts = DiscreteCurve.circle(1.0, 16).points.copy()
        pts[1] = pts[0]
        with self.assertRaises(MeshError):
            DiscreteCurve(pts)

    def test_clockwise_rejected(self):
        pts = DiscreteCurve.circle(1.0, 16).points[::-1]
        with self.assertRaises(MeshError):
            DiscreteCurve(pts)
        curve = DiscreteCurve.from_points(pts)
        self.assertGreater(curve.signed_area(), 0)
        np.testing.assert_array_equal(curve.points[0], pts[0])

    def test_self_intersection(self):
        theta = 2 * np.pi * np.arange(32) / 32
        x = np.sin(2 * theta) + 0.1 * np.cos(theta)
        figure_eight = np.column_stack([x, np.sin(theta)])
        with self.assertRaises(MeshError):
            DiscreteCurve.from_points(figure_eight)

    def test_immersed_curve_allowed(self):
        theta = 2 * np.pi * np.arange(64) / 64
        radius = 1 + 0.8 * np.cos(3 * theta) + 0.5
        loops = np.column_stack([radius * np.cos(2 * theta),
                                 radius * np.sin(2 * theta)])
        curve = DiscreteCurve.from_points(loops, immersed=True)
        self.assertTrue(curve.immersed)

    def test_profile_off_axis_interior(self):
        p = ProfileSurface.sphere(1.0, 32).profile.copy()
        p[10, 0] = -0.1
        with self.assertRaises(MeshError):
            ProfileSurface(p)

    def test_profile_pole_angle(self):
        z = np.linspace(-1.0, 1.0, 9)
        diamond = np.column_stack([1 - np.abs(z), z])
        with self.assertRaises(MeshError) as cm:
            ProfileSurface(diamond)
        self.assertIn('axis', str(cm.exception))

    def test_profile_endpoints_on_axis(self):
        p = ProfileSurface.sphere(1.0, 32).profile.copy()
        p[0, 0] = 0.2
        with self.assertRaises(MeshError):
            ProfileSurface(p, Topology.AXIS)


class TestContainment(unittest.TestCase):
    def test_nested_circles(self):
        small = DiscreteCurve.circle(1.0, 64)
        large = DiscreteCurve.circle(2.0, 64)
        self.assertIs(contains(large, small), Containment.INSIDE)
        self.assertIs(contains(small, large), Containment.NOT_INSIDE)

    def test_boundary_is_indeterminate(self):
        circle = unit_circle(64)
        self.assertIs(contains(circle, circle), Containment.INDETERMINATE)

    def test_never_mutual(self):
        a = DiscreteCurve.circle(1.0, 64)
        b = DiscreteCurve.circle(1.0, 64, center=(0.5, 0.0))
        results = {contains(a, b), contains(b, a)}
        self.assertNotIn(Containment.INSIDE, results)

    def test_profiles(self):
        small = ProfileSurface.sphere(1.0, 65)
        large = ProfileSurface.sphere(2.0, 65)
        self.assertIs(contains(large, small), Containment.INSIDE)
        self.assertIs(contains(small, large), Containment.NOT_INSIDE)
        thin = ProfileSurface.torus(2.0, 0.25, 64)
        fat = ProfileSurface.torus(2.0, 0.5, 64)
        self.assertIs(contains(fat, thin), Containment.INSIDE)

    def test_mixed_types(self):
        with self.assertRaises(DomainError):
            contains(unit_circle(), ProfileSurface.sphere(1.0, 65))


class TestHelpers(unittest.TestCase):
    def test_resample_arclength(self):
        curve = DiscreteCurve.ellipse(2.0, 1.0, 128)
        fine = mcfent.resample_arclength(curve, 200)
        self.assertEqual(fine.count, 200)
        lengths = fine.edge_lengths()
        self.assertGreater(lengths.min() / lengths.max(), 0.99)
        np.testing.assert_array_equal(fine.points[0], curve.points[0])

    def test_resample_circle_stays_round(self):
        circle = mcfent.resample_arclength(unit_circle(128), 64)
        np.testing.assert_allclose(np.linalg.norm(circle.points, axis=1),
                                   1.0, atol=1e-4)

    def test_resample_profile_keeps_poles(self):
        sphere = mcfent.resample_arclength(ProfileSurface.sphere(1.0, 65),
                                           97)
        self.assertEqual(sphere.count, 97)
        self.assertEqual(sphere.profile[0, 0], 0.0)
        self.assertEqual(sphere.profile[-1, 0], 0.0)
        np.testing.assert_allclose(np.linalg.norm(sphere.profile, axis=1),
                                   1.0, atol=1e-4)

    def test_normal_graph(self):
        circle = unit_circle(64)
        moved = mcfent.normal_graph(circle, np.ones(64), -0.25)
        np.testing.assert_allclose(np.linalg.norm(moved.points, axis=1),
                                   0.75, rtol=1e-12)
        with self.assertRaises(DomainError):
            mcfent.normal_graph(circle, np.ones(63), 0.1)

    def test_rigid_motions(self):
        curve = DiscreteCurve.ellipse(2.0, 1.0, 64)
        h = quantities(curve).mean_curvature
        moved = mcfent.translate(mcfent.rotate(curve, 0.7), (1.0, -2.0))
        np.testing.assert_allclose(quantities(moved).mean_curvature, h,
                                   rtol=1e-9)
        np.testing.assert_allclose(
            quantities(mcfent.dilate(curve, 2.0)).mean_curvature, h / 2,
            rtol=1e-9)
        with self.assertRaises(DomainError):
            mcfent.dilate(curve, 0.0)

    def test_profile_translation_along_axis_only(self):
        sphere = ProfileSurface.sphere(1.0, 33)
        shifted = mcfent.translate(sphere, (0.0, 0.0, 1.5))
        self.assertAlmostEqual(shifted.profile[:, 1].max(), 2.5)
        with self.assertRaises(DomainError):
            mcfent.translate(sphere, (1.0, 0.0, 0.0))

    def test_mesh_quality(self):
        quality = mcfent.mesh_quality(unit_circle(64))
        self.assertAlmostEqual(quality.ratio, 1.0)
        self.assertEqual(quality.degenerate, 0)

    def test_diameter_and_hausdorff(self):
        self.assertAlmostEqual(mcfent.diameter(unit_circle(64)), 2.0)
        self.assertAlmostEqual(
            mcfent.diameter(ProfileSurface.sphere(1.0, 65)), 2.0)
        a = unit_circle(64).points
        self.assertAlmostEqual(mcfent.hausdorff(a, 2 * a), 1.0)


if __name__ == "__main__":
    unittest.main()
