"""Test mean curvature flow, the rescaled flow and blow-ups"""

import math
import unittest

import numpy as np

from shim import (
    mcfent, ellipse, shrinking_circle, unit_circle, unit_sphere,
)
from mcfent import (
    DomainError, FlowKind, FlowParams, Scheme, StopReason,
    detect_singularity, run_flow,
)


def mean_radius(surface):
    return float(np.mean(np.linalg.norm(surface.points, axis=1)))


class TestRescaledCircle(unittest.TestCase):
    def test_radius_law(self):
        # r(t)^2 = 2 - e^t for the unit circle.
        trace = run_flow(unit_circle(128), FlowKind.RESCALED,
                         FlowParams(dt=1e-4, t_max=0.6, snapshot_every=50))
        self.assertIs(trace.stop_reason, StopReason.T_MAX)
        self.assertFalse(trace.singular)
        for sample in trace.samples:
            expected = 2 - math.exp(sample.t)
            self.assertAlmostEqual(mean_radius(sample.surface) ** 2,
                                   expected, delta=1e-3)

    def test_shrinker_is_stationary(self):
        trace = run_flow(shrinking_circle(128), FlowKind.RESCALED,
                         FlowParams(dt=1e-3, t_max=0.5, snapshot_every=100))
        radii = np.linalg.norm(trace.last.surface.points, axis=1)
        np.testing.assert_allclose(radii, math.sqrt(2), atol=1e-6)

    def test_singular_time(self):
        trace = run_flow(unit_circle(128), FlowKind.RESCALED,
                         FlowParams(dt=1e-4, t_max=1.0, snapshot_every=10))
        self.assertIs(trace.stop_reason, StopReason.CURVATURE)
        event = detect_singularity(trace)
        self.assertAlmostEqual(event.tau, math.log(2),
                               delta=0.05 * math.log(2))
        self.assertTrue(event.compact)
        self.assertLess(np.linalg.norm(event.point), 1e-6)
        self.assertLessEqual(event.tau,
                             mcfent.blowup_time_bound(0.5, 0.5, 1))

    def test_diagnostics(self):
        trace = run_flow(unit_circle(128), FlowKind.RESCALED,
                         FlowParams(dt=1e-3, t_max=0.2, snapshot_every=50))
        first = trace.samples[0].diagnostics
        self.assertAlmostEqual(first.min_phi, 0.5, places=9)
        self.assertAlmostEqual(first.max_a, 1.0, places=9)
        self.assertAlmostEqual(first.max_b2, 4.0, places=9)
        self.assertTrue(first.resolved)
        self.assertTrue(math.isnan(first.entropy_lb))
        f01 = trace.column('f01')
        self.assertTrue(np.all(np.diff(f01) < 0))


class TestRescaledSphere(unittest.TestCase):
    def test_radius_law(self):
        # r(t)^2 = 4 - 3 e^t for the unit sphere.
        trace = run_flow(unit_sphere(129), FlowKind.RESCALED,
                         FlowParams(dt=1e-4, t_max=0.15, snapshot_every=100))
        self.assertIs(trace.stop_reason, StopReason.T_MAX)
        for sample in trace.samples:
            self.assertAlmostEqual(mean_radius(sample.surface) ** 2,
                                   4 - 3 * math.exp(sample.t), delta=2e-3)


class TestMeanCurvatureFlow(unittest.TestCase):
    def test_circle_extinction(self):
        trace = run_flow(unit_circle(128), FlowKind.MCF,
                         FlowParams(dt=5e-4, t_max=1.0, snapshot_every=10))
        event = detect_singularity(trace)
        self.assertAlmostEqual(event.tau, 0.5, delta=0.01)

    def test_sphere_extinction(self):
        trace = run_flow(unit_sphere(129), FlowKind.MCF,
                         FlowParams(dt=1e-4, t_max=1.0, snapshot_every=10))
        self.assertIs(trace.stop_reason, StopReason.CURVATURE)
        event = detect_singularity(trace)
        self.assertAlmostEqual(event.tau, 0.25, delta=0.005)
        self.assertAlmostEqual(event.point[1], 0.0, delta=1e-6)

    def test_step(self):
        circle = mcfent.step_mcf(unit_circle(128), 1e-3)
        self.assertAlmostEqual(mean_radius(circle), math.sqrt(1 - 2e-3),
                               delta=1e-5)
        rescaled = mcfent.step_rescaled(shrinking_circle(128), 1e-3)
        self.assertAlmostEqual(mean_radius(rescaled), math.sqrt(2),
                               delta=1e-9)

    def test_explicit_scheme(self):
        trace = run_flow(unit_circle(64), FlowKind.MCF,
                         FlowParams(dt=1e-3, scheme=Scheme.EXPLICIT,
                                    redistribute=False, curvature_cfl=None,
                                    t_max=0.05))
        h = unit_circle(64).edge_lengths().max()
        steps = np.diff(trace.times())
        self.assertTrue(np.all(steps <= 0.4 * h * h + 1e-15))
        expected = math.sqrt(1 - 2 * trace.last.t)
        self.assertAlmostEqual(mean_radius(trace.last.surface), expected,
                               delta=1e-3)

    def test_nonround_curve(self):
        trace = run_flow(ellipse(128), FlowKind.MCF,
                         FlowParams(dt=1e-3, t_max=0.3, snapshot_every=50))
        areas = [s.surface.signed_area() for s in trace.samples]
        # Area decreases at rate 2 pi.
        slope = (areas[-1] - areas[0]) / (trace.last.t - trace.samples[0].t)
        self.assertAlmostEqual(slope, -2 * math.pi, delta=0.1)

    def test_threshold_must_exceed_initial_curvature(self):
        with self.assertRaises(DomainError):
            run_flow(unit_circle(64), FlowKind.MCF,
                     FlowParams(a_max=5.0))

    def test_detect_needs_samples(self):
        trace = run_flow(unit_circle(64), FlowKind.MCF,
                         FlowParams(dt=1e-3, t_max=3e-3))
        with self.assertRaises(DomainError):
            detect_singularity(trace)

    def test_no_singularity(self):
        trace = run_flow(unit_circle(64), FlowKind.MCF,
                         FlowParams(dt=1e-3, t_max=0.02))
        self.assertIsNone(detect_singularity(trace))


class TestConversions(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.mcf = run_flow(unit_circle(128), FlowKind.MCF,
                           FlowParams(dt=5e-4, t_max=1.0, snapshot_every=4))
        cls.event = detect_singularity(cls.mcf)

    def test_mcf_to_rescaled(self):
        rescaled = mcfent.mcf_to_rescaled(self.mcf, 0.5, t_end=1.5)
        self.assertIs(rescaled.kind, FlowKind.RESCALED)
        self.assertFalse(rescaled.truncated)
        for sample in rescaled.samples:
            self.assertAlmostEqual(mean_radius(sample.surface),
                                   math.sqrt(2), delta=5e-3)

    def test_matches_rescaled_steps(self):
        # Rescaling about a time past the extinction time starts from the
        # unit circle itself.
        rescaled = mcfent.mcf_to_rescaled(self.mcf, 1.0, t_end=0.3)
        self.assertAlmostEqual(rescaled.samples[0].t, 0.0, delta=1e-12)
        target = rescaled.last
        dt = 5e-4
        surface = unit_circle(128)
        for _ in range(int(round(target.t / dt))):
            surface = mcfent.step_rescaled(surface, dt)
        self.assertLess(mcfent.hausdorff(surface.points,
                                         target.surface.points), 1e-2)

    def test_truncated(self):
        rescaled = mcfent.mcf_to_rescaled(self.mcf, 0.5, t_end=50.0,
                                          dt_out=0.1)
        self.assertTrue(rescaled.truncated)

    def test_wrong_kind(self):
        with self.assertRaises(DomainError):
            mcfent.rescaled_to_mcf(self.mcf)
        rescaled = mcfent.mcf_to_rescaled(self.mcf, 0.5, t_end=1.0)
        with self.assertRaises(DomainError):
            mcfent.mcf_to_rescaled(rescaled, 0.5)

    def test_rescaled_to_mcf(self):
        trace = run_flow(unit_circle(128), FlowKind.RESCALED,
                         FlowParams(dt=5e-4, t_max=0.3, snapshot_every=50))
        mcf = mcfent.rescaled_to_mcf(trace)
        for sample in mcf.samples:
            self.assertLess(sample.t, 0)
            self.assertAlmostEqual(mean_radius(sample.surface) ** 2,
                                   -2 * sample.t - 1, delta=1e-3)

    def test_tangent_rescalings(self):
        scales = [0.35, 0.18, 0.09, 0.045]
        ts = mcfent.tangent_rescalings(self.mcf, self.event, scales)
        self.assertEqual(len(ts.resolved()), 4)
        self.assertFalse(ts.profile)
        for entry in ts.resolved():
            radii = np.linalg.norm(entry.points, axis=1)
            self.assertAlmostEqual(radii.mean(), math.sqrt(2), delta=0.02)

    def test_tangent_scale_validation(self):
        with self.assertRaises(DomainError):
            mcfent.tangent_rescalings(self.mcf, self.event, [0.1, 0.2])
        with self.assertRaises(DomainError):
            mcfent.tangent_rescalings(self.mcf, self.event, [])

    def test_tangent_outside_range(self):
        ts = mcfent.tangent_rescalings(self.mcf, self.event, [5.0, 0.1])
        self.assertTrue(ts.entries[0].under_resolved)
        self.assertIsNone(ts.entries[0].points)


class TestBlowupBound(unittest.TestCase):
    def test_circle_value(self):
        self.assertAlmostEqual(mcfent.blowup_time_bound(0.5, 0.5, 1),
                               2 * math.log(2) + 2)

    def test_large_phi(self):
        self.assertAlmostEqual(mcfent.blowup_time_bound(2.0, 0.5, 2), 1.0)

    def test_validation(self):
        with self.assertRaises(DomainError):
            mcfent.blowup_time_bound(0.0, 1.0, 1)
        with self.assertRaises(DomainError):
            mcfent.blowup_time_bound(1.0, -1.0, 1)


if __name__ == "__main__":
    unittest.main()
