"""Test the entropy table and the shrinker pipeline"""

import csv
import io
import math
import unittest

from shim import mcfent, SLOW
from mcfent import (
    DomainError, PerturbationError, PipelineError, PipelineParams,
    ShootingParams, make_table, parse_shrinker, run_pipeline,
)
from mcfent._pipeline import GAP_MIN, _gap_check


SMALL = PipelineParams(shooting=ShootingParams(resolution=128))


def table_rows(**kwargs):
    return list(csv.DictReader(io.StringIO(make_table(**kwargs))))


class TestTable(unittest.TestCase):
    def test_header_and_size(self):
        rows = table_rows()
        self.assertEqual(list(rows[0]), ['object', 'n_or_k', 'entropy',
                                         'method', 'error_estimate', 'note'])
        self.assertEqual(len(rows), 8 + 28 + 1 + 12)

    def test_values(self):
        rows = {row['object']: row for row in table_rows()}
        self.assertAlmostEqual(float(rows['S^1']['entropy']),
                               1.52034690107, places=10)
        self.assertAlmostEqual(float(rows['S^2']['entropy']), 4 / math.e,
                               places=10)
        self.assertEqual(rows['S^1xR^3']['entropy'], rows['S^1']['entropy'])
        self.assertEqual(rows['R^n']['entropy'], '1')
        self.assertEqual(rows['C(2,2)']['entropy'], '1.5')
        self.assertLessEqual(float(rows['C(2,2)']['error_estimate']), 1e-9)

    def test_first_cone_below_circle_is_flagged(self):
        notes = [(row['object'], row['note']) for row in table_rows()
                 if row['note']]
        self.assertEqual(notes, [('C(2,2)', '< lambda(S^1xR^4)')])

    def test_sizes(self):
        rows = table_rows(max_n=2, max_k=1)
        self.assertEqual([row['object'] for row in rows],
                         ['S^1', 'S^2', 'S^1xR^1', 'R^n', 'C(1,1)'])
        with self.assertRaises(DomainError):
            make_table(max_n=0)


class TestParseShrinker(unittest.TestCase):
    def test_names(self):
        self.assertEqual(parse_shrinker('Torus'), ('torus', None))
        self.assertEqual(parse_shrinker('sphere'), ('sphere', None))
        self.assertEqual(parse_shrinker('al(2,3)'), ('al', (2, 3)))
        self.assertEqual(parse_shrinker('al:3,5'), ('al', (3, 5)))
        self.assertEqual(parse_shrinker('AL(1, 4)'), ('al', (1, 4)))

    def test_rejected(self):
        for name in ('cube', 'al(3,4)', 'al(2,4)', 'al()'):
            with self.subTest(name):
                with self.assertRaises(DomainError):
                    parse_shrinker(name)


class TestRoundInputs(unittest.TestCase):
    def test_sphere_stops_at_perturb(self):
        with self.assertRaises(PipelineError) as cm:
            run_pipeline('sphere', SMALL)
        error = cm.exception
        self.assertEqual(error.stage, 'perturb')
        self.assertIsInstance(error.__cause__, PerturbationError)
        self.assertEqual(error.__cause__.failed_property, 1)
        report = error.report
        self.assertEqual(report.status, 'FAILED')
        self.assertEqual(report.failed_stage, 'perturb')
        self.assertAlmostEqual(report.lambda_shrinker, 4 / math.e,
                               delta=2e-3)
        self.assertAlmostEqual(report.mu, 1.0, delta=1e-3)
        self.assertTrue(report.rigidity)
        self.assertIn('failed_stage = perturb', report.text())

    def test_circle_stops_at_perturb(self):
        with self.assertRaises(PipelineError) as cm:
            run_pipeline('circle', SMALL)
        self.assertEqual(cm.exception.stage, 'perturb')
        self.assertFalse(cm.exception.report.rigidity)

class TestGapCheck(unittest.TestCase):
    def test_threshold(self):
        small = _gap_check(0.5 * GAP_MIN)
        self.assertFalse(small.passed)
        self.assertEqual(small.passed, small.margin <= small.tolerance)
        wide = _gap_check(0.4)
        self.assertTrue(wide.passed)
        self.assertAlmostEqual(wide.margin, GAP_MIN - 0.4)
        self.assertEqual(wide.parameters['minimum'], GAP_MIN)

    def test_small_gap_fails_the_run(self):
        report = mcfent.PipelineReport('al(2,3)')
        report.checks.append(_gap_check(0.001))
        self.assertFalse(all(check.passed for check in report.checks))
        self.assertIn('gap.passed = false', report.text())


@unittest.skipUnless(SLOW, "set MCFENT_SLOW_TESTS=1 to run")
class TestFullPipeline(unittest.TestCase):
    def check_report(self, report):
        self.assertEqual(report.status, 'OK', report.text())
        self.assertTrue(report.chain_holds)
        self.assertTrue(report.tau_within_bound)
        self.assertGreater(report.mu, 1.0)
        self.assertLess(report.lambda_perturbed, report.lambda_shrinker)
        self.assertGreater(report.gap, GAP_MIN)
        gap = [check for check in report.checks if check.name == 'gap']
        self.assertEqual(len(gap), 1)
        self.assertTrue(gap[0].passed)

    def test_abresch_langer(self):
        params = PipelineParams(shooting=ShootingParams(
            step=1e-3, scan_step=4e-3, resolution=512))
        report = run_pipeline('al(2,3)', params)
        self.check_report(report)
        self.assertEqual(report.tangent_type, 'S^1xR^0')
        self.assertAlmostEqual(report.tangent_radius, math.sqrt(2),
                               delta=0.02 * math.sqrt(2))

    def test_angenent_torus(self):
        report = run_pipeline('torus')
        self.check_report(report)
        self.assertIn(report.tangent_type, ('S^1xR^1', 'S^2xR^0'))
        self.assertLess(report.lambda_shrinker, 2.0)


if __name__ == "__main__":
    unittest.main()
