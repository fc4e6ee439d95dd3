"""Helper script used by test_import.py"""

import coverage
coverage.process_startup()

import sys
import mcfent

circle = mcfent.DiscreteCurve.circle(1.0, 64)
params = mcfent.FlowParams(t_max=0.01)
mcfent.run_flow(circle, mcfent.FlowKind.MCF, params)
sys.stderr.write('--\n')
mcfent.configure_logging()
mcfent.run_flow(circle, mcfent.FlowKind.MCF, params)
