"""Entropy, mean curvature flow and self-shrinkers of curves and
rotationally symmetric surfaces.

The modules build on each other as follows:

module          provides
------------------------------------------------------------------------------
_geometry       DiscreteCurve, ProfileSurface, curvatures, containment
_shrinkers      AnalyticShape, Abresch-Langer curves, Angenent torus
_entropy        F functional, entropy (closed form and multistart search)
_flow           (rescaled) mean curvature flow, singularities, blow-ups
_stability      stability operator, lowest eigenpair, inward perturbation
_properties     numerical checks along flows
_surfaceio      surface files, trace CSV, snapshot directories
_pipeline       entropy table and the perturb/flow/blow-up pipeline
_sweeps         process pool for independent tasks

Surfaces of revolution are handled through their profile curve in the
(r, z) half plane; every quantity is computed for rotationally symmetric
data only.
"""
import sys

if sys.version_info < (3, 8):  # pragma: no cover
    raise ImportError('mcfent requires Python 3.8 or higher')

from ._errors import *
from ._config import *
from ._geometry import *
from ._shrinkers import *
from ._entropy import *
from ._flow import *
from ._stability import *
from ._properties import *
from ._surfaceio import *
from ._pipeline import *
from ._sweeps import *


__all__ = (
    _errors.__all__ +
    _config.__all__ +
    _geometry.__all__ +
    _shrinkers.__all__ +
    _entropy.__all__ +
    _flow.__all__ +
    _stability.__all__ +
    _properties.__all__ +
    _surfaceio.__all__ +
    _pipeline.__all__ +
    _sweeps.__all__
)
