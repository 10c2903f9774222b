"""Mallows ranking models: exact samplers, MLE fitting, renewal analysis and
automatic model-size selection.

Thin wrapper over the compiled extension. Permutations cross the boundary as
plain lists of 1-based integers: word lists for the algebraic operations,
ranked lists for observations and centers.
"""

try:
    from ._mallows import *  # noqa: F401,F403
    from ._mallows import __version__  # noqa: F401
except ImportError:  # build-tree layout: extension next to the package on sys.path
    from _mallows import *  # noqa: F401,F403
    from _mallows import __version__  # noqa: F401
