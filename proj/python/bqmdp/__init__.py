"""Bisimulation-quotiented MDP toolkit for routing and packing problems."""

try:
    from ._bqmdp import *  # noqa: F401,F403
    from ._bqmdp import __version__  # noqa: F401
except ImportError:  # in-build-tree usage: the extension sits on PYTHONPATH
    from _bqmdp import *  # noqa: F401,F403
    from _bqmdp import __version__  # noqa: F401
