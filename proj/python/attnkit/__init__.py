"""Attention-based encoder-decoder toolkit."""

try:
    from ._attnkit import *  # noqa: F401,F403  (installed package layout)
except ImportError:
    from _attnkit import *  # noqa: F401,F403  (in-tree build on PYTHONPATH)
