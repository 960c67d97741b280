"""Date-sharded snapshot-plus-delta search, and web growth projections."""

__version__ = "0.1.0"
