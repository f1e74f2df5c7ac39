"""Black-box recommendation auditing: recommendation graphs, influence ranking, bias metrics."""

__version__ = "0.1.0"
