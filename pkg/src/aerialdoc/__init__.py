"""Mission planning, map alignment, and multi-robot coordination for aerial
documentation of building interiors."""

__version__ = "0.1.0"
