"""Near-optimal min-sum motion planning for translating unit-square robots."""
__version__ = "0.1.0"
