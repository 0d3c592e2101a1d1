"""Eta-multiplier Kloosterman sums, twisted quadratic Weyl sums, and traces
of Maass-Poincare series on level 6, with exact q-expansion cross-checks."""

__version__ = "0.1.0"
