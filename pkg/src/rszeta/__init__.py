"""Numerical evaluation of the Rankin-Selberg zeta function of a Hecke
eigenform: exact coefficient tables, the gamma-factor layer, approximate
functional equations, and desk-scale experiments.
"""

__version__ = "0.1.0"
