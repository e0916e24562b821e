"""Canonical and local Neron heights for sections of elliptic surfaces via
dynamical escape rates, torsion-parameter location, and the limiting
measures of torsion parameters."""

__version__ = "1.0.0"
