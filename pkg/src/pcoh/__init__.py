"""Probabilistic coherence spaces, their power-series morphisms, a PCF front end and cone analysis."""

__version__ = "0.1.0"
