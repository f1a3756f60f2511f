"""LTL Synth - reactive synthesis from LTL to AIGER controllers."""

__version__ = '0.3.0'
