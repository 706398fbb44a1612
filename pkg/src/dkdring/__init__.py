"""Simulator and verification harness for chirality, dispersion and
distance-k dispersion of mobile agents on a ring that loses one edge per round."""

__version__ = "0.1.0"
