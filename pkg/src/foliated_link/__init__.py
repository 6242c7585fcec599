"""Simulation and analysis of all-photonic one-way repeater chains built from CSS codes."""

__version__ = "0.1.0"
