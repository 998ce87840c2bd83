"""Deterministic macroeconomic agent-based simulator for decarbonisation pathways.

Quarterly stock-flow-consistent synthetic economy with five policy levers,
experience-curve technology costs, social-network durable adoption, and
baseline-vs-scenario indicator reporting.
"""

__version__ = "0.1.0"

from decarbsim.kernels import BACKEND_NAME

__all__ = ["BACKEND_NAME", "__version__"]
