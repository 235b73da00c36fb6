"""Stabilizer-formalism tools for entanglement in doped quantum states."""

__version__ = "0.1.0"
