"""Spin-chain quantum thermal machines: channels, limit cycles and thermodynamics."""

__version__ = "0.1.0"
