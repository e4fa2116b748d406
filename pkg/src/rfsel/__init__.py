"""Greedy RF-chain and beam selection for MIMO ISAC links."""

__version__ = "0.1.0"
