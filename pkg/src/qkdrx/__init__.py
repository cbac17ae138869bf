"""Balanced-receiver TIA noise, homodyne clearance and CV-QKD key-rate modeling."""

__version__ = "0.1.0"
