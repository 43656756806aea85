"""Desk-scale multi-view driving video diffusion with 3D condition guidance."""

__version__ = "0.1.0"
