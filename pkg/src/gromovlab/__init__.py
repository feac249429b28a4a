"""Desk-scale laboratory for the Gromov density model of random groups."""

__version__ = "0.1.0"
