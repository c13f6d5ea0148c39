"""Continued fractions with bounded partial quotients: exact arithmetic,
searches, constructions and a few SL2 experiments."""

__version__ = "0.1.0"
