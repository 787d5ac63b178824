"""
Origami Curves Toolkit
----------------------

Square-tiled surfaces, their Veech groups and cusps, origamis built from
dessins d'enfants, and a formal-exponent ledger over braid groups.
"""

__version__ = "0.1.0"
