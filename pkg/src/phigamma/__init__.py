"""Herr-type complexes for torsion (phi, Gamma)-modules over a semidirect p-adic group, at finite level."""
__version__ = "0.1.0"
