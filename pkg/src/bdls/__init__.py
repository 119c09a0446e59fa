"""Becker-Doring cluster kinetics and their Lifshitz-Slyozov limit with nucleation boundary."""

__version__ = "0.1.0"
