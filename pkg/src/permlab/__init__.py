"""Multitask membrane-permeability workbench."""

__version__ = "0.1.0"
