"""Solvers for zero-sum extensive-form games over refinable imperfect-recall abstractions."""
