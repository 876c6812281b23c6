"""Comparison of program runs and program literals."""
