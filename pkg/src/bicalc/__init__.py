"""Numerical double calculus on rectangles of the plane."""
