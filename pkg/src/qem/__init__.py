"""Numerical toolkit for compact quasi-Einstein four-manifolds."""
