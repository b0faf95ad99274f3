"""Discrete-time linear control systems on matrix Lie groups."""
