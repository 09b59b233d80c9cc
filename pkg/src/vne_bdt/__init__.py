"""Darboux-dressed solutions of the nonlinear von Neumann equation i drho/dt = [H, rho^2]."""

__version__ = "0.1.0"
