"""Numerical laboratory for the 1D nonlocal transport equation

    theta_t + (Lambda^s H theta) theta_x + kappa Lambda^gamma theta = eps theta_xx

with certificates for its blow-up inequalities and exact solutions.
"""

__version__ = "0.1.0"
