"""Position density of a telegraph-type motion with m-Erlang sojourn times.

Modules
-------
special_functions  ascending-series Bessel J and I
algebra_series     cyclic-algebra function table u^l_k as exact term sums
closed_form        densities for m = 1, 2 and the atom at the upper cone
quadrature         adaptive integration over the support
monte_carlo        seedable, chunk-parallel path simulation
pde_verify         finite-difference and symbolic equation residuals
cli                ``erltel`` command-line front end
"""

__version__ = "0.1.0"
