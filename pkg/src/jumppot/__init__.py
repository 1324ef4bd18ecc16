"""jumppot: a numerical laboratory for Markov jump processes with
boundary-decaying jump kernels on C^{1,1} domains.

Subpackages and modules:

* ``profiles``    boundary profile functions and the Green-envelope integral
* ``geometry``    C^{1,1} domains, local frames, boxes and regions
* ``kernels``     product-form jump kernels, killing potentials, boundary
                  profile functions on the shifted half-space
* ``constants``   the killing-constant quadrature, its inverse, and
                  principal-value generator evaluation
* ``reference``   deterministic oracles for subordinate killed Brownian motion
* ``montecarlo``  path simulation and statistical estimators
* ``experiments`` experiment drivers behind the ``jumppot`` CLI
"""

__version__ = "0.1.0"
