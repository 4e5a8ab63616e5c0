"""Beta-ensemble matrix models, their edge scalings, and Rayleigh-Ritz solvers
for the stochastic Airy and Bessel operators."""

__version__ = "0.1.0"

from .specfun import DomainError  # noqa: E402

__all__ = ["DomainError", "__version__"]
