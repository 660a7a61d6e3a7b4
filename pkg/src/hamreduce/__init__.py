"""Clock-based local Hamiltonian reductions and partition-function estimation."""

__version__ = "0.1.0"
